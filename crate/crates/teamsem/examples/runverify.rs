fn main() {
    let props: Vec<String> = std::env::args().skip(1).collect();
    let opts = teamsem::verify::VerifyOptions {
        props: if props.is_empty() { None } else { Some(props) },
        ..Default::default()
    };
    match teamsem::verify::run_verify(&opts) {
        Ok(r) => print!("{}", r.render_text()),
        Err(e) => println!("error: {e}"),
    }
}
