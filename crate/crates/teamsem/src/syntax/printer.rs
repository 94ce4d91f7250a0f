//! Canonical formula printer. `parse(print(φ)) = φ` on ASTs.

use super::{Formula, Term};

pub fn print(phi: &Formula) -> String {
    let mut out = String::new();
    write_formula(phi, 0, &mut out);
    out
}

fn level(phi: &Formula) -> u8 {
    match phi {
        Formula::EDisj(..) => 0,
        Formula::EConj(..) => 1,
        Formula::IDisj(..) => 2,
        Formula::IConj(..) => 3,
        // Quantifiers swallow everything to their right, so as operands they
        // are always parenthesized; atoms never need parentheses.
        Formula::Exists(..) | Formula::Forall(..) | Formula::QApply(..) => 5,
        _ => 4,
    }
}

fn is_quantifier(phi: &Formula) -> bool {
    matches!(
        phi,
        Formula::Exists(..) | Formula::Forall(..) | Formula::QApply(..)
    )
}

fn write_operand(phi: &Formula, parent_level: u8, rightmost: bool, out: &mut String) {
    let needs_parens = if is_quantifier(phi) {
        !rightmost
    } else {
        let l = level(phi);
        l < parent_level || (l == parent_level && rightmost)
    };
    if needs_parens {
        out.push('(');
        write_formula(phi, 0, out);
        out.push(')');
    } else {
        write_formula(phi, parent_level, out);
    }
}

fn write_formula(phi: &Formula, min_level: u8, out: &mut String) {
    match phi {
        Formula::Rel(pos, name, terms) => {
            if !*pos {
                out.push('!');
            }
            out.push_str(name);
            out.push('(');
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(t, out);
            }
            out.push(')');
        }
        Formula::Eq(pos, a, b) => {
            write_term(a, out);
            out.push_str(if *pos { " = " } else { " != " });
            write_term(b, out);
        }
        Formula::Dep(terms) => {
            out.push_str("dep(");
            for (i, t) in terms.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(t, out);
            }
            out.push(')');
        }
        Formula::Indep(xs, ys, zs) => {
            out.push_str("indep(");
            out.push_str(&xs.join(" "));
            out.push_str(" ; ");
            out.push_str(&ys.join(" "));
            out.push_str(" ; ");
            out.push_str(&zs.join(" "));
            out.push(')');
        }
        Formula::IConj(a, b) => {
            write_operand(a, 3, false, out);
            out.push_str(" & ");
            write_operand(b, 3, true, out);
        }
        Formula::IDisj(a, b) => {
            write_operand(a, 2, false, out);
            out.push_str(" \\/ ");
            write_operand(b, 2, true, out);
        }
        Formula::EConj(a, b) => {
            write_operand(a, 1, false, out);
            out.push_str(" && ");
            write_operand(b, 1, true, out);
        }
        Formula::EDisj(a, b) => {
            write_operand(a, 0, false, out);
            out.push_str(" || ");
            write_operand(b, 0, true, out);
        }
        Formula::Exists(x, body) => {
            out.push_str("exists ");
            out.push_str(x);
            out.push_str(". ");
            write_formula(body, min_level, out);
        }
        Formula::Forall(x, body) => {
            out.push_str("forall ");
            out.push_str(x);
            out.push_str(". ");
            write_formula(body, min_level, out);
        }
        Formula::QApply(name, vars, bodies) => {
            out.push_str("Q[");
            out.push_str(name);
            out.push(']');
            for v in vars {
                out.push(' ');
                out.push_str(v);
            }
            out.push_str(". ");
            if bodies.len() == 1 {
                write_formula(&bodies[0], min_level, out);
            } else {
                out.push('(');
                for (i, b) in bodies.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_formula(b, 0, out);
                }
                out.push(')');
            }
        }
        Formula::Top(vars) => {
            out.push_str("TOP(");
            out.push_str(&vars.join(", "));
            out.push(')');
        }
    }
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(x) | Term::Const(x) => out.push_str(x),
        Term::App(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(a, out);
            }
            out.push(')');
        }
    }
}
