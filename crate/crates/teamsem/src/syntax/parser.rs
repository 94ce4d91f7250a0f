//! Recursive-descent parser for the concrete formula grammar.
//!
//! Precedence, tightest first: atoms and negation, `&`, `\/`, `&&`, `||`.
//! Quantifier bodies extend maximally to the right; parentheses override.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Formula, LogicDialect, Term};
use crate::quantifier::QuantifierRegistry;
use crate::structure::SymbolTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    fn new(pos: (usize, usize), msg: impl Into<String>) -> Self {
        SyntaxError {
            line: pos.0,
            col: pos.1,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    QName(String), // the raw text inside Q[...]
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Eq,
    Neq,
    Bang,
    IAnd, // &
    IOr,  // \/
    EAnd, // &&
    EOr,  // ||
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, (usize, usize))>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            let pos = (self.line, self.col);
            let Some(&c) = self.chars.peek() else { break };
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                '=' => {
                    self.bump();
                    Tok::Eq
                }
                '!' => {
                    self.bump();
                    if self.chars.peek() == Some(&'=') {
                        self.bump();
                        Tok::Neq
                    } else {
                        Tok::Bang
                    }
                }
                '&' => {
                    self.bump();
                    if self.chars.peek() == Some(&'&') {
                        self.bump();
                        Tok::EAnd
                    } else {
                        Tok::IAnd
                    }
                }
                '\\' => {
                    self.bump();
                    if self.chars.peek() == Some(&'/') {
                        self.bump();
                        Tok::IOr
                    } else {
                        return Err(SyntaxError::new(pos, "expected `/` after `\\`"));
                    }
                }
                '|' => {
                    self.bump();
                    if self.chars.peek() == Some(&'|') {
                        self.bump();
                        Tok::EOr
                    } else {
                        return Err(SyntaxError::new(pos, "single `|` is not an operator; use `||`"));
                    }
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let mut ident = String::new();
                    while matches!(self.chars.peek(), Some(c) if c.is_alphanumeric() || *c == '_') {
                        ident.push(self.bump().unwrap());
                    }
                    if ident == "Q" && self.chars.peek() == Some(&'[') {
                        self.bump();
                        let mut name = String::new();
                        let mut depth = 0usize;
                        loop {
                            match self.chars.peek() {
                                Some(']') if depth == 0 => {
                                    self.bump();
                                    break;
                                }
                                Some(&ch) => {
                                    if ch == '[' {
                                        depth += 1;
                                    } else if ch == ']' {
                                        depth -= 1;
                                    }
                                    name.push(ch);
                                    self.bump();
                                }
                                None => {
                                    return Err(SyntaxError::new(pos, "unterminated `Q[`"));
                                }
                            }
                        }
                        Tok::QName(name.trim().to_string())
                    } else {
                        Tok::Ident(ident)
                    }
                }
                other => {
                    return Err(SyntaxError::new(pos, format!("unexpected character `{other}`")));
                }
            };
            out.push((tok, pos));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, (usize, usize))>,
    at: usize,
    dialect: LogicDialect,
    registry: &'a QuantifierRegistry,
    symbols: &'a SymbolTable,
}

pub fn parse(
    text: &str,
    dialect: LogicDialect,
    registry: &QuantifierRegistry,
    symbols: &SymbolTable,
) -> Result<Formula, SyntaxError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        at: 0,
        dialect,
        registry,
        symbols,
    };
    let phi = p.formula()?;
    p.expect_end()?;
    Ok(phi)
}

/// Parses a single term (handy for tests and tooling).
pub fn parse_term(text: &str, symbols: &SymbolTable) -> Result<Term, SyntaxError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        at: 0,
        dialect: LogicDialect::Fo,
        registry: &EMPTY_REGISTRY,
        symbols,
    };
    let t = p.term()?;
    p.expect_end()?;
    Ok(t)
}

static EMPTY_REGISTRY: std::sync::LazyLock<QuantifierRegistry> =
    std::sync::LazyLock::new(QuantifierRegistry::new);

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> (usize, usize) {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|(_, p)| *p)
            .unwrap_or((1, 1))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn eat(&mut self, tok: &Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(SyntaxError::new(self.pos(), format!("expected {what}")))
        }
    }

    fn expect_end(&self) -> Result<(), SyntaxError> {
        if self.at == self.toks.len() {
            Ok(())
        } else {
            Err(SyntaxError::new(self.pos(), "unexpected trailing input"))
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.pos(), msg))
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        self.edisj()
    }

    fn edisj(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.econj()?;
        while self.peek() == Some(&Tok::EOr) {
            let pos = self.pos();
            self.bump();
            self.check_external(pos)?;
            let rhs = self.econj()?;
            lhs = Formula::edisj(lhs, rhs);
        }
        Ok(lhs)
    }

    fn econj(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.idisj()?;
        while self.peek() == Some(&Tok::EAnd) {
            let pos = self.pos();
            self.bump();
            self.check_external(pos)?;
            let rhs = self.idisj()?;
            lhs = Formula::econj(lhs, rhs);
        }
        Ok(lhs)
    }

    fn idisj(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.iconj()?;
        while self.peek() == Some(&Tok::IOr) {
            self.bump();
            let rhs = self.iconj()?;
            lhs = Formula::idisj(lhs, rhs);
        }
        Ok(lhs)
    }

    fn iconj(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.atom_level()?;
        while self.peek() == Some(&Tok::IAnd) {
            self.bump();
            let rhs = self.atom_level()?;
            lhs = Formula::iconj(lhs, rhs);
        }
        Ok(lhs)
    }

    fn check_external(&self, pos: (usize, usize)) -> Result<(), SyntaxError> {
        match self.dialect {
            LogicDialect::Mt => Ok(()),
            d => Err(SyntaxError::new(
                pos,
                format!("external connectives are not part of the {d} dialect"),
            )),
        }
    }

    fn variable(&mut self) -> Result<String, SyntaxError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(name)) => {
                if name.starts_with("_t") {
                    Err(SyntaxError::new(
                        pos,
                        format!("`{name}` is reserved for generated variables"),
                    ))
                } else if is_keyword(&name) {
                    Err(SyntaxError::new(pos, format!("`{name}` is a keyword")))
                } else {
                    Ok(name)
                }
            }
            _ => Err(SyntaxError::new(pos, "expected a variable name")),
        }
    }

    fn atom_level(&mut self) -> Result<Formula, SyntaxError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.bump();
                let phi = self.formula()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(phi)
            }
            Some(Tok::Bang) => {
                self.bump();
                let pos = self.pos();
                let Some(Tok::Ident(name)) = self.bump() else {
                    return Err(SyntaxError::new(pos, "expected a relation name after `!`"));
                };
                if is_keyword(&name) {
                    return Err(SyntaxError::new(
                        pos,
                        "negation applies to relation atoms only (formulas are in negation normal form)",
                    ));
                }
                self.eat(&Tok::LParen, "`(` after negated relation name")?;
                let terms = self.term_list()?;
                Ok(Formula::Rel(false, name, terms))
            }
            Some(Tok::Ident(name)) if name == "exists" || name == "forall" => {
                self.bump();
                let var = self.variable()?;
                self.eat(&Tok::Dot, "`.` after quantified variable")?;
                let body = self.formula()?;
                Ok(if name == "exists" {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                })
            }
            Some(Tok::Ident(name)) if name == "dep" => {
                self.bump();
                self.check_dep_dialect(pos, "dep")?;
                self.eat(&Tok::LParen, "`(` after `dep`")?;
                let terms = self.term_list()?;
                if terms.is_empty() {
                    return Err(SyntaxError::new(pos, "dep needs at least one term"));
                }
                Ok(Formula::Dep(terms))
            }
            Some(Tok::Ident(name)) if name == "indep" => {
                self.bump();
                self.check_dep_dialect(pos, "indep")?;
                self.eat(&Tok::LParen, "`(` after `indep`")?;
                let mut groups = vec![Vec::new()];
                loop {
                    match self.peek() {
                        Some(Tok::RParen) => {
                            self.bump();
                            break;
                        }
                        Some(Tok::Semi) => {
                            self.bump();
                            groups.push(Vec::new());
                        }
                        Some(Tok::Ident(_)) => {
                            let v = self.variable()?;
                            groups.last_mut().unwrap().push(v);
                        }
                        _ => return self.err("expected a variable, `;`, or `)` in indep atom"),
                    }
                }
                let (xs, ys, zs) = match groups.len() {
                    // Unconditioned sugar: indep(ȳ ; z̄) gets an empty x̄.
                    2 => (Vec::new(), groups[0].clone(), groups[1].clone()),
                    3 => (groups[0].clone(), groups[1].clone(), groups[2].clone()),
                    n => {
                        return Err(SyntaxError::new(
                            pos,
                            format!("indep takes 2 or 3 groups, got {n}"),
                        ))
                    }
                };
                if ys.is_empty() || zs.is_empty() {
                    return Err(SyntaxError::new(
                        pos,
                        "the two independent groups of indep must be non-empty",
                    ));
                }
                Ok(Formula::Indep(xs, ys, zs))
            }
            Some(Tok::Ident(name)) if name == "TOP" => {
                self.bump();
                if self.dialect != LogicDialect::Mt {
                    return Err(SyntaxError::new(
                        pos,
                        format!("TOP is mt-logic sugar, not part of the {} dialect", self.dialect),
                    ));
                }
                self.eat(&Tok::LParen, "`(` after TOP")?;
                let mut vars = Vec::new();
                loop {
                    vars.push(self.variable()?);
                    match self.bump() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RParen) => break,
                        _ => return self.err("expected `,` or `)` in TOP"),
                    }
                }
                Ok(Formula::Top(vars))
            }
            Some(Tok::QName(spec)) => {
                self.bump();
                if self.dialect == LogicDialect::Fo {
                    return Err(SyntaxError::new(
                        pos,
                        "generalized quantifiers are not allowed in plain FO",
                    ));
                }
                let q = self
                    .registry
                    .resolve(&spec)
                    .map_err(|e| SyntaxError::new(pos, e.to_string()))?;
                let ty = q.ty().to_vec();
                let mut vars = Vec::new();
                while matches!(self.peek(), Some(Tok::Ident(_))) {
                    vars.push(self.variable()?);
                }
                self.eat(&Tok::Dot, "`.` after quantified variables")?;
                let expected: usize = ty.iter().sum();
                if vars.len() != expected {
                    return Err(SyntaxError::new(
                        pos,
                        format!(
                            "quantifier `{spec}` of type {ty:?} binds {expected} variables, got {}",
                            vars.len()
                        ),
                    ));
                }
                let mut seen = BTreeSet::new();
                for v in &vars {
                    if !seen.insert(v.clone()) {
                        return Err(SyntaxError::new(
                            pos,
                            format!("quantifier variables must be distinct: `{v}` repeats"),
                        ));
                    }
                }
                let bodies = if ty.len() == 1 {
                    vec![self.formula()?]
                } else {
                    self.eat(&Tok::LParen, "`(` before quantifier body tuple")?;
                    let mut bodies = Vec::new();
                    loop {
                        bodies.push(self.formula()?);
                        match self.bump() {
                            Some(Tok::Comma) => continue,
                            Some(Tok::RParen) => break,
                            _ => return self.err("expected `,` or `)` in quantifier body tuple"),
                        }
                    }
                    bodies
                };
                if bodies.len() != ty.len() {
                    return Err(SyntaxError::new(
                        pos,
                        format!("quantifier `{spec}` takes {} bodies, got {}", ty.len(), bodies.len()),
                    ));
                }
                Ok(Formula::QApply(q.name().to_string(), vars, bodies))
            }
            Some(Tok::Ident(_)) => {
                // A relation atom or the left-hand term of an equation.
                let head = self.term()?;
                match self.peek() {
                    Some(Tok::Eq) => {
                        self.bump();
                        let rhs = self.term()?;
                        Ok(Formula::Eq(true, head, rhs))
                    }
                    Some(Tok::Neq) => {
                        self.bump();
                        let rhs = self.term()?;
                        Ok(Formula::Eq(false, head, rhs))
                    }
                    _ => match head {
                        Term::App(name, args) => Ok(Formula::Rel(true, name, args)),
                        _ => self.err("expected `=` or `!=` after a term"),
                    },
                }
            }
            _ => self.err("expected a formula"),
        }
    }

    fn check_dep_dialect(&self, pos: (usize, usize), what: &str) -> Result<(), SyntaxError> {
        if self.dialect == LogicDialect::Dep {
            Ok(())
        } else {
            Err(SyntaxError::new(
                pos,
                format!("{what} atoms belong to the dep dialect, not {}", self.dialect),
            ))
        }
    }

    fn term_list(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut terms = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.bump();
            return Ok(terms);
        }
        loop {
            terms.push(self.term()?);
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => return self.err("expected `,` or `)` in term list"),
            }
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let pos = self.pos();
        let Some(Tok::Ident(name)) = self.bump() else {
            return Err(SyntaxError::new(pos, "expected a term"));
        };
        if is_keyword(&name) {
            return Err(SyntaxError::new(pos, format!("`{name}` is a keyword")));
        }
        if self.peek() == Some(&Tok::LParen) {
            self.bump();
            let args = self.term_list()?;
            return Ok(Term::App(name, args));
        }
        if name.starts_with("_t") {
            return Err(SyntaxError::new(
                pos,
                format!("`{name}` is reserved for generated variables"),
            ));
        }
        if self.symbols.constants.contains(&name) {
            Ok(Term::Const(name))
        } else {
            Ok(Term::Var(name))
        }
    }
}

fn is_keyword(name: &str) -> bool {
    matches!(name, "exists" | "forall" | "dep" | "indep" | "TOP" | "Q")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::print;

    fn reg() -> QuantifierRegistry {
        QuantifierRegistry::new()
    }

    fn sym() -> SymbolTable {
        SymbolTable::default()
    }

    fn p(text: &str, d: LogicDialect) -> Formula {
        parse(text, d, &reg(), &sym()).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(
            p("dep(x, y)", LogicDialect::Dep),
            Formula::Dep(vec![Term::Var("x".into()), Term::Var("y".into())])
        );
        assert_eq!(
            p("exists x. x = x", LogicDialect::Mt),
            Formula::exists("x", Formula::var_eq("x", "x"))
        );
        let q = p("Q[most1] x. A(x) && TOP(x)", LogicDialect::Mt);
        match q {
            Formula::QApply(name, vars, bodies) => {
                assert_eq!(name, "most1");
                assert_eq!(vars, vec!["x".to_string()]);
                assert!(matches!(bodies[0], Formula::EConj(..)));
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn precedence() {
        // & binds tighter than \/ binds tighter than && binds tighter than ||.
        let phi = p("x = x & x = y \\/ y = y && x = x || y = x", LogicDialect::Mt);
        match phi {
            Formula::EDisj(l, _) => match *l {
                Formula::EConj(l2, _) => match *l2 {
                    Formula::IDisj(l3, _) => assert!(matches!(*l3, Formula::IConj(..))),
                    other => panic!("expected IDisj, got {other:?}"),
                },
                other => panic!("expected EConj, got {other:?}"),
            },
            other => panic!("expected EDisj, got {other:?}"),
        }
    }

    #[test]
    fn quantifier_extends_right() {
        let phi = p("x = x & exists y. y = y & x = y", LogicDialect::Fo);
        // The quantifier body swallows the rest: x=x & (exists y. (y=y & x=y)).
        match phi {
            Formula::IConj(_, r) => match *r {
                Formula::Exists(_, body) => assert!(matches!(*body, Formula::IConj(..))),
                other => panic!("expected Exists, got {other:?}"),
            },
            other => panic!("expected IConj, got {other:?}"),
        }
    }

    #[test]
    fn errors_cite_positions() {
        let err = parse("x =", LogicDialect::Fo, &reg(), &sym()).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col >= 3);
        let err = parse("x = x &&\ny = y", LogicDialect::Dep, &reg(), &sym()).unwrap_err();
        assert!(err.to_string().contains("external connectives"));
        let err = parse("Q[nope] x. x = x", LogicDialect::Mt, &reg(), &sym()).unwrap_err();
        assert!(err.to_string().contains("unknown quantifier"));
    }

    #[test]
    fn dialect_violations() {
        assert!(parse("dep(x)", LogicDialect::Mt, &reg(), &sym()).is_err());
        assert!(parse("TOP(x)", LogicDialect::Dep, &reg(), &sym()).is_err());
        assert!(parse("Q[E] x. x = x", LogicDialect::Fo, &reg(), &sym()).is_err());
        assert!(parse("x = x || y = y", LogicDialect::Dep, &reg(), &sym()).is_err());
    }

    #[test]
    fn indep_grouping() {
        assert_eq!(
            p("indep(x1 x2 ; y1 ; z1 z2)", LogicDialect::Dep),
            Formula::Indep(
                vec!["x1".into(), "x2".into()],
                vec!["y1".into()],
                vec!["z1".into(), "z2".into()]
            )
        );
        assert_eq!(
            p("indep(; y ; z)", LogicDialect::Dep),
            Formula::Indep(vec![], vec!["y".into()], vec!["z".into()])
        );
        // Two-group sugar means unconditioned.
        assert_eq!(
            p("indep(y ; z)", LogicDialect::Dep),
            Formula::Indep(vec![], vec!["y".into()], vec!["z".into()])
        );
    }

    #[test]
    fn reserved_fresh_variables_rejected() {
        assert!(parse("_t0 = x", LogicDialect::Fo, &reg(), &sym()).is_err());
        assert!(parse("exists _t1. x = x", LogicDialect::Fo, &reg(), &sym()).is_err());
    }

    #[test]
    fn symbol_table_resolves_constants() {
        let mut st = SymbolTable::default();
        st.constants.insert("c".into());
        let phi = parse("c = x", LogicDialect::Fo, &reg(), &st).unwrap();
        assert_eq!(
            phi,
            Formula::Eq(true, Term::Const("c".into()), Term::Var("x".into()))
        );
        // Without the table, `c` is a variable.
        let phi2 = p("c = x", LogicDialect::Fo);
        assert_eq!(
            phi2,
            Formula::Eq(true, Term::Var("c".into()), Term::Var("x".into()))
        );
    }

    #[test]
    fn multi_body_quantifier() {
        let phi = p("Q[most] x y. (A(x), B(y))", LogicDialect::Foq);
        match phi {
            Formula::QApply(name, vars, bodies) => {
                assert_eq!(name, "most");
                assert_eq!(vars.len(), 2);
                assert_eq!(bodies.len(), 2);
            }
            other => panic!("unexpected: {other:?}"),
        }
        // Wrong variable count is a parse error.
        assert!(parse("Q[most] x. (A(x), B(x))", LogicDialect::Foq, &reg(), &sym()).is_err());
    }

    #[test]
    fn print_parse_round_trip_spot_checks() {
        for (text, d) in [
            ("dep(x, y)", LogicDialect::Dep),
            ("indep(x ; y ; z)", LogicDialect::Dep),
            ("exists x. (x = x || x != x)", LogicDialect::Mt),
            ("x = x & (y = y \\/ x = y)", LogicDialect::Fo),
            ("Q[between:1:2] x. P(x)", LogicDialect::Mt),
            ("Q[iter(E, A)] x y. R(x, y)", LogicDialect::Mt),
            ("!R(x, f(y))", LogicDialect::Fo),
            ("TOP(x, y)", LogicDialect::Mt),
        ] {
            let mut st = SymbolTable::default();
            st.functions.insert("f".into(), 1);
            let phi = parse(text, d, &reg(), &st).unwrap();
            let printed = print(&phi);
            let back = parse(&printed, d, &reg(), &st).unwrap();
            assert_eq!(phi, back, "round-trip failed for `{text}` -> `{printed}`");
        }
    }
}
