//! Formula AST, dialect checking, syntactic analyses, and sugar expansion.
//!
//! All formulas are in negation normal form by construction: negation
//! exists only on relation atoms (`!R(...)`) and equations (`!=`). There is
//! no general negation node.

mod parser;
mod printer;

pub use parser::{parse, parse_term, SyntaxError};
pub use printer::print;

use std::collections::BTreeSet;

/// First-order terms. The parser resolves bare identifiers to `Var` unless
/// a symbol table declares them as constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.vars(out);
                }
            }
        }
    }
}

/// Formula AST covering every node of the three grammars.
///
/// `IConj`/`IDisj` are the team-splitting internal connectives (`&`, `\/`);
/// `EConj`/`EDisj` are the external ones (`&&`, `||`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// `R(t̄)` when positive, `!R(t̄)` otherwise.
    Rel(bool, String, Vec<Term>),
    /// `t = t` when positive, `t != t` otherwise.
    Eq(bool, Term, Term),
    /// `dep(t₁,…,t_{n+1})`: the last term depends on the others.
    Dep(Vec<Term>),
    /// `indep(x̄; ȳ; z̄)`: `ȳ ⊥_x̄ z̄`, conditioning group first.
    Indep(Vec<String>, Vec<String>, Vec<String>),
    IConj(Box<Formula>, Box<Formula>),
    IDisj(Box<Formula>, Box<Formula>),
    EConj(Box<Formula>, Box<Formula>),
    EDisj(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    /// `Q[name] x̄. body` (one body per component of the quantifier type).
    QApply(String, Vec<String>, Vec<Formula>),
    /// `TOP(w̄)` sugar for the sentence `∃w̄(w₀=w₀ || w₀!=w₀)`.
    Top(Vec<String>),
}

/// Which formula class a text is parsed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicDialect {
    /// First-order: literals, internal connectives, ∃/∀.
    Fo,
    /// First-order with generalized quantifiers.
    Foq,
    /// Dependence logic: FOQ plus dep/indep atoms; no external connectives.
    Dep,
    /// mt-logic: FOQ plus external connectives and TOP; no dep/indep atoms.
    Mt,
}

impl std::fmt::Display for LogicDialect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LogicDialect::Fo => "fo",
            LogicDialect::Foq => "foq",
            LogicDialect::Dep => "dep",
            LogicDialect::Mt => "mt",
        };
        write!(f, "{s}")
    }
}

impl Formula {
    pub fn iconj(a: Formula, b: Formula) -> Formula {
        Formula::IConj(Box::new(a), Box::new(b))
    }
    pub fn idisj(a: Formula, b: Formula) -> Formula {
        Formula::IDisj(Box::new(a), Box::new(b))
    }
    pub fn econj(a: Formula, b: Formula) -> Formula {
        Formula::EConj(Box::new(a), Box::new(b))
    }
    pub fn edisj(a: Formula, b: Formula) -> Formula {
        Formula::EDisj(Box::new(a), Box::new(b))
    }
    pub fn exists(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(body))
    }
    pub fn forall(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(body))
    }
    pub fn var_eq(x: impl Into<String>, y: impl Into<String>) -> Formula {
        Formula::Eq(true, Term::Var(x.into()), Term::Var(y.into()))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Rel(..) | Formula::Eq(..) | Formula::Dep(_) | Formula::Indep(..) | Formula::Top(_) => {
                vec![]
            }
            Formula::IConj(a, b)
            | Formula::IDisj(a, b)
            | Formula::EConj(a, b)
            | Formula::EDisj(a, b) => vec![a, b],
            Formula::Exists(_, a) | Formula::Forall(_, a) => vec![a],
            Formula::QApply(_, _, bodies) => bodies.iter().collect(),
        }
    }

    /// Free variables, treating dependence atoms like any other atom.
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::Rel(_, _, terms) | Formula::Dep(terms) => {
                let mut out = BTreeSet::new();
                for t in terms {
                    t.vars(&mut out);
                }
                out
            }
            Formula::Eq(_, a, b) => {
                let mut out = BTreeSet::new();
                a.vars(&mut out);
                b.vars(&mut out);
                out
            }
            Formula::Indep(xs, ys, zs) => xs.iter().chain(ys).chain(zs).cloned().collect(),
            Formula::IConj(a, b)
            | Formula::IDisj(a, b)
            | Formula::EConj(a, b)
            | Formula::EDisj(a, b) => {
                let mut out = a.free_vars();
                out.extend(b.free_vars());
                out
            }
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                let mut out = a.free_vars();
                out.remove(x);
                out
            }
            Formula::QApply(_, vars, bodies) => {
                let mut out = BTreeSet::new();
                for b in bodies {
                    out.extend(b.free_vars());
                }
                for v in vars {
                    out.remove(v);
                }
                out
            }
            Formula::Top(_) => BTreeSet::new(),
        }
    }

    /// Bound variables: every variable bound by some quantifier.
    pub fn bound_vars(&self) -> BTreeSet<String> {
        match self {
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                let mut out = a.bound_vars();
                out.insert(x.clone());
                out
            }
            Formula::QApply(_, vars, bodies) => {
                let mut out: BTreeSet<String> = vars.iter().cloned().collect();
                for b in bodies {
                    out.extend(b.bound_vars());
                }
                out
            }
            Formula::Top(ws) => ws.iter().cloned().collect(),
            _ => {
                let mut out = BTreeSet::new();
                for c in self.children() {
                    out.extend(c.bound_vars());
                }
                out
            }
        }
    }

    /// All variables occurring in the formula, free or bound.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = self.free_vars();
        out.extend(self.bound_vars());
        out
    }

    /// A formula is untangled if no quantifier on `x` appears in the scope
    /// of another quantifier on `x` (∃, ∀, and generalized quantifiers are
    /// treated uniformly) and no variable is both free and bound.
    pub fn is_untangled(&self) -> bool {
        fn no_requantification(phi: &Formula, in_scope: &mut BTreeSet<String>) -> bool {
            match phi {
                Formula::Exists(x, a) | Formula::Forall(x, a) => {
                    if in_scope.contains(x) {
                        return false;
                    }
                    in_scope.insert(x.clone());
                    let ok = no_requantification(a, in_scope);
                    in_scope.remove(x);
                    ok
                }
                Formula::QApply(_, vars, bodies) => {
                    let varset: BTreeSet<&String> = vars.iter().collect();
                    if varset.len() != vars.len() {
                        return false;
                    }
                    if vars.iter().any(|v| in_scope.contains(v)) {
                        return false;
                    }
                    for v in vars {
                        in_scope.insert(v.clone());
                    }
                    let ok = bodies.iter().all(|b| no_requantification(b, in_scope));
                    for v in vars {
                        in_scope.remove(v);
                    }
                    ok
                }
                Formula::Top(ws) => {
                    let wset: BTreeSet<&String> = ws.iter().collect();
                    wset.len() == ws.len() && ws.iter().all(|w| !in_scope.contains(w))
                }
                _ => {
                    let mut ok = true;
                    for c in phi.children() {
                        ok &= no_requantification(c, in_scope);
                    }
                    ok
                }
            }
        }
        let free = self.free_vars();
        let bound = self.bound_vars();
        free.is_disjoint(&bound) && no_requantification(self, &mut BTreeSet::new())
    }

    /// First-orderness is dialect-relative: dependence logic calls a formula
    /// first-order when it has no dep/indep atom; mt-logic when it has no
    /// external connective.
    pub fn is_first_order(&self, dialect: LogicDialect) -> bool {
        let bad = |f: &Formula| match dialect {
            LogicDialect::Dep => matches!(f, Formula::Dep(_) | Formula::Indep(..)),
            LogicDialect::Mt => matches!(f, Formula::EConj(..) | Formula::EDisj(..)),
            LogicDialect::Fo | LogicDialect::Foq => matches!(
                f,
                Formula::Dep(_) | Formula::Indep(..) | Formula::EConj(..) | Formula::EDisj(..)
            ),
        };
        fn walk(f: &Formula, bad: &dyn Fn(&Formula) -> bool) -> bool {
            !bad(f) && f.children().iter().all(|c| walk(c, bad))
        }
        walk(self, &bad)
    }

    /// True iff the node kinds are all legal in the dialect.
    pub fn check_dialect(&self, dialect: LogicDialect) -> Result<(), String> {
        let illegal = match (self, dialect) {
            (Formula::Dep(_) | Formula::Indep(..), LogicDialect::Fo | LogicDialect::Foq) => {
                Some("dependence atoms are not first-order")
            }
            (Formula::Dep(_) | Formula::Indep(..), LogicDialect::Mt) => {
                Some("mt-logic has no primitive dependence atoms; translate them first")
            }
            (Formula::EConj(..) | Formula::EDisj(..), LogicDialect::Dep) => {
                Some("dependence logic has no external connectives")
            }
            (
                Formula::EConj(..) | Formula::EDisj(..),
                LogicDialect::Fo | LogicDialect::Foq,
            ) => Some("external connectives are mt-logic only"),
            (Formula::QApply(..), LogicDialect::Fo) => {
                Some("generalized quantifiers are not allowed in plain FO")
            }
            (Formula::Top(_), LogicDialect::Fo | LogicDialect::Foq | LogicDialect::Dep) => {
                Some("TOP is mt-logic sugar")
            }
            _ => None,
        };
        if let Some(msg) = illegal {
            return Err(msg.to_string());
        }
        for c in self.children() {
            c.check_dialect(dialect)?;
        }
        Ok(())
    }

    /// Rewrites `TOP(w̄)` into `∃w̄(w₀=w₀ || w₀≠w₀)`. The disjunction is the
    /// external one: both the full team and the empty team must satisfy the
    /// expanded body. Idempotent on sugar-free input.
    pub fn expand_sugar(&self) -> Result<Formula, String> {
        Ok(match self {
            Formula::Top(ws) => top_expansion(ws)?,
            Formula::IConj(a, b) => Formula::iconj(a.expand_sugar()?, b.expand_sugar()?),
            Formula::IDisj(a, b) => Formula::idisj(a.expand_sugar()?, b.expand_sugar()?),
            Formula::EConj(a, b) => Formula::econj(a.expand_sugar()?, b.expand_sugar()?),
            Formula::EDisj(a, b) => Formula::edisj(a.expand_sugar()?, b.expand_sugar()?),
            Formula::Exists(x, a) => Formula::exists(x.clone(), a.expand_sugar()?),
            Formula::Forall(x, a) => Formula::forall(x.clone(), a.expand_sugar()?),
            Formula::QApply(name, vars, bodies) => Formula::QApply(
                name.clone(),
                vars.clone(),
                bodies
                    .iter()
                    .map(|b| b.expand_sugar())
                    .collect::<Result<_, _>>()?,
            ),
            other => other.clone(),
        })
    }

    pub fn contains_sugar(&self) -> bool {
        matches!(self, Formula::Top(_)) || self.children().iter().any(|c| c.contains_sugar())
    }
}

/// The expansion of `⊤_w̄`: `∃w₀…∃w_{k-1}(w₀=w₀ || w₀≠w₀)`.
pub fn top_expansion(ws: &[String]) -> Result<Formula, String> {
    let Some(w0) = ws.first() else {
        return Err("TOP needs at least one variable".to_string());
    };
    let mut seen = BTreeSet::new();
    for w in ws {
        if !seen.insert(w) {
            return Err(format!("TOP variables must be distinct: `{w}` repeats"));
        }
    }
    let body = Formula::edisj(
        Formula::Eq(true, Term::Var(w0.clone()), Term::Var(w0.clone())),
        Formula::Eq(false, Term::Var(w0.clone()), Term::Var(w0.clone())),
    );
    let mut out = body;
    for w in ws.iter().rev() {
        out = Formula::exists(w.clone(), out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantifier::QuantifierRegistry;
    use crate::structure::SymbolTable;

    fn p(text: &str, d: LogicDialect) -> Formula {
        parse(text, d, &QuantifierRegistry::new(), &SymbolTable::default()).unwrap()
    }

    #[test]
    fn free_vars_treat_dep_atoms_like_atoms() {
        assert_eq!(
            p("dep(x, y)", LogicDialect::Dep).free_vars(),
            ["x".to_string(), "y".to_string()].into()
        );
        assert_eq!(
            p("exists x. x = y", LogicDialect::Fo).free_vars(),
            ["y".to_string()].into()
        );
        assert_eq!(
            p("exists x. forall y. R(x, y)", LogicDialect::Fo).bound_vars(),
            ["x".to_string(), "y".to_string()].into()
        );
    }

    #[test]
    fn untangledness() {
        assert!(!p("exists x. exists x. x = x", LogicDialect::Fo).is_untangled());
        assert!(p("exists x. exists y. R(x, y)", LogicDialect::Fo).is_untangled());
        // A variable both free and bound is tangled.
        assert!(!p("x = x & exists x. x = x", LogicDialect::Fo).is_untangled());
        // Sibling re-use without nesting or free occurrence is fine; note
        // that without parentheses the second quantifier would nest inside
        // the first (bodies extend maximally right).
        assert!(p("(exists x. P(x)) & (exists x. P(x))", LogicDialect::Fo).is_untangled());
        assert!(!p("exists x. P(x) & exists x. P(x)", LogicDialect::Fo).is_untangled());
    }

    #[test]
    fn first_orderness_per_dialect() {
        assert!(!p("dep(x, y)", LogicDialect::Dep).is_first_order(LogicDialect::Dep));
        assert!(p("x = y", LogicDialect::Dep).is_first_order(LogicDialect::Dep));
        assert!(p("x = y & x = x", LogicDialect::Mt).is_first_order(LogicDialect::Mt));
        assert!(!p("x = y && x = x", LogicDialect::Mt).is_first_order(LogicDialect::Mt));
        assert!(p("exists x. x = y", LogicDialect::Mt).is_first_order(LogicDialect::Mt));
    }

    #[test]
    fn sugar_expansion() {
        let top = Formula::Top(vec!["x".into()]);
        let expanded = top.expand_sugar().unwrap();
        assert_eq!(expanded, p("exists x. (x = x || x != x)", LogicDialect::Mt));
        // Two variables nest two quantifiers, first variable in the body.
        let top2 = Formula::Top(vec!["x".into(), "y".into()]);
        let e2 = top2.expand_sugar().unwrap();
        assert_eq!(
            e2,
            p("exists x. exists y. (x = x || x != x)", LogicDialect::Mt)
        );
        // Idempotent on sugar-free input.
        let plain = p("R(x) & x = y", LogicDialect::Fo);
        assert_eq!(plain.expand_sugar().unwrap(), plain);
        // NNF is preserved and the result is untangled for distinct w̄.
        assert!(e2.is_untangled());
        assert!(Formula::Top(vec![]).expand_sugar().is_err());
    }

    #[test]
    fn dialect_checks() {
        assert!(p("x = x && x = x", LogicDialect::Mt)
            .check_dialect(LogicDialect::Dep)
            .is_err());
        assert!(p("dep(x, y)", LogicDialect::Dep)
            .check_dialect(LogicDialect::Mt)
            .is_err());
        assert!(p("indep(; x ; y)", LogicDialect::Dep)
            .check_dialect(LogicDialect::Fo)
            .is_err());
    }
}
