//! Encodings of dependence-logic atoms into mt-logic, the `φ ↦ φ⁺`
//! translation, the disjointing rewrite for independence atoms, and the
//! branching-formula builder.

use std::collections::BTreeSet;

use crate::error::EvalError;
use crate::quantifier::Quantifier;
use crate::syntax::{top_expansion, Formula, LogicDialect, Term};

/// Deterministic supply of fresh variables `_t0, _t1, …`; the parser
/// reserves this namespace.
#[derive(Debug, Clone, Default)]
pub struct FreshVars {
    next: usize,
    avoid: BTreeSet<String>,
}

impl FreshVars {
    pub fn avoiding<I: IntoIterator<Item = String>>(vars: I) -> Self {
        FreshVars {
            next: 0,
            avoid: vars.into_iter().collect(),
        }
    }

    pub fn fresh(&mut self) -> String {
        loop {
            let v = format!("_t{}", self.next);
            self.next += 1;
            if !self.avoid.contains(&v) {
                self.avoid.insert(v.clone());
                return v;
            }
        }
    }
}

fn top(vars: &[String]) -> Formula {
    Formula::Top(vars.to_vec())
}

/// `⊤_w̄`: the sentence `∃w̄(w₀=w₀ || w₀≠w₀)`, in expanded form.
pub fn top_sentence(vars: &[String]) -> Result<Formula, EvalError> {
    top_expansion(vars).map_err(EvalError::Precondition)
}

fn forall_block(vars: &[String], body: Formula) -> Formula {
    let mut out = body;
    for v in vars.iter().rev() {
        out = Formula::forall(v.clone(), out);
    }
    out
}

fn check_disjoint(groups: &[&[String]]) -> Result<(), EvalError> {
    for (i, g1) in groups.iter().enumerate() {
        for g2 in groups.iter().skip(i + 1) {
            for v in *g1 {
                if g2.contains(v) {
                    return Err(EvalError::Precondition(format!(
                        "independence-atom groups must be pairwise disjoint; `{v}` repeats \
                         (apply the disjointing rewrite first)"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Encodes the independence atom `ȳ ⊥_x̄ z̄` over a team domain `dom` as
/// `∀w̄(⊤_{x̄,ȳ} ⩓ ⊤_{x̄,z̄})` with `w̄ = dom ∖ {x̄,ȳ,z̄}`.
pub fn encode_indep(
    xs: &[String],
    ys: &[String],
    zs: &[String],
    dom: &BTreeSet<String>,
) -> Result<Formula, EvalError> {
    if ys.is_empty() || zs.is_empty() {
        return Err(EvalError::Precondition(
            "independence atom needs non-empty independent groups".into(),
        ));
    }
    check_disjoint(&[xs, ys, zs])?;
    let used: BTreeSet<&String> = xs.iter().chain(ys).chain(zs).collect();
    let w: Vec<String> = dom.iter().filter(|v| !used.contains(v)).cloned().collect();
    let xy: Vec<String> = xs.iter().chain(ys).cloned().collect();
    let xz: Vec<String> = xs.iter().chain(zs).cloned().collect();
    Ok(forall_block(&w, Formula::iconj(top(&xy), top(&xz))))
}

/// Encodes the dependence atom `dep(x̄, y)` over a team domain `dom` as
/// `∃z(∀w̄(⊤_{x̄,y} ⩓ ⊤_{x̄,z}) ∧ (y=z ⩓ ⊤_{dom,z}))` with fresh `z` and
/// `w̄ = dom ∖ {x̄,y}`. The second `⊤` ranges over the whole witness
/// domain, which is what makes the conjunct say exactly "every row has
/// y = z".
pub fn encode_dep(
    xs: &[String],
    y: &str,
    dom: &BTreeSet<String>,
    fresh: &mut FreshVars,
) -> Result<Formula, EvalError> {
    if xs.iter().any(|v| v == y) {
        return Err(EvalError::Precondition(format!(
            "dependent variable `{y}` also occurs in the conditioning group"
        )));
    }
    let z = fresh.fresh();
    let mut head: Vec<String> = xs.to_vec();
    head.push(y.to_string());
    let mut head_z: Vec<String> = xs.to_vec();
    head_z.push(z.clone());
    let w: Vec<String> = dom
        .iter()
        .filter(|v| !xs.contains(v) && *v != y)
        .cloned()
        .collect();
    let mut full_dom: Vec<String> = dom.iter().cloned().collect();
    full_dom.push(z.clone());
    let first = forall_block(&w, Formula::iconj(top(&head), top(&head_z)));
    let second = Formula::iconj(
        Formula::Eq(true, Term::Var(y.to_string()), Term::Var(z.clone())),
        top(&full_dom),
    );
    Ok(Formula::exists(z, Formula::econj(first, second)))
}

/// Rewrites an independence atom with overlapping groups into
/// `∃v̄,w̄(v̄=ȳ ⩓ w̄=z̄ ⩓ v̄ ⊥_x̄ w̄)` with pairwise-disjoint groups.
/// Only the overlapping variables are copied; an already-disjoint atom is
/// returned unchanged.
pub fn disjoint_rewrite(
    xs: &[String],
    ys: &[String],
    zs: &[String],
    fresh: &mut FreshVars,
) -> Formula {
    let in_other = |v: &String, own: usize| -> bool {
        let groups: [&[String]; 3] = [xs, ys, zs];
        groups
            .iter()
            .enumerate()
            .any(|(i, g)| i != own && g.contains(v))
    };
    let mut binders: Vec<String> = Vec::new();
    let mut equalities: Vec<(String, String)> = Vec::new();
    let mut rewrite_group = |group: &[String], own: usize| -> Vec<String> {
        group
            .iter()
            .map(|v| {
                if in_other(v, own) {
                    let fresh_v = fresh.fresh();
                    binders.push(fresh_v.clone());
                    equalities.push((fresh_v.clone(), v.clone()));
                    fresh_v
                } else {
                    v.clone()
                }
            })
            .collect()
    };
    let new_ys = rewrite_group(ys, 1);
    let new_zs = rewrite_group(zs, 2);
    if binders.is_empty() {
        return Formula::Indep(xs.to_vec(), ys.to_vec(), zs.to_vec());
    }
    let mut body = Formula::Indep(xs.to_vec(), new_ys, new_zs);
    for (v, orig) in equalities.into_iter().rev() {
        body = Formula::iconj(
            Formula::Eq(true, Term::Var(v), Term::Var(orig)),
            body,
        );
    }
    for v in binders.into_iter().rev() {
        body = Formula::exists(v, body);
    }
    body
}

/// `f(w̄, φ)`: the translation of a dependence-logic formula into mt-logic
/// relative to a tracked domain `w̄`. `φ⁺ = f(FV(φ), φ)`.
pub fn translate_with_domain(
    phi: &Formula,
    dom: &BTreeSet<String>,
) -> Result<Formula, EvalError> {
    phi.check_dialect(LogicDialect::Dep)
        .map_err(EvalError::WrongLogic)?;
    for v in phi.free_vars() {
        if !dom.contains(&v) {
            return Err(EvalError::Precondition(format!(
                "free variable `{v}` is outside the tracked domain"
            )));
        }
    }
    let mut fresh = FreshVars::avoiding(phi.all_vars().into_iter().chain(dom.iter().cloned()));
    translate_rec(phi, dom, &mut fresh)
}

/// `φ⁺ = f(FV(φ), φ)`.
pub fn translate_plus(phi: &Formula) -> Result<Formula, EvalError> {
    translate_with_domain(phi, &phi.free_vars())
}

fn translate_rec(
    phi: &Formula,
    dom: &BTreeSet<String>,
    fresh: &mut FreshVars,
) -> Result<Formula, EvalError> {
    Ok(match phi {
        Formula::Rel(..) | Formula::Eq(..) => {
            let w: Vec<String> = dom.iter().cloned().collect();
            if w.is_empty() {
                // A closed literal still needs its ⊤-conjunct so that the
                // empty team satisfies the translation; quantify a fresh
                // dummy variable to carry it.
                let v = fresh.fresh();
                Formula::forall(
                    v.clone(),
                    Formula::iconj(phi.clone(), top(std::slice::from_ref(&v))),
                )
            } else {
                Formula::iconj(phi.clone(), top(&w))
            }
        }
        Formula::Dep(terms) => {
            let vars: Option<Vec<String>> = terms
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Some(v.clone()),
                    _ => None,
                })
                .collect();
            let Some(vars) = vars else {
                return Err(EvalError::Precondition(
                    "the translation handles dependence atoms over variables only".into(),
                ));
            };
            let (xs, y) = vars.split_at(vars.len() - 1);
            // Repeats inside the conditioning tuple are harmless; a repeat
            // of y in x̄ makes the atom trivially true.
            if xs.contains(&y[0]) {
                let w: Vec<String> = dom.iter().cloned().collect();
                return Ok(Formula::iconj(Formula::var_eq(y[0].clone(), y[0].clone()), top(&w)));
            }
            encode_dep(xs, &y[0], dom, fresh)?
        }
        Formula::Indep(xs, ys, zs) => {
            let rewritten = disjoint_rewrite(xs, ys, zs, fresh);
            match &rewritten {
                Formula::Indep(xs2, ys2, zs2) => encode_indep(xs2, ys2, zs2, dom)?,
                other => translate_rec(other, dom, fresh)?,
            }
        }
        Formula::IConj(a, b) => Formula::iconj(
            translate_rec(a, dom, fresh)?,
            translate_rec(b, dom, fresh)?,
        ),
        Formula::IDisj(a, b) => Formula::idisj(
            translate_rec(a, dom, fresh)?,
            translate_rec(b, dom, fresh)?,
        ),
        Formula::Exists(v, body) => {
            let mut dom2 = dom.clone();
            dom2.insert(v.clone());
            Formula::exists(v.clone(), translate_rec(body, &dom2, fresh)?)
        }
        Formula::Forall(v, body) => {
            let mut dom2 = dom.clone();
            dom2.insert(v.clone());
            Formula::forall(v.clone(), translate_rec(body, &dom2, fresh)?)
        }
        Formula::QApply(..) => {
            return Err(EvalError::Precondition(
                "the translation does not cover generalized quantifiers".into(),
            ))
        }
        Formula::EConj(..) | Formula::EDisj(..) | Formula::Top(_) => {
            return Err(EvalError::WrongLogic(
                "translation input must be a dependence-logic formula".into(),
            ))
        }
    })
}

/// Which internal connective joins `φ(z,w)` with `⊤` in the last conjunct
/// of the branching formula. The source statement and its argument pull in
/// different directions, so both are constructible and the verification
/// suite decides empirically which (if either) realizes `Br(Q₁,Q₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchingVariant {
    /// `φ(z,w) ⩔ ⊤_{xyzw}` — as the statement writes it.
    InternalOr,
    /// `φ(z,w) ⩓ ⊤_{xyzw}` — as the argument uses it.
    InternalAnd,
}

/// Builds the mt sentence expressing `Br(Q₁,Q₂)xy φ(x,y)`:
/// `Q₁x Q₂y Q₁z Q₂w (x⊥y ∧ xy⊥z ∧ xyz⊥w ∧ (φ(x,y) ⩓ ⊤) ∧ (φ(z,w) ⋄ ⊤))`,
/// with every independence atom expanded through its mt encoding.
pub fn branching_formula(
    q1: &Quantifier,
    q2: &Quantifier,
    phi: &Formula,
    variant: BranchingVariant,
) -> Result<Formula, EvalError> {
    for q in [q1, q2] {
        if q.ty() != [1] {
            return Err(EvalError::UnsupportedQuantifierType {
                name: q.name().to_string(),
                ty: q.ty().to_vec(),
                why: "branching takes type ⟨1⟩ quantifiers".into(),
            });
        }
    }
    let vars: Vec<String> = ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect();
    let fv = phi.free_vars();
    for v in &fv {
        if v != "x" && v != "y" {
            return Err(EvalError::Precondition(format!(
                "branching body must have free variables among x, y; found `{v}`"
            )));
        }
    }
    if phi
        .bound_vars()
        .iter()
        .any(|v| vars.contains(v))
    {
        return Err(EvalError::Precondition(
            "branching body must not bind x, y, z, or w".into(),
        ));
    }
    if !phi.is_first_order(LogicDialect::Mt) || phi.check_dialect(LogicDialect::Foq).is_err() {
        return Err(EvalError::WrongLogic(
            "branching body must be first-order".into(),
        ));
    }
    let dom: BTreeSet<String> = vars.iter().cloned().collect();
    let phi_zw = rename_free(
        phi,
        &[("x", "z"), ("y", "w")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
    );
    let i1 = encode_indep(&[], &vars[0..1], &vars[1..2], &dom)?; // x ⊥ y
    let i2 = encode_indep(&[], &vars[0..2], &vars[2..3], &dom)?; // xy ⊥ z
    let i3 = encode_indep(&[], &vars[0..3], &vars[3..4], &dom)?; // xyz ⊥ w
    let c4 = Formula::iconj(phi.clone(), top(&vars));
    let c5 = match variant {
        BranchingVariant::InternalOr => Formula::idisj(phi_zw, top(&vars)),
        BranchingVariant::InternalAnd => Formula::iconj(phi_zw, top(&vars)),
    };
    let body = Formula::econj(
        Formula::econj(Formula::econj(Formula::econj(i1, i2), i3), c4),
        c5,
    );
    let mut out = body;
    for (v, q) in vars.iter().zip([q1, q2, q1, q2]).rev() {
        out = Formula::QApply(q.name().to_string(), vec![v.clone()], vec![out]);
    }
    Ok(out)
}

/// Renames free variable occurrences; binders are untouched (callers
/// guarantee the targets are not bound).
fn rename_free(phi: &Formula, map: &std::collections::BTreeMap<String, String>) -> Formula {
    let rename_var = |v: &String| map.get(v).cloned().unwrap_or_else(|| v.clone());
    let rename_term = |t: &Term| rename_term_rec(t, map);
    match phi {
        Formula::Rel(pos, name, terms) => {
            Formula::Rel(*pos, name.clone(), terms.iter().map(rename_term).collect())
        }
        Formula::Eq(pos, a, b) => Formula::Eq(*pos, rename_term(a), rename_term(b)),
        Formula::Dep(terms) => Formula::Dep(terms.iter().map(rename_term).collect()),
        Formula::Indep(xs, ys, zs) => Formula::Indep(
            xs.iter().map(rename_var).collect(),
            ys.iter().map(rename_var).collect(),
            zs.iter().map(rename_var).collect(),
        ),
        Formula::IConj(a, b) => Formula::iconj(rename_free(a, map), rename_free(b, map)),
        Formula::IDisj(a, b) => Formula::idisj(rename_free(a, map), rename_free(b, map)),
        Formula::EConj(a, b) => Formula::econj(rename_free(a, map), rename_free(b, map)),
        Formula::EDisj(a, b) => Formula::edisj(rename_free(a, map), rename_free(b, map)),
        Formula::Exists(v, body) => {
            let mut inner = map.clone();
            inner.remove(v);
            Formula::exists(v.clone(), rename_free(body, &inner))
        }
        Formula::Forall(v, body) => {
            let mut inner = map.clone();
            inner.remove(v);
            Formula::forall(v.clone(), rename_free(body, &inner))
        }
        Formula::QApply(name, vars, bodies) => {
            let mut inner = map.clone();
            for v in vars {
                inner.remove(v);
            }
            Formula::QApply(
                name.clone(),
                vars.clone(),
                bodies.iter().map(|b| rename_free(b, &inner)).collect(),
            )
        }
        Formula::Top(vars) => Formula::Top(vars.clone()),
    }
}

fn rename_term_rec(t: &Term, map: &std::collections::BTreeMap<String, String>) -> Term {
    match t {
        Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        Term::Const(c) => Term::Const(c.clone()),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| rename_term_rec(a, map)).collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantifier::QuantifierRegistry;
    use crate::structure::SymbolTable;
    use crate::syntax::{parse, print};

    fn p(text: &str, d: LogicDialect) -> Formula {
        parse(text, d, &QuantifierRegistry::new(), &SymbolTable::default()).unwrap()
    }

    #[test]
    fn top_sentence_shape() {
        let t = top_sentence(&["x".to_string()]).unwrap();
        assert_eq!(t, p("exists x. (x = x || x != x)", LogicDialect::Mt));
        let t2 = top_sentence(&["x".to_string(), "y".to_string()]).unwrap();
        assert_eq!(
            t2,
            p("exists x. exists y. (x = x || x != x)", LogicDialect::Mt)
        );
        assert!(top_sentence(&[]).is_err());
    }

    #[test]
    fn encode_indep_shape() {
        // Over dom = {x,y} with empty conditioning: no ∀ block remains.
        let dom: BTreeSet<String> = ["x".to_string(), "y".to_string()].into();
        let f = encode_indep(&[], &["x".to_string()], &["y".to_string()], &dom).unwrap();
        assert_eq!(
            f,
            Formula::iconj(
                Formula::Top(vec!["x".into()]),
                Formula::Top(vec!["y".into()])
            )
        );
        // Extra domain variables are universally quantified in front.
        let dom3: BTreeSet<String> = ["x".to_string(), "y".to_string(), "u".to_string()].into();
        let f3 = encode_indep(&[], &["x".to_string()], &["y".to_string()], &dom3).unwrap();
        assert!(matches!(f3, Formula::Forall(ref v, _) if v == "u"));
        // Overlapping groups are rejected.
        assert!(encode_indep(
            &["x".to_string()],
            &["x".to_string()],
            &["y".to_string()],
            &dom
        )
        .is_err());
    }

    #[test]
    fn disjoint_rewrite_examples() {
        let mut fresh = FreshVars::avoiding(["x", "y", "z"].map(String::from));
        // y ⊥ y copies both occurrences.
        let f = disjoint_rewrite(&[], &["y".to_string()], &["y".to_string()], &mut fresh);
        let printed = print(&f);
        assert_eq!(
            printed,
            "exists _t0. exists _t1. _t0 = y & (_t1 = y & indep( ; _t0 ; _t1))"
        );
        // Already-disjoint input is unchanged.
        let mut fresh2 = FreshVars::default();
        let g = disjoint_rewrite(
            &["x".to_string()],
            &["y".to_string()],
            &["z".to_string()],
            &mut fresh2,
        );
        assert_eq!(
            g,
            Formula::Indep(
                vec!["x".to_string()],
                vec!["y".to_string()],
                vec!["z".to_string()]
            )
        );
        // Overlap only with the conditioning group: only that variable is
        // copied, and the conditioning group is kept as is.
        let mut fresh3 = FreshVars::default();
        let h = disjoint_rewrite(
            &["x".to_string()],
            &["x".to_string(), "y".to_string()],
            &["z".to_string()],
            &mut fresh3,
        );
        match h {
            Formula::Exists(v, _) => assert_eq!(v, "_t0"),
            other => panic!("expected one binder, got {other:?}"),
        }
    }

    #[test]
    fn translate_literal_clause() {
        // (x=x)⁺ = (x=x) ⩓ ⊤_x.
        let phi = p("x = x", LogicDialect::Dep);
        let plus = translate_plus(&phi).unwrap();
        assert_eq!(
            plus,
            Formula::iconj(p("x = x", LogicDialect::Mt), Formula::Top(vec!["x".into()]))
        );
    }

    #[test]
    fn translate_is_not_compositional() {
        // (x=x ⩓ y=y)⁺ tracks {x,y} in both conjuncts, unlike
        // (x=x)⁺ ⩓ (y=y)⁺ which tracks singletons.
        let phi = p("x = x & y = y", LogicDialect::Dep);
        let plus = translate_plus(&phi).unwrap();
        let xx = translate_plus(&p("x = x", LogicDialect::Dep)).unwrap();
        let yy = translate_plus(&p("y = y", LogicDialect::Dep)).unwrap();
        assert_ne!(plus, Formula::iconj(xx, yy));
    }

    #[test]
    fn translate_quantifier_tracks_domain() {
        let phi = p("exists y. dep(x, y)", LogicDialect::Dep);
        let plus = translate_plus(&phi).unwrap();
        // Outer shape: ∃y (encoded dep atom with fresh z).
        match &plus {
            Formula::Exists(v, body) => {
                assert_eq!(v, "y");
                assert!(matches!(body.as_ref(), Formula::Exists(z, _) if z.starts_with("_t")));
            }
            other => panic!("unexpected shape: {other:?}"),
        }
    }

    #[test]
    fn branching_formula_shapes() {
        let reg = QuantifierRegistry::new();
        let e1 = reg.resolve("exactly:1").unwrap();
        let phi = p("R(x, y)", LogicDialect::Mt);
        for variant in [BranchingVariant::InternalOr, BranchingVariant::InternalAnd] {
            let f = branching_formula(&e1, &e1, &phi, variant).unwrap();
            // Prefix Q[exactly:1] x. Q[exactly:1] y. Q[exactly:1] z. Q[exactly:1] w.
            let mut cur = &f;
            for v in ["x", "y", "z", "w"] {
                match cur {
                    Formula::QApply(name, vars, bodies) => {
                        assert_eq!(name, "exactly:1");
                        assert_eq!(vars, &[v.to_string()]);
                        cur = &bodies[0];
                    }
                    other => panic!("expected QApply, got {other:?}"),
                }
            }
        }
        // A body binding z is rejected.
        let bad = p("exists z. R(x, z)", LogicDialect::Mt);
        assert!(branching_formula(&e1, &e1, &bad, BranchingVariant::InternalOr).is_err());
    }
}
