//! Generalized quantifiers as local acceptance predicates on finite
//! universes, with constructors for iteration and branching and decision
//! procedures for monotonicity, continuity, and isomorphism invariance.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::error::{EvalError, LoadError};
use crate::structure::{all_tuples, Relation, Structure};

/// A generalized quantifier of type ⟨n₁,…,n_k⟩, given locally by an
/// acceptance predicate on k-tuples of relations over a universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    name: String,
    ty: Vec<usize>,
    kind: QKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum QKind {
    /// Non-empty relation. The `∃` projection is this quantifier.
    NonEmpty,
    /// The full relation `M^n`. The `∀` projection is this quantifier.
    All,
    AtLeast(usize),
    AtMost(usize),
    Exactly(usize),
    Between(usize, usize),
    /// `|A| > |M∖A|`, type ⟨1⟩.
    Most1,
    /// `|A∩B| ≥ |A∖B|`, type ⟨1,1⟩ (Tarskian engine only).
    Most,
    /// `|R|` even; non-continuous negative control.
    Even,
    /// Accepted cardinalities per universe size.
    CardTable(BTreeMap<usize, BTreeSet<usize>>),
    /// Explicit list of accepted relations for one universe size.
    Explicit {
        universe_size: usize,
        accept: BTreeSet<BTreeSet<Vec<String>>>,
    },
    /// `(Q·Q′)` iteration of two type-⟨1⟩ quantifiers.
    Iterate(Box<Quantifier>, Box<Quantifier>),
    /// `Br(Q₁,Q₂)` branching of two type-⟨1⟩ quantifiers.
    Branch(Box<Quantifier>, Box<Quantifier>),
}

impl Quantifier {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ty(&self) -> &[usize] {
        &self.ty
    }

    /// The `∃` projection quantifier (accepts non-empty sets).
    pub fn exists() -> Quantifier {
        Quantifier {
            name: "E".into(),
            ty: vec![1],
            kind: QKind::NonEmpty,
        }
    }

    /// The `∀` projection quantifier (accepts only the full set).
    pub fn forall() -> Quantifier {
        Quantifier {
            name: "A".into(),
            ty: vec![1],
            kind: QKind::All,
        }
    }

    /// `Q_M` membership: does the quantifier accept this tuple of relations
    /// over the universe of `m`?
    pub fn accepts(&self, m: &Structure, rels: &[Relation]) -> Result<bool, EvalError> {
        if rels.len() != self.ty.len() {
            return Err(EvalError::ArityMismatch {
                symbol: self.name.clone(),
                expected: self.ty.len(),
                got: rels.len(),
            });
        }
        for (rel, &n) in rels.iter().zip(&self.ty) {
            if rel.arity != n {
                return Err(EvalError::ArityMismatch {
                    symbol: self.name.clone(),
                    expected: n,
                    got: rel.arity,
                });
            }
        }
        let msize = m.universe_size();
        Ok(match &self.kind {
            QKind::NonEmpty => !rels[0].is_empty(),
            QKind::All => rels[0].len() == msize.pow(rels[0].arity as u32),
            QKind::AtLeast(k) => rels[0].len() >= *k,
            QKind::AtMost(k) => rels[0].len() <= *k,
            QKind::Exactly(k) => rels[0].len() == *k,
            QKind::Between(k, l) => rels[0].len() >= *k && rels[0].len() <= *l,
            QKind::Most1 => rels[0].len() > msize - rels[0].len(),
            QKind::Most => {
                let a = &rels[0].tuples;
                let b = &rels[1].tuples;
                a.intersection(b).count() >= a.difference(b).count()
            }
            QKind::Even => rels[0].len() % 2 == 0,
            QKind::CardTable(table) => {
                let allowed = table.get(&msize).ok_or_else(|| {
                    EvalError::Precondition(format!(
                        "quantifier `{}` has no cardinality entry for universe size {msize}",
                        self.name
                    ))
                })?;
                allowed.contains(&rels[0].len())
            }
            QKind::Explicit {
                universe_size,
                accept,
            } => {
                if *universe_size != msize {
                    return Err(EvalError::Precondition(format!(
                        "quantifier `{}` is defined for universe size {universe_size}, not {msize}",
                        self.name
                    )));
                }
                let named: BTreeSet<Vec<String>> = rels[0]
                    .tuples
                    .iter()
                    .map(|t| t.iter().map(|&e| m.elem_name(e).to_string()).collect())
                    .collect();
                accept.contains(&named)
            }
            QKind::Iterate(q1, q2) => {
                // {a | R_a ∈ Q′_M} ∈ Q_M
                let mut firsts = BTreeSet::new();
                for a in 0..msize {
                    let section: BTreeSet<Vec<usize>> = rels[0]
                        .tuples
                        .iter()
                        .filter(|t| t[0] == a)
                        .map(|t| vec![t[1]])
                        .collect();
                    if q2.accepts(m, &[Relation::new(1, section)])? {
                        firsts.insert(vec![a]);
                    }
                }
                q1.accepts(m, &[Relation::new(1, firsts)])?
            }
            QKind::Branch(q1, q2) => {
                // ∃ S1,S1' ∈ Q1, S2,S2' ∈ Q2 with S1×S2 ⊆ R ⊆ S1'×S2'.
                let q1_sets = accepted_subsets(q1, m)?;
                let q2_sets = accepted_subsets(q2, m)?;
                let r = &rels[0].tuples;
                let mut found = false;
                'outer: for s1 in &q1_sets {
                    for s2 in &q2_sets {
                        if !product_subset(s1, s2, r, true) {
                            continue;
                        }
                        for s1p in &q1_sets {
                            for s2p in &q2_sets {
                                if product_subset(s1p, s2p, r, false) {
                                    found = true;
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
                found
            }
        })
    }
}

/// All subsets of `M` (as unary relations) accepted by a type-⟨1⟩ quantifier.
fn accepted_subsets(q: &Quantifier, m: &Structure) -> Result<Vec<BTreeSet<usize>>, EvalError> {
    let n = m.universe_size();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let set: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let rel = Relation::new(1, set.iter().map(|&e| vec![e]).collect());
        if q.accepts(m, &[rel])? {
            out.push(set);
        }
    }
    Ok(out)
}

/// `lower`: S1×S2 ⊆ R; otherwise R ⊆ S1×S2.
fn product_subset(
    s1: &BTreeSet<usize>,
    s2: &BTreeSet<usize>,
    r: &BTreeSet<Vec<usize>>,
    lower: bool,
) -> bool {
    if lower {
        s1.iter()
            .all(|&a| s2.iter().all(|&b| r.contains(&vec![a, b])))
    } else {
        r.iter().all(|t| s1.contains(&t[0]) && s2.contains(&t[1]))
    }
}

/// Builds the iteration `(Q·Q′)`, a type-⟨2⟩ quantifier.
pub fn iterate(q1: Quantifier, q2: Quantifier) -> Result<Quantifier, EvalError> {
    for q in [&q1, &q2] {
        if q.ty != [1] {
            return Err(EvalError::UnsupportedQuantifierType {
                name: q.name.clone(),
                ty: q.ty.clone(),
                why: "iteration takes type ⟨1⟩ quantifiers".into(),
            });
        }
    }
    Ok(Quantifier {
        name: format!("iter({}, {})", q1.name, q2.name),
        ty: vec![2],
        kind: QKind::Iterate(Box::new(q1), Box::new(q2)),
    })
}

/// Builds the branching `Br(Q₁,Q₂)`, a type-⟨2⟩ quantifier. Continuity of
/// the arguments is not checked: the brute-force membership test is total.
pub fn branch(q1: Quantifier, q2: Quantifier) -> Result<Quantifier, EvalError> {
    for q in [&q1, &q2] {
        if q.ty != [1] {
            return Err(EvalError::UnsupportedQuantifierType {
                name: q.name.clone(),
                ty: q.ty.clone(),
                why: "branching takes type ⟨1⟩ quantifiers".into(),
            });
        }
    }
    Ok(Quantifier {
        name: format!("br({}, {})", q1.name, q2.name),
        ty: vec![2],
        kind: QKind::Branch(Box::new(q1), Box::new(q2)),
    })
}

/// `q_member`: membership of a relation tuple in `Q_M`.
pub fn q_member(q: &Quantifier, m: &Structure, rels: &[Relation]) -> Result<bool, EvalError> {
    q.accepts(m, rels)
}

/// Enumerates all relations of the given arity over the universe of `m`.
pub fn all_relations(m: &Structure, arity: usize) -> Vec<Relation> {
    let tuples = all_tuples(m.universe_size(), arity);
    let n = tuples.len();
    assert!(n <= 20, "relation space too large to enumerate");
    (0u32..(1 << n))
        .map(|mask| {
            let set: BTreeSet<Vec<usize>> = tuples
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect();
            Relation::new(arity, set)
        })
        .collect()
}

/// Monotone increasing on `m`: `R ∈ Q_M` and `R ⊆ S` imply `S ∈ Q_M`.
/// Returns a violating pair when the property fails.
pub fn monotone_witness(
    q: &Quantifier,
    m: &Structure,
) -> Result<Option<(Relation, Relation)>, EvalError> {
    let n = require_unary_type(q)?;
    let tuples = all_tuples(m.universe_size(), n);
    let size = tuples.len();
    for rmask in 0u32..(1 << size) {
        let r = mask_to_relation(&tuples, rmask, n);
        if !q.accepts(m, &[r.clone()])? {
            continue;
        }
        // Supersets of r.
        let free = !rmask & ((1u32 << size) - 1);
        let mut extra = free;
        loop {
            if extra != 0 {
                let s = mask_to_relation(&tuples, rmask | extra, n);
                if !q.accepts(m, &[s.clone()])? {
                    return Ok(Some((r, s)));
                }
            }
            if extra == 0 {
                break;
            }
            extra = (extra - 1) & free;
        }
    }
    Ok(None)
}

pub fn is_monotone_increasing(q: &Quantifier, m: &Structure) -> Result<bool, EvalError> {
    Ok(monotone_witness(q, m)?.is_none())
}

/// Continuity on `m`: `R₁ ⊆ R₂ ⊆ R₃` with `R₁,R₃ ∈ Q_M` implies `R₂ ∈ Q_M`.
/// Returns a violating chain when the property fails.
pub fn continuity_witness(
    q: &Quantifier,
    m: &Structure,
) -> Result<Option<(Relation, Relation, Relation)>, EvalError> {
    let n = require_unary_type(q)?;
    let tuples = all_tuples(m.universe_size(), n);
    let size = tuples.len();
    let full = (1u32 << size) - 1;
    // Enumerate chains r1 ⊆ r2 ⊆ r3 by choosing, per tuple, one of four
    // states: outside r3, in r3 only, in r2 and r3, in all three.
    let mut accepted = vec![None::<bool>; (full as usize) + 1];
    let mut check = |mask: u32, q: &Quantifier| -> Result<bool, EvalError> {
        if let Some(v) = accepted[mask as usize] {
            return Ok(v);
        }
        let v = q.accepts(m, &[mask_to_relation(&tuples, mask, n)])?;
        accepted[mask as usize] = Some(v);
        Ok(v)
    };
    for r1 in 0..=full {
        if !check(r1, q)? {
            continue;
        }
        let free = !r1 & full;
        let mut grow = free;
        loop {
            let r3 = r1 | grow;
            if check(r3, q)? {
                // Middles between r1 and r3.
                let mid_free = grow;
                let mut mid = mid_free;
                loop {
                    let r2 = r1 | mid;
                    if !check(r2, q)? {
                        return Ok(Some((
                            mask_to_relation(&tuples, r1, n),
                            mask_to_relation(&tuples, r2, n),
                            mask_to_relation(&tuples, r3, n),
                        )));
                    }
                    if mid == 0 {
                        break;
                    }
                    mid = (mid - 1) & mid_free;
                }
            }
            if grow == 0 {
                break;
            }
            grow = (grow - 1) & free;
        }
    }
    Ok(None)
}

pub fn is_continuous(q: &Quantifier, m: &Structure) -> Result<bool, EvalError> {
    Ok(continuity_witness(q, m)?.is_none())
}

/// Spot-checks isomorphism closure by permuting the universe. Returns a
/// violating (permutation, relations) pair if acceptance is not invariant.
pub fn iso_witness(
    q: &Quantifier,
    m: &Structure,
) -> Result<Option<(Vec<usize>, Vec<Relation>)>, EvalError> {
    let n = m.universe_size();
    let mut perm: Vec<usize> = (0..n).collect();
    let rel_spaces: Vec<Vec<Relation>> =
        q.ty.iter().map(|&k| all_relations(m, k)).collect();
    // Heap's algorithm over permutations.
    let mut perms = Vec::new();
    fn heap(k: usize, arr: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(arr.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, arr, out);
            if k % 2 == 0 {
                arr.swap(i, k - 1);
            } else {
                arr.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut perm, &mut perms);
    let mut combos: Vec<Vec<Relation>> = vec![vec![]];
    for space in &rel_spaces {
        let mut next = Vec::new();
        for combo in &combos {
            for rel in space {
                let mut c = combo.clone();
                c.push(rel.clone());
                next.push(c);
            }
        }
        combos = next;
    }
    for rels in &combos {
        let base = q.accepts(m, rels)?;
        for p in &perms {
            let permuted: Vec<Relation> =
                rels.iter().map(|r| Structure::permute_relation(r, p)).collect();
            if q.accepts(m, &permuted)? != base {
                return Ok(Some((p.clone(), rels.clone())));
            }
        }
    }
    Ok(None)
}

fn require_unary_type(q: &Quantifier) -> Result<usize, EvalError> {
    if q.ty.len() == 1 {
        Ok(q.ty[0])
    } else {
        Err(EvalError::UnsupportedQuantifierType {
            name: q.name.clone(),
            ty: q.ty.clone(),
            why: "monotonicity and continuity are defined for type ⟨n⟩".into(),
        })
    }
}

fn mask_to_relation(tuples: &[Vec<usize>], mask: u32, arity: usize) -> Relation {
    Relation::new(
        arity,
        tuples
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, t)| t.clone())
            .collect(),
    )
}

// --- Registry and name resolution ---------------------------------------

/// Resolves quantifier names appearing in formulas: builtins, composite
/// `iter(...)`/`br(...)` spellings, and custom JSON-loaded quantifiers.
#[derive(Debug, Clone, Default)]
pub struct QuantifierRegistry {
    custom: BTreeMap<String, Quantifier>,
}

impl QuantifierRegistry {
    pub fn new() -> Self {
        QuantifierRegistry::default()
    }

    pub fn register(&mut self, q: Quantifier) {
        self.custom.insert(q.name.clone(), q);
    }

    pub fn resolve(&self, spec: &str) -> Result<Quantifier, EvalError> {
        let spec = spec.trim();
        if let Some(q) = self.custom.get(spec) {
            return Ok(q.clone());
        }
        self.parse_spec(spec)
            .ok_or_else(|| EvalError::UnknownQuantifier(spec.to_string()))
    }

    fn parse_spec(&self, spec: &str) -> Option<Quantifier> {
        let mk = |name: &str, ty: Vec<usize>, kind: QKind| {
            Some(Quantifier {
                name: name.to_string(),
                ty,
                kind,
            })
        };
        match spec {
            "E" => return mk("E", vec![1], QKind::NonEmpty),
            "A" => return mk("A", vec![1], QKind::All),
            "most1" => return mk("most1", vec![1], QKind::Most1),
            "most" => return mk("most", vec![1, 1], QKind::Most),
            "even" => return mk("even", vec![1], QKind::Even),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("atleast:") {
            let k = rest.parse().ok()?;
            return mk(spec, vec![1], QKind::AtLeast(k));
        }
        if let Some(rest) = spec.strip_prefix("atmost:") {
            let k = rest.parse().ok()?;
            return mk(spec, vec![1], QKind::AtMost(k));
        }
        if let Some(rest) = spec.strip_prefix("exactly:") {
            let k = rest.parse().ok()?;
            return mk(spec, vec![1], QKind::Exactly(k));
        }
        if let Some(rest) = spec.strip_prefix("between:") {
            let (k, l) = rest.split_once(':')?;
            return mk(spec, vec![1], QKind::Between(k.parse().ok()?, l.parse().ok()?));
        }
        for (prefix, is_iter) in [("iter(", true), ("br(", false)] {
            if let Some(rest) = spec.strip_prefix(prefix) {
                let inner = rest.strip_suffix(')')?;
                let (a, b) = split_top_level(inner)?;
                let qa = self.resolve(a).ok()?;
                let qb = self.resolve(b).ok()?;
                let q = if is_iter { iterate(qa, qb) } else { branch(qa, qb) };
                return q.ok();
            }
        }
        None
    }
}

/// Splits `a, b` at the top-level comma, respecting nested parentheses.
fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => return Some((s[..i].trim(), s[i + 1..].trim())),
            _ => {}
        }
    }
    None
}

// --- Custom quantifier JSON ---------------------------------------------

#[derive(Deserialize)]
struct QuantifierJson {
    name: String,
    #[serde(rename = "type")]
    ty: Vec<usize>,
    #[serde(default)]
    cardinality: Option<BTreeMap<String, BTreeSet<usize>>>,
    #[serde(default)]
    explicit: Option<ExplicitJson>,
}

#[derive(Deserialize)]
struct ExplicitJson {
    universe_size: usize,
    accept: Vec<Vec<Vec<String>>>,
}

impl Quantifier {
    /// Loads a custom quantifier from JSON: either a cardinality spec per
    /// universe size, or an explicit relation list for one universe size.
    pub fn from_json(text: &str) -> Result<Quantifier, LoadError> {
        let raw: QuantifierJson = serde_json::from_str(text)?;
        if raw.ty.is_empty() {
            return Err(LoadError::invalid("type", "type vector must be non-empty"));
        }
        match (raw.cardinality, raw.explicit) {
            (Some(card), None) => {
                if raw.ty.len() != 1 {
                    return Err(LoadError::invalid(
                        "cardinality",
                        "cardinality specs require a type ⟨n⟩ quantifier",
                    ));
                }
                let mut table = BTreeMap::new();
                for (k, v) in card {
                    let size: usize = k.parse().map_err(|_| {
                        LoadError::invalid(format!("cardinality.{k}"), "universe size must be a number")
                    })?;
                    table.insert(size, v);
                }
                Ok(Quantifier {
                    name: raw.name,
                    ty: raw.ty,
                    kind: QKind::CardTable(table),
                })
            }
            (None, Some(explicit)) => {
                if raw.ty.len() != 1 {
                    return Err(LoadError::invalid(
                        "explicit",
                        "explicit specs require a type ⟨n⟩ quantifier",
                    ));
                }
                let arity = raw.ty[0];
                let mut accept = BTreeSet::new();
                for (i, rel) in explicit.accept.iter().enumerate() {
                    let mut set = BTreeSet::new();
                    for (j, t) in rel.iter().enumerate() {
                        if t.len() != arity {
                            return Err(LoadError::invalid(
                                format!("explicit.accept[{i}][{j}]"),
                                format!("tuple length {} does not match arity {arity}", t.len()),
                            ));
                        }
                        set.insert(t.clone());
                    }
                    accept.insert(set);
                }
                Ok(Quantifier {
                    name: raw.name,
                    ty: raw.ty,
                    kind: QKind::Explicit {
                        universe_size: explicit.universe_size,
                        accept,
                    },
                })
            }
            _ => Err(LoadError::invalid(
                "quantifier",
                "provide exactly one of `cardinality` or `explicit`",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: usize) -> Structure {
        let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        Structure::new(names, BTreeMap::new(), BTreeMap::new(), BTreeMap::new()).unwrap()
    }

    fn rel1(elems: &[usize]) -> Relation {
        Relation::new(1, elems.iter().map(|&e| vec![e]).collect())
    }

    fn reg() -> QuantifierRegistry {
        QuantifierRegistry::new()
    }

    #[test]
    fn builtin_membership() {
        let m2 = m(2);
        let most = reg().resolve("most").unwrap();
        // |A∩B| = 2 ≥ |A∖B| = 1 on a 3-element universe.
        let m3 = m(3);
        let a = rel1(&[0, 1, 2]);
        let b = rel1(&[0, 1]);
        assert!(most.accepts(&m3, &[a, b]).unwrap());
        let exactly0 = reg().resolve("exactly:0").unwrap();
        assert!(exactly0.accepts(&m2, &[rel1(&[])]).unwrap());
        let between = reg().resolve("between:1:2").unwrap();
        assert!(!between.accepts(&m3, &[rel1(&[0, 1, 2])]).unwrap());
    }

    #[test]
    fn iterate_unfolds_to_definition() {
        // iterate(E,E) accepts R iff R ≠ ∅; checked by unfolding the
        // definition over all 16 binary relations on a 2-element universe.
        let m2 = m(2);
        let it = iterate(Quantifier::exists(), Quantifier::exists()).unwrap();
        for r in all_relations(&m2, 2) {
            let direct = !r.is_empty();
            assert_eq!(it.accepts(&m2, &[r]).unwrap(), direct);
        }
        // iterate(A,A) accepts only the full relation.
        let aa = iterate(Quantifier::forall(), Quantifier::forall()).unwrap();
        for r in all_relations(&m2, 2) {
            assert_eq!(aa.accepts(&m2, &[r.clone()]).unwrap(), r.len() == 4);
        }
        // iterate(A,E): totality, every a has some b.
        let ae = iterate(Quantifier::forall(), Quantifier::exists()).unwrap();
        for r in all_relations(&m2, 2) {
            let total = (0..2).all(|a| r.tuples.iter().any(|t| t[0] == a));
            assert_eq!(ae.accepts(&m2, &[r.clone()]).unwrap(), total);
        }
    }

    #[test]
    fn branch_examples() {
        let m2 = m(2);
        // Br(A,A): only M×M.
        let baa = branch(Quantifier::forall(), Quantifier::forall()).unwrap();
        for r in all_relations(&m2, 2) {
            assert_eq!(baa.accepts(&m2, &[r.clone()]).unwrap(), r.len() == 4);
        }
        // Br(atleast:1, atleast:1) on |M| = 2: accepts exactly R ≠ ∅
        // (enumerated over all 16 relations).
        let q = reg().resolve("atleast:1").unwrap();
        let b = branch(q.clone(), q).unwrap();
        for r in all_relations(&m2, 2) {
            assert_eq!(b.accepts(&m2, &[r.clone()]).unwrap(), !r.is_empty());
        }
        // Br(exactly:1, exactly:1): single pairs only.
        let e1 = reg().resolve("exactly:1").unwrap();
        let be = branch(e1.clone(), e1).unwrap();
        for r in all_relations(&m2, 2) {
            assert_eq!(be.accepts(&m2, &[r.clone()]).unwrap(), r.len() == 1);
        }
    }

    #[test]
    fn monotonicity_checks() {
        let m3 = m(3);
        assert!(is_monotone_increasing(&reg().resolve("atleast:1").unwrap(), &m3).unwrap());
        assert!(!is_monotone_increasing(&reg().resolve("exactly:1").unwrap(), &m3).unwrap());
        // most1 on |M| = 3: checked against all 8 subsets.
        assert!(is_monotone_increasing(&reg().resolve("most1").unwrap(), &m3).unwrap());
        let (r, s) = monotone_witness(&reg().resolve("exactly:1").unwrap(), &m3)
            .unwrap()
            .unwrap();
        assert!(r.len() == 1 && s.len() > 1);
    }

    #[test]
    fn continuity_checks() {
        let m3 = m(3);
        assert!(is_continuous(&reg().resolve("between:1:2").unwrap(), &m3).unwrap());
        // even fails on the chain ∅ ⊆ {a} ⊆ {a,b}.
        let (r1, r2, r3) = continuity_witness(&reg().resolve("even").unwrap(), &m3)
            .unwrap()
            .unwrap();
        assert!(r1.len() % 2 == 0 && r3.len() % 2 == 0 && r2.len() % 2 == 1);
        // Monotone increasing implies continuous for all builtins.
        for name in ["E", "A", "atleast:1", "atleast:2", "most1"] {
            let q = reg().resolve(name).unwrap();
            assert!(is_monotone_increasing(&q, &m3).unwrap());
            assert!(is_continuous(&q, &m3).unwrap());
        }
    }

    #[test]
    fn iso_invariance_of_builtins() {
        let m3 = m(3);
        for name in ["E", "A", "atleast:1", "exactly:1", "between:1:2", "most1", "even", "most"] {
            let q = reg().resolve(name).unwrap();
            assert!(iso_witness(&q, &m3).unwrap().is_none(), "{name} not iso-closed");
        }
        let it = reg().resolve("iter(E, A)").unwrap();
        assert!(iso_witness(&it, &m3).unwrap().is_none());
    }

    #[test]
    fn custom_json() {
        let q = Quantifier::from_json(
            r#"{"name":"q1","type":[1],"cardinality":{"2":[1],"3":[1,2]}}"#,
        )
        .unwrap();
        let m2 = m(2);
        assert!(q.accepts(&m2, &[rel1(&[0])]).unwrap());
        assert!(!q.accepts(&m2, &[rel1(&[0, 1])]).unwrap());
        assert!(q.accepts(&m(3), &[rel1(&[0, 1])]).unwrap());
        assert!(q.accepts(&m(4), &[rel1(&[0])]).is_err());

        let q2 = Quantifier::from_json(
            r#"{"name":"q2","type":[2],"explicit":{"universe_size":2,
                "accept":[[["e0","e1"]]]}}"#,
        )
        .unwrap();
        let r: Relation = Relation::new(2, [vec![0, 1]].into_iter().collect());
        assert!(q2.accepts(&m2, &[r]).unwrap());
        let r2: Relation = Relation::new(2, [vec![1, 0]].into_iter().collect());
        assert!(!q2.accepts(&m2, &[r2]).unwrap());
    }

    #[test]
    fn registry_resolution() {
        assert!(reg().resolve("nope").is_err());
        assert!(reg().resolve("br(exactly:1, exactly:1)").is_ok());
        assert!(reg().resolve("iter(iter(E, E), A)").is_err());
        let mut r = reg();
        let q = Quantifier::from_json(r#"{"name":"q1","type":[1],"cardinality":{"2":[0]}}"#).unwrap();
        r.register(q);
        assert!(r.resolve("q1").is_ok());
    }
}
