//! Finite first-order structures, assignments, term evaluation, and
//! Tarskian satisfaction for FO(Q).
//!
//! Elements are opaque string identifiers; the order of the universe list
//! fixes the canonical order used for tuple and team-row enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, LoadError};
use crate::quantifier::QuantifierRegistry;
use crate::syntax::{Formula, Term};
use crate::team::Team;

/// Index of an element in the universe list.
pub type Elem = usize;

/// A finite relation: a set of equal-length tuples of element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Elem>>,
}

impl Relation {
    pub fn new(arity: usize, tuples: BTreeSet<Vec<Elem>>) -> Self {
        Relation { arity, tuples }
    }

    /// The full relation `universe^arity`.
    pub fn full(arity: usize, universe_size: usize) -> Self {
        let mut tuples = BTreeSet::new();
        for t in all_tuples(universe_size, arity) {
            tuples.insert(t);
        }
        Relation { arity, tuples }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// Enumerates `universe_size^arity` tuples in lexicographic order.
pub fn all_tuples(universe_size: usize, arity: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * universe_size);
        for t in &out {
            for e in 0..universe_size {
                let mut t2 = t.clone();
                t2.push(e);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// A total function on `universe^arity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    pub arity: usize,
    pub map: BTreeMap<Vec<Elem>, Elem>,
}

/// A finite structure: universe plus named relations, functions, constants.
#[derive(Debug, Clone)]
pub struct Structure {
    universe: Arc<Vec<String>>,
    relations: BTreeMap<String, Relation>,
    functions: BTreeMap<String, Interpretation>,
    constants: BTreeMap<String, Elem>,
}

impl Structure {
    /// Builds a structure from element names. The universe must be non-empty
    /// and duplicate-free; relation and function contents are validated.
    pub fn new(
        universe: Vec<String>,
        relations: BTreeMap<String, Relation>,
        functions: BTreeMap<String, Interpretation>,
        constants: BTreeMap<String, Elem>,
    ) -> Result<Self, LoadError> {
        if universe.is_empty() {
            return Err(LoadError::invalid("universe", "universe must be non-empty"));
        }
        let mut seen = BTreeSet::new();
        for (i, e) in universe.iter().enumerate() {
            if !seen.insert(e.clone()) {
                return Err(LoadError::invalid(
                    format!("universe[{i}]"),
                    format!("duplicate element `{e}`"),
                ));
            }
        }
        let n = universe.len();
        for (name, rel) in &relations {
            for t in &rel.tuples {
                if t.len() != rel.arity {
                    return Err(LoadError::invalid(
                        format!("relations.{name}"),
                        format!("tuple of length {} in relation of arity {}", t.len(), rel.arity),
                    ));
                }
                if t.iter().any(|&e| e >= n) {
                    return Err(LoadError::invalid(
                        format!("relations.{name}"),
                        "tuple entry outside universe",
                    ));
                }
            }
        }
        for (name, f) in &functions {
            if f.map.len() != n.pow(f.arity as u32) {
                return Err(LoadError::invalid(
                    format!("functions.{name}"),
                    format!(
                        "function must be total: expected {} entries, got {}",
                        n.pow(f.arity as u32),
                        f.map.len()
                    ),
                ));
            }
            for (args, val) in &f.map {
                if args.len() != f.arity || args.iter().any(|&e| e >= n) || *val >= n {
                    return Err(LoadError::invalid(
                        format!("functions.{name}"),
                        "function entry outside universe or of wrong arity",
                    ));
                }
            }
        }
        for (name, &c) in &constants {
            if c >= n {
                return Err(LoadError::invalid(
                    format!("constants.{name}"),
                    "constant outside universe",
                ));
            }
        }
        Ok(Structure {
            universe: Arc::new(universe),
            relations,
            functions,
            constants,
        })
    }

    pub fn universe(&self) -> &Arc<Vec<String>> {
        &self.universe
    }

    pub fn universe_size(&self) -> usize {
        self.universe.len()
    }

    pub fn elem_index(&self, name: &str) -> Option<Elem> {
        self.universe.iter().position(|e| e == name)
    }

    pub fn elem_name(&self, e: Elem) -> &str {
        &self.universe[e]
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn function(&self, name: &str) -> Option<&Interpretation> {
        self.functions.get(name)
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.constants.get(name).copied()
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    /// Declared symbol names, used by the parser to resolve bare identifiers
    /// appearing in terms.
    pub fn symbol_table(&self) -> SymbolTable {
        SymbolTable {
            constants: self.constants.keys().cloned().collect(),
            functions: self
                .functions
                .iter()
                .map(|(k, v)| (k.clone(), v.arity))
                .collect(),
        }
    }

    /// Applies a universe permutation to a relation (used by the
    /// isomorphism-closure check).
    pub fn permute_relation(rel: &Relation, perm: &[Elem]) -> Relation {
        let tuples = rel
            .tuples
            .iter()
            .map(|t| t.iter().map(|&e| perm[e]).collect())
            .collect();
        Relation {
            arity: rel.arity,
            tuples,
        }
    }
}

/// Constant and function symbols visible to the parser.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    pub constants: BTreeSet<String>,
    pub functions: BTreeMap<String, usize>,
}

/// A variable assignment: a finite map from variables to element names.
/// The empty assignment is a legal value.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    bindings: BTreeMap<String, String>,
}

impl Assignment {
    pub fn empty() -> Self {
        Assignment::default()
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Assignment {
            bindings: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.bindings.get(var).map(|s| s.as_str())
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn bindings(&self) -> &BTreeMap<String, String> {
        &self.bindings
    }

    /// `s[ā/x̄]`: rebinds each `x_i` to `a_i`, keeping other bindings.
    /// Existing bindings of the `x_i` are overwritten.
    pub fn extend(&self, values: &[&str], vars: &[&str]) -> Result<Assignment, EvalError> {
        if values.len() != vars.len() {
            return Err(EvalError::Precondition(format!(
                "extend: {} values for {} variables",
                values.len(),
                vars.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for v in vars {
            if !seen.insert(*v) {
                return Err(EvalError::Precondition(format!(
                    "extend: repeated variable `{v}`"
                )));
            }
        }
        let mut out = self.clone();
        for (v, a) in vars.iter().zip(values) {
            out.bindings.insert((*v).to_string(), (*a).to_string());
        }
        Ok(out)
    }

    pub fn insert(&mut self, var: impl Into<String>, val: impl Into<String>) {
        self.bindings.insert(var.into(), val.into());
    }
}

/// Evaluates a term to an element name: `t^{M,s}`.
pub fn eval_term(m: &Structure, s: &Assignment, t: &Term) -> Result<String, EvalError> {
    match t {
        Term::Var(x) => match s.get(x) {
            Some(v) => Ok(v.to_string()),
            None => Err(EvalError::UnboundVariable(x.clone())),
        },
        Term::Const(c) => match m.constant(c) {
            Some(e) => Ok(m.elem_name(e).to_string()),
            None => Err(EvalError::UnknownSymbol(c.clone())),
        },
        Term::App(f, args) => {
            let interp = m
                .function(f)
                .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
            if args.len() != interp.arity {
                return Err(EvalError::ArityMismatch {
                    symbol: f.clone(),
                    expected: interp.arity,
                    got: args.len(),
                });
            }
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                let name = eval_term(m, s, a)?;
                let idx = m
                    .elem_index(&name)
                    .ok_or_else(|| EvalError::UnknownElement(name.clone()))?;
                vals.push(idx);
            }
            let out = interp
                .map
                .get(&vals)
                .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
            Ok(m.elem_name(*out).to_string())
        }
    }
}

fn eval_term_idx(m: &Structure, s: &Assignment, t: &Term) -> Result<Elem, EvalError> {
    let name = eval_term(m, s, t)?;
    m.elem_index(&name)
        .ok_or(EvalError::UnknownElement(name))
}

/// Ordinary Tarskian satisfaction `M,s ⊨ φ` for formulas that are
/// first-order in the mt sense, possibly with generalized quantifiers of
/// arbitrary type. Internal connectives are read classically.
pub fn tarski_sat(
    m: &Structure,
    s: &Assignment,
    phi: &Formula,
    reg: &QuantifierRegistry,
) -> Result<bool, EvalError> {
    match phi {
        Formula::Rel(pos, name, terms) => {
            let rel = m
                .relation(name)
                .ok_or_else(|| EvalError::UnknownSymbol(name.clone()))?;
            if terms.len() != rel.arity {
                return Err(EvalError::ArityMismatch {
                    symbol: name.clone(),
                    expected: rel.arity,
                    got: terms.len(),
                });
            }
            let mut tuple = Vec::with_capacity(terms.len());
            for t in terms {
                tuple.push(eval_term_idx(m, s, t)?);
            }
            Ok(rel.tuples.contains(&tuple) == *pos)
        }
        Formula::Eq(pos, t1, t2) => {
            let a = eval_term_idx(m, s, t1)?;
            let b = eval_term_idx(m, s, t2)?;
            Ok((a == b) == *pos)
        }
        Formula::IConj(p, q) => Ok(tarski_sat(m, s, p, reg)? && tarski_sat(m, s, q, reg)?),
        Formula::IDisj(p, q) => Ok(tarski_sat(m, s, p, reg)? || tarski_sat(m, s, q, reg)?),
        Formula::Exists(x, body) => {
            for e in 0..m.universe_size() {
                let s2 = s.extend(&[m.elem_name(e)], &[x])?;
                if tarski_sat(m, &s2, body, reg)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Forall(x, body) => {
            for e in 0..m.universe_size() {
                let s2 = s.extend(&[m.elem_name(e)], &[x])?;
                if !tarski_sat(m, &s2, body, reg)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::QApply(name, vars, bodies) => {
            let q = reg.resolve(name)?;
            let ty = q.ty();
            if bodies.len() != ty.len() {
                return Err(EvalError::ArityMismatch {
                    symbol: name.clone(),
                    expected: ty.len(),
                    got: bodies.len(),
                });
            }
            if vars.len() != ty.iter().sum::<usize>() {
                return Err(EvalError::ArityMismatch {
                    symbol: name.clone(),
                    expected: ty.iter().sum(),
                    got: vars.len(),
                });
            }
            // Split the flat variable tuple by the quantifier type: the
            // i-th body binds the i-th slice.
            let mut rels = Vec::with_capacity(bodies.len());
            let mut offset = 0;
            for (ni, body) in ty.iter().zip(bodies) {
                let xs: Vec<&str> = vars[offset..offset + ni].iter().map(|v| v.as_str()).collect();
                offset += ni;
                let mut tuples = BTreeSet::new();
                for tuple in all_tuples(m.universe_size(), *ni) {
                    let names: Vec<&str> = tuple.iter().map(|&e| m.elem_name(e)).collect();
                    let s2 = s.extend(&names, &xs)?;
                    if tarski_sat(m, &s2, body, reg)? {
                        tuples.insert(tuple.clone());
                    }
                }
                rels.push(Relation::new(*ni, tuples));
            }
            q.accepts(m, &rels)
        }
        Formula::Dep(_) | Formula::Indep(..) => Err(EvalError::WrongLogic(
            "dependence or independence atom in a Tarskian evaluation".into(),
        )),
        Formula::EConj(..) | Formula::EDisj(..) => Err(EvalError::WrongLogic(
            "external connective in a Tarskian evaluation".into(),
        )),
        Formula::Top(_) => Err(EvalError::WrongLogic(
            "TOP sugar must be expanded before evaluation".into(),
        )),
    }
}

/// The denotation `⟦φ⟧^M_x̄`: the team over `{x̄}` of exactly the
/// assignments satisfying φ.
pub fn denotation(
    m: &Structure,
    phi: &Formula,
    vars: &[String],
    reg: &QuantifierRegistry,
) -> Result<Team, EvalError> {
    let varset: BTreeSet<&str> = vars.iter().map(|v| v.as_str()).collect();
    if varset.len() != vars.len() {
        return Err(EvalError::Precondition(
            "denotation: repeated variable in tuple".into(),
        ));
    }
    for v in phi.free_vars() {
        if !varset.contains(v.as_str()) {
            return Err(EvalError::FreeVariableOutsideDomain(v));
        }
    }
    let mut team = Team::empty(m.universe().clone(), vars.to_vec())?;
    let rows: Vec<u32> = (0..team.slots()).collect();
    for row in rows {
        let s = team.row_assignment(row);
        if tarski_sat(m, &s, phi, reg)? {
            team = team.with_row(row);
        }
    }
    Ok(team)
}

// --- JSON loading ------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RelationJson {
    arity: usize,
    tuples: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct FunctionJson {
    arity: usize,
    map: Vec<(Vec<String>, String)>,
}

#[derive(Serialize, Deserialize)]
struct StructureJson {
    universe: Vec<String>,
    #[serde(default)]
    relations: BTreeMap<String, RelationJson>,
    #[serde(default)]
    functions: BTreeMap<String, FunctionJson>,
    #[serde(default)]
    constants: BTreeMap<String, String>,
}

impl Structure {
    pub fn from_json(text: &str) -> Result<Self, LoadError> {
        let raw: StructureJson = serde_json::from_str(text)?;
        let lookup = |path: &str, name: &str, universe: &[String]| -> Result<Elem, LoadError> {
            universe
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| LoadError::invalid(path, format!("element `{name}` is not in the universe")))
        };
        let mut relations = BTreeMap::new();
        for (name, rel) in raw.relations {
            let mut tuples = BTreeSet::new();
            for (i, t) in rel.tuples.iter().enumerate() {
                let path = format!("relations.{name}.tuples[{i}]");
                if t.len() != rel.arity {
                    return Err(LoadError::invalid(
                        path,
                        format!("tuple length {} does not match arity {}", t.len(), rel.arity),
                    ));
                }
                let mut idx = Vec::with_capacity(t.len());
                for (j, e) in t.iter().enumerate() {
                    idx.push(lookup(&format!("{path}[{j}]"), e, &raw.universe)?);
                }
                if !tuples.insert(idx) {
                    return Err(LoadError::invalid(path, "duplicate tuple"));
                }
            }
            relations.insert(name, Relation::new(rel.arity, tuples));
        }
        let mut functions = BTreeMap::new();
        for (name, f) in raw.functions {
            let mut map = BTreeMap::new();
            for (i, (args, val)) in f.map.iter().enumerate() {
                let path = format!("functions.{name}.map[{i}]");
                if args.len() != f.arity {
                    return Err(LoadError::invalid(
                        path,
                        format!("argument tuple length {} does not match arity {}", args.len(), f.arity),
                    ));
                }
                let mut idx = Vec::with_capacity(args.len());
                for (j, e) in args.iter().enumerate() {
                    idx.push(lookup(&format!("{path}[{j}]"), e, &raw.universe)?);
                }
                let v = lookup(&path, val, &raw.universe)?;
                if map.insert(idx, v).is_some() {
                    return Err(LoadError::invalid(path, "duplicate argument tuple"));
                }
            }
            functions.insert(name, Interpretation { arity: f.arity, map });
        }
        let mut constants = BTreeMap::new();
        for (name, val) in raw.constants {
            let e = lookup(&format!("constants.{name}"), &val, &raw.universe)?;
            constants.insert(name, e);
        }
        Structure::new(raw.universe, relations, functions, constants)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let relations: BTreeMap<String, RelationJson> = self
            .relations
            .iter()
            .map(|(k, r)| {
                (
                    k.clone(),
                    RelationJson {
                        arity: r.arity,
                        tuples: r
                            .tuples
                            .iter()
                            .map(|t| t.iter().map(|&e| self.universe[e].clone()).collect())
                            .collect(),
                    },
                )
            })
            .collect();
        let functions: BTreeMap<String, FunctionJson> = self
            .functions
            .iter()
            .map(|(k, f)| {
                (
                    k.clone(),
                    FunctionJson {
                        arity: f.arity,
                        map: f
                            .map
                            .iter()
                            .map(|(args, v)| {
                                (
                                    args.iter().map(|&e| self.universe[e].clone()).collect(),
                                    self.universe[*v].clone(),
                                )
                            })
                            .collect(),
                    },
                )
            })
            .collect();
        let constants: BTreeMap<String, String> = self
            .constants
            .iter()
            .map(|(k, &v)| (k.clone(), self.universe[v].clone()))
            .collect();
        serde_json::json!({
            "universe": self.universe.as_ref(),
            "relations": serde_json::to_value(relations).unwrap(),
            "functions": serde_json::to_value(functions).unwrap(),
            "constants": constants,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, LogicDialect};

    fn reg() -> QuantifierRegistry {
        QuantifierRegistry::new()
    }

    pub(crate) fn two_elem() -> Structure {
        Structure::from_json(
            r#"{"universe":["a","b"],
                "relations":{"R":{"arity":1,"tuples":[["a"]]}},
                "functions":{"f":{"arity":1,"map":[[["a"],"a"],[["b"],"b"]]}},
                "constants":{"c":"a"}}"#,
        )
        .unwrap()
    }

    #[test]
    fn constant_lookup() {
        let m = two_elem();
        let v = eval_term(&m, &Assignment::empty(), &Term::Const("c".into())).unwrap();
        assert_eq!(v, "a");
    }

    #[test]
    fn variable_lookup() {
        let m = two_elem();
        let s = Assignment::from_pairs([("x", "b")]);
        assert_eq!(eval_term(&m, &s, &Term::Var("x".into())).unwrap(), "b");
    }

    #[test]
    fn nested_function_application() {
        // f is the identity on {a,b}; composing the table by hand gives
        // f(f(a)) = f(a) = a.
        let m = two_elem();
        let s = Assignment::from_pairs([("x", "a")]);
        let t = Term::App(
            "f".into(),
            vec![Term::App("f".into(), vec![Term::Var("x".into())])],
        );
        assert_eq!(eval_term(&m, &s, &t).unwrap(), "a");
    }

    #[test]
    fn eval_term_errors() {
        let m = two_elem();
        let s = Assignment::empty();
        assert!(matches!(
            eval_term(&m, &s, &Term::Var("x".into())),
            Err(EvalError::UnboundVariable(_))
        ));
        assert!(matches!(
            eval_term(&m, &s, &Term::Const("d".into())),
            Err(EvalError::UnknownSymbol(_))
        ));
        let bad = Term::App("f".into(), vec![]);
        assert!(matches!(
            eval_term(&m, &s, &bad),
            Err(EvalError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn tarski_atom() {
        let m = two_elem();
        let s = Assignment::from_pairs([("x", "a")]);
        let phi = parse("R(x)", LogicDialect::Fo, &reg(), &m.symbol_table()).unwrap();
        assert!(tarski_sat(&m, &s, &phi, &reg()).unwrap());
        let s2 = Assignment::from_pairs([("x", "b")]);
        assert!(!tarski_sat(&m, &s2, &phi, &reg()).unwrap());
    }

    #[test]
    fn tarski_exists_nonempty_universe() {
        let m = two_elem();
        let phi = parse("exists x. x = x", LogicDialect::Fo, &reg(), &m.symbol_table()).unwrap();
        assert!(tarski_sat(&m, &Assignment::empty(), &phi, &reg()).unwrap());
    }

    #[test]
    fn tarski_most_counts_per_condition() {
        // A = {a,b}, B = {b,c}: |A∩B| = 1 >= |A\B| = 1.
        let m = Structure::from_json(
            r#"{"universe":["a","b","c"],
                "relations":{"A":{"arity":1,"tuples":[["a"],["b"]]},
                             "B":{"arity":1,"tuples":[["b"],["c"]]}}}"#,
        )
        .unwrap();
        let phi = parse(
            "Q[most] x y. (A(x), B(y))",
            LogicDialect::Foq,
            &reg(),
            &m.symbol_table(),
        )
        .unwrap();
        assert!(tarski_sat(&m, &Assignment::empty(), &phi, &reg()).unwrap());
    }

    #[test]
    fn tarski_rejects_team_level_nodes() {
        let m = two_elem();
        let phi = parse("dep(x, y)", LogicDialect::Dep, &reg(), &m.symbol_table()).unwrap();
        let s = Assignment::from_pairs([("x", "a"), ("y", "a")]);
        assert!(matches!(
            tarski_sat(&m, &s, &phi, &reg()),
            Err(EvalError::WrongLogic(_))
        ));
    }

    #[test]
    fn denotation_examples() {
        let m = two_elem();
        let st = m.symbol_table();
        let full = denotation(
            &m,
            &parse("x = x", LogicDialect::Fo, &reg(), &st).unwrap(),
            &["x".into()],
            &reg(),
        )
        .unwrap();
        assert_eq!(full.len(), 2);
        let empty = denotation(
            &m,
            &parse("x != x", LogicDialect::Fo, &reg(), &st).unwrap(),
            &["x".into()],
            &reg(),
        )
        .unwrap();
        assert_eq!(empty.len(), 0);
        assert_eq!(empty.domain(), &["x".to_string()]);
    }

    #[test]
    fn denotation_filters_all_assignments() {
        // R = {(a,b)} over {a,b}: of the 4 assignments over (x,y) exactly
        // one satisfies R(x,y).
        let m = Structure::from_json(
            r#"{"universe":["a","b"],
                "relations":{"R":{"arity":2,"tuples":[["a","b"]]}}}"#,
        )
        .unwrap();
        let phi = parse("R(x, y)", LogicDialect::Fo, &reg(), &m.symbol_table()).unwrap();
        let team = denotation(&m, &phi, &["x".into(), "y".into()], &reg()).unwrap();
        assert_eq!(team.len(), 1);
        let rows = team.assignments();
        assert_eq!(rows[0].get("x"), Some("a"));
        assert_eq!(rows[0].get("y"), Some("b"));
    }

    #[test]
    fn denotation_rejects_stray_free_variable() {
        let m = two_elem();
        let phi = parse("R(y)", LogicDialect::Fo, &reg(), &m.symbol_table()).unwrap();
        assert!(matches!(
            denotation(&m, &phi, &["x".into()], &reg()),
            Err(EvalError::FreeVariableOutsideDomain(_))
        ));
    }

    #[test]
    fn loader_rejects_bad_input() {
        assert!(Structure::from_json(r#"{"universe":[]}"#).is_err());
        assert!(Structure::from_json(r#"{"universe":["a","a"]}"#).is_err());
        let bad_arity = r#"{"universe":["a"],"relations":{"R":{"arity":2,"tuples":[["a"]]}}}"#;
        assert!(Structure::from_json(bad_arity).is_err());
        let out_of_universe = r#"{"universe":["a"],"relations":{"R":{"arity":1,"tuples":[["b"]]}}}"#;
        let err = Structure::from_json(out_of_universe).unwrap_err();
        assert!(err.to_string().contains("relations.R.tuples[0][0]"));
        let partial_fn = r#"{"universe":["a","b"],"functions":{"f":{"arity":1,"map":[[["a"],"a"]]}}}"#;
        assert!(Structure::from_json(partial_fn).is_err());
    }
}
