//! Seeded formula-corpus generation for the verification suite: an
//! exhaustive kernel of shallow formulas plus random deeper samples, over
//! a fixed signature of one binary relation `R` and one unary relation `P`.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Formula, LogicDialect, Term};

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub dialect: LogicDialect,
    /// Variables the atoms range over.
    pub atom_vars: Vec<String>,
    /// Variables quantifiers may bind (overlap with `atom_vars` yields
    /// re-quantification cases).
    pub bound_vars: Vec<String>,
    /// Depth up to which the corpus is exhaustive.
    pub exhaustive_depth: usize,
    /// Depth of the sampled portion.
    pub sample_depth: usize,
    pub samples: usize,
    pub seed: u64,
    pub include_dep: bool,
    pub include_indep: bool,
    /// Names of type-⟨1⟩ quantifiers usable as `Q[name] v.` nodes.
    pub quantifiers: Vec<String>,
    /// Cap on nested quantifier chains (keeps witness searches finite).
    pub max_quantifier_chain: usize,
}

impl CorpusConfig {
    pub fn new(dialect: LogicDialect, atom_vars: &[&str], seed: u64) -> Self {
        CorpusConfig {
            dialect,
            atom_vars: atom_vars.iter().map(|s| s.to_string()).collect(),
            bound_vars: atom_vars.iter().map(|s| s.to_string()).collect(),
            exhaustive_depth: 2,
            sample_depth: 3,
            samples: 500,
            seed,
            include_dep: dialect == LogicDialect::Dep,
            include_indep: dialect == LogicDialect::Dep,
            quantifiers: vec![],
            max_quantifier_chain: 2,
        }
    }

    pub fn with_bound_vars(mut self, vars: &[&str]) -> Self {
        self.bound_vars = vars.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn with_quantifiers(mut self, names: &[&str]) -> Self {
        self.quantifiers = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn without_atoms(mut self) -> Self {
        self.include_dep = false;
        self.include_indep = false;
        self
    }

    pub fn with_dep_atoms(mut self, dep: bool, indep: bool) -> Self {
        self.include_dep = dep;
        self.include_indep = indep;
        self
    }

    pub fn with_quantifier_chain(mut self, n: usize) -> Self {
        self.max_quantifier_chain = n;
        self
    }
}

fn var(v: &str) -> Term {
    Term::Var(v.to_string())
}

/// All atomic formulas over the configured variables.
pub fn atoms(cfg: &CorpusConfig) -> Vec<Formula> {
    let vs = &cfg.atom_vars;
    let mut out = Vec::new();
    for v in vs {
        out.push(Formula::Rel(true, "P".into(), vec![var(v)]));
        out.push(Formula::Rel(false, "P".into(), vec![var(v)]));
    }
    for v in vs {
        for w in vs {
            out.push(Formula::Rel(true, "R".into(), vec![var(v), var(w)]));
            out.push(Formula::Rel(false, "R".into(), vec![var(v), var(w)]));
        }
    }
    for (i, v) in vs.iter().enumerate() {
        for w in &vs[i..] {
            out.push(Formula::Eq(true, var(v), var(w)));
            out.push(Formula::Eq(false, var(v), var(w)));
        }
    }
    if cfg.include_dep {
        for v in vs {
            out.push(Formula::Dep(vec![var(v)]));
            for w in vs {
                if v != w {
                    out.push(Formula::Dep(vec![var(v), var(w)]));
                }
            }
        }
    }
    if cfg.include_indep {
        for (i, v) in vs.iter().enumerate() {
            for w in &vs[i + 1..] {
                out.push(Formula::Indep(vec![], vec![v.clone()], vec![w.clone()]));
            }
        }
        if vs.len() >= 3 {
            out.push(Formula::Indep(
                vec![vs[0].clone()],
                vec![vs[1].clone()],
                vec![vs[2].clone()],
            ));
        }
    }
    out
}

fn connect(cfg: &CorpusConfig, a: &Formula, b: &Formula) -> Vec<Formula> {
    let mut out = vec![
        Formula::iconj(a.clone(), b.clone()),
        Formula::idisj(a.clone(), b.clone()),
    ];
    if cfg.dialect == LogicDialect::Mt {
        out.push(Formula::econj(a.clone(), b.clone()));
        out.push(Formula::edisj(a.clone(), b.clone()));
    }
    out
}

fn quantify(cfg: &CorpusConfig, body: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    for v in &cfg.bound_vars {
        out.push(Formula::exists(v.clone(), body.clone()));
        out.push(Formula::forall(v.clone(), body.clone()));
        for q in &cfg.quantifiers {
            out.push(Formula::QApply(q.clone(), vec![v.clone()], vec![body.clone()]));
        }
    }
    out
}

fn quantifier_chain(phi: &Formula) -> usize {
    let own = matches!(
        phi,
        Formula::Exists(..) | Formula::Forall(..) | Formula::QApply(..)
    ) as usize;
    let sub = phi
        .children()
        .iter()
        .map(|c| quantifier_chain(c))
        .max()
        .unwrap_or(0);
    own + sub
}

/// Deterministic corpus: every formula up to `exhaustive_depth`, plus
/// seeded random samples at `sample_depth`, deduplicated, quantifier
/// chains capped.
pub fn generate(cfg: &CorpusConfig) -> Vec<Formula> {
    let base = atoms(cfg);
    let mut layers: Vec<Vec<Formula>> = vec![base.clone()];
    for _ in 1..cfg.exhaustive_depth {
        let prev: Vec<Formula> = layers.concat();
        let newest = layers.last().unwrap().clone();
        let mut next = Vec::new();
        for a in &newest {
            for b in &prev {
                next.extend(connect(cfg, a, b));
                if a != b {
                    next.extend(connect(cfg, b, a));
                }
            }
        }
        for a in &newest {
            next.extend(quantify(cfg, a));
        }
        layers.push(next);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for phi in layers.concat() {
        if quantifier_chain(&phi) <= cfg.max_quantifier_chain && seen.insert(phi.clone()) {
            out.push(phi);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut attempts = 0;
    let mut sampled = 0;
    while sampled < cfg.samples && attempts < cfg.samples * 20 {
        attempts += 1;
        let phi = sample(cfg, &mut rng, cfg.sample_depth, cfg.max_quantifier_chain, &base);
        if quantifier_chain(&phi) <= cfg.max_quantifier_chain && seen.insert(phi.clone()) {
            out.push(phi);
            sampled += 1;
        }
    }
    out
}

fn sample(
    cfg: &CorpusConfig,
    rng: &mut ChaCha8Rng,
    depth: usize,
    chain_budget: usize,
    base: &[Formula],
) -> Formula {
    if depth <= 1 {
        return base[rng.gen_range(0..base.len())].clone();
    }
    let max_kind = if cfg.dialect == LogicDialect::Mt { 5 } else { 3 };
    let kind = rng.gen_range(0..=max_kind);
    match kind {
        0 => Formula::iconj(
            sample(cfg, rng, depth - 1, chain_budget, base),
            sample(cfg, rng, depth - 1, chain_budget, base),
        ),
        1 => Formula::idisj(
            sample(cfg, rng, depth - 1, chain_budget, base),
            sample(cfg, rng, depth - 1, chain_budget, base),
        ),
        2 | 3 => {
            if chain_budget == 0 {
                return sample(cfg, rng, depth - 1, chain_budget, base);
            }
            let v = cfg.bound_vars[rng.gen_range(0..cfg.bound_vars.len())].clone();
            let body = sample(cfg, rng, depth - 1, chain_budget - 1, base);
            let use_gq = !cfg.quantifiers.is_empty() && rng.gen_bool(0.3);
            if use_gq {
                let q = cfg.quantifiers[rng.gen_range(0..cfg.quantifiers.len())].clone();
                Formula::QApply(q, vec![v], vec![body])
            } else if kind == 2 {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
        4 => Formula::econj(
            sample(cfg, rng, depth - 1, chain_budget, base),
            sample(cfg, rng, depth - 1, chain_budget, base),
        ),
        _ => Formula::edisj(
            sample(cfg, rng, depth - 1, chain_budget, base),
            sample(cfg, rng, depth - 1, chain_budget, base),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_deduplicated() {
        let cfg = CorpusConfig::new(LogicDialect::Mt, &["x", "y"], 7).with_samples(50);
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a, b);
        let set: BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), a.len());
        assert!(a.len() > 500, "corpus too small: {}", a.len());
    }

    #[test]
    fn respects_dialect() {
        let cfg = CorpusConfig::new(LogicDialect::Dep, &["x", "y"], 1).with_samples(100);
        for phi in generate(&cfg) {
            assert!(phi.check_dialect(LogicDialect::Dep).is_ok(), "{phi:?}");
        }
    }

    #[test]
    fn chain_cap_respected() {
        let cfg = CorpusConfig::new(LogicDialect::Mt, &["x"], 3)
            .with_quantifier_chain(1)
            .with_samples(200);
        for phi in generate(&cfg) {
            assert!(quantifier_chain(&phi) <= 1);
        }
    }
}
