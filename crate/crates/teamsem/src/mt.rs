//! mt-logic ("maximal team" logic) satisfaction.
//!
//! A literal is satisfied by exactly its denotation; the internal
//! connectives split the team by intersection and union witnesses; the
//! external ones are classical; quantifier applications are decided by the
//! projection equation `∃x̄X = Qx̄Y` over witness teams `Y`.
//!
//! Evaluation begins with a weak-locality reduction: domain variables that
//! do not occur in the formula must be fully spread (the `∀`- and
//! `∃`-projections along them coincide) and are projected away before the
//! clauses apply. Without this reduction the satisfaction relation fails
//! weak locality — `{(y:a,z:a),(y:b,z:b)}` would satisfy the spread-out
//! sentence `∃y(y=y || y≠y)` purely because its z-support is full — and
//! with it the independence and dependence encodings lose their meaning.
//! The reduction is the identity whenever every domain variable occurs in
//! the formula, so sentences and tight formulas are unaffected.
//!
//! Two engines are provided: `Functional` searches section-choice functions
//! row by row (with memoization and sound upper-bound pruning harvested
//! from the formula); `Naive` enumerates witness teams directly from the
//! defining equations. The verification suite checks their agreement, and
//! `sat_set` — a bottom-up evaluator over all teams of a small domain —
//! cross-checks both.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::error::EvalError;
use crate::quantifier::{Quantifier, QuantifierRegistry};
use crate::structure::{denotation, Structure};
use crate::syntax::{Formula, LogicDialect};
use crate::team::{full_mask, RowMask, SubmaskIter, Team};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtEngine {
    /// Section-choice search realizing the functional characterizations.
    Functional,
    /// Direct witness-team enumeration from the projection equations.
    Naive,
}

const SEARCH_BUDGET: u64 = 200_000_000;
const NAIVE_MAX_SLOTS: u32 = 16;

/// `M,X ⊨_mt φ`. TOP sugar is expanded here; dep/indep atoms are rejected
/// (encode them first).
pub fn mt_sat(
    m: &Structure,
    team: &Team,
    phi: &Formula,
    engine: MtEngine,
    reg: &QuantifierRegistry,
) -> Result<bool, EvalError> {
    mt_sat_with(m, team, phi, engine, reg, true)
}

pub(crate) fn mt_sat_with(
    m: &Structure,
    team: &Team,
    phi: &Formula,
    engine: MtEngine,
    reg: &QuantifierRegistry,
    weak_locality: bool,
) -> Result<bool, EvalError> {
    let phi = phi.expand_sugar().map_err(EvalError::WrongLogic)?;
    let mut ev = MtEvaluator::with_weak_locality(m, reg, engine, weak_locality);
    ev.sat(team, &phi)
}

/// Reusable evaluator, sharing memo tables across queries. Input formulas
/// must be sugar-free (expand `TOP` first) and are pinned by `'f`.
pub struct MtEvaluator<'a, 'f> {
    ctx: MtCtx<'a>,
    _formulas: std::marker::PhantomData<&'f Formula>,
}

impl<'a, 'f> MtEvaluator<'a, 'f> {
    pub fn new(m: &'a Structure, reg: &'a QuantifierRegistry, engine: MtEngine) -> Self {
        Self::with_weak_locality(m, reg, engine, true)
    }

    pub(crate) fn with_weak_locality(
        m: &'a Structure,
        reg: &'a QuantifierRegistry,
        engine: MtEngine,
        weak_locality: bool,
    ) -> Self {
        MtEvaluator {
            ctx: MtCtx::new(m, reg, engine, weak_locality),
            _formulas: std::marker::PhantomData,
        }
    }

    pub fn sat(&mut self, team: &Team, phi: &'f Formula) -> Result<bool, EvalError> {
        phi.check_dialect(LogicDialect::Mt)
            .map_err(EvalError::WrongLogic)?;
        let dom: BTreeSet<String> = team.domain().iter().cloned().collect();
        for v in phi.free_vars() {
            if !dom.contains(&v) {
                return Err(EvalError::Precondition(format!(
                    "free variable `{v}` is not in the team domain"
                )));
            }
        }
        self.ctx.steps = 0;
        self.ctx.eval(team, phi)
    }
}

/// `M ⊨_mt σ`: sentence satisfaction at `{ε}`.
pub fn mt_sentence_sat(
    m: &Structure,
    sigma: &Formula,
    engine: MtEngine,
    reg: &QuantifierRegistry,
) -> Result<bool, EvalError> {
    if !sigma.free_vars().is_empty() {
        return Err(EvalError::Precondition(
            "sentence satisfaction needs a closed formula".into(),
        ));
    }
    mt_sat(m, &Team::singleton_empty(m.universe().clone()), sigma, engine, reg)
}

struct MtCtx<'a> {
    m: &'a Structure,
    reg: &'a QuantifierRegistry,
    engine: MtEngine,
    weak_locality: bool,
    memo: HashMap<(usize, Vec<String>, RowMask), bool>,
    occ: HashMap<usize, BTreeSet<String>>,
    lem1: HashMap<usize, bool>,
    dens: HashMap<(usize, Vec<String>), Team>,
    steps: u64,
}

impl<'a> MtCtx<'a> {
    fn new(
        m: &'a Structure,
        reg: &'a QuantifierRegistry,
        engine: MtEngine,
        weak_locality: bool,
    ) -> Self {
        MtCtx {
            m,
            reg,
            engine,
            weak_locality,
            memo: HashMap::new(),
            occ: HashMap::new(),
            lem1: HashMap::new(),
            dens: HashMap::new(),
            steps: 0,
        }
    }

    fn spend(&mut self, n: u64) -> Result<(), EvalError> {
        self.steps += n;
        if self.steps > SEARCH_BUDGET {
            Err(EvalError::TooLarge(
                "mt witness search exceeded its step budget".into(),
            ))
        } else {
            Ok(())
        }
    }

    fn id(phi: &Formula) -> usize {
        phi as *const Formula as usize
    }

    fn occ_vars(&mut self, phi: &Formula) -> BTreeSet<String> {
        let id = Self::id(phi);
        if let Some(v) = self.occ.get(&id) {
            return v.clone();
        }
        let v = phi.all_vars();
        self.occ.insert(id, v.clone());
        v
    }

    /// Untangled first-order (mt sense) formulas have a unique satisfying
    /// team over any domain disjoint from their bound variables: the
    /// denotation. The flag caches the formula-side conditions.
    fn lem1_shape(&mut self, phi: &Formula) -> bool {
        let id = Self::id(phi);
        if let Some(&v) = self.lem1.get(&id) {
            return v;
        }
        let v = phi.check_dialect(LogicDialect::Mt).is_ok()
            && !phi.contains_sugar()
            && phi.is_first_order(LogicDialect::Mt)
            && phi.is_untangled();
        self.lem1.insert(id, v);
        v
    }

    fn lem1_applicable(&mut self, phi: &Formula, domain: &[String]) -> bool {
        if !self.lem1_shape(phi) {
            return false;
        }
        let domset: BTreeSet<&str> = domain.iter().map(|s| s.as_str()).collect();
        phi.bound_vars().iter().all(|v| !domset.contains(v.as_str()))
            && phi.free_vars().iter().all(|v| domset.contains(v.as_str()))
    }

    fn den(&mut self, phi: &Formula, domain: &[String]) -> Result<Team, EvalError> {
        let key = (Self::id(phi), domain.to_vec());
        if let Some(t) = self.dens.get(&key) {
            return Ok(t.clone());
        }
        let t = denotation(self.m, phi, domain, self.reg)?;
        self.dens.insert(key, t.clone());
        Ok(t)
    }

    fn eval(&mut self, x: &Team, phi: &Formula) -> Result<bool, EvalError> {
        let key = (Self::id(phi), x.domain().to_vec(), x.rows_mask());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let out = self.eval_inner(x, phi)?;
        self.memo.insert(key, out);
        Ok(out)
    }

    fn eval_inner(&mut self, x: &Team, phi: &Formula) -> Result<bool, EvalError> {
        // Weak-locality reduction: spare domain variables must be fully
        // spread, then disappear.
        if self.weak_locality {
            let occ = self.occ_vars(phi);
            let spare: Vec<String> = x
                .domain()
                .iter()
                .filter(|v| !occ.contains(*v))
                .cloned()
                .collect();
            if !spare.is_empty() {
                if !x.is_cylinder_over(&spare) {
                    return Ok(false);
                }
                let reduced = x.exists_project_all(&spare);
                return self.eval(&reduced, phi);
            }
        }
        match phi {
            Formula::Rel(..) | Formula::Eq(..) => {
                let den = self.den(phi, x.domain())?;
                Ok(den == *x)
            }
            Formula::EConj(a, b) => Ok(self.eval(x, a)? && self.eval(x, b)?),
            Formula::EDisj(a, b) => Ok(self.eval(x, a)? || self.eval(x, b)?),
            Formula::IConj(a, b) => self.iconj(x, a, b),
            Formula::IDisj(a, b) => self.idisj(x, a, b),
            Formula::Exists(v, body) => {
                let q = Quantifier::exists();
                self.quantifier(x, &q, std::slice::from_ref(v), body)
            }
            Formula::Forall(v, body) => {
                let q = Quantifier::forall();
                self.quantifier(x, &q, std::slice::from_ref(v), body)
            }
            Formula::QApply(name, vars, bodies) => {
                let q = self.reg.resolve(name)?;
                if q.ty().len() != 1 {
                    return Err(EvalError::UnsupportedQuantifierType {
                        name: q.name().to_string(),
                        ty: q.ty().to_vec(),
                        why: "the mt engine supports type ⟨n⟩ quantifiers only".into(),
                    });
                }
                self.quantifier(x, &q, vars, &bodies[0])
            }
            Formula::Dep(_) | Formula::Indep(..) => Err(EvalError::WrongLogic(
                "dependence atoms must be encoded before mt evaluation".into(),
            )),
            Formula::Top(_) => Err(EvalError::WrongLogic(
                "TOP sugar must be expanded before evaluation".into(),
            )),
        }
    }

    /// `X ⊨ φ ⩓ ψ` iff some `Y ∩ Z = X` with `Y ⊨ φ`, `Z ⊨ ψ`.
    fn iconj(&mut self, x: &Team, a: &Formula, b: &Formula) -> Result<bool, EvalError> {
        if self.engine == MtEngine::Functional {
            let la = self.lem1_applicable(a, x.domain());
            let lb = self.lem1_applicable(b, x.domain());
            if la && lb {
                let da = self.den(a, x.domain())?;
                let db = self.den(b, x.domain())?;
                return Ok(da.intersect(&db)? == *x);
            }
            // A conjunct satisfied by every team over this domain reduces
            // the split to a superteam search on the other side.
            let ta = is_covering_top(a, x.domain());
            let tb = is_covering_top(b, x.domain());
            if ta || tb {
                let other = if ta { b } else { a };
                if is_covering_top(other, x.domain()) {
                    return Ok(true);
                }
                if self.lem1_applicable(other, x.domain()) {
                    let d = self.den(other, x.domain())?;
                    return x.is_subset(&d).map_err(Into::into);
                }
                for y in x.superteams().collect::<Vec<_>>() {
                    self.spend(1)?;
                    if self.eval(&y, other)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
            if la || lb {
                // One side forces its witness: Y = den(a); then Z must
                // satisfy the other side with Y ∩ Z = X, i.e. Z ⊇ X,
                // Z ∩ (Y∖X) = ∅, the rest free.
                let (fixed, other) = if la { (a, b) } else { (b, a) };
                let d = self.den(fixed, x.domain())?;
                if !x.is_subset(&d)? {
                    return Ok(false);
                }
                let free = full_mask(x.slots()) & !d.rows_mask() & !x.rows_mask();
                for extra in SubmaskIter::new(free) {
                    self.spend(1)?;
                    let z = Team::from_mask(
                        x.universe().clone(),
                        x.domain().to_vec(),
                        x.rows_mask() | extra,
                    )?;
                    if self.eval(&z, other)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
        }
        let comp: Vec<u32> = x.complement().row_indices().collect();
        if pow3_saturating(comp.len()) > SEARCH_BUDGET {
            return Err(EvalError::TooLarge(
                "team-splitting conjunction search space too large".into(),
            ));
        }
        let mut extra_a: RowMask = 0;
        let mut extra_b: RowMask = 0;
        self.split_search(x, a, b, &comp, 0, &mut extra_a, &mut extra_b)
    }

    #[allow(clippy::too_many_arguments)]
    fn split_search(
        &mut self,
        x: &Team,
        a: &Formula,
        b: &Formula,
        comp: &[u32],
        at: usize,
        extra_a: &mut RowMask,
        extra_b: &mut RowMask,
    ) -> Result<bool, EvalError> {
        if at == comp.len() {
            self.spend(1)?;
            let y = Team::from_mask(
                x.universe().clone(),
                x.domain().to_vec(),
                x.rows_mask() | *extra_a,
            )?;
            if !self.eval(&y, a)? {
                return Ok(false);
            }
            let z = Team::from_mask(
                x.universe().clone(),
                x.domain().to_vec(),
                x.rows_mask() | *extra_b,
            )?;
            return self.eval(&z, b);
        }
        let bit = 1u128 << comp[at];
        if self.split_search(x, a, b, comp, at + 1, extra_a, extra_b)? {
            return Ok(true);
        }
        *extra_a |= bit;
        let hit = self.split_search(x, a, b, comp, at + 1, extra_a, extra_b)?;
        *extra_a &= !bit;
        if hit {
            return Ok(true);
        }
        *extra_b |= bit;
        let hit = self.split_search(x, a, b, comp, at + 1, extra_a, extra_b)?;
        *extra_b &= !bit;
        Ok(hit)
    }

    /// `X ⊨ φ ⩔ ψ` iff some `Y ∪ Z = X` with `Y ⊨ φ`, `Z ⊨ ψ`.
    fn idisj(&mut self, x: &Team, a: &Formula, b: &Formula) -> Result<bool, EvalError> {
        if self.engine == MtEngine::Functional {
            let la = self.lem1_applicable(a, x.domain());
            let lb = self.lem1_applicable(b, x.domain());
            if la && lb {
                let da = self.den(a, x.domain())?;
                let db = self.den(b, x.domain())?;
                return Ok(da.union(&db)? == *x);
            }
            let ta = is_covering_top(a, x.domain());
            let tb = is_covering_top(b, x.domain());
            if ta || tb {
                let other = if ta { b } else { a };
                if is_covering_top(other, x.domain()) {
                    return Ok(true);
                }
                if self.lem1_applicable(other, x.domain()) {
                    let d = self.den(other, x.domain())?;
                    return d.is_subset(x).map_err(Into::into);
                }
                for y in x.subteams().collect::<Vec<_>>() {
                    self.spend(1)?;
                    if self.eval(&y, other)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
            if la || lb {
                // Y = den(a) forced; Z covers the rest: X∖Y ⊆ Z ⊆ X.
                let (fixed, other) = if la { (a, b) } else { (b, a) };
                let d = self.den(fixed, x.domain())?;
                if !d.is_subset(x)? {
                    return Ok(false);
                }
                let must = x.rows_mask() & !d.rows_mask();
                let free = x.rows_mask() & d.rows_mask();
                for extra in SubmaskIter::new(free) {
                    self.spend(1)?;
                    let z =
                        Team::from_mask(x.universe().clone(), x.domain().to_vec(), must | extra)?;
                    if self.eval(&z, other)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
        }
        let rows: Vec<u32> = x.row_indices().collect();
        if pow3_saturating(rows.len()) > SEARCH_BUDGET {
            return Err(EvalError::TooLarge(
                "team-splitting disjunction search space too large".into(),
            ));
        }
        let mut ymask: RowMask = 0;
        let mut zmask: RowMask = 0;
        self.cover_search(x, a, b, &rows, 0, &mut ymask, &mut zmask)
    }

    #[allow(clippy::too_many_arguments)]
    fn cover_search(
        &mut self,
        x: &Team,
        a: &Formula,
        b: &Formula,
        rows: &[u32],
        at: usize,
        ymask: &mut RowMask,
        zmask: &mut RowMask,
    ) -> Result<bool, EvalError> {
        if at == rows.len() {
            self.spend(1)?;
            let y = Team::from_mask(x.universe().clone(), x.domain().to_vec(), *ymask)?;
            if !self.eval(&y, a)? {
                return Ok(false);
            }
            let z = Team::from_mask(x.universe().clone(), x.domain().to_vec(), *zmask)?;
            return self.eval(&z, b);
        }
        let bit = 1u128 << rows[at];
        for (ya, za) in [(bit, 0), (0, bit), (bit, bit)] {
            *ymask |= ya;
            *zmask |= za;
            let hit = self.cover_search(x, a, b, rows, at + 1, ymask, zmask)?;
            *ymask &= !ya;
            *zmask &= !za;
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Sound upper bound on the rows of any team over `domain` satisfying
    /// `phi`, harvested from conjuncts with unique satisfying teams.
    fn upper_bound(
        &mut self,
        phi: &Formula,
        domain: &[String],
    ) -> Result<Option<RowMask>, EvalError> {
        if self.lem1_applicable(phi, domain) {
            return Ok(Some(self.den(phi, domain)?.rows_mask()));
        }
        match phi {
            // X ⊨ a ∧ b constrains X through both; X = Y ∩ Z ⊆ Y for ⩓.
            Formula::EConj(a, b) | Formula::IConj(a, b) => {
                let ua = self.upper_bound(a, domain)?;
                let ub = self.upper_bound(b, domain)?;
                Ok(match (ua, ub) {
                    (Some(x), Some(y)) => Some(x & y),
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                })
            }
            Formula::EDisj(a, b) | Formula::IDisj(a, b) => {
                let ua = self.upper_bound(a, domain)?;
                let ub = self.upper_bound(b, domain)?;
                Ok(match (ua, ub) {
                    (Some(x), Some(y)) => Some(x | y),
                    _ => None,
                })
            }
            _ => Ok(None),
        }
    }

    /// The generalized-quantifier clause: `X ⊨ Qx̄ φ` iff there is `Y` over
    /// `dom(X) ∪ {x̄}` with `∃x̄X = Qx̄Y` and `Y ⊨ φ`.
    fn quantifier(
        &mut self,
        x: &Team,
        q: &Quantifier,
        vars: &[String],
        body: &Formula,
    ) -> Result<bool, EvalError> {
        let k = vars.len();
        if q.ty() != [k] {
            return Err(EvalError::UnsupportedQuantifierType {
                name: q.name().to_string(),
                ty: q.ty().to_vec(),
                why: format!("quantifier application binds {k} variables"),
            });
        }
        let target = x.exists_project_all(vars);
        let (proto, table) = target.extension_tables(vars)?;
        let tuple_count = self.m.universe_size().pow(k as u32);

        if self.weak_locality && self.engine == MtEngine::Functional {
            let occ = self.occ_vars(body);
            if vars.iter().all(|v| !occ.contains(v)) {
                return self.vacuous_quantifier(q, &target, body, tuple_count);
            }
        }

        match self.engine {
            MtEngine::Naive => {
                if proto.slots() > NAIVE_MAX_SLOTS {
                    return Err(EvalError::TooLarge(format!(
                        "naive witness enumeration needs at most {NAIVE_MAX_SLOTS} slots, got {}",
                        proto.slots()
                    )));
                }
                let total = full_mask(proto.slots());
                self.spend((total as u64).saturating_add(1))?;
                for rows in 0..=(total as u64) {
                    let y = Team::from_mask(
                        proto.universe().clone(),
                        proto.domain().to_vec(),
                        rows as u128,
                    )?;
                    if y.q_project(q, self.m, vars)? == target && self.eval(&y, body)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            MtEngine::Functional => {
                let accepted = crate::dep::accepted_masks(q, self.m, k)?;
                let all: BTreeSet<u32> = (0..(1u32 << tuple_count)).collect();
                let acc_set: BTreeSet<u32> = accepted.iter().copied().collect();
                let rejected: Vec<u32> = all.difference(&acc_set).copied().collect();
                let bound = self.upper_bound(body, proto.domain())?;
                let reduced_slots = target.slots();
                // Per reduced row: the list of allowed section masks.
                let mut choice_sets: Vec<Vec<u32>> = Vec::with_capacity(reduced_slots as usize);
                let mut budget: u64 = 1;
                for ri in 0..reduced_slots {
                    let pool = if target.contains_row(ri) {
                        &accepted
                    } else {
                        &rejected
                    };
                    let filtered: Vec<u32> = match bound {
                        None => pool.clone(),
                        Some(u) => {
                            let mut sec: u32 = 0;
                            for t in 0..tuple_count {
                                if u >> table[ri as usize * tuple_count + t] & 1 == 1 {
                                    sec |= 1 << t;
                                }
                            }
                            pool.iter().copied().filter(|c| c & !sec == 0).collect()
                        }
                    };
                    if filtered.is_empty() {
                        return Ok(false);
                    }
                    budget = budget.saturating_mul(filtered.len() as u64);
                    choice_sets.push(filtered);
                }
                if budget > SEARCH_BUDGET {
                    return Err(EvalError::TooLarge(
                        "section-choice search space too large".into(),
                    ));
                }
                let mut acc: RowMask = 0;
                self.choice_search(&proto, &table, tuple_count, &choice_sets, 0, &mut acc, body)
            }
        }
    }

    /// Quantifier clause when none of the bound variables occurs in the
    /// body. Under the weak-locality reduction the witness must be a
    /// cylinder `W[M^k/x̄]`, whose projection under Q is determined by
    /// whether `Q_M` contains the full set and the empty set.
    fn vacuous_quantifier(
        &mut self,
        q: &Quantifier,
        target: &Team,
        body: &Formula,
        tuple_count: usize,
    ) -> Result<bool, EvalError> {
        let full_rel = crate::structure::Relation::full(q.ty()[0], self.m.universe_size());
        let _ = tuple_count;
        let empty_rel = crate::structure::Relation::new(q.ty()[0], BTreeSet::new());
        let full_in = q.accepts(self.m, &[full_rel])?;
        let empty_in = q.accepts(self.m, &[empty_rel])?;
        match (full_in, empty_in) {
            (true, false) => self.eval(target, body),
            (false, true) => {
                let w = target.complement();
                self.eval(&w, body)
            }
            (true, true) => {
                if !target.is_full() {
                    return Ok(false);
                }
                self.any_team_satisfies(target.domain(), body)
            }
            (false, false) => {
                if !target.is_empty() {
                    return Ok(false);
                }
                self.any_team_satisfies(target.domain(), body)
            }
        }
    }

    fn any_team_satisfies(&mut self, domain: &[String], body: &Formula) -> Result<bool, EvalError> {
        let proto = Team::empty(Arc::clone(self.m.universe()), domain.to_vec())?;
        if proto.slots() > NAIVE_MAX_SLOTS {
            return Err(EvalError::TooLarge(
                "satisfiability sweep needs at most 16 slots".into(),
            ));
        }
        let total = full_mask(proto.slots());
        self.spend((total as u64).saturating_add(1))?;
        for rows in 0..=(total as u64) {
            let w = Team::from_mask(proto.universe().clone(), domain.to_vec(), rows as u128)?;
            if self.eval(&w, body)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    #[allow(clippy::too_many_arguments)]
    fn choice_search(
        &mut self,
        proto: &Team,
        table: &[u32],
        tuple_count: usize,
        choice_sets: &[Vec<u32>],
        at: usize,
        acc: &mut RowMask,
        body: &Formula,
    ) -> Result<bool, EvalError> {
        if at == choice_sets.len() {
            self.spend(1)?;
            let y = Team::from_mask(proto.universe().clone(), proto.domain().to_vec(), *acc)?;
            return self.eval(&y, body);
        }
        for &choice in &choice_sets[at] {
            let mut add: RowMask = 0;
            for t in 0..tuple_count {
                if choice >> t & 1 == 1 {
                    add |= 1u128 << table[at * tuple_count + t];
                }
            }
            *acc |= add;
            let hit =
                self.choice_search(proto, table, tuple_count, choice_sets, at + 1, acc, body)?;
            *acc &= !add;
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn pow3_saturating(n: usize) -> u64 {
    3u64.saturating_pow(n.min(40) as u32)
}

/// Detects the expansion of `TOP(w̄)` whose variable set covers `domain`
/// exactly; such a formula is satisfied by every team over that domain.
fn is_covering_top(phi: &Formula, domain: &[String]) -> bool {
    let mut vars = Vec::new();
    let mut cur = phi;
    loop {
        match cur {
            Formula::Exists(v, body) => {
                vars.push(v.clone());
                cur = body;
            }
            Formula::EDisj(a, b) => {
                let (Formula::Eq(true, l1, r1), Formula::Eq(false, l2, r2)) = (a.as_ref(), b.as_ref())
                else {
                    return false;
                };
                let Some(first) = vars.first() else { return false };
                let want = crate::syntax::Term::Var(first.clone());
                if *l1 != want || *r1 != want || *l2 != want || *r2 != want {
                    return false;
                }
                let vset: BTreeSet<&String> = vars.iter().collect();
                let dset: BTreeSet<&String> = domain.iter().collect();
                return vset.len() == vars.len() && vset == dset;
            }
            _ => return false,
        }
    }
}

// --- Bottom-up satisfying-set evaluation ---------------------------------

/// All satisfying teams of `phi` over exactly `domain`, canonically
/// ordered. Requires `|M|^|domain| ≤ max_slots ≤ 16`.
pub fn satisfying_teams(
    m: &Structure,
    phi: &Formula,
    domain: &[String],
    reg: &QuantifierRegistry,
    max_slots: u32,
) -> Result<Vec<Team>, EvalError> {
    let set = sat_mask_set(m, phi, domain, reg, max_slots)?;
    let proto = Team::empty(Arc::clone(m.universe()), domain.to_vec())?;
    Ok(set
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(rows, _)| {
            Team::from_mask(proto.universe().clone(), proto.domain().to_vec(), rows as u128)
                .expect("mask fits")
        })
        .collect())
}

/// Indicator vector over all `2^slots` teams of the domain: entry `rows`
/// is true iff that team satisfies `phi`.
pub fn sat_mask_set(
    m: &Structure,
    phi: &Formula,
    domain: &[String],
    reg: &QuantifierRegistry,
    max_slots: u32,
) -> Result<Vec<bool>, EvalError> {
    phi.check_dialect(LogicDialect::Mt)
        .map_err(EvalError::WrongLogic)?;
    let phi = phi.expand_sugar().map_err(EvalError::WrongLogic)?;
    let domset: BTreeSet<String> = domain.iter().cloned().collect();
    if domset.len() != domain.len() {
        return Err(EvalError::Precondition("repeated domain variable".into()));
    }
    for v in phi.free_vars() {
        if !domset.contains(&v) {
            return Err(EvalError::FreeVariableOutsideDomain(v));
        }
    }
    let mut sorted: Vec<String> = domain.to_vec();
    sorted.sort();
    let mut ctx = SatCtx {
        m,
        reg,
        max_slots: max_slots.min(16),
        cache: HashMap::new(),
    };
    ctx.sat(&phi, &sorted)
}

struct SatCtx<'a> {
    m: &'a Structure,
    reg: &'a QuantifierRegistry,
    max_slots: u32,
    cache: HashMap<(usize, Vec<String>), Vec<bool>>,
}

impl<'a> SatCtx<'a> {
    fn proto(&self, domain: &[String]) -> Result<Team, EvalError> {
        let t = Team::empty(Arc::clone(self.m.universe()), domain.to_vec())?;
        if t.slots() > self.max_slots {
            return Err(EvalError::TooLarge(format!(
                "team space over {:?} has {} slots; at most {} supported here",
                domain,
                t.slots(),
                self.max_slots
            )));
        }
        Ok(t)
    }

    fn sat(&mut self, phi: &Formula, domain: &[String]) -> Result<Vec<bool>, EvalError> {
        let key = (phi as *const Formula as usize, domain.to_vec());
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let out = self.sat_inner(phi, domain)?;
        self.cache.insert(key, out.clone());
        Ok(out)
    }

    fn sat_inner(&mut self, phi: &Formula, domain: &[String]) -> Result<Vec<bool>, EvalError> {
        let proto = self.proto(domain)?;
        let slots = proto.slots();
        let teams = 1usize << slots;

        // Weak-locality reduction, in set form: satisfying teams are the
        // full cylinders over satisfying reduced teams.
        let occ = phi.all_vars();
        let spare: Vec<String> = domain.iter().filter(|v| !occ.contains(*v)).cloned().collect();
        if !spare.is_empty() {
            let reduced_domain: Vec<String> = domain
                .iter()
                .filter(|v| !spare.contains(v))
                .cloned()
                .collect();
            let sub = self.sat(phi, &reduced_domain)?;
            let reduced_proto = self.proto(&reduced_domain)?;
            // Cylinder bits per reduced row.
            let table = projection_map(&proto, &reduced_proto);
            let mut cyl_bits = vec![0u128; reduced_proto.slots() as usize];
            for (ext_row, &red_row) in table.iter().enumerate() {
                cyl_bits[red_row as usize] |= 1u128 << ext_row;
            }
            let mut out = vec![false; teams];
            for (rm, &ok) in sub.iter().enumerate() {
                if !ok {
                    continue;
                }
                let mut cyl: u128 = 0;
                for (ri, bits) in cyl_bits.iter().enumerate() {
                    if rm >> ri & 1 == 1 {
                        cyl |= bits;
                    }
                }
                out[cyl as usize] = true;
            }
            return Ok(out);
        }

        match phi {
            Formula::Rel(..) | Formula::Eq(..) => {
                let den = denotation(self.m, phi, domain, self.reg)?;
                let mut out = vec![false; teams];
                out[den.rows_mask() as usize] = true;
                Ok(out)
            }
            Formula::EConj(a, b) => {
                let sa = self.sat(a, domain)?;
                let sb = self.sat(b, domain)?;
                Ok(sa.iter().zip(&sb).map(|(&x, &y)| x && y).collect())
            }
            Formula::EDisj(a, b) => {
                let sa = self.sat(a, domain)?;
                let sb = self.sat(b, domain)?;
                Ok(sa.iter().zip(&sb).map(|(&x, &y)| x || y).collect())
            }
            Formula::IConj(a, b) => self.pairwise(a, b, domain, |y, z| y & z),
            Formula::IDisj(a, b) => self.pairwise(a, b, domain, |y, z| y | z),
            Formula::Exists(v, body) => {
                let q = Quantifier::exists();
                self.q_sat(&q, std::slice::from_ref(v), body, domain)
            }
            Formula::Forall(v, body) => {
                let q = Quantifier::forall();
                self.q_sat(&q, std::slice::from_ref(v), body, domain)
            }
            Formula::QApply(name, vars, bodies) => {
                let q = self.reg.resolve(name)?;
                if q.ty().len() != 1 {
                    return Err(EvalError::UnsupportedQuantifierType {
                        name: q.name().to_string(),
                        ty: q.ty().to_vec(),
                        why: "the mt engine supports type ⟨n⟩ quantifiers only".into(),
                    });
                }
                self.q_sat(&q, vars, &bodies[0], domain)
            }
            Formula::Dep(_) | Formula::Indep(..) => Err(EvalError::WrongLogic(
                "dependence atoms must be encoded before mt evaluation".into(),
            )),
            Formula::Top(_) => Err(EvalError::WrongLogic("unexpanded TOP".into())),
        }
    }

    fn pairwise(
        &mut self,
        a: &Formula,
        b: &Formula,
        domain: &[String],
        op: fn(usize, usize) -> usize,
    ) -> Result<Vec<bool>, EvalError> {
        let sa = self.sat(a, domain)?;
        let sb = self.sat(b, domain)?;
        let ya: Vec<usize> = sa.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
        let zb: Vec<usize> = sb.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
        if (ya.len() as u64).saturating_mul(zb.len() as u64) > 400_000_000 {
            return Err(EvalError::TooLarge(
                "internal-connective satisfying-set product too large".into(),
            ));
        }
        let mut out = vec![false; sa.len()];
        for &y in &ya {
            for &z in &zb {
                out[op(y, z)] = true;
            }
        }
        Ok(out)
    }

    fn q_sat(
        &mut self,
        q: &Quantifier,
        vars: &[String],
        body: &Formula,
        domain: &[String],
    ) -> Result<Vec<bool>, EvalError> {
        let k = vars.len();
        if q.ty() != [k] {
            return Err(EvalError::UnsupportedQuantifierType {
                name: q.name().to_string(),
                ty: q.ty().to_vec(),
                why: format!("quantifier application binds {k} variables"),
            });
        }
        let mut ext_domain: Vec<String> = domain.to_vec();
        for v in vars {
            if !ext_domain.contains(v) {
                ext_domain.push(v.clone());
            }
        }
        ext_domain.sort();
        let reduced_domain: Vec<String> = ext_domain
            .iter()
            .filter(|v| !vars.contains(v))
            .cloned()
            .collect();
        let sub = self.sat(body, &ext_domain)?;
        let ext_proto = self.proto(&ext_domain)?;
        let reduced_proto = self.proto(&reduced_domain)?;
        let tuple_count = self.m.universe_size().pow(k as u32);
        // Per extended row: its reduced row and its x̄-tuple index.
        let red_map = projection_map(&ext_proto, &reduced_proto);
        let tup_map = tuple_map(&ext_proto, vars);
        // Membership of each section mask in Q_M.
        let accepted = crate::dep::accepted_masks(q, self.m, k)?;
        let mut accept_tbl = vec![false; 1usize << tuple_count];
        for &a in &accepted {
            accept_tbl[a as usize] = true;
        }
        let empty_in = accept_tbl[0];
        // Projections of satisfying witnesses.
        let mut projset: HashSet<u32> = HashSet::new();
        let rslots = reduced_proto.slots();
        for (y, &ok) in sub.iter().enumerate() {
            if !ok {
                continue;
            }
            let mut sections = vec![0u32; rslots as usize];
            for ext_row in 0..ext_proto.slots() {
                if y >> ext_row & 1 == 1 {
                    sections[red_map[ext_row as usize] as usize] |= 1 << tup_map[ext_row as usize];
                }
            }
            let mut proj: u32 = 0;
            for (ri, &sec) in sections.iter().enumerate() {
                let inq = if sec == 0 { empty_in } else { accept_tbl[sec as usize] };
                if inq {
                    proj |= 1 << ri;
                }
            }
            projset.insert(proj);
        }
        // A team satisfies iff its ∃-projection is some witness projection.
        let domain_proto = self.proto(domain)?;
        let ex_map = exists_projection_map(&domain_proto, &reduced_domain);
        let teams = 1usize << domain_proto.slots();
        let mut out = vec![false; teams];
        for (x, o) in out.iter_mut().enumerate() {
            let mut proj: u32 = 0;
            for row in 0..domain_proto.slots() {
                if x >> row & 1 == 1 {
                    proj |= 1 << ex_map[row as usize];
                }
            }
            *o = projset.contains(&proj);
        }
        Ok(out)
    }
}

/// For each row of `ext`, the row index of its restriction to
/// `reduced`'s domain (which must be a subset of `ext`'s).
fn projection_map(ext: &Team, reduced: &Team) -> Vec<u32> {
    let mut digits = Vec::new();
    let positions: Vec<usize> = reduced
        .domain()
        .iter()
        .map(|v| ext.domain().iter().position(|w| w == v).expect("subset"))
        .collect();
    (0..ext.slots())
        .map(|i| {
            ext.decode(i, &mut digits);
            let picked: Vec<usize> = positions.iter().map(|&p| digits[p]).collect();
            reduced.encode(&picked)
        })
        .collect()
}

/// For each row of `ext`, the lexicographic index of its `vars`-tuple.
fn tuple_map(ext: &Team, vars: &[String]) -> Vec<u32> {
    let m = ext.universe().len() as u32;
    let positions: Vec<usize> = vars
        .iter()
        .map(|v| ext.domain().iter().position(|w| w == v).expect("vars in ext"))
        .collect();
    let mut digits = Vec::new();
    (0..ext.slots())
        .map(|i| {
            ext.decode(i, &mut digits);
            let mut t = 0u32;
            for &p in &positions {
                t = t * m + digits[p] as u32;
            }
            t
        })
        .collect()
}

/// For each row of `proto`, the reduced-row index of its restriction to
/// `reduced_domain` (the ∃-projection map).
fn exists_projection_map(proto: &Team, reduced_domain: &[String]) -> Vec<u32> {
    let reduced = Team::empty(proto.universe().clone(), reduced_domain.to_vec())
        .expect("reduced domain fits");
    projection_map(proto, &reduced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::SymbolTable;
    use crate::syntax::parse;

    fn m2() -> Structure {
        Structure::from_json(
            r#"{"universe":["a","b"],
                "relations":{"R":{"arity":2,"tuples":[["a","b"],["b","b"]]},
                             "P":{"arity":1,"tuples":[["a"]]}}}"#,
        )
        .unwrap()
    }

    fn reg() -> QuantifierRegistry {
        QuantifierRegistry::new()
    }

    fn p(text: &str) -> Formula {
        parse(text, LogicDialect::Mt, &reg(), &SymbolTable::default()).unwrap()
    }

    fn team(m: &Structure, domain: &[&str], rows: &[&[&str]]) -> Team {
        let assignments: Vec<crate::structure::Assignment> = rows
            .iter()
            .map(|r| {
                crate::structure::Assignment::from_pairs(
                    domain
                        .iter()
                        .map(|v| v.to_string())
                        .zip(r.iter().map(|e| e.to_string())),
                )
            })
            .collect();
        Team::from_assignments(
            Arc::clone(m.universe()),
            domain.iter().map(|s| s.to_string()).collect(),
            &assignments,
        )
        .unwrap()
    }

    fn both(m: &Structure, x: &Team, phi: &Formula) -> bool {
        let f = mt_sat(m, x, phi, MtEngine::Functional, &reg()).unwrap();
        let n = mt_sat(m, x, phi, MtEngine::Naive, &reg()).unwrap();
        assert_eq!(f, n, "engines disagree on {phi:?} at {x}");
        f
    }

    #[test]
    fn any_nonempty_team_satisfies_requantified_exists() {
        // With dom(X) = {x}, X ⊨ ∃x(x=x) iff ∃xX = {ε}, i.e. X non-empty.
        let m = m2();
        let phi = p("exists x. x = x");
        for rows in [&[&["a"][..]][..], &[&["b"][..]][..], &[&["a"][..], &["b"][..]][..]] {
            let x = team(&m, &["x"], rows);
            assert!(both(&m, &x, &phi));
        }
        let empty = Team::empty(Arc::clone(m.universe()), vec!["x".into()]).unwrap();
        assert!(!both(&m, &empty, &phi));
    }

    #[test]
    fn literal_biconditional() {
        let m = m2();
        let phi = p("R(x, y)");
        let den = denotation(&m, &phi, &["x".into(), "y".into()], &reg()).unwrap();
        assert!(both(&m, &den, &phi));
        // Any proper subteam or superteam fails.
        for sub in den.subteams() {
            if sub != den {
                assert!(!both(&m, &sub, &phi));
            }
        }
        for sup in den.superteams() {
            if sup != den {
                assert!(!both(&m, &sup, &phi));
            }
        }
    }

    #[test]
    fn weak_locality_reduction_rejects_non_cylinders() {
        // The diagonal team over {y,z} projects fully onto both axes but is
        // not a cylinder over z, so it cannot satisfy a formula that does
        // not mention z.
        let m = m2();
        let phi = p("TOP(y)");
        let diag = team(&m, &["y", "z"], &[&["a", "a"], &["b", "b"]]);
        assert!(!both(&m, &diag, &phi));
        let cyl = team(&m, &["y", "z"], &[&["a", "a"], &["a", "b"]]);
        assert!(both(&m, &cyl, &phi));
        // Without the reduction, the raw clauses accept the diagonal: the
        // two readings genuinely differ, which is why the reduction exists.
        assert!(mt_sat_with(&m, &diag, &phi, MtEngine::Naive, &reg(), false).unwrap());
    }

    #[test]
    fn top_satisfaction() {
        let m = m2();
        // Over dom = w̄, every team satisfies TOP(w̄).
        let phi = p("TOP(x)");
        for x in crate::team::all_teams(Arc::clone(m.universe()), vec!["x".into()], 16).unwrap() {
            assert!(both(&m, &x, &phi));
        }
        let phi2 = p("TOP(x, y)");
        for x in
            crate::team::all_teams(Arc::clone(m.universe()), vec!["x".into(), "y".into()], 16)
                .unwrap()
        {
            assert!(both(&m, &x, &phi2));
        }
    }

    #[test]
    fn external_connectives_are_classical() {
        let m = m2();
        let den = denotation(&m, &p("P(x)"), &["x".into()], &reg()).unwrap();
        // Both conjuncts are literal biconditionals: the team must equal
        // both denotations at once, so `P(x) && x = x` is unsatisfiable on
        // this structure (⟦P⟧ is not the full team).
        assert!(both(&m, &den, &p("P(x) && P(x)")));
        assert!(!both(&m, &den, &p("P(x) && x = x")));
        assert!(both(&m, &den, &p("P(x) || x = x")));
        assert!(!both(&m, &den, &p("P(x) && x != x")));
        // A conjunction of contradictory literals is unsatisfiable.
        for x in crate::team::all_teams(Arc::clone(m.universe()), vec!["x".into()], 16).unwrap() {
            assert!(!both(&m, &x, &p("P(x) && !P(x)")));
        }
    }

    #[test]
    fn internal_connectives_split_teams() {
        let m = m2();
        // ⟦P(x)⟧ = {a}, ⟦!P(x)⟧ = {b}: the union covers the full team.
        let full = Team::full(Arc::clone(m.universe()), vec!["x".into()]).unwrap();
        assert!(both(&m, &full, &p("P(x) \\/ !P(x)")));
        // The intersection of the denotations is empty.
        let empty = Team::empty(Arc::clone(m.universe()), vec!["x".into()]).unwrap();
        assert!(both(&m, &empty, &p("P(x) & !P(x)")));
        assert!(!both(&m, &full, &p("P(x) & !P(x)")));
    }

    #[test]
    fn satisfying_teams_examples() {
        let m = m2();
        // x = x over {x}: only the full team (literal biconditional).
        let ts = satisfying_teams(&m, &p("x = x"), &["x".into()], &reg(), 16).unwrap();
        assert_eq!(ts.len(), 1);
        assert!(ts[0].is_full());
        // TOP(x) over {x}: every team (the domain is fully quantified).
        let ts = satisfying_teams(&m, &p("TOP(x)"), &["x".into()], &reg(), 16).unwrap();
        assert_eq!(ts.len(), 4);
    }

    #[test]
    fn satset_agrees_with_engines() {
        let m = m2();
        let domain = vec!["x".to_string(), "y".to_string()];
        for text in [
            "R(x, y)",
            "P(x) & TOP(x, y)",
            "P(x) \\/ !P(x)",
            "exists z. R(x, z) & P(y)",
            "forall z. (z = x \\/ z != x) && TOP(x, y)",
            "Q[exactly:1] z. R(z, x)",
            "TOP(x)",
            "exists x. x = y",
        ] {
            let phi = p(text);
            let set = sat_mask_set(&m, &phi, &domain, &reg(), 16).unwrap();
            for x in crate::team::all_teams(Arc::clone(m.universe()), domain.clone(), 16).unwrap()
            {
                let direct = both(&m, &x, &phi);
                assert_eq!(
                    set[x.rows_mask() as usize],
                    direct,
                    "satset mismatch on `{text}` at {x}"
                );
            }
        }
    }

    #[test]
    fn sentences() {
        let m = m2();
        assert!(mt_sentence_sat(&m, &p("exists x. x = x"), MtEngine::Functional, &reg()).unwrap());
        assert!(
            !mt_sentence_sat(&m, &p("forall x. x != x"), MtEngine::Functional, &reg()).unwrap()
        );
    }
}
