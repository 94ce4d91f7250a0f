//! Dependence-logic satisfaction over teams, implemented twice.
//!
//! The witness engine follows the arity-reducing clauses directly: the
//! connectives and quantifiers are decided by searching for witness teams
//! related to the input by intersection, union, or projection equations.
//! The standard engine uses the familiar arity-increasing clauses:
//! pointwise conjunction, splitting disjunction, Skolem-function search for
//! `∃`, and duplication `X[M/x]` for `∀`. The two are provably equivalent;
//! the verification suite checks the equivalence exhaustively at desk
//! scale. Independence atoms and the monotone-quantifier clause are shared
//! verbatim between the engines.

use std::collections::{BTreeSet, HashMap};

use crate::error::EvalError;
use crate::quantifier::{is_monotone_increasing, Quantifier, QuantifierRegistry};
use crate::structure::{all_tuples, eval_term, Relation, Structure};
use crate::syntax::{Formula, LogicDialect, Term};
use crate::team::{full_mask, RowMask, SubmaskIter, Team};

/// Which pair of clause families decides connectives and quantifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepEngine {
    /// Arity-reducing witness search.
    Witness,
    /// Arity-increasing standard clauses.
    Standard,
}

/// Hard cap on enumeration steps per query.
const SEARCH_BUDGET: u64 = 200_000_000;

/// `M,X ⊨_D φ` for dependence-logic formulas (dep/indep atoms and monotone
/// increasing generalized quantifiers allowed).
pub fn dep_sat(
    m: &Structure,
    team: &Team,
    phi: &Formula,
    engine: DepEngine,
    reg: &QuantifierRegistry,
) -> Result<bool, EvalError> {
    DepEvaluator::new(m, reg, engine).sat(team, phi)
}

/// Reusable evaluator: memo tables survive across queries against the same
/// structure, which matters when sweeping a formula over many teams. The
/// `'f` lifetime pins every queried formula for the evaluator's lifetime
/// (memo keys are node addresses).
pub struct DepEvaluator<'a, 'f> {
    ctx: DepCtx<'a>,
    _formulas: std::marker::PhantomData<&'f Formula>,
}

impl<'a, 'f> DepEvaluator<'a, 'f> {
    pub fn new(m: &'a Structure, reg: &'a QuantifierRegistry, engine: DepEngine) -> Self {
        DepEvaluator {
            ctx: DepCtx {
                m,
                reg,
                engine,
                memo: HashMap::new(),
                mono: HashMap::new(),
                bounds: HashMap::new(),
                steps: 0,
            },
            _formulas: std::marker::PhantomData,
        }
    }

    pub fn sat(&mut self, team: &Team, phi: &'f Formula) -> Result<bool, EvalError> {
        phi.check_dialect(LogicDialect::Dep)
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

/// `M ⊨ σ`: satisfaction of a sentence at the team `{ε}`.
pub fn dep_sentence_sat(
    m: &Structure,
    sigma: &Formula,
    engine: DepEngine,
    reg: &QuantifierRegistry,
) -> Result<bool, EvalError> {
    if !sigma.free_vars().is_empty() {
        return Err(EvalError::Precondition(
            "sentence satisfaction needs a closed formula".into(),
        ));
    }
    dep_sat(m, &Team::singleton_empty(m.universe().clone()), sigma, engine, reg)
}

struct DepCtx<'a> {
    m: &'a Structure,
    reg: &'a QuantifierRegistry,
    engine: DepEngine,
    memo: HashMap<(usize, Vec<String>, RowMask), bool>,
    mono: HashMap<String, bool>,
    bounds: HashMap<(usize, Vec<String>), Option<RowMask>>,
    steps: u64,
}

impl<'a> DepCtx<'a> {
    fn spend(&mut self, n: u64) -> Result<(), EvalError> {
        self.steps += n;
        if self.steps > SEARCH_BUDGET {
            Err(EvalError::TooLarge(
                "dependence-logic witness search exceeded its step budget".into(),
            ))
        } else {
            Ok(())
        }
    }

    fn eval(&mut self, x: &Team, phi: &Formula) -> Result<bool, EvalError> {
        let key = (phi as *const Formula as usize, x.domain().to_vec(), x.rows_mask());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let out = self.eval_inner(x, phi)?;
        self.memo.insert(key, out);
        Ok(out)
    }

    fn eval_inner(&mut self, x: &Team, phi: &Formula) -> Result<bool, EvalError> {
        match phi {
            Formula::Rel(..) | Formula::Eq(..) => {
                for i in x.row_indices() {
                    let s = x.row_assignment(i);
                    if !crate::structure::tarski_sat(self.m, &s, phi, self.reg)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Dep(terms) => self.dep_atom(x, terms),
            Formula::Indep(xs, ys, zs) => indep_atom(self.m, x, xs, ys, zs),
            Formula::IConj(a, b) => match self.engine {
                DepEngine::Standard => Ok(self.eval(x, a)? && self.eval(x, b)?),
                DepEngine::Witness => self.witness_iconj(x, a, b),
            },
            Formula::IDisj(a, b) => match self.engine {
                DepEngine::Standard => {
                    // Splitting disjunction over partitions; overlapping
                    // covers are subsumed by downward closure.
                    for sub in SubmaskIter::new(x.rows_mask()) {
                        self.spend(1)?;
                        let y = Team::from_mask(x.universe().clone(), x.domain().to_vec(), sub)?;
                        let z = Team::from_mask(
                            x.universe().clone(),
                            x.domain().to_vec(),
                            x.rows_mask() & !sub,
                        )?;
                        if self.eval(&y, a)? && self.eval(&z, b)? {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                }
                DepEngine::Witness => self.witness_idisj(x, a, b),
            },
            Formula::Exists(v, body) => match self.engine {
                DepEngine::Standard => self.standard_exists(x, v, body),
                DepEngine::Witness => self.witness_exists(x, v, body),
            },
            Formula::Forall(v, body) => match self.engine {
                DepEngine::Standard => {
                    let ext = x.extend_all(v)?;
                    self.eval(&ext, body)
                }
                DepEngine::Witness => self.witness_forall(x, v, body),
            },
            Formula::QApply(name, vars, bodies) => {
                let q = self.reg.resolve(name)?;
                self.monotone_q_clause(x, &q, vars, &bodies[0])
            }
            Formula::EConj(..) | Formula::EDisj(..) | Formula::Top(_) => Err(
                EvalError::WrongLogic("external connectives and TOP are mt-logic only".into()),
            ),
        }
    }

    fn dep_atom(&mut self, x: &Team, terms: &[Term]) -> Result<bool, EvalError> {
        let rows = x.assignments();
        let (deps, target) = terms.split_at(terms.len() - 1);
        for s in &rows {
            for s2 in &rows {
                let agree = deps
                    .iter()
                    .map(|t| Ok(eval_term(self.m, s, t)? == eval_term(self.m, s2, t)?))
                    .collect::<Result<Vec<_>, EvalError>>()?
                    .into_iter()
                    .all(|b| b);
                if agree
                    && eval_term(self.m, s, &target[0])? != eval_term(self.m, s2, &target[0])?
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Sound upper bound on satisfying teams over `domain`: literals are
    /// downward closed with denotation-bounded satisfaction, and the bound
    /// propagates through the internal connectives. `None` means no
    /// information.
    fn upper_bound(
        &mut self,
        phi: &Formula,
        domain: &[String],
    ) -> Result<Option<RowMask>, EvalError> {
        let key = (phi as *const Formula as usize, domain.to_vec());
        if let Some(v) = self.bounds.get(&key) {
            return Ok(*v);
        }
        let out = match phi {
            Formula::Rel(..) | Formula::Eq(..) => {
                let den =
                    crate::structure::denotation(self.m, phi, domain, self.reg)?;
                Some(den.rows_mask())
            }
            Formula::IConj(a, b) => {
                match (self.upper_bound(a, domain)?, self.upper_bound(b, domain)?) {
                    (Some(x), Some(y)) => Some(x & y),
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                }
            }
            Formula::IDisj(a, b) => {
                match (self.upper_bound(a, domain)?, self.upper_bound(b, domain)?) {
                    (Some(x), Some(y)) => Some(x | y),
                    _ => None,
                }
            }
            _ => None,
        };
        self.bounds.insert(key, out);
        Ok(out)
    }

    /// Witness clause for `⩓`: some `Y ∩ Z = X` with `Y ⊨ φ` and `Z ⊨ ψ`.
    /// Y and Z extend X by disjoint parts of the complement, pruned by the
    /// conjuncts' upper bounds.
    fn witness_iconj(&mut self, x: &Team, a: &Formula, b: &Formula) -> Result<bool, EvalError> {
        let full = full_mask(x.slots());
        let ua = self.upper_bound(a, x.domain())?.unwrap_or(full);
        let ub = self.upper_bound(b, x.domain())?.unwrap_or(full);
        if x.rows_mask() & !ua != 0 || x.rows_mask() & !ub != 0 {
            return Ok(false);
        }
        let comp: Vec<(u32, bool, bool)> = x
            .complement()
            .row_indices()
            .map(|i| (i, ua >> i & 1 == 1, ub >> i & 1 == 1))
            .filter(|(_, ca, cb)| *ca || *cb)
            .collect();
        let mut extra_a: RowMask = 0;
        let mut extra_b: RowMask = 0;
        self.trit_search(x, a, b, &comp, 0, &mut extra_a, &mut extra_b)
    }

    /// Witness clause for `⩔`: some `Y ∪ Z = X`; every row of X goes to
    /// Y only, Z only, or both, subject to the upper bounds.
    fn witness_idisj(&mut self, x: &Team, a: &Formula, b: &Formula) -> Result<bool, EvalError> {
        let full = full_mask(x.slots());
        let ua = self.upper_bound(a, x.domain())?.unwrap_or(full);
        let ub = self.upper_bound(b, x.domain())?.unwrap_or(full);
        if x.rows_mask() & !(ua | ub) != 0 {
            return Ok(false);
        }
        let rows: Vec<(u32, bool, bool)> = x
            .row_indices()
            .map(|i| (i, ua >> i & 1 == 1, ub >> i & 1 == 1))
            .collect();
        let mut ymask: RowMask = 0;
        let mut zmask: RowMask = 0;
        self.union_search(x, a, b, &rows, 0, &mut ymask, &mut zmask)
    }

    #[allow(clippy::too_many_arguments)]
    fn trit_search(
        &mut self,
        x: &Team,
        a: &Formula,
        b: &Formula,
        comp: &[(u32, bool, bool)],
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
            let z = Team::from_mask(
                x.universe().clone(),
                x.domain().to_vec(),
                x.rows_mask() | *extra_b,
            )?;
            return Ok(self.eval(&y, a)? && self.eval(&z, b)?);
        }
        let (row, can_a, can_b) = comp[at];
        let bit = 1u128 << row;
        // Row absent from both extensions.
        if self.trit_search(x, a, b, comp, at + 1, extra_a, extra_b)? {
            return Ok(true);
        }
        if can_a {
            *extra_a |= bit;
            let hit = self.trit_search(x, a, b, comp, at + 1, extra_a, extra_b)?;
            *extra_a &= !bit;
            if hit {
                return Ok(true);
            }
        }
        if can_b {
            *extra_b |= bit;
            let hit = self.trit_search(x, a, b, comp, at + 1, extra_a, extra_b)?;
            *extra_b &= !bit;
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }

    #[allow(clippy::too_many_arguments)]
    fn union_search(
        &mut self,
        x: &Team,
        a: &Formula,
        b: &Formula,
        rows: &[(u32, bool, bool)],
        at: usize,
        ymask: &mut RowMask,
        zmask: &mut RowMask,
    ) -> Result<bool, EvalError> {
        if at == rows.len() {
            self.spend(1)?;
            let y = Team::from_mask(x.universe().clone(), x.domain().to_vec(), *ymask)?;
            let z = Team::from_mask(x.universe().clone(), x.domain().to_vec(), *zmask)?;
            return Ok(self.eval(&y, a)? && self.eval(&z, b)?);
        }
        let (row, can_a, can_b) = rows[at];
        let bit = 1u128 << row;
        let options: &[(RowMask, RowMask)] = match (can_a, can_b) {
            (true, true) => &[(bit, 0), (0, bit), (bit, bit)],
            (true, false) => &[(bit, 0)],
            (false, true) => &[(0, bit)],
            (false, false) => return Ok(false),
        };
        for &(ya, za) in options {
            *ymask |= ya;
            *zmask |= za;
            let hit = self.union_search(x, a, b, rows, at + 1, ymask, zmask)?;
            *ymask &= !ya;
            *zmask &= !za;
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Witness clause for `∃x`: some `Y` over `dom(X) ∪ {x}` with
    /// `∃xY = ∃xX`, i.e. sections non-empty exactly on `∃xX`.
    fn witness_exists(&mut self, x: &Team, v: &str, body: &Formula) -> Result<bool, EvalError> {
        let reduced = x.exists_project(v);
        let (proto, table) = reduced.extension_tables(&[v.to_string()])?;
        let m = self.m.universe_size();
        let bound = self.upper_bound(body, proto.domain())?;
        let targets: Vec<u32> = reduced.row_indices().collect();
        // Non-empty section masks, one choice per target row.
        let choices: Vec<u32> = (1..(1u32 << m)).collect();
        let Some(per_row) =
            per_row_choices(&targets, &choices, &table, m, bound, false)
        else {
            return Ok(false);
        };
        let mut acc: RowMask = 0;
        self.section_search(&proto, &table, m, &targets, &per_row, 0, &mut acc, body)
    }

    /// Witness clause for `∀x`: some `Y` with `∀xY = ∃xX`: full sections on
    /// `∃xX`, non-full sections (possibly empty) elsewhere.
    fn witness_forall(&mut self, x: &Team, v: &str, body: &Formula) -> Result<bool, EvalError> {
        let reduced = x.exists_project(v);
        let (proto, table) = reduced.extension_tables(&[v.to_string()])?;
        let m = self.m.universe_size();
        let bound = self.upper_bound(body, proto.domain())?;
        let mut base: RowMask = 0;
        for ri in reduced.row_indices() {
            for e in 0..m {
                base |= 1u128 << table[ri as usize * m + e];
            }
        }
        if let Some(u) = bound {
            if base & !u != 0 {
                return Ok(false);
            }
        }
        let others: Vec<u32> = reduced.complement().row_indices().collect();
        let choices: Vec<u32> = (0..(1u32 << m) - 1).collect();
        let Some(per_row) = per_row_choices(&others, &choices, &table, m, bound, true)
        else {
            return Ok(false);
        };
        let mut acc: RowMask = base;
        self.section_search(&proto, &table, m, &others, &per_row, 0, &mut acc, body)
    }

    #[allow(clippy::too_many_arguments)]
    fn section_search(
        &mut self,
        proto: &Team,
        table: &[u32],
        m: usize,
        rows: &[u32],
        per_row: &[Vec<u32>],
        at: usize,
        acc: &mut RowMask,
        body: &Formula,
    ) -> Result<bool, EvalError> {
        if at == rows.len() {
            self.spend(1)?;
            let y = Team::from_mask(proto.universe().clone(), proto.domain().to_vec(), *acc)?;
            return self.eval(&y, body);
        }
        let ri = rows[at] as usize;
        for &choice in &per_row[at] {
            let mut add: RowMask = 0;
            for e in 0..m {
                if choice >> e & 1 == 1 {
                    add |= 1u128 << table[ri * m + e];
                }
            }
            *acc |= add;
            let hit = self.section_search(proto, table, m, rows, per_row, at + 1, acc, body)?;
            *acc &= !add;
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn standard_exists(&mut self, x: &Team, v: &str, body: &Formula) -> Result<bool, EvalError> {
        // Skolem search: f: X → M with X[f/x] ⊨ φ, one value choice per row
        // of X (rows sharing a reduced part choose independently, and their
        // images may merge). Choices are pruned by the body's upper bound.
        let m = self.m.universe_size();
        let requantified = x.domain().contains(&v.to_string());
        let base = if requantified {
            x.exists_project(v)
        } else {
            x.clone()
        };
        let (proto, table) = base.extension_tables(&[v.to_string()])?;
        let bound = self.upper_bound(body, proto.domain())?;
        // Base-row index of each X-row.
        let mut digits = Vec::new();
        let vpos = x.domain().iter().position(|w| w == v);
        let base_rows: Vec<u32> = x
            .row_indices()
            .map(|i| {
                if let Some(p) = vpos {
                    x.decode(i, &mut digits);
                    let mut reduced = digits.clone();
                    reduced.remove(p);
                    base.encode(&reduced)
                } else {
                    i
                }
            })
            .collect();
        let mut per_row: Vec<Vec<usize>> = Vec::with_capacity(base_rows.len());
        for &ri in &base_rows {
            let allowed: Vec<usize> = (0..m)
                .filter(|&e| match bound {
                    None => true,
                    Some(u) => u >> table[ri as usize * m + e] & 1 == 1,
                })
                .collect();
            if allowed.is_empty() {
                return Ok(false);
            }
            per_row.push(allowed);
        }
        self.skolem_search(&proto, &table, m, &base_rows, &per_row, 0, &mut 0, body)
    }

    #[allow(clippy::too_many_arguments)]
    fn skolem_search(
        &mut self,
        proto: &Team,
        table: &[u32],
        m: usize,
        rows: &[u32],
        per_row: &[Vec<usize>],
        at: usize,
        acc: &mut RowMask,
        body: &Formula,
    ) -> Result<bool, EvalError> {
        if at == rows.len() {
            self.spend(1)?;
            let y = Team::from_mask(proto.universe().clone(), proto.domain().to_vec(), *acc)?;
            return self.eval(&y, body);
        }
        let ri = rows[at] as usize;
        for &e in &per_row[at] {
            let bit = 1u128 << table[ri * m + e];
            let had = *acc & bit != 0;
            *acc |= bit;
            let hit = self.skolem_search(proto, table, m, rows, per_row, at + 1, acc, body)?;
            if !had {
                *acc &= !bit;
            }
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Truth condition for monotone increasing Q: there is
    /// `F: ∃x̄X → Q_M` with `(∃x̄X)[F/x̄] ⊨_D φ`. Shared by both engines.
    fn monotone_q_clause(
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
                why: "team-level quantification needs a type ⟨n⟩ quantifier binding n variables"
                    .into(),
            });
        }
        let mono = match self.mono.get(q.name()) {
            Some(&b) => b,
            None => {
                let b = is_monotone_increasing(q, self.m)?;
                self.mono.insert(q.name().to_string(), b);
                b
            }
        };
        if !mono {
            return Err(EvalError::UnsupportedQuantifierType {
                name: q.name().to_string(),
                ty: q.ty().to_vec(),
                why: "the dependence-logic clause is defined for monotone increasing quantifiers"
                    .into(),
            });
        }
        let reduced = x.exists_project_all(vars);
        let (proto, table) = reduced.extension_tables(vars)?;
        let tuple_count = self.m.universe_size().pow(k as u32);
        let accepted = accepted_masks(q, self.m, k)?;
        let bound = self.upper_bound(body, proto.domain())?;
        let rows: Vec<u32> = reduced.row_indices().collect();
        let Some(per_row) = per_row_choices(&rows, &accepted, &table, tuple_count, bound, false)
        else {
            return Ok(false);
        };
        let mut acc: RowMask = 0;
        self.q_choice_search(&proto, &table, tuple_count, &rows, &per_row, 0, &mut acc, body)
    }

    #[allow(clippy::too_many_arguments)]
    fn q_choice_search(
        &mut self,
        proto: &Team,
        table: &[u32],
        tuple_count: usize,
        rows: &[u32],
        per_row: &[Vec<u32>],
        at: usize,
        acc: &mut RowMask,
        body: &Formula,
    ) -> Result<bool, EvalError> {
        if at == rows.len() {
            self.spend(1)?;
            let y = Team::from_mask(proto.universe().clone(), proto.domain().to_vec(), *acc)?;
            return self.eval(&y, body);
        }
        let ri = rows[at] as usize;
        for &mask in &per_row[at] {
            let mut add: RowMask = 0;
            for t in 0..tuple_count {
                if mask >> t & 1 == 1 {
                    add |= 1u128 << table[ri * tuple_count + t];
                }
            }
            *acc |= add;
            let hit = self.q_choice_search(
                proto,
                table,
                tuple_count,
                rows,
                per_row,
                at + 1,
                acc,
                body,
            )?;
            *acc &= !add;
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Filters section choices per row against an upper bound on the witness
/// team. `allow_empty_fallback` keeps the empty choice for rows whose
/// sections are fully excluded (the `∀` clause permits empty sections
/// outside the target).
fn per_row_choices(
    rows: &[u32],
    choices: &[u32],
    table: &[u32],
    tuple_count: usize,
    bound: Option<RowMask>,
    allow_empty_fallback: bool,
) -> Option<Vec<Vec<u32>>> {
    let mut out = Vec::with_capacity(rows.len());
    for &ri in rows {
        let filtered: Vec<u32> = match bound {
            None => choices.to_vec(),
            Some(u) => {
                let mut sec: u32 = 0;
                for t in 0..tuple_count {
                    if u >> table[ri as usize * tuple_count + t] & 1 == 1 {
                        sec |= 1 << t;
                    }
                }
                choices.iter().copied().filter(|c| c & !sec == 0).collect()
            }
        };
        if filtered.is_empty() {
            if allow_empty_fallback && choices.contains(&0) {
                out.push(vec![0]);
                continue;
            }
            return None;
        }
        out.push(filtered);
    }
    Some(out)
}

/// Section-set masks accepted by `Q_M` over `M^k` (bit `t` = tuple `t` in
/// lexicographic order).
pub(crate) fn accepted_masks(
    q: &Quantifier,
    m: &Structure,
    k: usize,
) -> Result<Vec<u32>, EvalError> {
    let tuples = all_tuples(m.universe_size(), k);
    let n = tuples.len();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let rel = Relation::new(
            k,
            tuples
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect(),
        );
        if q.accepts(m, &[rel])? {
            out.push(mask);
        }
    }
    Ok(out)
}

/// The independence atom `ȳ ⊥_x̄ z̄`: for all `s, s′ ∈ X` there is
/// `s₀ ∈ X` with (if `s(x̄) = s′(x̄)`) `s₀(x̄,z̄) = s(x̄,z̄)` and
/// `s₀(x̄,ȳ) = s′(x̄,ȳ)`.
pub fn indep_atom(
    m: &Structure,
    x: &Team,
    xs: &[String],
    ys: &[String],
    zs: &[String],
) -> Result<bool, EvalError> {
    let _ = m;
    let rows = x.assignments();
    let proj = |s: &crate::structure::Assignment, vars: &[String]| -> Vec<String> {
        vars.iter()
            .map(|v| s.get(v).expect("free variables are in the domain").to_string())
            .collect()
    };
    let xz: Vec<String> = xs.iter().chain(zs).cloned().collect();
    let xy: Vec<String> = xs.iter().chain(ys).cloned().collect();
    for s in &rows {
        for s2 in &rows {
            if proj(s, xs) != proj(s2, xs) {
                continue;
            }
            let want_xz = proj(s, &xz);
            let want_xy = proj(s2, &xy);
            let found = rows
                .iter()
                .any(|s0| proj(s0, &xz) == want_xz && proj(s0, &xy) == want_xy);
            if !found {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The witness-style clause for monotone increasing Q from the
/// arity-reducing side: there exists `Y` with `x̄ ⊆ dom(Y)`,
/// `Qx̄Y = ∃x̄X`, and `Y ⊨_D φ`. Used to cross-check the function-based
/// clause; enumerates all witness teams.
pub fn dep_q_witness_form(
    m: &Structure,
    x: &Team,
    q: &Quantifier,
    vars: &[String],
    body: &Formula,
    engine: DepEngine,
    reg: &QuantifierRegistry,
) -> Result<bool, EvalError> {
    let reduced = x.exists_project_all(vars);
    let (proto, _) = reduced.extension_tables(vars)?;
    if proto.slots() > 16 {
        return Err(EvalError::TooLarge(
            "witness-form enumeration needs at most 16 assignment slots".into(),
        ));
    }
    let full = full_mask(proto.slots());
    for rows in 0..=(full as u64) {
        let y = Team::from_mask(proto.universe().clone(), proto.domain().to_vec(), rows as u128)?;
        if y.q_project(q, m, vars)? == reduced && dep_sat(m, &y, body, engine, reg)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::SymbolTable;
    use crate::syntax::parse;
    use std::sync::Arc;

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
        parse(text, LogicDialect::Dep, &reg(), &SymbolTable::default()).unwrap()
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
        let w = dep_sat(m, x, phi, DepEngine::Witness, &reg()).unwrap();
        let s = dep_sat(m, x, phi, DepEngine::Standard, &reg()).unwrap();
        assert_eq!(w, s, "engines disagree on {phi:?} at {x}");
        w
    }

    #[test]
    fn dep_atom_function_graph() {
        let m = m2();
        let graph = team(&m, &["x", "y"], &[&["a", "a"], &["b", "b"]]);
        assert!(both(&m, &graph, &p("dep(x, y)")));
        let clash = team(&m, &["x", "y"], &[&["a", "a"], &["a", "b"]]);
        assert!(!both(&m, &clash, &p("dep(x, y)")));
    }

    #[test]
    fn empty_team_satisfies_everything() {
        let m = m2();
        let empty = Team::empty(Arc::clone(m.universe()), vec!["x".into(), "y".into()]).unwrap();
        for text in [
            "dep(x, y)",
            "R(x, y)",
            "x = y \\/ dep(x, y)",
            "exists z. dep(x, z)",
            "forall z. z = z & dep(x, y)",
            "indep(; x ; y)",
        ] {
            assert!(both(&m, &empty, &p(text)), "{text}");
        }
    }

    #[test]
    fn sentences() {
        let m = m2();
        assert!(
            dep_sentence_sat(&m, &p("exists x. x = x"), DepEngine::Witness, &reg()).unwrap()
        );
        assert!(
            !dep_sentence_sat(&m, &p("forall x. x != x"), DepEngine::Standard, &reg()).unwrap()
        );
        // ∀x∃y with a dependence constraint on a 2-element model.
        let phi = p("forall x. exists y. dep(x, y) & R(x, y)");
        assert!(both(
            &m,
            &Team::singleton_empty(Arc::clone(m.universe())),
            &phi
        ));
    }

    #[test]
    fn indep_examples() {
        let m = m2();
        let product = team(
            &m,
            &["x", "y"],
            &[&["a", "a"], &["a", "b"], &["b", "a"], &["b", "b"]],
        );
        assert!(both(&m, &product, &p("indep(; x ; y)")));
        let diag = team(&m, &["x", "y"], &[&["a", "a"], &["b", "b"]]);
        assert!(!both(&m, &diag, &p("indep(; x ; y)")));
        // dep(x,y) is equivalent to y ⊥_x y.
        for t in [
            team(&m, &["x", "y"], &[&["a", "a"], &["b", "b"]]),
            team(&m, &["x", "y"], &[&["a", "a"], &["a", "b"]]),
            diag,
        ] {
            assert_eq!(
                both(&m, &t, &p("dep(x, y)")),
                both(&m, &t, &p("indep(x ; y ; y)"))
            );
        }
    }

    #[test]
    fn monotone_q_clause_works() {
        let m = m2();
        let full = Team::full(Arc::clone(m.universe()), vec!["x".into()]).unwrap();
        // Q[atleast:2] y: at least two y-values satisfy R(x,y) for each x:
        // R = {(a,b),(b,b)} has one y per x, so this fails.
        let phi = parse(
            "Q[atleast:2] y. R(x, y)",
            LogicDialect::Dep,
            &reg(),
            &SymbolTable::default(),
        )
        .unwrap();
        assert!(!both(&m, &full, &phi));
        let phi1 = parse(
            "Q[atleast:1] y. R(x, y)",
            LogicDialect::Dep,
            &reg(),
            &SymbolTable::default(),
        )
        .unwrap();
        assert!(both(&m, &full, &phi1));
        // Non-monotone quantifiers are rejected by the dependence clause.
        let bad = parse(
            "Q[exactly:1] y. R(x, y)",
            LogicDialect::Dep,
            &reg(),
            &SymbolTable::default(),
        )
        .unwrap();
        assert!(matches!(
            dep_sat(&m, &full, &bad, DepEngine::Witness, &reg()),
            Err(EvalError::UnsupportedQuantifierType { .. })
        ));
    }

    #[test]
    fn requantification_overwrites() {
        let m = m2();
        let x = team(&m, &["x"], &[&["a"]]);
        // X = {x↦a} satisfies ∃x P(x)-ish re-binding: choose x := a where P
        // holds; also ∃x (x = b).
        assert!(both(&m, &x, &p("exists x. P(x)")));
        assert!(both(&m, &x, &p("exists x. x != x")) == false);
    }
}
