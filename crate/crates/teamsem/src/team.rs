//! Teams: sets of assignments over a common variable domain.
//!
//! Rows are stored as bit positions in the lexicographic enumeration of
//! `universe^|domain|` (first domain variable most significant, universe
//! order as digit order), so a team is a bitmask plus bookkeeping. This
//! keeps the exponential witness searches in the semantics engines cheap.
//! The empty team carries its domain explicitly: `∅_V ≠ ∅_W` for `V ≠ W`,
//! and both differ from `{ε}`, the team of one empty assignment.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LoadError, TeamError};
use crate::quantifier::Quantifier;
use crate::structure::{Assignment, Elem, Structure};

/// Upper bound on `|universe|^|domain|` for a single team.
pub const MAX_SLOTS: u32 = 128;

/// Bitmask of rows; bit `i` set means assignment number `i` is in the team.
pub type RowMask = u128;

#[derive(Debug, Clone)]
pub struct Team {
    universe: Arc<Vec<String>>,
    domain: Vec<String>, // strictly ascending
    rows: RowMask,
}

impl PartialEq for Team {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.rows == other.rows
            && self.universe == other.universe
    }
}
impl Eq for Team {}

impl std::hash::Hash for Team {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.domain.hash(state);
        self.rows.hash(state);
    }
}

impl PartialOrd for Team {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Team {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.domain
            .cmp(&other.domain)
            .then(self.rows.cmp(&other.rows))
    }
}

fn sorted_dedup(mut vars: Vec<String>) -> Result<Vec<String>, TeamError> {
    vars.sort();
    for w in vars.windows(2) {
        if w[0] == w[1] {
            return Err(TeamError::RepeatedVariable(w[0].clone()));
        }
    }
    Ok(vars)
}

impl Team {
    /// The empty team `∅_V` over the given domain.
    pub fn empty(universe: Arc<Vec<String>>, domain: Vec<String>) -> Result<Team, TeamError> {
        let domain = sorted_dedup(domain)?;
        let m = universe.len();
        let d = domain.len();
        let slots = checked_slots(m, d)?;
        let _ = slots;
        Ok(Team {
            universe,
            domain,
            rows: 0,
        })
    }

    /// The full team over the given domain; with an empty domain this is `{ε}`.
    pub fn full(universe: Arc<Vec<String>>, domain: Vec<String>) -> Result<Team, TeamError> {
        let mut t = Team::empty(universe, domain)?;
        t.rows = full_mask(t.slots());
        Ok(t)
    }

    /// The team `{ε}` of exactly the empty assignment.
    pub fn singleton_empty(universe: Arc<Vec<String>>) -> Team {
        Team::full(universe, vec![]).expect("empty domain always fits")
    }

    pub fn from_mask(
        universe: Arc<Vec<String>>,
        domain: Vec<String>,
        rows: RowMask,
    ) -> Result<Team, TeamError> {
        let t = Team::empty(universe, domain)?;
        let full = full_mask(t.slots());
        Ok(Team {
            rows: rows & full,
            ..t
        })
    }

    /// Builds a team from explicit assignments; every assignment must bind
    /// exactly the domain with values from the universe.
    pub fn from_assignments(
        universe: Arc<Vec<String>>,
        domain: Vec<String>,
        rows: &[Assignment],
    ) -> Result<Team, TeamError> {
        let mut t = Team::empty(universe, domain)?;
        for s in rows {
            let mut idx: u32 = 0;
            if s.len() != t.domain.len() {
                return Err(TeamError::TupleLength {
                    expected: t.domain.len(),
                    got: s.len(),
                });
            }
            for v in &t.domain {
                let val = s
                    .get(v)
                    .ok_or_else(|| TeamError::VariablesOutsideDomain(vec![v.clone()]))?;
                let e = t
                    .universe
                    .iter()
                    .position(|u| u == val)
                    .ok_or_else(|| TeamError::UnknownElement(val.to_string()))?;
                idx = idx * t.universe.len() as u32 + e as u32;
            }
            t.rows |= 1u128 << idx;
        }
        Ok(t)
    }

    pub fn universe(&self) -> &Arc<Vec<String>> {
        &self.universe
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn rows_mask(&self) -> RowMask {
        self.rows
    }

    pub fn slots(&self) -> u32 {
        (self.universe.len() as u128).pow(self.domain.len() as u32) as u32
    }

    pub fn len(&self) -> usize {
        self.rows.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn is_full(&self) -> bool {
        self.rows == full_mask(self.slots())
    }

    pub fn with_row(&self, idx: u32) -> Team {
        Team {
            rows: self.rows | (1u128 << idx),
            ..self.clone()
        }
    }

    pub fn contains_row(&self, idx: u32) -> bool {
        self.rows >> idx & 1 == 1
    }

    fn var_pos(&self, var: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == var)
    }

    /// Decodes a row index into element indices, one per domain variable.
    pub fn decode(&self, mut idx: u32, out: &mut Vec<Elem>) {
        let m = self.universe.len() as u32;
        let d = self.domain.len();
        out.clear();
        out.resize(d, 0);
        for i in (0..d).rev() {
            out[i] = (idx % m) as usize;
            idx /= m;
        }
    }

    pub fn encode(&self, digits: &[Elem]) -> u32 {
        let m = self.universe.len() as u32;
        let mut idx = 0;
        for &e in digits {
            idx = idx * m + e as u32;
        }
        idx
    }

    /// The assignment at a row index.
    pub fn row_assignment(&self, idx: u32) -> Assignment {
        let mut digits = Vec::new();
        self.decode(idx, &mut digits);
        Assignment::from_pairs(
            self.domain
                .iter()
                .zip(&digits)
                .map(|(v, &e)| (v.clone(), self.universe[e].clone())),
        )
    }

    /// All rows as explicit assignments, in canonical order.
    pub fn assignments(&self) -> Vec<Assignment> {
        self.row_indices()
            .map(|i| self.row_assignment(i))
            .collect()
    }

    pub fn row_indices(&self) -> impl Iterator<Item = u32> + '_ {
        let rows = self.rows;
        (0..self.slots()).filter(move |i| rows >> i & 1 == 1)
    }

    /// Positions of `vars` within the domain; errors if any is missing.
    fn positions(&self, vars: &[String]) -> Result<Vec<usize>, TeamError> {
        vars.iter()
            .map(|v| {
                self.var_pos(v)
                    .ok_or_else(|| TeamError::VariablesOutsideDomain(vec![v.clone()]))
            })
            .collect()
    }

    /// Builds the index-translation table from this team's rows to rows of a
    /// team over `sub`, a subset of the domain (ordered ascending).
    fn projection_table(&self, sub: &[String]) -> Vec<u32> {
        let m = self.universe.len() as u32;
        let positions: Vec<usize> = sub
            .iter()
            .map(|v| self.var_pos(v).expect("sub must be within the domain"))
            .collect();
        let mut digits = Vec::new();
        (0..self.slots())
            .map(|idx| {
                self.decode(idx, &mut digits);
                let mut out = 0u32;
                for &p in &positions {
                    out = out * m + digits[p] as u32;
                }
                out
            })
            .collect()
    }

    /// `X↾x̄`: restriction, with `dom = dom(X) ∩ x̄`; duplicates collapse.
    pub fn restrict(&self, vars: &BTreeSet<String>) -> Team {
        let sub: Vec<String> = self
            .domain
            .iter()
            .filter(|v| vars.contains(*v))
            .cloned()
            .collect();
        let table = self.projection_table(&sub);
        let mut rows: RowMask = 0;
        for i in self.row_indices() {
            rows |= 1u128 << table[i as usize];
        }
        Team {
            universe: self.universe.clone(),
            domain: sub,
            rows,
        }
    }

    /// `∃xX`: rows of the reduced domain with at least one extension in `X`
    /// (equal to `X` when `x ∉ dom(X)`).
    pub fn exists_project(&self, x: &str) -> Team {
        if self.var_pos(x).is_none() {
            return self.clone();
        }
        let sub: Vec<String> = self.domain.iter().filter(|v| *v != x).cloned().collect();
        let table = self.projection_table(&sub);
        let mut rows: RowMask = 0;
        for i in self.row_indices() {
            rows |= 1u128 << table[i as usize];
        }
        Team {
            universe: self.universe.clone(),
            domain: sub,
            rows,
        }
    }

    /// `∀xX`: rows of the reduced domain all of whose extensions are in `X`.
    pub fn forall_project(&self, x: &str) -> Team {
        if self.var_pos(x).is_none() {
            return self.clone();
        }
        let sub: Vec<String> = self.domain.iter().filter(|v| *v != x).cloned().collect();
        let table = self.projection_table(&sub);
        let reduced_slots = (self.universe.len() as u128).pow(sub.len() as u32) as u32;
        let mut missing: RowMask = 0;
        for i in 0..self.slots() {
            if !self.contains_row(i) {
                missing |= 1u128 << table[i as usize];
            }
        }
        Team {
            universe: self.universe.clone(),
            domain: sub,
            rows: full_mask(reduced_slots) & !missing,
        }
    }

    /// Iterated `∃`-projection over several variables.
    pub fn exists_project_all(&self, vars: &[String]) -> Team {
        let mut t = self.clone();
        for v in vars {
            t = t.exists_project(v);
        }
        t
    }

    /// `X[M/x]`: every row extended with every element (overwrites `x` if
    /// already present).
    pub fn extend_all(&self, x: &str) -> Result<Team, TeamError> {
        let m = self.universe.len();
        let base = if self.var_pos(x).is_some() {
            self.exists_project(x)
        } else {
            self.clone()
        };
        let mut domain = base.domain.clone();
        domain.push(x.to_string());
        let mut out = Team::empty(self.universe.clone(), domain)?;
        let table = out.embedding_table(&base, x)?;
        let mut rows: RowMask = 0;
        for i in base.row_indices() {
            for e in 0..m {
                rows |= 1u128 << table[i as usize * m + e];
            }
        }
        out.rows = rows;
        Ok(out)
    }

    /// Table mapping (row of `base`, element) to a row index of `self`,
    /// where `self`'s domain is `base`'s plus the variable `x`.
    fn embedding_table(&self, base: &Team, x: &str) -> Result<Vec<u32>, TeamError> {
        let m = self.universe.len();
        let xp = self
            .var_pos(x)
            .ok_or_else(|| TeamError::VariablesOutsideDomain(vec![x.to_string()]))?;
        let mut digits = Vec::new();
        let mut table = vec![0u32; base.slots() as usize * m];
        for i in 0..base.slots() {
            base.decode(i, &mut digits);
            for e in 0..m {
                let mut full = digits.clone();
                full.insert(xp, e);
                table[i as usize * m + e] = self.encode(&full);
            }
        }
        Ok(table)
    }

    /// `X[f/x]`: extends every row with the element chosen by `f`.
    pub fn extend_fn(
        &self,
        f: &mut dyn FnMut(&Assignment) -> Option<String>,
        x: &str,
    ) -> Result<Team, TeamError> {
        let mut rows = Vec::new();
        for i in self.row_indices() {
            let s = self.row_assignment(i);
            let val = f(&s).ok_or(TeamError::UndefinedOnRow)?;
            if !self.universe.iter().any(|u| *u == val) {
                return Err(TeamError::UnknownElement(val));
            }
            let mut s2 = s;
            s2.insert(x, val);
            rows.push(s2);
        }
        let mut domain = self.domain.clone();
        if self.var_pos(x).is_none() {
            domain.push(x.to_string());
        }
        Team::from_assignments(self.universe.clone(), domain, &rows)
    }

    /// `X[F/x̄]`: extends every row with every tuple in `F(row)`; a row with
    /// `F(row) = ∅` contributes nothing.
    pub fn extend_setfn(
        &self,
        f: &mut dyn FnMut(&Assignment) -> Option<BTreeSet<Vec<String>>>,
        vars: &[String],
    ) -> Result<Team, TeamError> {
        let mut seen = BTreeSet::new();
        for v in vars {
            if !seen.insert(v.clone()) {
                return Err(TeamError::RepeatedVariable(v.clone()));
            }
        }
        let mut rows = Vec::new();
        for i in self.row_indices() {
            let s = self.row_assignment(i);
            let tuples = f(&s).ok_or(TeamError::UndefinedOnRow)?;
            for t in tuples {
                if t.len() != vars.len() {
                    return Err(TeamError::TupleLength {
                        expected: vars.len(),
                        got: t.len(),
                    });
                }
                let mut s2 = s.clone();
                for (v, val) in vars.iter().zip(&t) {
                    if !self.universe.iter().any(|u| u == val) {
                        return Err(TeamError::UnknownElement(val.clone()));
                    }
                    s2.insert(v.clone(), val.clone());
                }
                rows.push(s2);
            }
        }
        let mut domain = self.domain.clone();
        for v in vars {
            if self.var_pos(v).is_none() {
                domain.push(v.clone());
            }
        }
        Team::from_assignments(self.universe.clone(), domain, &rows)
    }

    /// `X(x̄)`: the set of value tuples of `x̄` across the team.
    pub fn values(&self, vars: &[String]) -> Result<BTreeSet<Vec<String>>, TeamError> {
        let positions = self.positions(vars)?;
        let mut out = BTreeSet::new();
        let mut digits = Vec::new();
        for i in self.row_indices() {
            self.decode(i, &mut digits);
            out.insert(
                positions
                    .iter()
                    .map(|&p| self.universe[digits[p]].clone())
                    .collect(),
            );
        }
        Ok(out)
    }

    /// `rel(X)`: the value tuples of the whole domain in ascending variable
    /// order.
    pub fn as_relation(&self) -> BTreeSet<Vec<String>> {
        self.values(&self.domain.clone()).expect("domain is valid")
    }

    /// Like `values` but over element indices.
    pub fn value_indices(&self, vars: &[String]) -> Result<BTreeSet<Vec<Elem>>, TeamError> {
        let positions = self.positions(vars)?;
        let mut out = BTreeSet::new();
        let mut digits = Vec::new();
        for i in self.row_indices() {
            self.decode(i, &mut digits);
            out.insert(positions.iter().map(|&p| digits[p]).collect());
        }
        Ok(out)
    }

    /// `Y_s`: rows of `Y` agreeing with `s`, restricted to `dom(Y)∖dom(s)`.
    pub fn section(&self, s: &Assignment) -> Result<Team, TeamError> {
        let svars: Vec<String> = s.domain().map(|v| v.to_string()).collect();
        let positions = self.positions(&svars)?;
        let wanted: Vec<Elem> = svars
            .iter()
            .map(|v| {
                let val = s.get(v).unwrap();
                self.universe
                    .iter()
                    .position(|u| u == val)
                    .ok_or_else(|| TeamError::UnknownElement(val.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let rest: Vec<String> = self
            .domain
            .iter()
            .filter(|v| !svars.contains(v))
            .cloned()
            .collect();
        let table = self.projection_table(&rest);
        let mut digits = Vec::new();
        let mut rows: RowMask = 0;
        for i in self.row_indices() {
            self.decode(i, &mut digits);
            if positions.iter().zip(&wanted).all(|(&p, &w)| digits[p] == w) {
                rows |= 1u128 << table[i as usize];
            }
        }
        Ok(Team {
            universe: self.universe.clone(),
            domain: rest,
            rows,
        })
    }

    /// The complement within the full team over the same domain.
    pub fn complement(&self) -> Team {
        Team {
            rows: full_mask(self.slots()) & !self.rows,
            ..self.clone()
        }
    }

    pub fn union(&self, other: &Team) -> Result<Team, TeamError> {
        self.check_compatible(other)?;
        Ok(Team {
            rows: self.rows | other.rows,
            ..self.clone()
        })
    }

    pub fn intersect(&self, other: &Team) -> Result<Team, TeamError> {
        self.check_compatible(other)?;
        Ok(Team {
            rows: self.rows & other.rows,
            ..self.clone()
        })
    }

    pub fn is_subset(&self, other: &Team) -> Result<bool, TeamError> {
        self.check_compatible(other)?;
        Ok(self.rows & !other.rows == 0)
    }

    fn check_compatible(&self, other: &Team) -> Result<(), TeamError> {
        if self.universe != other.universe {
            return Err(TeamError::UniverseMismatch);
        }
        if self.domain != other.domain {
            return Err(TeamError::DomainMismatch(
                self.domain.clone(),
                other.domain.clone(),
            ));
        }
        Ok(())
    }

    /// `Qx̄Y = {s : Y_s(x̄) ∈ Q_M}` over `dom(Y)∖{x̄}`. The `∃` and `∀`
    /// projections are the special cases Q = "non-empty" and Q = "all".
    pub fn q_project(
        &self,
        q: &Quantifier,
        m: &Structure,
        vars: &[String],
    ) -> Result<Team, crate::error::EvalError> {
        let k = vars.len();
        if q.ty() != [k] {
            return Err(crate::error::EvalError::UnsupportedQuantifierType {
                name: q.name().to_string(),
                ty: q.ty().to_vec(),
                why: format!("q_project binds {k} variables"),
            });
        }
        let mut seen = BTreeSet::new();
        for v in vars {
            if !seen.insert(v) {
                return Err(TeamError::RepeatedVariable(v.clone()).into());
            }
        }
        let positions = self.positions(vars)?;
        let rest: Vec<String> = self
            .domain
            .iter()
            .filter(|v| !vars.contains(v))
            .cloned()
            .collect();
        let table = self.projection_table(&rest);
        let rest_slots = (self.universe.len() as u128).pow(rest.len() as u32) as u32;
        // Collect each reduced row's section values.
        let mut sections: Vec<BTreeSet<Vec<Elem>>> =
            vec![BTreeSet::new(); rest_slots as usize];
        let mut digits = Vec::new();
        for i in self.row_indices() {
            self.decode(i, &mut digits);
            let tuple: Vec<Elem> = positions.iter().map(|&p| digits[p]).collect();
            sections[table[i as usize] as usize].insert(tuple);
        }
        let mut rows: RowMask = 0;
        for (ri, sec) in sections.into_iter().enumerate() {
            let rel = crate::structure::Relation::new(k, sec);
            if q.accepts(m, &[rel])? {
                rows |= 1u128 << ri;
            }
        }
        Ok(Team {
            universe: self.universe.clone(),
            domain: rest,
            rows,
        })
    }

    /// Prototype team over `dom(self) ∪ vars` plus the index table mapping
    /// `(row of self, tuple index over universe^|vars|)` to a row of the
    /// extended team. Used by the quantifier witness searches.
    pub fn extension_tables(&self, vars: &[String]) -> Result<(Team, Vec<u32>), TeamError> {
        let mut domain = self.domain.clone();
        for v in vars {
            if self.var_pos(v).is_some() {
                return Err(TeamError::RepeatedVariable(v.clone()));
            }
            domain.push(v.clone());
        }
        let proto = Team::empty(self.universe.clone(), domain)?;
        let m = self.universe.len();
        let tuple_count = m.pow(vars.len() as u32);
        let var_positions: Vec<usize> = vars
            .iter()
            .map(|v| proto.var_pos(v).expect("just inserted"))
            .collect();
        let base_positions: Vec<usize> = self
            .domain
            .iter()
            .map(|v| proto.var_pos(v).expect("base domain is kept"))
            .collect();
        let mut digits = Vec::new();
        let mut table = vec![0u32; self.slots() as usize * tuple_count];
        let mut ext = vec![0usize; proto.domain.len()];
        for i in 0..self.slots() {
            self.decode(i, &mut digits);
            for ti in 0..tuple_count {
                for (slot, &p) in base_positions.iter().enumerate() {
                    ext[p] = digits[slot];
                }
                let mut t = ti;
                for &p in var_positions.iter().rev() {
                    ext[p] = t % m;
                    t /= m;
                }
                table[i as usize * tuple_count + ti] = proto.encode(&ext);
            }
        }
        Ok((proto, table))
    }

    /// True iff the team is unconstrained in the directions of `vars`:
    /// `X = (∃vars X)[M/vars]`.
    pub fn is_cylinder_over(&self, vars: &[String]) -> bool {
        let mut t = self.exists_project_all(vars);
        for v in vars {
            if self.var_pos(v).is_some() {
                t = t.extend_all(v).expect("re-extension fits");
            }
        }
        t == *self
    }

    /// All subteams (including the team itself and the empty team).
    pub fn subteams(&self) -> impl Iterator<Item = Team> + '_ {
        let mask = self.rows;
        SubmaskIter::new(mask).map(move |rows| Team {
            universe: self.universe.clone(),
            domain: self.domain.clone(),
            rows,
        })
    }

    /// All superteams within the full team over the same domain.
    pub fn superteams(&self) -> impl Iterator<Item = Team> + '_ {
        let free = full_mask(self.slots()) & !self.rows;
        let base = self.rows;
        SubmaskIter::new(free).map(move |extra| Team {
            universe: self.universe.clone(),
            domain: self.domain.clone(),
            rows: base | extra,
        })
    }
}

/// Enumerates all teams over a domain; requires `slots ≤ max_slots ≤ 16`
/// so the enumeration stays within `2^16` teams.
pub fn all_teams(
    universe: Arc<Vec<String>>,
    domain: Vec<String>,
    max_slots: u32,
) -> Result<Vec<Team>, TeamError> {
    let proto = Team::empty(universe, domain)?;
    let slots = proto.slots();
    if slots > max_slots || max_slots > 16 {
        return Err(TeamError::TooLarge {
            vars: proto.domain().len(),
            universe: proto.universe().len(),
            slots,
            max: max_slots.min(16),
        });
    }
    let full = full_mask(slots);
    Ok((0..=full as u64)
        .map(|rows| Team {
            rows: rows as u128,
            ..proto.clone()
        })
        .collect())
}

pub fn full_mask(slots: u32) -> RowMask {
    if slots as usize >= 128 {
        u128::MAX
    } else {
        (1u128 << slots) - 1
    }
}

fn checked_slots(universe: usize, vars: usize) -> Result<u32, TeamError> {
    let mut slots: u128 = 1;
    for _ in 0..vars {
        slots = slots.saturating_mul(universe as u128);
        if slots > MAX_SLOTS as u128 {
            return Err(TeamError::TooLarge {
                vars,
                universe,
                slots: MAX_SLOTS + 1,
                max: MAX_SLOTS,
            });
        }
    }
    Ok(slots as u32)
}

/// Iterates all submasks of a mask, including 0 and the mask itself.
pub struct SubmaskIter {
    mask: RowMask,
    current: RowMask,
    done: bool,
}

impl SubmaskIter {
    pub fn new(mask: RowMask) -> Self {
        SubmaskIter {
            mask,
            current: mask,
            done: false,
        }
    }
}

impl Iterator for SubmaskIter {
    type Item = RowMask;

    fn next(&mut self) -> Option<RowMask> {
        if self.done {
            return None;
        }
        let out = self.current;
        if self.current == 0 {
            self.done = true;
        } else {
            self.current = (self.current - 1) & self.mask;
        }
        Some(out)
    }
}

// --- JSON --------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TeamJson {
    domain: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Team {
    /// Loads a team from JSON; row entries positionally match the file's
    /// `domain` list. The structure supplies the universe.
    pub fn from_json(text: &str, m: &Structure) -> Result<Team, LoadError> {
        let raw: TeamJson = serde_json::from_str(text)?;
        let mut seen = BTreeSet::new();
        for v in &raw.domain {
            if !seen.insert(v.clone()) {
                return Err(LoadError::invalid("domain", format!("duplicate variable `{v}`")));
            }
        }
        let mut rows = Vec::new();
        for (i, r) in raw.rows.iter().enumerate() {
            if r.len() != raw.domain.len() {
                return Err(LoadError::invalid(
                    format!("rows[{i}]"),
                    format!("row length {} does not match domain size {}", r.len(), raw.domain.len()),
                ));
            }
            for (j, val) in r.iter().enumerate() {
                if m.elem_index(val).is_none() {
                    return Err(LoadError::invalid(
                        format!("rows[{i}][{j}]"),
                        format!("element `{val}` is not in the universe"),
                    ));
                }
            }
            rows.push(Assignment::from_pairs(
                raw.domain.iter().cloned().zip(r.iter().cloned()),
            ));
        }
        Team::from_assignments(m.universe().clone(), raw.domain, &rows)
            .map_err(|e| LoadError::invalid("team", e.to_string()))
    }

    /// Canonical JSON: domain ascending, rows sorted lexicographically by
    /// universe order.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> = self
            .row_indices()
            .map(|i| {
                let mut digits = Vec::new();
                self.decode(i, &mut digits);
                digits.iter().map(|&e| self.universe[e].clone()).collect()
            })
            .collect();
        serde_json::json!({ "domain": self.domain, "rows": rows })
    }
}

impl std::fmt::Display for Team {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.domain.is_empty() {
            return if self.is_empty() {
                write!(f, "∅_{{}}")
            } else {
                write!(f, "{{ε}}")
            };
        }
        write!(f, "{{")?;
        for (n, i) in self.row_indices().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            let mut digits = Vec::new();
            self.decode(i, &mut digits);
            write!(f, "(")?;
            for (k, (v, &e)) in self.domain.iter().zip(&digits).enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}:{}", self.universe[e])?;
            }
            write!(f, ")")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(names: &[&str]) -> Arc<Vec<String>> {
        Arc::new(names.iter().map(|s| s.to_string()).collect())
    }

    fn team(universe: &Arc<Vec<String>>, domain: &[&str], rows: &[&[&str]]) -> Team {
        let assignments: Vec<Assignment> = rows
            .iter()
            .map(|r| {
                Assignment::from_pairs(
                    domain
                        .iter()
                        .map(|v| v.to_string())
                        .zip(r.iter().map(|e| e.to_string())),
                )
            })
            .collect();
        Team::from_assignments(
            universe.clone(),
            domain.iter().map(|s| s.to_string()).collect(),
            &assignments,
        )
        .unwrap()
    }

    #[test]
    fn empty_teams_carry_domains() {
        let u = uni(&["a", "b"]);
        let e_x = Team::empty(u.clone(), vec!["x".into()]).unwrap();
        let e_xy = Team::empty(u.clone(), vec!["x".into(), "y".into()]).unwrap();
        assert_ne!(e_x, e_xy);
        let eps = Team::singleton_empty(u.clone());
        assert_ne!(eps, Team::empty(u, vec![]).unwrap());
        assert_eq!(eps.len(), 1);
    }

    #[test]
    fn exists_project_examples() {
        let u = uni(&["a", "b"]);
        // {{x↦a,y↦b}} projected on x leaves {{y↦b}}.
        let x = team(&u, &["x", "y"], &[&["a", "b"]]);
        let p = x.exists_project("x");
        assert_eq!(p, team(&u, &["y"], &[&["b"]]));
        // Domain bookkeeping on the empty team.
        let e = Team::empty(u.clone(), vec!["x".into(), "y".into()]).unwrap();
        let pe = e.exists_project("x");
        assert_eq!(pe.domain(), &["y".to_string()]);
        assert!(pe.is_empty());
        // Both rows of {{x↦a},{x↦b}} restrict to ε.
        let x2 = team(&u, &["x"], &[&["a"], &["b"]]);
        assert_eq!(x2.exists_project("x"), Team::singleton_empty(u));
    }

    #[test]
    fn forall_project_examples() {
        let u = uni(&["a", "b"]);
        // One x-value present: the b-extension is missing, so ∀x gives ∅_y.
        let x = team(&u, &["x", "y"], &[&["a", "a"]]);
        let p = x.forall_project("x");
        assert_eq!(p.domain(), &["y".to_string()]);
        assert!(p.is_empty());
        // Full team over {x} collapses to {ε}.
        let full = Team::full(u.clone(), vec!["x".into()]).unwrap();
        assert_eq!(full.forall_project("x"), Team::singleton_empty(u.clone()));
        // x not in the domain: identity for both projections.
        let y = team(&u, &["y"], &[&["a"]]);
        assert_eq!(y.forall_project("x"), y);
        assert_eq!(y.exists_project("x"), y);
    }

    #[test]
    fn extension_examples() {
        let u = uni(&["a", "b"]);
        let eps = Team::singleton_empty(u.clone());
        // {ε}[M/x] is the full team over {x}.
        let all = eps.extend_all("x").unwrap();
        assert_eq!(all, Team::full(u.clone(), vec!["x".into()]).unwrap());
        // X[f/x] with constant f adds x↦a to every row.
        let y = team(&u, &["y"], &[&["a"], &["b"]]);
        let ext = y
            .extend_fn(&mut |_s| Some("a".to_string()), "x")
            .unwrap();
        assert_eq!(ext, team(&u, &["x", "y"], &[&["a", "a"], &["a", "b"]]));
        // {ε}[A/x][B/y] with A = {a}, B = {a,b}: the product construction.
        let a: BTreeSet<Vec<String>> = [vec!["a".to_string()]].into_iter().collect();
        let b: BTreeSet<Vec<String>> =
            [vec!["a".to_string()], vec!["b".to_string()]].into_iter().collect();
        let prod = eps
            .extend_setfn(&mut |_| Some(a.clone()), &["x".into()])
            .unwrap()
            .extend_setfn(&mut |_| Some(b.clone()), &["y".into()])
            .unwrap();
        assert_eq!(prod, team(&u, &["x", "y"], &[&["a", "a"], &["a", "b"]]));
        // Empty image contributes no rows.
        let none = y
            .extend_setfn(&mut |_| Some(BTreeSet::new()), &["x".into()])
            .unwrap();
        assert!(none.is_empty());
        assert_eq!(none.domain().len(), 2);
    }

    #[test]
    fn restrict_equals_exists_projection_chain() {
        let u = uni(&["a", "b"]);
        let x = team(
            &u,
            &["x", "y", "z"],
            &[&["a", "a", "b"], &["a", "b", "b"], &["b", "a", "a"]],
        );
        let keep: BTreeSet<String> = ["y".to_string(), "z".to_string()].into();
        let r = x.restrict(&keep);
        assert_eq!(r, x.exists_project("x"));
        assert_eq!(r.len(), 3);
        // Collapsing restriction.
        let keep_x: BTreeSet<String> = ["x".to_string()].into();
        assert_eq!(x.restrict(&keep_x).len(), 2);
    }

    #[test]
    fn relation_and_values() {
        let u = uni(&["a", "b"]);
        let x = team(&u, &["x", "y"], &[&["a", "b"]]);
        let rel = x.as_relation();
        assert_eq!(rel.len(), 1);
        assert!(rel.contains(&vec!["a".to_string(), "b".to_string()]));
        let e = Team::empty(u.clone(), vec!["x".into()]).unwrap();
        assert!(e.as_relation().is_empty());
        let two = team(&u, &["x", "y"], &[&["a", "b"], &["b", "b"]]);
        assert_eq!(two.as_relation().len(), 2);
        let vals = two.values(&["y".to_string(), "x".to_string()]).unwrap();
        assert!(vals.contains(&vec!["b".to_string(), "a".to_string()]));
    }

    #[test]
    fn section_examples() {
        let u = uni(&["a", "b"]);
        // Product team {a,b}×{b}: the section at x↦a is the inner factor.
        let prod = team(&u, &["x", "y"], &[&["a", "b"], &["b", "b"]]);
        let s = Assignment::from_pairs([("x", "a")]);
        let sec = prod.section(&s).unwrap();
        assert_eq!(sec, team(&u, &["y"], &[&["b"]]));
        // Section at an absent row is empty.
        let absent = Assignment::from_pairs([("x", "a"), ("y", "a")]);
        assert!(prod.section(&absent).unwrap().is_empty());
        // Section at ε is the identity.
        assert_eq!(prod.section(&Assignment::empty()).unwrap(), prod);
    }

    #[test]
    fn complement_laws() {
        let u = uni(&["a", "b"]);
        let full = Team::full(u.clone(), vec!["x".into(), "y".into()]).unwrap();
        assert!(full.complement().is_empty());
        let empty = Team::empty(u.clone(), vec!["x".into(), "y".into()]).unwrap();
        assert!(empty.complement().is_full());
        let x = team(&u, &["x", "y"], &[&["a", "b"]]);
        assert_eq!(x.complement().len(), 4 - 1);
    }

    #[test]
    fn union_requires_equal_domains() {
        let u = uni(&["a", "b"]);
        let x = team(&u, &["x"], &[&["a"]]);
        let y = team(&u, &["y"], &[&["a"]]);
        assert!(x.union(&y).is_err());
        assert!(x.union(&x).is_ok());
    }

    #[test]
    fn too_large_team_is_rejected() {
        let u = uni(&["a", "b", "c"]);
        let vars: Vec<String> = (0..5).map(|i| format!("v{i}")).collect();
        assert!(matches!(
            Team::empty(u, vars),
            Err(TeamError::TooLarge { .. })
        ));
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let m = Structure::from_json(r#"{"universe":["a","b"]}"#).unwrap();
        let t = Team::from_json(r#"{"domain":["y","x"],"rows":[["b","a"],["a","a"]]}"#, &m).unwrap();
        assert_eq!(t.domain(), &["x".to_string(), "y".to_string()]);
        let json = t.to_json();
        let rows = json["rows"].as_array().unwrap();
        // Canonical order: (a,a) before (a,b) in (x,y) order.
        assert_eq!(rows[0][0], "a");
        assert_eq!(rows[0][1], "a");
        assert_eq!(rows[1][1], "b");
        let back = Team::from_json(&json.to_string(), &m).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn cylinder_test() {
        let u = uni(&["a", "b"]);
        let cyl = team(&u, &["x", "y"], &[&["a", "a"], &["a", "b"]]);
        assert!(cyl.is_cylinder_over(&["y".to_string()]));
        let diag = team(&u, &["x", "y"], &[&["a", "a"], &["b", "b"]]);
        assert!(!diag.is_cylinder_over(&["y".to_string()]));
    }
}
