//! Bounded model search and an exhaustive enumeration oracle.
//!
//! Candidates: set variables range over a universe level, map variables
//! over sets of at most `map_breadth` Kuratowski pairs built from that
//! universe. The total candidate space of every normalized conjunction is
//! computed up front and refused when it exceeds the cap. A `Sat` answer
//! is absolute (the returned model is re-verified by the evaluator);
//! "no model" only ever holds relative to the bound. The tool never
//! claims unsatisfiability: the language has a complete decision
//! procedure, but no certified finite bound is implemented here.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::ast::{
    free_vars, free_vars_ordered, infer_validate_options, validate, Diagnostic, Formula, Sort,
    Variable,
};
use crate::hf::{universe, HFSet, HfError, PairingSpec};
use crate::normalize::normalized_conjunctions;
use crate::semantics::{evaluate_on, Interpretation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBound {
    /// Universe level for set-variable candidates.
    pub universe_level: u32,
    /// Maximum number of pairs in a map-variable candidate.
    pub map_breadth: usize,
    /// Upper bound on the per-conjunction candidate-space size.
    pub candidate_cap: u64,
}

impl Default for SearchBound {
    fn default() -> SearchBound {
        SearchBound { universe_level: 3, map_breadth: 4, candidate_cap: 10_000_000 }
    }
}

impl SearchBound {
    pub fn with_level(level: u32) -> SearchBound {
        SearchBound { universe_level: level, ..Default::default() }
    }
}

impl std::fmt::Display for SearchBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "level={} breadth={} cap={}",
            self.universe_level, self.map_breadth, self.candidate_cap
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// A model confirmed by the evaluator, restricted to the free
    /// variables of the query.
    Sat(Interpretation),
    /// Exhausted the candidate space of every normalized conjunction
    /// without finding a model. Sound only relative to the bound.
    NoModelWithinBound(SearchBound),
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Interpretation> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::NoModelWithinBound(_) => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("formula does not validate: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("candidate space {space} exceeds cap {cap} (blow-up factor {factor}x)")]
    CandidateSpaceExceeded { space: u128, cap: u64, factor: u128 },
    #[error(transparent)]
    Universe(#[from] HfError),
}

/// Binomial table up to `n` choose `k`, in u128 to survive intermediate
/// growth; entries with k > n stay zero.
fn binomials(n: usize, k: usize) -> Vec<Vec<u128>> {
    let mut c = vec![vec![0u128; k + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1;
        for j in 1..=k.min(i) {
            c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
        }
    }
    c
}

/// All sets of at most `breadth` Kuratowski pairs over `elements`,
/// ordered by size then lexicographic pair-pool rank. The pool itself is
/// the canonical enumeration of `kur_pair(u, v)` for `u, v` in
/// `elements`, sorted canonically.
pub fn map_value_candidates(elements: &[HFSet], breadth: usize) -> Vec<HFSet> {
    let pool = kur_pool(elements);
    let space = MapSpace::new(Arc::new(pool), breadth);
    (0..space.count).map(|i| space.value(i)).collect()
}

fn kur_pool(elements: &[HFSet]) -> Vec<HFSet> {
    let mut pool: Vec<HFSet> = Vec::with_capacity(elements.len() * elements.len());
    for u in elements {
        for v in elements {
            pool.push(HFSet::kur_pair(u, v));
        }
    }
    pool.sort();
    pool.dedup();
    pool
}

struct MapSpace {
    pool: Arc<Vec<HFSet>>,
    breadth: usize,
    // cumulative[k] = number of subsets of size < k
    cumulative: Vec<u128>,
    binom: Vec<Vec<u128>>,
    count: u64,
}

impl MapSpace {
    fn new(pool: Arc<Vec<HFSet>>, breadth: usize) -> MapSpace {
        let n = pool.len();
        let k = breadth.min(n);
        let binom = binomials(n, k);
        let mut cumulative = vec![0u128; k + 2];
        for size in 0..=k {
            cumulative[size + 1] = cumulative[size] + binom[n][size];
        }
        let count_u128 = cumulative[k + 1];
        let count = u64::try_from(count_u128).unwrap_or(u64::MAX);
        MapSpace { pool, breadth: k, cumulative, binom, count }
    }

    fn value(&self, index: u64) -> HFSet {
        let mut idx = index as u128;
        let mut size = 0usize;
        while size <= self.breadth && idx >= self.cumulative[size + 1] {
            size += 1;
        }
        idx -= self.cumulative[size];
        // Combinadic unranking of the `idx`-th lexicographic size-`size`
        // combination of pool indices.
        let n = self.pool.len();
        let mut members = Vec::with_capacity(size);
        let mut next = 0usize;
        for slot in 0..size {
            let remaining_slots = size - slot - 1;
            loop {
                let with_next = self.binom[n - next - 1][remaining_slots];
                if idx < with_next {
                    members.push(self.pool[next].clone());
                    next += 1;
                    break;
                }
                idx -= with_next;
                next += 1;
            }
        }
        HFSet::from_children(members)
    }
}

enum VarSpace {
    Universe(Arc<Vec<HFSet>>),
    Map(MapSpace),
}

impl VarSpace {
    fn count(&self) -> u64 {
        match self {
            VarSpace::Universe(v) => v.len() as u64,
            VarSpace::Map(m) => m.count,
        }
    }

    fn value(&self, index: u64) -> HFSet {
        match self {
            VarSpace::Universe(v) => v[index as usize].clone(),
            VarSpace::Map(m) => m.value(index),
        }
    }
}

struct Space {
    vars: Vec<Variable>,
    spaces: Vec<VarSpace>,
    total: u64,
}

impl Space {
    fn build(vars: Vec<Variable>, bound: &SearchBound) -> Result<Space, SolverError> {
        let elements = Arc::new(universe(bound.universe_level)?);
        let pool = Arc::new(kur_pool(&elements));
        let mut spaces = Vec::with_capacity(vars.len());
        let mut total: u128 = 1;
        for v in &vars {
            let space = match v.sort() {
                Sort::Set => VarSpace::Universe(elements.clone()),
                Sort::Map => VarSpace::Map(MapSpace::new(pool.clone(), bound.map_breadth)),
            };
            total = total.saturating_mul(space.count() as u128);
            spaces.push(space);
        }
        if total > bound.candidate_cap as u128 {
            return Err(SolverError::CandidateSpaceExceeded {
                space: total,
                cap: bound.candidate_cap,
                factor: total / (bound.candidate_cap as u128).max(1),
            });
        }
        Ok(Space { vars, spaces, total: total as u64 })
    }

    /// Mixed-radix decode; the first (sorted-order) variable is the most
    /// significant digit, so ascending indices enumerate assignments in
    /// lexicographic order.
    fn assignment(&self, index: u64) -> Vec<(Variable, HFSet)> {
        let mut out = Vec::with_capacity(self.vars.len());
        let mut rest = index;
        for (v, s) in self.vars.iter().zip(&self.spaces).rev() {
            let c = s.count();
            let digit = rest % c;
            rest /= c;
            out.push((v.clone(), s.value(digit)));
        }
        out.reverse();
        out
    }
}

fn validated_options(f: &Formula) -> Result<crate::ast::ValidateOptions, SolverError> {
    let opts = infer_validate_options(f);
    let diags = validate(f, opts);
    if diags.is_empty() {
        Ok(opts)
    } else {
        Err(SolverError::Invalid(diags))
    }
}

/// Bounded satisfiability: normalizes `f` and scans each emitted
/// conjunction's candidate space in lexicographic order, in parallel,
/// returning the first confirmed model (restricted to the free variables
/// of `f`). Identical inputs yield identical results.
pub fn decide_bounded(f: &Formula, bound: &SearchBound) -> Result<SatResult, SolverError> {
    let opts = validated_options(f)?;
    let allow_ext = opts.allow_extensions;
    let (f_set, f_map) = free_vars(f);
    let keep: std::collections::BTreeSet<Variable> =
        f_set.into_iter().chain(f_map).collect();
    for conjunction in normalized_conjunctions(f) {
        let formula = conjunction.to_formula();
        let vars = free_vars_ordered(&formula);
        let space = Space::build(vars, bound)?;
        let hit = (0..space.total).into_par_iter().find_first(|&index| {
            let assignment = space.assignment(index);
            evaluate_on(&PairingSpec::Kuratowski, &assignment, &formula, allow_ext)
                .expect("bounded-search candidates are fully assigned and pair-aware")
        });
        if let Some(index) = hit {
            let assignment = space.assignment(index);
            let confirmed =
                evaluate_on(&PairingSpec::Kuratowski, &assignment, f, allow_ext)
                    .expect("model evaluation cannot fail on solver candidates");
            assert!(confirmed, "emitted conjunction model must satisfy the source formula");
            let model = Interpretation::from_sorted_unchecked(PairingSpec::Kuratowski, assignment)
                .restricted(&keep);
            return Ok(SatResult::Sat(model));
        }
    }
    Ok(SatResult::NoModelWithinBound(bound.clone()))
}

/// Exhaustive ground truth: every interpretation of the free variables of
/// `f` within the bound that the evaluator confirms, in lexicographic
/// order. Enumerates `f` directly, without normalization, so it is an
/// independent check of the `decide_bounded` pipeline.
pub fn oracle_enumerate(f: &Formula, bound: &SearchBound) -> Result<Vec<Interpretation>, SolverError> {
    let opts = validated_options(f)?;
    let allow_ext = opts.allow_extensions;
    let vars = free_vars_ordered(f);
    let space = Space::build(vars, bound)?;
    let mut models = Vec::new();
    for index in 0..space.total {
        let assignment = space.assignment(index);
        let ok = evaluate_on(&PairingSpec::Kuratowski, &assignment, f, allow_ext)
            .expect("oracle candidates are fully assigned and pair-aware");
        if ok {
            models.push(Interpretation::from_sorted_unchecked(
                PairingSpec::Kuratowski,
                assignment,
            ));
        }
    }
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;
    use crate::semantics::evaluate;

    fn level(l: u32) -> SearchBound {
        SearchBound::with_level(l)
    }

    #[test]
    fn membership_is_satisfiable_at_level_two() {
        let f = parse("x in y").unwrap();
        let result = decide_bounded(&f, &level(2)).unwrap();
        let model = result.model().expect("sat");
        assert_eq!(model.get(&Variable::set("x")), Some(&HFSet::empty()));
        assert_eq!(model.get(&Variable::set("y")), Some(&HFSet::singleton(HFSet::empty())));
        assert_eq!(evaluate(model, &f), Ok(true));
    }

    #[test]
    fn membership_cycle_has_no_hf_model() {
        let f = parse("x in y and y in x").unwrap();
        for l in 1..=3 {
            let result = decide_bounded(&f, &level(l)).unwrap();
            assert!(!result.is_sat(), "regularity forbids membership cycles");
        }
    }

    #[test]
    fn emptiness_constraint_finds_empty_set() {
        let f = parse("forall x' in x . x' != x'").unwrap();
        let result = decide_bounded(&f, &level(3)).unwrap();
        let model = result.model().expect("sat");
        assert_eq!(model.get(&Variable::set("x")), Some(&HFSet::empty()));
    }

    #[test]
    fn oracle_counts() {
        let two = level(2);
        assert_eq!(oracle_enumerate(&parse("x = x").unwrap(), &two).unwrap().len(), 2);
        assert_eq!(oracle_enumerate(&parse("x != x").unwrap(), &two).unwrap().len(), 0);
        assert_eq!(oracle_enumerate(&parse("x in y").unwrap(), &two).unwrap().len(), 1);
    }

    #[test]
    fn oracle_agrees_with_decide_on_small_formulas() {
        let samples = [
            "x in y",
            "x != x",
            "x in y and y in x",
            "forall x' in x . x' in y",
            "exists x' in x . x' = y",
            "[a,b] in @f -> a in x",
            "forall [a,b] in @f . a = b",
        ];
        let bound = SearchBound { universe_level: 2, map_breadth: 2, ..Default::default() };
        for s in samples {
            let f = parse(s).unwrap();
            let dec = decide_bounded(&f, &bound).unwrap();
            let all = oracle_enumerate(&f, &bound).unwrap();
            assert_eq!(dec.is_sat(), !all.is_empty(), "disagreement on {}", s);
        }
    }

    #[test]
    fn sat_results_reverify() {
        let f = parse("exists x' in x . x' in y").unwrap();
        if let SatResult::Sat(m) = decide_bounded(&f, &level(2)).unwrap() {
            assert_eq!(evaluate(&m, &f), Ok(true));
            // Model is restricted to the free variables of the query.
            assert!(m.assignments().iter().all(|(v, _)| v.name() == "x" || v.name() == "y"));
        } else {
            panic!("expected sat");
        }
    }

    #[test]
    fn monotone_in_the_bound() {
        let samples = ["x in y", "forall x' in x . x' in y", "[a,b] in @f"];
        for s in samples {
            let f = parse(s).unwrap();
            let small = SearchBound { universe_level: 2, map_breadth: 1, ..Default::default() };
            let big = SearchBound { universe_level: 3, map_breadth: 2, ..Default::default() };
            if decide_bounded(&f, &small).unwrap().is_sat() {
                assert!(decide_bounded(&f, &big).unwrap().is_sat(), "{}", s);
            }
        }
    }

    #[test]
    fn determinism() {
        let f = parse("exists [a,b] in @f . a in x").unwrap();
        let bound = SearchBound { universe_level: 2, map_breadth: 2, ..Default::default() };
        let a = decide_bounded(&f, &bound).unwrap();
        let b = decide_bounded(&f, &bound).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn candidate_cap_is_enforced() {
        let f = parse("[a,b] in @f and [c,d] in @g and [e,e'] in @h").unwrap();
        let bound = SearchBound { universe_level: 3, map_breadth: 4, candidate_cap: 1000 };
        match decide_bounded(&f, &bound) {
            Err(SolverError::CandidateSpaceExceeded { factor, .. }) => assert!(factor >= 1),
            other => panic!("expected a resource error, got {:?}", other.map(|r| r.is_sat())),
        }
    }

    #[test]
    fn invalid_formula_rejected() {
        let f = parse("forall x in y . forall z in x . z = z").unwrap();
        assert!(matches!(decide_bounded(&f, &level(2)), Err(SolverError::Invalid(_))));
    }

    #[test]
    fn map_candidates_enumeration() {
        let elements = universe(2).unwrap();
        // 2 elements -> 4 pairs; breadth 2 -> 1 + 4 + 6 = 11 candidates.
        let candidates = map_value_candidates(&elements, 2);
        assert_eq!(candidates.len(), 11);
        assert_eq!(candidates[0], HFSet::empty());
        // All distinct and all pair-only sets.
        for (i, c) in candidates.iter().enumerate() {
            for d in &candidates[i + 1..] {
                assert_ne!(c, d);
            }
            assert!(c.children().iter().all(|m| m.kur_unpair().is_some()));
            assert!(c.len() <= 2);
        }
    }

    #[test]
    fn set_only_formulas_are_searchable() {
        // Reduced formulas live in the set-only language.
        let f = parse("a in nonpairs(b)").unwrap();
        let result = decide_bounded(&f, &level(2)).unwrap();
        assert!(result.is_sat());
    }
}
