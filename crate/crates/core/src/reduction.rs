//! Translation of normalized conjunctions into the set-variables-only
//! language, and constructive model transfer in both directions.
//!
//! `tau` replaces set-member quantifiers and membership atoms by their
//! `nonpairs` forms and renames every map variable `f` to a fresh set
//! variable `p$f`. `build_psi_prime` conjoins `tau` with guards that pin
//! down the intended models: free set variables hold no pairs, the
//! renamed map variables hold nothing but pairs, and a fresh universe
//! variable `U$0` collects the free set variables as non-pair members.
//! The result is equisatisfiable with the input, witnessed constructively
//! by `transfer_model_backward` and `transfer_model_forward`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{Formula, Language, NormalizedConjunction, Sort, Variable};
use crate::hf::{delta_pairing, HFSet, PairingSpec};
use crate::semantics::{evaluate, EvalError, Interpretation, SemanticsError};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("precondition violated: {0}")]
    ContractViolation(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// The map-variable renaming used by `tau`, plus the reserved universe
/// variable. Renamed variables live in the `$` namespace, which the
/// parser refuses in source text, so they can never collide with the
/// input's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenamingMap {
    forward: BTreeMap<Variable, Variable>,
    universe_var: Variable,
}

impl RenamingMap {
    /// Deterministic renaming for the free map variables of `psi`:
    /// `f -> p$f`, universe variable `U$0`.
    pub fn for_conjunction(psi: &NormalizedConjunction) -> RenamingMap {
        let (_, map_vars) = psi.free_vars();
        let forward = map_vars
            .into_iter()
            .map(|f| {
                let renamed = Variable::set(format!("p${}", f.name()));
                (f, renamed)
            })
            .collect();
        RenamingMap { forward, universe_var: Variable::set("U$0") }
    }

    pub fn forward(&self) -> &BTreeMap<Variable, Variable> {
        &self.forward
    }

    pub fn renamed(&self, f: &Variable) -> Option<&Variable> {
        self.forward.get(f)
    }

    pub fn universe_var(&self) -> &Variable {
        &self.universe_var
    }
}

fn tau_formula(f: &Formula, renaming: &RenamingMap) -> Formula {
    let ren = |v: &Variable| -> Variable {
        match v.sort() {
            Sort::Map => renaming
                .renamed(v)
                .cloned()
                .unwrap_or_else(|| panic!("map variable {} missing from renaming", v)),
            Sort::Set => v.clone(),
        }
    };
    match f {
        Formula::MemberSet(a, b) => Formula::MemberNonpairs(a.clone(), b.clone()),
        Formula::EqualSet(a, b) => Formula::EqualSet(a.clone(), b.clone()),
        Formula::PairMember(x, y, d) => Formula::PairMember(x.clone(), y.clone(), ren(d)),
        Formula::EqualMap(a, b) => Formula::EqualSet(ren(a), ren(b)),
        Formula::Not(a) => Formula::not(tau_formula(a, renaming)),
        Formula::And(a, b) => Formula::and(tau_formula(a, renaming), tau_formula(b, renaming)),
        Formula::Or(a, b) => Formula::or(tau_formula(a, renaming), tau_formula(b, renaming)),
        Formula::Implies(a, b) => {
            Formula::implies(tau_formula(a, renaming), tau_formula(b, renaming))
        }
        Formula::Iff(a, b) => Formula::iff(tau_formula(a, renaming), tau_formula(b, renaming)),
        Formula::ForallIn(x, z, body) => Formula::ForallInNonpairs(
            x.clone(),
            z.clone(),
            Box::new(tau_formula(body, renaming)),
        ),
        Formula::ForallPairIn(x, y, d, body) => Formula::ForallPairIn(
            x.clone(),
            y.clone(),
            ren(d),
            Box::new(tau_formula(body, renaming)),
        ),
        other => panic!("tau input is not a base-language normalized conjunct: {}", other),
    }
}

/// The syntactic translation into the set-variables-only language:
/// `forall x in y` becomes `forall x in nonpairs(y)`, membership atoms
/// `x in y` become `x in nonpairs(y)`, and every map variable is renamed
/// to its `p$f` set variable. Returns the translated conjunction and the
/// renaming used.
pub fn tau(psi: &NormalizedConjunction) -> (Formula, RenamingMap) {
    assert!(
        psi.language() == Language::SetMap && !psi.is_extended(),
        "tau expects a base-language normalized conjunction"
    );
    let renaming = RenamingMap::for_conjunction(psi);
    let conjuncts: Vec<Formula> = psi
        .conjuncts()
        .iter()
        .map(|c| tau_formula(c, &renaming))
        .collect();
    (Formula::and_all(conjuncts), renaming)
}

/// `tau(psi)` plus the guard conjuncts, in order: for every free set
/// variable `z` of `psi` a pair-freeness guard `forall [a,b] in z . a != a`;
/// for every map variable a purity guard `forall a in nonpairs(p$f) . a != a`;
/// and `z in nonpairs(U$0)` for every free set variable. Size is linear
/// in the size of `psi`.
pub fn build_psi_prime(psi: &NormalizedConjunction) -> (Formula, RenamingMap) {
    let (tau_part, renaming) = tau(psi);
    let (set_vars, _) = psi.free_vars();
    let mut guard_counter = 0u64;
    let mut fresh_guard = || {
        guard_counter += 1;
        Variable::set(format!("g${}", guard_counter))
    };
    let mut conjuncts = vec![tau_part];
    for z in &set_vars {
        let a = fresh_guard();
        let b = fresh_guard();
        conjuncts.push(Formula::ForallPairIn(
            a.clone(),
            b,
            z.clone(),
            Box::new(Formula::not(Formula::EqualSet(a.clone(), a))),
        ));
    }
    for renamed in renaming.forward().values() {
        let a = fresh_guard();
        conjuncts.push(Formula::ForallInNonpairs(
            a.clone(),
            renamed.clone(),
            Box::new(Formula::not(Formula::EqualSet(a.clone(), a))),
        ));
    }
    for z in &set_vars {
        conjuncts.push(Formula::MemberNonpairs(
            z.clone(),
            renaming.universe_var().clone(),
        ));
    }
    (Formula::and_all(conjuncts), renaming)
}

/// Transports `i` onto the pairing `p`: set-variable assignments are kept,
/// and each map value is rebuilt by decomposing its members under `i`'s
/// pairing and re-pairing them under `p`. The result satisfies exactly the
/// same normalized conjunctions as `i`.
pub fn rebase_pairing(i: &Interpretation, p: &PairingSpec) -> Interpretation {
    let items: Vec<(Variable, HFSet)> = i
        .assignments()
        .iter()
        .map(|(v, value)| {
            let new_value = match v.sort() {
                Sort::Set => value.clone(),
                Sort::Map => HFSet::from_children(value.children().iter().map(|w| {
                    let (u, s) = i
                        .pairing()
                        .unpair(w)
                        .expect("map value member is not a pair; interpretation invariant broken");
                    p.pair(&u, &s)
                })),
            };
            (v.clone(), new_value)
        })
        .collect();
    Interpretation::with_assignments(p.clone(), items)
        .expect("rebased map values are pairs of the target pairing by construction")
}

/// From a model `i` of `psi`, constructs a model of `build_psi_prime(psi)`:
/// the pairing is retagged so that no value of a free set variable can
/// contain a pair, map values are transported, each `p$f` receives the
/// transported map value, and `U$0` collects the free set-variable values.
pub fn transfer_model_backward(
    i: &Interpretation,
    psi: &NormalizedConjunction,
) -> Result<Interpretation, ReductionError> {
    let source = psi.to_formula();
    if !evaluate(i, &source)? {
        return Err(ReductionError::ContractViolation(
            "transfer_model_backward requires a model of the conjunction".into(),
        ));
    }
    let (set_vars, _) = psi.free_vars();
    let delta = HFSet::from_children(
        set_vars
            .iter()
            .map(|z| i.get(z).expect("free variable assigned after evaluation").clone()),
    );
    let tagged = delta_pairing(delta.clone());
    let rebased = rebase_pairing(i, &tagged);

    let renaming = RenamingMap::for_conjunction(psi);
    let mut variant_set: BTreeSet<Variable> = BTreeSet::new();
    let mut updates: Vec<(Variable, HFSet)> = Vec::new();
    for (f, renamed) in renaming.forward() {
        let value = rebased
            .get(f)
            .expect("free map variable assigned after evaluation")
            .clone();
        variant_set.insert(renamed.clone());
        updates.push((renamed.clone(), value));
    }
    variant_set.insert(renaming.universe_var().clone());
    updates.push((renaming.universe_var().clone(), delta));
    let transferred = rebased.variant(&variant_set, updates)?;

    #[cfg(debug_assertions)]
    {
        let (psi_prime, _) = build_psi_prime(psi);
        debug_assert_eq!(
            evaluate(&transferred, &psi_prime),
            Ok(true),
            "constructed interpretation must satisfy the guarded translation"
        );
    }
    Ok(transferred)
}

/// From a model `j` of `build_psi_prime(psi)`, recovers a model of `psi`
/// by assigning each map variable the value of its renamed set variable.
pub fn transfer_model_forward(
    j: &Interpretation,
    psi: &NormalizedConjunction,
    renaming: &RenamingMap,
) -> Result<Interpretation, ReductionError> {
    let (psi_prime, _) = build_psi_prime(psi);
    if !evaluate(j, &psi_prime)? {
        return Err(ReductionError::ContractViolation(
            "transfer_model_forward requires a model of the guarded translation".into(),
        ));
    }
    let mut variant_set: BTreeSet<Variable> = BTreeSet::new();
    let mut updates: Vec<(Variable, HFSet)> = Vec::new();
    for (f, renamed) in renaming.forward() {
        let value = j
            .get(renamed)
            .ok_or_else(|| {
                ReductionError::ContractViolation(format!(
                    "model lacks an assignment for {}",
                    renamed
                ))
            })?
            .clone();
        variant_set.insert(f.clone());
        updates.push((f.clone(), value));
    }
    // The purity guards of psi_prime make every p$f value a set of pairs,
    // so the variant's pair-awareness check cannot fail on a real model.
    let recovered = j.variant(&variant_set, updates)?;

    debug_assert_eq!(
        evaluate(&recovered, &psi.to_formula()),
        Ok(true),
        "recovered interpretation must satisfy the source conjunction"
    );
    Ok(recovered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse, validate, Language, NormalizedConjunction, ValidateOptions};
    use crate::hf::pairs_of;

    fn nc(conjuncts: &[&str]) -> NormalizedConjunction {
        NormalizedConjunction::new(conjuncts.iter().map(|c| parse(c).unwrap()).collect()).unwrap()
    }

    #[test]
    fn tau_identity_map_display() {
        let psi = nc(&[
            "forall x' in x . [x,x] in @f",
            "forall [x',y'] in @f . (x' = y' and x' in x)",
        ]);
        let (t, renaming) = tau(&psi);
        assert_eq!(
            t.to_string(),
            "(forall x' in nonpairs(x) . [x,x] in p$f) and \
             (forall [x',y'] in p$f . (x' = y' and x' in nonpairs(x)))",
        );
        assert_eq!(
            renaming.renamed(&Variable::map("f")),
            Some(&Variable::set("p$f"))
        );
        let opts = ValidateOptions { language: Language::SetOnly, allow_extensions: false };
        assert!(validate(&t, opts).is_empty(), "tau output is set-only");
    }

    #[test]
    fn tau_atoms() {
        let psi = nc(&["a in b"]);
        let (t, _) = tau(&psi);
        assert_eq!(t.to_string(), "a in nonpairs(b)");
        let psi = nc(&["[a,b] in @f"]);
        let (t, _) = tau(&psi);
        assert_eq!(t.to_string(), "[a,b] in p$f");
        let psi = nc(&["@f = @g"]);
        let (t, _) = tau(&psi);
        assert_eq!(t.to_string(), "p$f = p$g");
    }

    #[test]
    fn psi_prime_quantifier_free_example() {
        let psi = nc(&["a = a"]);
        let (p, _) = build_psi_prime(&psi);
        assert_eq!(
            p.to_string(),
            "a = a and (forall [g$1,g$2] in a . not g$1 = g$1) and a in nonpairs(U$0)"
        );
    }

    #[test]
    fn psi_prime_guard_groups() {
        let psi = nc(&[
            "forall x' in x . [x,x] in @f",
            "forall [x',y'] in @f . (x' = y' and x' in x)",
        ]);
        let (p, _) = build_psi_prime(&psi);
        let conjuncts = p.flatten_and().len();
        // tau contributes 2 conjuncts, then one pair-freeness guard for x,
        // one purity guard for f, one universe membership for x.
        assert_eq!(conjuncts, 2 + 1 + 1 + 1);
        let opts = ValidateOptions { language: Language::SetOnly, allow_extensions: false };
        assert!(validate(&p, opts).is_empty(), "psi_prime validates as set-only");
    }

    #[test]
    fn rebase_pairing_transports_single_pair() {
        let f = Variable::map("f");
        let e = HFSet::empty();
        let se = HFSet::singleton(e.clone());
        let i = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![(f.clone(), HFSet::singleton(HFSet::kur_pair(&e, &se)))],
        )
        .unwrap();
        let p = delta_pairing(e.clone());
        let j = rebase_pairing(&i, &p);
        assert_eq!(j.get(&f), Some(&HFSet::singleton(p.pair(&e, &se))));
        // Empty map stays empty.
        let i2 = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![(f.clone(), HFSet::empty())],
        )
        .unwrap();
        assert_eq!(rebase_pairing(&i2, &p).get(&f), Some(&HFSet::empty()));
    }

    #[test]
    fn backward_transfer_trivial_conjunction() {
        let psi = nc(&["a = a"]);
        let i = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![(Variable::set("a"), HFSet::empty())],
        )
        .unwrap();
        let j = transfer_model_backward(&i, &psi).unwrap();
        let (psi_prime, _) = build_psi_prime(&psi);
        assert_eq!(evaluate(&j, &psi_prime), Ok(true));
        // U holds exactly the values of the free set variables.
        assert_eq!(
            j.get(&Variable::set("U$0")),
            Some(&HFSet::singleton(HFSet::empty()))
        );
    }

    #[test]
    fn backward_transfer_identity_map() {
        let psi = nc(&[
            "forall x' in x . [x',x'] in @f",
            "forall [x',y'] in @f . (x' = y' and x' in x)",
        ]);
        let e = HFSet::empty();
        let i = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![
                (Variable::set("x"), HFSet::singleton(e.clone())),
                (Variable::map("f"), HFSet::singleton(HFSet::kur_pair(&e, &e))),
            ],
        )
        .unwrap();
        assert_eq!(evaluate(&i, &psi.to_formula()), Ok(true));
        let j = transfer_model_backward(&i, &psi).unwrap();
        let (psi_prime, renaming) = build_psi_prime(&psi);
        assert_eq!(evaluate(&j, &psi_prime), Ok(true));
        // Pair-freeness of the free set variables under the new pairing.
        for (v, value) in j.assignments() {
            if v.sort() == Sort::Set && v.name() == "x" {
                assert!(pairs_of(value, j.pairing()).is_empty());
            }
        }
        // Round trip back to a model of psi.
        let recovered = transfer_model_forward(&j, &psi, &renaming).unwrap();
        assert_eq!(evaluate(&recovered, &psi.to_formula()), Ok(true));
    }

    #[test]
    fn forward_transfer_requires_a_model() {
        let psi = nc(&["a in b"]);
        let bad = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![
                (Variable::set("a"), HFSet::empty()),
                (Variable::set("b"), HFSet::empty()),
                (Variable::set("U$0"), HFSet::empty()),
            ],
        )
        .unwrap();
        let renaming = RenamingMap::for_conjunction(&psi);
        assert!(matches!(
            transfer_model_forward(&bad, &psi, &renaming),
            Err(ReductionError::ContractViolation(_))
        ));
    }

    #[test]
    fn forward_transfer_without_map_variables_keeps_assignments() {
        let psi = nc(&["a in b"]);
        let e = HFSet::empty();
        let i = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![
                (Variable::set("a"), e.clone()),
                (Variable::set("b"), HFSet::singleton(e.clone())),
            ],
        )
        .unwrap();
        let j = transfer_model_backward(&i, &psi).unwrap();
        let renaming = RenamingMap::for_conjunction(&psi);
        let recovered = transfer_model_forward(&j, &psi, &renaming).unwrap();
        // No map variables: recovery changes nothing.
        assert_eq!(recovered, j);
        assert_eq!(evaluate(&recovered, &psi.to_formula()), Ok(true));
    }
}
