//! Pair-aware interpretations and the truth evaluator.
//!
//! An interpretation assigns hereditarily finite sets to variables and
//! fixes a pairing function. Map variables may only hold sets of ordered
//! pairs of that pairing (or the empty set); the constructors enforce
//! this, so the evaluator can decompose map members unconditionally.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::ast::{Formula, Sort, Variable};
use crate::hf::{HFSet, HfError, PairingSpec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("map variable {variable} is not pair-aware: {value} contains a non-pair member")]
    NotPairAware { variable: String, value: String },
    #[error("variable {variable} assigned twice")]
    DuplicateAssignment { variable: String },
    #[error("variant update touches {variable}, which is outside the variant set")]
    UpdateOutsideVariantSet { variable: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("free variable {0} has no assignment")]
    UnassignedVariable(String),
    #[error("member {member} of map value {value} does not decompose under the pairing (pair-awareness bug)")]
    UnpairFailure { member: String, value: String },
    #[error("extension atom `{0}` outside extended evaluation")]
    ExtensionAtomDisabled(String),
}

/// A variable assignment together with the pairing function used to
/// interpret pair terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pairing: PairingSpec,
    // Sorted by variable; binary-searched on lookup.
    assignment: Vec<(Variable, HFSet)>,
}

fn check_pair_aware(v: &Variable, value: &HFSet, pairing: &PairingSpec) -> Result<(), SemanticsError> {
    if v.sort() == Sort::Map {
        for m in value.children() {
            if pairing.unpair(m).is_none() {
                return Err(SemanticsError::NotPairAware {
                    variable: v.to_string(),
                    value: value.to_string(),
                });
            }
        }
    }
    Ok(())
}

impl Interpretation {
    pub fn new(pairing: PairingSpec) -> Interpretation {
        Interpretation { pairing, assignment: Vec::new() }
    }

    pub fn with_assignments<I>(pairing: PairingSpec, items: I) -> Result<Interpretation, SemanticsError>
    where
        I: IntoIterator<Item = (Variable, HFSet)>,
    {
        let mut assignment: Vec<(Variable, HFSet)> = items.into_iter().collect();
        assignment.sort_by(|a, b| a.0.cmp(&b.0));
        for w in assignment.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(SemanticsError::DuplicateAssignment { variable: w[0].0.to_string() });
            }
        }
        for (v, value) in &assignment {
            check_pair_aware(v, value, &pairing)?;
        }
        Ok(Interpretation { pairing, assignment })
    }

    /// Internal fast path: `assignment` must be sorted, duplicate-free and
    /// pair-aware.
    pub(crate) fn from_sorted_unchecked(
        pairing: PairingSpec,
        assignment: Vec<(Variable, HFSet)>,
    ) -> Interpretation {
        Interpretation { pairing, assignment }
    }

    pub fn pairing(&self) -> &PairingSpec {
        &self.pairing
    }

    pub fn assignments(&self) -> &[(Variable, HFSet)] {
        &self.assignment
    }

    pub fn get(&self, v: &Variable) -> Option<&HFSet> {
        self.assignment
            .binary_search_by(|(k, _)| k.cmp(v))
            .ok()
            .map(|i| &self.assignment[i].1)
    }

    /// Returns the interpretation that agrees with `self` outside
    /// `variant_set` and applies `updates` inside it. Updates may
    /// introduce variables that had no assignment. Map-variable updates
    /// must stay pair-aware.
    pub fn variant<I>(
        &self,
        variant_set: &BTreeSet<Variable>,
        updates: I,
    ) -> Result<Interpretation, SemanticsError>
    where
        I: IntoIterator<Item = (Variable, HFSet)>,
    {
        let mut next = self.clone();
        for (v, value) in updates {
            if !variant_set.contains(&v) {
                return Err(SemanticsError::UpdateOutsideVariantSet { variable: v.to_string() });
            }
            check_pair_aware(&v, &value, &next.pairing)?;
            match next.assignment.binary_search_by(|(k, _)| k.cmp(&v)) {
                Ok(i) => next.assignment[i].1 = value,
                Err(i) => next.assignment.insert(i, (v, value)),
            }
        }
        Ok(next)
    }

    /// Keeps only the assignments for the listed variables.
    pub fn restricted(&self, keep: &BTreeSet<Variable>) -> Interpretation {
        Interpretation {
            pairing: self.pairing.clone(),
            assignment: self
                .assignment
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .cloned()
                .collect(),
        }
    }
}

struct Env<'a> {
    pairing: &'a PairingSpec,
    base: &'a [(Variable, HFSet)],
    bound: Vec<(Variable, HFSet)>,
    allow_extensions: bool,
}

impl<'a> Env<'a> {
    fn lookup(&self, v: &Variable) -> Result<HFSet, EvalError> {
        for (bv, val) in self.bound.iter().rev() {
            if bv == v {
                return Ok(val.clone());
            }
        }
        self.base
            .binary_search_by(|(k, _)| k.cmp(v))
            .ok()
            .map(|i| self.base[i].1.clone())
            .ok_or_else(|| EvalError::UnassignedVariable(v.to_string()))
    }

    fn unpair_member(&self, member: &HFSet, container_sort: Sort, value: &HFSet)
        -> Result<Option<(HFSet, HFSet)>, EvalError>
    {
        match self.pairing.unpair(member) {
            Some(uv) => Ok(Some(uv)),
            // Non-pair members of a set-sorted container are simply not
            // iterated; in a map value they violate pair-awareness.
            None if container_sort == Sort::Set => Ok(None),
            None => Err(EvalError::UnpairFailure {
                member: member.to_string(),
                value: value.to_string(),
            }),
        }
    }

    fn decompose_all(&self, v: &Variable) -> Result<Vec<(HFSet, HFSet)>, EvalError> {
        let value = self.lookup(v)?;
        let mut out = Vec::with_capacity(value.len());
        for m in value.children() {
            match self.pairing.unpair(m) {
                Some(uv) => out.push(uv),
                None => {
                    return Err(EvalError::UnpairFailure {
                        member: m.to_string(),
                        value: value.to_string(),
                    })
                }
            }
        }
        Ok(out)
    }

    fn eval(&mut self, f: &Formula) -> Result<bool, EvalError> {
        match f {
            Formula::MemberSet(a, b) => Ok(self.lookup(b)?.contains(&self.lookup(a)?)),
            Formula::MemberNonpairs(a, z) => {
                let av = self.lookup(a)?;
                let zv = self.lookup(z)?;
                Ok(zv.contains(&av) && self.pairing.unpair(&av).is_none())
            }
            Formula::EqualSet(a, b) | Formula::EqualMap(a, b) => {
                Ok(self.lookup(a)? == self.lookup(b)?)
            }
            Formula::PairMember(x, y, d) => {
                let pair = self.pairing.pair(&self.lookup(x)?, &self.lookup(y)?);
                Ok(self.lookup(d)?.contains(&pair))
            }
            Formula::SubDom(x, g) => {
                self.require_ext("sub dom")?;
                let xv = self.lookup(x)?;
                let pairs = self.decompose_all(g)?;
                Ok(xv.children().iter().all(|u| pairs.iter().any(|(a, _)| a == u)))
            }
            Formula::SubRange(x, g) => {
                self.require_ext("sub ran")?;
                let xv = self.lookup(x)?;
                let pairs = self.decompose_all(g)?;
                Ok(xv.children().iter().all(|v| pairs.iter().any(|(_, b)| b == v)))
            }
            Formula::SubImage(y, g, x) => {
                self.require_ext("sub img")?;
                let yv = self.lookup(y)?;
                let xv = self.lookup(x)?;
                let pairs = self.decompose_all(g)?;
                Ok(yv
                    .children()
                    .iter()
                    .all(|v| pairs.iter().any(|(a, b)| b == v && xv.contains(a))))
            }
            Formula::SubComp(h, g1, g2) => {
                self.require_ext("sub comp")?;
                let composed_contains = |a: &HFSet, c: &HFSet, f1: &[(HFSet, HFSet)], f2: &[(HFSet, HFSet)]| {
                    f1.iter().any(|(fa, fb)| fa == a && f2.iter().any(|(ga, gb)| ga == fb && gb == c))
                };
                let hp = self.decompose_all(h)?;
                let f1 = self.decompose_all(g1)?;
                let f2 = self.decompose_all(g2)?;
                Ok(hp.iter().all(|(a, c)| composed_contains(a, c, &f1, &f2)))
            }
            Formula::Not(a) => Ok(!self.eval(a)?),
            Formula::And(a, b) => Ok(self.eval(a)? && self.eval(b)?),
            Formula::Or(a, b) => Ok(self.eval(a)? || self.eval(b)?),
            Formula::Implies(a, b) => Ok(!self.eval(a)? || self.eval(b)?),
            Formula::Iff(a, b) => Ok(self.eval(a)? == self.eval(b)?),
            Formula::ForallIn(x, z, body) => {
                if x == z {
                    // No variant satisfies J x in J x.
                    return Ok(true);
                }
                let domain = self.lookup(z)?;
                for u in domain.children() {
                    self.bound.push((x.clone(), u.clone()));
                    let ok = self.eval(body)?;
                    self.bound.pop();
                    if !ok {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::ExistsIn(x, z, body) => {
                if x == z {
                    return Ok(false);
                }
                let domain = self.lookup(z)?;
                for u in domain.children() {
                    self.bound.push((x.clone(), u.clone()));
                    let ok = self.eval(body)?;
                    self.bound.pop();
                    if ok {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::ForallInNonpairs(x, z, body) => {
                if x == z {
                    return Ok(true);
                }
                let domain = self.lookup(z)?;
                for u in domain.children() {
                    if self.pairing.unpair(u).is_some() {
                        continue;
                    }
                    self.bound.push((x.clone(), u.clone()));
                    let ok = self.eval(body)?;
                    self.bound.pop();
                    if !ok {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::ForallPairIn(x, y, d, body) => self.eval_pair_quant(x, y, d, body, false),
            Formula::ExistsPairIn(x, y, d, body) => self.eval_pair_quant(x, y, d, body, true),
        }
    }

    fn eval_pair_quant(
        &mut self,
        x: &Variable,
        y: &Variable,
        d: &Variable,
        body: &Formula,
        exists: bool,
    ) -> Result<bool, EvalError> {
        // A pair whose components include its own container would violate
        // well-foundedness, so rebinding the container yields no variants.
        if d == x || d == y {
            return Ok(!exists);
        }
        let value = self.lookup(d)?;
        for m in value.children() {
            let Some((u, v)) = self.unpair_member(m, d.sort(), &value)? else {
                continue;
            };
            if x == y {
                // One shared binder: only diagonal members produce variants.
                if u != v {
                    continue;
                }
                self.bound.push((x.clone(), u));
            } else {
                self.bound.push((x.clone(), u));
                self.bound.push((y.clone(), v));
            }
            let ok = self.eval(body)?;
            self.bound.pop();
            if x != y {
                self.bound.pop();
            }
            if ok == exists {
                return Ok(exists);
            }
        }
        Ok(!exists)
    }

    fn require_ext(&self, name: &str) -> Result<(), EvalError> {
        if self.allow_extensions {
            Ok(())
        } else {
            Err(EvalError::ExtensionAtomDisabled(name.to_string()))
        }
    }
}

pub(crate) fn evaluate_on(
    pairing: &PairingSpec,
    base: &[(Variable, HFSet)],
    f: &Formula,
    allow_extensions: bool,
) -> Result<bool, EvalError> {
    let mut env = Env { pairing, base, bound: Vec::with_capacity(8), allow_extensions };
    env.eval(f)
}

/// Truth of `f` under `i`. Extension atoms are rejected; use
/// [`extended_evaluate`] when the extension capability is enabled.
pub fn evaluate(i: &Interpretation, f: &Formula) -> Result<bool, EvalError> {
    evaluate_on(&i.pairing, &i.assignment, f, false)
}

/// Truth of `f` under `i`, with the extension atoms
/// `sub dom/ran/img/comp` evaluated directly on decomposed pairs.
pub fn extended_evaluate(i: &Interpretation, f: &Formula) -> Result<bool, EvalError> {
    evaluate_on(&i.pairing, &i.assignment, f, true)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    BadSet {
        line: usize,
        #[source]
        source: HfError,
    },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Parses a model document: a `pairing:` header followed by `name = {...}`
/// assignment lines (map variables written `@name`).
///
/// ```text
/// pairing: kuratowski
/// x = {}
/// @f = {{{}}}
/// ```
pub fn parse_model(text: &str) -> Result<Interpretation, ModelError> {
    let mut pairing: Option<PairingSpec> = None;
    let mut items: Vec<(Variable, HFSet)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("pairing:") {
            if pairing.is_some() {
                return Err(ModelError::Syntax { line, message: "duplicate pairing line".into() });
            }
            let rest = rest.trim();
            if rest == "kuratowski" {
                pairing = Some(PairingSpec::Kuratowski);
            } else if let Some(d) = rest.strip_prefix("delta") {
                let delta = HFSet::parse(d.trim())
                    .map_err(|source| ModelError::BadSet { line, source })?;
                pairing = Some(PairingSpec::Delta(delta));
            } else {
                return Err(ModelError::Syntax {
                    line,
                    message: format!("unknown pairing `{}` (expected `kuratowski` or `delta {{...}}`)", rest),
                });
            }
            continue;
        }
        if pairing.is_none() {
            return Err(ModelError::Syntax {
                line,
                message: "model must start with a `pairing:` line".into(),
            });
        }
        let Some((lhs, rhs)) = trimmed.split_once('=') else {
            return Err(ModelError::Syntax { line, message: "expected `name = {...}`".into() });
        };
        let name = lhs.trim();
        let variable = if let Some(map_name) = name.strip_prefix('@') {
            Variable::map(map_name.to_string())
        } else {
            Variable::set(name.to_string())
        };
        if variable.name().is_empty() {
            return Err(ModelError::Syntax { line, message: "empty variable name".into() });
        }
        let value = HFSet::parse(rhs.trim()).map_err(|source| ModelError::BadSet { line, source })?;
        items.push((variable, value));
    }
    let pairing = pairing.ok_or(ModelError::Syntax {
        line: 0,
        message: "missing `pairing:` line".into(),
    })?;
    Ok(Interpretation::with_assignments(pairing, items)?)
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairing: {}", self.pairing.name())?;
        for (v, value) in &self.assignment {
            writeln!(f, "{} = {}", v, value)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;
    use crate::hf::{delta_pairing, universe, pairs_of};

    fn kur() -> PairingSpec {
        PairingSpec::Kuratowski
    }

    fn e() -> HFSet {
        HFSet::empty()
    }

    fn interp(items: Vec<(Variable, HFSet)>) -> Interpretation {
        Interpretation::with_assignments(kur(), items).unwrap()
    }

    #[test]
    fn variant_changes_only_listed_variables() {
        let x = Variable::set("x");
        let y = Variable::set("y");
        let i = interp(vec![(x.clone(), e()), (y.clone(), e())]);
        let w: BTreeSet<_> = [x.clone()].into();
        let j = i.variant(&w, vec![(x.clone(), HFSet::singleton(e()))]).unwrap();
        assert_eq!(j.get(&x), Some(&HFSet::singleton(e())));
        assert_eq!(j.get(&y), Some(&e()));
        // Empty variant set: identical interpretation.
        let k = i.variant(&BTreeSet::new(), vec![]).unwrap();
        assert_eq!(k, i);
    }

    #[test]
    fn variant_rejects_non_pair_aware_map_update() {
        let f = Variable::map("f");
        let i = Interpretation::new(kur());
        let w: BTreeSet<_> = [f.clone()].into();
        let err = i.variant(&w, vec![(f, HFSet::singleton(e()))]).unwrap_err();
        assert!(matches!(err, SemanticsError::NotPairAware { .. }));
    }

    #[test]
    fn variant_rejects_update_outside_set() {
        let x = Variable::set("x");
        let i = Interpretation::new(kur());
        let err = i.variant(&BTreeSet::new(), vec![(x, e())]).unwrap_err();
        assert!(matches!(err, SemanticsError::UpdateOutsideVariantSet { .. }));
    }

    #[test]
    fn empty_domain_makes_universals_true() {
        let i = interp(vec![(Variable::set("x"), e())]);
        let f = parse("forall x' in x . x' != x'").unwrap();
        assert_eq!(evaluate(&i, &f), Ok(true));
    }

    #[test]
    fn diagonal_pair_example() {
        let fv = Variable::map("f");
        let value = HFSet::singleton(HFSet::kur_pair(&e(), &e()));
        let i = interp(vec![(fv, value)]);
        let f = parse("forall [a,b] in @f . a = b").unwrap();
        assert_eq!(evaluate(&i, &f), Ok(true));
    }

    #[test]
    fn nonpairs_strips_pairs() {
        let x = Variable::set("x");
        let value = HFSet::singleton(HFSet::kur_pair(&e(), &e()));
        let i = interp(vec![(x, value)]);
        let f = parse("forall a in nonpairs(x) . a != a").unwrap();
        assert_eq!(evaluate(&i, &f), Ok(true));
    }

    #[test]
    fn pair_atom_uses_the_interpretations_pairing() {
        let x = Variable::set("x");
        let y = Variable::set("y");
        let f = Variable::map("f");
        let formula = parse("[x,y] in @f -> x in y").unwrap();
        // f contains kur(x,y) but x not in y: implication false.
        let i = interp(vec![
            (x.clone(), e()),
            (y.clone(), e()),
            (f.clone(), HFSet::singleton(HFSet::kur_pair(&e(), &e()))),
        ]);
        assert_eq!(evaluate(&i, &formula), Ok(false));
        // f empty: antecedent false, implication true.
        let j = interp(vec![(x, e()), (y, e()), (f, e())]);
        assert_eq!(evaluate(&j, &formula), Ok(true));
    }

    #[test]
    fn unassigned_variable_reported() {
        let i = Interpretation::new(kur());
        let f = parse("x in y").unwrap();
        assert!(matches!(evaluate(&i, &f), Err(EvalError::UnassignedVariable(_))));
    }

    #[test]
    fn extension_atoms_need_extended_evaluation() {
        let x = Variable::set("x");
        let f = Variable::map("f");
        let atom = parse("x sub dom(@f)").unwrap();
        let pair = HFSet::kur_pair(&e(), &HFSet::singleton(e()));
        let i = interp(vec![(x.clone(), HFSet::singleton(e())), (f.clone(), HFSet::singleton(pair))]);
        assert!(matches!(evaluate(&i, &atom), Err(EvalError::ExtensionAtomDisabled(_))));
        // dom(f) = {{}} contains {} so {{}}... x = {{}}: {} in dom ✓
        assert_eq!(extended_evaluate(&i, &atom), Ok(true));
        // x = {{{}}} is not included: {{}} not in dom(f) = {{}}
        let j = interp(vec![
            (x, HFSet::singleton(HFSet::singleton(e()))),
            (f, HFSet::singleton(HFSet::kur_pair(&e(), &HFSet::singleton(e())))),
        ]);
        assert_eq!(extended_evaluate(&j, &atom), Ok(false));
    }

    #[test]
    fn quantifier_duality_over_small_space() {
        // exists ... phi == not (forall ... not phi), across all
        // assignments of x,y over level-3 sets and single-pair map values.
        let x = Variable::set("x");
        let fvar = Variable::map("f");
        let exists = parse("exists a in x . a in y").unwrap();
        let dual = parse("not (forall a in x . not a in y)").unwrap();
        let v3 = universe(3).unwrap();
        for xv in &v3 {
            for yv in &v3 {
                let i = interp(vec![
                    (x.clone(), xv.clone()),
                    (Variable::set("y"), yv.clone()),
                ]);
                assert_eq!(evaluate(&i, &exists), evaluate(&i, &dual));
            }
        }
        let exists_pair = parse("exists [a,b] in @f . a = b").unwrap();
        let dual_pair = parse("not (forall [a,b] in @f . not a = b)").unwrap();
        for u in &v3 {
            for v in &v3 {
                let value = HFSet::singleton(HFSet::kur_pair(u, v));
                let i = interp(vec![(fvar.clone(), value)]);
                assert_eq!(evaluate(&i, &exists_pair), evaluate(&i, &dual_pair));
                assert_eq!(evaluate(&i, &exists_pair), Ok(u == v));
            }
        }
    }

    #[test]
    fn rebinding_the_container_is_vacuous() {
        let z = Variable::set("z");
        let pair = HFSet::kur_pair(&e(), &e());
        let i = interp(vec![(z.clone(), HFSet::singleton(pair))]);
        let f = Formula::ForallPairIn(
            z.clone(),
            Variable::set("b"),
            z.clone(),
            Box::new(Formula::not(Formula::EqualSet(z.clone(), z.clone()))),
        );
        assert_eq!(evaluate(&i, &f), Ok(true));
    }

    #[test]
    fn set_sorted_pair_container_skips_non_pairs() {
        // In the set-only language, [x,y] in z iterates only pair members.
        let z = Variable::set("z");
        let value = HFSet::from_children(vec![e(), HFSet::kur_pair(&e(), &e())]);
        let i = interp(vec![(z, value)]);
        let f = parse("forall [a,b] in z . a = b").unwrap();
        assert_eq!(evaluate(&i, &f), Ok(true));
    }

    #[test]
    fn map_sorted_unpair_failure_is_an_error() {
        let f = Variable::map("f");
        let bogus = Interpretation::from_sorted_unchecked(
            kur(),
            vec![(f.clone(), HFSet::singleton(e()))],
        );
        let formula = parse("forall [a,b] in @f . a = b").unwrap();
        assert!(matches!(
            evaluate(&bogus, &formula),
            Err(EvalError::UnpairFailure { .. })
        ));
    }

    #[test]
    fn model_file_roundtrip() {
        // @f holds the single pair kur(0,0) = {{0}}.
        let text = "pairing: kuratowski\nx = {}\ny = {{}}\n@f = {{{{}}}}\n";
        let i = parse_model(text).unwrap();
        assert_eq!(i.get(&Variable::set("x")), Some(&e()));
        assert_eq!(
            i.get(&Variable::map("f")),
            Some(&HFSet::singleton(HFSet::kur_pair(&e(), &e())))
        );
        let printed = i.to_string();
        assert_eq!(parse_model(&printed).unwrap(), i);
    }

    #[test]
    fn model_file_rejects_non_pair_aware_map() {
        let text = "pairing: kuratowski\n@f = {{}}\n";
        assert!(matches!(parse_model(text), Err(ModelError::Semantics(_))));
    }

    #[test]
    fn model_file_delta_pairing() {
        let p = delta_pairing(e());
        let f = Variable::map("f");
        let value = HFSet::singleton(p.pair(&e(), &HFSet::singleton(e())));
        let i = Interpretation::with_assignments(p.clone(), vec![(f.clone(), value)]).unwrap();
        let text = i.to_string();
        let back = parse_model(&text).unwrap();
        assert_eq!(back, i);
        assert_eq!(back.pairing(), &p);
        assert_eq!(pairs_of(back.get(&f).unwrap(), back.pairing()), *back.get(&f).unwrap());
    }
}
