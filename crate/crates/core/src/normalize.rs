//! Reduction of arbitrary well-formed formulas to a stream of normalized
//! conjunctions, each a conjunction of universal simple-prenex formulas.
//!
//! The pipeline: existential prenex blocks are dualized into negated
//! universals, the propositional skeleton over prenex/atomic leaves is
//! extracted, and for every satisfying valuation of the skeleton one
//! conjunction is emitted. Leaves assigned `true` contribute themselves;
//! leaves assigned `false` contribute a witness for their negation, with
//! quantified variables instantiated to fresh `name#k` variables. Every
//! satisfiable emitted conjunction makes the source formula satisfiable,
//! and the source is satisfiable iff some emitted conjunction is.

use crate::ast::{Formula, FreshNames, NormalizedConjunction, Variable};
use crate::prop::Prop;

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("input is not an existential prenex formula: {0}")]
    NotExistentialPrenex(String),
}

/// A propositional view of a formula: `proposition` over placeholder
/// indices, and the leaf formula substituted for each placeholder.
/// Substituting the leaves back reproduces the source formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub proposition: Prop<usize>,
    pub substitution: Vec<Formula>,
}

impl Skeleton {
    /// Substitutes the leaves back into the proposition.
    pub fn reconstruct(&self) -> Formula {
        fn go(p: &Prop<usize>, subst: &[Formula]) -> Formula {
            match p {
                Prop::Var(i) => subst[*i].clone(),
                Prop::Not(a) => Formula::not(go(a, subst)),
                Prop::And(a, b) => Formula::and(go(a, subst), go(b, subst)),
                Prop::Or(a, b) => Formula::or(go(a, subst), go(b, subst)),
                Prop::Implies(a, b) => Formula::implies(go(a, subst), go(b, subst)),
                Prop::Iff(a, b) => Formula::iff(go(a, subst), go(b, subst)),
            }
        }
        go(&self.proposition, &self.substitution)
    }

    pub fn placeholders(&self) -> usize {
        self.substitution.len()
    }
}

enum Peeled<'a> {
    Set(&'a Variable, &'a Variable),
    Nonpairs(&'a Variable, &'a Variable),
    Pair(&'a Variable, &'a Variable, &'a Variable),
}

fn peel_uniform(f: &Formula, want_exists: bool) -> Option<(Vec<Peeled<'_>>, &Formula)> {
    let mut steps = Vec::new();
    let mut cur = f;
    loop {
        match (cur, want_exists) {
            (Formula::ForallIn(x, z, body), false) | (Formula::ExistsIn(x, z, body), true) => {
                steps.push(Peeled::Set(x, z));
                cur = body;
            }
            (Formula::ForallInNonpairs(x, z, body), false) => {
                steps.push(Peeled::Nonpairs(x, z));
                cur = body;
            }
            (Formula::ForallPairIn(x, y, d, body), false)
            | (Formula::ExistsPairIn(x, y, d, body), true) => {
                steps.push(Peeled::Pair(x, y, d));
                cur = body;
            }
            _ => break,
        }
    }
    if cur.is_quantifier() || steps.is_empty() {
        None
    } else {
        Some((steps, cur))
    }
}

/// Rewrites every existential prenex block `(exists P) m` into
/// `not ((forall P) not m)`; universal blocks and atoms are untouched.
pub fn dualize_existentials(f: &Formula) -> Formula {
    match f {
        Formula::Not(a) => Formula::not(dualize_existentials(a)),
        Formula::And(a, b) => Formula::and(dualize_existentials(a), dualize_existentials(b)),
        Formula::Or(a, b) => Formula::or(dualize_existentials(a), dualize_existentials(b)),
        Formula::Implies(a, b) => {
            Formula::implies(dualize_existentials(a), dualize_existentials(b))
        }
        Formula::Iff(a, b) => Formula::iff(dualize_existentials(a), dualize_existentials(b)),
        Formula::ExistsIn(..) | Formula::ExistsPairIn(..) => {
            match peel_uniform(f, true) {
                Some((steps, matrix)) => {
                    let mut body = negate(matrix.clone());
                    for step in steps.iter().rev() {
                        body = match step {
                            Peeled::Set(x, z) => {
                                Formula::ForallIn((*x).clone(), (*z).clone(), Box::new(body))
                            }
                            Peeled::Pair(x, y, d) => Formula::ForallPairIn(
                                (*x).clone(),
                                (*y).clone(),
                                (*d).clone(),
                                Box::new(body),
                            ),
                            Peeled::Nonpairs(..) => {
                                unreachable!("existential peeling never yields nonpairs steps")
                            }
                        };
                    }
                    Formula::not(body)
                }
                // Mixed or nested prefixes are left for the validator to
                // reject; pass them through unchanged.
                None => f.clone(),
            }
        }
        other => other.clone(),
    }
}

/// Negation with one level of double-negation collapse.
fn negate(f: Formula) -> Formula {
    match f {
        Formula::Not(inner) => *inner,
        other => Formula::not(other),
    }
}

/// Extracts the propositional skeleton of a boolean combination of prenex
/// formulas and atoms. Structurally equal leaves share a placeholder.
pub fn skeleton(f: &Formula) -> Skeleton {
    fn go(f: &Formula, subst: &mut Vec<Formula>) -> Prop<usize> {
        match f {
            Formula::Not(a) => Prop::not(go(a, subst)),
            Formula::And(a, b) => Prop::and(go(a, subst), go(b, subst)),
            Formula::Or(a, b) => Prop::or(go(a, subst), go(b, subst)),
            Formula::Implies(a, b) => Prop::implies(go(a, subst), go(b, subst)),
            Formula::Iff(a, b) => Prop::iff(go(a, subst), go(b, subst)),
            leaf => {
                let idx = match subst.iter().position(|s| s == leaf) {
                    Some(i) => i,
                    None => {
                        subst.push(leaf.clone());
                        subst.len() - 1
                    }
                };
                Prop::Var(idx)
            }
        }
    }
    let mut substitution = Vec::new();
    let proposition = go(f, &mut substitution);
    Skeleton { proposition, substitution }
}

fn membership_conjuncts(
    steps: &[Peeled<'_>],
    renames: &BTreeMap<Variable, Variable>,
) -> Vec<Formula> {
    let get = |v: &Variable| renames.get(v).cloned().unwrap_or_else(|| v.clone());
    steps
        .iter()
        .map(|step| match step {
            Peeled::Set(x, z) => Formula::MemberSet(get(x), get(z)),
            Peeled::Nonpairs(x, z) => Formula::MemberNonpairs(get(x), get(z)),
            Peeled::Pair(x, y, d) => Formula::PairMember(get(x), get(y), get(d)),
        })
        .collect()
}

fn rename_steps(steps: &[Peeled<'_>], fresh: &mut FreshNames) -> BTreeMap<Variable, Variable> {
    let mut renames = BTreeMap::new();
    for step in steps {
        match step {
            Peeled::Set(x, _) | Peeled::Nonpairs(x, _) => {
                let nx = fresh.derived(x);
                renames.insert((*x).clone(), nx);
            }
            Peeled::Pair(x, y, _) => {
                // Both components of a pair binder share one stamp.
                let k = fresh.next_stamp();
                renames.insert((*x).clone(), FreshNames::stamp(x, k));
                renames.insert((*y).clone(), FreshNames::stamp(y, k));
            }
        }
    }
    renames
}

/// Turns an existential prenex formula `(exists P) m` into the
/// equisatisfiable quantifier-free conjunction of the prefix memberships
/// and `m`, with the quantified variables renamed to fresh `name#k`
/// variables.
pub fn eliminate_existential(f: &Formula) -> Result<Formula, NormalizeError> {
    let Some((steps, matrix)) = peel_uniform(f, true) else {
        return Err(NormalizeError::NotExistentialPrenex(f.to_string()));
    };
    if !matrix.is_quantifier_free() {
        return Err(NormalizeError::NotExistentialPrenex(f.to_string()));
    }
    let mut fresh = FreshNames::new();
    let renames = rename_steps(&steps, &mut fresh);
    let mut conjuncts = membership_conjuncts(&steps, &renames);
    conjuncts.push(matrix.substitute_free(&renames));
    Ok(Formula::and_all(conjuncts))
}

/// Witness for the negation of a universal prenex leaf: the prefix
/// memberships plus the negated matrix, over fresh variables. For an
/// atomic leaf this is just its negation.
fn negated_leaf_witness(leaf: &Formula, fresh: &mut FreshNames) -> Formula {
    match peel_uniform(leaf, false) {
        Some((steps, matrix)) => {
            let renames = rename_steps(&steps, fresh);
            let mut conjuncts = membership_conjuncts(&steps, &renames);
            conjuncts.push(negate(matrix.substitute_free(&renames)));
            Formula::and_all(conjuncts)
        }
        None => negate(leaf.clone()),
    }
}

/// Lazy stream of normalized conjunctions, in lexicographic valuation
/// order over the skeleton placeholders (placeholder 0 is the most
/// significant bit, `false < true`). An exhausted stream without any
/// emission means the skeleton is propositionally unsatisfiable.
pub struct NormalizedStream {
    skeleton: Skeleton,
    options: crate::ast::ValidateOptions,
    next: u64,
    total: u64,
    fresh: FreshNames,
    filter: Option<Box<dyn Fn(&[bool]) -> bool + Send>>,
}

impl NormalizedStream {
    /// Installs a valuation-pruning hook: valuations rejected by `filter`
    /// are skipped before any conjunction is built.
    pub fn with_filter(mut self, filter: impl Fn(&[bool]) -> bool + Send + 'static) -> Self {
        self.filter = Some(Box::new(filter));
        self
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    fn valuation(&self, index: u64) -> Vec<bool> {
        let n = self.skeleton.placeholders();
        (0..n).map(|i| index & (1 << (n - 1 - i)) != 0).collect()
    }
}

impl Iterator for NormalizedStream {
    type Item = NormalizedConjunction;

    fn next(&mut self) -> Option<NormalizedConjunction> {
        while self.next < self.total {
            let valuation = self.valuation(self.next);
            self.next += 1;
            if let Some(filter) = &self.filter {
                if !filter(&valuation) {
                    continue;
                }
            }
            if !self.skeleton.proposition.eval(&|i: &usize| valuation[*i]) {
                continue;
            }
            let mut conjuncts = Vec::with_capacity(valuation.len());
            for (i, value) in valuation.iter().enumerate() {
                let leaf = &self.skeleton.substitution[i];
                if *value {
                    conjuncts.push(leaf.freshen_bound(&mut self.fresh));
                } else {
                    conjuncts.push(negated_leaf_witness(leaf, &mut self.fresh));
                }
            }
            let built = NormalizedConjunction::with_options(conjuncts, self.options);
            return Some(built.expect(
                "normalization emitted an invalid conjunction; input was not validated",
            ));
        }
        None
    }
}

/// Streams the normalized conjunctions of a validated formula. The source
/// is satisfiable iff some emitted conjunction is satisfiable, and any
/// model of an emitted conjunction is a model of the source.
pub fn normalized_conjunctions(f: &Formula) -> NormalizedStream {
    let dual = dualize_existentials(f);
    let skeleton = skeleton(&dual);
    let n = skeleton.placeholders();
    assert!(n <= 62, "too many skeleton placeholders ({})", n);
    NormalizedStream {
        options: crate::ast::infer_validate_options(f),
        total: 1u64 << n,
        next: 0,
        skeleton,
        fresh: FreshNames::new(),
        filter: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse, parse_relaxed};

    #[test]
    fn eliminate_existential_examples() {
        let f = parse("exists x in z . x = x").unwrap();
        assert_eq!(
            eliminate_existential(&f).unwrap().to_string(),
            "x#1 in z and x#1 = x#1"
        );
        let g = parse("exists [x,y] in @f . x in w").unwrap();
        assert_eq!(
            eliminate_existential(&g).unwrap().to_string(),
            "[x#1,y#1] in @f and x#1 in w"
        );
        let not_existential = parse("forall x in z . x = x").unwrap();
        assert!(eliminate_existential(&not_existential).is_err());
    }

    #[test]
    fn skeleton_shares_equal_leaves() {
        let a = parse("forall x in z . x = x").unwrap();
        let f = Formula::or(a.clone(), Formula::not(a.clone()));
        let sk = skeleton(&f);
        assert_eq!(sk.placeholders(), 1);
        assert_eq!(sk.proposition, Prop::or(Prop::Var(0), Prop::not(Prop::Var(0))));
        assert_eq!(sk.substitution[0], a);
        assert_eq!(sk.reconstruct(), f);
    }

    #[test]
    fn skeleton_single_leaf() {
        let a = parse("forall x in z . x = x").unwrap();
        let sk = skeleton(&a);
        assert_eq!(sk.proposition, Prop::Var(0));
        assert_eq!(sk.reconstruct(), a);
    }

    #[test]
    fn contradiction_gives_empty_stream() {
        let a = parse("a in b").unwrap();
        let f = Formula::and(a.clone(), Formula::not(a));
        assert_eq!(normalized_conjunctions(&f).count(), 0);
        let q = parse("forall x in z . x = x").unwrap();
        let g = Formula::and(q.clone(), Formula::not(q));
        assert_eq!(normalized_conjunctions(&g).count(), 0);
    }

    #[test]
    fn negated_universal_emits_witness() {
        let f = parse("not (forall x in z . x != x)").unwrap();
        let out: Vec<_> = normalized_conjunctions(&f).collect();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_string(), "x#1 in z and x#1 = x#1");
    }

    #[test]
    fn stream_caps_at_two_to_the_placeholders() {
        let f = parse("(forall x in z . x = x) or a in b or b in c").unwrap();
        let stream = normalized_conjunctions(&f);
        assert_eq!(stream.skeleton().placeholders(), 3);
        let emitted: Vec<_> = stream.collect();
        assert!(emitted.len() <= 8);
        assert!(!emitted.is_empty());
        // Deterministic order.
        let again: Vec<_> = normalized_conjunctions(&f).collect();
        assert_eq!(emitted, again);
    }

    #[test]
    fn valuation_filter_prunes() {
        let f = parse("a in b or c in d").unwrap();
        let all = normalized_conjunctions(&f).count();
        let only_first_true = normalized_conjunctions(&f)
            .with_filter(|v| v[0])
            .count();
        assert!(only_first_true < all);
        assert_eq!(only_first_true, 2);
    }

    #[test]
    fn emitted_bound_variables_are_globally_fresh() {
        let f = parse("(forall x' in a . x' in b) and not (forall x' in c . x' in d)").unwrap();
        let out: Vec<_> = normalized_conjunctions(&f).collect();
        assert_eq!(out.len(), 1);
        let printed = out[0].to_string();
        // Both leaves bind x'; the emission renames them apart.
        assert_eq!(printed, "(forall x'#1 in a . x'#1 in b) and (x'#2 in c and not x'#2 in d)");
        // And the output parses back (relaxed mode, generated names).
        assert!(parse_relaxed(&printed).is_ok());
    }

    #[test]
    fn dualized_existential_stream() {
        let f = parse("exists x in z . x = x").unwrap();
        let out: Vec<_> = normalized_conjunctions(&f).collect();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].to_string(), "x#1 in z and x#1 = x#1");
    }
}
