//! Sorted abstract syntax for the two-sorted set/map language, its
//! set-variables-only companion with `nonpairs` terms, and the extension
//! atoms (`sub dom/ran/img/comp`) used by the undecidability encodings.
//!
//! Concrete syntax: map variables are written `@f`, set variables are bare
//! identifiers. `!=` and `notin` are parsing sugar for negated atoms. The
//! characters `#` and `$` are reserved for machine-generated fresh names
//! and rejected by the strict parser.

mod parser;
mod printer;
mod validate;

pub use parser::{parse, parse_relaxed, ParseError};
pub use validate::{
    infer_validate_options, validate, Diagnostic, DiagnosticKind, Language, ValidateOptions,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Variable sort: set variables range over all hereditarily finite sets,
/// map variables only over sets of ordered pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Set,
    Map,
}

#[derive(Clone, Debug)]
pub struct Variable {
    sort: Sort,
    name: Arc<str>,
}

impl Variable {
    pub fn new(sort: Sort, name: impl Into<Arc<str>>) -> Variable {
        Variable { sort, name: name.into() }
    }

    pub fn set(name: impl Into<Arc<str>>) -> Variable {
        Variable::new(Sort::Set, name)
    }

    pub fn map(name: impl Into<Arc<str>>) -> Variable {
        Variable::new(Sort::Map, name)
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl PartialEq for Variable {
    fn eq(&self, other: &Variable) -> bool {
        self.sort == other.sort
            && (Arc::ptr_eq(&self.name, &other.name) || self.name == other.name)
    }
}

impl Eq for Variable {}

impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Variable) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Variable {
    fn cmp(&self, other: &Variable) -> std::cmp::Ordering {
        self.sort
            .cmp(&other.sort)
            .then_with(|| self.name.as_ref().cmp(other.name.as_ref()))
    }
}

impl std::hash::Hash for Variable {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.sort.hash(state);
        self.name.as_ref().hash(state);
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sort {
            Sort::Set => write!(f, "{}", self.name),
            Sort::Map => write!(f, "@{}", self.name),
        }
    }
}

/// Formula tree. Atoms carry variables directly; pair-membership and the
/// pair quantifier take the pair's container as their last variable, which
/// is map-sorted in the base language and set-sorted in the
/// set-variables-only language produced by the reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    // Atoms.
    MemberSet(Variable, Variable),
    MemberNonpairs(Variable, Variable),
    EqualSet(Variable, Variable),
    PairMember(Variable, Variable, Variable),
    EqualMap(Variable, Variable),
    // Extension atoms (enabled by `ValidateOptions::allow_extensions`).
    SubDom(Variable, Variable),
    SubRange(Variable, Variable),
    SubImage(Variable, Variable, Variable),
    SubComp(Variable, Variable, Variable),
    // Connectives.
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    // Restricted quantifiers.
    ForallIn(Variable, Variable, Box<Formula>),
    ExistsIn(Variable, Variable, Box<Formula>),
    ForallInNonpairs(Variable, Variable, Box<Formula>),
    ForallPairIn(Variable, Variable, Variable, Box<Formula>),
    ExistsPairIn(Variable, Variable, Variable, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Left-folded conjunction of a non-empty list.
    pub fn and_all(mut conjuncts: Vec<Formula>) -> Formula {
        assert!(!conjuncts.is_empty(), "and_all needs at least one conjunct");
        let mut acc = conjuncts.remove(0);
        for c in conjuncts {
            acc = Formula::and(acc, c);
        }
        acc
    }

    /// Left-folded disjunction of a non-empty list.
    pub fn or_all(mut disjuncts: Vec<Formula>) -> Formula {
        assert!(!disjuncts.is_empty(), "or_all needs at least one disjunct");
        let mut acc = disjuncts.remove(0);
        for d in disjuncts {
            acc = Formula::or(acc, d);
        }
        acc
    }

    /// Splits top-level conjunctions into a flat list.
    pub fn flatten_and(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn is_quantifier(&self) -> bool {
        matches!(
            self,
            Formula::ForallIn(..)
                | Formula::ExistsIn(..)
                | Formula::ForallInNonpairs(..)
                | Formula::ForallPairIn(..)
                | Formula::ExistsPairIn(..)
        )
    }

    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            Formula::MemberSet(..)
                | Formula::MemberNonpairs(..)
                | Formula::EqualSet(..)
                | Formula::PairMember(..)
                | Formula::EqualMap(..)
                | Formula::SubDom(..)
                | Formula::SubRange(..)
                | Formula::SubImage(..)
                | Formula::SubComp(..)
        )
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            f if f.is_atom() => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            _ => false,
        }
    }

    pub fn has_extension_atoms(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(
                f,
                Formula::SubDom(..) | Formula::SubRange(..) | Formula::SubImage(..) | Formula::SubComp(..)
            ) {
                found = true;
            }
        });
        found
    }

    pub fn has_nonpairs(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Formula::MemberNonpairs(..) | Formula::ForallInNonpairs(..)) {
                found = true;
            }
        });
        found
    }

    /// Tree size: formula nodes plus variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Formula::MemberSet(..)
            | Formula::MemberNonpairs(..)
            | Formula::EqualSet(..)
            | Formula::EqualMap(..)
            | Formula::SubDom(..)
            | Formula::SubRange(..) => 3,
            Formula::PairMember(..) | Formula::SubImage(..) | Formula::SubComp(..) => 4,
            Formula::Not(a) => 1 + a.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
            Formula::ForallIn(_, _, body)
            | Formula::ExistsIn(_, _, body)
            | Formula::ForallInNonpairs(_, _, body) => 3 + body.size(),
            Formula::ForallPairIn(_, _, _, body) | Formula::ExistsPairIn(_, _, _, body) => {
                4 + body.size()
            }
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) => a.visit(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::ForallIn(_, _, body)
            | Formula::ExistsIn(_, _, body)
            | Formula::ForallInNonpairs(_, _, body)
            | Formula::ForallPairIn(_, _, _, body)
            | Formula::ExistsPairIn(_, _, _, body) => body.visit(f),
            _ => {}
        }
    }

    /// All variables, free or bound, as they occur.
    pub fn all_variables(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            f.for_each_variable_slot(&mut |v| {
                out.insert(v.clone());
            });
        });
        out
    }

    fn for_each_variable_slot(&self, f: &mut impl FnMut(&Variable)) {
        match self {
            Formula::MemberSet(a, b)
            | Formula::MemberNonpairs(a, b)
            | Formula::EqualSet(a, b)
            | Formula::EqualMap(a, b)
            | Formula::SubDom(a, b)
            | Formula::SubRange(a, b) => {
                f(a);
                f(b);
            }
            Formula::PairMember(a, b, c)
            | Formula::SubImage(a, b, c)
            | Formula::SubComp(a, b, c) => {
                f(a);
                f(b);
                f(c);
            }
            Formula::ForallIn(x, z, _)
            | Formula::ExistsIn(x, z, _)
            | Formula::ForallInNonpairs(x, z, _) => {
                f(x);
                f(z);
            }
            Formula::ForallPairIn(x, y, d, _) | Formula::ExistsPairIn(x, y, d, _) => {
                f(x);
                f(y);
                f(d);
            }
            _ => {}
        }
    }

    /// Applies a variable-for-variable substitution to free occurrences,
    /// respecting quantifier shadowing. Substituting toward fresh names
    /// never captures; callers are responsible for choosing fresh targets.
    pub fn substitute_free(&self, map: &BTreeMap<Variable, Variable>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        let get = |v: &Variable| map.get(v).cloned().unwrap_or_else(|| v.clone());
        match self {
            Formula::MemberSet(a, b) => Formula::MemberSet(get(a), get(b)),
            Formula::MemberNonpairs(a, b) => Formula::MemberNonpairs(get(a), get(b)),
            Formula::EqualSet(a, b) => Formula::EqualSet(get(a), get(b)),
            Formula::PairMember(a, b, c) => Formula::PairMember(get(a), get(b), get(c)),
            Formula::EqualMap(a, b) => Formula::EqualMap(get(a), get(b)),
            Formula::SubDom(a, b) => Formula::SubDom(get(a), get(b)),
            Formula::SubRange(a, b) => Formula::SubRange(get(a), get(b)),
            Formula::SubImage(a, b, c) => Formula::SubImage(get(a), get(b), get(c)),
            Formula::SubComp(a, b, c) => Formula::SubComp(get(a), get(b), get(c)),
            Formula::Not(a) => Formula::not(a.substitute_free(map)),
            Formula::And(a, b) => Formula::and(a.substitute_free(map), b.substitute_free(map)),
            Formula::Or(a, b) => Formula::or(a.substitute_free(map), b.substitute_free(map)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute_free(map), b.substitute_free(map))
            }
            Formula::Iff(a, b) => Formula::iff(a.substitute_free(map), b.substitute_free(map)),
            Formula::ForallIn(x, z, body) => {
                let body = Self::substitute_under(body, map, &[x]);
                Formula::ForallIn(x.clone(), get(z), Box::new(body))
            }
            Formula::ExistsIn(x, z, body) => {
                let body = Self::substitute_under(body, map, &[x]);
                Formula::ExistsIn(x.clone(), get(z), Box::new(body))
            }
            Formula::ForallInNonpairs(x, z, body) => {
                let body = Self::substitute_under(body, map, &[x]);
                Formula::ForallInNonpairs(x.clone(), get(z), Box::new(body))
            }
            Formula::ForallPairIn(x, y, d, body) => {
                let body = Self::substitute_under(body, map, &[x, y]);
                Formula::ForallPairIn(x.clone(), y.clone(), get(d), Box::new(body))
            }
            Formula::ExistsPairIn(x, y, d, body) => {
                let body = Self::substitute_under(body, map, &[x, y]);
                Formula::ExistsPairIn(x.clone(), y.clone(), get(d), Box::new(body))
            }
        }
    }

    fn substitute_under(
        body: &Formula,
        map: &BTreeMap<Variable, Variable>,
        shadowed: &[&Variable],
    ) -> Formula {
        if shadowed.iter().any(|s| map.contains_key(s)) {
            let mut narrowed = map.clone();
            for s in shadowed {
                narrowed.remove(*s);
            }
            body.substitute_free(&narrowed)
        } else {
            body.substitute_free(map)
        }
    }

    /// Renames every bound variable using `fresh`, leaving free occurrences
    /// untouched.
    pub fn freshen_bound(&self, fresh: &mut FreshNames) -> Formula {
        fn go(f: &Formula, renames: &BTreeMap<Variable, Variable>, fresh: &mut FreshNames) -> Formula {
            let get = |v: &Variable| renames.get(v).cloned().unwrap_or_else(|| v.clone());
            match f {
                Formula::Not(a) => Formula::not(go(a, renames, fresh)),
                Formula::And(a, b) => Formula::and(go(a, renames, fresh), go(b, renames, fresh)),
                Formula::Or(a, b) => Formula::or(go(a, renames, fresh), go(b, renames, fresh)),
                Formula::Implies(a, b) => {
                    Formula::implies(go(a, renames, fresh), go(b, renames, fresh))
                }
                Formula::Iff(a, b) => Formula::iff(go(a, renames, fresh), go(b, renames, fresh)),
                Formula::ForallIn(x, z, body) => {
                    let nx = fresh.derived(x);
                    let mut r = renames.clone();
                    r.insert(x.clone(), nx.clone());
                    Formula::ForallIn(nx, get(z), Box::new(go(body, &r, fresh)))
                }
                Formula::ExistsIn(x, z, body) => {
                    let nx = fresh.derived(x);
                    let mut r = renames.clone();
                    r.insert(x.clone(), nx.clone());
                    Formula::ExistsIn(nx, get(z), Box::new(go(body, &r, fresh)))
                }
                Formula::ForallInNonpairs(x, z, body) => {
                    let nx = fresh.derived(x);
                    let mut r = renames.clone();
                    r.insert(x.clone(), nx.clone());
                    Formula::ForallInNonpairs(nx, get(z), Box::new(go(body, &r, fresh)))
                }
                Formula::ForallPairIn(x, y, d, body) => {
                    let k = fresh.next_stamp();
                    let nx = FreshNames::stamp(x, k);
                    let ny = FreshNames::stamp(y, k);
                    let mut r = renames.clone();
                    r.insert(x.clone(), nx.clone());
                    r.insert(y.clone(), ny.clone());
                    Formula::ForallPairIn(nx, ny, get(d), Box::new(go(body, &r, fresh)))
                }
                Formula::ExistsPairIn(x, y, d, body) => {
                    let k = fresh.next_stamp();
                    let nx = FreshNames::stamp(x, k);
                    let ny = FreshNames::stamp(y, k);
                    let mut r = renames.clone();
                    r.insert(x.clone(), nx.clone());
                    r.insert(y.clone(), ny.clone());
                    Formula::ExistsPairIn(nx, ny, get(d), Box::new(go(body, &r, fresh)))
                }
                atom => atom.substitute_free(renames),
            }
        }
        go(self, &BTreeMap::new(), fresh)
    }
}

/// Generator for machine-reserved fresh names of the form `base#k`. The
/// `#` character cannot appear in parsed identifiers, so these never
/// collide with source-level variables. The counter ticks once per
/// quantifier step, so both components of a pair binder share a stamp.
#[derive(Debug, Default)]
pub struct FreshNames {
    counter: u64,
}

impl FreshNames {
    pub fn new() -> FreshNames {
        FreshNames { counter: 0 }
    }

    pub fn next_stamp(&mut self) -> u64 {
        self.counter += 1;
        self.counter
    }

    /// `v` restamped with counter value `k`, keeping its sort. An existing
    /// `#k` suffix is replaced rather than stacked.
    pub fn stamp(v: &Variable, k: u64) -> Variable {
        let base: &str = v.name();
        let stem = match base.find('#') {
            Some(i) => &base[..i],
            None => base,
        };
        Variable::new(v.sort(), format!("{}#{}", stem, k))
    }

    /// Next fresh variable derived from `v`.
    pub fn derived(&mut self, v: &Variable) -> Variable {
        let k = self.next_stamp();
        Self::stamp(v, k)
    }
}

/// Free variables of `f`, split into set variables and map variables.
pub fn free_vars(f: &Formula) -> (BTreeSet<Variable>, BTreeSet<Variable>) {
    let mut set_vars = BTreeSet::new();
    let mut map_vars = BTreeSet::new();
    fn go(
        f: &Formula,
        bound: &mut Vec<Variable>,
        set_vars: &mut BTreeSet<Variable>,
        map_vars: &mut BTreeSet<Variable>,
    ) {
        let mut record = |v: &Variable, bound: &Vec<Variable>| {
            if !bound.contains(v) {
                match v.sort() {
                    Sort::Set => set_vars.insert(v.clone()),
                    Sort::Map => map_vars.insert(v.clone()),
                };
            }
        };
        match f {
            Formula::Not(a) => go(a, bound, set_vars, map_vars),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                go(a, bound, set_vars, map_vars);
                go(b, bound, set_vars, map_vars);
            }
            Formula::ForallIn(x, z, body)
            | Formula::ExistsIn(x, z, body)
            | Formula::ForallInNonpairs(x, z, body) => {
                record(z, bound);
                bound.push(x.clone());
                go(body, bound, set_vars, map_vars);
                bound.pop();
            }
            Formula::ForallPairIn(x, y, d, body) | Formula::ExistsPairIn(x, y, d, body) => {
                record(d, bound);
                bound.push(x.clone());
                bound.push(y.clone());
                go(body, bound, set_vars, map_vars);
                bound.pop();
                bound.pop();
            }
            atom => atom.for_each_variable_slot(&mut |v| record(v, bound)),
        }
    }
    go(f, &mut Vec::new(), &mut set_vars, &mut map_vars);
    (set_vars, map_vars)
}

/// All free variables of `f` in sorted order.
pub fn free_vars_ordered(f: &Formula) -> Vec<Variable> {
    let (s, m) = free_vars(f);
    s.into_iter().chain(m).collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConjunctionError {
    #[error("normalized conjunction must have at least one conjunct")]
    Empty,
    #[error("conjunct {index} is not a universal simple-prenex formula: {reason}")]
    BadConjunct { index: usize, reason: String },
    #[error("bound variable {variable} collides with a free variable of the conjunction")]
    BoundFreeClash { variable: String },
}

/// A conjunction of universal simple-prenex formulas: each conjunct has a
/// prefix of set-member quantifiers followed by pair-member quantifiers
/// over a quantifier-free matrix, no quantified variable serves as a
/// domain variable, and bound names never collide with free variables of
/// the whole conjunction. Bound names may repeat across conjuncts (each
/// conjunct is a closed scope); the normalization stream additionally
/// keeps them globally distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedConjunction {
    conjuncts: Vec<Formula>,
    options: ValidateOptions,
}

impl NormalizedConjunction {
    /// Validating constructor for the base language.
    pub fn new(conjuncts: Vec<Formula>) -> Result<NormalizedConjunction, ConjunctionError> {
        Self::with_options(conjuncts, ValidateOptions::default())
    }

    /// Like [`NormalizedConjunction::new`] but admits extension atoms in
    /// the matrices and as standalone literals.
    pub fn new_extended(
        conjuncts: Vec<Formula>,
    ) -> Result<NormalizedConjunction, ConjunctionError> {
        Self::with_options(
            conjuncts,
            ValidateOptions { allow_extensions: true, ..Default::default() },
        )
    }

    /// Validating constructor against explicit language options; used for
    /// conjunctions in the set-variables-only language.
    pub fn with_options(
        conjuncts: Vec<Formula>,
        options: ValidateOptions,
    ) -> Result<NormalizedConjunction, ConjunctionError> {
        if conjuncts.is_empty() {
            return Err(ConjunctionError::Empty);
        }
        for (index, c) in conjuncts.iter().enumerate() {
            if let Err(reason) = validate::check_universal_simple_prenex(c, options) {
                return Err(ConjunctionError::BadConjunct { index, reason });
            }
        }
        let whole = Formula::and_all(conjuncts.clone());
        let (fs, fm) = free_vars(&whole);
        for c in &conjuncts {
            for b in validate::bound_variables(c) {
                if fs.contains(&b) || fm.contains(&b) {
                    return Err(ConjunctionError::BoundFreeClash {
                        variable: b.to_string(),
                    });
                }
            }
        }
        Ok(NormalizedConjunction { conjuncts, options })
    }

    pub fn conjuncts(&self) -> &[Formula] {
        &self.conjuncts
    }

    pub fn is_extended(&self) -> bool {
        self.options.allow_extensions
    }

    pub fn language(&self) -> Language {
        self.options.language
    }

    pub fn to_formula(&self) -> Formula {
        Formula::and_all(self.conjuncts.clone())
    }

    pub fn size(&self) -> usize {
        self.to_formula().size()
    }

    /// Free variables of the conjunction, split by sort.
    pub fn free_vars(&self) -> (BTreeSet<Variable>, BTreeSet<Variable>) {
        free_vars(&self.to_formula())
    }
}

impl fmt::Display for NormalizedConjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_quantified_negation() {
        let f = parse("forall x' in x . not (x' = x')").unwrap();
        let expected = Formula::ForallIn(
            Variable::set("x'"),
            Variable::set("x"),
            Box::new(Formula::not(Formula::EqualSet(
                Variable::set("x'"),
                Variable::set("x'"),
            ))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn parse_pair_implication() {
        let f = parse("[x,y] in @f -> x in y").unwrap();
        let expected = Formula::implies(
            Formula::PairMember(Variable::set("x"), Variable::set("y"), Variable::map("f")),
            Formula::MemberSet(Variable::set("x"), Variable::set("y")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn parse_sort_errors() {
        assert!(parse("x in @f").is_err());
        assert!(parse("@f in x").is_err());
        assert!(parse("x = @f").is_err());
    }

    #[test]
    fn reserved_characters_rejected_strict_accepted_relaxed() {
        assert!(parse("x#1 in z").is_err());
        assert!(parse("p$f = p$f").is_err());
        assert!(parse_relaxed("x#1 in z").is_ok());
        assert!(parse_relaxed("p$f = p$f").is_ok());
    }

    #[test]
    fn print_examples() {
        let f = Formula::ForallIn(
            Variable::set("x"),
            Variable::set("y"),
            Box::new(Formula::EqualSet(Variable::set("x"), Variable::set("x"))),
        );
        assert_eq!(f.to_string(), "forall x in y . x = x");
        let g = parse("forall [x,y] in @f . ([x,y] in @g or x = y)").unwrap();
        assert_eq!(g.to_string(), "forall [x,y] in @f . ([x,y] in @g or x = y)");
    }

    #[test]
    fn print_parse_roundtrip_on_samples() {
        let samples = [
            "x in y",
            "x != y",
            "x notin y",
            "not (x in y and y in z)",
            "x in y or y in z and z in w",
            "x = y -> y = z -> z = w",
            "x = y <-> y = z <-> z = w",
            "(x = y -> y = z) -> z = w",
            "forall x' in x . x' in y",
            "exists [a,b] in @f . a in x",
            "forall a in nonpairs(z) . a = a",
            "[a,b] in z",
            "x sub dom(@f)",
            "y sub img(@f,x)",
            "@h sub comp(@f,@g)",
            "(forall x' in x . x' = x') and (exists y' in y . y' in x)",
        ];
        for s in samples {
            let f = parse(s).unwrap();
            let printed = f.to_string();
            let again = parse(&printed)
                .unwrap_or_else(|e| panic!("reparse of {:?} failed: {}", printed, e));
            assert_eq!(f, again, "roundtrip mismatch for {:?}", s);
        }
    }

    #[test]
    fn desugaring() {
        assert_eq!(parse("x != y").unwrap(), parse("not (x = y)").unwrap());
        assert_eq!(parse("x notin y").unwrap(), parse("not (x in y)").unwrap());
        assert_eq!(
            parse("[a,b] notin @f").unwrap(),
            parse("not ([a,b] in @f)").unwrap()
        );
    }

    #[test]
    fn validate_flags_nested_domain_variable() {
        let f = parse("forall x in y . forall z in x . z = z").unwrap();
        let diags = validate(&f, ValidateOptions::default());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::NonSimplePrenex));
    }

    #[test]
    fn validate_accepts_pair_prefix() {
        let f = parse("forall [x,y] in @f . x in y").unwrap();
        assert!(validate(&f, ValidateOptions::default()).is_empty());
    }

    #[test]
    fn validate_flags_extension_without_capability() {
        let f = parse("x sub dom(@f)").unwrap();
        let diags = validate(&f, ValidateOptions::default());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::ExtensionNotEnabled));
        let opts = ValidateOptions { allow_extensions: true, ..Default::default() };
        assert!(validate(&f, opts).is_empty());
    }

    #[test]
    fn validate_set_only_language() {
        let ok = parse("forall a in nonpairs(z) . ([a,b] in w or a = a)").unwrap();
        // b free here, fine; the point is atoms and quantifier shapes.
        let opts = ValidateOptions { language: Language::SetOnly, allow_extensions: false };
        assert!(validate(&ok, opts).is_empty());
        let bad_membership = parse("a in b").unwrap();
        assert!(!validate(&bad_membership, opts).is_empty());
        let bad_map = parse("forall [a,b] in @f . a = b").unwrap();
        assert!(!validate(&bad_map, opts).is_empty());
    }

    #[test]
    fn validate_name_used_with_two_sorts() {
        let f = parse("x in y and [a,b] in @y").unwrap();
        let diags = validate(&f, ValidateOptions::default());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::SortViolation));
    }

    #[test]
    fn free_vars_examples() {
        let f = parse("forall x in y . x in z").unwrap();
        let (s, m) = free_vars(&f);
        assert_eq!(
            s.into_iter().collect::<Vec<_>>(),
            vec![Variable::set("y"), Variable::set("z")]
        );
        assert!(m.is_empty());

        let g = parse("[x,y] in @f").unwrap();
        let (s, m) = free_vars(&g);
        assert_eq!(
            s.into_iter().collect::<Vec<_>>(),
            vec![Variable::set("x"), Variable::set("y")]
        );
        assert_eq!(m.into_iter().collect::<Vec<_>>(), vec![Variable::map("f")]);
    }

    #[test]
    fn free_vars_never_contain_bound() {
        let f = parse("forall [x,y] in @f . (x in w and exists q in w . q = x)").unwrap();
        let (s, _) = free_vars(&f);
        assert!(!s.contains(&Variable::set("x")));
        assert!(!s.contains(&Variable::set("y")));
        assert!(!s.contains(&Variable::set("q")));
        assert!(s.contains(&Variable::set("w")));
    }

    #[test]
    fn normalized_conjunction_validation() {
        let c1 = parse("forall x' in x . [x,x] in @f").unwrap();
        let c2 = parse("forall [x',y'] in @f . (x' = y' and x' in x)").unwrap();
        // Bound names repeat across conjuncts; each conjunct is closed, so
        // this is accepted.
        assert!(NormalizedConjunction::new(vec![c1.clone(), c2]).is_ok());
        // Existential conjunct rejected.
        let e = parse("exists x' in x . x' = x'").unwrap();
        assert!(NormalizedConjunction::new(vec![e]).is_err());
        // Bound name clashing with a free variable rejected.
        let clash = parse("forall x in y . x = x").unwrap();
        let uses_x_free = parse("x in y").unwrap();
        assert!(NormalizedConjunction::new(vec![clash, uses_x_free]).is_err());
        // Extension literal only allowed in extended mode.
        let ext = parse("x sub dom(@f)").unwrap();
        assert!(NormalizedConjunction::new(vec![c1.clone(), ext.clone()]).is_err());
        assert!(NormalizedConjunction::new_extended(vec![c1, ext]).is_ok());
    }

    #[test]
    fn freshen_bound_renames_every_binder() {
        let f = parse("forall x' in x . (x' in y and x in y)").unwrap();
        let mut fresh = FreshNames::new();
        let g = f.freshen_bound(&mut fresh);
        assert_eq!(g.to_string(), "forall x'#1 in x . (x'#1 in y and x in y)");
    }

    #[test]
    fn size_counts_nodes_and_variable_occurrences() {
        assert_eq!(parse("a = a").unwrap().size(), 3);
        assert_eq!(parse("[a,b] in @f").unwrap().size(), 4);
        assert_eq!(parse("forall x in y . x = x").unwrap().size(), 6);
    }
}
