//! Macro library of derived set and map constructs.
//!
//! Every construct expands into a core formula (restricted quantifiers,
//! membership and equality only), with bound variables freshened against
//! the arguments. `oracle_check` computes each construct's meaning
//! directly on hereditarily finite values, without touching the expansion
//! or the evaluator, and `oracle_sweep` compares the two over a full
//! candidate space. `rewrite_dom_literal` produces the extension-atom
//! rewrites of `x sub dom(@f)` in terms of range, composition and image.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::ast::{Formula, Sort, Variable};
use crate::hf::{universe, HFSet, HfError, PairingSpec};
use crate::semantics::{evaluate_on, EvalError, Interpretation};
use crate::solver::map_value_candidates;

/// The construct identifiers, in table order. `union(x,y,z)` reads
/// `x = y ∪ z`; `comp_subseteq(f,g,h)` reads `f ∘ g ⊆ h`, where the
/// composition pairs `(a,c)` arise from `(a,b)` in `f` and `(b,c)` in `g`;
/// `dom_subseteq(f,x)` reads `dom(f) ⊆ x`; `image_subseteq(f,x,y)` reads
/// `f[x] ⊆ y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstructName {
    EmptySet,
    Subseteq,
    Union,
    Inter,
    Diff,
    Singleton,
    MapEmpty,
    MapSubseteq,
    MapUnion,
    MapInter,
    MapDiff,
    MapSingleton,
    Inverse,
    Cartesian,
    RestrictLeft,
    RestrictRight,
    RestrictBoth,
    IdentityOn,
    Sym,
    SingleValued,
    Injective,
    Bijective,
    IsTransitive,
    IsIrreflexive,
    IsAsymmetric,
    CompSubseteq,
    DomSubseteq,
    RangeSubseteq,
    ImageSubseteq,
}

use ConstructName::*;

impl ConstructName {
    pub const ALL: [ConstructName; 29] = [
        EmptySet,
        Subseteq,
        Union,
        Inter,
        Diff,
        Singleton,
        MapEmpty,
        MapSubseteq,
        MapUnion,
        MapInter,
        MapDiff,
        MapSingleton,
        Inverse,
        Cartesian,
        RestrictLeft,
        RestrictRight,
        RestrictBoth,
        IdentityOn,
        Sym,
        SingleValued,
        Injective,
        Bijective,
        IsTransitive,
        IsIrreflexive,
        IsAsymmetric,
        CompSubseteq,
        DomSubseteq,
        RangeSubseteq,
        ImageSubseteq,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EmptySet => "empty_set",
            Subseteq => "subseteq",
            Union => "union",
            Inter => "inter",
            Diff => "diff",
            Singleton => "singleton",
            MapEmpty => "map_empty",
            MapSubseteq => "map_subseteq",
            MapUnion => "map_union",
            MapInter => "map_inter",
            MapDiff => "map_diff",
            MapSingleton => "map_singleton",
            Inverse => "inverse",
            Cartesian => "cartesian",
            RestrictLeft => "restrict_left",
            RestrictRight => "restrict_right",
            RestrictBoth => "restrict_both",
            IdentityOn => "identity_on",
            Sym => "sym",
            SingleValued => "single_valued",
            Injective => "injective",
            Bijective => "bijective",
            IsTransitive => "is_transitive",
            IsIrreflexive => "is_irreflexive",
            IsAsymmetric => "is_asymmetric",
            CompSubseteq => "comp_subseteq",
            DomSubseteq => "dom_subseteq",
            RangeSubseteq => "range_subseteq",
            ImageSubseteq => "image_subseteq",
        }
    }

    pub fn parse(s: &str) -> Option<ConstructName> {
        Self::ALL.iter().copied().find(|c| c.as_str() == s)
    }

    /// Argument sorts, in call order.
    pub fn signature(&self) -> &'static [Sort] {
        use Sort::{Map as M, Set as S};
        match self {
            EmptySet => &[S],
            Subseteq => &[S, S],
            Union | Inter | Diff => &[S, S, S],
            Singleton => &[S, S],
            MapEmpty => &[M],
            MapSubseteq => &[M, M],
            MapUnion | MapInter | MapDiff => &[M, M, M],
            MapSingleton => &[M, S, S],
            Inverse => &[M, M],
            Cartesian => &[M, S, S],
            RestrictLeft | RestrictRight => &[M, M, S],
            RestrictBoth => &[M, M, S, S],
            IdentityOn => &[M, S],
            Sym => &[M, M],
            SingleValued | Injective | Bijective => &[M],
            IsTransitive | IsIrreflexive | IsAsymmetric => &[M],
            CompSubseteq => &[M, M, M],
            DomSubseteq => &[M, S],
            RangeSubseteq => &[M, S],
            ImageSubseteq => &[M, S, S],
        }
    }
}

impl std::fmt::Display for ConstructName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConstructError {
    #[error("unknown construct `{0}`")]
    UnknownName(String),
    #[error("{name} takes {expected} arguments, got {got}")]
    Arity { name: ConstructName, expected: usize, got: usize },
    #[error("{name}: argument {index} must be a {expected:?} variable, got {got}")]
    ArgumentSort { name: ConstructName, index: usize, expected: Sort, got: String },
    #[error("{name}: arguments must be distinct variables")]
    DuplicateArgument { name: ConstructName },
}

/// A sort-checked construct application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructCall {
    name: ConstructName,
    args: Vec<Variable>,
}

impl ConstructCall {
    pub fn new(name: ConstructName, args: Vec<Variable>) -> Result<ConstructCall, ConstructError> {
        let sig = name.signature();
        if args.len() != sig.len() {
            return Err(ConstructError::Arity { name, expected: sig.len(), got: args.len() });
        }
        for (index, (arg, expected)) in args.iter().zip(sig).enumerate() {
            if arg.sort() != *expected {
                return Err(ConstructError::ArgumentSort {
                    name,
                    index,
                    expected: *expected,
                    got: arg.to_string(),
                });
            }
        }
        for (i, a) in args.iter().enumerate() {
            if args[i + 1..].contains(a) {
                return Err(ConstructError::DuplicateArgument { name });
            }
        }
        Ok(ConstructCall { name, args })
    }

    pub fn name(&self) -> ConstructName {
        self.name
    }

    pub fn args(&self) -> &[Variable] {
        &self.args
    }
}

/// Bound-variable factory for expansions: suggests the table's primed
/// names and keeps priming until the name is unused.
struct Binders {
    used: BTreeSet<String>,
}

impl Binders {
    fn seeded(args: &[Variable]) -> Binders {
        Binders { used: args.iter().map(|a| a.name().to_string()).collect() }
    }

    fn fresh(&mut self, suggestion: &str) -> Variable {
        let mut name = suggestion.to_string();
        while self.used.contains(&name) {
            name.push('\'');
        }
        self.used.insert(name.clone());
        Variable::set(name)
    }
}

fn member(a: &Variable, b: &Variable) -> Formula {
    Formula::MemberSet(a.clone(), b.clone())
}

fn eq(a: &Variable, b: &Variable) -> Formula {
    Formula::EqualSet(a.clone(), b.clone())
}

fn pair_in(x: &Variable, y: &Variable, f: &Variable) -> Formula {
    Formula::PairMember(x.clone(), y.clone(), f.clone())
}

fn forall_in(x: &Variable, z: &Variable, body: Formula) -> Formula {
    Formula::ForallIn(x.clone(), z.clone(), Box::new(body))
}

fn forall_pair(x: &Variable, y: &Variable, f: &Variable, body: Formula) -> Formula {
    Formula::ForallPairIn(x.clone(), y.clone(), f.clone(), Box::new(body))
}

fn subseteq_formula(x: &Variable, y: &Variable, b: &mut Binders) -> Formula {
    let e = b.fresh(&format!("{}'", x.name()));
    forall_in(&e, x, member(&e, y))
}

fn map_subseteq_formula(f: &Variable, g: &Variable, b: &mut Binders) -> Formula {
    let x = b.fresh("x");
    let y = b.fresh("y");
    forall_pair(&x, &y, f, pair_in(&x, &y, g))
}

/// Expands a construct into a core formula, recursively unfolding the
/// containment shorthands of composite rows. Bound variables never
/// capture the arguments.
pub fn expand(call: &ConstructCall) -> Formula {
    let mut b = Binders::seeded(&call.args);
    let a = &call.args;
    match call.name {
        EmptySet => {
            let x = b.fresh(&format!("{}'", a[0].name()));
            forall_in(&x, &a[0], Formula::not(eq(&x, &x)))
        }
        Subseteq => subseteq_formula(&a[0], &a[1], &mut b),
        Union => Formula::and_all(vec![
            subseteq_formula(&a[1], &a[0], &mut b),
            subseteq_formula(&a[2], &a[0], &mut b),
            {
                let x = b.fresh(&format!("{}'", a[0].name()));
                forall_in(&x, &a[0], Formula::or(member(&x, &a[1]), member(&x, &a[2])))
            },
        ]),
        Inter => Formula::and_all(vec![
            subseteq_formula(&a[0], &a[1], &mut b),
            subseteq_formula(&a[0], &a[2], &mut b),
            {
                let y = b.fresh(&format!("{}'", a[1].name()));
                forall_in(&y, &a[1], Formula::implies(member(&y, &a[2]), member(&y, &a[0])))
            },
        ]),
        Diff => Formula::and_all(vec![
            subseteq_formula(&a[0], &a[1], &mut b),
            {
                let y = b.fresh(&format!("{}'", a[1].name()));
                forall_in(
                    &y,
                    &a[1],
                    Formula::iff(member(&y, &a[0]), Formula::not(member(&y, &a[2]))),
                )
            },
        ]),
        Singleton => Formula::and(member(&a[1], &a[0]), {
            let x = b.fresh(&format!("{}'", a[0].name()));
            forall_in(&x, &a[0], eq(&x, &a[1]))
        }),
        MapEmpty => {
            let x = b.fresh("x");
            let y = b.fresh("y");
            forall_pair(&x, &y, &a[0], Formula::not(eq(&x, &x)))
        }
        MapSubseteq => map_subseteq_formula(&a[0], &a[1], &mut b),
        MapUnion => Formula::and_all(vec![
            map_subseteq_formula(&a[1], &a[0], &mut b),
            map_subseteq_formula(&a[2], &a[0], &mut b),
            {
                let x = b.fresh("x");
                let y = b.fresh("y");
                forall_pair(
                    &x,
                    &y,
                    &a[0],
                    Formula::or(pair_in(&x, &y, &a[1]), pair_in(&x, &y, &a[2])),
                )
            },
        ]),
        MapInter => Formula::and_all(vec![
            map_subseteq_formula(&a[0], &a[1], &mut b),
            map_subseteq_formula(&a[0], &a[2], &mut b),
            {
                let x = b.fresh("x");
                let y = b.fresh("y");
                forall_pair(
                    &x,
                    &y,
                    &a[1],
                    Formula::implies(pair_in(&x, &y, &a[2]), pair_in(&x, &y, &a[0])),
                )
            },
        ]),
        MapDiff => Formula::and_all(vec![
            map_subseteq_formula(&a[0], &a[1], &mut b),
            {
                let x = b.fresh("x");
                let y = b.fresh("y");
                forall_pair(
                    &x,
                    &y,
                    &a[1],
                    Formula::iff(pair_in(&x, &y, &a[0]), Formula::not(pair_in(&x, &y, &a[2]))),
                )
            },
        ]),
        MapSingleton => Formula::and(pair_in(&a[1], &a[2], &a[0]), {
            let x = b.fresh(&format!("{}'", a[1].name()));
            let y = b.fresh(&format!("{}'", a[2].name()));
            forall_pair(&x, &y, &a[0], Formula::and(eq(&x, &a[1]), eq(&y, &a[2])))
        }),
        Inverse => Formula::and(
            {
                let x = b.fresh("x");
                let y = b.fresh("y");
                forall_pair(&x, &y, &a[0], pair_in(&y, &x, &a[1]))
            },
            {
                let x = b.fresh("x");
                let y = b.fresh("y");
                forall_pair(&x, &y, &a[1], pair_in(&y, &x, &a[0]))
            },
        ),
        Cartesian => Formula::and(
            {
                let x = b.fresh(&format!("{}'", a[1].name()));
                let y = b.fresh(&format!("{}'", a[2].name()));
                forall_in(&x, &a[1], forall_in(&y, &a[2], pair_in(&x, &y, &a[0])))
            },
            {
                let x = b.fresh(&format!("{}'", a[1].name()));
                let y = b.fresh(&format!("{}'", a[2].name()));
                forall_pair(&x, &y, &a[0], Formula::and(member(&x, &a[1]), member(&y, &a[2])))
            },
        ),
        RestrictLeft => Formula::and(map_subseteq_formula(&a[0], &a[1], &mut b), {
            let x = b.fresh("x'");
            let y = b.fresh("y'");
            forall_pair(
                &x,
                &y,
                &a[1],
                Formula::iff(pair_in(&x, &y, &a[0]), member(&x, &a[2])),
            )
        }),
        RestrictRight => Formula::and(map_subseteq_formula(&a[0], &a[1], &mut b), {
            let x = b.fresh("x'");
            let y = b.fresh("y'");
            forall_pair(
                &x,
                &y,
                &a[1],
                Formula::iff(pair_in(&x, &y, &a[0]), member(&y, &a[2])),
            )
        }),
        RestrictBoth => Formula::and(map_subseteq_formula(&a[0], &a[1], &mut b), {
            let x = b.fresh("x'");
            let y = b.fresh("y'");
            forall_pair(
                &x,
                &y,
                &a[1],
                Formula::iff(
                    pair_in(&x, &y, &a[0]),
                    Formula::and(member(&x, &a[2]), member(&y, &a[3])),
                ),
            )
        }),
        IdentityOn => Formula::and(
            {
                let x = b.fresh(&format!("{}'", a[1].name()));
                forall_in(&x, &a[1], pair_in(&x, &x, &a[0]))
            },
            {
                let x = b.fresh(&format!("{}'", a[1].name()));
                let y = b.fresh("y'");
                forall_pair(&x, &y, &a[0], Formula::and(eq(&x, &y), member(&x, &a[1])))
            },
        ),
        Sym => Formula::and(
            {
                let x = b.fresh("x");
                let y = b.fresh("y");
                forall_pair(
                    &x,
                    &y,
                    &a[0],
                    Formula::or(pair_in(&x, &y, &a[1]), pair_in(&y, &x, &a[1])),
                )
            },
            {
                let x = b.fresh("x");
                let y = b.fresh("y");
                forall_pair(
                    &x,
                    &y,
                    &a[1],
                    Formula::and(pair_in(&x, &y, &a[0]), pair_in(&y, &x, &a[0])),
                )
            },
        ),
        SingleValued | Injective | Bijective => {
            let x = b.fresh("x");
            let y = b.fresh("y");
            let x2 = b.fresh("x'");
            let y2 = b.fresh("y'");
            let matrix = match call.name {
                SingleValued => Formula::implies(eq(&x, &x2), eq(&y, &y2)),
                Injective => Formula::implies(eq(&y, &y2), eq(&x, &x2)),
                _ => Formula::iff(eq(&x, &x2), eq(&y, &y2)),
            };
            forall_pair(&x, &y, &a[0], forall_pair(&x2, &y2, &a[0], matrix))
        }
        IsTransitive => {
            let x = b.fresh("x");
            let y = b.fresh("y");
            let x2 = b.fresh("x'");
            let y2 = b.fresh("y'");
            forall_pair(
                &x,
                &y,
                &a[0],
                forall_pair(
                    &x2,
                    &y2,
                    &a[0],
                    Formula::implies(eq(&y, &x2), pair_in(&x, &y2, &a[0])),
                ),
            )
        }
        IsIrreflexive => {
            let x = b.fresh("x");
            let y = b.fresh("y");
            forall_pair(&x, &y, &a[0], Formula::not(eq(&x, &y)))
        }
        IsAsymmetric => {
            let x = b.fresh("x");
            let y = b.fresh("y");
            forall_pair(
                &x,
                &y,
                &a[0],
                Formula::or(eq(&x, &y), Formula::not(pair_in(&y, &x, &a[0]))),
            )
        }
        CompSubseteq => {
            let x = b.fresh("x");
            let y = b.fresh("y");
            let x2 = b.fresh("x'");
            let y2 = b.fresh("y'");
            forall_pair(
                &x,
                &y,
                &a[0],
                forall_pair(
                    &x2,
                    &y2,
                    &a[1],
                    Formula::implies(eq(&y, &x2), pair_in(&x, &y2, &a[2])),
                ),
            )
        }
        DomSubseteq => {
            let x = b.fresh("x'");
            let y = b.fresh("y'");
            forall_pair(&x, &y, &a[0], member(&x, &a[1]))
        }
        RangeSubseteq => {
            let x = b.fresh("x'");
            let y = b.fresh("y'");
            forall_pair(&x, &y, &a[0], member(&y, &a[1]))
        }
        ImageSubseteq => {
            let x = b.fresh("x'");
            let y = b.fresh("y'");
            forall_pair(
                &x,
                &y,
                &a[0],
                Formula::implies(member(&x, &a[1]), member(&y, &a[2])),
            )
        }
    }
}

fn decompose(value: &HFSet, pairing: &PairingSpec) -> Vec<(HFSet, HFSet)> {
    value
        .children()
        .iter()
        .map(|w| pairing.unpair(w).expect("map value member is not a pair"))
        .collect()
}

/// Direct semantic check of a construct on hereditarily finite values,
/// bypassing the expansion and the evaluator entirely.
pub fn oracle_check(call: &ConstructCall, i: &Interpretation) -> Result<bool, EvalError> {
    let mut values = Vec::with_capacity(call.args.len());
    for arg in &call.args {
        values.push(
            i.get(arg)
                .ok_or_else(|| EvalError::UnassignedVariable(arg.to_string()))?
                .clone(),
        );
    }
    Ok(oracle_check_values(call.name, &values, i.pairing()))
}

pub(crate) fn oracle_check_values(name: ConstructName, v: &[HFSet], pairing: &PairingSpec) -> bool {
    let pair = |u: &HFSet, w: &HFSet| pairing.pair(u, w);
    match name {
        EmptySet => v[0].is_empty(),
        Subseteq => v[0].children().iter().all(|c| v[1].contains(c)),
        Union => v[0] == v[1].union(&v[2]),
        Inter => v[0] == v[1].intersection(&v[2]),
        Diff => v[0] == v[1].difference(&v[2]),
        Singleton => v[0] == HFSet::singleton(v[1].clone()),
        MapEmpty => v[0].is_empty(),
        MapSubseteq => v[0].children().iter().all(|c| v[1].contains(c)),
        MapUnion => v[0] == v[1].union(&v[2]),
        MapInter => v[0] == v[1].intersection(&v[2]),
        MapDiff => v[0] == v[1].difference(&v[2]),
        MapSingleton => v[0] == HFSet::singleton(pair(&v[1], &v[2])),
        Inverse => {
            let inverted =
                HFSet::from_children(decompose(&v[1], pairing).iter().map(|(a, c)| pair(c, a)));
            v[0] == inverted
        }
        Cartesian => {
            let mut product = Vec::new();
            for u in v[1].children() {
                for w in v[2].children() {
                    product.push(pair(u, w));
                }
            }
            v[0] == HFSet::from_children(product)
        }
        RestrictLeft => {
            let filtered = HFSet::from_children(
                decompose(&v[1], pairing)
                    .iter()
                    .filter(|(a, _)| v[2].contains(a))
                    .map(|(a, c)| pair(a, c)),
            );
            v[0] == filtered
        }
        RestrictRight => {
            let filtered = HFSet::from_children(
                decompose(&v[1], pairing)
                    .iter()
                    .filter(|(_, c)| v[2].contains(c))
                    .map(|(a, c)| pair(a, c)),
            );
            v[0] == filtered
        }
        RestrictBoth => {
            let filtered = HFSet::from_children(
                decompose(&v[1], pairing)
                    .iter()
                    .filter(|(a, c)| v[2].contains(a) && v[3].contains(c))
                    .map(|(a, c)| pair(a, c)),
            );
            v[0] == filtered
        }
        IdentityOn => {
            let diagonal = HFSet::from_children(v[1].children().iter().map(|u| pair(u, u)));
            v[0] == diagonal
        }
        Sym => {
            // Both containment directions of the table row, verbatim: every
            // pair of the left map appears in the right map in at least one
            // orientation, and every pair of the right map appears in the
            // left map in both orientations.
            let left = decompose(&v[0], pairing);
            let right = decompose(&v[1], pairing);
            left.iter()
                .all(|(a, c)| v[1].contains(&pair(a, c)) || v[1].contains(&pair(c, a)))
                && right
                    .iter()
                    .all(|(a, c)| v[0].contains(&pair(a, c)) && v[0].contains(&pair(c, a)))
        }
        SingleValued => {
            let ps = decompose(&v[0], pairing);
            ps.iter()
                .all(|(a, c)| ps.iter().all(|(a2, c2)| a != a2 || c == c2))
        }
        Injective => {
            let ps = decompose(&v[0], pairing);
            ps.iter()
                .all(|(a, c)| ps.iter().all(|(a2, c2)| c != c2 || a == a2))
        }
        Bijective => {
            let ps = decompose(&v[0], pairing);
            ps.iter()
                .all(|(a, c)| ps.iter().all(|(a2, c2)| (a == a2) == (c == c2)))
        }
        IsTransitive => {
            let ps = decompose(&v[0], pairing);
            ps.iter().all(|(a, c)| {
                ps.iter()
                    .all(|(a2, c2)| c != a2 || v[0].contains(&pair(a, c2)))
            })
        }
        IsIrreflexive => decompose(&v[0], pairing).iter().all(|(a, c)| a != c),
        IsAsymmetric => decompose(&v[0], pairing)
            .iter()
            .all(|(a, c)| a == c || !v[0].contains(&pair(c, a))),
        CompSubseteq => {
            let fs = decompose(&v[0], pairing);
            let gs = decompose(&v[1], pairing);
            fs.iter().all(|(a, c)| {
                gs.iter()
                    .all(|(a2, c2)| c != a2 || v[2].contains(&pair(a, c2)))
            })
        }
        DomSubseteq => decompose(&v[0], pairing).iter().all(|(a, _)| v[1].contains(a)),
        RangeSubseteq => decompose(&v[0], pairing).iter().all(|(_, c)| v[1].contains(c)),
        ImageSubseteq => decompose(&v[0], pairing)
            .iter()
            .all(|(a, c)| !v[1].contains(a) || v[2].contains(c)),
    }
}

/// Which rewrite of a positive `x sub dom(@f)` literal to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomRewriteKind {
    /// `x sub ran(@inv$f)` with `inv$f = f` inverted. Equivalent.
    Range,
    /// `@id$x sub comp(@f, @inv$f)` with `id$x` the identity on `x`.
    /// Equivalent.
    Composition,
    /// `x sub img(@inv$f, rng$f)` with a fresh witness set `rng$f`.
    /// Equisatisfiable only: a model of the dom literal extends to one of
    /// the rewrite by taking `rng$f` to be the range of `f`.
    Image,
}

/// Rewrites `x sub dom(@f)` into an extension literal of the requested
/// kind plus the defining expansions for the auxiliary variables
/// (`inv$f`, `id$x`, `rng$f`), which live in the reserved `$` namespace.
pub fn rewrite_dom_literal(kind: DomRewriteKind, x: &Variable, f: &Variable) -> Formula {
    assert_eq!(x.sort(), Sort::Set, "dom literal needs a set variable");
    assert_eq!(f.sort(), Sort::Map, "dom literal needs a map variable");
    let inv = Variable::map(format!("inv${}", f.name()));
    let inverse_def = expand(
        &ConstructCall::new(Inverse, vec![inv.clone(), f.clone()]).expect("sorts fixed"),
    );
    match kind {
        DomRewriteKind::Range => {
            Formula::and(inverse_def, Formula::SubRange(x.clone(), inv))
        }
        DomRewriteKind::Composition => {
            let id = Variable::map(format!("id${}", x.name()));
            let id_def = expand(
                &ConstructCall::new(IdentityOn, vec![id.clone(), x.clone()]).expect("sorts fixed"),
            );
            Formula::and_all(vec![
                inverse_def,
                id_def,
                Formula::SubComp(id, f.clone(), inv),
            ])
        }
        DomRewriteKind::Image => {
            let witness = Variable::set(format!("rng${}", f.name()));
            Formula::and(inverse_def, Formula::SubImage(x.clone(), inv, witness))
        }
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Universe(#[from] HfError),
}

/// Outcome of comparing `evaluate(expand(row))` against `oracle_check`
/// over a full candidate space.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub name: ConstructName,
    pub interpretations: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<String>,
}

/// Canonical argument variables for a row: set arguments `x, y, z, w`,
/// map arguments `f, g, h`.
pub fn canonical_call(name: ConstructName) -> ConstructCall {
    let mut set_names = ["x", "y", "z", "w"].iter();
    let mut map_names = ["f", "g", "h"].iter();
    let args = name
        .signature()
        .iter()
        .map(|sort| match sort {
            Sort::Set => Variable::set(*set_names.next().expect("enough set names")),
            Sort::Map => Variable::map(*map_names.next().expect("enough map names")),
        })
        .collect();
    ConstructCall::new(name, args).expect("canonical arguments are sort-correct")
}

/// Compares the expansion against the direct oracle for every
/// interpretation with set arguments in the given universe level and map
/// arguments holding at most `max_pairs` Kuratowski pairs over that
/// universe.
pub fn oracle_sweep(
    name: ConstructName,
    universe_level: u32,
    max_pairs: usize,
) -> Result<SweepReport, SweepError> {
    let call = canonical_call(name);
    let formula = expand(&call);
    let elements = universe(universe_level)?;
    let map_candidates = map_value_candidates(&elements, max_pairs);

    // Sorted slot list for the evaluator: set variables sort before maps.
    let mut slots: Vec<Variable> = call.args.to_vec();
    slots.sort();
    let candidate_counts: Vec<u64> = slots
        .iter()
        .map(|v| match v.sort() {
            Sort::Set => elements.len() as u64,
            Sort::Map => map_candidates.len() as u64,
        })
        .collect();
    let total: u64 = candidate_counts.iter().product();
    // Argument order for the oracle (call order, not sorted order).
    let arg_slot: Vec<usize> = call
        .args
        .iter()
        .map(|a| slots.iter().position(|s| s == a).unwrap())
        .collect();

    let pairing = PairingSpec::Kuratowski;
    let decode_value = |slot: usize, idx: u64| -> HFSet {
        match slots[slot].sort() {
            Sort::Set => elements[idx as usize].clone(),
            Sort::Map => map_candidates[idx as usize].clone(),
        }
    };

    let (mismatches, first) = (0..total)
        .into_par_iter()
        .fold(
            || (0u64, None::<u64>),
            |(count, first), index| {
                let mut rest = index;
                let mut assignment: Vec<(Variable, HFSet)> = Vec::with_capacity(slots.len());
                for slot in (0..slots.len()).rev() {
                    let c = candidate_counts[slot];
                    let digit = rest % c;
                    rest /= c;
                    assignment.push((slots[slot].clone(), decode_value(slot, digit)));
                }
                assignment.reverse();
                let evaluated = evaluate_on(&pairing, &assignment, &formula, false)
                    .expect("sweep assignments are total and pair-aware");
                let values: Vec<HFSet> =
                    arg_slot.iter().map(|s| assignment[*s].1.clone()).collect();
                let direct = oracle_check_values(name, &values, &pairing);
                if evaluated != direct {
                    (count + 1, Some(first.unwrap_or(index).min(index)))
                } else {
                    (count, first)
                }
            },
        )
        .reduce(
            || (0u64, None),
            |(c1, f1), (c2, f2)| {
                let first = match (f1, f2) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                (c1 + c2, first)
            },
        );

    let first_mismatch = first.map(|index| {
        let mut rest = index;
        let mut parts = Vec::new();
        for slot in (0..slots.len()).rev() {
            let c = candidate_counts[slot];
            let digit = rest % c;
            rest /= c;
            parts.push(format!("{} = {}", slots[slot], decode_value(slot, digit)));
        }
        parts.reverse();
        parts.join(", ")
    });

    Ok(SweepReport { name, interpretations: total, mismatches, first_mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{validate, ValidateOptions};
    use crate::semantics::{evaluate, Interpretation};

    fn e() -> HFSet {
        HFSet::empty()
    }

    #[test]
    fn twenty_nine_rows() {
        assert_eq!(ConstructName::ALL.len(), 29);
        for name in ConstructName::ALL {
            assert_eq!(ConstructName::parse(name.as_str()), Some(name));
        }
    }

    #[test]
    fn expansion_examples() {
        let call = canonical_call(Union);
        assert_eq!(
            expand(&call).to_string(),
            "(forall y' in y . y' in x) and (forall z' in z . z' in x) and \
             (forall x' in x . (x' in y or x' in z))"
        );
        let sv = canonical_call(SingleValued);
        assert_eq!(
            expand(&sv).to_string(),
            "forall [x,y] in @f . forall [x',y'] in @f . (x = x' -> y = y')"
        );
        let empty = canonical_call(EmptySet);
        assert_eq!(expand(&empty).to_string(), "forall x' in x . not x' = x'");
    }

    #[test]
    fn expansions_validate_and_use_core_atoms_only(#[allow(unused)] /* keep signature plain */: ()) {
    }

    #[test]
    fn all_expansions_validate() {
        for name in ConstructName::ALL {
            let f = expand(&canonical_call(name));
            let diags = validate(&f, ValidateOptions::default());
            assert!(diags.is_empty(), "{}: {:?}", name, diags);
            assert!(!f.has_extension_atoms());
            assert!(!f.has_nonpairs());
        }
    }

    #[test]
    fn bound_variables_avoid_argument_capture() {
        // Arguments named like the table's bound variables still expand
        // without capture.
        let call = ConstructCall::new(
            Subseteq,
            vec![Variable::set("x'"), Variable::set("x''")],
        )
        .unwrap();
        let f = expand(&call);
        assert_eq!(f.to_string(), "forall x''' in x' . x''' in x''");
    }

    #[test]
    fn oracle_union_example() {
        let x = Variable::set("x");
        let y = Variable::set("y");
        let z = Variable::set("z");
        let i = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![
                (x.clone(), HFSet::from_children(vec![e(), HFSet::singleton(e())])),
                (y.clone(), HFSet::singleton(e())),
                (z.clone(), HFSet::singleton(HFSet::singleton(e()))),
            ],
        )
        .unwrap();
        let call = ConstructCall::new(Union, vec![x, y, z]).unwrap();
        assert_eq!(oracle_check(&call, &i), Ok(true));
    }

    #[test]
    fn oracle_inverse_example() {
        let f = Variable::map("f");
        let g = Variable::map("g");
        let se = HFSet::singleton(e());
        let i = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![
                (f.clone(), HFSet::singleton(HFSet::kur_pair(&e(), &se))),
                (g.clone(), HFSet::singleton(HFSet::kur_pair(&se, &e()))),
            ],
        )
        .unwrap();
        let call = ConstructCall::new(Inverse, vec![f, g]).unwrap();
        assert_eq!(oracle_check(&call, &i), Ok(true));
    }

    #[test]
    fn sort_checking() {
        assert!(matches!(
            ConstructCall::new(Union, vec![Variable::set("x"), Variable::set("y")]),
            Err(ConstructError::Arity { .. })
        ));
        assert!(matches!(
            ConstructCall::new(
                Union,
                vec![Variable::map("f"), Variable::set("y"), Variable::set("z")]
            ),
            Err(ConstructError::ArgumentSort { .. })
        ));
        assert!(matches!(
            ConstructCall::new(Subseteq, vec![Variable::set("x"), Variable::set("x")]),
            Err(ConstructError::DuplicateArgument { .. })
        ));
    }

    #[test]
    fn quick_sweep_of_a_few_rows() {
        // The full sweep of every row is the acceptance suite's job; spot
        // check two cheap rows here.
        for name in [Subseteq, MapSubseteq, IsIrreflexive] {
            let report = oracle_sweep(name, 2, 2).unwrap();
            assert_eq!(report.mismatches, 0, "{:?}", report.first_mismatch);
            assert!(report.interpretations > 0);
        }
    }

    #[test]
    fn dom_rewrites_shape() {
        let x = Variable::set("x");
        let f = Variable::map("f");
        let range = rewrite_dom_literal(DomRewriteKind::Range, &x, &f);
        assert!(range.has_extension_atoms());
        let opts = ValidateOptions { allow_extensions: true, ..Default::default() };
        assert!(validate(&range, opts).is_empty());
        let comp = rewrite_dom_literal(DomRewriteKind::Composition, &x, &f);
        assert!(validate(&comp, opts).is_empty());
        let image = rewrite_dom_literal(DomRewriteKind::Image, &x, &f);
        assert!(validate(&image, opts).is_empty());
    }

    #[test]
    fn range_rewrite_semantics_on_one_case() {
        let x = Variable::set("x");
        let f = Variable::map("f");
        let inv = Variable::map("inv$f");
        let se = HFSet::singleton(e());
        // f = {(0, {0})}: dom(f) = {0}; x = {0} is included.
        let i = Interpretation::with_assignments(
            PairingSpec::Kuratowski,
            vec![
                (x.clone(), HFSet::singleton(e())),
                (f.clone(), HFSet::singleton(HFSet::kur_pair(&e(), &se))),
                (inv.clone(), HFSet::singleton(HFSet::kur_pair(&se, &e()))),
            ],
        )
        .unwrap();
        let lit = Formula::SubDom(x.clone(), f.clone());
        let rewrite = rewrite_dom_literal(DomRewriteKind::Range, &x, &f);
        let a = crate::semantics::extended_evaluate(&i, &lit).unwrap();
        let b = crate::semantics::extended_evaluate(&i, &rewrite).unwrap();
        assert!(a && b);
    }
}
