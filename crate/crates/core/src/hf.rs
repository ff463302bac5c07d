//! Hereditarily finite sets in canonical form, plus pairing functions.
//!
//! Every [`HFSet`] is kept canonical: children are deduplicated and sorted
//! under a fixed total order (shorter child list first, then elementwise).
//! Two values are extensionally equal exactly when they are structurally
//! identical, so equality, hashing and ordering are cheap and deterministic.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Universe levels above this are refused unless the caller raises the cap;
/// level 5 already has 2^16 members.
pub const DEFAULT_UNIVERSE_CAP: u32 = 4;

/// Node budget for a single `HFSet::parse` call.
pub const DEFAULT_PARSE_NODE_CAP: usize = 1_000_000;

/// Nesting budget for a single `HFSet::parse` call.
pub const DEFAULT_PARSE_DEPTH_CAP: usize = 512;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HfError {
    #[error("universe level {level} exceeds cap {cap}")]
    UniverseCapExceeded { level: u32, cap: u32 },
    #[error("set literal exceeds depth limit {limit}")]
    TooDeep { limit: usize },
    #[error("set literal exceeds node limit {limit}")]
    TooLarge { limit: usize },
    #[error("set literal syntax error at byte {at}: {message}")]
    Syntax { at: usize, message: String },
}

struct Node {
    children: Box<[HFSet]>,
    hash: u64,
    rank: u32,
}

/// A hereditarily finite set in canonical (deduplicated, sorted) form.
#[derive(Clone)]
pub struct HFSet(Arc<Node>);

fn mix(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^ (h >> 33)
}

impl HFSet {
    /// The empty set.
    pub fn empty() -> HFSet {
        thread_local! {
            static EMPTY: HFSet = HFSet::make(Vec::new());
        }
        EMPTY.with(|e| e.clone())
    }

    fn make(children: Vec<HFSet>) -> HFSet {
        let mut hash = 0x9e37_79b9_7f4a_7c15u64 ^ (children.len() as u64);
        let mut rank = 1u32;
        for c in &children {
            hash = mix(hash.wrapping_add(c.0.hash));
            rank = rank.max(c.0.rank + 1);
        }
        HFSet(Arc::new(Node {
            children: children.into_boxed_slice(),
            hash,
            rank,
        }))
    }

    /// Canonicalizing constructor: sorts and deduplicates the given members.
    /// Idempotent; building from an already-canonical child list returns an
    /// equal value.
    pub fn from_children<I: IntoIterator<Item = HFSet>>(children: I) -> HFSet {
        let mut v: Vec<HFSet> = children.into_iter().collect();
        v.sort();
        v.dedup();
        HFSet::make(v)
    }

    pub fn singleton(x: HFSet) -> HFSet {
        HFSet::make(vec![x])
    }

    /// The unordered set `{a, b}` (collapses to a singleton when `a == b`).
    pub fn doubleton(a: HFSet, b: HFSet) -> HFSet {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => HFSet::make(vec![a, b]),
            std::cmp::Ordering::Equal => HFSet::make(vec![a]),
            std::cmp::Ordering::Greater => HFSet::make(vec![b, a]),
        }
    }

    pub fn children(&self) -> &[HFSet] {
        &self.0.children
    }

    pub fn len(&self) -> usize {
        self.0.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.children.is_empty()
    }

    /// Least universe level this set belongs to; the empty set has rank 1.
    pub fn rank(&self) -> u32 {
        self.0.rank
    }

    /// Membership test against the canonical child list.
    pub fn contains(&self, x: &HFSet) -> bool {
        self.0.children.binary_search(x).is_ok()
    }

    pub fn union(&self, other: &HFSet) -> HFSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(self.children());
        v.extend_from_slice(other.children());
        HFSet::from_children(v)
    }

    pub fn intersection(&self, other: &HFSet) -> HFSet {
        HFSet::make(
            self.children()
                .iter()
                .filter(|c| other.contains(c))
                .cloned()
                .collect(),
        )
    }

    pub fn difference(&self, other: &HFSet) -> HFSet {
        HFSet::make(
            self.children()
                .iter()
                .filter(|c| !other.contains(c))
                .cloned()
                .collect(),
        )
    }

    /// Kuratowski pair `{{u}, {u, v}}`.
    pub fn kur_pair(u: &HFSet, v: &HFSet) -> HFSet {
        thread_local! {
            static CACHE: RefCell<HashMap<(HFSet, HFSet), HFSet>> = RefCell::new(HashMap::new());
        }
        CACHE.with(|c| {
            if let Some(hit) = c.borrow().get(&(u.clone(), v.clone())) {
                return hit.clone();
            }
            let pair = HFSet::doubleton(HFSet::singleton(u.clone()), HFSet::doubleton(u.clone(), v.clone()));
            c.borrow_mut().insert((u.clone(), v.clone()), pair.clone());
            pair
        })
    }

    /// Inverse of [`HFSet::kur_pair`]: `Some((u, v))` exactly when `self`
    /// is `{{u}, {u, v}}`.
    pub fn kur_unpair(&self) -> Option<(HFSet, HFSet)> {
        match self.children() {
            // {{u}} = kur_pair(u, u)
            [a] => match a.children() {
                [u] => Some((u.clone(), u.clone())),
                _ => None,
            },
            // Canonical order puts the shorter child first, so a singleton
            // {u} can only be the first component here.
            [a, b] => match (a.children(), b.children()) {
                ([u], [p, q]) => {
                    if u == p {
                        Some((u.clone(), q.clone()))
                    } else if u == q {
                        Some((u.clone(), p.clone()))
                    } else {
                        None
                    }
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Parses the nested-bracket notation, e.g. `{}` or `{{},{{}}}`.
    pub fn parse(text: &str) -> Result<HFSet, HfError> {
        parse_set(text, DEFAULT_PARSE_DEPTH_CAP, DEFAULT_PARSE_NODE_CAP)
    }
}

impl PartialEq for HFSet {
    fn eq(&self, other: &HFSet) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        self.0.hash == other.0.hash
            && self.0.rank == other.0.rank
            && self.0.children == other.0.children
    }
}

impl Eq for HFSet {}

impl std::hash::Hash for HFSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for HFSet {
    fn partial_cmp(&self, other: &HFSet) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HFSet {
    /// Total order: fewer members first, then elementwise recursion over the
    /// canonical child lists.
    fn cmp(&self, other: &HFSet) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return std::cmp::Ordering::Equal;
        }
        self.len().cmp(&other.len()).then_with(|| {
            for (a, b) in self.children().iter().zip(other.children()) {
                match a.cmp(b) {
                    std::cmp::Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            std::cmp::Ordering::Equal
        })
    }
}

impl fmt::Display for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.children().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", c)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn parse_set(text: &str, depth_cap: usize, node_cap: usize) -> Result<HFSet, HfError> {
    struct P<'a> {
        bytes: &'a [u8],
        at: usize,
        nodes: usize,
        depth_cap: usize,
        node_cap: usize,
    }
    impl<'a> P<'a> {
        fn skip_ws(&mut self) {
            while self.at < self.bytes.len() && self.bytes[self.at].is_ascii_whitespace() {
                self.at += 1;
            }
        }
        fn set(&mut self, depth: usize) -> Result<HFSet, HfError> {
            if depth > self.depth_cap {
                return Err(HfError::TooDeep { limit: self.depth_cap });
            }
            self.nodes += 1;
            if self.nodes > self.node_cap {
                return Err(HfError::TooLarge { limit: self.node_cap });
            }
            self.skip_ws();
            if self.bytes.get(self.at) != Some(&b'{') {
                return Err(HfError::Syntax {
                    at: self.at,
                    message: "expected '{'".into(),
                });
            }
            self.at += 1;
            let mut children = Vec::new();
            self.skip_ws();
            if self.bytes.get(self.at) == Some(&b'}') {
                self.at += 1;
                return Ok(HFSet::from_children(children));
            }
            loop {
                children.push(self.set(depth + 1)?);
                self.skip_ws();
                match self.bytes.get(self.at) {
                    Some(&b',') => {
                        self.at += 1;
                    }
                    Some(&b'}') => {
                        self.at += 1;
                        return Ok(HFSet::from_children(children));
                    }
                    _ => {
                        return Err(HfError::Syntax {
                            at: self.at,
                            message: "expected ',' or '}'".into(),
                        })
                    }
                }
            }
        }
    }
    let mut p = P {
        bytes: text.as_bytes(),
        at: 0,
        nodes: 0,
        depth_cap,
        node_cap,
    };
    let s = p.set(1)?;
    p.skip_ws();
    if p.at != p.bytes.len() {
        return Err(HfError::Syntax {
            at: p.at,
            message: "trailing input after set literal".into(),
        });
    }
    Ok(s)
}

/// Enumerates universe level `level` in canonical order, refusing levels
/// above [`DEFAULT_UNIVERSE_CAP`].
pub fn universe(level: u32) -> Result<Vec<HFSet>, HfError> {
    universe_with_cap(level, DEFAULT_UNIVERSE_CAP)
}

/// Enumerates universe level `level` in canonical order. Level 0 is empty,
/// each later level is the powerset of the previous one.
pub fn universe_with_cap(level: u32, cap: u32) -> Result<Vec<HFSet>, HfError> {
    if level > cap {
        return Err(HfError::UniverseCapExceeded { level, cap });
    }
    let mut current: Vec<HFSet> = Vec::new();
    for _ in 0..level {
        let n = current.len();
        let mut next = Vec::with_capacity(1usize << n);
        for mask in 0u64..(1u64 << n) {
            let members = current
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| s.clone());
            next.push(HFSet::from_children(members));
        }
        next.sort();
        current = next;
    }
    Ok(current)
}

/// An injective pairing function together with its partial inverse.
///
/// `unpair(w)` is `Some((u, v))` exactly when `w == pair(u, v)`; members of
/// a set that decompose this way are its pairs with respect to the spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairingSpec {
    /// `pair(u, v) = {{u}, {u, v}}`.
    Kuratowski,
    /// `pair(u, v) = { kur_pair(u, v), {tag} }` for a fixed tag set. The
    /// extra `{tag}` member keeps pair images disjoint from any set that
    /// contains the tag, whatever the tag is.
    Delta(HFSet),
}

impl PairingSpec {
    pub fn name(&self) -> String {
        match self {
            PairingSpec::Kuratowski => "kuratowski".into(),
            PairingSpec::Delta(d) => format!("delta {}", d),
        }
    }

    pub fn pair(&self, u: &HFSet, v: &HFSet) -> HFSet {
        match self {
            PairingSpec::Kuratowski => HFSet::kur_pair(u, v),
            PairingSpec::Delta(d) => HFSet::doubleton(
                HFSet::kur_pair(u, v),
                HFSet::singleton(d.clone()),
            ),
        }
    }

    pub fn unpair(&self, w: &HFSet) -> Option<(HFSet, HFSet)> {
        match self {
            PairingSpec::Kuratowski => w.kur_unpair(),
            PairingSpec::Delta(d) => {
                let tag = HFSet::singleton(d.clone());
                if !w.contains(&tag) || w.len() > 2 {
                    return None;
                }
                // The Kuratowski part is the member other than {tag}; when w
                // is the singleton {{tag}}, {tag} itself must be that part.
                let kur = match w.children() {
                    [only] => only.clone(),
                    [a, b] => {
                        if *a == tag {
                            b.clone()
                        } else {
                            a.clone()
                        }
                    }
                    _ => return None,
                };
                let (u, v) = kur.kur_unpair()?;
                if self.pair(&u, &v) == *w {
                    Some((u, v))
                } else {
                    None
                }
            }
        }
    }
}

/// The members of `s` that are pairs with respect to `p`.
pub fn pairs_of(s: &HFSet, p: &PairingSpec) -> HFSet {
    HFSet::make(
        s.children()
            .iter()
            .filter(|c| p.unpair(c).is_some())
            .cloned()
            .collect(),
    )
}

/// Convenience constructor for the tagged pairing used by model transfer.
pub fn delta_pairing(delta: HFSet) -> PairingSpec {
    PairingSpec::Delta(delta)
}
