//! Well-formedness diagnostics.
//!
//! A well-formed formula is a Boolean combination of simple-prenex
//! formulas: a uniform quantifier prefix (set-member quantifiers first,
//! then pair quantifiers) over a quantifier-free matrix, where no
//! quantified variable also serves as a domain variable.

use std::collections::BTreeMap;
use std::fmt;

use super::{Formula, Sort, Variable};

/// Which language the formula is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Language {
    /// Two-sorted base language: set and map variables, pair quantifiers
    /// range over map variables.
    SetMap,
    /// Set-variables-only target of the reduction: membership goes through
    /// `nonpairs(...)`, pair containers are set variables, quantifiers are
    /// universal.
    SetOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidateOptions {
    pub language: Language,
    pub allow_extensions: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions { language: Language::SetMap, allow_extensions: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    SortViolation,
    NonSimplePrenex,
    MalformedPrenex,
    DuplicateBinding,
    ExtensionNotEnabled,
    LanguageMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

fn diag(kind: DiagnosticKind, message: impl Into<String>) -> Diagnostic {
    Diagnostic { kind, message: message.into() }
}

enum Step<'a> {
    Set { x: &'a Variable, z: &'a Variable, exists: bool },
    Nonpairs { x: &'a Variable, z: &'a Variable },
    Pair { x: &'a Variable, y: &'a Variable, d: &'a Variable, exists: bool },
}

/// Peels the maximal quantifier prefix off `f`.
fn peel_prefix(f: &Formula) -> (Vec<Step<'_>>, &Formula) {
    let mut steps = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            Formula::ForallIn(x, z, body) => {
                steps.push(Step::Set { x, z, exists: false });
                cur = body;
            }
            Formula::ExistsIn(x, z, body) => {
                steps.push(Step::Set { x, z, exists: true });
                cur = body;
            }
            Formula::ForallInNonpairs(x, z, body) => {
                steps.push(Step::Nonpairs { x, z });
                cur = body;
            }
            Formula::ForallPairIn(x, y, d, body) => {
                steps.push(Step::Pair { x, y, d, exists: false });
                cur = body;
            }
            Formula::ExistsPairIn(x, y, d, body) => {
                steps.push(Step::Pair { x, y, d, exists: true });
                cur = body;
            }
            _ => return (steps, cur),
        }
    }
}

/// All quantified variables occurring anywhere in `f`.
pub(crate) fn bound_variables(f: &Formula) -> Vec<Variable> {
    let mut out = Vec::new();
    fn go(f: &Formula, out: &mut Vec<Variable>) {
        match f {
            Formula::Not(a) => go(a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                go(a, out);
                go(b, out);
            }
            Formula::ForallIn(x, _, body)
            | Formula::ExistsIn(x, _, body)
            | Formula::ForallInNonpairs(x, _, body) => {
                out.push(x.clone());
                go(body, out);
            }
            Formula::ForallPairIn(x, y, _, body) | Formula::ExistsPairIn(x, y, _, body) => {
                out.push(x.clone());
                out.push(y.clone());
                go(body, out);
            }
            _ => {}
        }
    }
    go(f, &mut out);
    out
}

fn check_atom(atom: &Formula, opts: ValidateOptions, diags: &mut Vec<Diagnostic>) {
    let want = |v: &Variable, sort: Sort, context: &str, diags: &mut Vec<Diagnostic>| {
        if v.sort() != sort {
            diags.push(diag(
                DiagnosticKind::SortViolation,
                format!("{} must be a {} variable in `{}`", v, match sort {
                    Sort::Set => "set",
                    Sort::Map => "map",
                }, context),
            ));
        }
    };
    let ext = |name: &str, opts: ValidateOptions, diags: &mut Vec<Diagnostic>| {
        if opts.language == Language::SetOnly {
            diags.push(diag(
                DiagnosticKind::LanguageMismatch,
                format!("extension atom `{}` is not part of the set-only language", name),
            ));
        } else if !opts.allow_extensions {
            diags.push(diag(
                DiagnosticKind::ExtensionNotEnabled,
                format!("extension atom `{}` requires the extension capability", name),
            ));
        }
    };
    match atom {
        Formula::MemberSet(a, b) => {
            if opts.language == Language::SetOnly {
                diags.push(diag(
                    DiagnosticKind::LanguageMismatch,
                    format!(
                        "bare membership `{} in {}` is not a set-only atom; use `in nonpairs(...)`",
                        a, b
                    ),
                ));
            }
            want(a, Sort::Set, "x in y", diags);
            want(b, Sort::Set, "x in y", diags);
        }
        Formula::MemberNonpairs(a, b) => {
            if opts.language == Language::SetMap {
                diags.push(diag(
                    DiagnosticKind::LanguageMismatch,
                    "`nonpairs` terms belong to the set-only language".to_string(),
                ));
            }
            want(a, Sort::Set, "x in nonpairs(y)", diags);
            want(b, Sort::Set, "x in nonpairs(y)", diags);
        }
        Formula::EqualSet(a, b) => {
            want(a, Sort::Set, "x = y", diags);
            want(b, Sort::Set, "x = y", diags);
        }
        Formula::PairMember(x, y, d) => {
            want(x, Sort::Set, "[x,y] in container", diags);
            want(y, Sort::Set, "[x,y] in container", diags);
            match opts.language {
                Language::SetMap => want(d, Sort::Map, "[x,y] in @f", diags),
                Language::SetOnly => {
                    if d.sort() != Sort::Set {
                        diags.push(diag(
                            DiagnosticKind::LanguageMismatch,
                            format!("map variable {} in the set-only language", d),
                        ));
                    }
                }
            }
        }
        Formula::EqualMap(a, b) => {
            if opts.language == Language::SetOnly {
                diags.push(diag(
                    DiagnosticKind::LanguageMismatch,
                    "map equality is not part of the set-only language".to_string(),
                ));
            }
            want(a, Sort::Map, "@f = @g", diags);
            want(b, Sort::Map, "@f = @g", diags);
        }
        Formula::SubDom(x, f) => {
            ext("sub dom", opts, diags);
            want(x, Sort::Set, "x sub dom(@f)", diags);
            want(f, Sort::Map, "x sub dom(@f)", diags);
        }
        Formula::SubRange(x, f) => {
            ext("sub ran", opts, diags);
            want(x, Sort::Set, "x sub ran(@f)", diags);
            want(f, Sort::Map, "x sub ran(@f)", diags);
        }
        Formula::SubImage(y, f, x) => {
            ext("sub img", opts, diags);
            want(y, Sort::Set, "y sub img(@f,x)", diags);
            want(f, Sort::Map, "y sub img(@f,x)", diags);
            want(x, Sort::Set, "y sub img(@f,x)", diags);
        }
        Formula::SubComp(h, f, g) => {
            ext("sub comp", opts, diags);
            want(h, Sort::Map, "@h sub comp(@f,@g)", diags);
            want(f, Sort::Map, "@h sub comp(@f,@g)", diags);
            want(g, Sort::Map, "@h sub comp(@f,@g)", diags);
        }
        _ => unreachable!("check_atom called on a non-atom"),
    }
}

fn check_prenex(f: &Formula, opts: ValidateOptions, diags: &mut Vec<Diagnostic>) {
    let (steps, matrix) = peel_prefix(f);
    let mut saw_exists = false;
    let mut saw_forall = false;
    let mut saw_pair = false;
    let mut bound: Vec<&Variable> = Vec::new();
    let mut domains: Vec<&Variable> = Vec::new();
    for step in &steps {
        let (exists, vars, domain): (bool, Vec<&Variable>, &Variable) = match step {
            Step::Set { x, z, exists } => {
                if opts.language == Language::SetOnly {
                    diags.push(diag(
                        DiagnosticKind::LanguageMismatch,
                        format!(
                            "set-only quantification must use `forall {} in nonpairs({})`",
                            x, z
                        ),
                    ));
                }
                if saw_pair {
                    diags.push(diag(
                        DiagnosticKind::MalformedPrenex,
                        format!("set-member quantifier over {} after a pair quantifier", x),
                    ));
                }
                (*exists, vec![x], z)
            }
            Step::Nonpairs { x, z } => {
                if opts.language == Language::SetMap {
                    diags.push(diag(
                        DiagnosticKind::LanguageMismatch,
                        "`forall ... in nonpairs(...)` belongs to the set-only language".to_string(),
                    ));
                }
                if saw_pair {
                    diags.push(diag(
                        DiagnosticKind::MalformedPrenex,
                        format!("set-member quantifier over {} after a pair quantifier", x),
                    ));
                }
                (false, vec![x], z)
            }
            Step::Pair { x, y, d, exists } => {
                saw_pair = true;
                match opts.language {
                    Language::SetMap => {
                        if d.sort() != Sort::Map {
                            diags.push(diag(
                                DiagnosticKind::SortViolation,
                                format!("pair quantifier domain {} must be a map variable", d),
                            ));
                        }
                    }
                    Language::SetOnly => {
                        if d.sort() != Sort::Set {
                            diags.push(diag(
                                DiagnosticKind::LanguageMismatch,
                                format!("map variable {} in the set-only language", d),
                            ));
                        }
                    }
                }
                if x == y {
                    diags.push(diag(
                        DiagnosticKind::DuplicateBinding,
                        format!("pair binder uses {} for both components", x),
                    ));
                }
                (*exists, vec![x, y], d)
            }
        };
        if exists {
            saw_exists = true;
            if opts.language == Language::SetOnly {
                diags.push(diag(
                    DiagnosticKind::LanguageMismatch,
                    "the set-only language admits only universal quantifiers".to_string(),
                ));
            }
        } else {
            saw_forall = true;
        }
        for v in vars {
            if v.sort() != Sort::Set {
                diags.push(diag(
                    DiagnosticKind::SortViolation,
                    format!("quantified variable {} must be a set variable", v),
                ));
            }
            if bound.iter().any(|b| *b == v) {
                diags.push(diag(
                    DiagnosticKind::DuplicateBinding,
                    format!("variable {} is quantified twice in one prefix", v),
                ));
            }
            bound.push(v);
        }
        domains.push(domain);
    }
    if saw_exists && saw_forall {
        diags.push(diag(
            DiagnosticKind::MalformedPrenex,
            "prefix mixes universal and existential quantifiers".to_string(),
        ));
    }
    for d in &domains {
        if bound.iter().any(|b| b == d) {
            diags.push(diag(
                DiagnosticKind::NonSimplePrenex,
                format!("quantified variable {} also occurs as a domain variable", d),
            ));
        }
    }
    if matrix.is_quantifier_free() {
        walk_matrix(matrix, opts, diags);
    } else {
        diags.push(diag(
            DiagnosticKind::MalformedPrenex,
            "quantifier nested under a connective inside a prenex matrix".to_string(),
        ));
        // Still surface atom-level problems underneath.
        walk_boolean(matrix, opts, diags);
    }
}

fn walk_matrix(f: &Formula, opts: ValidateOptions, diags: &mut Vec<Diagnostic>) {
    match f {
        Formula::Not(a) => walk_matrix(a, opts, diags),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            walk_matrix(a, opts, diags);
            walk_matrix(b, opts, diags);
        }
        atom => check_atom(atom, opts, diags),
    }
}

fn walk_boolean(f: &Formula, opts: ValidateOptions, diags: &mut Vec<Diagnostic>) {
    match f {
        Formula::Not(a) => walk_boolean(a, opts, diags),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            walk_boolean(a, opts, diags);
            walk_boolean(b, opts, diags);
        }
        q if q.is_quantifier() => check_prenex(q, opts, diags),
        atom => check_atom(atom, opts, diags),
    }
}

/// Collects diagnostics; an empty result means the formula is well formed
/// for the given language and capability options. Deterministic.
pub fn validate(f: &Formula, opts: ValidateOptions) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut sorts: BTreeMap<String, Sort> = BTreeMap::new();
    for v in f.all_variables() {
        match sorts.get(v.name()) {
            None => {
                sorts.insert(v.name().to_string(), v.sort());
            }
            Some(s) if *s != v.sort() => {
                diags.push(diag(
                    DiagnosticKind::SortViolation,
                    format!("name `{}` is used both as a set and as a map variable", v.name()),
                ));
            }
            _ => {}
        }
    }
    walk_boolean(f, opts, &mut diags);
    diags
}

/// Guesses the options a formula is meant to be validated under: presence
/// of map variables selects the set/map language, `nonpairs` terms or
/// set-sorted pair containers select the set-only language, and extension
/// atoms enable the extension capability.
pub fn infer_validate_options(f: &Formula) -> ValidateOptions {
    let has_map = f.all_variables().iter().any(|v| v.sort() == Sort::Map);
    let mut set_container = false;
    let mut nonpairs = false;
    let mut walk = |g: &Formula| match g {
        Formula::PairMember(_, _, d) if d.sort() == Sort::Set => set_container = true,
        Formula::ForallPairIn(_, _, d, _) | Formula::ExistsPairIn(_, _, d, _)
            if d.sort() == Sort::Set =>
        {
            set_container = true
        }
        Formula::MemberNonpairs(..) | Formula::ForallInNonpairs(..) => nonpairs = true,
        _ => {}
    };
    f.visit(&mut walk);
    let language = if !has_map && (nonpairs || set_container) {
        Language::SetOnly
    } else {
        Language::SetMap
    };
    ValidateOptions { language, allow_extensions: f.has_extension_atoms() }
}

/// Checks that `f` is a universal simple-prenex formula of the language
/// selected by `opts`: member quantifiers first, then pair quantifiers,
/// then a quantifier-free matrix of that language's atoms. Returns the
/// first failure reason.
pub(crate) fn check_universal_simple_prenex(
    f: &Formula,
    opts: ValidateOptions,
) -> Result<(), String> {
    let (steps, _) = peel_prefix(f);
    for step in &steps {
        if let Step::Set { exists: true, .. } | Step::Pair { exists: true, .. } = step {
            return Err("existential quantifier in a universal prenex formula".to_string());
        }
    }
    let mut diags = Vec::new();
    check_prenex(f, opts, &mut diags);
    match diags.first() {
        None => Ok(()),
        Some(d) => Err(d.message.clone()),
    }
}
