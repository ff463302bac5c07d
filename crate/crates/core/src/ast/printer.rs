//! Canonical printer. `parse(print(f)) == f` for every well-formed tree;
//! parentheses follow operator precedence, with quantified operands of
//! binary connectives always parenthesized for readability.

use std::fmt;

use super::Formula;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(..)
        | Formula::ForallIn(..)
        | Formula::ExistsIn(..)
        | Formula::ForallInNonpairs(..)
        | Formula::ForallPairIn(..)
        | Formula::ExistsPairIn(..) => 5,
        _ => 6,
    }
}

fn write_child(
    f: &mut fmt::Formatter<'_>,
    child: &Formula,
    min_prec: u8,
    parenthesize_quantifier: bool,
) -> fmt::Result {
    let needs_paren =
        prec(child) < min_prec || (parenthesize_quantifier && child.is_quantifier());
    if needs_paren {
        f.write_str("(")?;
        write_formula(f, child)?;
        f.write_str(")")
    } else {
        write_formula(f, child)
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, formula: &Formula) -> fmt::Result {
    match formula {
        Formula::MemberSet(a, b) => write!(f, "{} in {}", a, b),
        Formula::MemberNonpairs(a, b) => write!(f, "{} in nonpairs({})", a, b),
        Formula::EqualSet(a, b) => write!(f, "{} = {}", a, b),
        Formula::PairMember(x, y, d) => write!(f, "[{},{}] in {}", x, y, d),
        Formula::EqualMap(a, b) => write!(f, "{} = {}", a, b),
        Formula::SubDom(x, g) => write!(f, "{} sub dom({})", x, g),
        Formula::SubRange(x, g) => write!(f, "{} sub ran({})", x, g),
        Formula::SubImage(y, g, x) => write!(f, "{} sub img({},{})", y, g, x),
        Formula::SubComp(h, g1, g2) => write!(f, "{} sub comp({},{})", h, g1, g2),
        Formula::Not(a) => {
            f.write_str("not ")?;
            if a.is_atom() {
                write_formula(f, a)
            } else {
                f.write_str("(")?;
                write_formula(f, a)?;
                f.write_str(")")
            }
        }
        Formula::And(a, b) => {
            write_child(f, a, 4, true)?;
            f.write_str(" and ")?;
            write_child(f, b, 5, true)
        }
        Formula::Or(a, b) => {
            write_child(f, a, 3, true)?;
            f.write_str(" or ")?;
            write_child(f, b, 4, true)
        }
        Formula::Implies(a, b) => {
            write_child(f, a, 3, true)?;
            f.write_str(" -> ")?;
            write_child(f, b, 2, true)
        }
        Formula::Iff(a, b) => {
            write_child(f, a, 1, true)?;
            f.write_str(" <-> ")?;
            write_child(f, b, 2, true)
        }
        Formula::ForallIn(x, z, body) => {
            write!(f, "forall {} in {} . ", x, z)?;
            write_child(f, body, 5, false)
        }
        Formula::ExistsIn(x, z, body) => {
            write!(f, "exists {} in {} . ", x, z)?;
            write_child(f, body, 5, false)
        }
        Formula::ForallInNonpairs(x, z, body) => {
            write!(f, "forall {} in nonpairs({}) . ", x, z)?;
            write_child(f, body, 5, false)
        }
        Formula::ForallPairIn(x, y, d, body) => {
            write!(f, "forall [{},{}] in {} . ", x, y, d)?;
            write_child(f, body, 5, false)
        }
        Formula::ExistsPairIn(x, y, d, body) => {
            write!(f, "exists [{},{}] in {} . ", x, y, d)?;
            write_child(f, body, 5, false)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}
