//! Exact symbolic layer: rational monomial algebra, exact kernels, and the
//! symmetry-condition machinery built on them.

mod linalg;
mod poly;
mod symmetry;

pub use linalg::{nullspace, rank, rref};
pub use poly::{monomial_string, Coeff, Exponents, Expr, LinForm, ParamExpr, Poly, Var, VarSet, DPSI, PSI, R, T, Y};
pub use symmetry::{
    abel_constants_exact, determining_scan, reduced_scan, symmetry_residual, BasisVector, ScanResult,
    MAX_DETERMINING_DEGREE, MAX_REDUCED_DEGREE,
};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Exact rational with arbitrary-precision numerator and denominator.
pub type Rat = num_rational::BigRational;

/// Parses `p`, `p/q` or a plain decimal such as `-1.25` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || domain(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let (Ok(p), Ok(q)) = (p.trim().parse::<BigInt>(), q.trim().parse::<BigInt>()) else {
            return bad();
        };
        if q.is_zero() {
            return bad();
        }
        return Ok(Rat::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return bad();
    }
    let Ok(digits) = format!("{int}{frac}").parse::<BigInt>() else {
        return bad();
    };
    let scale = num_traits::pow(BigInt::from(10u32), frac.len());
    let r = Rat::new(digits, scale);
    Ok(if neg { -r } else { r })
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
