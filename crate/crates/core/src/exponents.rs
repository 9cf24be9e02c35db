//! Exact rational arithmetic for the exponent geometry: critical index,
//! trapezoid corners, sparse-bound exponents and weight thresholds.
//!
//! Everything in this module is exact; no floating point enters any
//! computation. Rationals are backed by arbitrary-precision integers so
//! corner coordinates stay exact for any dimension.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExponentError {
    #[error("exponent `{name}` = {value} outside admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(u32),
    #[error("cannot parse `{0}` as a rational (expected `num/den` or an integer)")]
    Parse(String),
}

/// Shorthand for a rational from an integer pair. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `num/den` or a plain integer string.
pub fn parse_rational(s: &str) -> Result<Rational, ExponentError> {
    let s = s.trim();
    let mk_err = || ExponentError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| mk_err())?;
            let d: BigInt = d.trim().parse().map_err(|_| mk_err())?;
            if d.is_zero() {
                return Err(mk_err());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| mk_err())?;
            Ok(Rational::from_integer(n))
        }
    }
}

/// Nearest `f64` to a rational; used only at the boundary to numeric code.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn check_dim(d: u32) -> Result<(), ExponentError> {
    if d < 2 {
        Err(ExponentError::BadDimension(d))
    } else {
        Ok(())
    }
}

fn out_of_range(name: &'static str, value: &Rational, range: &'static str) -> ExponentError {
    ExponentError::OutOfRange {
        name,
        value: value.to_string(),
        range,
    }
}

/// The exponent tuple of a single experiment, with derived trapezoid geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentContext {
    pub d: u32,
    pub p: Rational,
    pub q: Rational,
    pub lambda: Rational,
    pub a: Rational,
}

impl ExponentContext {
    pub fn new(
        d: u32,
        p: Rational,
        q: Rational,
        lambda: Rational,
        a: Rational,
    ) -> Result<Self, ExponentError> {
        check_dim(d)?;
        if p < Rational::one() {
            return Err(out_of_range("p", &p, "[1, ∞)"));
        }
        if !a.is_positive() {
            return Err(out_of_range("a", &a, "(0, ∞)"));
        }
        Ok(Self { d, p, q, lambda, a })
    }

    pub fn trapezoid(&self) -> Result<TrapezoidSpec, ExponentError> {
        trapezoid(&self.lambda, self.d)
    }
}

/// Trapezoid corners in the (1/p, 1/q) unit square, with the symmetry
/// `P4 = swap(P1)`, `P3 = swap(P2)` built in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapezoidSpec {
    pub p1: (Rational, Rational),
    pub p2: (Rational, Rational),
    pub p3: (Rational, Rational),
    pub p4: (Rational, Rational),
}

/// Critical index `λ(p) = d(1/p − 1/2) − 1/2`.
pub fn critical_index(p: &Rational, d: u32) -> Result<Rational, ExponentError> {
    check_dim(d)?;
    if !p.is_positive() {
        return Err(out_of_range("p", p, "(0, ∞)"));
    }
    Ok(rint(d as i64) * (p.recip() - rat(1, 2)) - rat(1, 2))
}

/// The critical Lebesgue exponent `p_λ = 2d/(d+1+2λ)`, the inverse of
/// `critical_index` on the admissible range.
pub fn p_lambda(lambda: &Rational, d: u32) -> Result<Rational, ExponentError> {
    check_dim(d)?;
    let half_range = rat(d as i64 - 1, 2);
    if !lambda.is_positive() || *lambda >= half_range {
        return Err(out_of_range("lambda", lambda, "(0, (d−1)/2)"));
    }
    Ok(rint(2 * d as i64) / (rint(d as i64 + 1) + rint(2) * lambda))
}

/// Trapezoid corners for index `λ` in dimension `d`.
///
/// Accepts the closed endpoint `λ = (d−1)/2`, where `P1` degenerates to
/// `(1, 0)`.
pub fn trapezoid(lambda: &Rational, d: u32) -> Result<TrapezoidSpec, ExponentError> {
    check_dim(d)?;
    let half_range = rat(d as i64 - 1, 2);
    if !lambda.is_positive() || *lambda > half_range {
        return Err(out_of_range("lambda", lambda, "(0, (d−1)/2]"));
    }
    let d_i = d as i64;
    let two_d = rint(2 * d_i);
    let p1x = (rint(2) * lambda + rint(d_i + 1)) / two_d.clone();
    let p1y = (rint(d_i) - rint(2) * lambda - rint(1)) / two_d.clone();
    let p2x = p1x.clone();
    let p2y = rat(d_i - 1, 2 * d_i) + lambda * rat(d_i + 1, d_i * (d_i - 1));
    Ok(TrapezoidSpec {
        p4: (p1y.clone(), p1x.clone()),
        p3: (p2y.clone(), p2x.clone()),
        p1: (p1x, p1y),
        p2: (p2x, p2y),
    })
}

/// Optimal dual exponent on the critical segment,
/// `q_opt = (d−1)p/(d+1−2p)`.
pub fn q_opt(p: &Rational, d: u32) -> Result<Rational, ExponentError> {
    check_dim(d)?;
    let d_i = d as i64;
    let upper = rat(2 * d_i, d_i + 1);
    if *p < Rational::one() || *p >= upper {
        return Err(out_of_range("p", p, "[1, 2d/(d+1))"));
    }
    let den = rint(d_i + 1) - rint(2) * p;
    if !den.is_positive() {
        return Err(out_of_range("p", p, "p < (d+1)/2"));
    }
    Ok(rat(d_i - 1, 1) * p / den)
}

/// The interpolation exponents `(r*, q*)` with `1/q* = 1 − 1/r*`.
///
/// For `p` at or below the Stein–Tomas exponent `2(d+1)/(d+3)` the value is
/// `1/r* = (d+1)/(d−1) · (1 − 1/p)`; above it, the stated interpolation
/// between `(1/p0, 1/r0)` and the Stein–Tomas point applies.
pub fn r_star_q_star(
    p: &Rational,
    p0: &Rational,
    r0: &Rational,
    d: u32,
) -> Result<(Rational, Rational), ExponentError> {
    check_dim(d)?;
    let d_i = d as i64;
    let st = rat(2 * (d_i + 1), d_i + 3);
    let upper = rat(2 * d_i, d_i + 1);
    if *p0 < st || *p0 >= upper {
        return Err(out_of_range("p0", p0, "[2(d+1)/(d+3), 2d/(d+1))"));
    }
    let p0_dual = p0 / (p0 - Rational::one());
    let r0_upper = rat(d_i - 1, d_i + 1) * &p0_dual;
    if r0 < p0 || *r0 > r0_upper {
        return Err(out_of_range("r0", r0, "[p0, (d−1)/(d+1)·p0']"));
    }
    if *p < Rational::one() || p > p0 {
        return Err(out_of_range("p", p, "[1, p0]"));
    }

    let inv_r = if *p <= st {
        rat(d_i + 1, d_i - 1) * (Rational::one() - p.recip())
    } else {
        // p0 > p > st here, so the denominator is strictly positive.
        let a = rat(d_i + 3, 2 * (d_i + 1));
        let num = r0.recip() * (&a - p.recip()) + rat(1, 2) * (p.recip() - p0.recip());
        let den = a - p0.recip();
        num / den
    };
    let r_star = inv_r.recip();
    let q_star = (Rational::one() - inv_r).recip();
    Ok((r_star, q_star))
}

/// Reverse-Hölder threshold `σ∘(λ) = (d−1)(d+1+2λ)/(4dλ)`.
///
/// Accepts the closed endpoint `λ = (d−1)/2`, where the threshold reaches 1.
pub fn sigma_threshold(lambda: &Rational, d: u32) -> Result<Rational, ExponentError> {
    check_dim(d)?;
    let d_i = d as i64;
    let half_range = rat(d_i - 1, 2);
    if !lambda.is_positive() || *lambda > half_range {
        return Err(out_of_range("lambda", lambda, "(0, (d−1)/2]"));
    }
    Ok(rat(d_i - 1, 4 * d_i) * (rint(d_i + 1) + rint(2) * lambda) / lambda)
}

/// Weighted weak-type exponent `p₁ = 1 + (d−1)/(d+1) · (1 − 1/σ)`.
pub fn p1_of_weight(sigma: &Rational, d: u32) -> Result<Rational, ExponentError> {
    check_dim(d)?;
    if *sigma <= Rational::one() {
        return Err(out_of_range("sigma", sigma, "(1, ∞)"));
    }
    let d_i = d as i64;
    Ok(Rational::one() + rat(d_i - 1, d_i + 1) * (Rational::one() - sigma.recip()))
}

/// The reverse-Hölder exponent `σ = (q'/p)' = q/(q+p−pq)` attached to a
/// sparse `(p,q)` bound. Requires `q < p'`.
pub fn sigma_pair(p: &Rational, q: &Rational) -> Result<Rational, ExponentError> {
    if *p <= Rational::one() {
        return Err(out_of_range("p", p, "(1, ∞)"));
    }
    let p_dual = p / (p - Rational::one());
    if q >= &p_dual {
        return Err(out_of_range("q", q, "[1, p')"));
    }
    let den = q + p - p * q;
    Ok(q / den)
}
