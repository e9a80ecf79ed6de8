//! Correction coefficients for the LF_R time integrators.
//!
//! The order-R scheme modifies the staggered first-order couplings by a
//! truncated odd power series of tanh: coupling across half a time step uses
//! `sum_{s=0}^{R/2-1} gamma_s * (dt_eff^2 * Op)^s` applied before the
//! first-order coupling, where
//!
//! ```text
//! gamma_s = 4^{-s} * [x^{2s+1}] tanh(x)
//! ```
//!
//! so `gamma_0 = 1`, `gamma_1 = -1/12`, `gamma_2 = 1/120`,
//! `gamma_3 = -17/20160`, ...
//!
//! Everything here is exact rational arithmetic on [`BigInt`]s.  Two
//! independent derivations are provided:
//!
//! 1. [`gamma_series`] (normative): long division of the sinh series by the
//!    cosh series, then scaling by `4^{-s}`.
//! 2. [`gamma_composition`] (validation oracle): an explicit alternating sum
//!    over integer compositions.
//!
//! The two must agree exactly for every order; the test suites enforce this.
//! A deliberately wrong "unsigned" variant of route 2 is also kept
//! ([`gamma_composition_unsigned`]) because it produces a plausible-looking
//! `1/80` at `s = 2` — pinning it in tests documents why the alternating signs
//! are essential.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used for all coefficient work.
pub type Rational = Ratio<BigInt>;

/// Errors from validating a requested scheme order.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoeffsError {
    /// The scheme is only defined for even orders.
    #[error("scheme order R must be even, got {0}")]
    OddOrder(u32),
    /// Orders below 2 are meaningless (R = 2 is the unmodified leapfrog).
    #[error("scheme order R must be at least 2, got {0}")]
    OrderTooSmall(u32),
}

/// `n!` as a [`BigInt`].
fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Rational `1 / n!`.
fn inv_factorial(n: u64) -> Rational {
    Rational::new(BigInt::one(), factorial(n))
}

/// Rational from small integers.
#[cfg(test)]
fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Odd Taylor coefficients of tanh: returns `t[s] = [x^{2s+1}] tanh(x)` for
/// `s = 0..=s_max`, computed by exact long division of the sinh series by the
/// cosh series (`tanh * cosh = sinh`, solved coefficient by coefficient).
pub fn tanh_odd_coefficients(s_max: usize) -> Vec<Rational> {
    // sinh x = sum x^{2i+1}/(2i+1)!,  cosh x = sum x^{2i}/(2i)!.
    // With t_{2i+1} the tanh coefficients, matching powers x^{2i+1} in
    // tanh * cosh = sinh gives
    //   t_{2i+1} = 1/(2i+1)! - sum_{j<i} t_{2j+1} / (2(i-j))!.
    let mut t: Vec<Rational> = Vec::with_capacity(s_max + 1);
    for i in 0..=s_max {
        let mut coeff = inv_factorial(2 * i as u64 + 1);
        for (j, tj) in t.iter().enumerate() {
            coeff -= tj * inv_factorial(2 * (i - j) as u64);
        }
        t.push(coeff);
    }
    t
}

/// Normative route: `gamma_s = 4^{-s} [x^{2s+1}] tanh x` for `s = 0..=s_max`.
pub fn gamma_series(s_max: usize) -> Vec<Rational> {
    let tanh = tanh_odd_coefficients(s_max);
    scale_by_inv_pow4(tanh)
}

/// Divides entry `s` of a coefficient list by `4^s`.
fn scale_by_inv_pow4(coeffs: Vec<Rational>) -> Vec<Rational> {
    let four = BigInt::from(4);
    let mut pow = BigInt::one();
    coeffs
        .into_iter()
        .enumerate()
        .map(|(s, c)| {
            if s > 0 {
                pow *= &four;
            }
            c / Rational::from(pow.clone())
        })
        .collect()
}

/// `C_k = 1/(2k)! - 1/(2k+1)!`, the elementary bracket appearing in the
/// composition formula.
fn c_bracket(k: u64) -> Rational {
    inv_factorial(2 * k) - inv_factorial(2 * k + 1)
}

/// Alternating tail sum over compositions:
/// `G(m) = sum over compositions (j_1..j_b) of m, b >= 0, of
/// (-1)^b prod_i 1/(2 j_i)!` with `G(0) = 1`.
///
/// Satisfies `G(m) = -sum_{j=1}^{m} G(m-j)/(2j)!`.
fn tail_sum(m_max: usize, signed: bool) -> Vec<Rational> {
    let mut g: Vec<Rational> = vec![Rational::one()];
    for m in 1..=m_max {
        let mut acc = Rational::zero();
        for j in 1..=m {
            let term = &g[m - j] * inv_factorial(2 * j as u64);
            if signed {
                acc -= term;
            } else {
                acc += term;
            }
        }
        g.push(acc);
    }
    g
}

/// Composition-route magnitude
/// `D_s = sum over compositions (k_1..k_a) of s of
/// (-1)^{a+1} C_{k_1} prod_{c=2}^{a} 1/(2 k_c)!`
/// for `s = 1..=s_max` (index 0 of the returned vector is `D_0 = 0`, unused).
fn composition_d(s_max: usize, signed: bool) -> Vec<Rational> {
    // Split off the first part k_1; the remainder is a tail composition of
    // s - k_1, and (-1)^{a+1} = (-1)^{#tail parts}, so the alternation lives
    // entirely in the tail sum.
    let g = tail_sum(s_max, signed);
    let mut d = vec![Rational::zero()];
    for s in 1..=s_max {
        let mut acc = Rational::zero();
        for k1 in 1..=s {
            acc += c_bracket(k1 as u64) * &g[s - k1];
        }
        d.push(acc);
    }
    d
}

/// Validation-oracle route: the same `gamma_s` derived from the alternating
/// composition sum, via `gamma_0 = 1` and `gamma_s = -4^{-s} D_s` for
/// `s >= 1`.
///
/// The leading `-1` together with the alternation `(-1)^{a+1}` inside `D_s`
/// reproduces the signed tanh coefficients exactly; see the unit tests.
pub fn gamma_composition(s_max: usize) -> Vec<Rational> {
    let d = composition_d(s_max, true);
    let mut out = vec![Rational::one()];
    for s in 1..=s_max {
        out.push(-d[s].clone());
    }
    scale_by_inv_pow4(out)
}

/// Deliberately wrong variant: drops the alternating sign `(-1)^{a+1}` and the
/// leading `-1`, i.e. reads the composition formula "unsigned".  At `s = 2`
/// this yields `1/80` instead of the correct `1/120`.  Kept public so the test
/// suites can pin the failure mode.
pub fn gamma_composition_unsigned(s: usize) -> Rational {
    if s == 0 {
        return Rational::one();
    }
    let d = composition_d(s, false);
    let four_pow: BigInt = (0..s).fold(BigInt::one(), |acc, _| acc * 4);
    d[s].clone() / Rational::from(four_pow)
}

/// Number of correction terms used by the order-`r` scheme (`s` ranges over
/// `0..=r/2 - 1`).
pub fn terms_for_order(r: u32) -> Result<usize, CoeffsError> {
    if r < 2 {
        return Err(CoeffsError::OrderTooSmall(r));
    }
    if r % 2 != 0 {
        return Err(CoeffsError::OddOrder(r));
    }
    Ok((r / 2) as usize)
}

/// The exact coefficients `gamma_0..gamma_{r/2-1}` used by the order-`r`
/// scheme (series route).
pub fn gammas_for_order(r: u32) -> Result<Vec<Rational>, CoeffsError> {
    let terms = terms_for_order(r)?;
    Ok(gamma_series(terms - 1))
}

/// Same as [`gammas_for_order`], rounded once to `f64` for assembly.
pub fn gammas_f64_for_order(r: u32) -> Result<Vec<f64>, CoeffsError> {
    Ok(gammas_for_order(r)?.iter().map(rational_to_f64).collect())
}

/// Rounds an exact rational to the nearest `f64`.
pub fn rational_to_f64(x: &Rational) -> f64 {
    // numer/denom both fit f64 range comfortably for every order this crate
    // accepts; the quotient of the two roundings is correct to 1 ulp here,
    // which is far below every tolerance the schemes care about.
    let n = x.numer().to_f64().unwrap_or(f64::NAN);
    let d = x.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_low_order_values() {
        let g = gamma_series(3);
        assert_eq!(g[0], rat(1, 1));
        assert_eq!(g[1], rat(-1, 12));
        assert_eq!(g[2], rat(1, 120));
        assert_eq!(g[3], rat(-17, 20160));
    }

    #[test]
    fn tanh_coefficients_match_known_values() {
        let t = tanh_odd_coefficients(3);
        assert_eq!(t[0], rat(1, 1));
        assert_eq!(t[1], rat(-1, 3));
        assert_eq!(t[2], rat(2, 15));
        assert_eq!(t[3], rat(-17, 315));
    }

    #[test]
    fn series_and_composition_agree_exactly() {
        let a = gamma_series(15);
        let b = gamma_composition(15);
        assert_eq!(a, b);
    }

    #[test]
    fn unsigned_reading_is_wrong_at_s2() {
        let wrong = gamma_composition_unsigned(2);
        assert_eq!(wrong, rat(1, 80));
        assert_ne!(wrong, gamma_series(2)[2]);
    }

    #[test]
    fn order_validation() {
        assert_eq!(terms_for_order(2), Ok(1));
        assert_eq!(terms_for_order(6), Ok(3));
        assert_eq!(terms_for_order(5), Err(CoeffsError::OddOrder(5)));
        assert_eq!(terms_for_order(0), Err(CoeffsError::OrderTooSmall(0)));
    }

    #[test]
    fn f64_rounding() {
        let g = gammas_f64_for_order(4).unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[1] + 1.0 / 12.0).abs() < 1e-17);
    }
}
