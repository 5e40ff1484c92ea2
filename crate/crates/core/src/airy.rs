//! Airy function of the first kind and its derivative.
//!
//! Maclaurin series for |x| <= 8, accumulated in double-double arithmetic:
//! the two series branches cancel heavily for moderate positive x, and the
//! extended-precision accumulator keeps the relative error of the rounded
//! result at the 1e-15 level. Beyond |x| = 8 the standard asymptotic
//! expansions take over; at that point their optimally-truncated error is
//! already below 1e-13 of the amplitude.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AiryError {
    #[error("argument {0} outside supported range [-20, 30]")]
    OutOfRange(f64),
}

/// Unevaluated double-double value: hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    fn from(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }

    #[inline]
    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p1, p2) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p1);
        let q2 = (s + (e + self.lo - p2)) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

// Ai(0) = 3^{-2/3}/Gamma(2/3) and Ai'(0) = -3^{-1/3}/Gamma(1/3),
// split to double-double precision.
const AI_ZERO: Dd = Dd {
    hi: 0.3550280538878172,
    lo: 2.052336324362201e-17,
};
const AIP_ZERO: Dd = Dd {
    hi: -0.2588194037928068,
    lo: 2.5222431116108323e-17,
};

const SERIES_LIMIT: f64 = 8.0;

/// (Ai, Ai') by the Maclaurin series in double-double accumulation.
fn airy_series(x: f64) -> (f64, f64) {
    let x3 = Dd::from(x).mul_f64(x).mul_f64(x);
    // the four hypergeometric branches: f, g, f', g'
    let mut f_term = Dd::from(1.0);
    let mut g_term = Dd::from(x);
    let mut fp_term = Dd::from(x).mul_f64(x).div_f64(2.0);
    let mut gp_term = Dd::from(1.0);
    let mut f_sum = f_term;
    let mut g_sum = g_term;
    let mut fp_sum = fp_term;
    let mut gp_sum = gp_term;
    for k in 1..200i64 {
        let kf = k as f64;
        f_term = f_term.mul(x3).div_f64((3.0 * kf - 1.0) * (3.0 * kf));
        g_term = g_term.mul(x3).div_f64((3.0 * kf) * (3.0 * kf + 1.0));
        gp_term = gp_term.mul(x3).div_f64((3.0 * kf - 2.0) * (3.0 * kf));
        f_sum = f_sum.add(f_term);
        g_sum = g_sum.add(g_term);
        gp_sum = gp_sum.add(gp_term);
        // the f' branch starts at k = 1, which seeded the accumulator
        if k >= 2 {
            fp_term = fp_term.mul(x3).div_f64((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fp_sum = fp_sum.add(fp_term);
        }
        let biggest = f_term
            .hi
            .abs()
            .max(g_term.hi.abs())
            .max(fp_term.hi.abs())
            .max(gp_term.hi.abs());
        if biggest < 1e-40 {
            break;
        }
    }
    let ai = AI_ZERO.mul(f_sum).add(AIP_ZERO.mul(g_sum)).value();
    let aip = AI_ZERO.mul(fp_sum).add(AIP_ZERO.mul(gp_sum)).value();
    (ai, aip)
}

// coefficients u_k (and v_k = -(6k+1)/(6k-1) u_k) of the asymptotic series
fn asymptotic_coefficients(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    u.push(1.0);
    v.push(1.0);
    for k in 1..count {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / (216.0 * kf * (2.0 * kf - 1.0));
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

/// (Ai, Ai') for x > SERIES_LIMIT: decaying asymptotic expansion.
fn airy_asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = asymptotic_coefficients(40);
    let mut su = 0.0;
    let mut sv = 0.0;
    let mut zk = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..u.len() {
        let term = u[k] * zk;
        if term.abs() > prev {
            break;
        }
        su += if k % 2 == 0 { term } else { -term };
        sv += if k % 2 == 0 { v[k] * zk } else { -v[k] * zk };
        prev = term.abs();
        zk /= zeta;
        if term.abs() < 1e-18 {
            break;
        }
    }
    let pre = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    (pre / x.powf(0.25) * su, -pre * x.powf(0.25) * sv)
}

/// (Ai, Ai') for x < -SERIES_LIMIT: oscillatory asymptotic expansion.
fn airy_asymptotic_negative(x: f64) -> (f64, f64) {
    let y = -x;
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let theta = zeta - std::f64::consts::FRAC_PI_4;
    let (u, v) = asymptotic_coefficients(40);
    // split the series into even (cos) and odd (sin) parts
    let mut u_even = 0.0;
    let mut u_odd = 0.0;
    let mut v_even = 0.0;
    let mut v_odd = 0.0;
    let mut zk = 1.0;
    for k in 0..u.len() {
        let term_u = u[k] * zk;
        let term_v = v[k] * zk;
        if term_u.abs() < 1e-18 {
            break;
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            u_even += sign * term_u;
            v_even += sign * term_v;
        } else {
            u_odd += sign * term_u;
            v_odd += sign * term_v;
        }
        zk /= zeta;
    }
    let sq = std::f64::consts::PI.sqrt();
    let ai = (theta.cos() * u_even + theta.sin() * u_odd) / (sq * y.powf(0.25));
    let aip = (theta.sin() * v_even - theta.cos() * v_odd) * y.powf(0.25) / sq;
    (ai, aip)
}

fn airy_pair_unchecked(x: f64) -> (f64, f64) {
    if x.abs() <= SERIES_LIMIT {
        airy_series(x)
    } else if x > 0.0 {
        airy_asymptotic_positive(x)
    } else {
        airy_asymptotic_negative(x)
    }
}

/// Ai(x) for x in [-20, 30], relative accuracy ~1e-13 or better (absolute
/// near the zeros on the negative axis).
pub fn airy_ai(x: f64) -> Result<f64, AiryError> {
    check_range(x)?;
    Ok(airy_pair_unchecked(x).0)
}

/// Ai'(x) on the same domain and accuracy terms as [`airy_ai`].
pub fn airy_ai_prime(x: f64) -> Result<f64, AiryError> {
    check_range(x)?;
    Ok(airy_pair_unchecked(x).1)
}

fn check_range(x: f64) -> Result<(), AiryError> {
    if !(-20.0..=30.0).contains(&x) || x.is_nan() {
        return Err(AiryError::OutOfRange(x));
    }
    Ok(())
}

/// Both values at once without the domain guard; callers inside the crate
/// stay within [-20, 30] by construction of their grids.
pub(crate) fn airy_pair(x: f64) -> (f64, f64) {
    airy_pair_unchecked(x)
}
