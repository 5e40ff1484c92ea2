//! The three limit distributions of the scaled particle position: the
//! Gaussian, the Tracy-Widom GUE law F2 = det(I − K_Airy) on (s, ∞), and
//! the rank-one-perturbed determinant F1² with kernel
//! K_Airy(x,y) + Ai(x)∫_{−∞}^y Ai.
//!
//! The determinants are discretized by Gauss-Legendre nodes on (s, s+12]
//! under a smooth exponential change of variables clustering nodes where
//! the kernel mass sits; the truncation tail is controlled by the
//! super-exponential kernel decay. Every value carries a two-resolution
//! error estimate, and F1² is additionally computable through the rank-one
//! determinant lemma as an independent route.

use crate::airy::{airy_pair, AiryError};
use crate::linalg;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitLawError {
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error("s = {0} outside the supported evaluation range [-10, 6]")]
    OutOfRange(f64),
    #[error("probability {0} not covered by this table")]
    QuantileRange(f64),
    #[error("invalid table grid: {0}")]
    BadGrid(String),
    #[error("quadrature size must be even and >= 8 (got {0})")]
    BadQuadSize(usize),
}

/// Which limit law a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    Gaussian,
    F2,
    F1Squared,
}

impl LawKind {
    pub fn label(&self) -> &'static str {
        match self {
            LawKind::Gaussian => "g",
            LawKind::F2 => "f2",
            LawKind::F1Squared => "f1sq",
        }
    }

    pub fn parse(s: &str) -> Option<LawKind> {
        match s {
            "g" | "gaussian" => Some(LawKind::Gaussian),
            "f2" => Some(LawKind::F2),
            "f1sq" => Some(LawKind::F1Squared),
            _ => None,
        }
    }
}

/// A limit-law value with its grid size and two-resolution error estimate.
#[derive(Debug, Clone, Copy)]
pub struct LimitLawEval {
    pub value: f64,
    pub n_used: usize,
    pub error_estimate: f64,
}

const DOMAIN_LENGTH: f64 = 12.0;
const GRID_STRETCH: f64 = 2.0;

/// Standard normal CDF to ~1e-15: Maclaurin series for small arguments,
/// Lentz continued fraction for the complementary tail.
pub fn gaussian_cdf(s: f64) -> f64 {
    0.5 * erfc(-s / std::f64::consts::SQRT_2)
}

fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 3.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

fn erf_series(x: f64) -> f64 {
    // 2/sqrt(pi) * sum (-1)^n x^{2n+1} / (n! (2n+1))
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let add = term / (2.0 * n as f64 + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x.max(tiny);
    let mut d = 0.0;
    for k in 1..300 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

/// Airy kernel (Ai(x)Ai'(y) − Ai'(x)Ai(y))/(x−y), with the diagonal limit
/// Ai'(m)² − m·Ai(m)² taken at the midpoint m when |x−y| < 2e-5. At that
/// threshold the kernel's quadratic Taylor term and the cancellation of
/// the difference quotient are both around 1e-11.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    if (x - y).abs() < 2e-5 {
        let m = 0.5 * (x + y);
        let (ai, aip) = airy_pair(m);
        aip * aip - m * ai * ai
    } else {
        let (ax, apx) = airy_pair(x);
        let (ay, apy) = airy_pair(y);
        (ax * apy - apx * ay) / (x - y)
    }
}

/// ∫_y^∞ Ai(z) dz by composite Gauss panels on the decaying side; the
/// remainder beyond z = 16 is below 1e-19.
pub(crate) fn airy_integral_tail(y: f64) -> f64 {
    const UPPER: f64 = 16.0;
    if y >= UPPER {
        return 0.0;
    }
    let (nodes, weights) = linalg::gauss_legendre(20);
    let mut total = 0.0;
    let mut left = y;
    while left < UPPER {
        let right = (left + 1.0).min(UPPER);
        let half = 0.5 * (right - left);
        let mid = 0.5 * (right + left);
        for (t, w) in nodes.iter().zip(&weights) {
            total += w * half * airy_pair(mid + half * t).0;
        }
        left = right;
    }
    total
}

/// Gauss-Legendre nodes on (s, s+L], exponentially clustered toward s.
fn transformed_grid(s: f64, n: usize, length: f64) -> (Vec<f64>, Vec<f64>) {
    let (gl_nodes, gl_weights) = linalg::gauss_legendre(n);
    let c = GRID_STRETCH;
    let denom = c.exp_m1();
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for (t, w) in gl_nodes.iter().zip(&gl_weights) {
        let u = 0.5 * (t + 1.0);
        xs.push(s + length * (c * u).exp_m1() / denom);
        ws.push(0.5 * w * length * c * (c * u).exp() / denom);
    }
    (xs, ws)
}

fn check_eval_range(s: f64) -> Result<(), LimitLawError> {
    if !(-10.0..=6.0).contains(&s) || s.is_nan() {
        return Err(LimitLawError::OutOfRange(s));
    }
    Ok(())
}

fn check_quad(n: usize) -> Result<(), LimitLawError> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(LimitLawError::BadQuadSize(n));
    }
    Ok(())
}

// I - sqrt(w_i) K(x_i, x_j) sqrt(w_j), plus the optional rank-one term.
fn airy_system_matrix(xs: &[f64], ws: &[f64], rank_one: bool) -> Vec<f64> {
    let n = xs.len();
    let ai: Vec<(f64, f64)> = xs.iter().map(|&x| airy_pair(x)).collect();
    let sw: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    let tail: Vec<f64> = if rank_one {
        xs.iter().map(|&x| 1.0 - airy_integral_tail(x)).collect()
    } else {
        Vec::new()
    };
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = if i == j {
                let (a, ap) = ai[i];
                ap * ap - xs[i] * a * a
            } else if (xs[i] - xs[j]).abs() < 2e-5 {
                airy_kernel(xs[i], xs[j])
            } else {
                let (axi, apxi) = ai[i];
                let (axj, apxj) = ai[j];
                (axi * apxj - apxi * axj) / (xs[i] - xs[j])
            };
            let k = if rank_one { k + ai[i].0 * tail[j] } else { k };
            m[i * n + j] = -sw[i] * k * sw[j];
            if i == j {
                m[i * n + j] += 1.0;
            }
        }
    }
    m
}

fn f2_on_grid(s: f64, n: usize, length: f64) -> f64 {
    let (xs, ws) = transformed_grid(s, n, length);
    let m = airy_system_matrix(&xs, &ws, false);
    linalg::det_real(m, n)
}

fn f1sq_on_grid(s: f64, n: usize, length: f64) -> f64 {
    let (xs, ws) = transformed_grid(s, n, length);
    let m = airy_system_matrix(&xs, &ws, true);
    linalg::det_real(m, n)
}

#[cfg(test)]
pub(crate) fn f2_with_domain(s: f64, n: usize, length: f64) -> f64 {
    f2_on_grid(s, n, length)
}

/// F2(s) = det(I − K_Airy) on (s, ∞), s in [-10, 6].
pub fn tracy_widom_f2(s: f64, n_quad: usize) -> Result<LimitLawEval, LimitLawError> {
    check_eval_range(s)?;
    check_quad(n_quad)?;
    let value = f2_on_grid(s, n_quad, DOMAIN_LENGTH);
    let coarse = f2_on_grid(s, n_quad / 2, DOMAIN_LENGTH);
    Ok(LimitLawEval {
        value,
        n_used: n_quad,
        error_estimate: (value - coarse).abs(),
    })
}

/// F1(s)² as the determinant of the rank-one-perturbed Airy kernel,
/// evaluated directly (LU; the perturbed kernel is not symmetric).
pub fn tracy_widom_f1sq(s: f64, n_quad: usize) -> Result<LimitLawEval, LimitLawError> {
    check_eval_range(s)?;
    check_quad(n_quad)?;
    let value = f1sq_on_grid(s, n_quad, DOMAIN_LENGTH);
    let coarse = f1sq_on_grid(s, n_quad / 2, DOMAIN_LENGTH);
    Ok(LimitLawEval {
        value,
        n_used: n_quad,
        error_estimate: (value - coarse).abs(),
    })
}

/// F1(s)² through the rank-one determinant lemma:
/// det(I − K − u⊗v) = det(I − K)(1 − ⟨v, (I − K)^{-1} u⟩) with u = Ai and
/// v = ∫_{−∞}^{·} Ai. An independent evaluation path for cross-checks.
pub fn tracy_widom_f1sq_rank_one(s: f64, n_quad: usize) -> Result<LimitLawEval, LimitLawError> {
    check_eval_range(s)?;
    check_quad(n_quad)?;
    let value = f1sq_rank_one_on_grid(s, n_quad, DOMAIN_LENGTH);
    let coarse = f1sq_rank_one_on_grid(s, n_quad / 2, DOMAIN_LENGTH);
    Ok(LimitLawEval {
        value,
        n_used: n_quad,
        error_estimate: (value - coarse).abs(),
    })
}

fn f1sq_rank_one_on_grid(s: f64, n: usize, length: f64) -> f64 {
    let (xs, ws) = transformed_grid(s, n, length);
    let base = airy_system_matrix(&xs, &ws, false);
    let det_base = linalg::det_real(base.clone(), n);
    let sw: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    let u: Vec<f64> = xs
        .iter()
        .zip(&sw)
        .map(|(&x, &s_w)| airy_pair(x).0 * s_w)
        .collect();
    let v: Vec<f64> = xs
        .iter()
        .zip(&sw)
        .map(|(&x, &s_w)| (1.0 - airy_integral_tail(x)) * s_w)
        .collect();
    let z = linalg::solve_real(base, n, &u).expect("I - K is well conditioned on this range");
    let inner: f64 = v.iter().zip(&z).map(|(a, b)| a * b).sum();
    det_base * (1.0 - inner)
}

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes); stays
/// within the data's monotonicity.
#[derive(Debug, Clone)]
struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut delta = vec![0.0; n.saturating_sub(1)];
        for i in 0..n - 1 {
            delta[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = delta[0];
        slopes[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                // harmonic mean keeps the interpolant monotone
                2.0 / (1.0 / delta[i - 1] + 1.0 / delta[i])
            };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
            }
        }
        Self { xs, ys, slopes }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.xs[lo + 1] - self.xs[lo];
        let t = (x - self.xs[lo]) / h;
        let (y0, y1) = (self.ys[lo], self.ys[lo + 1]);
        let (d0, d1) = (self.slopes[lo], self.slopes[lo + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + h * d1 * (t3 - t2)
    }
}

/// A limit law tabulated on an s-grid with certified per-point error
/// estimates. Evaluation between nodes is monotone-cubic.
#[derive(Debug, Clone)]
pub struct DistributionTable {
    law: LawKind,
    /// True for current-mode targets of the form 1 − F(−s).
    reflected: bool,
    grid: Vec<f64>,
    values: Vec<f64>,
    errors: Vec<f64>,
    n_quad: usize,
    interp: MonotoneCubic,
}

impl DistributionTable {
    pub fn build(
        law: LawKind,
        s_min: f64,
        s_max: f64,
        step: f64,
        n_quad: usize,
    ) -> Result<Self, LimitLawError> {
        if step.is_nan() || step <= 0.0 || s_max.is_nan() || s_min.is_nan() || s_min >= s_max {
            return Err(LimitLawError::BadGrid(format!(
                "need s_min < s_max and step > 0 (got {s_min}, {s_max}, {step})"
            )));
        }
        if law != LawKind::Gaussian {
            check_quad(n_quad)?;
            check_eval_range(s_min)?;
            check_eval_range(s_max)?;
        }
        let count = ((s_max - s_min) / step).round() as usize + 1;
        let grid: Vec<f64> = (0..count).map(|i| s_min + i as f64 * step).collect();
        let evals: Result<Vec<(f64, f64)>, LimitLawError> = grid
            .par_iter()
            .map(|&s| -> Result<(f64, f64), LimitLawError> {
                match law {
                    LawKind::Gaussian => Ok((gaussian_cdf(s), 1e-15)),
                    LawKind::F2 => {
                        let e = tracy_widom_f2(s, n_quad)?;
                        Ok((e.value, e.error_estimate))
                    }
                    LawKind::F1Squared => {
                        let e = tracy_widom_f1sq(s, n_quad)?;
                        Ok((e.value, e.error_estimate))
                    }
                }
            })
            .collect();
        let evals = evals?;
        let values: Vec<f64> = evals.iter().map(|e| e.0).collect();
        let errors: Vec<f64> = evals.iter().map(|e| e.1).collect();
        let interp = MonotoneCubic::new(grid.clone(), values.clone());
        Ok(Self {
            law,
            reflected: false,
            grid,
            values,
            errors,
            n_quad,
            interp,
        })
    }

    pub fn law(&self) -> LawKind {
        self.law
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn n_quad(&self) -> usize {
        self.n_quad
    }

    pub fn s_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// CDF value at s (clamped to the tabulated range).
    pub fn cdf(&self, s: f64) -> f64 {
        self.interp.eval(s).clamp(0.0, 1.0)
    }

    /// Monotone-cubic interpolated inverse CDF.
    pub fn quantile(&self, p: f64) -> Result<f64, LimitLawError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(LimitLawError::QuantileRange(p));
        }
        // keep only strictly increasing (F, s) pairs for the inverse
        let mut fs = Vec::with_capacity(self.grid.len());
        let mut ss = Vec::with_capacity(self.grid.len());
        for (s, f) in self.grid.iter().zip(&self.values) {
            if fs.last().is_none_or(|&last| *f > last + 1e-13) {
                fs.push(*f);
                ss.push(*s);
            }
        }
        if fs.len() < 2 || p < fs[0] || p > *fs.last().unwrap() {
            return Err(LimitLawError::QuantileRange(p));
        }
        let inverse = MonotoneCubic::new(fs, ss);
        Ok(inverse.eval(p))
    }

    /// The current-mode target 1 − F(−s) built from this table.
    pub fn reflected_survival(&self) -> DistributionTable {
        let grid: Vec<f64> = self.grid.iter().rev().map(|s| -s).collect();
        let values: Vec<f64> = self.values.iter().rev().map(|f| 1.0 - f).collect();
        let errors: Vec<f64> = self.errors.iter().rev().cloned().collect();
        let interp = MonotoneCubic::new(grid.clone(), values.clone());
        DistributionTable {
            law: self.law,
            reflected: true,
            grid,
            values,
            errors,
            n_quad: self.n_quad,
            interp,
        }
    }

    /// CSV rows `s,F,err_estimate` after `#` metadata lines recording the
    /// law, grid size, and truncation length.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(
            out,
            "# law={}{} n_quad={} L={}",
            self.law.label(),
            if self.reflected { " reflected=1" } else { "" },
            self.n_quad,
            DOMAIN_LENGTH
        )?;
        writeln!(out, "s,F,err_estimate")?;
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.3e}",
                self.grid[i], self.values[i], self.errors[i]
            )?;
        }
        Ok(())
    }
}
