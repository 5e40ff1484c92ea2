//! The exact distribution of a tagged ASEP particle with step Bernoulli
//! initial data.
//!
//! The law P(x_m(t) <= x) is a contour integral of a Fredholm determinant:
//! an integral operator on a circle C_R of large radius R, divided by the
//! polynomial Π_{k<m}(1 − λτ^k), integrated in λ around all its poles. For
//! small deterministic initial sets the same probability is also a finite
//! series of low-dimensional contour integrals, which this module evaluates
//! independently; the two routes cross-validate each other and the CTMC
//! oracle in the simulator.

use crate::contour::{self, NystromOperator, QuadError};
use crate::params::{c_mk, rational_pow, sigma_count, ModelParams, ParamsError};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("epsilon is undefined at xi = 0")]
    ZeroXi,
    #[error("determinant law requires p != 0 and q != 0")]
    DegenerateRates,
    #[error("gamma-scaled clock requires q != p")]
    ZeroGamma,
    #[error("time must be nonnegative (got {0})")]
    NegativeTime(f64),
    #[error("particle index must satisfy 1 <= m (got {0})")]
    BadParticleIndex(u32),
    #[error("initial sets larger than 3 are unsupported (got {0})")]
    UnsupportedSetSize(usize),
    #[error("invalid site set: {0}")]
    BadSet(String),
    #[error("quadrature did not converge: value {value}, error estimate {error_estimate}")]
    Unconverged { value: f64, error_estimate: f64 },
    #[error("consistency failure: raw value {raw}, imaginary residual {imag}")]
    ConsistencyFailure { raw: f64, imag: f64 },
}

/// Whether the kernel clock is the raw time t or the drift-rescaled t/γ
/// used by the scaling limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeConvention {
    Raw,
    GammaScaled,
}

/// ε(ξ) = p/ξ + qξ − 1; vanishes at ξ = 1 under the p + q = 1 normalization.
pub fn epsilon(xi: Complex64, params: &ModelParams) -> Result<Complex64, LawError> {
    if xi == Complex64::new(0.0, 0.0) {
        return Err(LawError::ZeroXi);
    }
    Ok(eps_unchecked(xi, params.p(), params.q()))
}

#[inline]
fn eps_unchecked(xi: Complex64, p: f64, q: f64) -> Complex64 {
    p / xi + q * xi - 1.0
}

#[inline]
fn pow_site(z: Complex64, x: i64) -> Complex64 {
    // negative exponents as powers of 1/z, avoiding overflow patterns
    if x >= 0 {
        z.powi(x as i32)
    } else {
        (1.0 / z).powi((-x) as i32)
    }
}

/// Contour radius 1.05 · max(1, (1+√(1+4pq))/(2q), |1−ρ(1−τ)|): the
/// smallest circle on which p + qξξ′ − ξ and ξ − 1 + ρ(1−τ) stay away from
/// zero on and outside the contour, with 5% margin. Small R keeps the
/// e^{qRt} kernel growth, and hence floating-point range, in check.
pub fn contour_radius(params: &ModelParams) -> f64 {
    let (p, q, rho) = (params.p(), params.q(), params.rho());
    let tau = params.tau();
    let quad_root = (1.0 + (1.0 + 4.0 * p * q).sqrt()) / (2.0 * q);
    1.05 * 1.0f64.max(quad_root).max((1.0 - rho * (1.0 - tau)).abs())
}

/// The integral kernel of the determinant law at fixed (x, t):
/// q ξ^x e^{ε(ξ)T} / (p + qξξ′ − ξ) · ρ(ξ−τ)/(ξ−1+ρ(1−τ)), with T = t or
/// t/γ depending on the clock. The Bernoulli factor is dropped for the
/// deterministic step initial condition (it reduces to 1 at ρ = 1).
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    params: ModelParams,
    x: i64,
    t: f64,
    convention: TimeConvention,
    radius: f64,
    bernoulli_factor: bool,
}

impl KernelSpec {
    pub fn new(
        params: ModelParams,
        x: i64,
        t: f64,
        convention: TimeConvention,
    ) -> Result<Self, LawError> {
        Self::build(params, x, t, convention, true)
    }

    /// Factor-free kernel of the deterministic step initial condition.
    pub fn step_initial(
        params: ModelParams,
        x: i64,
        t: f64,
        convention: TimeConvention,
    ) -> Result<Self, LawError> {
        Self::build(params, x, t, convention, false)
    }

    fn build(
        params: ModelParams,
        x: i64,
        t: f64,
        convention: TimeConvention,
        bernoulli_factor: bool,
    ) -> Result<Self, LawError> {
        if params.p() == 0.0 || params.q() == 0.0 {
            return Err(LawError::DegenerateRates);
        }
        if t.is_nan() || t < 0.0 {
            return Err(LawError::NegativeTime(t));
        }
        if convention == TimeConvention::GammaScaled && params.gamma() == 0.0 {
            return Err(LawError::ZeroGamma);
        }
        Ok(Self {
            params,
            x,
            t,
            convention,
            radius: contour_radius(&params),
            bernoulli_factor,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn site(&self) -> i64 {
        self.x
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Clock actually fed to e^{ε(ξ)·}: t, or t/γ for the rescaled form.
    pub fn effective_time(&self) -> f64 {
        match self.convention {
            TimeConvention::Raw => self.t,
            TimeConvention::GammaScaled => self.t / self.params.gamma(),
        }
    }

    /// Beyond effective time ~30 the e^{qRt} kernel range degrades double
    /// precision; large times belong to the Monte Carlo route instead.
    pub fn is_conditioning_risky(&self) -> bool {
        self.effective_time() > 30.0
    }

    pub fn eval(&self, xi: Complex64, xi_p: Complex64) -> Complex64 {
        let (p, q, rho) = (self.params.p(), self.params.q(), self.params.rho());
        let tau = self.params.tau();
        let t_eff = self.effective_time();
        let base = q * pow_site(xi, self.x) * (eps_unchecked(xi, p, q) * t_eff).exp()
            / (p + q * xi * xi_p - xi);
        if self.bernoulli_factor {
            base * (rho * (xi - tau)) / (xi - 1.0 + rho * (1.0 - tau))
        } else {
            base
        }
    }
}

/// Tolerances and grid schedule for the determinant-law evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ProbOptions {
    /// Convergence target for the node-doubling loop.
    pub tol: f64,
    /// Largest acceptable imaginary residual of the probability.
    pub imag_tol: f64,
    pub n_xi_start: usize,
    pub n_xi_max: usize,
}

impl Default for ProbOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            imag_tol: 1e-8,
            n_xi_start: 64,
            n_xi_max: 1024,
        }
    }
}

/// Converged value of P(x_m(t) <= x) with its numerical certificates.
#[derive(Debug, Clone, Copy)]
pub struct ProbEvaluation {
    /// Clamped to [0, 1] after the consistency checks pass.
    pub probability: f64,
    /// Raw real part before clamping.
    pub raw: f64,
    pub imag_residual: f64,
    /// |value(n) − value(n/2)| across the last grid doubling.
    pub error_estimate: f64,
    pub n_xi: usize,
    /// λ-quadrature node count, or m when the partial-fraction residue
    /// route was used (one determinant per pole).
    pub n_lambda: usize,
}

fn lambda_node_count(n_xi: usize, m: u32) -> usize {
    (16 * m as usize).max(128).max(n_xi)
}

/// One fixed-grid evaluation of the λ-contour integral of
/// det(I − λK) / (λ Π_{k<m}(1 − λτ^k)) by trapezoidal quadrature on a
/// circle enclosing all the poles.
fn evaluate_on_grids(
    spec: &KernelSpec,
    m: u32,
    n_xi: usize,
    n_lambda: usize,
) -> Result<Complex64, LawError> {
    let params = spec.params();
    let tau = params.tau();
    let grid = contour::make_circle(Complex64::new(0.0, 0.0), spec.radius(), n_xi)?;
    let op = NystromOperator::from_kernel(|a, b| spec.eval(a, b), &grid);

    // the lambda circle must enclose 0 and every pole tau^{-k}, k < m
    let pole_reach = if tau < 1.0 {
        (1.0 / tau).powi(m as i32 - 1)
    } else {
        1.0
    };
    let r_lambda = 2.0 * pole_reach.max(1.0);
    let lgrid = contour::make_circle(Complex64::new(0.0, 0.0), r_lambda, n_lambda)?;
    let dets = op.det_family(lgrid.nodes());

    let mut total = Complex64::new(0.0, 0.0);
    for ((&lam, &w), det) in lgrid.nodes().iter().zip(lgrid.weights()).zip(&dets) {
        let mut den = lam;
        let mut tau_pow = 1.0;
        for _ in 0..m {
            den *= 1.0 - lam * tau_pow;
            tau_pow *= tau;
        }
        total += w * det / den;
    }
    Ok(total)
}

// smallest pole-separation factor |1 - tau^d| over d = ±1..±(m-1);
// controls the conditioning of the partial-fraction residue sum
fn pole_separation(tau: f64, m: u32) -> f64 {
    let mut sep = f64::INFINITY;
    for d in 1..m as i32 {
        sep = sep.min((1.0 - tau.powi(d)).abs());
        sep = sep.min((1.0 - tau.powi(-d)).abs());
    }
    sep
}

/// The same λ integral evaluated exactly by partial fractions: the
/// integrand has simple poles at 0 and τ^{-j} (j < m), so
/// P = 1 − Σ_j det(I − τ^{-j}K) / Π_{k≠j}(1 − τ^{k−j}). This avoids the
/// large-circle cancellation entirely; the determinant evaluations sit at
/// the pole locations, where the Nyström matrices stay well conditioned.
fn evaluate_residue_sum(spec: &KernelSpec, m: u32, n_xi: usize) -> Result<Complex64, LawError> {
    let tau = spec.params().tau();
    let grid = contour::make_circle(Complex64::new(0.0, 0.0), spec.radius(), n_xi)?;
    let op = NystromOperator::from_kernel(|a, b| spec.eval(a, b), &grid);
    let mut total = Complex64::new(1.0, 0.0);
    for j in 0..m as i32 {
        let lam = Complex64::new(tau.powi(-j), 0.0);
        let det = op.det_i_minus_lambda(lam)?;
        let mut den = 1.0;
        for k in 0..m as i32 {
            if k != j {
                den *= 1.0 - tau.powi(k - j);
            }
        }
        total -= det / den;
    }
    Ok(total)
}

/// P(x_m(t) <= x) by the Fredholm-determinant law, with automatic node
/// doubling until the two-resolution difference is below `opts.tol` (cap
/// `opts.n_xi_max`). Requires p, q != 0.
pub fn prob_position(
    m: u32,
    x: i64,
    t: f64,
    params: ModelParams,
    convention: TimeConvention,
    opts: &ProbOptions,
) -> Result<ProbEvaluation, LawError> {
    let spec = KernelSpec::new(params, x, t, convention)?;
    prob_position_for_kernel(&spec, m, opts)
}

/// Same probability computed from the factor-free step-initial kernel
/// (the deterministic initial condition 1, 2, 3, ...).
pub fn prob_position_step(
    m: u32,
    x: i64,
    t: f64,
    params: ModelParams,
    convention: TimeConvention,
    opts: &ProbOptions,
) -> Result<ProbEvaluation, LawError> {
    let spec = KernelSpec::step_initial(params, x, t, convention)?;
    prob_position_for_kernel(&spec, m, opts)
}

fn prob_position_for_kernel(
    spec: &KernelSpec,
    m: u32,
    opts: &ProbOptions,
) -> Result<ProbEvaluation, LawError> {
    if m < 1 {
        return Err(LawError::BadParticleIndex(m));
    }
    // Partial fractions are exact and far better conditioned than the
    // large λ circle, but their denominators degenerate as τ → 1; fall
    // back to the circle quadrature when the poles crowd together.
    let use_residues = pole_separation(spec.params().tau(), m) > 0.05;
    let eval = |n_xi: usize| -> Result<(Complex64, usize), LawError> {
        if use_residues {
            Ok((evaluate_residue_sum(spec, m, n_xi)?, m as usize))
        } else {
            let n_lambda = lambda_node_count(n_xi, m);
            Ok((evaluate_on_grids(spec, m, n_xi, n_lambda)?, n_lambda))
        }
    };
    let mut n_xi = opts.n_xi_start.max(16);
    let mut prev = eval(n_xi)?;
    loop {
        let next_n = n_xi * 2;
        if next_n > opts.n_xi_max {
            return Err(LawError::Unconverged {
                value: prev.0.re,
                error_estimate: f64::NAN,
            });
        }
        let (cur, n_lambda) = eval(next_n)?;
        let est = (cur - prev.0).norm();
        if est < opts.tol {
            return finish_probability(cur, est, next_n, n_lambda, opts);
        }
        prev = (cur, n_lambda);
        n_xi = next_n;
    }
}

/// Raw λ-contour value on explicitly fixed grids, for convergence studies:
/// no doubling, no clamping, both real and imaginary parts returned.
pub fn prob_position_on_grids(
    m: u32,
    x: i64,
    t: f64,
    params: ModelParams,
    convention: TimeConvention,
    n_xi: usize,
    n_lambda: usize,
) -> Result<(f64, f64), LawError> {
    if m < 1 {
        return Err(LawError::BadParticleIndex(m));
    }
    let spec = KernelSpec::new(params, x, t, convention)?;
    let value = evaluate_on_grids(&spec, m, n_xi, n_lambda)?;
    Ok((value.re, value.im))
}

fn finish_probability(
    value: Complex64,
    error_estimate: f64,
    n_xi: usize,
    n_lambda: usize,
    opts: &ProbOptions,
) -> Result<ProbEvaluation, LawError> {
    let raw = value.re;
    let imag = value.im.abs();
    if imag > opts.imag_tol {
        return Err(LawError::ConsistencyFailure { raw, imag });
    }
    let slack = 1e-6f64.max(10.0 * error_estimate);
    if raw < -slack || raw > 1.0 + slack {
        return Err(LawError::ConsistencyFailure { raw, imag });
    }
    Ok(ProbEvaluation {
        probability: raw.clamp(0.0, 1.0),
        raw,
        imag_residual: imag,
        error_estimate,
        n_xi,
        n_lambda,
    })
}

fn subsets_of_size(sorted: &[i64], k: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let n = sorted.len();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| sorted[i]).collect());
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// P_Y(x_m(t) = x) for a deterministic initial configuration Y (|Y| <= 3):
/// the finite series over subsets S of Y of c_{m,|S|} τ^{σ(S,Y)} times a
/// |S|-dimensional contour integral, evaluated by tensor-product
/// quadrature with node doubling.
pub fn prob_position_finite_start(
    y_sites: &[i64],
    m: u32,
    x: i64,
    t: f64,
    params: ModelParams,
) -> Result<f64, LawError> {
    if params.p() == 0.0 || params.q() == 0.0 {
        return Err(LawError::DegenerateRates);
    }
    if y_sites.is_empty() || y_sites.len() > 3 {
        return Err(LawError::UnsupportedSetSize(y_sites.len()));
    }
    if m < 1 || m as usize > y_sites.len() {
        return Err(LawError::BadParticleIndex(m));
    }
    if t.is_nan() || t < 0.0 {
        return Err(LawError::NegativeTime(t));
    }
    let mut y = y_sites.to_vec();
    y.sort_unstable();
    y.dedup();
    if y.len() != y_sites.len() {
        return Err(LawError::BadSet("duplicate sites in Y".into()));
    }

    // tensor cost is n^|Y|, so the node cap shrinks with the set size;
    // the 1e-8 certificate leaves two digits of headroom over the 1e-6
    // accuracy the oracle comparisons require
    let n_cap = if y.len() <= 2 { 512 } else { 256 };
    let mut n = 64usize;
    let mut prev = finite_start_on_grid(&y, m, x, t, &params, n)?;
    loop {
        let next_n = n * 2;
        let cur = finite_start_on_grid(&y, m, x, t, &params, next_n)?;
        let est = (cur - prev).norm();
        if est < 1e-8 {
            if cur.im.abs() > 1e-8 {
                return Err(LawError::ConsistencyFailure {
                    raw: cur.re,
                    imag: cur.im.abs(),
                });
            }
            return Ok(cur.re);
        }
        if next_n >= n_cap {
            return Err(LawError::Unconverged {
                value: cur.re,
                error_estimate: est,
            });
        }
        prev = cur;
        n = next_n;
    }
}

fn finite_start_on_grid(
    y: &[i64],
    m: u32,
    x: i64,
    t: f64,
    params: &ModelParams,
    n: usize,
) -> Result<Complex64, LawError> {
    let (p, q) = (params.p(), params.q());
    let tau = params.tau();
    let quad_root = (1.0 + (1.0 + 4.0 * p * q).sqrt()) / (2.0 * q);
    let radius = 1.05 * quad_root.max(1.0);
    let grid = contour::make_circle(Complex64::new(0.0, 0.0), radius, n)?;

    let mut total = Complex64::new(0.0, 0.0);
    for k in (m as usize)..=y.len() {
        let coef_base = c_mk(m, k as u32, params);
        for subset in subsets_of_size(y, k) {
            let coef = coef_base * tau.powi(sigma_count(&subset, y) as i32);
            let integral = contour::contour_integral_multi(
                |xs| series_integrand(xs, &subset, x, t, p, q),
                &grid,
                k,
            )?;
            total += coef * integral;
        }
    }
    Ok(total)
}

/// Integrand Π_{i<j} (ξ_j−ξ_i)/(p+qξ_iξ_j−ξ_i) · (1−Πξ_i) ·
/// Π_i ξ_i^{x−1} e^{ε(ξ_i)t} / (1−ξ_i) · Π_i ξ_i^{−s_i}.
fn series_integrand(
    xs: &[Complex64],
    s_sites: &[i64],
    x: i64,
    t: f64,
    p: f64,
    q: f64,
) -> Complex64 {
    let k = xs.len();
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..k {
        for j in i + 1..k {
            acc *= (xs[j] - xs[i]) / (p + q * xs[i] * xs[j] - xs[i]);
        }
    }
    let mut prod_all = Complex64::new(1.0, 0.0);
    for &xi in xs {
        prod_all *= xi;
    }
    acc *= 1.0 - prod_all;
    for (i, &xi) in xs.iter().enumerate() {
        acc *= pow_site(xi, x - 1) * (eps_unchecked(xi, p, q) * t).exp() / (1.0 - xi);
        acc *= pow_site(xi, -s_sites[i]);
    }
    acc
}

fn validate_weight_sites(s_sites: &[i64]) -> Result<(), LawError> {
    if s_sites.is_empty() {
        return Err(LawError::BadSet("empty site set".into()));
    }
    let mut prev = 0i64;
    for &s in s_sites {
        if s <= prev {
            return Err(LawError::BadSet(
                "sites must be strictly increasing positive integers".into(),
            ));
        }
        prev = s;
    }
    Ok(())
}

/// Closed form of the Bernoulli average of τ^{σ(S,Y)} over initial sets Y:
/// τ^{k(k+1)/2} ρ^k Π_i (1−ρ+τ^{k−i+1}ρ)^{t_i} with gap sizes
/// t_i = s_i − s_{i−1} − 1, s_0 = 0. Equals the brute-force sum over all
/// S ⊆ Y ⊆ [1, N] weighted ρ^{|Y|}(1−ρ)^{N−|Y|} for every N >= s_k.
pub fn bernoulli_average_weight(s_sites: &[i64], params: &ModelParams) -> Result<f64, LawError> {
    validate_weight_sites(s_sites)?;
    let k = s_sites.len() as i64;
    let rho = params.rho();
    let tau = params.tau();
    let mut acc = tau.powi((k * (k + 1) / 2) as i32) * rho.powi(k as i32);
    let mut prev = 0i64;
    for (i, &s) in s_sites.iter().enumerate() {
        let gap = s - prev - 1;
        let base = 1.0 - rho + tau.powi((k as usize - i) as i32) * rho;
        acc *= base.powi(gap as i32);
        prev = s;
    }
    Ok(acc)
}

/// Exact-rational twin of [`bernoulli_average_weight`].
pub fn bernoulli_average_weight_exact(
    s_sites: &[i64],
    rho: &BigRational,
    tau: &BigRational,
) -> Result<BigRational, LawError> {
    validate_weight_sites(s_sites)?;
    let k = s_sites.len() as i64;
    let one = BigRational::one();
    let mut acc = rational_pow(tau, k * (k + 1) / 2) * rational_pow(rho, k);
    let mut prev = 0i64;
    for (i, &s) in s_sites.iter().enumerate() {
        let gap = s - prev - 1;
        let base = &one - rho + rational_pow(tau, k - i as i64) * rho;
        acc *= rational_pow(&base, gap);
        prev = s;
    }
    Ok(acc)
}
