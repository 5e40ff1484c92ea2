//! Model parameters, combinatorial primitives, and the scaling constants
//! of the KPZ scaling limits.
//!
//! Hop rates are normalized to `p + q = 1` throughout; the ratio `τ = p/q`
//! and the drift `γ = q − p` are always derived, never stored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("invalid hop rates: need p >= 0, q > 0, p + q = 1 (got p={p}, q={q})")]
    InvalidRates { p: f64, q: f64 },
    #[error("invalid density: need 0 < rho <= 1 (got {0})")]
    InvalidDensity(f64),
    #[error("binomial index out of range: n={n}, N={upper}")]
    BinomialIndex { n: i64, upper: i64 },
    #[error("scaling ratio out of domain: {0}")]
    RatioOutOfDomain(String),
}

/// ASEP rates and initial density. Particles hop right at rate `p`, left at
/// rate `q`, and each site of `Z+` starts occupied independently with
/// probability `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    q: f64,
    rho: f64,
}

impl ModelParams {
    /// Requires `p >= 0`, `q > 0`, `p + q = 1` (to 1e-12) and `0 < rho <= 1`.
    /// Unnormalized rates are rejected rather than rescaled.
    pub fn new(p: f64, q: f64, rho: f64) -> Result<Self, ParamsError> {
        if p.is_nan() || q.is_nan() || p < 0.0 || q <= 0.0 || (p + q - 1.0).abs() > 1e-12 {
            return Err(ParamsError::InvalidRates { p, q });
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(ParamsError::InvalidDensity(rho));
        }
        Ok(Self { p, q, rho })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// τ = p/q.
    pub fn tau(&self) -> f64 {
        self.p / self.q
    }

    /// γ = q − p.
    pub fn gamma(&self) -> f64 {
        self.q - self.p
    }
}

/// Fluctuation regime of an observable at a given (σ, ρ) or (v, ρ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    /// Below the critical line: Tracy-Widom GUE fluctuations on the t^{1/3} scale.
    Tw2,
    /// On the critical line (ρ < 1): rank-one-perturbed Airy law, still t^{1/3}.
    Critical,
    /// Above the critical line (ρ < 1): Gaussian fluctuations on the t^{1/2} scale.
    Gaussian,
}

/// Which observable the scaling constants refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMode {
    /// Tagged particle position x_m(t), with σ = m/t.
    Position,
    /// Total current T(x, t), with v = x/t.
    Current,
}

/// Centering and scale constants for the scaling limits.
///
/// In position mode `tw_center/tw_scale` are the t^{1/3} constants and
/// `gauss_center/gauss_scale` the t^{1/2} ones; in current mode the same
/// slots hold the current-scaling constants. Scales whose radicand is
/// negative are `None` rather than NaN so they cannot leak into arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingConstants {
    pub mode: ScalingMode,
    /// σ = m/t in position mode, v = x/t in current mode.
    pub ratio: f64,
    pub tw_center: f64,
    pub tw_scale: Option<f64>,
    pub gauss_center: f64,
    pub gauss_scale: Option<f64>,
}

/// τ-binomial coefficient `[N over n]_τ`, evaluated as a running product of
/// the ratios `(1 − τ^{N−j+1}) / (1 − τ^j)` so that the τ→1 limit of each
/// factor reduces to `(N−j+1)/j` by explicit cancellation.
pub fn tau_binomial(upper: i64, n: i64, tau: f64) -> Result<f64, ParamsError> {
    if n < 0 || n > upper {
        return Err(ParamsError::BinomialIndex { n, upper });
    }
    let mut acc = 1.0;
    for j in 1..=n {
        let a = upper - j + 1;
        acc *= tau_ratio_factor(a, j, tau);
    }
    Ok(acc)
}

// (1 - tau^a) / (1 - tau^b), stable near tau = 1 via expm1.
fn tau_ratio_factor(a: i64, b: i64, tau: f64) -> f64 {
    if tau == 1.0 {
        return a as f64 / b as f64;
    }
    if tau > 0.0 {
        let lt = tau.ln();
        (-f64::exp_m1(a as f64 * lt)) / (-f64::exp_m1(b as f64 * lt))
    } else {
        (1.0 - tau.powi(a as i32)) / (1.0 - tau.powi(b as i32))
    }
}

/// Exact-rational τ-binomial for rational τ. The τ = 1 point is handled by
/// the same per-factor cancellation as the float path.
pub fn tau_binomial_exact(
    upper: i64,
    n: i64,
    tau: &BigRational,
) -> Result<BigRational, ParamsError> {
    if n < 0 || n > upper {
        return Err(ParamsError::BinomialIndex { n, upper });
    }
    let one = BigRational::one();
    let mut acc = BigRational::one();
    for j in 1..=n {
        let a = upper - j + 1;
        if tau.is_one() {
            acc *= BigRational::new(BigInt::from(a), BigInt::from(j));
        } else {
            let num = &one - rational_pow(tau, a);
            let den = &one - rational_pow(tau, j);
            acc *= num / den;
        }
    }
    Ok(acc)
}

pub(crate) fn rational_pow(x: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        let mut acc = BigRational::one();
        for _ in 0..k {
            acc *= x;
        }
        acc
    } else {
        BigRational::one() / rational_pow(x, -k)
    }
}

/// Series coefficient c_{m,k} = q^{k(k−1)/2} (−1)^{m+1} τ^{m(m−1)/2} τ^{−km}
/// `[k−1 over k−m]_τ`; identically zero when m > k. Requires τ > 0.
pub fn c_mk(m: u32, k: u32, params: &ModelParams) -> f64 {
    if m > k {
        return 0.0;
    }
    let (m, k) = (m as i64, k as i64);
    let tau = params.tau();
    let q = params.q();
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let binom = tau_binomial(k - 1, k - m, tau).expect("0 <= k-m <= k-1 when m <= k");
    sign * q.powi((k * (k - 1) / 2) as i32)
        * tau.powi((m * (m - 1) / 2) as i32)
        * tau.powi((-k * m) as i32)
        * binom
}

/// Exact-rational c_{m,k} with p, q given as rationals (τ = p/q).
pub fn c_mk_exact(m: u32, k: u32, p: &BigRational, q: &BigRational) -> BigRational {
    if m > k {
        return BigRational::zero();
    }
    let (m, k) = (m as i64, k as i64);
    let tau = p / q;
    let binom = tau_binomial_exact(k - 1, k - m, &tau).expect("valid index range");
    let sign = if m % 2 == 1 {
        BigRational::one()
    } else {
        -BigRational::one()
    };
    sign * rational_pow(q, k * (k - 1) / 2)
        * rational_pow(&tau, m * (m - 1) / 2)
        * rational_pow(&tau, -k * m)
        * binom
}

/// Number of pairs (u, v) with u in `u_set`, v in `v_set`, u >= v.
/// Inputs are treated as sets; duplicates must already be removed.
pub fn sigma_count(u_set: &[i64], v_set: &[i64]) -> usize {
    u_set
        .iter()
        .map(|u| v_set.iter().filter(|v| u >= v).count())
        .sum()
}

/// Scaling constants at a given σ (position mode) or v (current mode).
///
/// Position: center −1+2√σ and scale σ^{−1/6}(1−√σ)^{2/3} on the t^{1/3}
/// side; center σ/ρ+ρ−1 and scale ρ^{−1}((1−ρ)(σ−ρ²))^{1/2} on the
/// Gaussian side. Current mode uses (1+v)²/4, 2^{−4/3}(1−v²)^{2/3},
/// ρv+ρ(1−ρ) and (ρ(1−ρ)(v+1−2ρ))^{1/2}. At σ = ρ² (resp. v = 2ρ−1) the
/// two centerings coincide and the Gaussian scale vanishes.
pub fn scaling_constants(
    ratio: f64,
    params: &ModelParams,
    mode: ScalingMode,
) -> Result<ScalingConstants, ParamsError> {
    let rho = params.rho();
    match mode {
        ScalingMode::Position => {
            if ratio.is_nan() || ratio <= 0.0 {
                return Err(ParamsError::RatioOutOfDomain(format!(
                    "position mode needs sigma > 0, got {ratio}"
                )));
            }
            let sq = ratio.sqrt();
            let tw_center = -1.0 + 2.0 * sq;
            let tw_scale = if ratio <= 1.0 {
                Some(ratio.powf(-1.0 / 6.0) * (1.0 - sq).powf(2.0 / 3.0))
            } else {
                None
            };
            let gauss_center = ratio / rho + rho - 1.0;
            let rad = (1.0 - rho) * (ratio - rho * rho);
            let gauss_scale = (rad >= 0.0).then(|| rad.sqrt() / rho);
            Ok(ScalingConstants {
                mode,
                ratio,
                tw_center,
                tw_scale,
                gauss_center,
                gauss_scale,
            })
        }
        ScalingMode::Current => {
            if ratio.is_nan() || ratio <= -1.0 {
                return Err(ParamsError::RatioOutOfDomain(format!(
                    "current mode needs v > -1, got {ratio}"
                )));
            }
            let tw_center = (1.0 + ratio) * (1.0 + ratio) / 4.0;
            let rad_tw = 1.0 - ratio * ratio;
            let tw_scale =
                (rad_tw >= 0.0).then(|| 0.25f64.powf(2.0 / 3.0) * rad_tw.powf(2.0 / 3.0));
            let gauss_center = rho * ratio + rho * (1.0 - rho);
            let rad = rho * (1.0 - rho) * (ratio + 1.0 - 2.0 * rho);
            let gauss_scale = (rad >= 0.0).then(|| rad.sqrt());
            Ok(ScalingConstants {
                mode,
                ratio,
                tw_center,
                tw_scale,
                gauss_center,
                gauss_scale,
            })
        }
    }
}

/// Regime of (σ, ρ) or (v, ρ). The critical line is σ = ρ² in position mode
/// and v = 2ρ−1 in current mode (equality tested to 1e-12 absolute); ρ = 1
/// always classifies as [`RegimeLabel::Tw2`].
pub fn classify_regime(ratio: f64, rho: f64, mode: ScalingMode) -> RegimeLabel {
    if rho >= 1.0 {
        return RegimeLabel::Tw2;
    }
    let boundary = match mode {
        ScalingMode::Position => rho * rho,
        ScalingMode::Current => 2.0 * rho - 1.0,
    };
    if (ratio - boundary).abs() <= 1e-12 {
        RegimeLabel::Critical
    } else if ratio < boundary {
        RegimeLabel::Tw2
    } else {
        RegimeLabel::Gaussian
    }
}

#[cfg(test)]
pub(crate) fn big_rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.3, 0.7, 0.5).is_ok());
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_ok());
        assert!(ModelParams::new(0.3, 0.6, 0.5).is_err());
        assert!(ModelParams::new(-0.1, 1.1, 0.5).is_err());
        assert!(ModelParams::new(0.3, 0.7, 0.0).is_err());
        assert!(ModelParams::new(0.3, 0.7, 1.5).is_err());
        let p = ModelParams::new(0.3, 0.7, 0.5).unwrap();
        assert_relative_eq!(p.tau(), 3.0 / 7.0, max_relative = 1e-15);
        assert_relative_eq!(p.gamma(), 0.4, max_relative = 1e-12);
    }

    #[test]
    fn tau_binomial_examples() {
        // empty product
        assert_eq!(tau_binomial(5, 0, 0.3).unwrap(), 1.0);
        // (1 - tau^2)/(1 - tau) = 1 + tau
        for tau in [0.1, 0.5, 0.9, 0.999999999] {
            assert_relative_eq!(
                tau_binomial(2, 1, tau).unwrap(),
                1.0 + tau,
                max_relative = 1e-12
            );
        }
        // tau = 1 reduces to the ordinary binomial coefficient
        assert_relative_eq!(tau_binomial(5, 2, 1.0).unwrap(), 10.0, max_relative = 1e-15);
        assert!(tau_binomial(3, 4, 0.5).is_err());
        assert!(tau_binomial(3, -1, 0.5).is_err());
    }

    #[test]
    fn tau_binomial_product_identity_exact() {
        // [N over n]_tau * prod_{j=1..n}(1 - tau^j) = prod_{j=0..n-1}(1 - tau^{N-j})
        for tau in [big_rational(1, 2), big_rational(2, 3), big_rational(3, 7)] {
            for upper in 0..=8i64 {
                for n in 0..=upper {
                    let lhs = tau_binomial_exact(upper, n, &tau).unwrap()
                        * (1..=n)
                            .map(|j| BigRational::one() - rational_pow(&tau, j))
                            .product::<BigRational>();
                    let rhs = (0..n)
                        .map(|j| BigRational::one() - rational_pow(&tau, upper - j))
                        .product::<BigRational>();
                    assert_eq!(lhs, rhs, "N={upper} n={n}");
                }
            }
        }
    }

    #[test]
    fn c_mk_zero_above_diagonal_and_first_value() {
        let params = ModelParams::new(0.3, 0.7, 0.5).unwrap();
        assert_eq!(c_mk(3, 2, &params), 0.0);
        assert_eq!(c_mk(5, 1, &params), 0.0);
        // m = k = 1: all factors but tau^{-1} are 1
        assert_relative_eq!(
            c_mk(1, 1, &params),
            1.0 / params.tau(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn c_mk_matches_exact_rational_oracle() {
        // term-by-term evaluation of the coefficient in exact arithmetic
        let p = big_rational(3, 10);
        let q = big_rational(7, 10);
        let params = ModelParams::new(0.3, 0.7, 0.5).unwrap();
        for m in 1..=4u32 {
            for k in m..=5u32 {
                let exact = c_mk_exact(m, k, &p, &q);
                let approx = c_mk(m, k, &params);
                let exact_f = rational_to_f64(&exact);
                assert_relative_eq!(approx, exact_f, max_relative = 1e-12);
            }
        }
    }

    fn rational_to_f64(x: &BigRational) -> f64 {
        let num = x.numer();
        let den = x.denom();
        // adequate for test-sized rationals
        let nf: f64 = num.to_string().parse().unwrap();
        let df: f64 = den.to_string().parse().unwrap();
        nf / df
    }

    #[test]
    fn c_mk_sign_pattern() {
        let params = ModelParams::new(0.4, 0.6, 0.8).unwrap();
        for m in 1..=5u32 {
            for k in m..=6u32 {
                let v = c_mk(m, k, &params);
                let expect_positive = m % 2 == 1;
                assert!(
                    (v > 0.0) == expect_positive,
                    "sign of c_({m},{k}) = {v} unexpected"
                );
            }
        }
    }

    #[test]
    fn sigma_count_examples() {
        assert_eq!(sigma_count(&[1], &[1]), 1);
        assert_eq!(sigma_count(&[], &[1, 2]), 0);
        // brute-force enumeration: pairs (2,1),(2,2) and (5,1),(5,2),(5,3)
        assert_eq!(sigma_count(&[2, 5], &[1, 2, 3]), 5);
    }

    #[test]
    fn scaling_constants_degenerate_and_boundary() {
        let params = ModelParams::new(0.3, 0.7, 0.5).unwrap();
        let c = scaling_constants(1.0, &params, ScalingMode::Position).unwrap();
        assert_relative_eq!(c.tw_center, 1.0, max_relative = 1e-14);
        assert_eq!(c.tw_scale.unwrap(), 0.0);

        // sigma = rho^2: both centerings agree and the Gaussian scale vanishes
        let c = scaling_constants(0.25, &params, ScalingMode::Position).unwrap();
        assert!((c.tw_center - c.gauss_center).abs() < 1e-14);
        assert!(c.tw_scale.is_some());
        assert!(c.gauss_scale.unwrap().abs() < 1e-14);

        let params4 = ModelParams::new(0.3, 0.7, 0.4).unwrap();
        let v = 2.0 * 0.4 - 1.0;
        let c = scaling_constants(v, &params4, ScalingMode::Current).unwrap();
        assert_relative_eq!(c.tw_center, 0.16, max_relative = 1e-12);
        assert!((c.tw_center - c.gauss_center).abs() < 1e-14);
        assert!(c.gauss_scale.unwrap().abs() < 1e-14);

        assert!(scaling_constants(0.0, &params, ScalingMode::Position).is_err());
        assert!(scaling_constants(-1.0, &params, ScalingMode::Current).is_err());
    }

    #[test]
    fn boundary_matching_random_rho() {
        // |c1 - c1'| and |a1 - a1'| below 1e-14 on the regime boundaries
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let rho: f64 = rng.gen_range(0.01..1.0);
            let params = ModelParams::new(0.3, 0.7, rho).unwrap();
            let cp = scaling_constants(rho * rho, &params, ScalingMode::Position).unwrap();
            assert!(
                (cp.tw_center - cp.gauss_center).abs() < 1e-14,
                "rho={rho}: position centers differ"
            );
            let cc = scaling_constants(2.0 * rho - 1.0, &params, ScalingMode::Current).unwrap();
            assert!(
                (cc.tw_center - cc.gauss_center).abs() < 1e-14,
                "rho={rho}: current centers differ"
            );
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_regime(0.2, 0.9, ScalingMode::Position),
            RegimeLabel::Tw2
        );
        assert_eq!(
            classify_regime(0.25, 0.5, ScalingMode::Position),
            RegimeLabel::Critical
        );
        assert_eq!(
            classify_regime(0.5, 0.3, ScalingMode::Current),
            RegimeLabel::Gaussian
        );
        assert_eq!(
            classify_regime(0.9, 1.0, ScalingMode::Position),
            RegimeLabel::Tw2
        );
    }

    proptest! {
        #[test]
        fn classify_is_a_partition(ratio in 0.001f64..2.0, rho in 0.01f64..1.0) {
            let label = classify_regime(ratio, rho, ScalingMode::Position);
            let boundary = rho * rho;
            let expected = if rho >= 1.0 || (ratio - boundary).abs() <= 1e-12 && rho < 1.0 {
                if rho >= 1.0 { RegimeLabel::Tw2 } else { RegimeLabel::Critical }
            } else if ratio < boundary {
                RegimeLabel::Tw2
            } else {
                RegimeLabel::Gaussian
            };
            prop_assert_eq!(label, expected);
        }

        #[test]
        fn tau_binomial_symmetry(upper in 0i64..12, tau in 0.05f64..0.95) {
            // [N n] = [N N-n] for the q-binomial
            for n in 0..=upper {
                let a = tau_binomial(upper, n, tau).unwrap();
                let b = tau_binomial(upper, upper - n, tau).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }
}
