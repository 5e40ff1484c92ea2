//! Monte Carlo verification of the KPZ scaling limits: scaled statistics
//! of simulated trajectories against the tabulated limit laws, reported as
//! Kolmogorov-Smirnov distances per time horizon.
//!
//! The scaling limits run on the t/γ clock; the harness always simulates
//! to the physical time t/γ and records the scaling time t in its reports. Trials
//! use counter-based seeding (one ChaCha stream per trial), so runs are
//! reproducible bit for bit and trivially parallel.

use crate::limit_laws::{DistributionTable, LawKind, LimitLawError};
use crate::params::{
    classify_regime, scaling_constants, ModelParams, ParamsError, RegimeLabel, ScalingConstants,
    ScalingMode,
};
use crate::sim::{self, EvolveOptions, LatticeState, SimError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    LimitLaw(#[from] LimitLawError),
    #[error("scaling constant absent or zero for the requested regime")]
    DegenerateScale,
    #[error("invalid experiment plan: {0}")]
    BadPlan(String),
    #[error("target table mismatch: {0}")]
    TableMismatch(String),
    #[error("need at least two samples for a KS distance")]
    TooFewSamples,
}

/// A convergence experiment: which observable, at which ratio σ or v, at
/// which scaling-clock times, how many trials.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub params: ModelParams,
    pub mode: ScalingMode,
    /// σ = m/t (position) or v = x/t (current).
    pub ratio: f64,
    /// Scaling-clock times, strictly increasing.
    pub t_list: Vec<f64>,
    pub trials: usize,
    pub seed_root: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<RegimeLabel, HarnessError> {
        if self.params.p() >= self.params.q() {
            return Err(HarnessError::BadPlan(
                "scaling limits need a leftward drift (p < q)".into(),
            ));
        }
        if self.t_list.is_empty() || self.t_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::BadPlan(
                "t_list must be nonempty and strictly increasing".into(),
            ));
        }
        if self.t_list[0] <= 0.0 {
            return Err(HarnessError::BadPlan("times must be positive".into()));
        }
        if self.trials < 100 {
            return Err(HarnessError::BadPlan(format!(
                "need at least 100 trials (got {})",
                self.trials
            )));
        }
        match self.mode {
            ScalingMode::Position => {
                if self.ratio.is_nan() || self.ratio <= 0.0 {
                    return Err(HarnessError::BadPlan("sigma must be positive".into()));
                }
            }
            ScalingMode::Current => {
                if self.ratio.is_nan() || self.ratio <= -1.0 {
                    return Err(HarnessError::BadPlan("v must exceed -1".into()));
                }
            }
        }
        Ok(classify_regime(self.ratio, self.params.rho(), self.mode))
    }
}

/// The limit law each regime converges to (position-mode CDFs; current
/// mode uses their reflected survival forms).
pub fn target_law(regime: RegimeLabel) -> LawKind {
    match regime {
        RegimeLabel::Tw2 => LawKind::F2,
        RegimeLabel::Critical => LawKind::F1Squared,
        RegimeLabel::Gaussian => LawKind::Gaussian,
    }
}

/// (x_m − c t)/(c' t^e): centering and scale by regime, cube-root scale in
/// the Tracy-Widom regimes and square-root in the Gaussian one.
pub fn scaled_position_statistic(
    x_m: i64,
    t: f64,
    consts: &ScalingConstants,
    regime: RegimeLabel,
) -> Result<f64, HarnessError> {
    let (center, scale, exponent) = match regime {
        RegimeLabel::Tw2 | RegimeLabel::Critical => (consts.tw_center, consts.tw_scale, 1.0 / 3.0),
        RegimeLabel::Gaussian => (consts.gauss_center, consts.gauss_scale, 0.5),
    };
    let scale = scale.ok_or(HarnessError::DegenerateScale)?;
    if scale == 0.0 {
        return Err(HarnessError::DegenerateScale);
    }
    Ok((x_m as f64 - center * t) / (scale * t.powf(exponent)))
}

/// (T − a t)/(a' t^e), the current-mode analogue.
pub fn scaled_current_statistic(
    t_val: u64,
    t: f64,
    consts: &ScalingConstants,
    regime: RegimeLabel,
) -> Result<f64, HarnessError> {
    let (center, scale, exponent) = match regime {
        RegimeLabel::Tw2 | RegimeLabel::Critical => (consts.tw_center, consts.tw_scale, 1.0 / 3.0),
        RegimeLabel::Gaussian => (consts.gauss_center, consts.gauss_scale, 0.5),
    };
    let scale = scale.ok_or(HarnessError::DegenerateScale)?;
    if scale == 0.0 {
        return Err(HarnessError::DegenerateScale);
    }
    Ok((t_val as f64 - center * t) / (scale * t.powf(exponent)))
}

/// Kolmogorov-Smirnov distance of sorted samples against a CDF, with the
/// standard one-sided corrections D+ = max((i+1)/n − F) and D− = max(F − i/n).
pub fn ks_distance(sorted_samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, HarnessError> {
    let n = sorted_samples.len();
    if n < 2 {
        return Err(HarnessError::TooFewSamples);
    }
    let nf = n as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sorted_samples.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(sup)
}

/// One row of a convergence report.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    /// Scaling-clock time.
    pub t: f64,
    /// Physical simulation time t/γ.
    pub t_physical: f64,
    /// m (position mode) or x (current mode), rounded as ceil(ratio·t).
    pub index: i64,
    pub trials: usize,
    pub ks: f64,
    pub mean: f64,
    pub sd: f64,
    /// Samples outside the table's tabulated range (clamped in the CDF).
    pub clamped: usize,
}

/// Convergence of scaled statistics toward a limit law over a time ladder.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub mode: ScalingMode,
    pub regime: RegimeLabel,
    pub law: LawKind,
    pub ratio: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// CSV rows `t,trials,ks,mean,sd,regime,law`.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "t,trials,ks,mean,sd,regime,law")?;
        for row in &self.rows {
            writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{},{}",
                row.t,
                row.trials,
                row.ks,
                row.mean,
                row.sd,
                regime_label(self.regime),
                self.law.label()
            )?;
        }
        Ok(())
    }
}

pub fn regime_label(regime: RegimeLabel) -> &'static str {
    match regime {
        RegimeLabel::Tw2 => "tw2",
        RegimeLabel::Critical => "critical",
        RegimeLabel::Gaussian => "gaussian",
    }
}

/// Scaled samples for one (plan, t) pair: one simulation per trial,
/// deterministic per-trial streams.
pub fn sample_scaled_statistics(
    plan: &ExperimentPlan,
    regime: RegimeLabel,
    t: f64,
    t_index: usize,
) -> Result<Vec<f64>, HarnessError> {
    let params = plan.params;
    let gamma = params.gamma();
    let t_phys = t / gamma;
    let consts = scaling_constants(plan.ratio, &params, plan.mode)?;
    let rho = params.rho();
    let (p, q) = (params.p(), params.q());

    let index = (plan.ratio * t).ceil() as i64;
    let m_or_x = match plan.mode {
        ScalingMode::Position => index.max(1),
        ScalingMode::Current => index,
    };

    // light-cone sizing: how far information travels by t_phys, with a
    // 6-sigma Poisson margin
    let reach = |rate: f64| (rate * t_phys + 6.0 * (rate * t_phys + 1.0).sqrt()).ceil() as i64 + 25;
    let left_bound = 1 - reach(q);
    let samples: Result<Vec<f64>, HarnessError> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| -> Result<f64, HarnessError> {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed_root);
            rng.set_stream(((t_index as u64) << 32) | trial as u64);
            match plan.mode {
                ScalingMode::Position => {
                    let m = m_or_x as u32;
                    // with p = 0 only particles 1..m influence x_m; otherwise
                    // include every particle the information cone can touch
                    let n_particles = if p == 0.0 {
                        m as usize
                    } else {
                        m as usize + reach(p + q) as usize
                    };
                    let positions = sim::sample_initial_particles(rho, n_particles, &mut rng);
                    let right_bound = positions.last().unwrap() + reach(p);
                    let state = LatticeState::new(positions, (left_bound, right_bound), 0.0)?;
                    let traj =
                        sim::evolve(state, t_phys, &params, &mut rng, &EvolveOptions::default())?;
                    let x_m = sim::observe_position(&traj, m, t_phys)?;
                    scaled_position_statistic(x_m, t, &consts, regime)
                }
                ScalingMode::Current => {
                    let x = m_or_x;
                    let site_max = x + reach(q);
                    let state = sim::sample_initial(rho, (left_bound, site_max), &mut rng);
                    let right_bound = site_max + reach(p);
                    let state = LatticeState::new(
                        state.positions().to_vec(),
                        (left_bound, right_bound),
                        0.0,
                    )?;
                    let traj =
                        sim::evolve(state, t_phys, &params, &mut rng, &EvolveOptions::default())?;
                    let t_val = sim::observe_current(&traj, x, t_phys)? as u64;
                    scaled_current_statistic(t_val, t, &consts, regime)
                }
            }
        })
        .collect();
    samples
}

/// Runs the full plan against a prebuilt target table. The table's law
/// must match the plan's regime, and must be in reflected (survival) form
/// exactly when the plan is a current-mode experiment.
pub fn run_convergence(
    plan: &ExperimentPlan,
    table: &DistributionTable,
) -> Result<ConvergenceReport, HarnessError> {
    let regime = plan.validate()?;
    let law = target_law(regime);
    if table.law() != law {
        return Err(HarnessError::TableMismatch(format!(
            "plan regime needs law {}, table holds {}",
            law.label(),
            table.law().label()
        )));
    }
    let want_reflected = plan.mode == ScalingMode::Current;
    if table.is_reflected() != want_reflected {
        return Err(HarnessError::TableMismatch(
            "current-mode plans need the reflected survival table (and position plans the plain CDF)"
                .into(),
        ));
    }

    let mut rows = Vec::with_capacity(plan.t_list.len());
    for (t_index, &t) in plan.t_list.iter().enumerate() {
        let samples = sample_scaled_statistics(plan, regime, t, t_index)?;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
            / (samples.len() as f64 - 1.0);
        let clamped = samples
            .iter()
            .filter(|&&s| s < table.s_min() || s > table.s_max())
            .count();
        let mut sorted = samples;
        sorted.sort_by(f64::total_cmp);
        let ks = ks_distance(&sorted, |s| table.cdf(s))?;
        rows.push(ConvergenceRow {
            t,
            t_physical: t / plan.params.gamma(),
            index: (plan.ratio * t).ceil() as i64,
            trials: plan.trials,
            ks,
            mean,
            sd: var.sqrt(),
            clamped,
        });
    }
    Ok(ConvergenceReport {
        mode: plan.mode,
        regime,
        law,
        ratio: plan.ratio,
        rows,
    })
}
