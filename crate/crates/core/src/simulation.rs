//! Monte Carlo engine for the noise sweep and the CCC accuracy check.
//!
//! Data model per trial:
//! `T = clip(round(N(true_mean, true_sd^2)))`,
//! `X_j = clip(round(T + N(0, sigma^2)))` for two independent raters, and
//! `Y = round((X_1 + X_2) / 2)`. The ideal model predicts `T` exactly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agreement::{ccc_approx_from_moments, moments_of, qwk_of_ints, Kappa};
use crate::error::{Error, Result};
use crate::reliability::ceiling_report;
use crate::rng::{trial_rng, Domain};
use crate::scale::{round_half_away, RaterMatrix, ScoreScale};

pub const DEFAULT_NOISE_LEVELS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 3.0];
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub scale: ScoreScale,
    pub true_mean: f64,
    pub true_sd: f64,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Bounds of the uniform noise distribution used by the CCC check.
    pub ccc_noise_lower: f64,
    pub ccc_noise_upper: f64,
    pub simulate_human_like: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            scale: ScoreScale::default(),
            true_mean: 5.0,
            true_sd: 3.3,
            noise_levels: DEFAULT_NOISE_LEVELS.to_vec(),
            trials: 100,
            seed: DEFAULT_SEED,
            ccc_noise_lower: 0.1,
            ccc_noise_upper: 5.0,
            simulate_human_like: false,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n < 3 {
            // the rater matrix needs three responses for the ANOVA
            return fail(format!("n must be at least 3, got {}", self.n));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.true_sd > 0.0 && self.true_sd.is_finite()) {
            return fail(format!("true_sd must be positive, got {}", self.true_sd));
        }
        if !self.true_mean.is_finite() {
            return fail("true_mean must be finite".into());
        }
        if self.noise_levels.is_empty() {
            return fail("at least one noise level is required".into());
        }
        if let Some(s) = self
            .noise_levels
            .iter()
            .find(|s| !(**s > 0.0 && s.is_finite()))
        {
            return fail(format!("noise levels must be positive, got {s}"));
        }
        if !(self.ccc_noise_lower > 0.0 && self.ccc_noise_lower < self.ccc_noise_upper)
            || !self.ccc_noise_upper.is_finite()
        {
            return fail(format!(
                "CCC noise bounds need 0 < lower < upper, got ({}, {})",
                self.ccc_noise_lower, self.ccc_noise_upper
            ));
        }
        ScoreScale::new(self.scale.min_score, self.scale.max_score)?;
        Ok(())
    }
}

/// How two rater scores are combined into a target score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRule {
    RoundedMean,
    Mean,
    Sum,
}

impl TargetRule {
    pub fn combine(self, x1: i64, x2: i64) -> f64 {
        let sum = (x1 + x2) as f64;
        match self {
            TargetRule::RoundedMean => round_half_away(sum / 2.0),
            TargetRule::Mean => sum / 2.0,
            TargetRule::Sum => sum,
        }
    }

    /// Scale on which targets built from `rater_scale` scores live.
    pub fn target_scale(self, rater_scale: ScoreScale) -> ScoreScale {
        match self {
            TargetRule::Sum => rater_scale.doubled(),
            _ => rater_scale,
        }
    }
}

impl FromStr for TargetRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "rounded_mean" => Ok(Self::RoundedMean),
            "mean" => Ok(Self::Mean),
            "sum" => Ok(Self::Sum),
            other => Err(Error::Config(format!(
                "unknown target rule `{other}` (expected rounded_mean, mean or sum)"
            ))),
        }
    }
}

impl fmt::Display for TargetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetRule::RoundedMean => "rounded_mean",
            TargetRule::Mean => "mean",
            TargetRule::Sum => "sum",
        })
    }
}

pub fn build_target(x1: &[i64], x2: &[i64], rule: TargetRule) -> Result<Vec<f64>> {
    if x1.len() != x2.len() {
        return Err(Error::LengthMismatch {
            left: x1.len(),
            right: x2.len(),
        });
    }
    Ok(x1
        .iter()
        .zip(x2)
        .map(|(&a, &b)| rule.combine(a, b))
        .collect())
}

pub fn generate_true_scores<R: Rng + ?Sized>(
    n: usize,
    scale: &ScoreScale,
    true_mean: f64,
    true_sd: f64,
    rng: &mut R,
) -> Vec<i64> {
    let dist = Normal::new(true_mean, true_sd).expect("true_sd validated positive");
    (0..n).map(|_| scale.quantize(dist.sample(rng))).collect()
}

/// Noisy copy `clip(round(t + e))` with `e ~ N(0, sigma^2)`.
fn noisy_copy<R: Rng + ?Sized>(
    t: i64,
    noise: &Normal<f64>,
    scale: &ScoreScale,
    rng: &mut R,
) -> i64 {
    scale.quantize(t as f64 + noise.sample(rng))
}

/// Two independent raters per response; draws alternate rater 1, rater 2.
pub fn generate_rater_scores<R: Rng + ?Sized>(
    true_scores: &[i64],
    sigma_noise: f64,
    scale: &ScoreScale,
    rng: &mut R,
) -> (Vec<i64>, Vec<i64>) {
    let noise = Normal::new(0.0, sigma_noise).expect("sigma_noise validated positive");
    true_scores
        .iter()
        .map(|&t| {
            let x1 = noisy_copy(t, &noise, scale, rng);
            let x2 = noisy_copy(t, &noise, scale, rng);
            (x1, x2)
        })
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub sigma_noise: f64,
    pub r_true: f64,
    pub kappa_true: f64,
    pub kappa_max_hat: f64,
    pub kappa_hl_hat: f64,
    pub kappa_h_hat: f64,
    pub kappa_ccc: f64,
    /// `kappa_true - kappa_ccc`.
    pub ccc_error: f64,
    pub kappa_humanlike_empirical: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn simulate_trial<R: Rng + ?Sized>(
    config: &SimulationConfig,
    sigma_noise: f64,
    rng: &mut R,
) -> TrialResult {
    let scale = config.scale;
    let mut warnings = Vec::new();
    let t = generate_true_scores(config.n, &scale, config.true_mean, config.true_sd, rng);
    let (x1, x2) = generate_rater_scores(&t, sigma_noise, &scale, rng);
    let y: Vec<i64> = x1
        .iter()
        .zip(&x2)
        .map(|(&a, &b)| TargetRule::RoundedMean.combine(a, b) as i64)
        .collect();

    let tf: Vec<f64> = t.iter().map(|&v| v as f64).collect();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let (r_true, kappa_ccc) = match moments_of(&tf, &yf) {
        Ok(m) => (
            m.correlation().unwrap_or_else(|e| {
                warnings.push(format!("r_true: {e}"));
                f64::NAN
            }),
            ccc_approx_from_moments(&m).unwrap_or(f64::NAN),
        ),
        Err(e) => {
            warnings.push(format!("moments(T, Y): {e}"));
            (f64::NAN, f64::NAN)
        }
    };
    let kappa_true = kappa_or_warn(qwk_of_ints(&t, &y, &scale), "kappa_true", &mut warnings);

    let (kappa_max_hat, kappa_hl_hat, kappa_h_hat) =
        match RaterMatrix::from_columns(&x1, &x2, scale).and_then(|m| ceiling_report(&m)) {
            Ok(rep) => {
                warnings.extend(rep.warnings);
                let kh = kappa_or_warn(rep.kappa_h, "kappa_H", &mut Vec::new());
                (rep.kappa_max, rep.kappa_hl, kh)
            }
            Err(e) => {
                warnings.push(format!("ceiling report: {e}"));
                (f64::NAN, f64::NAN, f64::NAN)
            }
        };

    let kappa_humanlike_empirical = config.simulate_human_like.then(|| {
        let noise = Normal::new(0.0, sigma_noise).expect("sigma_noise validated positive");
        let human_like: Vec<i64> = t
            .iter()
            .map(|&ti| noisy_copy(ti, &noise, &scale, rng))
            .collect();
        kappa_or_warn(
            qwk_of_ints(&human_like, &y, &scale),
            "kappa_humanlike_empirical",
            &mut warnings,
        )
    });

    TrialResult {
        sigma_noise,
        r_true,
        kappa_true,
        kappa_max_hat,
        kappa_hl_hat,
        kappa_h_hat,
        kappa_ccc,
        ccc_error: kappa_true - kappa_ccc,
        kappa_humanlike_empirical,
        warnings,
    }
}

fn kappa_or_warn(k: Kappa, name: &str, warnings: &mut Vec<String>) -> f64 {
    if k.is_undefined() {
        warnings.push(format!("{name} {}", crate::agreement::UNDEFINED_KAPPA));
    }
    k.or_nan()
}

/// One noise-sweep trial at `config.noise_levels[level]`.
pub fn run_trial(
    config: &SimulationConfig,
    level: usize,
    trial_index: usize,
) -> Result<TrialResult> {
    config.validate()?;
    let sigma = *config.noise_levels.get(level).ok_or_else(|| {
        Error::Config(format!(
            "noise level index {level} out of range ({} levels)",
            config.noise_levels.len()
        ))
    })?;
    let mut rng = trial_rng(config.seed, Domain::NoiseSweep, level, trial_index);
    Ok(simulate_trial(config, sigma, &mut rng))
}

/// Arithmetic means of the trial fields at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelAggregate {
    pub sigma_noise: f64,
    pub trials: usize,
    pub r_true: f64,
    pub kappa_true: f64,
    pub kappa_max_hat: f64,
    pub kappa_hl_hat: f64,
    pub kappa_h_hat: f64,
    pub kappa_ccc: f64,
    pub ccc_error: f64,
    pub kappa_humanlike_empirical: Option<f64>,
}

impl LevelAggregate {
    /// Means accumulated in ascending trial order.
    pub fn from_trials(sigma_noise: f64, trials: &[TrialResult]) -> Self {
        let n = trials.len() as f64;
        let mean = |f: fn(&TrialResult) -> f64| trials.iter().map(f).sum::<f64>() / n;
        let human_like = trials
            .iter()
            .map(|t| t.kappa_humanlike_empirical)
            .sum::<Option<f64>>()
            .map(|s| s / n);
        Self {
            sigma_noise,
            trials: trials.len(),
            r_true: mean(|t| t.r_true),
            kappa_true: mean(|t| t.kappa_true),
            kappa_max_hat: mean(|t| t.kappa_max_hat),
            kappa_hl_hat: mean(|t| t.kappa_hl_hat),
            kappa_h_hat: mean(|t| t.kappa_h_hat),
            kappa_ccc: mean(|t| t.kappa_ccc),
            ccc_error: mean(|t| t.ccc_error),
            kappa_humanlike_empirical: human_like,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub seed: u64,
    pub trials: usize,
    pub levels: Vec<LevelAggregate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Every trial of the sweep, grouped by noise level in configuration order.
pub fn run_sweep_trials(config: &SimulationConfig) -> Result<Vec<Vec<TrialResult>>> {
    config.validate()?;
    Ok(config
        .noise_levels
        .iter()
        .enumerate()
        .map(|(level, &sigma)| {
            (0..config.trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(config.seed, Domain::NoiseSweep, level, i);
                    simulate_trial(config, sigma, &mut rng)
                })
                .collect()
        })
        .collect())
}

pub fn aggregate(config: &SimulationConfig, per_level: &[Vec<TrialResult>]) -> AggregateResult {
    let mut warnings = Vec::new();
    let levels = config
        .noise_levels
        .iter()
        .zip(per_level)
        .map(|(&sigma, trials)| {
            for (i, t) in trials.iter().enumerate() {
                warnings.extend(
                    t.warnings
                        .iter()
                        .map(|w| format!("sigma_noise={sigma} trial {i}: {w}")),
                );
            }
            LevelAggregate::from_trials(sigma, trials)
        })
        .collect();
    AggregateResult {
        seed: config.seed,
        trials: config.trials,
        levels,
        warnings,
    }
}

pub fn run_noise_sweep(config: &SimulationConfig) -> Result<AggregateResult> {
    let trials = run_sweep_trials(config)?;
    Ok(aggregate(config, &trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CccPoint {
    pub sigma_noise: f64,
    pub kappa_ccc: f64,
    pub kappa_true: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CccCheck {
    pub seed: u64,
    pub points: Vec<CccPoint>,
    /// Mean of `|kappa_true - kappa_ccc|` over all points.
    pub mae: f64,
    pub max_abs_error: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Trials with `sigma_noise ~ U(lower, upper)`, comparing exact QWK of
/// `(T, Y)` with its concordance approximation.
pub fn run_ccc_check(config: &SimulationConfig) -> Result<CccCheck> {
    config.validate()?;
    let noise_dist = Uniform::new(config.ccc_noise_lower, config.ccc_noise_upper)
        .map_err(|e| Error::Config(e.to_string()))?;
    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(config.seed, Domain::CccCheck, 0, i);
            let sigma = noise_dist.sample(&mut rng);
            let plain = SimulationConfig {
                simulate_human_like: false,
                ..config.clone()
            };
            simulate_trial(&plain, sigma, &mut rng)
        })
        .collect();

    let points: Vec<CccPoint> = trials
        .iter()
        .map(|t| CccPoint {
            sigma_noise: t.sigma_noise,
            kappa_ccc: t.kappa_ccc,
            kappa_true: t.kappa_true,
        })
        .collect();
    let errors: Vec<f64> = trials.iter().map(|t| t.ccc_error.abs()).collect();
    let mae = errors.iter().sum::<f64>() / errors.len() as f64;
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    let warnings = trials
        .iter()
        .enumerate()
        .flat_map(|(i, t)| t.warnings.iter().map(move |w| format!("trial {i}: {w}")))
        .collect();
    Ok(CccCheck {
        seed: config.seed,
        points,
        mae,
        max_abs_error,
        warnings,
    })
}
