//! One-way random-effects ANOVA, ICC reliability estimates and the QWK
//! ceilings derived from them.

use serde::Serialize;

use crate::agreement::{hh_reference, Kappa};
use crate::error::{Error, Result};
use crate::scale::RaterMatrix;

/// Mean squares of a one-way random-effects ANOVA (responses as groups).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaSummary {
    /// Between-response mean square, `n - 1` degrees of freedom.
    pub msb: f64,
    /// Within-response mean square, `n (k - 1)` degrees of freedom.
    pub msw: f64,
    pub n: usize,
    pub k: usize,
}

impl AnovaSummary {
    pub fn new(msb: f64, msw: f64, n: usize, k: usize) -> Result<Self> {
        if !(msb >= 0.0 && msw >= 0.0) {
            return Err(Error::Config(format!(
                "mean squares must be non-negative, got msb={msb}, msw={msw}"
            )));
        }
        if k < 2 || n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: n.min(k),
            });
        }
        Ok(Self { msb, msw, n, k })
    }

    pub fn df_between(&self) -> usize {
        self.n - 1
    }

    pub fn df_within(&self) -> usize {
        self.n * (self.k - 1)
    }
}

/// One-way ANOVA of the rater matrix.
///
/// Scores are integers, so the sums of squares are accumulated exactly:
/// with row sums `S_i`, `A = sum S_i^2`, `B = (sum S_i)^2` and
/// `C = sum x_ij^2`, `SSB = (nA - B) / (nk)` and `SSW = (kC - A) / k`.
/// Only the final divisions round, which makes the result independent of
/// row order and rater order.
pub fn oneway_anova(m: &RaterMatrix) -> Result<AnovaSummary> {
    let n = m.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let k = RaterMatrix::RATERS;
    let (mut a, mut total, mut c) = (0i128, 0i128, 0i128);
    for row in m.rows() {
        let s: i128 = row.iter().map(|&x| x as i128).sum();
        a += s * s;
        total += s;
        c += row.iter().map(|&x| (x as i128).pow(2)).sum::<i128>();
    }
    let (n_i, k_i) = (n as i128, k as i128);
    let between = n_i * a - total * total;
    let within = k_i * c - a;
    Ok(AnovaSummary {
        msb: between as f64 / (n_i * k_i * (n_i - 1)) as f64,
        msw: within as f64 / (k_i * n_i * (k_i - 1)) as f64,
        n,
        k,
    })
}

/// ICC(1,1): single-measure reliability. May be negative when `msw > msb`.
pub fn icc_single(a: &AnovaSummary) -> Result<f64> {
    let denom = a.msb + (a.k as f64 - 1.0) * a.msw;
    if denom <= 0.0 {
        return Err(Error::DegenerateVariance(
            "single-measure ICC has a zero denominator (no score variation)",
        ));
    }
    Ok((a.msb - a.msw) / denom)
}

/// ICC(1,k): average-measure reliability. May be negative when `msw > msb`.
pub fn icc_average(a: &AnovaSummary) -> Result<f64> {
    if a.msb <= 0.0 {
        return Err(Error::DegenerateVariance(
            "average-measure ICC needs a positive between-response mean square",
        ));
    }
    Ok((a.msb - a.msw) / a.msb)
}

/// Reliability of a `k`-rater average given single-rater reliability `rho_1`.
pub fn spearman_brown(rho_1: f64, k: usize) -> f64 {
    let k = k as f64;
    k * rho_1 / (1.0 + (k - 1.0) * rho_1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReliabilityEstimates {
    pub rho_1: f64,
    pub rho_y: f64,
    pub anova: AnovaSummary,
    /// Set when either estimate is negative and ceilings had to clamp it.
    pub clamped: bool,
}

impl ReliabilityEstimates {
    pub fn from_anova(anova: AnovaSummary) -> Result<Self> {
        let rho_1 = icc_single(&anova)?;
        let rho_y = icc_average(&anova)?;
        Ok(Self {
            rho_1,
            rho_y,
            anova,
            clamped: rho_1 < 0.0 || rho_y < 0.0,
        })
    }
}

pub fn estimate_reliability(m: &RaterMatrix) -> Result<ReliabilityEstimates> {
    ReliabilityEstimates::from_anova(oneway_anova(m)?)
}

/// A ceiling value together with the warning raised if clamping was needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Ceiling {
    pub value: f64,
    pub warning: Option<String>,
}

fn negative_warning(name: &str, value: f64) -> String {
    format!("{name} estimate {value:.6} is negative (msw > msb); clamped to 0 for ceilings")
}

/// `sqrt(rho_Y)`, the QWK attainable by a model predicting true scores.
pub fn theoretical_ceiling(r: &ReliabilityEstimates) -> Ceiling {
    let warning = (r.rho_y < 0.0).then(|| negative_warning("rho_Y", r.rho_y));
    Ceiling {
        value: r.rho_y.max(0.0).sqrt(),
        warning,
    }
}

/// `sqrt(rho_1 * rho_Y)`, the QWK of a model as noisy as one human rater.
pub fn human_like_ceiling(r: &ReliabilityEstimates) -> Ceiling {
    let warning = (r.rho_1 < 0.0).then(|| negative_warning("rho_1", r.rho_1));
    Ceiling {
        value: (r.rho_1.max(0.0) * r.rho_y.max(0.0)).sqrt(),
        warning,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeilingReport {
    pub kappa_max: f64,
    pub kappa_hl: f64,
    pub kappa_h: Kappa,
    pub r_h: f64,
    pub f_h: f64,
    pub reliability: ReliabilityEstimates,
    pub warnings: Vec<String>,
}

pub fn ceiling_report(m: &RaterMatrix) -> Result<CeilingReport> {
    let reliability = estimate_reliability(m)?;
    let max = theoretical_ceiling(&reliability);
    let hl = human_like_ceiling(&reliability);
    let hh = hh_reference(m)?;

    let mut warnings: Vec<String> = [max.warning, hl.warning].into_iter().flatten().collect();
    if hh.kappa_h.is_undefined() {
        warnings.push(format!("kappa_H {}", crate::agreement::UNDEFINED_KAPPA));
    }
    Ok(CeilingReport {
        kappa_max: max.value,
        kappa_hl: hl.value,
        kappa_h: hh.kappa_h,
        r_h: hh.r_h,
        f_h: hh.f_h,
        reliability,
        warnings,
    })
}
