//! Pairwise agreement statistics: moments, Pearson correlation, exact
//! quadratic weighted kappa, and the concordance (CCC) approximation to it.
//!
//! All moments are population moments (divide by `N`).

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scale::{PairedScores, RaterMatrix, ScoreScale};

/// Text used wherever an undefined kappa is rendered.
pub const UNDEFINED_KAPPA: &str = "undefined: zero expected disagreement";

/// Outcome of an exact QWK computation.
///
/// When both vectors are constant the expected disagreement is zero and the
/// statistic has no value; that is kept distinct from any number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    Value(f64),
    Undefined,
}

impl Kappa {
    pub fn value(self) -> Option<f64> {
        match self {
            Kappa::Value(v) => Some(v),
            Kappa::Undefined => None,
        }
    }

    /// The value, or NaN when undefined.
    pub fn or_nan(self) -> f64 {
        self.value().unwrap_or(f64::NAN)
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Kappa::Undefined)
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Value(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
            Kappa::Undefined => f.write_str(UNDEFINED_KAPPA),
        }
    }
}

impl Serialize for Kappa {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Kappa::Value(v) => s.serialize_f64(*v),
            Kappa::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Means, population variances and covariance of a score pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean_a: f64,
    pub mean_b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub covariance: f64,
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let first = xs[0];
    if xs.iter().all(|&x| x == first) {
        return (first, 0.0);
    }
    let var = xs.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Population moments of two equally long slices.
pub fn moments_of(a: &[f64], b: &[f64]) -> Result<MomentSummary> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: a.len(),
        });
    }
    let (mean_a, var_a) = mean_and_var(a);
    let (mean_b, var_b) = mean_and_var(b);
    let covariance = if var_a == 0.0 || var_b == 0.0 {
        0.0
    } else {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x - mean_a) * (y - mean_b))
            .sum::<f64>()
            / a.len() as f64
    };
    Ok(MomentSummary {
        mean_a,
        mean_b,
        var_a,
        var_b,
        covariance,
    })
}

pub fn moments(pair: &PairedScores) -> Result<MomentSummary> {
    moments_of(pair.a().values(), pair.b().values())
}

impl MomentSummary {
    /// Pearson correlation implied by these moments, clamped to `[-1, 1]`.
    pub fn correlation(&self) -> Result<f64> {
        if self.var_a <= 0.0 || self.var_b <= 0.0 {
            return Err(Error::DegenerateVariance(
                "correlation needs both variances to be positive",
            ));
        }
        Ok((self.covariance / (self.var_a * self.var_b).sqrt()).clamp(-1.0, 1.0))
    }
}

pub fn pearson(pair: &PairedScores) -> Result<f64> {
    moments(pair)?.correlation()
}

/// Attenuation factor `2 s_a s_b / (s_a^2 + s_b^2 + (m_a - m_b)^2)`, in `[0, 1]`.
pub fn ccc_factor(m: &MomentSummary) -> Result<f64> {
    let denom = m.var_a + m.var_b + (m.mean_a - m.mean_b).powi(2);
    if denom <= 0.0 {
        return Err(Error::DegenerateVariance(
            "concordance factor has a zero denominator",
        ));
    }
    let num = 2.0 * m.var_a.sqrt() * m.var_b.sqrt();
    Ok((num / denom).clamp(0.0, 1.0))
}

/// Correlation times the concordance factor, from precomputed moments.
pub fn ccc_approx_from_moments(m: &MomentSummary) -> Result<f64> {
    Ok(m.correlation()? * ccc_factor(m)?)
}

pub fn ccc_approx_qwk(pair: &PairedScores) -> Result<f64> {
    ccc_approx_from_moments(&moments(pair)?)
}

/// Exact QWK for integer scores already known to lie on `scale`.
///
/// Uses integer accumulation: with `w_ij = (i-j)^2/(K-1)^2`, the normalized
/// observed and expected weighted sums reduce to
/// `sum (a-b)^2 / N` and `sum_ij (i-j)^2 r_i c_j / N^2`, so
/// `kappa = 1 - N * observed / expected` with the `(K-1)^2` cancelling.
pub fn qwk_of_ints(a: &[i64], b: &[i64], scale: &ScoreScale) -> Kappa {
    debug_assert_eq!(a.len(), b.len());
    let k = scale.categories();
    let mut rows = vec![0u64; k];
    let mut cols = vec![0u64; k];
    let mut observed: u128 = 0;
    for (&x, &y) in a.iter().zip(b) {
        rows[(x - scale.min_score) as usize] += 1;
        cols[(y - scale.min_score) as usize] += 1;
        let d = (x - y).unsigned_abs() as u128;
        observed += d * d;
    }
    let mut expected: u128 = 0;
    for (i, &ri) in rows.iter().enumerate().filter(|(_, &r)| r > 0) {
        for (j, &cj) in cols.iter().enumerate().filter(|(_, &c)| c > 0) {
            let d = i.abs_diff(j) as u128;
            expected += d * d * ri as u128 * cj as u128;
        }
    }
    if expected == 0 {
        return Kappa::Undefined;
    }
    let n = a.len() as u128;
    Kappa::Value(1.0 - (n * observed) as f64 / expected as f64)
}

/// Exact quadratic weighted kappa between the two vectors of `pair`.
pub fn exact_qwk(pair: &PairedScores) -> Result<Kappa> {
    let scale = pair.scale();
    let a = pair.a().to_scale_ints(&scale)?;
    let b = pair.b().to_scale_ints(&scale)?;
    Ok(qwk_of_ints(&a, &b, &scale))
}

/// Human–human reference statistics of the two rater columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HumanReference {
    pub r_h: f64,
    pub f_h: f64,
    pub kappa_h: Kappa,
}

pub fn hh_reference(raters: &RaterMatrix) -> Result<HumanReference> {
    let pair = raters.as_pair();
    let m = moments(&pair)?;
    let r_h = m.correlation()?;
    let f_h = ccc_factor(&m)?;
    let kappa_h = qwk_of_ints(&raters.column(0), &raters.column(1), &raters.scale());
    Ok(HumanReference { r_h, f_h, kappa_h })
}
