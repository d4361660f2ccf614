//! Score scales and the vectors/matrices that live on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Round to the nearest integer, ties away from zero.
///
/// This is the single rounding policy used for true scores, rater scores,
/// rounded-mean targets and prediction rounding.
#[inline]
pub fn round_half_away(x: f64) -> f64 {
    // f64::round already breaks ties away from zero.
    x.round()
}

/// A bounded, equally spaced integer score scale `min_score..=max_score`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreScale {
    pub min_score: i64,
    pub max_score: i64,
}

impl ScoreScale {
    pub fn new(min_score: i64, max_score: i64) -> Result<Self> {
        if max_score <= min_score {
            return Err(Error::Config(format!(
                "score scale needs max > min, got [{min_score}, {max_score}]"
            )));
        }
        Ok(Self {
            min_score,
            max_score,
        })
    }

    /// Number of categories `K = max - min + 1`.
    pub fn categories(&self) -> usize {
        (self.max_score - self.min_score + 1) as usize
    }

    pub fn contains(&self, score: i64) -> bool {
        (self.min_score..=self.max_score).contains(&score)
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.min_score as f64, self.max_score as f64)
    }

    /// Round then clip, producing an in-scale integer.
    pub fn quantize(&self, x: f64) -> i64 {
        self.clip(round_half_away(x)) as i64
    }

    /// Scale of the sum of two scores on this scale.
    pub fn doubled(&self) -> Self {
        Self {
            min_score: 2 * self.min_score,
            max_score: 2 * self.max_score,
        }
    }

    /// Validate that `value` is an integer inside the scale and return it.
    pub fn check(&self, value: f64, row: Option<usize>) -> Result<i64> {
        let violation = || Error::ScaleViolation {
            row,
            value,
            min: self.min_score,
            max: self.max_score,
        };
        if !value.is_finite() || value.fract() != 0.0 {
            return Err(violation());
        }
        let v = value as i64;
        if self.contains(v) {
            Ok(v)
        } else {
            Err(violation())
        }
    }
}

impl Default for ScoreScale {
    fn default() -> Self {
        Self {
            min_score: 0,
            max_score: 10,
        }
    }
}

/// A realized sample of scores (rater columns, targets, predictions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: values.len(),
            });
        }
        Ok(Self(values))
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| v as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks every value is an integer on `scale` and returns them as integers.
    pub fn to_scale_ints(&self, scale: &ScoreScale) -> Result<Vec<i64>> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &v)| scale.check(v, Some(i + 1)))
            .collect()
    }

    /// Round and clip every value onto `scale`.
    pub fn quantized(&self, scale: &ScoreScale) -> Self {
        Self(self.0.iter().map(|&v| scale.quantize(v) as f64).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Two equally long score vectors on a shared scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScores {
    a: ScoreVector,
    b: ScoreVector,
    scale: ScoreScale,
}

impl PairedScores {
    pub fn new(a: ScoreVector, b: ScoreVector, scale: ScoreScale) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        Ok(Self { a, b, scale })
    }

    pub fn from_ints(a: &[i64], b: &[i64], scale: ScoreScale) -> Result<Self> {
        Self::new(
            ScoreVector::from_ints(a)?,
            ScoreVector::from_ints(b)?,
            scale,
        )
    }

    pub fn a(&self) -> &ScoreVector {
        &self.a
    }

    pub fn b(&self) -> &ScoreVector {
        &self.b
    }

    pub fn scale(&self) -> ScoreScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            scale: self.scale,
        }
    }
}

/// `N` responses scored by two raters on a common scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterMatrix {
    rows: Vec<[i64; 2]>,
    scale: ScoreScale,
}

impl RaterMatrix {
    /// Raters per response. The ingestion path is fixed to two raters.
    pub const RATERS: usize = 2;

    pub fn new(rows: Vec<[i64; 2]>, scale: ScoreScale) -> Result<Self> {
        if rows.len() < 3 {
            return Err(Error::InsufficientData {
                needed: 3,
                got: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            for &x in row {
                scale.check(x as f64, Some(i + 1))?;
            }
        }
        Ok(Self { rows, scale })
    }

    pub fn from_columns(first: &[i64], second: &[i64], scale: ScoreScale) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: second.len(),
            });
        }
        Self::new(
            first.iter().zip(second).map(|(&a, &b)| [a, b]).collect(),
            scale,
        )
    }

    pub fn rows(&self) -> &[[i64; 2]] {
        &self.rows
    }

    pub fn scale(&self) -> ScoreScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// The two rater columns as a [`PairedScores`].
    pub fn as_pair(&self) -> PairedScores {
        let to_vec = |j| ScoreVector(self.rows.iter().map(|r: &[i64; 2]| r[j] as f64).collect());
        PairedScores {
            a: to_vec(0),
            b: to_vec(1),
            scale: self.scale,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            rows: self.rows.iter().map(|&[a, b]| [b, a]).collect(),
            scale: self.scale,
        }
    }
}
