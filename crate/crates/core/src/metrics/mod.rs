//! Scalar evaluation metrics: equal error rate, word error rate,
//! privacy-to-utility trade-off and Pearson correlation.
//!
//! All functions here are pure; per-subset metrics can be computed in
//! parallel with deterministic results.

pub mod eer;
pub mod tradeoff;
pub mod wer;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PearsonError {
    #[error("need at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate input: a sequence has zero variance")]
    DegenerateInput,
}

/// Product-moment correlation coefficient of two equal-length sequences.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, PearsonError> {
    if x.len() != y.len() {
        return Err(PearsonError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(PearsonError::TooShort(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(PearsonError::DegenerateInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}
