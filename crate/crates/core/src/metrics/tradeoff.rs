//! Compressed privacy-to-utility trade-off metric.
//!
//! Combines the utility degradation (WER ratio) and privacy gain
//! (EER ratio) of an anonymization system into a single score in
//! [-1, 1]; lower is a more favorable trade-off at operating point
//! lambda.

use thiserror::Error;

/// Rates of the original (index 0) and anonymized (index 1) systems,
/// expressed as fractions in (0, 1], plus the operating point lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffInputs {
    pub wer0: f64,
    pub wer1: f64,
    pub eer0: f64,
    pub eer1: f64,
    pub lambda: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum TradeoffError {
    #[error("rate {name} = {value} outside (0, 1]")]
    OutOfDomain { name: &'static str, value: f64 },
    #[error("lambda = {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
}

impl TradeoffInputs {
    pub fn validate(&self) -> Result<(), TradeoffError> {
        for (name, value) in [
            ("wer0", self.wer0),
            ("wer1", self.wer1),
            ("eer0", self.eer0),
            ("eer1", self.eer1),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(TradeoffError::OutOfDomain { name, value });
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(TradeoffError::LambdaOutOfRange(self.lambda));
        }
        Ok(())
    }
}

/// PU_tr = lambda * U - (1 - lambda) * P, where
/// U = log(1 + WER1/WER0) / log(1 + 1/WER0) and
/// P = log(1 + EER1/EER0) / log(1 + 1/EER0).
///
/// Both normalized terms lie in (0, 1], so the result is in [-1, 1] and
/// affine in lambda.
pub fn compute_putr(inputs: TradeoffInputs) -> Result<f64, TradeoffError> {
    inputs.validate()?;
    let utility = (1.0 + inputs.wer1 / inputs.wer0).ln() / (1.0 + 1.0 / inputs.wer0).ln();
    let privacy = (1.0 + inputs.eer1 / inputs.eer0).ln() / (1.0 + 1.0 / inputs.eer0).ln();
    Ok(inputs.lambda * utility - (1.0 - inputs.lambda) * privacy)
}
