//! Evaluation toolkit for speaker anonymization systems.
//!
//! Provides the scalar metrics used to score anonymization pipelines
//! (equal error rate, word error rate, pitch correlation and a compressed
//! privacy-to-utility trade-off), pseudo-speaker target selection over
//! embedding pools, a semi-informed attack simulator over synthetic
//! speaker populations, and the file formats tying them together.

pub mod attack;
pub mod corpus;
pub mod metrics;
pub mod pitch;
pub mod report;
pub mod selection;

pub use metrics::eer::{
    compute_eer, compute_eer_from_scores, EerResult, ErrorRatePoint, ScoredTrial, TrialLabel,
};
pub use metrics::tradeoff::{compute_putr, TradeoffInputs};
pub use metrics::wer::{compute_wer, EditCounts, TranscriptPair, WerResult};
pub use metrics::pearson;
