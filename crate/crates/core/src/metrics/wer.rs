//! Word error rate from minimum-edit-distance alignment.
//!
//! WER = (substitutions + insertions + deletions) / reference tokens.
//! Corpus WER pools counts across utterances: sum of errors over the sum
//! of reference tokens, not a mean of per-utterance rates.

use thiserror::Error;

/// Reference and hypothesis token sequences for one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptPair {
    pub utt_id: String,
    pub reference: Vec<String>,
    pub hypothesis: Vec<String>,
}

impl TranscriptPair {
    pub fn new(utt_id: impl Into<String>, reference: Vec<String>, hypothesis: Vec<String>) -> Self {
        Self {
            utt_id: utt_id.into(),
            reference,
            hypothesis,
        }
    }
}

/// Error decomposition of one alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub reference_tokens: usize,
}

impl EditCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Corpus-level WER with the per-utterance count breakdown.
#[derive(Debug, Clone)]
pub struct WerResult {
    pub wer: f64,
    pub per_pair: Vec<(String, EditCounts)>,
    pub total: EditCounts,
}

#[derive(Debug, Error, PartialEq)]
pub enum WerError {
    #[error("empty reference for utterance '{0}'")]
    EmptyReference(String),
}

/// Splits on whitespace and case-folds to uppercase. Punctuation stripping
/// is off by default; when enabled, leading/trailing non-alphanumeric
/// characters are removed from each token (tokens that become empty are
/// dropped).
pub fn tokenize(text: &str, strip_punctuation: bool) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|tok| {
            let t = if strip_punctuation {
                tok.trim_matches(|c: char| !c.is_alphanumeric())
            } else {
                tok
            };
            if t.is_empty() {
                None
            } else {
                Some(t.to_uppercase())
            }
        })
        .collect()
}

/// Aligns one hypothesis against its reference with unit costs.
///
/// When DP costs tie, substitution is preferred over deletion over
/// insertion; the WER value is tie-independent, the convention only pins
/// the count decomposition for reproducibility.
pub fn align_counts(reference: &[String], hypothesis: &[String]) -> EditCounts {
    let n = reference.len();
    let m = hypothesis.len();
    // dp[i][j]: distance between reference[..i] and hypothesis[..j]
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for i in 0..=n {
        dp[i][0] = i;
    }
    for j in 0..=m {
        dp[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = dp[i - 1][j] + 1;
            let ins = dp[i][j - 1] + 1;
            dp[i][j] = sub.min(del).min(ins);
        }
    }

    let mut counts = EditCounts {
        reference_tokens: n,
        ..EditCounts::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let cost = usize::from(reference[i - 1] != hypothesis[j - 1]);
            if dp[i][j] == dp[i - 1][j - 1] + cost {
                if cost == 1 {
                    counts.substitutions += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[i][j] == dp[i - 1][j] + 1 {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    counts
}

/// Pooled corpus WER over transcript pairs.
pub fn compute_wer(pairs: &[TranscriptPair]) -> Result<WerResult, WerError> {
    let mut per_pair = Vec::with_capacity(pairs.len());
    let mut total = EditCounts::default();
    for p in pairs {
        if p.reference.is_empty() {
            return Err(WerError::EmptyReference(p.utt_id.clone()));
        }
        let c = align_counts(&p.reference, &p.hypothesis);
        total.substitutions += c.substitutions;
        total.insertions += c.insertions;
        total.deletions += c.deletions;
        total.reference_tokens += c.reference_tokens;
        per_pair.push((p.utt_id.clone(), c));
    }
    let wer = if total.reference_tokens == 0 {
        0.0
    } else {
        total.errors() as f64 / total.reference_tokens as f64
    };
    Ok(WerResult {
        wer,
        per_pair,
        total,
    })
}
