//! Equal error rate for speaker verification trials.
//!
//! The false acceptance / false rejection curves built from a finite score
//! set are step functions, so they rarely cross at an exact sweep point.
//! Following the convention of common verification toolkits, the EER is
//! read off the convex hull of the operating points: find the hull segment
//! that crosses the FAR = FRR diagonal and interpolate linearly along it,
//! reporting (FAR + FRR) / 2 at the crossing.

use thiserror::Error;

/// Ground-truth label of a verification trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialLabel {
    /// Enrollment speaker and test utterance come from the same speaker.
    Target,
    /// Different speakers.
    Nontarget,
}

/// One enroll-vs-test comparison with its verification score.
///
/// Scores are unbounded; higher means "more likely same speaker".
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTrial {
    pub enroll_id: String,
    pub test_id: String,
    pub label: TrialLabel,
    pub score: f64,
}

impl ScoredTrial {
    pub fn new(
        enroll_id: impl Into<String>,
        test_id: impl Into<String>,
        label: TrialLabel,
        score: f64,
    ) -> Self {
        Self {
            enroll_id: enroll_id.into(),
            test_id: test_id.into(),
            label,
            score,
        }
    }
}

/// Operating point of the verifier at a decision threshold.
///
/// A score is accepted when it is >= the threshold. Across a sweep sorted
/// by threshold, `far` is non-increasing and `frr` non-decreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRatePoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// EER together with the full threshold sweep it was derived from.
#[derive(Debug, Clone)]
pub struct EerResult {
    pub eer: f64,
    pub sweep: Vec<ErrorRatePoint>,
}

#[derive(Debug, Error, PartialEq)]
pub enum EerError {
    #[error("empty {0} class: need at least one target and one nontarget trial")]
    EmptyClass(&'static str),
    #[error("non-finite score in trial list")]
    NonFiniteScore,
}

/// Computes the equal error rate of a scored trial list.
pub fn compute_eer(trials: &[ScoredTrial]) -> Result<EerResult, EerError> {
    let mut targets: Vec<f64> = Vec::new();
    let mut nontargets: Vec<f64> = Vec::new();
    for t in trials {
        if !t.score.is_finite() {
            return Err(EerError::NonFiniteScore);
        }
        match t.label {
            TrialLabel::Target => targets.push(t.score),
            TrialLabel::Nontarget => nontargets.push(t.score),
        }
    }
    compute_eer_from_scores(&targets, &nontargets)
}

/// Same as [`compute_eer`], from already-split score lists.
pub fn compute_eer_from_scores(
    targets: &[f64],
    nontargets: &[f64],
) -> Result<EerResult, EerError> {
    if targets.is_empty() {
        return Err(EerError::EmptyClass("target"));
    }
    if nontargets.is_empty() {
        return Err(EerError::EmptyClass("nontarget"));
    }
    if targets.iter().chain(nontargets).any(|s| !s.is_finite()) {
        return Err(EerError::NonFiniteScore);
    }

    let mut tar = targets.to_vec();
    let mut non = nontargets.to_vec();
    tar.sort_by(|a, b| a.partial_cmp(b).unwrap());
    non.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let sweep = build_sweep(&tar, &non);
    let eer = hull_crossing(&sweep);
    Ok(EerResult { eer, sweep })
}

/// Operating points at every distinct score plus one threshold below and
/// above the score range, so the sweep spans (far, frr) = (1, 0) to (0, 1).
fn build_sweep(tar_sorted: &[f64], non_sorted: &[f64]) -> Vec<ErrorRatePoint> {
    let mut thresholds: Vec<f64> = tar_sorted
        .iter()
        .chain(non_sorted)
        .copied()
        .collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let lo = thresholds.first().copied().unwrap();
    let hi = thresholds.last().copied().unwrap();
    let mut all = Vec::with_capacity(thresholds.len() + 2);
    all.push(lo - 1.0);
    all.extend(thresholds);
    all.push(hi + 1.0);

    let n_tar = tar_sorted.len() as f64;
    let n_non = non_sorted.len() as f64;
    all.into_iter()
        .map(|theta| {
            // accepted iff score >= theta
            let rejected_tar = tar_sorted.partition_point(|&s| s < theta);
            let rejected_non = non_sorted.partition_point(|&s| s < theta);
            ErrorRatePoint {
                threshold: theta,
                far: (non_sorted.len() - rejected_non) as f64 / n_non,
                frr: rejected_tar as f64 / n_tar,
            }
        })
        .collect()
}

/// Lower convex hull of the sweep in the (far, frr) plane, then the
/// FAR = FRR crossing interpolated along the bracketing hull segment.
fn hull_crossing(sweep: &[ErrorRatePoint]) -> f64 {
    // One point per distinct far value, keeping the smallest frr.
    let mut pts: Vec<(f64, f64)> = sweep.iter().map(|p| (p.far, p.frr)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut reduced: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        match reduced.last() {
            Some(&(f, _)) if f == p.0 => {} // first entry for this far already has min frr
            _ => reduced.push(p),
        }
    }

    // Andrew monotone chain, lower hull only.
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(reduced.len());
    for p in reduced {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }

    // far ascending, frr descending along the hull: frr - far changes sign once.
    let diff = |p: (f64, f64)| p.1 - p.0;
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (da, db) = (diff(a), diff(b));
        if da >= 0.0 && db <= 0.0 {
            if da == db {
                return a.0; // both on the diagonal
            }
            let t = da / (da - db);
            let far = a.0 + t * (b.0 - a.0);
            let frr = a.1 + t * (b.1 - a.1);
            return (far + frr) / 2.0;
        }
    }
    // Single-vertex hull or no sign change (degenerate); fall back to the
    // vertex closest to the diagonal.
    hull.iter()
        .map(|&p| (p.0 + p.1) / 2.0)
        .fold(f64::INFINITY, f64::min)
}
