//! Speaker pools and target-speaker selection strategies.
//!
//! Three strategies are provided: uniform random selection, random
//! selection restricted to the source speaker's gender, and the
//! distance-based pseudo-speaker rule (average of M embeddings sampled
//! from the N nearest pool speakers). All strategies are deterministic
//! given an explicit seed.
//!
//! Distances are cosine distances on unit vectors; the pool stores one
//! L2-normalized mean embedding per speaker.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    F,
    M,
    Unknown,
}

impl Gender {
    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "F" | "f" | "female" => Some(Gender::F),
            "M" | "m" | "male" => Some(Gender::M),
            "U" | "u" | "unknown" => Some(Gender::Unknown),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
            Gender::Unknown => "U",
        }
    }
}

/// A speaker identity vector. Pool entries are unit-L2-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerEmbedding {
    pub speaker_id: String,
    pub gender: Gender,
    pub vector: Vec<f64>,
}

/// One mean embedding per speaker, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerPool {
    pub entries: Vec<SpeakerEmbedding>,
    pub dim: usize,
}

/// Parameters of the pseudo-speaker rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionParams {
    pub n_closest: usize,
    pub m_sampled: usize,
    pub direction: Direction,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Closest,
    Farthest,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            n_closest: 200,
            m_sampled: 20,
            direction: Direction::Closest,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("empty input: no utterance embeddings")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, got {got} for speaker '{speaker}'")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        speaker: String,
    },
    #[error("no eligible target speaker")]
    NoEligibleTarget,
    #[error("selection params exceed pool: n={n}, m={m}, pool size {pool}")]
    ParamsExceedPool { n: usize, m: usize, pool: usize },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
}

pub fn l2_normalize(v: &mut [f64]) -> Result<(), SelectionError> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(SelectionError::ZeroVector);
    }
    for x in v {
        *x /= norm;
    }
    Ok(())
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Builds a pool by averaging each speaker's utterance embeddings and
/// L2-normalizing the mean. Speaker order follows first appearance; a
/// speaker's gender is the first non-Unknown value seen for it.
pub fn build_pool(
    utterance_embeddings: &[(String, Gender, Vec<f64>)],
) -> Result<SpeakerPool, SelectionError> {
    let Some((_, _, first)) = utterance_embeddings.first() else {
        return Err(SelectionError::EmptyInput);
    };
    let dim = first.len();

    let mut order: Vec<String> = Vec::new();
    let mut sums: std::collections::HashMap<String, (Gender, Vec<f64>, usize)> =
        std::collections::HashMap::new();
    for (id, gender, vec) in utterance_embeddings {
        if vec.len() != dim {
            return Err(SelectionError::DimensionMismatch {
                expected: dim,
                got: vec.len(),
                speaker: id.clone(),
            });
        }
        let entry = sums.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            (*gender, vec![0.0; dim], 0)
        });
        if entry.0 == Gender::Unknown {
            entry.0 = *gender;
        }
        for (s, x) in entry.1.iter_mut().zip(vec) {
            *s += x;
        }
        entry.2 += 1;
    }

    let mut entries = Vec::with_capacity(order.len());
    for id in order {
        let (gender, sum, count) = sums.remove(&id).unwrap();
        let mut mean: Vec<f64> = sum.into_iter().map(|s| s / count as f64).collect();
        l2_normalize(&mut mean)?;
        entries.push(SpeakerEmbedding {
            speaker_id: id,
            gender,
            vector: mean,
        });
    }
    Ok(SpeakerPool { entries, dim })
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random target over pool speakers distinct from the source.
pub fn select_random<'a>(
    pool: &'a SpeakerPool,
    source_id: &str,
    seed: u64,
) -> Result<&'a SpeakerEmbedding, SelectionError> {
    let eligible: Vec<&SpeakerEmbedding> = pool
        .entries
        .iter()
        .filter(|e| e.speaker_id != source_id)
        .collect();
    if eligible.is_empty() {
        return Err(SelectionError::NoEligibleTarget);
    }
    let idx = rng_for(seed).random_range(0..eligible.len());
    Ok(eligible[idx])
}

/// Uniform random target restricted to the source speaker's gender.
pub fn select_random_gender_preserving<'a>(
    pool: &'a SpeakerPool,
    source_id: &str,
    source_gender: Gender,
    seed: u64,
) -> Result<&'a SpeakerEmbedding, SelectionError> {
    let eligible: Vec<&SpeakerEmbedding> = pool
        .entries
        .iter()
        .filter(|e| e.speaker_id != source_id && e.gender == source_gender)
        .collect();
    if eligible.is_empty() {
        return Err(SelectionError::NoEligibleTarget);
    }
    let idx = rng_for(seed).random_range(0..eligible.len());
    Ok(eligible[idx])
}

/// Distance-based pseudo-speaker: rank the pool by cosine distance to the
/// source (ties broken by speaker id), keep the top `n_closest`, sample
/// `m_sampled` of them without replacement, average and L2-normalize.
pub fn pseudo_xvector(
    pool: &SpeakerPool,
    source_vector: &[f64],
    params: &SelectionParams,
) -> Result<Vec<f64>, SelectionError> {
    if params.m_sampled == 0
        || params.m_sampled > params.n_closest
        || params.n_closest > pool.entries.len()
    {
        return Err(SelectionError::ParamsExceedPool {
            n: params.n_closest,
            m: params.m_sampled,
            pool: pool.entries.len(),
        });
    }
    let candidates = ranked_candidates(pool, source_vector, params.direction);
    let top = &candidates[..params.n_closest];
    let picks = sample(&mut rng_for(params.seed), top.len(), params.m_sampled);
    let mut mean = vec![0.0; pool.dim];
    for i in picks {
        for (m, x) in mean.iter_mut().zip(&top[i].vector) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= params.m_sampled as f64;
    }
    l2_normalize(&mut mean)?;
    Ok(mean)
}

/// Pool entries sorted by cosine distance in the requested direction,
/// ties broken lexicographically by speaker id.
pub fn ranked_candidates<'a>(
    pool: &'a SpeakerPool,
    source_vector: &[f64],
    direction: Direction,
) -> Vec<&'a SpeakerEmbedding> {
    let mut with_dist: Vec<(f64, &SpeakerEmbedding)> = pool
        .entries
        .iter()
        .map(|e| (1.0 - cosine_similarity(source_vector, &e.vector), e))
        .collect();
    with_dist.sort_by(|(da, ea), (db, eb)| {
        let ord = da.partial_cmp(db).unwrap();
        let ord = match direction {
            Direction::Closest => ord,
            Direction::Farthest => ord.reverse(),
        };
        ord.then_with(|| ea.speaker_id.cmp(&eb.speaker_id))
    });
    with_dist.into_iter().map(|(_, e)| e).collect()
}
