//! Desk-scale semi-informed attack simulation over synthetic speaker
//! embeddings.
//!
//! A synthetic population stands in for corpus embeddings: each speaker
//! gets an isotropic Gaussian center (spread `between_spread`) and each
//! utterance adds isotropic noise (spread `within_spread`), all vectors
//! L2-normalized. The attacker re-estimates enrollment models on
//! anonymized enrollment data and scores anonymized test utterances
//! against them with cosine similarity; enrollment and trial sides use
//! independent target assignments. Only qualitative EER orderings are
//! meaningful here, never absolute values from PLDA-based evaluations.

use crate::metrics::eer::{compute_eer, EerError, ScoredTrial, TrialLabel};
use crate::selection::{
    cosine_similarity, l2_normalize, pseudo_xvector, select_random,
    select_random_gender_preserving, Gender, SelectionError, SelectionParams, SpeakerPool,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Shape of the synthetic speaker population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationConfig {
    pub num_speakers: usize,
    pub utts_per_speaker: usize,
    pub dim: usize,
    pub between_spread: f64,
    pub within_spread: f64,
    pub seed: u64,
}

/// One synthetic speaker with its utterance embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpeaker {
    pub speaker_id: String,
    pub gender: Gender,
    pub utterances: Vec<Vec<f64>>,
}

/// How anonymization targets are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Identity,
    Random,
    GenderPreserving,
    PseudoXvector(SelectionParams),
}

/// Whether a fresh target is drawn per utterance or once per speaker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    PerUtterance,
    PerSpeaker,
}

/// Anonymization behavior: target strategy, target assignment scope and a
/// leakage coefficient alpha mixing the original embedding back in
/// (alpha = 0 is full replacement, alpha = 1 leaves the input unchanged).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnonymizationPolicy {
    pub strategy: Strategy,
    pub assignment: Assignment,
    pub leakage: f64,
}

impl AnonymizationPolicy {
    pub fn identity() -> Self {
        Self {
            strategy: Strategy::Identity,
            assignment: Assignment::PerSpeaker,
            leakage: 1.0,
        }
    }

    fn validate(&self) -> Result<(), AttackError> {
        if !(0.0..=1.0).contains(&self.leakage) {
            return Err(AttackError::InvalidConfig("leakage alpha outside [0,1]"));
        }
        Ok(())
    }
}

/// Trial list with cosine scores and the resulting EER.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub trials: Vec<ScoredTrial>,
    pub eer: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Eer(#[from] EerError),
}

/// splitmix64; used to derive independent per-speaker / per-utterance
/// sub-seeds from a base seed.
fn mix_seed(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generates a synthetic population; reproducible from the seed.
/// Genders alternate F, M, F, M, ... deterministically.
pub fn generate_population(
    config: &PopulationConfig,
) -> Result<Vec<SyntheticSpeaker>, AttackError> {
    if config.num_speakers < 2 {
        return Err(AttackError::InvalidConfig("need at least 2 speakers"));
    }
    if config.utts_per_speaker < 2 {
        return Err(AttackError::InvalidConfig("need at least 2 utterances per speaker"));
    }
    if config.dim == 0 {
        return Err(AttackError::InvalidConfig("dim must be positive"));
    }
    if config.between_spread < 0.0 || config.within_spread < 0.0 {
        return Err(AttackError::InvalidConfig("spreads must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = StandardNormal;
    let mut speakers = Vec::with_capacity(config.num_speakers);
    for i in 0..config.num_speakers {
        let center: Vec<f64> = (0..config.dim)
            .map(|_| config.between_spread * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng))
            .collect();
        let mut utterances = Vec::with_capacity(config.utts_per_speaker);
        for _ in 0..config.utts_per_speaker {
            let mut v: Vec<f64> = center
                .iter()
                .map(|c| {
                    c + config.within_spread
                        * <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng)
                })
                .collect();
            l2_normalize(&mut v)?;
            utterances.push(v);
        }
        speakers.push(SyntheticSpeaker {
            speaker_id: format!("spk{i:03}"),
            gender: if i % 2 == 0 { Gender::F } else { Gender::M },
            utterances,
        });
    }
    Ok(speakers)
}

/// Anonymizes one utterance embedding under a policy.
///
/// The target is selected by the strategy with the supplied seed; the
/// output is normalize(alpha * utterance + (1 - alpha) * target).
pub fn anonymize_utterance(
    utt_vector: &[f64],
    source_id: &str,
    source_gender: Gender,
    pool: &SpeakerPool,
    policy: &AnonymizationPolicy,
    seed: u64,
) -> Result<Vec<f64>, AttackError> {
    policy.validate()?;
    let alpha = policy.leakage;
    let target: Vec<f64> = match &policy.strategy {
        Strategy::Identity => {
            let mut v = utt_vector.to_vec();
            l2_normalize(&mut v)?;
            return Ok(v);
        }
        Strategy::Random => select_random(pool, source_id, seed)?.vector.clone(),
        Strategy::GenderPreserving => {
            select_random_gender_preserving(pool, source_id, source_gender, seed)?
                .vector
                .clone()
        }
        Strategy::PseudoXvector(params) => {
            let p = SelectionParams { seed, ..*params };
            pseudo_xvector(pool, utt_vector, &p)?
        }
    };
    let mut out: Vec<f64> = utt_vector
        .iter()
        .zip(&target)
        .map(|(u, t)| alpha * u + (1.0 - alpha) * t)
        .collect();
    l2_normalize(&mut out)?;
    Ok(out)
}

/// Runs the semi-informed attack: anonymize enrollment and test halves of
/// the population under independent target assignments, build enrollment
/// means, and score balanced target/nontarget trials by cosine similarity.
pub fn run_attack(
    population: &[SyntheticSpeaker],
    pool: &SpeakerPool,
    enroll_policy: &AnonymizationPolicy,
    trial_policy: &AnonymizationPolicy,
    num_trials: usize,
    seed: u64,
) -> Result<AttackOutcome, AttackError> {
    if population.len() < 2 {
        return Err(AttackError::InvalidConfig("need at least 2 speakers"));
    }
    if num_trials < 100 {
        return Err(AttackError::InvalidConfig("need at least 100 trials"));
    }
    enroll_policy.validate()?;
    trial_policy.validate()?;

    // Enrollment and trial sides get unrelated seed streams so their
    // target assignments are independent.
    let enroll_base = mix_seed(seed ^ 0x5133_7AB1);
    let trial_base = mix_seed(seed ^ 0xC0FF_EE00);

    let mut enroll_models: Vec<Vec<f64>> = Vec::with_capacity(population.len());
    let mut test_utts: Vec<Vec<Vec<f64>>> = Vec::with_capacity(population.len());
    for (si, spk) in population.iter().enumerate() {
        let split = spk.utterances.len() / 2;
        let mut model = vec![0.0; spk.utterances[0].len()];
        for (ui, utt) in spk.utterances[..split].iter().enumerate() {
            let s = policy_seed(enroll_base, si, ui, enroll_policy.assignment);
            let anon = anonymize_utterance(utt, &spk.speaker_id, spk.gender, pool, enroll_policy, s)?;
            for (m, x) in model.iter_mut().zip(&anon) {
                *m += x;
            }
        }
        for m in &mut model {
            *m /= split as f64;
        }
        enroll_models.push(model);

        let mut tests = Vec::with_capacity(spk.utterances.len() - split);
        for (ui, utt) in spk.utterances[split..].iter().enumerate() {
            let s = policy_seed(trial_base, si, split + ui, trial_policy.assignment);
            tests.push(anonymize_utterance(
                utt,
                &spk.speaker_id,
                spk.gender,
                pool,
                trial_policy,
                s,
            )?);
        }
        test_utts.push(tests);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0x7219_A155));
    let n_target = num_trials / 2;
    let n_nontarget = num_trials - n_target;
    let mut trials = Vec::with_capacity(num_trials);
    for k in 0..n_target {
        let si = rng.random_range(0..population.len());
        let ui = rng.random_range(0..test_utts[si].len());
        let score = cosine_similarity(&enroll_models[si], &test_utts[si][ui]);
        trials.push(ScoredTrial::new(
            population[si].speaker_id.clone(),
            format!("{}-t{}-{k}", population[si].speaker_id, ui),
            TrialLabel::Target,
            score,
        ));
    }
    for k in 0..n_nontarget {
        let si = rng.random_range(0..population.len());
        let mut sj = rng.random_range(0..population.len() - 1);
        if sj >= si {
            sj += 1;
        }
        let ui = rng.random_range(0..test_utts[sj].len());
        let score = cosine_similarity(&enroll_models[si], &test_utts[sj][ui]);
        trials.push(ScoredTrial::new(
            population[si].speaker_id.clone(),
            format!("{}-t{}-n{k}", population[sj].speaker_id, ui),
            TrialLabel::Nontarget,
            score,
        ));
    }

    let eer = compute_eer(&trials)?.eer;
    Ok(AttackOutcome { trials, eer })
}

fn policy_seed(base: u64, speaker: usize, utt: usize, assignment: Assignment) -> u64 {
    match assignment {
        Assignment::PerSpeaker => mix_seed(base.wrapping_add((speaker as u64) << 20)),
        Assignment::PerUtterance => mix_seed(
            base.wrapping_add(((speaker as u64) << 20) | (utt as u64 + 1)),
        ),
    }
}

/// Builds a selection pool from a synthetic population by flattening it
/// into utterance embeddings and averaging per speaker.
pub fn population_to_pool(population: &[SyntheticSpeaker]) -> Result<SpeakerPool, SelectionError> {
    let mut items = Vec::new();
    for spk in population {
        for utt in &spk.utterances {
            items.push((spk.speaker_id.clone(), spk.gender, utt.clone()));
        }
    }
    crate::selection::build_pool(&items)
}
