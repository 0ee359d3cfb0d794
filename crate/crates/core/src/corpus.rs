//! File formats consumed and produced by the toolkit.
//!
//! All text formats are line-oriented UTF-8 with single-space separators
//! (repeated whitespace is tolerated on read, a canonical single space is
//! written). Every malformed input yields a structured error carrying the
//! line number; parsers never skip lines silently.
//!
//! Formats:
//! - trials:       `enroll_id test_utt_id target|nontarget`
//! - scores:       `enroll_id test_utt_id score`
//! - transcripts:  `utt_id token token ...`
//! - embeddings:   `speaker_id<TAB>gender<TAB>v1 v2 ... vd`
//! - weights:      `name gender weight`

use crate::metrics::eer::{ScoredTrial, TrialLabel};
use crate::metrics::wer::TranscriptPair;
use crate::pitch::AudioBuffer;
use crate::selection::Gender;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: malformed line: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: unknown trial label '{label}'")]
    UnknownLabel {
        path: String,
        line: usize,
        label: String,
    },
    #[error("missing score for trial ({enroll_id}, {test_id})")]
    MissingScore { enroll_id: String, test_id: String },
    #[error("duplicate score for key ({enroll_id}, {test_id})")]
    DuplicateScore { enroll_id: String, test_id: String },
    #[error("score for unknown trial key ({enroll_id}, {test_id})")]
    OrphanScore { enroll_id: String, test_id: String },
    #[error("{path}:{line}: duplicate utterance id '{utt_id}'")]
    DuplicateUttId {
        path: String,
        line: usize,
        utt_id: String,
    },
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("silent audio: zero RMS, cannot normalize")]
    SilentAudio,
}

/// One enroll-vs-test comparison with its ground-truth label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationTrial {
    pub enroll_id: String,
    pub test_id: String,
    pub label: TrialLabel,
}

/// One named evaluation subset with its aggregation weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetSpec {
    pub name: String,
    pub gender: Gender,
    pub weight: f64,
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn content_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parses a Kaldi-style trials file.
pub fn parse_trials(path: &Path) -> Result<Vec<VerificationTrial>, CorpusError> {
    let content = read_file(path)?;
    parse_trials_str(&content, &path.display().to_string())
}

pub fn parse_trials_str(content: &str, path: &str) -> Result<Vec<VerificationTrial>, CorpusError> {
    let mut out = Vec::new();
    for (line, text) in content_lines(content) {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CorpusError::MalformedLine {
                path: path.into(),
                line,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let label = match fields[2] {
            "target" => TrialLabel::Target,
            "nontarget" => TrialLabel::Nontarget,
            other => {
                return Err(CorpusError::UnknownLabel {
                    path: path.into(),
                    line,
                    label: other.into(),
                })
            }
        };
        out.push(VerificationTrial {
            enroll_id: fields[0].into(),
            test_id: fields[1].into(),
            label,
        });
    }
    Ok(out)
}

pub fn write_trials(trials: &[VerificationTrial]) -> String {
    let mut s = String::new();
    for t in trials {
        let label = match t.label {
            TrialLabel::Target => "target",
            TrialLabel::Nontarget => "nontarget",
        };
        writeln!(s, "{} {} {}", t.enroll_id, t.test_id, label).unwrap();
    }
    s
}

/// Parses a score file: `enroll_id test_utt_id score` per line.
pub fn parse_score_lines(
    content: &str,
    path: &str,
) -> Result<Vec<(String, String, f64)>, CorpusError> {
    let mut out = Vec::new();
    for (line, text) in content_lines(content) {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CorpusError::MalformedLine {
                path: path.into(),
                line,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let score: f64 = fields[2].parse().map_err(|_| CorpusError::MalformedLine {
            path: path.into(),
            line,
            reason: format!("unparseable score '{}'", fields[2]),
        })?;
        out.push((fields[0].into(), fields[1].into(), score));
    }
    Ok(out)
}

/// Joins a score file against a trial list by (enroll_id, test_id) key.
/// Every trial key must be scored exactly once and no score may lack a
/// trial.
pub fn parse_scores(
    path: &Path,
    trials: &[VerificationTrial],
) -> Result<Vec<ScoredTrial>, CorpusError> {
    let content = read_file(path)?;
    join_scores(
        &parse_score_lines(&content, &path.display().to_string())?,
        trials,
    )
}

pub fn join_scores(
    scores: &[(String, String, f64)],
    trials: &[VerificationTrial],
) -> Result<Vec<ScoredTrial>, CorpusError> {
    let keys: HashSet<(&str, &str)> = trials
        .iter()
        .map(|t| (t.enroll_id.as_str(), t.test_id.as_str()))
        .collect();
    let mut by_key: HashMap<(&str, &str), f64> = HashMap::new();
    for (enroll, test, score) in scores {
        let key = (enroll.as_str(), test.as_str());
        if !keys.contains(&key) {
            return Err(CorpusError::OrphanScore {
                enroll_id: enroll.clone(),
                test_id: test.clone(),
            });
        }
        if by_key.insert(key, *score).is_some() {
            return Err(CorpusError::DuplicateScore {
                enroll_id: enroll.clone(),
                test_id: test.clone(),
            });
        }
    }
    trials
        .iter()
        .map(|t| {
            by_key
                .get(&(t.enroll_id.as_str(), t.test_id.as_str()))
                .map(|&score| ScoredTrial::new(t.enroll_id.clone(), t.test_id.clone(), t.label, score))
                .ok_or_else(|| CorpusError::MissingScore {
                    enroll_id: t.enroll_id.clone(),
                    test_id: t.test_id.clone(),
                })
        })
        .collect()
}

pub fn write_scores(scores: &[ScoredTrial]) -> String {
    let mut s = String::new();
    for t in scores {
        writeln!(s, "{} {} {}", t.enroll_id, t.test_id, t.score).unwrap();
    }
    s
}

/// Joined reference/hypothesis transcripts plus the count of reference
/// utterances that had no hypothesis (scored as all-deletions).
#[derive(Debug, Clone)]
pub struct TranscriptJoin {
    pub pairs: Vec<TranscriptPair>,
    pub missing_hypotheses: usize,
}

/// Joins reference and hypothesis transcript files on utterance id.
/// Hypothesis ids must be a subset of reference ids; missing hypotheses
/// become empty token sequences and are counted.
pub fn parse_transcripts(ref_path: &Path, hyp_path: &Path) -> Result<TranscriptJoin, CorpusError> {
    let ref_content = read_file(ref_path)?;
    let hyp_content = read_file(hyp_path)?;
    join_transcripts(
        &ref_content,
        &ref_path.display().to_string(),
        &hyp_content,
        &hyp_path.display().to_string(),
    )
}

fn parse_transcript_lines(
    content: &str,
    path: &str,
) -> Result<Vec<(String, Vec<String>)>, CorpusError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, text) in content_lines(content) {
        let mut fields = text.split_whitespace();
        let utt_id = fields.next().unwrap().to_string();
        if !seen.insert(utt_id.clone()) {
            return Err(CorpusError::DuplicateUttId {
                path: path.into(),
                line,
                utt_id,
            });
        }
        out.push((utt_id, fields.map(str::to_string).collect()));
    }
    Ok(out)
}

pub fn join_transcripts(
    ref_content: &str,
    ref_path: &str,
    hyp_content: &str,
    hyp_path: &str,
) -> Result<TranscriptJoin, CorpusError> {
    let refs = parse_transcript_lines(ref_content, ref_path)?;
    let hyps = parse_transcript_lines(hyp_content, hyp_path)?;
    let ref_ids: HashSet<&str> = refs.iter().map(|(id, _)| id.as_str()).collect();
    for (id, _) in &hyps {
        if !ref_ids.contains(id.as_str()) {
            return Err(CorpusError::MalformedLine {
                path: hyp_path.into(),
                line: 0,
                reason: format!("hypothesis utterance '{id}' has no reference"),
            });
        }
    }
    let mut hyp_map: HashMap<String, Vec<String>> = hyps.into_iter().collect();
    let mut missing = 0usize;
    let pairs = refs
        .into_iter()
        .map(|(utt_id, reference)| {
            let hypothesis = match hyp_map.remove(&utt_id) {
                Some(h) => h,
                None => {
                    missing += 1;
                    Vec::new()
                }
            };
            TranscriptPair {
                utt_id,
                reference,
                hypothesis,
            }
        })
        .collect();
    Ok(TranscriptJoin {
        pairs,
        missing_hypotheses: missing,
    })
}

/// Parses an embeddings file, one utterance per line:
/// `speaker_id<TAB>gender<TAB>v1 v2 ... vd`.
pub fn parse_embeddings(path: &Path) -> Result<Vec<(String, Gender, Vec<f64>)>, CorpusError> {
    let content = read_file(path)?;
    parse_embeddings_str(&content, &path.display().to_string())
}

pub fn parse_embeddings_str(
    content: &str,
    path: &str,
) -> Result<Vec<(String, Gender, Vec<f64>)>, CorpusError> {
    let mut out = Vec::new();
    for (line, text) in content_lines(content) {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return Err(CorpusError::MalformedLine {
                path: path.into(),
                line,
                reason: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let gender = Gender::parse(fields[1]).ok_or_else(|| CorpusError::MalformedLine {
            path: path.into(),
            line,
            reason: format!("unknown gender '{}'", fields[1]),
        })?;
        let vector = fields[2]
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>().map_err(|_| CorpusError::MalformedLine {
                    path: path.into(),
                    line,
                    reason: format!("unparseable component '{v}'"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if vector.is_empty() {
            return Err(CorpusError::MalformedLine {
                path: path.into(),
                line,
                reason: "empty embedding vector".into(),
            });
        }
        out.push((fields[0].to_string(), gender, vector));
    }
    Ok(out)
}

pub fn write_embeddings(items: &[(String, Gender, Vec<f64>)]) -> String {
    let mut s = String::new();
    for (id, gender, vector) in items {
        let components: Vec<String> = vector.iter().map(|v| format!("{v}")).collect();
        writeln!(s, "{id}\t{}\t{}", gender.as_str(), components.join(" ")).unwrap();
    }
    s
}

/// Parses a weights config: `name gender weight` per line. Gender `All`
/// (or `A`) marks a subset not split by gender.
pub fn parse_weights(path: &Path) -> Result<Vec<SubsetSpec>, CorpusError> {
    let content = read_file(path)?;
    parse_weights_str(&content, &path.display().to_string())
}

pub fn parse_weights_str(content: &str, path: &str) -> Result<Vec<SubsetSpec>, CorpusError> {
    let mut out = Vec::new();
    for (line, text) in content_lines(content) {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CorpusError::MalformedLine {
                path: path.into(),
                line,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let gender = match fields[1] {
            "All" | "all" | "A" | "a" => Gender::Unknown,
            g => Gender::parse(g).ok_or_else(|| CorpusError::MalformedLine {
                path: path.into(),
                line,
                reason: format!("unknown gender '{g}'"),
            })?,
        };
        let weight: f64 = fields[2].parse().map_err(|_| CorpusError::MalformedLine {
            path: path.into(),
            line,
            reason: format!("unparseable weight '{}'", fields[2]),
        })?;
        out.push(SubsetSpec {
            name: fields[0].into(),
            gender,
            weight,
        });
    }
    Ok(out)
}

/// The default aggregation weights over the six evaluation subsets.
pub fn default_weights() -> Vec<SubsetSpec> {
    [
        ("Libri", Gender::F, 0.25),
        ("Libri", Gender::M, 0.25),
        ("Vctk-diff", Gender::F, 0.20),
        ("Vctk-diff", Gender::M, 0.20),
        ("Vctk-comm", Gender::F, 0.05),
        ("Vctk-comm", Gender::M, 0.05),
    ]
    .into_iter()
    .map(|(name, gender, weight)| SubsetSpec {
        name: name.into(),
        gender,
        weight,
    })
    .collect()
}

/// Decoded WAV audio with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub audio: AudioBuffer,
    pub source_path: String,
    pub channels: u16,
}

/// Reads a 16-bit PCM WAV file; multi-channel audio is mixed down to mono
/// by averaging.
pub fn read_wav(path: &Path) -> Result<WavAudio, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let (samples, sample_rate, channels) = decode_wav_pcm16(&bytes)?;
    Ok(WavAudio {
        audio: AudioBuffer::new(samples, sample_rate),
        source_path: path.display().to_string(),
        channels,
    })
}

fn decode_wav_pcm16(bytes: &[u8]) -> Result<(Vec<f64>, u32, u16), CorpusError> {
    let bad = |msg: &str| CorpusError::UnsupportedFormat(msg.to_string());
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("not a RIFF/WAVE file"));
    }
    let mut pos = 12usize;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_end = (pos + 8 + size).min(bytes.len());
        let body = &bytes[pos + 8..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(bad("truncated fmt chunk"));
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        pos += 8 + size + (size & 1); // chunks are word-aligned
    }
    let (format, channels, rate, bits) = fmt.ok_or_else(|| bad("missing fmt chunk"))?;
    if format != 1 || bits != 16 {
        return Err(bad("only 16-bit PCM is supported"));
    }
    if channels == 0 || rate == 0 {
        return Err(bad("invalid fmt chunk"));
    }
    let data = data.ok_or_else(|| bad("missing data chunk"))?;
    let frame_bytes = 2 * channels as usize;
    let n_frames = data.len() / frame_bytes;
    let mut samples = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let mut acc = 0.0f64;
        for c in 0..channels as usize {
            let off = f * frame_bytes + 2 * c;
            let v = i16::from_le_bytes(data[off..off + 2].try_into().unwrap());
            acc += v as f64 / 32768.0;
        }
        samples.push(acc / channels as f64);
    }
    Ok((samples, rate, channels))
}

/// Encodes mono audio as 16-bit PCM WAV (clamping to [-1, 1]).
pub fn encode_wav_pcm16(audio: &AudioBuffer) -> Vec<u8> {
    let n = audio.samples.len();
    let data_len = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &audio.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Scales the signal so its RMS equals `10^(target_db/20)` (dBFS).
pub fn rms_normalize(audio: &AudioBuffer, target_db: f64) -> Result<AudioBuffer, CorpusError> {
    let current = rms(&audio.samples);
    if current == 0.0 {
        return Err(CorpusError::SilentAudio);
    }
    let gain = 10f64.powf(target_db / 20.0) / current;
    Ok(AudioBuffer::new(
        audio.samples.iter().map(|s| s * gain).collect(),
        audio.sample_rate,
    ))
}
