//! Acceptance suite: one test per criterion, each printing a single
//! `criterion NN <name>: pass|FAIL` line (visible with `--nocapture`).
//!
//! Oracles here are written independently of the library internals:
//! the EER check uses the max-min-prior characterization of the convex-
//! hull equal error rate, and the WER check uses a plain recursive
//! edit-distance.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};
use vpeval::attack::{
    generate_population, population_to_pool, run_attack, AnonymizationPolicy, Assignment,
    PopulationConfig, Strategy,
};
use vpeval::corpus;
use vpeval::pitch::{extract_f0, pitch_correlation, AudioBuffer, F0Contour, Frame, PitchConfig};
use vpeval::report::{
    aggregate_mean, aggregate_weighted, parse_report_csv, putr_sweep, render_csv, render_markdown,
    EvalReport, MetricRow, ReportMeta,
};
use vpeval::selection::{
    build_pool, pseudo_xvector, select_random, select_random_gender_preserving, Direction, Gender,
    SelectionParams,
};
use vpeval::{
    compute_eer_from_scores, compute_putr, compute_wer, ScoredTrial, TradeoffInputs,
    TranscriptPair, TrialLabel,
};

/// Runs a criterion body, prints its verdict line, enforces the runtime
/// budget (relaxed 10x for unoptimized builds) and re-raises any failure.
fn criterion(number: u32, name: &str, budget: Duration, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let verdict = if outcome.is_ok() { "pass" } else { "FAIL" };
    println!("criterion {number:02} {name}: {verdict} ({elapsed:.2?})");
    if let Err(panic) = outcome {
        resume_unwind(panic);
    }
    let budget = if cfg!(debug_assertions) { budget * 10 } else { budget };
    assert!(
        elapsed < budget,
        "criterion {number} exceeded runtime budget: {elapsed:.2?} >= {budget:?}"
    );
}

// Published per-subset EERs [%]: (set, gender, weight, Orig, B1a, VB).
const EER_DEV: [(&str, &str, f64, f64, f64, f64); 6] = [
    ("Libri", "F", 0.25, 4.12, 14.6, 52.6),
    ("Libri", "M", 0.25, 0.93, 10.2, 43.9),
    ("Vctk-diff", "F", 0.20, 0.84, 9.1, 53.3),
    ("Vctk-diff", "M", 0.20, 0.64, 8.1, 41.4),
    ("Vctk-comm", "F", 0.05, 0.87, 10.2, 42.4),
    ("Vctk-comm", "M", 0.05, 0.58, 9.7, 51.3),
];
const EER_TEST: [(&str, &str, f64, f64, f64, f64); 6] = [
    ("Libri", "F", 0.25, 2.55, 12.7, 46.0),
    ("Libri", "M", 0.25, 0.43, 10.5, 48.5),
    ("Vctk-diff", "F", 0.20, 1.59, 14.7, 35.2),
    ("Vctk-diff", "M", 0.20, 0.97, 12.2, 39.0),
    ("Vctk-comm", "F", 0.05, 0.34, 13.8, 41.6),
    ("Vctk-comm", "M", 0.05, 0.28, 7.1, 48.9),
];

#[test]
fn criterion_01_weighted_eer_aggregation() {
    criterion(1, "weighted EER aggregation", Duration::from_secs(1), || {
        let check = |table: &[(&str, &str, f64, f64, f64, f64)], expected: [f64; 3]| {
            for (col, want) in [3usize, 4, 5].into_iter().zip(expected) {
                let rows: Vec<(f64, f64)> = table
                    .iter()
                    .map(|r| {
                        let value = [r.3, r.4, r.5][col - 3];
                        (value, r.2)
                    })
                    .collect();
                let got = aggregate_weighted(&rows).unwrap();
                // epsilon on top of the tolerance: 47.75 vs 47.8 is a
                // boundary case that float subtraction pushes just over
                assert!(
                    (got - want).abs() <= 0.05 + 1e-9,
                    "weighted aggregate {got} vs published {want}"
                );
            }
        };
        check(&EER_DEV, [1.63, 10.64, 47.8]);
        check(&EER_TEST, [1.29, 12.2, 43.0]);
    });
}

// Published per-set WERs [%]: rows Libri/Vctk, columns the six systems.
const WER_DEV: [[f64; 6]; 2] = [
    [2.33, 2.77, 4.22, 4.04, 4.72, 6.51],
    [8.21, 9.59, 14.58, 13.95, 16.24, 19.39],
];
const WER_TEST: [[f64; 6]; 2] = [
    [2.47, 2.85, 3.84, 3.78, 4.17, 7.19],
    [7.63, 9.39, 13.65, 9.86, 9.63, 18.12],
];
const WER_AVG_DEV: [f64; 6] = [5.27, 6.18, 9.4, 9.0, 10.5, 12.95];
const WER_AVG_TEST: [f64; 6] = [5.1, 6.12, 8.75, 6.82, 6.92, 12.7];

#[test]
fn criterion_02_unweighted_wer_averages() {
    criterion(2, "unweighted WER averages", Duration::from_secs(1), || {
        for (table, expected) in [(WER_DEV, WER_AVG_DEV), (WER_TEST, WER_AVG_TEST)] {
            for (sys, want) in expected.iter().enumerate() {
                let got = aggregate_mean(&[table[0][sys], table[1][sys]]).unwrap();
                assert!(
                    (got - want).abs() <= 0.05,
                    "mean {got} vs published {want}"
                );
            }
        }
    });
}

const SYSTEMS: [&str; 6] = ["Orig", "B1a", "VR", "VGP", "BV", "VB"];
const LAMBDA_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[test]
fn criterion_03_putr_properties() {
    criterion(3, "PU_tr property suite", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100_000 {
            let inputs = TradeoffInputs {
                wer0: rng.random_range(f64::MIN_POSITIVE..=1.0),
                wer1: rng.random_range(f64::MIN_POSITIVE..=1.0),
                eer0: rng.random_range(f64::MIN_POSITIVE..=1.0),
                eer1: rng.random_range(f64::MIN_POSITIVE..=1.0),
                lambda: rng.random_range(0.0..=1.0),
            };
            let v = compute_putr(inputs).unwrap();
            assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v), "{v} out of range");

            // affinity in lambda: midpoint value is the mean of the endpoints
            let la = rng.random_range(0.0..=1.0);
            let lb = rng.random_range(0.0..=1.0);
            let at = |lambda| compute_putr(TradeoffInputs { lambda, ..inputs }).unwrap();
            let mid = at(0.5 * (la + lb));
            assert!((mid - 0.5 * (at(la) + at(lb))).abs() < 1e-9);
        }

        // boundary identities, exact at dyadic lambdas
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let saturated = compute_putr(TradeoffInputs {
                wer0: 0.37,
                wer1: 1.0,
                eer0: 0.054,
                eer1: 1.0,
                lambda,
            })
            .unwrap();
            assert_eq!(saturated, 2.0 * lambda - 1.0);
        }
        let floor = compute_putr(TradeoffInputs {
            wer0: 0.21,
            wer1: 0.8,
            eer0: 1.0,
            eer1: 1.0,
            lambda: 0.0,
        })
        .unwrap();
        assert_eq!(floor, -1.0);

        // published dev-set sweep: monotone per system, with the claimed
        // winners at the ends of the lambda grid
        let dev_rates: [(f64, f64); 6] = [
            (5.27, 1.63),
            (6.18, 10.64),
            (9.4, 23.3),
            (9.0, 25.1),
            (10.5, 30.7),
            (12.95, 47.8),
        ];
        let systems: Vec<(String, f64, f64)> = SYSTEMS
            .iter()
            .zip(dev_rates)
            .map(|(name, (wer, eer))| (name.to_string(), wer / 100.0, eer / 100.0))
            .collect();
        let sweep = putr_sweep(&systems, (0.0527, 0.0163), &LAMBDA_GRID).unwrap();
        for name in SYSTEMS {
            let values: Vec<f64> = sweep
                .iter()
                .filter(|p| p.system == name)
                .map(|p| p.putr)
                .collect();
            assert_eq!(values.len(), LAMBDA_GRID.len());
            assert!(values.windows(2).all(|w| w[1] >= w[0]), "{name} not monotone");
        }
        let argmin = |lambda: f64| -> &str {
            sweep
                .iter()
                .filter(|p| p.lambda == lambda)
                .min_by(|a, b| a.putr.total_cmp(&b.putr))
                .map(|p| p.system.as_str())
                .unwrap()
        };
        assert_eq!(argmin(0.9), "B1a");
        let low = argmin(0.1);
        assert!(low == "VB" || low == "BV", "best at lambda=0.1 was {low}");
    });
}

/// Convex-hull EER via its dual characterization: the maximum over priors
/// p of the minimum over raw operating points of p*FRR + (1-p)*FAR.
/// Candidate priors are where two operating-point cost lines intersect.
fn oracle_eer(targets: &[f64], nontargets: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = targets.iter().chain(nontargets).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    // accept iff score >= theta; add an accept-all and a reject-all point
    let mut points = vec![(0.0f64, 1.0f64), (1.0, 0.0)]; // (frr, far)
    for theta in thresholds {
        let frr = targets.iter().filter(|&&s| s < theta).count() as f64 / targets.len() as f64;
        let far =
            nontargets.iter().filter(|&&s| s >= theta).count() as f64 / nontargets.len() as f64;
        points.push((frr, far));
    }
    let mut priors = vec![0.0, 1.0];
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (f1, a1) = points[i];
            let (f2, a2) = points[j];
            let denominator = (a2 - a1) + (f1 - f2);
            if denominator.abs() > 1e-15 {
                let p = (a2 - a1) / denominator;
                if (0.0..=1.0).contains(&p) {
                    priors.push(p);
                }
            }
        }
    }
    priors
        .into_iter()
        .map(|p| {
            points
                .iter()
                .map(|&(frr, far)| p * frr + (1.0 - p) * far)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_04_eer_oracle_equivalence() {
    criterion(4, "EER oracle equivalence", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let n_targets = rng.random_range(1..=25usize);
            let n_nontargets = rng.random_range(1..=25usize);
            // mix of continuous scores and deliberate ties on a coarse grid
            let mut draw = |n: usize| -> Vec<f64> {
                (0..n)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            (rng.random_range(-5..=5) as f64) / 5.0
                        } else {
                            rng.random_range(-1.0..1.0)
                        }
                    })
                    .collect()
            };
            let targets = draw(n_targets);
            let nontargets = draw(n_nontargets);
            let got = compute_eer_from_scores(&targets, &nontargets).unwrap().eer;
            let want = oracle_eer(&targets, &nontargets);
            assert!(
                (got - want).abs() < 1e-6,
                "eer {got} vs oracle {want} on targets {targets:?} nontargets {nontargets:?}"
            );

            // strictly increasing transform leaves the EER unchanged
            let warp = |v: &[f64]| -> Vec<f64> {
                v.iter().map(|s| (0.7 * s).tanh() * 3.0 + s).collect()
            };
            let warped = compute_eer_from_scores(&warp(&targets), &warp(&nontargets))
                .unwrap()
                .eer;
            assert!((got - warped).abs() < 1e-12, "not transform invariant");
        }
    });
}

/// Plain recursive minimum edit distance with memoization.
fn oracle_edit_distance(a: &[u8], b: &[u8]) -> usize {
    fn go(a: &[u8], b: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        let key = (a.len(), b.len());
        if let Some(&d) = memo.get(&key) {
            return d;
        }
        let d = if a.is_empty() {
            b.len()
        } else if b.is_empty() {
            a.len()
        } else if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            let substitute = go(&a[1..], &b[1..], memo);
            let delete = go(&a[1..], b, memo);
            let insert = go(a, &b[1..], memo);
            1 + substitute.min(delete).min(insert)
        };
        memo.insert(key, d);
        d
    }
    go(a, b, &mut HashMap::new())
}

#[test]
fn criterion_05_wer_oracle_equivalence() {
    criterion(5, "WER oracle equivalence", Duration::from_secs(30), || {
        let vocabulary = ["a", "b", "c", "d"];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let mut draw = |max: usize| -> Vec<u8> {
                let len = rng.random_range(0..=max);
                (0..len).map(|_| rng.random_range(0..4u8)).collect()
            };
            let reference = draw(8);
            let hypothesis = draw(8);
            if reference.is_empty() {
                continue; // empty references are rejected, not scored
            }
            let to_tokens = |ids: &[u8]| -> Vec<String> {
                ids.iter().map(|&i| vocabulary[i as usize].to_string()).collect()
            };
            let result = compute_wer(&[TranscriptPair {
                utt_id: "u".into(),
                reference: to_tokens(&reference),
                hypothesis: to_tokens(&hypothesis),
            }])
            .unwrap();
            let want = oracle_edit_distance(&reference, &hypothesis);
            assert_eq!(
                result.total.errors(),
                want,
                "ref {reference:?} hyp {hypothesis:?}"
            );
            assert_eq!(result.total.reference_tokens, reference.len());
        }
    });
}

fn tone(freq: f64, secs: f64, sr: u32) -> AudioBuffer {
    let n = (secs * sr as f64) as usize;
    let samples = (0..n)
        .map(|i| 0.6 * (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin())
        .collect();
    AudioBuffer { samples, sample_rate: sr }
}

fn chirp(f_start: f64, f_end: f64, secs: f64, sr: u32) -> AudioBuffer {
    let n = (secs * sr as f64) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sr as f64;
            let phase = 2.0 * std::f64::consts::PI
                * (f_start * t + 0.5 * (f_end - f_start) / secs * t * t);
            0.6 * phase.sin()
        })
        .collect();
    AudioBuffer { samples, sample_rate: sr }
}

#[test]
fn criterion_06_pitch_tracker_accuracy() {
    criterion(6, "pitch tracker accuracy", Duration::from_secs(30), || {
        let config = PitchConfig::default();
        for freq in [100.0, 150.0, 220.0, 330.0] {
            let contour = extract_f0(&tone(freq, 1.0, 16_000), &config).unwrap();
            let voiced = contour.voiced();
            assert!(!voiced.is_empty(), "{freq} Hz tone has no voiced frames");
            let within = voiced
                .iter()
                .filter(|f0| (**f0 - freq).abs() <= 0.01 * freq)
                .count();
            assert!(
                within as f64 >= 0.95 * voiced.len() as f64,
                "{freq} Hz: only {within}/{} frames within 1%",
                voiced.len()
            );
        }

        let silence = AudioBuffer {
            samples: vec![0.0; 16_000],
            sample_rate: 16_000,
        };
        let contour = extract_f0(&silence, &config).unwrap();
        assert_eq!(contour.voiced().len(), 0, "silence produced voiced frames");

        let contour = extract_f0(&chirp(100.0, 200.0, 2.0, 16_000), &config).unwrap();
        let voiced = contour.voiced();
        assert!(voiced.len() > 50);
        for pair in voiced.windows(2) {
            assert!(pair[1] >= pair[0] - 2.0, "chirp contour not monotone: {pair:?}");
        }
    });
}

#[test]
fn criterion_07_pitch_correlation_properties() {
    criterion(7, "pitch correlation properties", Duration::from_secs(30), || {
        let config = PitchConfig::default();
        let contour = extract_f0(&chirp(110.0, 190.0, 1.5, 16_000), &config).unwrap();
        assert_eq!(pitch_correlation(&contour, &contour).unwrap(), 1.0);

        // shift invariance and symmetry
        let shifted = F0Contour {
            frame_hop: contour.frame_hop,
            values: contour
                .values
                .iter()
                .map(|f| match f {
                    Frame::Voiced(f0) => Frame::Voiced(f0 + 40.0),
                    Frame::Unvoiced => Frame::Unvoiced,
                })
                .collect(),
        };
        let rho = pitch_correlation(&contour, &shifted).unwrap();
        assert!((rho - 1.0).abs() < 1e-12, "shift changed rho to {rho}");
        assert_eq!(
            pitch_correlation(&contour, &shifted).unwrap(),
            pitch_correlation(&shifted, &contour).unwrap()
        );

        // alignment: a linear 2x upsample of the same contour must align
        // back onto the original samples
        let voiced = contour.voiced();
        let mut upsampled = Vec::new();
        for pair in voiced.windows(2) {
            upsampled.push(Frame::Voiced(pair[0]));
            upsampled.push(Frame::Voiced(0.5 * (pair[0] + pair[1])));
        }
        upsampled.push(Frame::Voiced(*voiced.last().unwrap()));
        let dense = F0Contour {
            frame_hop: contour.frame_hop / 2.0,
            values: upsampled,
        };
        let compact = F0Contour {
            frame_hop: contour.frame_hop,
            values: voiced.iter().map(|&f| Frame::Voiced(f)).collect(),
        };
        let rho = pitch_correlation(&compact, &dense).unwrap();
        assert!((rho - 1.0).abs() < 1e-9, "alignment rho = {rho}");
    });
}

#[test]
fn criterion_08_attack_simulation_ordering() {
    criterion(8, "attack simulation ordering", Duration::from_secs(120), || {
        let base = PopulationConfig {
            num_speakers: 20,
            utts_per_speaker: 10,
            dim: 16,
            between_spread: 1.0,
            within_spread: 0.1,
            seed: 0,
        };
        for seed in 0..5u64 {
            let population = generate_population(&PopulationConfig { seed, ..base }).unwrap();
            // a pool in the hundreds keeps the random-replacement score
            // distribution smooth enough for chance-level EER estimates
            let pool_population = generate_population(&PopulationConfig {
                num_speakers: 200,
                seed: seed + 9090,
                ..base
            })
            .unwrap();
            let pool = population_to_pool(&pool_population).unwrap();
            let eer_of = |policy: &AnonymizationPolicy| {
                run_attack(&population, &pool, policy, policy, 10_000, seed)
                    .unwrap()
                    .eer
                    * 100.0
            };

            let identity = eer_of(&AnonymizationPolicy::identity());
            let pseudo = eer_of(&AnonymizationPolicy {
                strategy: Strategy::PseudoXvector(SelectionParams {
                    n_closest: 100,
                    m_sampled: 5,
                    direction: Direction::Closest,
                    seed: 0,
                }),
                assignment: Assignment::PerSpeaker,
                leakage: 0.0,
            });
            let random = eer_of(&AnonymizationPolicy {
                strategy: Strategy::Random,
                assignment: Assignment::PerUtterance,
                leakage: 0.0,
            });

            assert!(identity < 5.0, "seed {seed}: identity EER {identity}%");
            assert!(
                (45.0..=55.0).contains(&random),
                "seed {seed}: random EER {random}%"
            );
            assert!(
                pseudo - identity > 5.0 && random - pseudo > 5.0 && pseudo <= random,
                "seed {seed}: ordering violated: {identity:.1} / {pseudo:.1} / {random:.1}"
            );
        }
    });
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(start: usize, n: usize, m: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == m {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            go(i + 1, n, m, current, out);
            current.pop();
        }
    }
    go(0, n, m, &mut current, &mut out);
    out
}

#[test]
fn criterion_09_selection_determinism_and_membership() {
    criterion(9, "selection determinism and membership", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // membership: the pseudo x-vector must be the normalized mean of
        // some m-subset of the brute-force n-closest pool entries
        for round in 0..200 {
            let pool_size = rng.random_range(4..=20usize);
            let dim = rng.random_range(3..=8usize);
            let items: Vec<(String, Gender, Vec<f64>)> = (0..pool_size)
                .map(|i| {
                    let gender = if i % 2 == 0 { Gender::F } else { Gender::M };
                    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    (format!("p{i:02}"), gender, v)
                })
                .collect();
            let pool = build_pool(&items).unwrap();
            let mut source: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = source.iter().map(|v| v * v).sum::<f64>().sqrt();
            source.iter_mut().for_each(|v| *v /= norm);

            let n_closest = rng.random_range(2..=8.min(pool_size));
            let m_sampled = rng.random_range(1..=3.min(n_closest));
            let params = SelectionParams {
                n_closest,
                m_sampled,
                direction: Direction::Closest,
                seed: round,
            };
            let pseudo = pseudo_xvector(&pool, &source, &params).unwrap();

            // independent n-closest ranking by cosine distance, ids break ties
            let mut ranked: Vec<&vpeval::selection::SpeakerEmbedding> =
                pool.entries.iter().collect();
            ranked.sort_by(|a, b| {
                let da = 1.0 - dot(&a.vector, &source);
                let db = 1.0 - dot(&b.vector, &source);
                da.total_cmp(&db).then_with(|| a.speaker_id.cmp(&b.speaker_id))
            });
            let closest = &ranked[..n_closest];

            let matched = combinations(n_closest, m_sampled).into_iter().any(|subset| {
                let mut mean = vec![0.0; dim];
                for &index in &subset {
                    for (slot, v) in mean.iter_mut().zip(&closest[index].vector) {
                        *slot += v / m_sampled as f64;
                    }
                }
                let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
                norm > 0.0
                    && mean
                        .iter()
                        .zip(&pseudo)
                        .all(|(m, p)| (m / norm - p).abs() < 1e-9)
            });
            assert!(matched, "pseudo vector not formed from the {n_closest}-closest set");

            // fixed seed reproduces bit-identical output
            let again = pseudo_xvector(&pool, &source, &params).unwrap();
            assert!(pseudo
                .iter()
                .zip(&again)
                .all(|(a, b)| a.to_bits() == b.to_bits()));
        }

        // gender preservation never violated
        let items: Vec<(String, Gender, Vec<f64>)> = (0..30)
            .map(|i| {
                let gender = if i % 3 == 0 { Gender::F } else { Gender::M };
                (format!("s{i:02}"), gender, vec![i as f64 + 1.0, 1.0, 0.5])
            })
            .collect();
        let pool = build_pool(&items).unwrap();
        for seed in 0..10_000u64 {
            let gender = if seed % 2 == 0 { Gender::F } else { Gender::M };
            let picked = select_random_gender_preserving(&pool, "outsider", gender, seed).unwrap();
            assert_eq!(picked.gender, gender);
            let a = select_random(&pool, "s00", seed).unwrap();
            let b = select_random(&pool, "s00", seed).unwrap();
            assert_eq!(a.speaker_id, b.speaker_id);
            assert_ne!(a.speaker_id, "s00");
        }
    });
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn criterion_10_format_round_trips() {
    criterion(10, "format round-trips", Duration::from_secs(5), || {
        let trials = vec![
            corpus::VerificationTrial {
                enroll_id: "spk01".into(),
                test_id: "utt-000".into(),
                label: TrialLabel::Target,
            },
            corpus::VerificationTrial {
                enroll_id: "spk02".into(),
                test_id: "utt-001".into(),
                label: TrialLabel::Nontarget,
            },
        ];
        let parsed = corpus::parse_trials_str(&corpus::write_trials(&trials), "mem").unwrap();
        assert_eq!(parsed, trials);

        let scored = vec![
            ScoredTrial::new("spk01", "utt-000", TrialLabel::Target, 0.921_354_7),
            ScoredTrial::new("spk02", "utt-001", TrialLabel::Nontarget, -1.5e-8),
        ];
        let lines =
            corpus::parse_score_lines(&corpus::write_scores(&scored), "mem").unwrap();
        assert_eq!(corpus::join_scores(&lines, &trials).unwrap(), scored);

        let embeddings = vec![
            ("spk01".to_string(), Gender::F, vec![0.1, -0.25, 1.0 / 3.0]),
            ("spk02".to_string(), Gender::Unknown, vec![1e-17, 2.0, -3.5]),
        ];
        let parsed =
            corpus::parse_embeddings_str(&corpus::write_embeddings(&embeddings), "mem").unwrap();
        assert_eq!(parsed, embeddings);

        // report: CSV round-trip is exact, markdown is byte-stable
        let mut report = EvalReport {
            metric_name: "EER[%]".into(),
            meta: ReportMeta {
                seed: Some(7),
                timestamp: "unix:0".into(),
            },
            ..EvalReport::default()
        };
        for row in EER_DEV {
            for (sys, value) in [("Orig", row.3), ("B1a", row.4), ("VB", row.5)] {
                report.rows.push(MetricRow {
                    subset: row.0.into(),
                    gender: Gender::parse(row.1).unwrap(),
                    weight: row.2,
                    system: sys.into(),
                    value,
                });
            }
        }
        report.compute_aggregates().unwrap();
        report.putr_sweep = putr_sweep(
            &[("B1a".into(), 0.0618, 0.1064), ("VB".into(), 0.1295, 0.478)],
            (0.0527, 0.0163),
            &LAMBDA_GRID,
        )
        .unwrap();
        report.validate().unwrap();

        let csv = render_csv(&report);
        let mut reparsed = parse_report_csv(&csv).unwrap();
        assert_eq!(render_csv(&reparsed), csv);
        assert_eq!((reparsed.rows.clone(), reparsed.putr_sweep.clone()),
                   (report.rows.clone(), report.putr_sweep.clone()));

        // the CSV carries rows only; restore the header metadata before
        // comparing full renders
        reparsed.metric_name = report.metric_name.clone();
        reparsed.meta = report.meta.clone();
        let markdown = render_markdown(&report);
        assert_eq!(render_markdown(&reparsed), markdown);
        assert_eq!(render_markdown(&report), markdown);
    });
}
