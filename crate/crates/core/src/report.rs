//! Aggregation and report rendering.
//!
//! Builds the per-subset metric tables with weighted and unweighted
//! aggregate rows, the PU_tr lambda sweep, and renders everything as
//! markdown, CSV and a static SVG line chart. Rendering is byte
//! deterministic given identical report content; the timestamp is a plain
//! field injected by the caller, never read from the clock here.

use crate::metrics::tradeoff::{compute_putr, TradeoffError, TradeoffInputs};
use crate::selection::Gender;
use std::fmt::Write as _;
use thiserror::Error;

/// The lambda grid used for the trade-off sweep.
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("zero weight sum: weighted aggregate undefined")]
    ZeroWeightSum,
    #[error("empty input")]
    EmptyInput,
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("csv parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },
    #[error("aggregate '{label}' for system '{system}' is inconsistent with its rows")]
    InconsistentAggregate { label: String, system: String },
}

/// Weighted mean: sum(w_i * v_i) / sum(w_i).
pub fn aggregate_weighted(rows: &[(f64, f64)]) -> Result<f64, ReportError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(value, weight) in rows {
        if weight < 0.0 {
            return Err(ReportError::NegativeWeight(weight));
        }
        num += weight * value;
        den += weight;
    }
    if den == 0.0 {
        return Err(ReportError::ZeroWeightSum);
    }
    Ok(num / den)
}

/// Plain arithmetic mean.
pub fn aggregate_mean(values: &[f64]) -> Result<f64, ReportError> {
    if values.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// One per-subset metric value for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub subset: String,
    pub gender: Gender,
    pub weight: f64,
    pub system: String,
    pub value: f64,
}

/// One aggregate value (e.g. weighted dev average) for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub label: String,
    pub system: String,
    pub value: f64,
}

/// One point of the trade-off sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub system: String,
    pub putr: f64,
}

/// Report metadata; the timestamp is injected so identical content renders
/// byte-identically across runs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportMeta {
    pub seed: Option<u64>,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub metric_name: String,
    pub rows: Vec<MetricRow>,
    pub aggregates: Vec<AggregateRow>,
    pub putr_sweep: Vec<SweepPoint>,
    pub meta: ReportMeta,
}

impl EvalReport {
    /// Distinct systems in first-appearance order.
    pub fn systems(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.system.as_str()) {
                out.push(&r.system);
            }
        }
        out
    }

    /// Appends weighted ("AvgW") and unweighted ("Avg") aggregate rows for
    /// every system present.
    pub fn compute_aggregates(&mut self) -> Result<(), ReportError> {
        for system in self.systems().iter().map(|s| s.to_string()).collect::<Vec<_>>() {
            let pairs: Vec<(f64, f64)> = self
                .rows
                .iter()
                .filter(|r| r.system == system)
                .map(|r| (r.value, r.weight))
                .collect();
            let values: Vec<f64> = pairs.iter().map(|(v, _)| *v).collect();
            self.aggregates.push(AggregateRow {
                label: "AvgW".into(),
                system: system.clone(),
                value: aggregate_weighted(&pairs)?,
            });
            self.aggregates.push(AggregateRow {
                label: "Avg".into(),
                system,
                value: aggregate_mean(&values)?,
            });
        }
        Ok(())
    }

    /// Checks that every "AvgW"/"Avg" aggregate matches its rows within 1e-9.
    pub fn validate(&self) -> Result<(), ReportError> {
        for agg in &self.aggregates {
            let pairs: Vec<(f64, f64)> = self
                .rows
                .iter()
                .filter(|r| r.system == agg.system)
                .map(|r| (r.value, r.weight))
                .collect();
            if pairs.is_empty() {
                continue;
            }
            let expected = match agg.label.as_str() {
                "AvgW" => aggregate_weighted(&pairs)?,
                "Avg" => aggregate_mean(&pairs.iter().map(|(v, _)| *v).collect::<Vec<_>>())?,
                _ => continue,
            };
            if (expected - agg.value).abs() > 1e-9 {
                return Err(ReportError::InconsistentAggregate {
                    label: agg.label.clone(),
                    system: agg.system.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Evaluates PU_tr for every (system, lambda) pair. Rates are fractions.
pub fn putr_sweep(
    systems: &[(String, f64, f64)],
    baseline: (f64, f64),
    lambdas: &[f64],
) -> Result<Vec<SweepPoint>, TradeoffError> {
    let (wer0, eer0) = baseline;
    let mut out = Vec::with_capacity(systems.len() * lambdas.len());
    for (name, wer1, eer1) in systems {
        for &lambda in lambdas {
            let putr = compute_putr(TradeoffInputs {
                wer0,
                wer1: *wer1,
                eer0,
                eer1: *eer1,
                lambda,
            })?;
            out.push(SweepPoint {
                lambda,
                system: name.clone(),
                putr,
            });
        }
    }
    Ok(out)
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

/// Markdown rendering: a pivoted per-subset table (systems as columns),
/// aggregate rows, and the sweep table when present.
pub fn render_markdown(report: &EvalReport) -> String {
    let mut s = String::new();
    writeln!(s, "# Evaluation report").unwrap();
    if !report.meta.timestamp.is_empty() {
        writeln!(s, "\n_generated: {}_", report.meta.timestamp).unwrap();
    }
    if let Some(seed) = report.meta.seed {
        writeln!(s, "\n_seed: {seed}_").unwrap();
    }

    let systems = report.systems();
    if !systems.is_empty() {
        writeln!(s, "\n## {}", report.metric_name).unwrap();
        writeln!(s).unwrap();
        writeln!(s, "| Set | Gender | Weight | {} |", systems.join(" | ")).unwrap();
        writeln!(s, "|{}|", vec!["---"; systems.len() + 3].join("|")).unwrap();

        // one table row per (subset, gender, weight) in first appearance order
        let mut keys: Vec<(String, Gender, f64)> = Vec::new();
        for r in &report.rows {
            if !keys
                .iter()
                .any(|(n, g, w)| *n == r.subset && *g == r.gender && *w == r.weight)
            {
                keys.push((r.subset.clone(), r.gender, r.weight));
            }
        }
        for (subset, gender, weight) in keys {
            let cells: Vec<String> = systems
                .iter()
                .map(|sys| {
                    report
                        .rows
                        .iter()
                        .find(|r| {
                            r.subset == subset
                                && r.gender == gender
                                && r.weight == weight
                                && r.system == *sys
                        })
                        .map(|r| fmt2(r.value))
                        .unwrap_or_else(|| "-".into())
                })
                .collect();
            writeln!(
                s,
                "| {} | {} | {} | {} |",
                subset,
                gender.as_str(),
                weight,
                cells.join(" | ")
            )
            .unwrap();
        }
        let mut agg_labels: Vec<&str> = Vec::new();
        for a in &report.aggregates {
            if !agg_labels.contains(&a.label.as_str()) {
                agg_labels.push(&a.label);
            }
        }
        for label in agg_labels {
            let cells: Vec<String> = systems
                .iter()
                .map(|sys| {
                    report
                        .aggregates
                        .iter()
                        .find(|a| a.label == label && a.system == *sys)
                        .map(|a| fmt2(a.value))
                        .unwrap_or_else(|| "-".into())
                })
                .collect();
            writeln!(s, "| **{label}** | | | {} |", cells.join(" | ")).unwrap();
        }
    }

    if !report.putr_sweep.is_empty() {
        writeln!(s, "\n## PU_tr sweep").unwrap();
        writeln!(s).unwrap();
        writeln!(s, "| lambda | system | PU_tr |").unwrap();
        writeln!(s, "|---|---|---|").unwrap();
        for p in &report.putr_sweep {
            writeln!(s, "| {} | {} | {:.4} |", p.lambda, p.system, p.putr).unwrap();
        }
    }
    s
}

/// CSV rendering of all report rows. Values are written with the shortest
/// round-trip float representation, so re-parsing reproduces the rows
/// exactly.
pub fn render_csv(report: &EvalReport) -> String {
    let mut s = String::new();
    writeln!(s, "kind,subset,gender,weight,system,lambda,value").unwrap();
    for r in &report.rows {
        writeln!(
            s,
            "row,{},{},{},{},,{}",
            r.subset,
            r.gender.as_str(),
            r.weight,
            r.system,
            r.value
        )
        .unwrap();
    }
    for a in &report.aggregates {
        writeln!(s, "aggregate,{},,,{},,{}", a.label, a.system, a.value).unwrap();
    }
    for p in &report.putr_sweep {
        writeln!(s, "sweep,,,,{},{},{}", p.system, p.lambda, p.putr).unwrap();
    }
    s
}

/// Parses [`render_csv`] output back into report rows.
pub fn parse_report_csv(content: &str) -> Result<EvalReport, ReportError> {
    let mut report = EvalReport::default();
    for (i, line) in content.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(ReportError::CsvParse {
                line: line_no,
                reason: format!("expected 7 fields, got {}", f.len()),
            });
        }
        let parse_f64 = |s: &str, what: &str| {
            s.parse::<f64>().map_err(|_| ReportError::CsvParse {
                line: line_no,
                reason: format!("unparseable {what} '{s}'"),
            })
        };
        match f[0] {
            "row" => report.rows.push(MetricRow {
                subset: f[1].into(),
                gender: Gender::parse(f[2]).ok_or_else(|| ReportError::CsvParse {
                    line: line_no,
                    reason: format!("unknown gender '{}'", f[2]),
                })?,
                weight: parse_f64(f[3], "weight")?,
                system: f[4].into(),
                value: parse_f64(f[6], "value")?,
            }),
            "aggregate" => report.aggregates.push(AggregateRow {
                label: f[1].into(),
                system: f[4].into(),
                value: parse_f64(f[6], "value")?,
            }),
            "sweep" => report.putr_sweep.push(SweepPoint {
                system: f[4].into(),
                lambda: parse_f64(f[5], "lambda")?,
                putr: parse_f64(f[6], "value")?,
            }),
            other => {
                return Err(ReportError::CsvParse {
                    line: line_no,
                    reason: format!("unknown kind '{other}'"),
                })
            }
        }
    }
    Ok(report)
}

const SVG_COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// SVG line chart of PU_tr against lambda, one polyline per system.
/// Returns None for an empty sweep.
pub fn render_svg(sweep: &[SweepPoint]) -> Option<String> {
    if sweep.is_empty() {
        return None;
    }
    let (w, h) = (640.0, 420.0);
    let (ml, mr, mt, mb) = (60.0, 140.0, 20.0, 40.0);
    let plot_w = w - ml - mr;
    let plot_h = h - mt - mb;
    let lmin = sweep.iter().map(|p| p.lambda).fold(f64::INFINITY, f64::min);
    let lmax = sweep.iter().map(|p| p.lambda).fold(f64::NEG_INFINITY, f64::max);
    let lspan = if lmax > lmin { lmax - lmin } else { 1.0 };
    // PU_tr is bounded; a fixed [-1, 1] axis keeps charts comparable
    let x = |lambda: f64| ml + (lambda - lmin) / lspan * plot_w;
    let y = |v: f64| mt + (1.0 - (v + 1.0) / 2.0) * plot_h;

    let mut systems: Vec<&str> = Vec::new();
    for p in sweep {
        if !systems.contains(&p.system.as_str()) {
            systems.push(&p.system);
        }
    }

    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )
    .unwrap();
    writeln!(s, "  <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>").unwrap();
    // axes
    writeln!(
        s,
        "  <line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        mt + plot_h,
        ml + plot_w,
        mt + plot_h
    )
    .unwrap();
    writeln!(
        s,
        "  <line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>",
        mt + plot_h
    )
    .unwrap();
    // zero line
    writeln!(
        s,
        "  <line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>",
        y(0.0),
        ml + plot_w
    )
    .unwrap();
    for (label, v) in [("1", 1.0), ("0", 0.0), ("-1", -1.0)] {
        writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{label}</text>",
            ml - 6.0,
            y(v) + 4.0
        )
        .unwrap();
    }
    let mut lambdas: Vec<f64> = sweep.iter().map(|p| p.lambda).collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lambdas.dedup();
    for l in &lambdas {
        writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{l}</text>",
            x(*l),
            mt + plot_h + 16.0
        )
        .unwrap();
    }
    writeln!(
        s,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">lambda</text>",
        ml + plot_w / 2.0,
        h - 8.0
    )
    .unwrap();

    for (i, sys) in systems.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        let mut pts: Vec<(f64, f64)> = sweep
            .iter()
            .filter(|p| p.system == *sys)
            .map(|p| (p.lambda, p.putr))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let path: Vec<String> = pts
            .iter()
            .map(|(l, v)| format!("{:.2},{:.2}", x(*l), y(*v)))
            .collect();
        writeln!(
            s,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            path.join(" ")
        )
        .unwrap();
        let ly = mt + 16.0 + 18.0 * i as f64;
        writeln!(
            s,
            "  <line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            ml + plot_w + 10.0,
            ml + plot_w + 34.0
        )
        .unwrap();
        writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\">{sys}</text>",
            ml + plot_w + 40.0,
            ly + 4.0
        )
        .unwrap();
    }
    writeln!(s, "</svg>").unwrap();
    Some(s)
}
