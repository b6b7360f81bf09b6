//! Scoring every tracker of a scenario and rendering the result.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::baselines::{clear_mot, extract_estimates, gospa, ClearMotResult, EstimateSet, GospaConfig, GospaResult};
use crate::densities::PosteriorDensity;
use crate::error::{Error, Result};
use crate::scenario::{BaselineConfig, Scenario};
use crate::scoring::{nll, NllConfig, NllReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrackerScore {
    pub name: String,
    pub nll: NllReport,
    /// Absent for posteriors without Bernoulli components.
    pub estimates: Option<EstimateSet>,
    pub gospa: Option<GospaResult>,
    /// Absent when there are no estimates or the ground truth is empty.
    pub clear_mot: Option<ClearMotResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreReport {
    pub scenario: String,
    pub q: usize,
    pub exact: bool,
    pub baseline: BaselineConfig,
    pub trackers: Vec<TrackerScore>,
    /// Tracker names, best first.
    pub ranking_by_nll: Vec<String>,
    pub ranking_by_gospa: Vec<String>,
}

fn score_tracker(s: &Scenario, name: &str, posterior: &PosteriorDensity, config: NllConfig) -> Result<TrackerScore> {
    let y = &s.ground_truth;
    let nll = nll(y, posterior, config)?;
    let estimates = match extract_estimates(posterior, s.baseline.existence_threshold) {
        Ok(e) => Some(e),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let (gospa, clear_mot) = match &estimates {
        Some(x) => {
            let g = gospa(x, y, GospaConfig::new(s.baseline.gospa_cutoff)?)?;
            let m = match clear_mot(x, y, s.baseline.clear_mot_cutoff) {
                Ok(m) => Some(m),
                Err(Error::EmptyGroundTruth) => None,
                Err(e) => return Err(e),
            };
            (Some(g), m)
        }
        None => (None, None),
    };
    Ok(TrackerScore {
        name: name.to_string(),
        nll,
        estimates,
        gospa,
        clear_mot,
    })
}

/// Ascending by score, missing scores last, ties by name.
fn ranking(trackers: &[TrackerScore], score: impl Fn(&TrackerScore) -> Option<f64>) -> Vec<String> {
    let mut order: Vec<&TrackerScore> = trackers.iter().collect();
    order.sort_by(|a, b| {
        let by_score = match (score(a), score(b)) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_score.then_with(|| a.name.cmp(&b.name))
    });
    order.into_iter().map(|t| t.name.clone()).collect()
}

/// Scores every tracker by NLL, GOSPA and CLEAR MOT. Output is deterministic
/// and ordered as the trackers are declared.
pub fn score_scenario(s: &Scenario, config: NllConfig) -> Result<ScoreReport> {
    let trackers = s
        .trackers
        .iter()
        .map(|t| {
            score_tracker(s, &t.name, &t.posterior, config).map_err(|e| Error::Tracker {
                tracker: t.name.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreReport {
        scenario: s.name.clone(),
        q: config.q,
        exact: config.prefer_exact || config.require_exact,
        baseline: s.baseline,
        ranking_by_nll: ranking(&trackers, |t| Some(t.nll.total_nll)),
        ranking_by_gospa: ranking(&trackers, |t| t.gospa.as_ref().map(|g| g.total)),
        trackers,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Human,
    Machine,
}

fn cell(v: Option<f64>) -> String {
    match v {
        // `+ 0.0` turns a negative zero into zero.
        Some(v) => format!("{:.6}", v + 0.0),
        None => "-".into(),
    }
}

/// Human format is an aligned table (`inf` for infinite values); machine
/// format is JSON with infinities written as `"Infinity"`.
pub fn emit_report(r: &ScoreReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Machine => {
            let mut text = serde_json::to_string_pretty(r).expect("reports serialize to JSON");
            text.push('\n');
            text
        }
        ReportFormat::Human => human(r),
    }
}

fn human(r: &ScoreReport) -> String {
    let header = [
        "tracker", "NLL", "NLL loc", "NLL false", "NLL missed", "GOSPA", "GOSPA loc", "GOSPA missed",
        "GOSPA false", "MOTA", "MOTP",
    ];
    let rows: Vec<Vec<String>> = r
        .trackers
        .iter()
        .map(|t| {
            let d = t.nll.decomposition.as_ref();
            let g = t.gospa.as_ref();
            let m = t.clear_mot.as_ref();
            vec![
                t.name.clone(),
                cell(Some(t.nll.total_nll)),
                cell(d.map(|d| d.localization)),
                cell(d.map(|d| d.false_detections)),
                cell(d.map(|d| d.missed_objects)),
                cell(g.map(|g| g.total)),
                cell(g.map(|g| g.localization)),
                cell(g.map(|g| g.missed_penalty)),
                cell(g.map(|g| g.false_penalty)),
                cell(m.map(|m| m.mota)),
                cell(m.and_then(|m| m.motp)),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|row| row[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[&str]| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string()
    };

    let mut out = String::new();
    let method = if r.exact { "exact where feasible".to_string() } else { format!("Q = {}", r.q) };
    let _ = writeln!(out, "scenario: {} ({method})", r.scenario);
    let _ = writeln!(out, "{}", line(&header));
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        let _ = writeln!(out, "{}", line(&cells));
    }
    let _ = writeln!(out, "ranking by NLL:   {}", r.ranking_by_nll.join(", "));
    let _ = writeln!(out, "ranking by GOSPA: {}", r.ranking_by_gospa.join(", "));
    out
}
