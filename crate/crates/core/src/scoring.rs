//! Negative log-likelihood of a multi-object posterior at a ground-truth set.
//!
//! PMBM-family posteriors are scored by summing, per hypothesis, the
//! likelihoods of assignments between ground-truth objects and the posterior's
//! components (a Bernoulli or the PPP). [`nll_exact`] sums every feasible
//! assignment; [`nll_pmbm_murty`] keeps the `Q` most likely per hypothesis.
//! CPHD posteriors have a closed form.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::assignment::{
    enumerate_all_assignments, for_each_assignment, murty_k_best, solve_optimal, Assignment,
    CostMatrix, Entry, ENUMERATION_COLUMN_LIMIT,
};
use crate::densities::{Cphd, Intensity, MultiBernoulli, Pmbm, PosteriorDensity, StateVector};
use crate::error::{Error, Result};
use crate::logspace::{LogSumExp, LogValue};

/// Largest ground-truth set and Bernoulli count scored exhaustively.
pub const ORACLE_LIMIT: usize = ENUMERATION_COLUMN_LIMIT;

/// Stand-in for `1 - r` when `r = 1`; only used to rank assignments.
const CERTAIN_EXISTENCE_EPSILON: f64 = 1e-300;

pub const DEFAULT_Q: usize = 10;

/// Ground-truth object states. Duplicates are kept as distinct objects.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthSet {
    dim: usize,
    elements: Vec<StateVector>,
}

impl GroundTruthSet {
    pub fn new(dim: usize, elements: Vec<StateVector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dim", "dimension must be >= 1"));
        }
        for (i, y) in elements.iter().enumerate() {
            if y.dim() != dim {
                return Err(Error::DimensionMismatch {
                    path: format!("[{i}]"),
                    expected: dim,
                    found: y.dim(),
                });
            }
        }
        for i in 0..elements.len() {
            for j in i + 1..elements.len() {
                if elements[i] == elements[j] {
                    log::warn!("ground-truth elements {i} and {j} coincide; scoring them as distinct objects");
                }
            }
        }
        Ok(GroundTruthSet { dim, elements })
    }

    /// Convenience constructor from raw coordinates.
    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let elements = points
            .iter()
            .enumerate()
            .map(|(i, p)| StateVector::new(p.clone()).map_err(|e| e.within(&format!("[{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[StateVector] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn check_dim(&self, posterior_dim: usize) -> Result<()> {
        if self.dim != posterior_dim {
            return Err(Error::DimensionMismatch {
                path: "groundTruth".into(),
                expected: posterior_dim,
                found: self.dim,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NllMethod {
    Exact,
    MurtyApprox { q: usize },
    CphdClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HypothesisTerm {
    pub index: usize,
    /// Log of the hypothesis's summed terms, including its weight.
    #[serde(with = "crate::serde_float")]
    pub log_contribution: f64,
}

/// Three-way split of a single-hypothesis NLL at the best assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PmbDecomposition {
    #[serde(with = "crate::serde_float")]
    pub localization: f64,
    #[serde(with = "crate::serde_float")]
    pub false_detections: f64,
    #[serde(with = "crate::serde_float")]
    pub missed_objects: f64,
    /// Sum of the three parts: the NLL of the single best assignment.
    #[serde(with = "crate::serde_float")]
    pub total: f64,
    /// Matched `(bernoulli index, ground-truth index)` pairs.
    pub assignment: Vec<(usize, usize)>,
    pub unmatched_bernoullis: Vec<usize>,
    pub missed_ground_truths: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NllReport {
    /// `+inf` iff the posterior assigns zero likelihood.
    #[serde(with = "crate::serde_float")]
    pub total_nll: f64,
    pub method: NllMethod,
    pub per_hypothesis: Option<Vec<HypothesisTerm>>,
    pub decomposition: Option<PmbDecomposition>,
}

/// `-ln lambda` as a cost entry.
fn neg_ln_entry(v: LogValue) -> Entry {
    if v.is_zero() {
        Entry::Forbidden
    } else {
        Entry::Cost(v.neg_ln())
    }
}

/// Log-likelihood factors of one hypothesis at a ground-truth set.
struct HypothesisTable {
    log_weight: LogValue,
    m: usize,
    n: usize,
    /// `ln(r_k p_k(y_l))`, row-major `m x n`.
    present: Vec<LogValue>,
    /// `ln(1 - r_k)`.
    absent: Vec<LogValue>,
    /// `ln lambda(y_l)`.
    log_intensity: Vec<LogValue>,
    costs: Option<CostMatrix>,
}

impl HypothesisTable {
    fn new(gt: &GroundTruthSet, hypothesis: &MultiBernoulli, intensity: &Intensity) -> Self {
        let m = hypothesis.len();
        let n = gt.len();
        let mut present = Vec::with_capacity(m * n);
        for b in hypothesis.bernoullis() {
            for y in gt.elements() {
                present.push(b.log_present(y.as_slice()));
            }
        }
        let absent: Vec<LogValue> = hypothesis.bernoullis().iter().map(|b| b.log_absent()).collect();
        let log_intensity: Vec<LogValue> =
            gt.elements().iter().map(|y| intensity.log_value(y.as_slice())).collect();

        let mut object_costs = Vec::with_capacity(m * n);
        for (k, b) in hypothesis.bernoullis().iter().enumerate() {
            let normalizer = if b.existence() == 1.0 {
                LogValue::from_linear(CERTAIN_EXISTENCE_EPSILON)
            } else {
                absent[k]
            };
            for l in 0..n {
                let p = present[k * n + l];
                object_costs.push(if p.is_zero() {
                    Entry::Forbidden
                } else {
                    Entry::Cost(-(p.ln() - normalizer.ln()))
                });
            }
        }
        let dummy: Vec<Entry> = log_intensity.iter().copied().map(neg_ln_entry).collect();
        let costs = CostMatrix::pmbm_structured(m, object_costs, &dummy).ok();
        HypothesisTable {
            log_weight: LogValue::from_linear(hypothesis.weight()),
            m,
            n,
            present,
            absent,
            log_intensity,
            costs,
        }
    }

    /// `ln(w_h * prod lambda(y) * prod f_k(Y_k))` for one assignment, formed
    /// without the `r / (1 - r)` ratio.
    fn log_term(&self, column_to_row: &[usize]) -> LogValue {
        let mut matched = vec![false; self.m];
        let mut term = self.log_weight;
        for (l, &k) in column_to_row.iter().enumerate() {
            if k < self.m {
                matched[k] = true;
                term *= self.present[k * self.n + l];
            } else {
                term *= self.log_intensity[l];
            }
        }
        for (k, was_matched) in matched.iter().enumerate() {
            if !was_matched {
                term *= self.absent[k];
            }
        }
        term
    }
}

/// Cost matrix of one hypothesis: Bernoulli rows then one PPP row per object.
pub fn build_cost_matrix(
    gt: &GroundTruthSet,
    hypothesis: &MultiBernoulli,
    intensity: &Intensity,
) -> Result<CostMatrix> {
    if let Some(b) = hypothesis.bernoullis().first() {
        gt.check_dim(b.dim())?;
    }
    if let Some(d) = intensity.dim() {
        gt.check_dim(d)?;
    }
    HypothesisTable::new(gt, hypothesis, intensity)
        .costs
        .ok_or(Error::Infeasible)
}

fn finish(mass: f64, total: LogValue) -> f64 {
    if total.is_zero() {
        f64::INFINITY
    } else {
        mass - total.ln()
    }
}

/// Closed-form NLL of a CPHD posterior.
pub fn nll_cphd(gt: &GroundTruthSet, posterior: &Cphd) -> Result<NllReport> {
    gt.check_dim(posterior.dim())?;
    let n = gt.len();
    let log_card = posterior.cardinality().log_pmf(n);
    let log_states: LogValue = gt
        .elements()
        .iter()
        .map(|y| posterior.state_density().log_density(y.as_slice()))
        .product();
    let log_lik = log_card * log_states;
    let total_nll = if log_lik.is_zero() {
        f64::INFINITY
    } else {
        -ln_gamma(n as f64 + 1.0) - log_lik.ln()
    };
    Ok(NllReport {
        total_nll,
        method: NllMethod::CphdClosedForm,
        per_hypothesis: None,
        decomposition: None,
    })
}

fn tables(gt: &GroundTruthSet, posterior: &Pmbm) -> Result<Vec<HypothesisTable>> {
    gt.check_dim(posterior.dim())?;
    Ok(posterior
        .hypotheses()
        .iter()
        .map(|h| HypothesisTable::new(gt, h, posterior.intensity()))
        .collect())
}

fn report_from_subtotals(
    mass: f64,
    subtotals: Vec<LogValue>,
    method: NllMethod,
) -> NllReport {
    let total: LogValue = subtotals.iter().copied().sum();
    NllReport {
        total_nll: finish(mass, total),
        method,
        per_hypothesis: Some(
            subtotals
                .into_iter()
                .enumerate()
                .map(|(index, v)| HypothesisTerm {
                    index,
                    log_contribution: v.ln(),
                })
                .collect(),
        ),
        decomposition: None,
    }
}

/// NLL keeping the `q` lowest-cost assignments of every hypothesis.
pub fn nll_pmbm_murty(gt: &GroundTruthSet, posterior: &Pmbm, q: usize) -> Result<NllReport> {
    if q == 0 {
        return Err(Error::validation("q", "Q must be at least 1"));
    }
    let tables = tables(gt, posterior)?;
    let mut subtotals = Vec::with_capacity(tables.len());
    for table in &tables {
        let subtotal = match &table.costs {
            None => LogValue::ZERO,
            Some(costs) => match murty_k_best(costs, q) {
                Ok(best) => best.iter().map(|a| table.log_term(a.column_to_row())).sum(),
                Err(Error::Infeasible) => LogValue::ZERO,
                Err(e) => return Err(e),
            },
        };
        subtotals.push(subtotal);
    }
    Ok(report_from_subtotals(
        posterior.intensity().total_mass(),
        subtotals,
        NllMethod::MurtyApprox { q },
    ))
}

fn check_oracle_scale(gt: &GroundTruthSet, posterior: &Pmbm) -> Result<()> {
    if gt.len() > ORACLE_LIMIT {
        return Err(Error::SizeLimit {
            what: "ground-truth objects",
            actual: gt.len(),
            limit: ORACLE_LIMIT,
        });
    }
    if posterior.bernoulli_count() > ORACLE_LIMIT {
        return Err(Error::SizeLimit {
            what: "Bernoulli components",
            actual: posterior.bernoulli_count(),
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// Exact NLL by summing over every feasible assignment of every hypothesis.
pub fn nll_exact(gt: &GroundTruthSet, posterior: &Pmbm) -> Result<NllReport> {
    check_oracle_scale(gt, posterior)?;
    let tables = tables(gt, posterior)?;
    let subtotals = tables
        .iter()
        .map(|table| match &table.costs {
            None => LogValue::ZERO,
            Some(costs) => {
                let mut acc = LogSumExp::new();
                for_each_assignment(costs, |c2r, _| acc.add(table.log_term(c2r)));
                acc.value()
            }
        })
        .collect();
    Ok(report_from_subtotals(
        posterior.intensity().total_mass(),
        subtotals,
        NllMethod::Exact,
    ))
}

/// Number of feasible assignments per hypothesis. Subject to the oracle limits.
pub fn feasible_assignment_counts(gt: &GroundTruthSet, posterior: &Pmbm) -> Result<Vec<usize>> {
    check_oracle_scale(gt, posterior)?;
    tables(gt, posterior)?
        .iter()
        .map(|t| match &t.costs {
            None => Ok(0),
            Some(c) => enumerate_all_assignments(c).map(|all| all.len()),
        })
        .collect()
}

fn decompose(table: &HypothesisTable, mass: f64, best: Option<&Assignment>) -> PmbDecomposition {
    let mut assignment = Vec::new();
    let mut matched = vec![false; table.m];
    let mut missed_ground_truths = Vec::new();
    match best {
        Some(best) => {
            for (l, &k) in best.column_to_row().iter().enumerate() {
                if k < table.m {
                    matched[k] = true;
                    assignment.push((k, l));
                } else {
                    missed_ground_truths.push(l);
                }
            }
        }
        // Infeasible: some object has zero intensity and cannot be matched.
        None => missed_ground_truths.extend(0..table.n),
    }
    assignment.sort_unstable();
    let localization: f64 = assignment
        .iter()
        .map(|&(k, l)| table.present[k * table.n + l].neg_ln())
        .sum();
    let unmatched_bernoullis: Vec<usize> = (0..table.m).filter(|&k| !matched[k]).collect();
    let false_detections: f64 = unmatched_bernoullis
        .iter()
        .map(|&k| table.absent[k].neg_ln())
        .sum();
    let missed_objects = mass
        + missed_ground_truths
            .iter()
            .map(|&l| table.log_intensity[l].neg_ln())
            .sum::<f64>();
    PmbDecomposition {
        localization,
        false_detections,
        missed_objects,
        total: localization + false_detections + missed_objects,
        assignment,
        unmatched_bernoullis,
        missed_ground_truths,
    }
}

/// Single-hypothesis NLL split into localization, false-detection and
/// missed-object parts at the best assignment. With `q > 1` the report's
/// total comes from [`nll_pmbm_murty`] while the decomposition still refers
/// to the single best assignment.
pub fn nll_pmb_decomposed(gt: &GroundTruthSet, posterior: &Pmbm, q: usize) -> Result<NllReport> {
    if posterior.hypotheses().len() != 1 {
        return Err(Error::NotPmb {
            hypotheses: posterior.hypotheses().len(),
        });
    }
    if q == 0 {
        return Err(Error::validation("q", "Q must be at least 1"));
    }
    let tables = tables(gt, posterior)?;
    let table = &tables[0];
    let best = match &table.costs {
        None => None,
        Some(costs) => match solve_optimal(costs) {
            Ok(a) => Some(a),
            Err(Error::Infeasible) => None,
            Err(e) => return Err(e),
        },
    };
    let mass = posterior.intensity().total_mass();
    let decomposition = decompose(table, mass, best.as_ref());
    let mut report = if q > 1 {
        nll_pmbm_murty(gt, posterior, q)?
    } else {
        let term = best
            .as_ref()
            .map_or(LogValue::ZERO, |a| table.log_term(a.column_to_row()));
        NllReport {
            total_nll: decomposition.total,
            method: NllMethod::MurtyApprox { q: 1 },
            per_hypothesis: Some(vec![HypothesisTerm {
                index: 0,
                log_contribution: term.ln(),
            }]),
            decomposition: None,
        }
    };
    report.decomposition = Some(decomposition);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NllConfig {
    pub q: usize,
    /// Use the exhaustive oracle when the instance is small enough.
    pub prefer_exact: bool,
    /// Always use the exhaustive oracle; larger instances fail with a size-limit error.
    pub require_exact: bool,
}

impl Default for NllConfig {
    fn default() -> Self {
        NllConfig {
            q: DEFAULT_Q,
            prefer_exact: false,
            require_exact: false,
        }
    }
}

/// NLL of any supported posterior. Single-hypothesis PMBM reports carry the
/// decomposition of the best assignment.
pub fn nll(gt: &GroundTruthSet, posterior: &PosteriorDensity, config: NllConfig) -> Result<NllReport> {
    match posterior {
        PosteriorDensity::Cphd(c) => nll_cphd(gt, c),
        PosteriorDensity::Pmbm(p) => {
            let within_oracle = gt.len() <= ORACLE_LIMIT && p.bernoulli_count() <= ORACLE_LIMIT;
            let mut report = if config.require_exact || (config.prefer_exact && within_oracle) {
                nll_exact(gt, p)?
            } else {
                nll_pmbm_murty(gt, p, config.q)?
            };
            if p.hypotheses().len() == 1 {
                report.decomposition = nll_pmb_decomposed(gt, p, 1)?.decomposition;
            }
            Ok(report)
        }
    }
}
