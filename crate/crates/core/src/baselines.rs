//! Point-estimate baselines (GOSPA with `p = 1, alpha = 2`, single-scene
//! CLEAR MOT) and the PMB construction under which the NLL reduces to GOSPA
//! plus constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::assignment::{solve_optimal, CostMatrix, Entry};
use crate::densities::{euclidean, PosteriorDensity, StateVector, UniformIntensity};
use crate::error::{Error, Result};
use crate::scoring::GroundTruthSet;

/// Point estimates extracted from a posterior.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct EstimateSet {
    elements: Vec<StateVector>,
}

impl EstimateSet {
    pub fn new(elements: Vec<StateVector>) -> Result<Self> {
        if let Some(first) = elements.first() {
            if let Some(i) = elements.iter().position(|e| e.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    path: format!("[{i}]"),
                    expected: first.dim(),
                    found: elements[i].dim(),
                });
            }
        }
        Ok(EstimateSet { elements })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let elements = points
            .iter()
            .enumerate()
            .map(|(i, p)| StateVector::new(p.clone()).map_err(|e| e.within(&format!("[{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements)
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

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.elements.first() {
            Some(e) if e.dim() != dim => Err(Error::DimensionMismatch {
                path: "estimates".into(),
                expected: dim,
                found: e.dim(),
            }),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for EstimateSet {
    type Error = Error;
    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        EstimateSet::from_points(&points)
    }
}

impl From<EstimateSet> for Vec<Vec<f64>> {
    fn from(set: EstimateSet) -> Self {
        set.elements.into_iter().map(StateVector::into_inner).collect()
    }
}

/// GOSPA with `p = 1`, `alpha = 2` and Euclidean base metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GospaConfig {
    cutoff: f64,
}

impl GospaConfig {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::validation(
                "gospaCutoff",
                format!("cutoff must be positive and finite, got {cutoff}"),
            ));
        }
        Ok(GospaConfig { cutoff })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GospaResult {
    pub total: f64,
    pub localization: f64,
    pub missed_penalty: f64,
    pub false_penalty: f64,
    /// `(estimate index, ground-truth index)` pairs.
    pub matching: Vec<(usize, usize)>,
}

/// Optimal matching where only pairs closer than `gate` may be matched and
/// each match is worth `bonus` minus its distance. Returns sorted
/// `(x index, y index)` pairs.
fn gated_matching(x: &EstimateSet, y: &GroundTruthSet, gate: f64, bonus: f64) -> Result<Vec<(usize, usize)>> {
    let (nx, ny) = (x.len(), y.len());
    if ny == 0 || nx == 0 {
        return Ok(Vec::new());
    }
    let mut entries = Vec::with_capacity((nx + ny) * ny);
    for xi in x.elements() {
        for yj in y.elements() {
            let d = xi.euclidean_distance(yj);
            entries.push(if d < gate { Entry::Cost(d - bonus) } else { Entry::Forbidden });
        }
    }
    let dummy = vec![Entry::Cost(0.0); ny];
    let costs = CostMatrix::pmbm_structured(nx, entries, &dummy)?;
    let best = solve_optimal(&costs)?;
    let mut pairs: Vec<(usize, usize)> = best
        .column_to_row()
        .iter()
        .enumerate()
        .filter(|&(_, &k)| k < nx)
        .map(|(j, &i)| (i, j))
        .collect();
    pairs.sort_unstable();
    Ok(pairs)
}

/// GOSPA distance between estimates and ground truth.
///
/// A pair at distance `D >= c` never beats leaving both unmatched, so such
/// pairs are excluded from the matching.
pub fn gospa(x: &EstimateSet, y: &GroundTruthSet, cfg: GospaConfig) -> Result<GospaResult> {
    x.check_dim(y.dim())?;
    let c = cfg.cutoff();
    let matching = gated_matching(x, y, c, c)?;
    // Summing sorted distances and a single cardinality term keeps the
    // result bit-for-bit symmetric in its arguments.
    let mut distances: Vec<f64> = matching
        .iter()
        .map(|&(i, j)| x.elements()[i].euclidean_distance(&y.elements()[j]))
        .collect();
    distances.sort_by(f64::total_cmp);
    let localization: f64 = distances.iter().sum();
    let matched = matching.len();
    let missed_penalty = 0.5 * c * (y.len() - matched) as f64;
    let false_penalty = 0.5 * c * (x.len() - matched) as f64;
    let cardinality_penalty = 0.5 * c * (x.len() + y.len() - 2 * matched) as f64;
    Ok(GospaResult {
        total: localization + cardinality_penalty,
        localization,
        missed_penalty,
        false_penalty,
        matching,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClearMotResult {
    pub mota: f64,
    /// Mean matched distance; `None` without matches.
    pub motp: Option<f64>,
    pub matches: usize,
    pub misses: usize,
    pub false_positives: usize,
}

/// Single-scene MOTA/MOTP. Pairs closer than `cutoff` may match; the matching
/// maximizes the number of matches, then minimizes total distance.
pub fn clear_mot(x: &EstimateSet, y: &GroundTruthSet, cutoff: f64) -> Result<ClearMotResult> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::validation(
            "clearMotCutoff",
            format!("cutoff must be positive and finite, got {cutoff}"),
        ));
    }
    if y.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    x.check_dim(y.dim())?;
    // Any extra match outweighs the largest possible change in total distance.
    let bonus = (x.len().min(y.len()) as f64 + 1.0) * cutoff;
    let matching = gated_matching(x, y, cutoff, bonus)?;
    let matches = matching.len();
    let misses = y.len() - matches;
    let false_positives = x.len() - matches;
    let motp = (matches > 0).then(|| {
        matching
            .iter()
            .map(|&(i, j)| x.elements()[i].euclidean_distance(&y.elements()[j]))
            .sum::<f64>()
            / matches as f64
    });
    Ok(ClearMotResult {
        mota: 1.0 - (misses + false_positives) as f64 / y.len() as f64,
        motp,
        matches,
        misses,
        false_positives,
    })
}

/// Means of the Bernoullis with `r >= existence_threshold` in the
/// highest-weight hypothesis (first one on ties).
pub fn extract_estimates(posterior: &PosteriorDensity, existence_threshold: f64) -> Result<EstimateSet> {
    if !(0.0..=1.0).contains(&existence_threshold) {
        return Err(Error::validation(
            "existenceThreshold",
            format!("threshold must lie in [0, 1], got {existence_threshold}"),
        ));
    }
    let pmbm = match posterior {
        PosteriorDensity::Pmbm(p) => p,
        PosteriorDensity::Cphd(_) => {
            return Err(Error::Unsupported(
                "point estimates are only extracted from Bernoulli-based posteriors".into(),
            ))
        }
    };
    let best = pmbm
        .hypotheses()
        .iter()
        .enumerate()
        .fold(0, |best, (h, hyp)| {
            if hyp.weight() > pmbm.hypotheses()[best].weight() {
                h
            } else {
                best
            }
        });
    let elements = pmbm
        .declared_bernoullis(best)
        .iter()
        .filter(|b| b.existence() >= existence_threshold)
        .filter_map(|b| b.density().mean())
        .map(StateVector::new)
        .collect::<Result<Vec<_>>>()?;
    EstimateSet::new(elements)
}

/// `integral of exp(-|x|) over R^d`: surface area of the unit sphere times `Gamma(d)`.
pub fn exponential_kernel_normalizer(dim: usize) -> f64 {
    assert!(dim >= 1);
    let d = dim as f64;
    (std::f64::consts::LN_2 + 0.5 * d * std::f64::consts::PI.ln() + ln_gamma(d) - ln_gamma(0.5 * d)).exp()
}

/// Tolerance on the link between existence probability, clutter density and cutoff.
const CONSTRUCTION_TOLERANCE: f64 = 1e-12;

/// PMB whose NLL equals GOSPA up to constants: uniform clutter of density
/// `1 - rho` over a box, Bernoullis with `r = rho` and exponential kernels
/// `exp(-|x - x_i|) / k` centred on the estimates, and cutoff
/// `c = -2 ln(1 - rho)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Construction {
    rho: f64,
    intensity: UniformIntensity,
    centers: Vec<StateVector>,
    normalizer: f64,
    cutoff: f64,
}

impl Theorem1Construction {
    /// Derives the clutter mass, kernel normalizer and cutoff from `rho` and the region.
    pub fn new(rho: f64, lower: Vec<f64>, upper: Vec<f64>, centers: Vec<StateVector>) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::validation("rho", format!("rho must lie in (0, 1), got {rho}")));
        }
        let region = UniformIntensity::new(1.0, lower, upper)?;
        let volume = region.volume();
        let intensity = UniformIntensity::new(
            volume * (1.0 - rho),
            region.lower().to_vec(),
            region.upper().to_vec(),
        )?;
        let dim = intensity.dim();
        Self::from_parts(
            rho,
            intensity,
            centers,
            exponential_kernel_normalizer(dim),
            -2.0 * (1.0 - rho).ln(),
        )
    }

    /// Validates a fully specified construction.
    pub fn from_parts(
        rho: f64,
        intensity: UniformIntensity,
        centers: Vec<StateVector>,
        normalizer: f64,
        cutoff: f64,
    ) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::validation("rho", format!("rho must lie in (0, 1), got {rho}")));
        }
        if !(normalizer.is_finite() && normalizer > 0.0) {
            return Err(Error::validation("normalizer", "kernel normalizer must be positive"));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::validation("cutoff", "cutoff must be positive"));
        }
        let density = intensity.density();
        if density > 1.0 {
            return Err(Error::validation(
                "intensity",
                format!("clutter density must not exceed 1, got {density}"),
            ));
        }
        let log_miss = (1.0 - rho).ln();
        if (log_miss - density.ln()).abs() > CONSTRUCTION_TOLERANCE
            || (log_miss + 0.5 * cutoff).abs() > CONSTRUCTION_TOLERANCE
        {
            return Err(Error::validation(
                "cutoff",
                format!(
                    "ln(1 - rho) = {log_miss}, ln(clutter density) = {}, -c/2 = {} must coincide",
                    density.ln(),
                    -0.5 * cutoff
                ),
            ));
        }
        for (i, x) in centers.iter().enumerate() {
            if x.dim() != intensity.dim() {
                return Err(Error::DimensionMismatch {
                    path: format!("centers[{i}]"),
                    expected: intensity.dim(),
                    found: x.dim(),
                });
            }
        }
        Ok(Theorem1Construction {
            rho,
            intensity,
            centers,
            normalizer,
            cutoff,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn intensity(&self) -> &UniformIntensity {
        &self.intensity
    }

    pub fn centers(&self) -> &[StateVector] {
        &self.centers
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn volume(&self) -> f64 {
        self.intensity.volume()
    }
}

/// Min-assignment NLL evaluator for a PMB with exponential-kernel Bernoullis
/// and uniform clutter.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelPmb {
    existence: Vec<f64>,
    centers: Vec<StateVector>,
    intensity: UniformIntensity,
    normalizer: f64,
}

impl KernelPmb {
    /// Same PMB with per-Bernoulli existence probabilities replaced.
    pub fn with_existence(&self, existence: Vec<f64>) -> Result<Self> {
        if existence.len() != self.centers.len() {
            return Err(Error::DimensionMismatch {
                path: "existence".into(),
                expected: self.centers.len(),
                found: existence.len(),
            });
        }
        if let Some(r) = existence.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::validation("existence", format!("r must lie in (0, 1), got {r}")));
        }
        Ok(KernelPmb {
            existence,
            ..self.clone()
        })
    }

    pub fn existence(&self) -> &[f64] {
        &self.existence
    }

    /// NLL at the best assignment; `+inf` when no assignment has positive likelihood.
    pub fn nll(&self, y: &GroundTruthSet) -> Result<f64> {
        if y.dim() != self.intensity.dim() {
            return Err(Error::DimensionMismatch {
                path: "groundTruth".into(),
                expected: self.intensity.dim(),
                found: y.dim(),
            });
        }
        let m = self.centers.len();
        let ln_k = self.normalizer.ln();
        let mut entries = Vec::with_capacity(m * y.len());
        for (x, r) in self.centers.iter().zip(&self.existence) {
            for yj in y.elements() {
                // -ln(r exp(-D) / k / (1 - r))
                let d = x.euclidean_distance(yj);
                entries.push(Entry::Cost(d + ln_k - r.ln() + (1.0 - r).ln()));
            }
        }
        let log_density = self.intensity.density().ln();
        let dummy: Vec<Entry> = y
            .elements()
            .iter()
            .map(|yj| {
                if self.intensity.contains(yj.as_slice()) {
                    Entry::Cost(-log_density)
                } else {
                    Entry::Forbidden
                }
            })
            .collect();
        let min_cost = match CostMatrix::pmbm_structured(m, entries, &dummy).and_then(|c| solve_optimal(&c)) {
            Ok(a) => a.total_cost(),
            Err(Error::Infeasible) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        };
        let all_absent: f64 = self.existence.iter().map(|r| (1.0 - r).ln()).sum();
        Ok(self.intensity.total_mass() - all_absent + min_cost)
    }
}

pub fn build_theorem1_pmb(t: &Theorem1Construction) -> KernelPmb {
    KernelPmb {
        existence: vec![t.rho; t.centers.len()],
        centers: t.centers.clone(),
        intensity: t.intensity.clone(),
        normalizer: t.normalizer,
    }
}

/// Largest set size for the brute-force right-hand side.
pub const THEOREM1_ENUMERATION_LIMIT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Theorem1Check {
    /// NLL of the constructed PMB.
    #[serde(with = "crate::serde_float")]
    pub lhs: f64,
    /// `V(1 - rho) + min over gamma of [sum (D + ln(k / rho)) + (c/2)(|X| + |Y| - 2|gamma|)]`.
    #[serde(with = "crate::serde_float")]
    pub rhs: f64,
    /// `min over gamma of [sum D + (c/2)(|X| + |Y| - 2|gamma|)]`.
    pub gospa_part: f64,
}

impl Theorem1Check {
    pub fn gap(&self) -> f64 {
        if self.lhs == self.rhs {
            0.0
        } else {
            (self.lhs - self.rhs).abs()
        }
    }
}

/// Minimum over all partial matchings between `x` and `y` of
/// `sum (D + pair_offset) + half_cutoff * (unmatched x + unmatched y)`.
/// Leaving an element of `y` with `must_match[j]` unmatched is not allowed.
fn brute_force_matching_min(
    x: &[StateVector],
    y: &[StateVector],
    pair_offset: f64,
    half_cutoff: f64,
    must_match: &[bool],
) -> f64 {
    fn recurse(
        j: usize,
        x: &[StateVector],
        y: &[StateVector],
        used: &mut [bool],
        acc: f64,
        ctx: (f64, f64, &[bool]),
        best: &mut f64,
    ) {
        let (pair_offset, half_cutoff, must_match) = ctx;
        if j == y.len() {
            let unmatched_x = used.iter().filter(|u| !**u).count() as f64;
            let total = acc + half_cutoff * unmatched_x;
            if total < *best {
                *best = total;
            }
            return;
        }
        if !must_match[j] {
            recurse(j + 1, x, y, used, acc + half_cutoff, ctx, best);
        }
        for i in 0..x.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let d = euclidean(x[i].as_slice(), y[j].as_slice());
            recurse(j + 1, x, y, used, acc + d + pair_offset, ctx, best);
            used[i] = false;
        }
    }
    let mut used = vec![false; x.len()];
    let mut best = f64::INFINITY;
    recurse(0, x, y, &mut used, 0.0, (pair_offset, half_cutoff, must_match), &mut best);
    best
}

/// Evaluates both sides of the NLL/GOSPA identity on `y` through independent
/// code paths: the assignment solver on the PMB costs, and brute-force
/// enumeration of the closed-form right-hand side.
pub fn verify_theorem1(t: &Theorem1Construction, y: &GroundTruthSet) -> Result<Theorem1Check> {
    verify_with(t, &build_theorem1_pmb(t), y)
}

/// As [`verify_theorem1`], but with the left-hand side computed on `pmb`
/// (e.g. with perturbed existence probabilities).
pub fn verify_with(t: &Theorem1Construction, pmb: &KernelPmb, y: &GroundTruthSet) -> Result<Theorem1Check> {
    for (what, n) in [("centers", t.centers.len()), ("ground-truth objects", y.len())] {
        if n > THEOREM1_ENUMERATION_LIMIT {
            return Err(Error::SizeLimit {
                what,
                actual: n,
                limit: THEOREM1_ENUMERATION_LIMIT,
            });
        }
    }
    let lhs = pmb.nll(y)?;
    let must_match: Vec<bool> = y
        .elements()
        .iter()
        .map(|yj| !t.intensity.contains(yj.as_slice()))
        .collect();
    let half_c = 0.5 * t.cutoff;
    let offset = (t.normalizer / t.rho).ln();
    let rhs_min = brute_force_matching_min(&t.centers, y.elements(), offset, half_c, &must_match);
    let gospa_part = brute_force_matching_min(&t.centers, y.elements(), 0.0, half_c, &vec![false; y.len()]);
    Ok(Theorem1Check {
        lhs,
        rhs: t.volume() * (1.0 - t.rho) + rhs_min,
        gospa_part,
    })
}

/// One randomized trial: estimate centres and ground truth uniform in the box
/// `[0, volume^(1/dim)]^dim`, each set of size `0..=max_points`.
#[derive(Clone, Debug)]
pub struct Theorem1Trial {
    pub construction: Theorem1Construction,
    pub ground_truth: GroundTruthSet,
}

pub fn random_theorem1_trial(
    rng: &mut impl Rng,
    rho: f64,
    volume: f64,
    dim: usize,
    max_points: usize,
) -> Result<Theorem1Trial> {
    if !(volume.is_finite() && volume > 0.0) {
        return Err(Error::validation("volume", format!("volume must be positive, got {volume}")));
    }
    if dim == 0 {
        return Err(Error::validation("dim", "dimension must be >= 1"));
    }
    let side = volume.powf(1.0 / dim as f64);
    let points = |rng: &mut dyn rand::RngCore| -> Result<Vec<StateVector>> {
        let n = rng.gen_range(0..=max_points);
        (0..n)
            .map(|_| StateVector::new((0..dim).map(|_| rng.gen_range(0.0..side)).collect()))
            .collect()
    };
    let centers = points(rng)?;
    let gt = points(rng)?;
    let construction = Theorem1Construction::new(rho, vec![0.0; dim], vec![side; dim], centers)?;
    Ok(Theorem1Trial {
        construction,
        ground_truth: GroundTruthSet::new(dim, gt)?,
    })
}

/// Summary of a randomized sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Theorem1Sweep {
    pub trials: usize,
    pub max_gap: f64,
    pub median_gap: f64,
    /// Median gap when every existence probability is scaled by a random
    /// factor in `[0.5, 1.5)` (clamped to `(0, 1)`).
    pub perturbed_median_gap: f64,
}

pub fn theorem1_sweep(rho: f64, volume: f64, dim: usize, seed: u64, trials: usize) -> Result<Theorem1Sweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaps = Vec::with_capacity(trials);
    let mut perturbed = Vec::with_capacity(trials);
    for _ in 0..trials {
        let trial = random_theorem1_trial(&mut rng, rho, volume, dim, 5)?;
        let t = &trial.construction;
        gaps.push(verify_theorem1(t, &trial.ground_truth)?.gap());
        let r: Vec<f64> = (0..t.centers().len())
            .map(|_| (rho * rng.gen_range(0.5..1.5)).clamp(1e-3, 1.0 - 1e-3))
            .collect();
        let pmb = build_theorem1_pmb(t).with_existence(r)?;
        perturbed.push(verify_with(t, &pmb, &trial.ground_truth)?.gap());
    }
    Ok(Theorem1Sweep {
        trials,
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        median_gap: median(&mut gaps),
        perturbed_median_gap: median(&mut perturbed),
    })
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{
        Bernoulli, GaussianComponent, GaussianMixture, Intensity, MultiBernoulli, Pmbm,
    };

    fn pts(p: &[[f64; 2]]) -> Vec<Vec<f64>> {
        p.iter().map(|q| q.to_vec()).collect()
    }

    fn est(p: &[[f64; 2]]) -> EstimateSet {
        EstimateSet::from_points(&pts(p)).unwrap()
    }

    fn gt(p: &[[f64; 2]]) -> GroundTruthSet {
        GroundTruthSet::from_points(2, &pts(p)).unwrap()
    }

    #[test]
    fn gospa_identity() {
        let cfg = GospaConfig::new(2.0).unwrap();
        let r = gospa(&est(&[[1.0, 2.0], [3.0, 4.0]]), &gt(&[[1.0, 2.0], [3.0, 4.0]]), cfg).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(gospa(&est(&[]), &gt(&[]), cfg).unwrap().total, 0.0);
    }

    #[test]
    fn gospa_unmatched_at_cutoff() {
        let cfg = GospaConfig::new(2.0).unwrap();
        let r = gospa(&est(&[[0.0, 0.0]]), &gt(&[[2.0, 0.0]]), cfg).unwrap();
        assert!(r.matching.is_empty());
        assert_eq!(r.total, 2.0);
        assert_eq!((r.missed_penalty, r.false_penalty), (1.0, 1.0));
    }

    #[test]
    fn clear_mot_without_estimates() {
        let r = clear_mot(&est(&[]), &gt(&[[0.0, 0.0]]), 2.0).unwrap();
        assert_eq!(r.mota, 0.0);
        assert_eq!(r.motp, None);
        assert_eq!(r.misses, 1);
        assert_eq!(clear_mot(&est(&[]), &gt(&[]), 2.0).unwrap_err(), Error::EmptyGroundTruth);
    }

    #[test]
    fn clear_mot_prefers_more_matches() {
        // x0 is closest to y0, but matching x0-y1 and x1-y0 yields two matches.
        let x = est(&[[0.0, 0.0], [-1.9, 0.0]]);
        let y = gt(&[[-0.1, 0.0], [1.5, 0.0]]);
        let r = clear_mot(&x, &y, 2.0).unwrap();
        assert_eq!(r.matches, 2);
        assert_eq!(r.mota, 1.0);
    }

    fn bern(r: f64, mean: [f64; 2]) -> Bernoulli {
        let c = GaussianComponent::isotropic(1.0, StateVector::new(mean.to_vec()).unwrap(), 1.0).unwrap();
        Bernoulli::new(r, GaussianMixture::single(c)).unwrap()
    }

    #[test]
    fn extraction_by_threshold() {
        let p = Pmbm::pmb(2, Intensity::zero(), vec![bern(0.9, [1.0, 2.0]), bern(0.95, [3.0, 4.0])]).unwrap();
        let post = PosteriorDensity::Pmbm(p);
        assert_eq!(extract_estimates(&post, 0.5).unwrap(), est(&[[1.0, 2.0], [3.0, 4.0]]));
        assert!(extract_estimates(&post, 1.0).unwrap().is_empty());
        assert!(extract_estimates(&post, 1.5).is_err());
    }

    #[test]
    fn extraction_uses_heaviest_hypothesis() {
        let h0 = MultiBernoulli::new(0.3, vec![bern(0.9, [1.0, 1.0])]).unwrap();
        let h1 = MultiBernoulli::new(0.7, vec![bern(0.9, [5.0, 5.0]), bern(0.2, [0.0, 0.0])]).unwrap();
        let p = PosteriorDensity::Pmbm(Pmbm::new(2, Intensity::zero(), vec![h0, h1]).unwrap());
        assert_eq!(extract_estimates(&p, 0.5).unwrap(), est(&[[5.0, 5.0]]));
        // Padding Bernoullis are never extracted.
        assert_eq!(extract_estimates(&p, 0.0).unwrap().len(), 2);
    }

    #[test]
    fn kernel_normalizer_closed_forms() {
        use std::f64::consts::PI;
        assert!((exponential_kernel_normalizer(1) - 2.0).abs() < 1e-13);
        assert!((exponential_kernel_normalizer(2) - 2.0 * PI).abs() < 1e-13);
        assert!((exponential_kernel_normalizer(3) - 8.0 * PI).abs() < 1e-12);
    }

    fn construction_rho(rho: f64, centers: &[[f64; 2]]) -> Theorem1Construction {
        let c = centers.iter().map(|p| StateVector::new(p.to_vec()).unwrap()).collect();
        Theorem1Construction::new(rho, vec![0.0, 0.0], vec![10.0, 10.0], c).unwrap()
    }

    fn construction(centers: &[[f64; 2]]) -> Theorem1Construction {
        construction_rho(0.6, centers)
    }

    #[test]
    fn theorem1_empty_sets() {
        let t = construction(&[]);
        let nll = build_theorem1_pmb(&t).nll(&gt(&[])).unwrap();
        assert!((nll - 100.0 * 0.4).abs() < 1e-12);
    }

    #[test]
    fn theorem1_single_coincident_point() {
        // Matching beats the cutoff only when ln(k / rho) < c.
        let t = construction_rho(0.9, &[[3.0, 3.0]]);
        let nll = build_theorem1_pmb(&t).nll(&gt(&[[3.0, 3.0]])).unwrap();
        let expected = 100.0 * 0.1 + (2.0 * std::f64::consts::PI / 0.9).ln();
        assert!((nll - expected).abs() < 1e-12);
        // With rho = 0.6 leaving both unmatched is cheaper.
        let t = construction(&[[3.0, 3.0]]);
        let nll = build_theorem1_pmb(&t).nll(&gt(&[[3.0, 3.0]])).unwrap();
        assert!((nll - (40.0 + t.cutoff())).abs() < 1e-12);
    }

    #[test]
    fn theorem1_matched_pair_at_distance() {
        let t = construction_rho(0.95, &[[3.0, 3.0]]);
        let d0 = 1.0;
        assert!(d0 < t.cutoff() - (t.normalizer() / 0.95).ln());
        let y = gt(&[[3.0, 4.0]]);
        let check = verify_theorem1(&t, &y).unwrap();
        let expected = 100.0 * 0.05 + d0 + (t.normalizer() / 0.95).ln();
        assert!((check.lhs - expected).abs() < 1e-12);
        assert!((check.rhs - expected).abs() < 1e-12);
        assert!((check.gospa_part - d0).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_tight_and_control_is_not() {
        let s = theorem1_sweep(0.7, 50.0, 2, 3, 200).unwrap();
        assert!(s.max_gap < 1e-9, "{s:?}");
        assert!(s.perturbed_median_gap > 1e-3, "{s:?}");
    }

    #[test]
    fn theorem1_unmatched_center() {
        let t = construction(&[[3.0, 3.0]]);
        let nll = build_theorem1_pmb(&t).nll(&gt(&[])).unwrap();
        assert!((nll - (40.0 + 0.5 * t.cutoff())).abs() < 1e-12);
        let check = verify_theorem1(&t, &gt(&[])).unwrap();
        assert!(check.gap() < 1e-12);
    }

    #[test]
    fn construction_invariants_are_checked() {
        let region = UniformIntensity::new(40.0, vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let k = exponential_kernel_normalizer(2);
        assert!(Theorem1Construction::from_parts(0.6, region.clone(), vec![], k, -2.0 * 0.4f64.ln()).is_ok());
        assert!(Theorem1Construction::from_parts(0.6, region.clone(), vec![], k, 1.0).is_err());
        assert!(Theorem1Construction::from_parts(0.5, region, vec![], k, -2.0 * 0.5f64.ln()).is_err());
        assert!(Theorem1Construction::new(1.0, vec![0.0], vec![1.0], vec![]).is_err());
    }

    #[test]
    fn outside_point_must_be_matched() {
        let t = construction(&[[9.5, 9.5]]);
        let y = gt(&[[10.5, 10.5]]);
        let check = verify_theorem1(&t, &y).unwrap();
        assert!(check.lhs.is_finite());
        assert!(check.gap() < 1e-9);
        let none = construction(&[]);
        let check = verify_theorem1(&none, &y).unwrap();
        assert_eq!(check.lhs, f64::INFINITY);
        assert_eq!(check.rhs, f64::INFINITY);
        assert_eq!(check.gap(), 0.0);
    }
}
