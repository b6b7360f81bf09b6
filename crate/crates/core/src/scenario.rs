//! Scenario documents: ground truth plus the posteriors of competing trackers.
//!
//! The on-disk format is JSON. Posterior encodings carry a `type` tag; all
//! density invariants are checked at parse time and errors name the offending
//! path, e.g. `trackers[0].posterior.hypotheses[0].bernoullis[0].r`.

use std::collections::HashSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::densities::{
    Bernoulli, CardinalityDistribution, Cphd, GaussianComponent, GaussianMixture, Intensity,
    MultiBernoulli, Pmbm, PmbmKind, PosteriorDensity, StateVector, UniformIntensity,
};
use crate::error::{Error, Result};
use crate::scoring::GroundTruthSet;

pub const SCHEMA_VERSION: u32 = 1;

/// Cutoffs and threshold for the point-estimate baselines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub gospa_cutoff: f64,
    pub clear_mot_cutoff: f64,
    pub existence_threshold: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            gospa_cutoff: 2.0,
            clear_mot_cutoff: 2.0,
            existence_threshold: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tracker {
    pub name: String,
    pub posterior: PosteriorDensity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub ground_truth: GroundTruthSet,
    pub trackers: Vec<Tracker>,
    pub baseline: BaselineConfig,
}

impl Scenario {
    /// Validates tracker names and dimensions.
    pub fn new(
        name: String,
        ground_truth: GroundTruthSet,
        trackers: Vec<Tracker>,
        baseline: BaselineConfig,
    ) -> Result<Self> {
        let dim = ground_truth.dim();
        let mut seen = HashSet::new();
        for (i, t) in trackers.iter().enumerate() {
            if !seen.insert(t.name.as_str()) {
                return Err(Error::validation(
                    format!("trackers[{i}].name"),
                    format!("duplicate tracker name '{}'", t.name),
                ));
            }
            if t.posterior.dim() != dim {
                return Err(Error::DimensionMismatch {
                    path: format!("trackers[{i}].posterior"),
                    expected: dim,
                    found: t.posterior.dim(),
                });
            }
        }
        for (path, v) in [
            ("baseline.gospaCutoff", baseline.gospa_cutoff),
            ("baseline.clearMotCutoff", baseline.clear_mot_cutoff),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(path, format!("cutoff must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&baseline.existence_threshold) {
            return Err(Error::validation(
                "baseline.existenceThreshold",
                format!("threshold must lie in [0, 1], got {}", baseline.existence_threshold),
            ));
        }
        Ok(Scenario {
            name,
            ground_truth,
            trackers,
            baseline,
        })
    }

    pub fn dim(&self) -> usize {
        self.ground_truth.dim()
    }
}

// Raw document model. Field order here fixes the serialized layout.

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ScenarioDoc {
    schema_version: u32,
    name: String,
    dimension: usize,
    ground_truth: Vec<Vec<f64>>,
    #[serde(default)]
    baseline: BaselineConfig,
    trackers: Vec<TrackerDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackerDoc {
    name: String,
    posterior: PosteriorDoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PosteriorType {
    Cphd,
    Pmbm,
    Pmb,
    Mbm,
    Mbm01,
    BernoulliSet,
}

// Flat rather than internally tagged so that schema errors keep their full path.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PosteriorDoc {
    #[serde(rename = "type")]
    kind: PosteriorType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cardinality: Option<CardinalityDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state_density: Option<Vec<ComponentDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intensity: Option<IntensityDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hypotheses: Option<Vec<HypothesisDoc>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypothesisDoc {
    weight: f64,
    bernoullis: Vec<BernoulliDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BernoulliDoc {
    r: f64,
    density: Vec<ComponentDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    weight: f64,
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum IntensityKind {
    GaussianMixture,
    Uniform,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct IntensityDoc {
    kind: IntensityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<ComponentDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum CardinalityKind {
    Poisson,
    Explicit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CardinalityDoc {
    kind: CardinalityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pmf: Option<Vec<f64>>,
}

fn required<'a, T>(field: &'a Option<T>, name: &str, kind: &str) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::validation(name, format!("field is required for {kind}")))
}

fn forbidden<T>(field: &Option<T>, name: &str, kind: &str) -> Result<()> {
    match field {
        Some(_) => Err(Error::validation(name, format!("field is not allowed for {kind}"))),
        None => Ok(()),
    }
}

fn indexed<T, U>(items: &[T], field: &str, f: impl Fn(&T) -> Result<U>) -> Result<Vec<U>> {
    items
        .iter()
        .enumerate()
        .map(|(i, item)| f(item).map_err(|e| e.within(&format!("{field}[{i}]"))))
        .collect()
}

impl ComponentDoc {
    fn to_domain(&self) -> Result<GaussianComponent> {
        let mean = StateVector::new(self.mean.clone()).map_err(|e| e.within("mean"))?;
        GaussianComponent::new(self.weight, mean, &self.covariance)
    }

    fn from_domain(c: &GaussianComponent) -> Self {
        ComponentDoc {
            weight: c.weight(),
            mean: c.mean().as_slice().to_vec(),
            covariance: c.covariance_rows(),
        }
    }
}

fn mixture(components: &[ComponentDoc], field: &str) -> Result<GaussianMixture> {
    let comps = indexed(components, field, ComponentDoc::to_domain)?;
    GaussianMixture::new(comps).map_err(|e| e.within(field))
}

fn mixture_doc(m: &GaussianMixture) -> Vec<ComponentDoc> {
    m.components().iter().map(ComponentDoc::from_domain).collect()
}

impl IntensityDoc {
    fn to_domain(&self) -> Result<Intensity> {
        match self.kind {
            IntensityKind::GaussianMixture => {
                let kind = "a gaussian-mixture intensity";
                forbidden(&self.total_mass, "totalMass", kind)?;
                forbidden(&self.lower, "lower", kind)?;
                forbidden(&self.upper, "upper", kind)?;
                let components = required(&self.components, "components", kind)?;
                for (i, c) in components.iter().enumerate() {
                    if !(c.weight.is_finite() && c.weight >= 0.0) {
                        return Err(Error::validation(
                            format!("components[{i}].weight"),
                            format!("intensity weights must be finite and nonnegative, got {}", c.weight),
                        ));
                    }
                }
                Ok(Intensity::GaussianMixture(mixture(components, "components")?))
            }
            IntensityKind::Uniform => {
                let kind = "a uniform intensity";
                forbidden(&self.components, "components", kind)?;
                Ok(Intensity::Uniform(UniformIntensity::new(
                    *required(&self.total_mass, "totalMass", kind)?,
                    required(&self.lower, "lower", kind)?.clone(),
                    required(&self.upper, "upper", kind)?.clone(),
                )?))
            }
        }
    }

    fn from_domain(i: &Intensity) -> Self {
        match i {
            Intensity::GaussianMixture(m) => IntensityDoc {
                kind: IntensityKind::GaussianMixture,
                components: Some(mixture_doc(m)),
                total_mass: None,
                lower: None,
                upper: None,
            },
            Intensity::Uniform(u) => IntensityDoc {
                kind: IntensityKind::Uniform,
                components: None,
                total_mass: Some(u.total_mass()),
                lower: Some(u.lower().to_vec()),
                upper: Some(u.upper().to_vec()),
            },
        }
    }
}

impl CardinalityDoc {
    fn to_domain(&self) -> Result<CardinalityDistribution> {
        match self.kind {
            CardinalityKind::Poisson => {
                forbidden(&self.pmf, "pmf", "a Poisson cardinality")?;
                CardinalityDistribution::poisson(*required(&self.rate, "rate", "a Poisson cardinality")?)
            }
            CardinalityKind::Explicit => {
                forbidden(&self.rate, "rate", "an explicit cardinality")?;
                CardinalityDistribution::explicit(required(&self.pmf, "pmf", "an explicit cardinality")?.clone())
            }
        }
    }

    fn from_domain(c: &CardinalityDistribution) -> Self {
        match c {
            CardinalityDistribution::Poisson { rate } => CardinalityDoc {
                kind: CardinalityKind::Poisson,
                rate: Some(*rate),
                pmf: None,
            },
            CardinalityDistribution::Explicit { pmf } => CardinalityDoc {
                kind: CardinalityKind::Explicit,
                rate: None,
                pmf: Some(pmf.clone()),
            },
        }
    }
}

impl PosteriorDoc {
    fn to_domain(&self, dim: usize) -> Result<PosteriorDensity> {
        let kind = match self.kind {
            PosteriorType::Cphd => {
                let name = "a cphd posterior";
                forbidden(&self.intensity, "intensity", name)?;
                forbidden(&self.hypotheses, "hypotheses", name)?;
                let card = required(&self.cardinality, "cardinality", name)?
                    .to_domain()
                    .map_err(|e| e.within("cardinality"))?;
                let density = mixture(required(&self.state_density, "stateDensity", name)?, "stateDensity")?;
                density.check_dim(dim).map_err(|e| e.within("stateDensity"))?;
                return Ok(PosteriorDensity::Cphd(Cphd::new(card, density)?));
            }
            PosteriorType::Pmbm => PmbmKind::Pmbm,
            PosteriorType::Pmb => PmbmKind::Pmb,
            PosteriorType::Mbm => PmbmKind::Mbm,
            PosteriorType::Mbm01 => PmbmKind::Mbm01,
            PosteriorType::BernoulliSet => PmbmKind::BernoulliSet,
        };
        let name = format!("a {} posterior", kind.name());
        forbidden(&self.cardinality, "cardinality", &name)?;
        forbidden(&self.state_density, "stateDensity", &name)?;
        // A missing intensity means no undetected objects.
        let intensity = match &self.intensity {
            Some(doc) => doc.to_domain().map_err(|e| e.within("intensity"))?,
            None => Intensity::zero(),
        };
        let hypotheses = indexed(required(&self.hypotheses, "hypotheses", &name)?, "hypotheses", |h| {
            let bernoullis = indexed(&h.bernoullis, "bernoullis", |b| {
                let density = mixture(&b.density, "density")?;
                Bernoulli::new(b.r, density)
            })?;
            MultiBernoulli::new(h.weight, bernoullis)
        })?;
        Ok(PosteriorDensity::Pmbm(Pmbm::with_kind(kind, dim, intensity, hypotheses)?))
    }

    fn from_domain(p: &PosteriorDensity) -> Self {
        match p {
            PosteriorDensity::Cphd(c) => PosteriorDoc {
                kind: PosteriorType::Cphd,
                cardinality: Some(CardinalityDoc::from_domain(c.cardinality())),
                state_density: Some(mixture_doc(c.state_density())),
                intensity: None,
                hypotheses: None,
            },
            PosteriorDensity::Pmbm(p) => PosteriorDoc {
                kind: match p.kind() {
                    PmbmKind::Pmbm => PosteriorType::Pmbm,
                    PmbmKind::Pmb => PosteriorType::Pmb,
                    PmbmKind::Mbm => PosteriorType::Mbm,
                    PmbmKind::Mbm01 => PosteriorType::Mbm01,
                    PmbmKind::BernoulliSet => PosteriorType::BernoulliSet,
                },
                cardinality: None,
                state_density: None,
                intensity: Some(IntensityDoc::from_domain(p.intensity())),
                hypotheses: Some(
                    (0..p.hypotheses().len())
                        .map(|h| HypothesisDoc {
                            weight: p.hypotheses()[h].weight(),
                            bernoullis: p
                                .declared_bernoullis(h)
                                .iter()
                                .map(|b| BernoulliDoc {
                                    r: b.existence(),
                                    density: mixture_doc(b.density()),
                                })
                                .collect(),
                        })
                        .collect(),
                ),
            },
        }
    }
}

impl ScenarioDoc {
    fn to_domain(&self) -> Result<Scenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schemaVersion",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.dimension == 0 {
            return Err(Error::validation("dimension", "dimension must be >= 1"));
        }
        let gt = GroundTruthSet::from_points(self.dimension, &self.ground_truth)
            .map_err(|e| e.within("groundTruth"))?;
        let trackers = indexed(&self.trackers, "trackers", |t| {
            Ok(Tracker {
                name: t.name.clone(),
                posterior: t
                    .posterior
                    .to_domain(self.dimension)
                    .map_err(|e| e.within("posterior"))?,
            })
        })?;
        Scenario::new(self.name.clone(), gt, trackers, self.baseline)
    }

    fn from_domain(s: &Scenario) -> Self {
        ScenarioDoc {
            schema_version: SCHEMA_VERSION,
            name: s.name.clone(),
            dimension: s.dim(),
            ground_truth: s
                .ground_truth
                .elements()
                .iter()
                .map(|y| y.as_slice().to_vec())
                .collect(),
            baseline: s.baseline,
            trackers: s
                .trackers
                .iter()
                .map(|t| TrackerDoc {
                    name: t.name.clone(),
                    posterior: PosteriorDoc::from_domain(&t.posterior),
                })
                .collect(),
        }
    }
}

/// Parses and fully validates a scenario document.
pub fn parse_scenario(document: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::validation(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })?;
    doc.to_domain()
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::validation(path.display().to_string(), format!("cannot read scenario: {e}"))
    })?;
    parse_scenario(&text)
}

/// Pretty-printed JSON; floats use shortest round-trip formatting.
pub fn serialize_scenario(s: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioDoc::from_domain(s)).expect("scenario documents hold only finite numbers")
}

/// Size limits for [`generate_random_scenario`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioLimits {
    pub max_objects: usize,
    pub max_bernoullis: usize,
    pub max_hypotheses: usize,
    pub dimension: usize,
}

impl Default for ScenarioLimits {
    fn default() -> Self {
        ScenarioLimits {
            max_objects: 5,
            max_bernoullis: 5,
            max_hypotheses: 3,
            dimension: 2,
        }
    }
}

const FIELD_SIZE: f64 = 10.0;

/// Random scenario with one PMBM-family tracker and, half of the time, a CPHD
/// tracker. Edge cases appear with fixed probabilities: empty ground truth
/// (10%), a Bernoulli with `r = 0` (10%), one with `r = 1` (10%), and zero
/// Poisson intensity (25%).
pub fn generate_random_scenario(seed: u64, limits: ScenarioLimits) -> Result<Scenario> {
    if limits.dimension == 0 {
        return Err(Error::validation("dim", "dimension must be >= 1"));
    }
    if limits.max_hypotheses == 0 {
        return Err(Error::validation("maxHypotheses", "at least one hypothesis is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = limits.dimension;

    let n = if limits.max_objects == 0 || rng.gen_bool(0.1) {
        0
    } else {
        rng.gen_range(1..=limits.max_objects)
    };
    let truth: Vec<StateVector> = (0..n).map(|_| uniform_point(&mut rng, dim)).collect();

    let mut trackers = vec![Tracker {
        name: "pmbm".into(),
        posterior: PosteriorDensity::Pmbm(random_pmbm(&mut rng, &truth, limits)?),
    }];
    if rng.gen_bool(0.5) {
        let card = CardinalityDistribution::poisson(rng.gen_range(0.2..4.0))?;
        let density = random_mixture(&mut rng, &truth, dim)?;
        trackers.push(Tracker {
            name: "cphd".into(),
            posterior: PosteriorDensity::Cphd(Cphd::new(card, density)?),
        });
    }
    Scenario::new(
        format!("random-{seed}"),
        GroundTruthSet::new(dim, truth)?,
        trackers,
        BaselineConfig::default(),
    )
}

fn uniform_point(rng: &mut impl Rng, dim: usize) -> StateVector {
    StateVector::new((0..dim).map(|_| rng.gen_range(0.0..FIELD_SIZE)).collect()).expect("finite")
}

/// Near a ground-truth object most of the time, so that assignments matter.
fn random_mean(rng: &mut impl Rng, truth: &[StateVector], dim: usize) -> StateVector {
    if !truth.is_empty() && rng.gen_bool(0.7) {
        let y = &truth[rng.gen_range(0..truth.len())];
        StateVector::new(y.as_slice().iter().map(|v| v + rng.gen_range(-1.5..1.5)).collect()).expect("finite")
    } else {
        uniform_point(rng, dim)
    }
}

/// `L L^T` with a well-conditioned random lower-triangular `L`.
fn random_covariance(rng: &mut impl Rng, dim: usize) -> Vec<Vec<f64>> {
    let mut l = vec![vec![0.0; dim]; dim];
    for (i, row) in l.iter_mut().enumerate() {
        row[i] = rng.gen_range(0.4..1.5);
        for v in row.iter_mut().take(i) {
            *v = rng.gen_range(-0.5..0.5);
        }
    }
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).map(|k| l[i][k] * l[j][k]).sum())
                .collect()
        })
        .collect()
}

fn normalized_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

fn random_components(rng: &mut impl Rng, truth: &[StateVector], dim: usize, weights: &[f64]) -> Result<Vec<GaussianComponent>> {
    weights
        .iter()
        .map(|&w| {
            let mean = random_mean(rng, truth, dim);
            let cov = random_covariance(rng, dim);
            GaussianComponent::new(w, mean, &cov)
        })
        .collect()
}

fn random_mixture(rng: &mut impl Rng, truth: &[StateVector], dim: usize) -> Result<GaussianMixture> {
    let count = rng.gen_range(1..=2);
    let weights = normalized_weights(rng, count);
    GaussianMixture::new(random_components(rng, truth, dim, &weights)?)
}

fn random_pmbm(rng: &mut impl Rng, truth: &[StateVector], limits: ScenarioLimits) -> Result<Pmbm> {
    let dim = limits.dimension;
    let intensity = if rng.gen_bool(0.25) {
        Intensity::zero()
    } else if rng.gen_bool(0.5) {
        let mass = rng.gen_range(0.1..3.0);
        let count = rng.gen_range(1..=2);
        let weights: Vec<f64> = normalized_weights(rng, count).iter().map(|w| w * mass).collect();
        Intensity::GaussianMixture(GaussianMixture::new(random_components(rng, truth, dim, &weights)?)?)
    } else {
        Intensity::Uniform(UniformIntensity::new(
            rng.gen_range(0.1..3.0),
            vec![-1.0; dim],
            vec![FIELD_SIZE + 1.0; dim],
        )?)
    };
    let force_absent = rng.gen_bool(0.1);
    let force_certain = rng.gen_bool(0.1);
    let h_count = rng.gen_range(1..=limits.max_hypotheses);
    let weights = normalized_weights(rng, h_count);
    let mut hypotheses = Vec::with_capacity(h_count);
    for w in weights {
        let m = rng.gen_range(0..=limits.max_bernoullis);
        let mut bernoullis = (0..m)
            .map(|_| Bernoulli::new(rng.gen_range(0.05..0.95), random_mixture(rng, truth, dim)?))
            .collect::<Result<Vec<_>>>()?;
        if !bernoullis.is_empty() {
            let len = bernoullis.len();
            if force_absent {
                let b = &mut bernoullis[rng.gen_range(0..len)];
                *b = Bernoulli::new(0.0, b.density().clone())?;
            }
            if force_certain {
                let b = &mut bernoullis[rng.gen_range(0..len)];
                *b = Bernoulli::new(1.0, b.density().clone())?;
            }
        }
        hypotheses.push(MultiBernoulli::new(w, bernoullis)?);
    }
    let kind = if h_count == 1 { PmbmKind::Pmb } else { PmbmKind::Pmbm };
    Pmbm::with_kind(kind, dim, intensity, hypotheses)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schemaVersion": 1,
        "name": "minimal",
        "dimension": 2,
        "groundTruth": [],
        "trackers": [{"name": "ppp", "posterior": {
            "type": "pmbm",
            "intensity": {"kind": "uniform", "totalMass": 1.0, "lower": [0, 0], "upper": [1, 1]},
            "hypotheses": [{"weight": 1.0, "bernoullis": []}]
        }}]
    }"#;

    #[test]
    fn minimal_document() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert!(s.ground_truth.is_empty());
        assert_eq!(s.trackers.len(), 1);
        assert_eq!(s.baseline, BaselineConfig::default());
    }

    fn validation_path(text: &str) -> String {
        match parse_scenario(text).unwrap_err() {
            Error::Validation { path, .. } | Error::DimensionMismatch { path, .. } => path,
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invalid_existence_names_path() {
        let doc = MINIMAL.replace(
            r#""bernoullis": []"#,
            r#""bernoullis": [{"r": 1.2, "density": [{"weight": 1, "mean": [0, 0], "covariance": [[1, 0], [0, 1]]}]}]"#,
        );
        assert_eq!(validation_path(&doc), "trackers[0].posterior.hypotheses[0].bernoullis[0].r");
    }

    #[test]
    fn schema_errors_name_path() {
        let doc = MINIMAL.replace(r#""weight": 1.0"#, r#""weight": "heavy""#);
        assert_eq!(validation_path(&doc), "trackers[0].posterior.hypotheses[0].weight");
        let doc = MINIMAL.replace(r#""name": "minimal","#, r#""name": "minimal", "extra": 1,"#);
        assert!(parse_scenario(&doc).is_err());
    }

    #[test]
    fn covariance_must_be_spd() {
        let doc = MINIMAL.replace(
            r#""bernoullis": []"#,
            r#""bernoullis": [{"r": 0.5, "density": [{"weight": 1, "mean": [0, 0], "covariance": [[1, 2], [2, 1]]}]}]"#,
        );
        assert!(validation_path(&doc).starts_with("trackers[0].posterior.hypotheses[0].bernoullis[0].density[0]"));
    }

    #[test]
    fn duplicate_names_rejected() {
        let s = parse_scenario(MINIMAL).unwrap();
        let t = s.trackers[0].clone();
        let err = Scenario::new("dup".into(), s.ground_truth.clone(), vec![t.clone(), t], s.baseline).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let doc = MINIMAL.replace(r#""groundTruth": []"#, r#""groundTruth": [[1, 2, 3]]"#);
        assert_eq!(validation_path(&doc), "groundTruth[0]");
    }

    #[test]
    fn restricted_types_checked() {
        let doc = MINIMAL.replace(r#""type": "pmbm""#, r#""type": "mbm""#);
        assert_eq!(validation_path(&doc), "trackers[0].posterior.intensity");
    }

    #[test]
    fn generator_is_deterministic_and_round_trips() {
        for seed in 0..50 {
            let a = generate_random_scenario(seed, ScenarioLimits::default()).unwrap();
            let b = generate_random_scenario(seed, ScenarioLimits::default()).unwrap();
            assert_eq!(a, b);
            let text = serialize_scenario(&a);
            let back = parse_scenario(&text).unwrap();
            assert_eq!(back, a);
            assert_eq!(serialize_scenario(&back), text);
        }
    }

    #[test]
    fn zero_object_limit() {
        let limits = ScenarioLimits {
            max_objects: 0,
            ..ScenarioLimits::default()
        };
        for seed in 0..20 {
            assert!(generate_random_scenario(seed, limits).unwrap().ground_truth.is_empty());
        }
    }
}
