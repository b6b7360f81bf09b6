use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::densities::gaussian::{GaussianComponent, GaussianMixture, StateVector};
use crate::densities::intensity::Intensity;
use crate::error::{Error, Result};
use crate::logspace::LogValue;

const PROBABILITY_TOLERANCE: f64 = 1e-9;

fn check_probability(path: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(path, format!("must lie in [0, 1], got {p}")))
    }
}

/// Set density that is empty with probability `1 - r` and a singleton drawn
/// from the state density with probability `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bernoulli {
    existence: f64,
    density: GaussianMixture,
}

impl Bernoulli {
    pub fn new(existence: f64, density: GaussianMixture) -> Result<Self> {
        check_probability("r", existence)?;
        if density.is_empty() {
            return Err(Error::validation("density", "state density needs at least one component"));
        }
        density.check_normalized().map_err(|e| e.within("density"))?;
        Ok(Bernoulli { existence, density })
    }

    /// Padding Bernoulli with `r = 0`. Its density is a placeholder and never evaluated.
    pub fn absent(dim: usize) -> Self {
        let mean = StateVector::new(vec![0.0; dim]).expect("zero vector is valid");
        let placeholder =
            GaussianComponent::isotropic(1.0, mean, 1.0).expect("identity covariance is SPD");
        Bernoulli {
            existence: 0.0,
            density: GaussianMixture::single(placeholder),
        }
    }

    pub fn existence(&self) -> f64 {
        self.existence
    }

    pub fn density(&self) -> &GaussianMixture {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.density.dim().expect("validated nonempty")
    }

    /// `ln(1 - r)`.
    pub fn log_absent(&self) -> LogValue {
        LogValue::complement_of(self.existence)
    }

    /// `ln(r p(x))`.
    pub fn log_present(&self, x: &[f64]) -> LogValue {
        if self.existence == 0.0 {
            return LogValue::ZERO;
        }
        LogValue::from_linear(self.existence) * self.density.log_density(x)
    }
}

/// Bernoulli set density at the empty set (`None`) or a singleton.
pub fn log_bernoulli_set_density(b: &Bernoulli, arg: Option<&StateVector>) -> Result<LogValue> {
    match arg {
        None => Ok(b.log_absent()),
        Some(x) => {
            if x.dim() != b.dim() {
                return Err(Error::DimensionMismatch {
                    path: "x".into(),
                    expected: b.dim(),
                    found: x.dim(),
                });
            }
            Ok(b.log_present(x.as_slice()))
        }
    }
}

/// One weighted multi-Bernoulli hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiBernoulli {
    weight: f64,
    bernoullis: Vec<Bernoulli>,
}

impl MultiBernoulli {
    pub fn new(weight: f64, bernoullis: Vec<Bernoulli>) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0 && weight <= 1.0 + PROBABILITY_TOLERANCE) {
            return Err(Error::validation(
                "weight",
                format!("hypothesis weight must lie in (0, 1], got {weight}"),
            ));
        }
        Ok(MultiBernoulli { weight, bernoullis })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn bernoullis(&self) -> &[Bernoulli] {
        &self.bernoullis
    }

    pub fn len(&self) -> usize {
        self.bernoullis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bernoullis.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CardinalityDistribution {
    Poisson { rate: f64 },
    /// pmf over `n = 0..pmf.len()`; larger cardinalities have probability zero.
    Explicit { pmf: Vec<f64> },
}

impl CardinalityDistribution {
    pub fn poisson(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::validation(
                "rate",
                format!("Poisson rate must be finite and nonnegative, got {rate}"),
            ));
        }
        Ok(CardinalityDistribution::Poisson { rate })
    }

    pub fn explicit(pmf: Vec<f64>) -> Result<Self> {
        for (i, p) in pmf.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::validation(
                    format!("pmf[{i}]"),
                    format!("probability must be finite and nonnegative, got {p}"),
                ));
            }
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::validation("pmf", format!("pmf must sum to 1, got {total}")));
        }
        Ok(CardinalityDistribution::Explicit { pmf })
    }

    pub fn log_pmf(&self, n: usize) -> LogValue {
        match self {
            CardinalityDistribution::Poisson { rate } => {
                if *rate == 0.0 {
                    return if n == 0 { LogValue::ONE } else { LogValue::ZERO };
                }
                let nf = n as f64;
                LogValue::from_ln(nf * rate.ln() - rate - ln_gamma(nf + 1.0))
            }
            CardinalityDistribution::Explicit { pmf } => match pmf.get(n) {
                Some(&p) => LogValue::from_linear(p),
                None => LogValue::ZERO,
            },
        }
    }
}

/// CPHD posterior: a cardinality distribution times iid states.
#[derive(Clone, Debug, PartialEq)]
pub struct Cphd {
    cardinality: CardinalityDistribution,
    state_density: GaussianMixture,
}

impl Cphd {
    pub fn new(cardinality: CardinalityDistribution, state_density: GaussianMixture) -> Result<Self> {
        if state_density.is_empty() {
            return Err(Error::validation(
                "stateDensity",
                "state density needs at least one component",
            ));
        }
        state_density
            .check_normalized()
            .map_err(|e| e.within("stateDensity"))?;
        Ok(Cphd {
            cardinality,
            state_density,
        })
    }

    pub fn cardinality(&self) -> &CardinalityDistribution {
        &self.cardinality
    }

    pub fn state_density(&self) -> &GaussianMixture {
        &self.state_density
    }

    pub fn dim(&self) -> usize {
        self.state_density.dim().expect("validated nonempty")
    }
}

/// Which restricted PMBM family a posterior was declared as.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmbmKind {
    Pmbm,
    /// Single hypothesis.
    Pmb,
    /// Zero intensity.
    Mbm,
    /// Zero intensity and every `r` in `{0, 1}`.
    Mbm01,
    /// Single hypothesis and zero intensity.
    BernoulliSet,
}

impl PmbmKind {
    pub fn name(self) -> &'static str {
        match self {
            PmbmKind::Pmbm => "pmbm",
            PmbmKind::Pmb => "pmb",
            PmbmKind::Mbm => "mbm",
            PmbmKind::Mbm01 => "mbm01",
            PmbmKind::BernoulliSet => "bernoulli-set",
        }
    }
}

/// Poisson multi-Bernoulli mixture posterior.
///
/// Every hypothesis holds the same number of Bernoullis; shorter ones are
/// padded with `r = 0` entries at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmbm {
    dim: usize,
    kind: PmbmKind,
    intensity: Intensity,
    hypotheses: Vec<MultiBernoulli>,
    /// Bernoulli count per hypothesis before padding.
    declared_lengths: Vec<usize>,
}

impl Pmbm {
    pub fn new(dim: usize, intensity: Intensity, hypotheses: Vec<MultiBernoulli>) -> Result<Self> {
        Self::with_kind(PmbmKind::Pmbm, dim, intensity, hypotheses)
    }

    /// Builds a posterior and validates the extra constraints of `kind`.
    pub fn with_kind(
        kind: PmbmKind,
        dim: usize,
        intensity: Intensity,
        hypotheses: Vec<MultiBernoulli>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dim", "dimension must be >= 1"));
        }
        if hypotheses.is_empty() {
            return Err(Error::validation("hypotheses", "at least one hypothesis is required"));
        }
        intensity.check_dim(dim)?;
        let total: f64 = hypotheses.iter().map(MultiBernoulli::weight).sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::validation(
                "hypotheses",
                format!("hypothesis weights must sum to 1, got {total}"),
            ));
        }
        for (h, hyp) in hypotheses.iter().enumerate() {
            for (k, b) in hyp.bernoullis().iter().enumerate() {
                if b.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        path: format!("hypotheses[{h}].bernoullis[{k}].density"),
                        expected: dim,
                        found: b.dim(),
                    });
                }
            }
        }
        let single = hypotheses.len() == 1;
        let zero_intensity = intensity.is_zero();
        let require = |ok: bool, path: &str, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::validation(path, format!("{} posterior: {msg}", kind.name())))
            }
        };
        match kind {
            PmbmKind::Pmbm => {}
            PmbmKind::Pmb => require(single, "hypotheses", "requires exactly one hypothesis")?,
            PmbmKind::Mbm => require(zero_intensity, "intensity", "requires zero intensity")?,
            PmbmKind::Mbm01 => {
                require(zero_intensity, "intensity", "requires zero intensity")?;
                for (h, hyp) in hypotheses.iter().enumerate() {
                    for (k, b) in hyp.bernoullis().iter().enumerate() {
                        let r = b.existence();
                        require(
                            r == 0.0 || r == 1.0,
                            &format!("hypotheses[{h}].bernoullis[{k}].r"),
                            "existence probabilities must be 0 or 1",
                        )?;
                    }
                }
            }
            PmbmKind::BernoulliSet => {
                require(single, "hypotheses", "requires exactly one hypothesis")?;
                require(zero_intensity, "intensity", "requires zero intensity")?;
            }
        }

        let declared_lengths: Vec<usize> = hypotheses.iter().map(MultiBernoulli::len).collect();
        let m = declared_lengths.iter().copied().max().unwrap_or(0);
        let hypotheses = hypotheses
            .into_iter()
            .map(|mut hyp| {
                hyp.bernoullis.resize_with(m, || Bernoulli::absent(dim));
                hyp
            })
            .collect();
        Ok(Pmbm {
            dim,
            kind,
            intensity,
            hypotheses,
            declared_lengths,
        })
    }

    /// Plain PMB: one hypothesis with weight 1.
    pub fn pmb(dim: usize, intensity: Intensity, bernoullis: Vec<Bernoulli>) -> Result<Self> {
        let hyp = MultiBernoulli::new(1.0, bernoullis)?;
        Self::with_kind(PmbmKind::Pmb, dim, intensity, vec![hyp])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> PmbmKind {
        self.kind
    }

    pub fn intensity(&self) -> &Intensity {
        &self.intensity
    }

    pub fn hypotheses(&self) -> &[MultiBernoulli] {
        &self.hypotheses
    }

    /// Common (padded) Bernoulli count.
    pub fn bernoulli_count(&self) -> usize {
        self.hypotheses[0].len()
    }

    /// Bernoullis of hypothesis `h` as declared, without padding.
    pub fn declared_bernoullis(&self, h: usize) -> &[Bernoulli] {
        &self.hypotheses[h].bernoullis[..self.declared_lengths[h]]
    }

    /// True when the posterior satisfies the structural constraints of `kind`.
    pub fn conforms_to(&self, kind: PmbmKind) -> bool {
        let single = self.hypotheses.len() == 1;
        let zero = self.intensity.is_zero();
        match kind {
            PmbmKind::Pmbm => true,
            PmbmKind::Pmb => single,
            PmbmKind::Mbm => zero,
            PmbmKind::Mbm01 => {
                zero && self.hypotheses.iter().all(|h| {
                    h.bernoullis()
                        .iter()
                        .all(|b| b.existence() == 0.0 || b.existence() == 1.0)
                })
            }
            PmbmKind::BernoulliSet => single && zero,
        }
    }
}

/// Multi-object posterior of a tracker.
#[derive(Clone, Debug, PartialEq)]
pub enum PosteriorDensity {
    Cphd(Cphd),
    Pmbm(Pmbm),
}

impl PosteriorDensity {
    pub fn dim(&self) -> usize {
        match self {
            PosteriorDensity::Cphd(c) => c.dim(),
            PosteriorDensity::Pmbm(p) => p.dim(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn std_density() -> GaussianMixture {
        GaussianMixture::single(
            GaussianComponent::isotropic(1.0, StateVector::new(vec![0.0, 0.0]).unwrap(), 1.0)
                .unwrap(),
        )
    }

    #[test]
    fn bernoulli_set_density_cases() {
        let b0 = Bernoulli::new(0.0, std_density()).unwrap();
        assert_eq!(log_bernoulli_set_density(&b0, None).unwrap().ln(), 0.0);
        let b1 = Bernoulli::new(1.0, std_density()).unwrap();
        assert!(log_bernoulli_set_density(&b1, None).unwrap().is_zero());
        let x = StateVector::new(vec![0.0, 0.0]).unwrap();
        assert!(log_bernoulli_set_density(&b0, Some(&x)).unwrap().is_zero());
        let half = Bernoulli::new(0.5, std_density()).unwrap();
        let v = log_bernoulli_set_density(&half, Some(&x)).unwrap().ln();
        assert!((v - (0.5f64.ln() - (2.0 * PI).ln())).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_rejects_bad_inputs() {
        assert!(matches!(
            Bernoulli::new(1.2, std_density()),
            Err(Error::Validation { ref path, .. }) if path == "r"
        ));
        let unnormalized = GaussianMixture::single(
            GaussianComponent::isotropic(0.5, StateVector::new(vec![0.0]).unwrap(), 1.0).unwrap(),
        );
        assert!(Bernoulli::new(0.5, unnormalized).is_err());
        assert!(Bernoulli::new(f64::NAN, std_density()).is_err());
    }

    #[test]
    fn poisson_and_explicit_cardinality() {
        let p = CardinalityDistribution::poisson(2.0).unwrap();
        let expected = 3.0 * 2f64.ln() - 2.0 - 6f64.ln();
        assert!((p.log_pmf(3).ln() - expected).abs() < 1e-13);
        let z = CardinalityDistribution::poisson(0.0).unwrap();
        assert_eq!(z.log_pmf(0), LogValue::ONE);
        assert!(z.log_pmf(1).is_zero());
        let e = CardinalityDistribution::explicit(vec![0.25, 0.75]).unwrap();
        assert!((e.log_pmf(1).exp() - 0.75).abs() < 1e-15);
        assert!(e.log_pmf(2).is_zero());
        assert!(CardinalityDistribution::explicit(vec![0.5, 0.6]).is_err());
        assert!(CardinalityDistribution::poisson(-1.0).is_err());
    }

    #[test]
    fn pads_hypotheses_to_common_length() {
        let b = Bernoulli::new(0.4, std_density()).unwrap();
        let h0 = MultiBernoulli::new(0.5, vec![b.clone(), b.clone()]).unwrap();
        let h1 = MultiBernoulli::new(0.5, vec![b]).unwrap();
        let p = Pmbm::new(2, Intensity::zero(), vec![h0, h1]).unwrap();
        assert_eq!(p.bernoulli_count(), 2);
        assert_eq!(p.hypotheses()[1].bernoullis()[1].existence(), 0.0);
        assert_eq!(p.declared_bernoullis(1).len(), 1);
        assert!(p.conforms_to(PmbmKind::Mbm));
        assert!(!p.conforms_to(PmbmKind::Pmb));
    }

    #[test]
    fn restricted_kinds_are_validated() {
        let b = Bernoulli::new(0.4, std_density()).unwrap();
        let h = |w| MultiBernoulli::new(w, vec![b.clone()]).unwrap();
        assert!(Pmbm::with_kind(PmbmKind::Pmb, 2, Intensity::zero(), vec![h(0.5), h(0.5)]).is_err());
        assert!(Pmbm::with_kind(PmbmKind::Mbm01, 2, Intensity::zero(), vec![h(1.0)]).is_err());
        let ppp = Intensity::GaussianMixture(std_density());
        assert!(Pmbm::with_kind(PmbmKind::BernoulliSet, 2, ppp, vec![h(1.0)]).is_err());
        assert!(Pmbm::with_kind(PmbmKind::BernoulliSet, 2, Intensity::zero(), vec![h(1.0)]).is_ok());
    }

    #[test]
    fn hypothesis_weights_must_sum_to_one() {
        let b = Bernoulli::new(0.4, std_density()).unwrap();
        let h = MultiBernoulli::new(0.7, vec![b]).unwrap();
        assert!(Pmbm::new(2, Intensity::zero(), vec![h]).is_err());
        assert!(MultiBernoulli::new(0.0, vec![]).is_err());
    }

    #[test]
    fn dimension_mismatch_in_pmbm() {
        let b = Bernoulli::new(0.4, std_density()).unwrap();
        let h = MultiBernoulli::new(1.0, vec![b]).unwrap();
        assert!(matches!(
            Pmbm::new(3, Intensity::zero(), vec![h]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
