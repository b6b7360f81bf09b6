use crate::densities::gaussian::{GaussianMixture, StateVector};
use crate::error::{Error, Result};
use crate::logspace::LogValue;

/// Constant intensity `total_mass / volume` over an axis-aligned box, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformIntensity {
    total_mass: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl UniformIntensity {
    pub fn new(total_mass: f64, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if !total_mass.is_finite() || total_mass < 0.0 {
            return Err(Error::validation(
                "totalMass",
                format!("total mass must be finite and nonnegative, got {total_mass}"),
            ));
        }
        if lower.is_empty() {
            return Err(Error::validation("lower", "region must have dimension >= 1"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                path: "upper".into(),
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(Error::validation(
                    format!("upper[{i}]"),
                    format!("region bounds must be finite with upper > lower, got [{lo}, {hi}]"),
                ));
            }
        }
        Ok(UniformIntensity {
            total_mass,
            lower,
            upper,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    /// `total_mass / volume`.
    pub fn density(&self) -> f64 {
        self.total_mass / self.volume()
    }

    /// Closed box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// PPP intensity function.
#[derive(Clone, Debug, PartialEq)]
pub enum Intensity {
    GaussianMixture(GaussianMixture),
    Uniform(UniformIntensity),
}

impl Intensity {
    /// The identically-zero intensity.
    pub fn zero() -> Self {
        Intensity::GaussianMixture(GaussianMixture::empty())
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Intensity::GaussianMixture(m) => m.dim(),
            Intensity::Uniform(u) => Some(u.dim()),
        }
    }

    /// `integral of lambda(x) dx`.
    pub fn total_mass(&self) -> f64 {
        match self {
            Intensity::GaussianMixture(m) => m.total_weight(),
            Intensity::Uniform(u) => u.total_mass(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass() == 0.0
    }

    pub fn log_value(&self, x: &[f64]) -> LogValue {
        match self {
            Intensity::GaussianMixture(m) => m.log_density(x),
            Intensity::Uniform(u) => {
                if u.contains(x) && u.total_mass() > 0.0 {
                    LogValue::from_ln(u.total_mass().ln() - u.volume().ln())
                } else {
                    LogValue::ZERO
                }
            }
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                path: "intensity".into(),
                expected: dim,
                found: d,
            }),
            _ => Ok(()),
        }
    }
}

/// Checked `ln lambda(x)`.
pub fn log_intensity(x: &StateVector, intensity: &Intensity) -> Result<LogValue> {
    if let Some(d) = intensity.dim() {
        if d != x.dim() {
            return Err(Error::DimensionMismatch {
                path: "x".into(),
                expected: d,
                found: x.dim(),
            });
        }
    }
    Ok(intensity.log_value(x.as_slice()))
}

pub fn intensity_total_mass(intensity: &Intensity) -> f64 {
    intensity.total_mass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::gaussian::{log_gaussian_pdf, GaussianComponent};

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    fn unit_box(mass: f64) -> Intensity {
        Intensity::Uniform(UniformIntensity::new(mass, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap())
    }

    #[test]
    fn uniform_inside_and_outside() {
        let i = unit_box(1.0);
        assert_eq!(log_intensity(&sv(&[0.5, 0.5]), &i).unwrap().ln(), 0.0);
        assert!(log_intensity(&sv(&[1.5, 0.5]), &i).unwrap().is_zero());
    }

    #[test]
    fn scaled_gaussian_intensity() {
        let c = GaussianComponent::isotropic(2.0, sv(&[1.0, 1.0]), 0.5).unwrap();
        let i = Intensity::GaussianMixture(GaussianMixture::single(c.clone()));
        let x = sv(&[0.2, 1.7]);
        let expected = 2f64.ln() + log_gaussian_pdf(&x, &c).unwrap();
        assert!((log_intensity(&x, &i).unwrap().ln() - expected).abs() < 1e-14);
    }

    #[test]
    fn total_masses() {
        assert_eq!(intensity_total_mass(&Intensity::zero()), 0.0);
        assert_eq!(intensity_total_mass(&unit_box(0.2)), 0.2);
        let comps = [0.4, 1.1]
            .iter()
            .map(|&w| GaussianComponent::isotropic(w, sv(&[0.0]), 1.0).unwrap())
            .collect();
        let m = Intensity::GaussianMixture(GaussianMixture::new(comps).unwrap());
        assert!((intensity_total_mass(&m) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_uniform_is_zero_everywhere() {
        assert!(unit_box(0.0).log_value(&[0.5, 0.5]).is_zero());
    }

    #[test]
    fn rejects_degenerate_region() {
        assert!(UniformIntensity::new(1.0, vec![0.0], vec![0.0]).is_err());
        assert!(UniformIntensity::new(-1.0, vec![0.0], vec![1.0]).is_err());
        assert!(UniformIntensity::new(1.0, vec![0.0, 0.0], vec![1.0]).is_err());
    }
}
