use crate::error::{Error, Result};
use crate::logspace::{LogSumExp, LogValue};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Relative pivot floor for the Cholesky-based SPD check.
const PIVOT_TOLERANCE: f64 = 1e-12;
/// Relative tolerance on `|a_ij - a_ji|`.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// A single-object state, or any point of the state space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(coordinates: Vec<f64>) -> Result<Self> {
        if coordinates.is_empty() {
            return Err(Error::validation("", "state vector must have dimension >= 1"));
        }
        if let Some(i) = coordinates.iter().position(|c| !c.is_finite()) {
            return Err(Error::validation(
                format!("[{i}]"),
                format!("coordinate must be finite, got {}", coordinates[i]),
            ));
        }
        Ok(StateVector(coordinates))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn euclidean_distance(&self, other: &StateVector) -> f64 {
        euclidean(&self.0, &other.0)
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A weighted Gaussian with a validated, factorized covariance.
#[derive(Clone, Debug)]
pub struct GaussianComponent {
    weight: f64,
    mean: StateVector,
    /// Row-major covariance.
    covariance: Vec<f64>,
    /// Row-major lower Cholesky factor.
    chol: Vec<f64>,
    /// `-0.5 * (d ln 2pi + ln det)`.
    log_norm: f64,
}

impl PartialEq for GaussianComponent {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight && self.mean == other.mean && self.covariance == other.covariance
    }
}

impl GaussianComponent {
    /// Builds a component from a covariance given as rows.
    pub fn new(weight: f64, mean: StateVector, covariance: &[Vec<f64>]) -> Result<Self> {
        let d = mean.dim();
        if covariance.len() != d {
            return Err(Error::DimensionMismatch {
                path: "covariance".into(),
                expected: d,
                found: covariance.len(),
            });
        }
        let mut flat = Vec::with_capacity(d * d);
        for (i, row) in covariance.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    path: format!("covariance[{i}]"),
                    expected: d,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_row_major(weight, mean, flat)
    }

    pub fn from_row_major(weight: f64, mean: StateVector, covariance: Vec<f64>) -> Result<Self> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::validation(
                "weight",
                format!("weight must be finite and nonnegative, got {weight}"),
            ));
        }
        let d = mean.dim();
        if covariance.len() != d * d {
            return Err(Error::DimensionMismatch {
                path: "covariance".into(),
                expected: d * d,
                found: covariance.len(),
            });
        }
        let chol = cholesky(&covariance, d).map_err(|m| Error::validation("covariance", m))?;
        let log_det_half: f64 = (0..d).map(|i| chol[i * d + i].ln()).sum();
        Ok(GaussianComponent {
            weight,
            mean,
            covariance,
            chol,
            log_norm: -0.5 * d as f64 * LN_2PI - log_det_half,
        })
    }

    /// Isotropic component `N(mean, variance * I)`.
    pub fn isotropic(weight: f64, mean: StateVector, variance: f64) -> Result<Self> {
        let d = mean.dim();
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            cov[i * d + i] = variance;
        }
        Self::from_row_major(weight, mean, cov)
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &StateVector {
        &self.mean
    }

    pub fn dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn covariance_rows(&self) -> Vec<Vec<f64>> {
        self.covariance.chunks(self.dim()).map(<[f64]>::to_vec).collect()
    }

    pub fn covariance_row_major(&self) -> &[f64] {
        &self.covariance
    }

    pub fn with_weight(&self, weight: f64) -> Result<Self> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::validation(
                "weight",
                format!("weight must be finite and nonnegative, got {weight}"),
            ));
        }
        Ok(GaussianComponent {
            weight,
            ..self.clone()
        })
    }

    /// `ln N(x; mean, covariance)`, weight excluded. `x` must have matching dimension.
    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        // Forward substitution L z = x - mean.
        let mut z = vec![0.0; d];
        for i in 0..d {
            let mut acc = x[i] - self.mean[i];
            for j in 0..i {
                acc -= self.chol[i * d + j] * z[j];
            }
            z[i] = acc / self.chol[i * d + i];
        }
        let maha: f64 = z.iter().map(|v| v * v).sum();
        self.log_norm - 0.5 * maha
    }
}

/// Lower Cholesky factor of a row-major `d x d` matrix, rejecting non-SPD input.
fn cholesky(a: &[f64], d: usize) -> std::result::Result<Vec<f64>, String> {
    if let Some(v) = a.iter().find(|v| !v.is_finite()) {
        return Err(format!("covariance entries must be finite, got {v}"));
    }
    let max_diag = (0..d).map(|i| a[i * d + i]).fold(f64::NEG_INFINITY, f64::max);
    if !(max_diag > 0.0) {
        return Err("covariance is not positive definite (nonpositive diagonal)".into());
    }
    for i in 0..d {
        for j in 0..i {
            if (a[i * d + j] - a[j * d + i]).abs() > SYMMETRY_TOLERANCE * max_diag {
                return Err(format!("covariance is not symmetric at ({i}, {j})"));
            }
        }
    }
    let floor = PIVOT_TOLERANCE * max_diag;
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let pivot = a[j * d + j] - (0..j).map(|k| l[j * d + k] * l[j * d + k]).sum::<f64>();
        if !(pivot >= floor) || pivot <= 0.0 {
            return Err(format!(
                "covariance is not positive definite (pivot {pivot:e} at index {j})"
            ));
        }
        let ljj = pivot.sqrt();
        l[j * d + j] = ljj;
        for i in j + 1..d {
            let s = a[i * d + j] - (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum::<f64>();
            l[i * d + j] = s / ljj;
        }
    }
    Ok(l)
}

/// Checked `ln N(x; mean, covariance)`.
pub fn log_gaussian_pdf(x: &StateVector, component: &GaussianComponent) -> Result<f64> {
    if x.dim() != component.dim() {
        return Err(Error::DimensionMismatch {
            path: "x".into(),
            expected: component.dim(),
            found: x.dim(),
        });
    }
    Ok(component.log_pdf(x.as_slice()))
}

/// Ordered list of weighted Gaussians. Normalization is checked where a
/// probability density is required, not here.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GaussianMixture {
    components: Vec<GaussianComponent>,
}

/// Tolerance on `|sum of weights - 1|` for probability densities.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

impl GaussianMixture {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        if let Some(first) = components.first() {
            let d = first.dim();
            for (i, c) in components.iter().enumerate() {
                if c.dim() != d {
                    return Err(Error::DimensionMismatch {
                        path: format!("[{i}].mean"),
                        expected: d,
                        found: c.dim(),
                    });
                }
            }
        }
        Ok(GaussianMixture { components })
    }

    pub fn empty() -> Self {
        GaussianMixture::default()
    }

    pub fn single(component: GaussianComponent) -> Self {
        GaussianMixture {
            components: vec![component],
        }
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.components.first().map(GaussianComponent::dim)
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(GaussianComponent::weight).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_weight() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::validation(
                "",
                format!(
                    "probability density weights must sum to 1, got {}",
                    self.total_weight()
                ),
            ))
        }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                path: "[0].mean".into(),
                expected: dim,
                found: d,
            }),
            _ => Ok(()),
        }
    }

    /// `ln sum_i w_i N(x; mu_i, Sigma_i)`; zero iff every weight is zero.
    pub fn log_density(&self, x: &[f64]) -> LogValue {
        let mut acc = LogSumExp::new();
        for c in &self.components {
            if c.weight() > 0.0 {
                acc.add(LogValue::from_ln(c.weight().ln() + c.log_pdf(x)));
            }
        }
        acc.value()
    }

    /// Weight-averaged component mean. `None` for an empty or zero-weight mixture.
    pub fn mean(&self) -> Option<Vec<f64>> {
        let d = self.dim()?;
        let total = self.total_weight();
        if total <= 0.0 {
            return None;
        }
        let mut m = vec![0.0; d];
        for c in &self.components {
            for (acc, v) in m.iter_mut().zip(c.mean().as_slice()) {
                *acc += c.weight() * v;
            }
        }
        m.iter_mut().for_each(|v| *v /= total);
        Some(m)
    }
}

/// Checked mixture evaluation.
pub fn log_mixture_density(x: &StateVector, mixture: &GaussianMixture) -> Result<LogValue> {
    if let Some(d) = mixture.dim() {
        if d != x.dim() {
            return Err(Error::DimensionMismatch {
                path: "x".into(),
                expected: d,
                found: x.dim(),
            });
        }
    }
    Ok(mixture.log_density(x.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    fn std_normal_2d() -> GaussianComponent {
        GaussianComponent::isotropic(1.0, sv(&[0.0, 0.0]), 1.0).unwrap()
    }

    #[test]
    fn standard_normal_at_mode() {
        let v = log_gaussian_pdf(&sv(&[0.0, 0.0]), &std_normal_2d()).unwrap();
        assert!((v + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
        assert!((v + 1.837877).abs() < 1e-6);
    }

    #[test]
    fn unit_mahalanobis_distance() {
        let v = log_gaussian_pdf(&sv(&[1.0, 0.0]), &std_normal_2d()).unwrap();
        assert!((v - (-(2.0 * std::f64::consts::PI).ln() - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_spd() {
        let err = GaussianComponent::new(1.0, sv(&[0.0, 0.0]), &[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(err, Err(Error::Validation { ref path, .. }) if path == "covariance"));
        let err = GaussianComponent::new(1.0, sv(&[0.0]), &[vec![0.0]]);
        assert!(err.is_err());
        let err = GaussianComponent::new(1.0, sv(&[0.0, 0.0]), &[vec![1.0, 0.5], vec![0.4, 1.0]]);
        assert!(err.is_err(), "asymmetric matrix accepted");
    }

    #[test]
    fn rejects_near_singular_by_relative_pivot() {
        let e = 1e-14;
        let err = GaussianComponent::new(
            1.0,
            sv(&[0.0, 0.0]),
            &[vec![1.0, 1.0], vec![1.0, 1.0 + e]],
        );
        assert!(err.is_err());
        // Same shape at a tiny scale is fine when well-conditioned.
        assert!(GaussianComponent::isotropic(1.0, sv(&[0.0, 0.0]), 1e-20).is_ok());
    }

    #[test]
    fn rejects_bad_weight_and_coordinates() {
        assert!(GaussianComponent::isotropic(-1.0, sv(&[0.0]), 1.0).is_err());
        assert!(GaussianComponent::isotropic(f64::NAN, sv(&[0.0]), 1.0).is_err());
        assert!(StateVector::new(vec![f64::INFINITY]).is_err());
        assert!(StateVector::new(vec![]).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let r = log_gaussian_pdf(&sv(&[0.0]), &std_normal_2d());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_mixture_equals_component() {
        let c = GaussianComponent::new(1.0, sv(&[1.0, 2.0]), &[vec![2.0, 0.3], vec![0.3, 1.0]])
            .unwrap();
        let x = sv(&[0.5, 2.5]);
        let m = GaussianMixture::single(c.clone());
        assert_eq!(
            log_mixture_density(&x, &m).unwrap().ln(),
            log_gaussian_pdf(&x, &c).unwrap()
        );
    }

    #[test]
    fn equal_halves_reproduce_component() {
        let c = std_normal_2d();
        let half = c.with_weight(0.5).unwrap();
        let m = GaussianMixture::new(vec![half.clone(), half]).unwrap();
        let x = sv(&[0.3, -0.2]);
        let expected = log_gaussian_pdf(&x, &c).unwrap() + 1f64.ln();
        assert!((m.log_density(x.as_slice()).ln() - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_weights_give_log_zero() {
        let m = GaussianMixture::single(std_normal_2d().with_weight(0.0).unwrap());
        assert!(m.log_density(&[0.0, 0.0]).is_zero());
        assert!(GaussianMixture::empty().log_density(&[0.0, 0.0]).is_zero());
    }

    #[test]
    fn mixture_mean_is_weight_average() {
        let a = GaussianComponent::isotropic(0.25, sv(&[0.0, 4.0]), 1.0).unwrap();
        let b = GaussianComponent::isotropic(0.75, sv(&[4.0, 0.0]), 1.0).unwrap();
        let m = GaussianMixture::new(vec![a, b]).unwrap();
        assert_eq!(m.mean().unwrap(), vec![3.0, 1.0]);
    }
}
