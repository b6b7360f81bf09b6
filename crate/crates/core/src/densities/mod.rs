//! Single- and multi-object density building blocks, evaluated in the log domain.

mod gaussian;
mod intensity;
mod posterior;

pub use gaussian::{
    log_gaussian_pdf, log_mixture_density, GaussianComponent, GaussianMixture, StateVector,
    NORMALIZATION_TOLERANCE,
};
pub(crate) use gaussian::euclidean;
pub use intensity::{intensity_total_mass, log_intensity, Intensity, UniformIntensity};
pub use posterior::{
    log_bernoulli_set_density, Bernoulli, CardinalityDistribution, Cphd, MultiBernoulli, Pmbm,
    PmbmKind, PosteriorDensity,
};
