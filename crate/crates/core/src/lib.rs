#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod estimates;
pub mod exponents;
pub mod extension;
pub mod kernels;
pub mod monotonicity;
pub mod quadrature;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases; the f64 instantiation is the reference one.
pub mod double {
    pub type ProblemParams = crate::specfun::ProblemParams<f64>;
    pub type SobolevExponent = crate::specfun::SobolevExponent<f64>;
    pub type ClassificationOutcome = crate::exponents::ClassificationOutcome<f64>;
    pub type RootBracket = crate::exponents::RootBracket<f64>;
    pub type KernelSpec = crate::kernels::KernelSpec<f64>;
    pub type SphericalProfile = crate::kernels::SphericalProfile<f64>;
    pub type RadialProfile = crate::extension::RadialProfile<f64>;
    pub type HalfSpaceGrid = crate::extension::HalfSpaceGrid<f64>;
    pub type HalfSpaceField = crate::extension::HalfSpaceField<f64>;
    pub type EnergyCurve = crate::monotonicity::EnergyCurve<f64>;
    pub type CutoffSpec = crate::estimates::CutoffSpec<f64>;
    pub type ScalingReport = crate::estimates::ScalingReport<f64>;
}

/// Single-precision aliases, for quick scans where 1e-6 accuracy suffices.
pub mod single {
    pub type ProblemParams = crate::specfun::ProblemParams<f32>;
    pub type SobolevExponent = crate::specfun::SobolevExponent<f32>;
    pub type ClassificationOutcome = crate::exponents::ClassificationOutcome<f32>;
    pub type RootBracket = crate::exponents::RootBracket<f32>;
    pub type KernelSpec = crate::kernels::KernelSpec<f32>;
    pub type RadialProfile = crate::extension::RadialProfile<f32>;
    pub type HalfSpaceGrid = crate::extension::HalfSpaceGrid<f32>;
    pub type CutoffSpec = crate::estimates::CutoffSpec<f32>;
}
