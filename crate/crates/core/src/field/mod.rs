//! Grids, sampled fields, stencils, interpolation and sphere/ball quadrature.

mod exact;
mod grid;
pub mod io;
mod ops;
mod quadrature;
mod scalar;

pub use exact::{harmonic_parts, harmonic_polynomial, linear_pair};
pub use grid::GridSpec;
pub use ops::{centered_gradient, interpolate, laplacian, sample_pair, PointSample};
pub(crate) use ops::laplacian_at;
pub use quadrature::{
    ball_integral, default_shells, gauss_legendre, shell_ball_integral, sphere_area, sphere_integral,
    sphere_integrals, ShellProfile, SphereQuadrature, DEFAULT_ANGLES_2D, DEFAULT_AZIMUTH_3D, DEFAULT_POLAR_3D,
};
pub use scalar::{ScalarField, SolutionPair};
