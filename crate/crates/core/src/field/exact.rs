use crate::error::{PslabError, Result};
use crate::field::grid::GridSpec;
use crate::field::scalar::{ScalarField, SolutionPair};

/// `x_N` for degree 1 in any dimension, `Re((x_1 + i x_N)^degree)` for
/// higher degrees in 2D.
pub fn harmonic_polynomial(dim: usize, degree: u32, p: &[f64; 3]) -> Result<f64> {
    match (dim, degree) {
        (_, 0) => Err(PslabError::InvalidArgument("degree must be >= 1".into())),
        (1..=3, 1) => Ok(p[dim - 1]),
        (2, d) => {
            let (x, y) = (p[0], p[1]);
            let (mut re, mut im) = (1.0, 0.0);
            for _ in 0..d {
                let next = re * x - im * y;
                im = re * y + im * x;
                re = next;
            }
            Ok(re)
        }
        _ => Err(PslabError::Unsupported(format!(
            "harmonic polynomial of degree {degree} in dimension {dim}"
        ))),
    }
}

/// Positive and negative parts of `amplitude · Ψ` for the degree-`degree`
/// harmonic polynomial `Ψ`, as a pair with coupling `beta`.
pub fn harmonic_parts(grid: &GridSpec, degree: u32, amplitude: f64, beta: f64) -> Result<SolutionPair> {
    let psi = (0..grid.len())
        .map(|k| harmonic_polynomial(grid.dim(), degree, &grid.point(k)).map(|x| amplitude * x))
        .collect::<Result<Vec<_>>>()?;
    let u = ScalarField::new(grid.clone(), psi.iter().map(|&x| x.max(0.0)).collect())?;
    let v = ScalarField::new(grid.clone(), psi.iter().map(|&x| (-x).max(0.0)).collect())?;
    SolutionPair::new(u, v, beta)
}

/// `(γ x_N⁺, γ x_N⁻)` with `β = 1`.
pub fn linear_pair(grid: &GridSpec, gamma: f64) -> Result<SolutionPair> {
    harmonic_parts(grid, 1, gamma, 1.0)
}
