use rayon::prelude::*;

use crate::error::{PslabError, Result};
use crate::field::grid::GridSpec;
use crate::field::scalar::{ScalarField, SolutionPair};

/// Second-order `(2·dim+1)`-point Laplacian. Boundary nodes are set to 0.
///
/// Neighbor differences are formed before summing, which keeps the
/// rounding error at the size of the differences rather than the values.
pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    let values = f.values();
    let strides = grid.strides();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.is_boundary(k) {
                return 0.0;
            }
            let c = values[k];
            let mut acc = 0.0;
            for &s in &strides {
                acc += (values[k - s] - c) + (values[k + s] - c);
            }
            acc * inv_h2
        })
        .collect();
    ScalarField::new(grid.clone(), out)
}

/// Discrete Laplacian at one interior node.
pub(crate) fn laplacian_at(values: &[f64], k: usize, strides: &[usize], inv_h2: f64) -> f64 {
    let c = values[k];
    let mut acc = 0.0;
    for &s in strides {
        acc += (values[k - s] - c) + (values[k + s] - c);
    }
    acc * inv_h2
}

/// Centered-difference gradient at an interior node.
pub fn centered_gradient(f: &ScalarField, k: usize) -> [f64; 3] {
    let grid = f.grid();
    let values = f.values();
    let inv_2h = 0.5 / grid.h();
    let mut g = [0.0; 3];
    for (d, s) in grid.strides().into_iter().enumerate() {
        g[d] = (values[k + s] - values[k - s]) * inv_2h;
    }
    g
}

/// Cell containing a point plus the local coordinates inside it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CellWeights {
    base: usize,
    offsets: [usize; 3],
    t: [f64; 3],
    dim: usize,
    inv_h: f64,
}

impl CellWeights {
    pub(crate) fn locate(grid: &GridSpec, p: &[f64]) -> Result<Self> {
        let dim = grid.dim();
        if p.len() < dim {
            return Err(PslabError::InvalidArgument(format!(
                "point has {} coordinates, grid is {dim}D",
                p.len()
            )));
        }
        if !grid.contains(p) {
            return Err(PslabError::OutOfDomain { point: p[..dim].to_vec() });
        }
        let h = grid.h();
        let strides = grid.strides();
        let mut base = 0;
        let mut offsets = [0; 3];
        let mut t = [0.0; 3];
        for d in 0..dim {
            let s = (p[d] - grid.lo()[d]) / h;
            let i = (s.floor().max(0.0) as usize).min(grid.n()[d] - 2);
            t[d] = (s - i as f64).clamp(0.0, 1.0);
            base += i * strides[d];
            offsets[d] = strides[d];
        }
        Ok(Self { base, offsets, t, dim, inv_h: 1.0 / h })
    }

    #[inline]
    pub(crate) fn value(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut k = self.base;
            for d in 0..self.dim {
                if corner >> d & 1 == 1 {
                    w *= self.t[d];
                    k += self.offsets[d];
                } else {
                    w *= 1.0 - self.t[d];
                }
            }
            acc += w * values[k];
        }
        acc
    }

    /// Value and gradient of the multilinear interpolant inside the cell.
    #[inline]
    pub(crate) fn value_and_gradient(&self, values: &[f64]) -> (f64, [f64; 3]) {
        let mut val = 0.0;
        let mut grad = [0.0; 3];
        for corner in 0..(1usize << self.dim) {
            let mut k = self.base;
            let mut factors = [1.0; 3];
            let mut dfactors = [0.0; 3];
            for d in 0..self.dim {
                if corner >> d & 1 == 1 {
                    factors[d] = self.t[d];
                    dfactors[d] = self.inv_h;
                    k += self.offsets[d];
                } else {
                    factors[d] = 1.0 - self.t[d];
                    dfactors[d] = -self.inv_h;
                }
            }
            let fk = values[k];
            let w: f64 = factors[..self.dim].iter().product();
            val += w * fk;
            for d in 0..self.dim {
                let mut wd = dfactors[d];
                for e in 0..self.dim {
                    if e != d {
                        wd *= factors[e];
                    }
                }
                grad[d] += wd * fk;
            }
        }
        (val, grad)
    }
}

/// Multilinear interpolation of `f` at `p`.
pub fn interpolate(f: &ScalarField, p: &[f64]) -> Result<f64> {
    Ok(CellWeights::locate(f.grid(), p)?.value(f.values()))
}

/// Values and gradients of both components at a point, the input to every
/// sphere and ball integrand.
#[derive(Clone, Copy, Debug, Default)]
pub struct PointSample {
    /// Offset from the integration center.
    pub offset: [f64; 3],
    /// Outward unit normal of the sphere through the point.
    pub normal: [f64; 3],
    pub u: f64,
    pub v: f64,
    pub grad_u: [f64; 3],
    pub grad_v: [f64; 3],
    pub beta: f64,
}

impl PointSample {
    pub fn grad_u_sq(&self) -> f64 {
        self.grad_u.iter().map(|g| g * g).sum()
    }

    pub fn grad_v_sq(&self) -> f64 {
        self.grad_v.iter().map(|g| g * g).sum()
    }

    /// `β u² v²`
    pub fn coupling(&self) -> f64 {
        self.beta * self.u * self.u * self.v * self.v
    }

    pub fn normal_u(&self) -> f64 {
        (0..3).map(|d| self.grad_u[d] * self.normal[d]).sum()
    }

    pub fn normal_v(&self) -> f64 {
        (0..3).map(|d| self.grad_v[d] * self.normal[d]).sum()
    }

    /// `|∇u|² − (∂_ν u)²`
    pub fn tangential_u_sq(&self) -> f64 {
        (self.grad_u_sq() - self.normal_u().powi(2)).max(0.0)
    }

    pub fn tangential_v_sq(&self) -> f64 {
        (self.grad_v_sq() - self.normal_v().powi(2)).max(0.0)
    }
}

/// Samples the pair at `center + offset`. Gradients are those of the
/// multilinear interpolant in the enclosing cell.
pub fn sample_pair(pair: &SolutionPair, center: &[f64], offset: [f64; 3], normal: [f64; 3]) -> Result<PointSample> {
    let dim = pair.grid().dim();
    let mut p = [0.0; 3];
    for d in 0..dim {
        p[d] = center[d] + offset[d];
    }
    let cell = CellWeights::locate(pair.grid(), &p[..dim])?;
    let (u, grad_u) = cell.value_and_gradient(pair.u().values());
    let (v, grad_v) = cell.value_and_gradient(pair.v().values());
    Ok(PointSample {
        offset,
        normal,
        u,
        v,
        grad_u,
        grad_v,
        beta: pair.beta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> GridSpec {
        GridSpec::cube(2, -1.0, 1.0, n).unwrap()
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let f = ScalarField::from_fn(grid2(17), |_| 3.25).unwrap();
        let lap = laplacian(&f).unwrap();
        assert!(lap.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = grid2(33);
        let f = ScalarField::from_fn(g.clone(), |p| p[0] * p[0] + p[1] * p[1]).unwrap();
        let lap = laplacian(&f).unwrap();
        for k in g.interior_nodes() {
            assert!((lap.values()[k] - 4.0).abs() < 1e-9, "{}", lap.values()[k]);
        }
        let f = ScalarField::from_fn(g.clone(), |p| p[0] * p[0] - p[1] * p[1]).unwrap();
        let lap = laplacian(&f).unwrap();
        for k in g.interior_nodes() {
            assert!(lap.values()[k].abs() < 1e-9);
        }
    }

    #[test]
    fn interpolation_at_nodes_and_on_linear_fields() {
        let g = grid2(21);
        let f = ScalarField::from_fn(g.clone(), |p| 2.0 * p[0] + 3.0 * p[1]).unwrap();
        for k in [0, 7, 100, g.len() - 1] {
            let p = g.point(k);
            assert_eq!(interpolate(&f, &p[..2]).unwrap(), f.values()[k]);
        }
        for p in [[0.013, -0.77], [0.5, 0.5], [-0.999, 0.31]] {
            let got = interpolate(&f, &p).unwrap();
            assert!((got - (2.0 * p[0] + 3.0 * p[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_of_square_at_cell_center() {
        let g = GridSpec::cube(1, 0.0, 1.0, 11).unwrap();
        let h = g.h();
        let f = ScalarField::from_fn(g, |p| p[0] * p[0]).unwrap();
        let x = 0.35;
        let got = interpolate(&f, &[x]).unwrap();
        assert!((got - (x * x + h * h / 4.0)).abs() < 1e-14);
    }

    #[test]
    fn interpolation_outside_box_fails() {
        let f = ScalarField::zeros(grid2(5));
        assert!(matches!(
            interpolate(&f, &[1.5, 0.0]),
            Err(PslabError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn interpolant_gradient_is_exact_on_bilinear() {
        let g = grid2(9);
        let f = ScalarField::from_fn(g.clone(), |p| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]).unwrap();
        let p = [0.123, -0.456];
        let cell = CellWeights::locate(&g, &p).unwrap();
        let (val, grad) = cell.value_and_gradient(f.values());
        assert!((val - (1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1])).abs() < 1e-13);
        assert!((grad[0] - (2.0 + 0.5 * p[1])).abs() < 1e-12);
        assert!((grad[1] - (-1.0 + 0.5 * p[0])).abs() < 1e-12);
    }

    #[test]
    fn centered_gradient_on_linear_field() {
        let g = GridSpec::cube(3, 0.0, 1.0, 5).unwrap();
        let f = ScalarField::from_fn(g.clone(), |p| p[0] - 2.0 * p[1] + 4.0 * p[2]).unwrap();
        let k = g.index(&[2, 2, 2]);
        let gr = centered_gradient(&f, k);
        assert!((gr[0] - 1.0).abs() < 1e-12 && (gr[1] + 2.0).abs() < 1e-12 && (gr[2] - 4.0).abs() < 1e-12);
    }
}
