use serde::{Deserialize, Serialize};

use crate::error::{PslabError, Result};

/// Uniform Cartesian node grid on a box in 1, 2 or 3 dimensions.
///
/// Nodes are stored row-major with axis 0 slowest; the last axis is the
/// distinguished `x_N` direction. Spacing must be the same on every axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
    h: f64,
}

impl GridSpec {
    pub fn new(lo: &[f64], hi: &[f64], n: &[usize]) -> Result<Self> {
        let dim = n.len();
        if !(1..=3).contains(&dim) {
            return Err(PslabError::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if lo.len() != dim || hi.len() != dim {
            return Err(PslabError::InvalidGrid("lo/hi/n lengths differ".into()));
        }
        let mut spacing = Vec::with_capacity(dim);
        for d in 0..dim {
            if !(lo[d].is_finite() && hi[d].is_finite()) || hi[d] <= lo[d] {
                return Err(PslabError::InvalidGrid(format!(
                    "axis {d}: need finite lo < hi, got [{}, {}]",
                    lo[d], hi[d]
                )));
            }
            if n[d] < 3 {
                return Err(PslabError::InvalidGrid(format!("axis {d}: need at least 3 nodes")));
            }
            spacing.push((hi[d] - lo[d]) / (n[d] - 1) as f64);
        }
        let h = spacing[0];
        if spacing.iter().any(|s| (s - h).abs() > 1e-12 * h.max(1.0)) {
            return Err(PslabError::InvalidGrid(format!(
                "anisotropic spacing {spacing:?}; all axes must share one spacing"
            )));
        }
        Ok(Self {
            dim,
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            n: n.to_vec(),
            h,
        })
    }

    /// Cube `[lo, hi]^dim` with `nodes` nodes per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        Self::new(&vec![lo; dim], &vec![hi; dim], &vec![nodes; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat-index stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim];
        for d in (0..self.dim.saturating_sub(1)).rev() {
            s[d] = s[d + 1] * self.n[d + 1];
        }
        s
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.n).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for d in (0..self.dim).rev() {
            out[d] = flat % self.n[d];
            flat /= self.n[d];
        }
        out
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.h
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut p = [0.0; 3];
        for d in 0..self.dim {
            p[d] = self.coord(d, idx[d]);
        }
        p
    }

    /// Coordinate along the last axis (`x_N`) of a flat node.
    pub fn x_n(&self, flat: usize) -> f64 {
        let last = self.dim - 1;
        self.coord(last, flat % self.n[last])
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.dim).any(|d| idx[d] == 0 || idx[d] == self.n[d] - 1)
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_boundary(k))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| !self.is_boundary(k))
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        (0..self.dim).all(|d| p[d] >= self.lo[d] - 1e-12 && p[d] <= self.hi[d] + 1e-12)
    }

    /// Largest radius `r` for which the closed ball around `center` stays
    /// at least one cell away from every face of the box.
    pub fn max_admissible_radius(&self, center: &[f64]) -> f64 {
        (0..self.dim)
            .map(|d| (center[d] - self.lo[d]).min(self.hi[d] - center[d]))
            .fold(f64::INFINITY, f64::min)
            - self.h
    }

    /// Errors with [`PslabError::RadiusTooLarge`] if the ball of radius `r`
    /// about `center` does not keep a one-cell margin from the box.
    pub fn check_ball(&self, center: &[f64], r: f64) -> Result<()> {
        if center.len() != self.dim {
            return Err(PslabError::InvalidArgument(format!(
                "center has {} coordinates, grid is {}D",
                center.len(),
                self.dim
            )));
        }
        let max_radius = self.max_admissible_radius(center);
        if r > max_radius + 1e-12 {
            return Err(PslabError::RadiusTooLarge { radius: r, max_radius });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_anisotropic_spacing() {
        let err = GridSpec::new(&[0.0, 0.0], &[1.0, 2.0], &[11, 11]).unwrap_err();
        assert!(matches!(err, PslabError::InvalidGrid(_)));
    }

    #[test]
    fn rejects_too_few_nodes() {
        assert!(GridSpec::new(&[0.0], &[1.0], &[2]).is_err());
        assert!(GridSpec::new(&[1.0], &[1.0], &[5]).is_err());
    }

    #[test]
    fn flat_and_multi_index_agree() {
        let g = GridSpec::new(&[0.0, 0.0, 0.0], &[2.0, 3.0, 4.0], &[3, 4, 5]).unwrap();
        for k in 0..g.len() {
            let idx = g.multi_index(k);
            assert_eq!(g.index(&idx[..3]), k);
        }
        assert_eq!(g.strides(), vec![20, 5, 1]);
    }

    #[test]
    fn boundary_count_2d() {
        let g = GridSpec::cube(2, -1.0, 1.0, 5).unwrap();
        assert_eq!(g.boundary_nodes().count(), 16);
        assert_eq!(g.interior_nodes().count(), 9);
    }

    #[test]
    fn ball_margin() {
        let g = GridSpec::cube(2, -1.0, 1.0, 11).unwrap();
        assert!((g.max_admissible_radius(&[0.0, 0.0]) - 0.8).abs() < 1e-12);
        assert!(g.check_ball(&[0.0, 0.0], 0.8).is_ok());
        match g.check_ball(&[0.0, 0.0], 0.9) {
            Err(PslabError::RadiusTooLarge { max_radius, .. }) => {
                assert!((max_radius - 0.8).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
