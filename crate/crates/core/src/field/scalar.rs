use crate::error::{PslabError, Result};
use crate::field::grid::GridSpec;

/// Node values of one scalar function on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(PslabError::InvalidField(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(PslabError::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    /// Samples `f` at every node. `f` receives the node coordinates
    /// (unused trailing entries are zero).
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(PslabError::InvalidField("fields live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid.clone(), values)
    }
}

/// A nonnegative pair `(u, v)` solving (or approximating) the coupled system
/// with coupling strength `beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPair {
    u: ScalarField,
    v: ScalarField,
    beta: f64,
}

impl SolutionPair {
    /// `beta = 0` is accepted: it is the decoupled harmonic limit used by
    /// the segregation sweep and the initial guesses.
    pub fn new(u: ScalarField, v: ScalarField, beta: f64) -> Result<Self> {
        if u.grid != v.grid {
            return Err(PslabError::InvalidField("u and v live on different grids".into()));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(PslabError::InvalidArgument(format!("beta must be >= 0, got {beta}")));
        }
        for (name, f) in [("u", &u), ("v", &v)] {
            if let Some(k) = f.values.iter().position(|&x| x < 0.0) {
                return Err(PslabError::InvalidField(format!(
                    "{name} is negative ({}) at node {k}",
                    f.values[k]
                )));
            }
        }
        Ok(Self { u, v, beta })
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn v(&self) -> &ScalarField {
        &self.v
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &GridSpec {
        &self.u.grid
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(PslabError::InvalidArgument(format!("beta must be >= 0, got {beta}")));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField, f64) {
        (self.u, self.v, self.beta)
    }

    /// Largest value of either component.
    pub fn sup(&self) -> f64 {
        self.u.max().max(self.v.max())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = GridSpec::cube(1, 0.0, 1.0, 5).unwrap();
        assert!(ScalarField::new(g.clone(), vec![0.0; 4]).is_err());
        let err = ScalarField::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, PslabError::NonFinite { index: 2 }));
    }

    #[test]
    fn pair_rejects_negative_values() {
        let g = GridSpec::cube(1, 0.0, 1.0, 3).unwrap();
        let u = ScalarField::new(g.clone(), vec![0.0, -1.0, 0.0]).unwrap();
        let v = ScalarField::zeros(g);
        assert!(SolutionPair::new(u, v, 1.0).is_err());
    }
}
