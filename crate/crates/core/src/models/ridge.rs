use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear scorer fitted by penalized least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    /// Unpenalized constant term.
    pub intercept: f64,
    pub gamma: f64,
}

impl RidgeModel {
    /// Minimizes `||X w + b - y||^2 + gamma ||w||^2` in closed form.
    ///
    /// The intercept `b` comes from an appended column of ones and is not
    /// penalized. With `gamma = 0` a rank-deficient design is an error.
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[f64], gamma: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyTrainingSet("ridge needs at least one row"));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if !(gamma >= 0.0) {
            return Err(Error::InvalidConfig(alloc::format!("ridge gamma {gamma} < 0")));
        }
        let dim = x[0].as_ref().len();
        let cols = dim + 1;
        let mut design = DMatrix::<f64>::zeros(x.len(), cols);
        for (i, row) in x.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                design[(i, j)] = *v;
            }
            design[(i, dim)] = 1.0;
        }
        let target = DVector::from_column_slice(y);

        let mut normal = design.transpose() * &design;
        for j in 0..dim {
            normal[(j, j)] += gamma;
        }
        let rhs = design.transpose() * target;

        let solution = normal
            .clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .or_else(|| normal.full_piv_lu().solve(&rhs))
            .ok_or(Error::Singular)?;
        if solution.iter().any(|w| !w.is_finite()) {
            return Err(Error::Singular);
        }

        Ok(Self {
            weights: solution.rows(0, dim).iter().copied().collect(),
            intercept: solution[dim],
            gamma,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self.intercept + x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>())
    }

    /// The fitted objective `||X w + b - y||^2 + gamma ||w||^2`.
    pub fn objective<R: AsRef<[f64]>>(&self, x: &[R], y: &[f64]) -> Result<f64> {
        let mut sse = 0.0;
        for (row, t) in x.iter().zip(y) {
            let r = self.predict(row.as_ref())? - t;
            sse += r * r;
        }
        Ok(sse + self.gamma * self.weights.iter().map(|w| w * w).sum::<f64>())
    }
}
