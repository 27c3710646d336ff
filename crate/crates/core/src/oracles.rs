//! Reference solutions independent of the finite-difference path.
//!
//! Linear heat problems are solved by eigenfunction expansion, linear
//! systems by dense Gaussian elimination.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Grid;

/// Eigenbasis of a series solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesBasis {
    /// `cos(k π h / H)`, zero flux at both ends.
    Neumann,
    /// `cos((k + 1/2) π h / H)`, zero flux at 0 and zero value at `H`.
    Mixed,
}

/// Finite cosine series solution of `u_t = D u_hh - decay u`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatSeriesSolution {
    pub basis: SeriesBasis,
    pub coeffs: Vec<f64>,
    pub depth: f64,
    pub diffusivity: f64,
    pub decay: f64,
    /// Constant added to the series, e.g. the Dirichlet value `n_H`.
    pub shift: f64,
}

impl HeatSeriesSolution {
    fn wavenumber(&self, k: usize) -> f64 {
        let mode = match self.basis {
            SeriesBasis::Neumann => k as f64,
            SeriesBasis::Mixed => k as f64 + 0.5,
        };
        mode * PI / self.depth
    }

    pub fn eval(&self, h: f64, t: f64) -> f64 {
        if self.basis == SeriesBasis::Mixed && h == self.depth {
            return self.shift;
        }
        let series: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let w = self.wavenumber(k);
                c * (-(w * w * self.diffusivity + self.decay) * t).exp() * (w * h).cos()
            })
            .sum();
        self.shift + series
    }

    pub fn on_grid(&self, t: f64, grid: &Grid) -> Vec<f64> {
        grid.nodes().map(|h| self.eval(h, t)).collect()
    }
}

/// `Σ c_k exp(-((kπ/H)^2 D + decay) t) cos(kπh/H)` on the grid.
pub fn heat_exact_neumann(
    coeffs: &[f64],
    t: f64,
    grid: &Grid,
    diffusivity: f64,
    decay: f64,
) -> Vec<f64> {
    HeatSeriesSolution {
        basis: SeriesBasis::Neumann,
        coeffs: coeffs.to_vec(),
        depth: grid.depth(),
        diffusivity,
        decay,
        shift: 0.0,
    }
    .on_grid(t, grid)
}

/// `n_H + Σ c_k exp(-((k+1/2)π/H)^2 D t) cos((k+1/2)πh/H)` on the grid.
/// The coefficients expand `n_0 - n_H`.
pub fn heat_exact_mixed(
    coeffs: &[f64],
    t: f64,
    grid: &Grid,
    diffusivity: f64,
    n_h: f64,
) -> Vec<f64> {
    HeatSeriesSolution {
        basis: SeriesBasis::Mixed,
        coeffs: coeffs.to_vec(),
        depth: grid.depth(),
        diffusivity,
        decay: 0.0,
        shift: n_h,
    }
    .on_grid(t, grid)
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.len();
    if rhs.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != n) {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: row.len(),
        });
    }
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() <= scale * 1e-14 {
            return Err(Error::SingularMatrix);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let (top, bottom) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (offset, row) in bottom.iter_mut().enumerate() {
            let factor = row[col] / pivot[col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                row[k] -= factor * pivot[k];
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - tail) / a[i][i];
    }
    Ok(x)
}

/// Least-squares slope of `log(error)` against `log(dx)`.
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<f64> {
    if errors.len() < 2 {
        return Err(Error::Precondition(
            "convergence order needs at least two grid levels".into(),
        ));
    }
    if errors
        .iter()
        .any(|&(dx, e)| !(dx > 0.0 && e > 0.0 && dx.is_finite() && e.is_finite()))
    {
        return Err(Error::Precondition(
            "grid spacings and errors must be positive and finite".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = errors.iter().map(|&(dx, e)| (dx.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("grid spacings must differ".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
