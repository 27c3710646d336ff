//! Second-order finite differences on the column and the tridiagonal
//! systems of the implicit half-step.
//!
//! Zero-flux ends use a mirror ghost node (`u_{-1} = u_1`), which keeps the
//! stencil second order. The Dirichlet node of the nutrient field stays in
//! the vector and is pinned by an identity row.

use crate::error::{Error, Result};
use crate::model::Grid;

/// Boundary-condition pair for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySpec {
    /// Zero flux at `h = 0`, fixed value at `h = H` (nutrient).
    NeumannDirichlet { value: f64 },
    /// Zero flux at both ends (phytoplankton).
    NeumannNeumann,
}

/// Right-hand-side override for a pinned row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Load {
    pub row: usize,
    pub value: f64,
}

/// Tridiagonal matrix with an optional pinned-row load.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Sub-diagonal, `lower[j]` sits at `(j + 1, j)`.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Super-diagonal, `upper[j]` sits at `(j, j + 1)`.
    pub upper: Vec<f64>,
    pub load: Option<Load>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let m = diag.len();
        if m == 0 {
            return Err(Error::ShapeMismatch {
                expected: 1,
                found: 0,
            });
        }
        for len in [lower.len(), upper.len()] {
            if len != m - 1 {
                return Err(Error::ShapeMismatch {
                    expected: m - 1,
                    found: len,
                });
            }
        }
        Ok(Tridiagonal {
            lower,
            diag,
            upper,
            load: None,
        })
    }

    pub fn identity(m: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; m.saturating_sub(1)],
            diag: vec![1.0; m],
            upper: vec![0.0; m.saturating_sub(1)],
            load: None,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Row-wise `|diag| >= |off-diagonals|`, strict in at least one row.
    pub fn is_diagonally_dominant(&self) -> bool {
        let m = self.len();
        let mut strict = false;
        for j in 0..m {
            let off = if j > 0 { self.lower[j - 1].abs() } else { 0.0 }
                + if j + 1 < m { self.upper[j].abs() } else { 0.0 };
            let d = self.diag[j].abs();
            if d < off {
                return false;
            }
            strict |= d > off;
        }
        strict
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.len();
        let mut a = vec![vec![0.0; m]; m];
        for j in 0..m {
            a[j][j] = self.diag[j];
            if j + 1 < m {
                a[j][j + 1] = self.upper[j];
                a[j + 1][j] = self.lower[j];
            }
        }
        a
    }

    /// `A x`, ignoring the load.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|j| {
                let mut acc = self.diag[j] * x[j];
                if j > 0 {
                    acc += self.lower[j - 1] * x[j - 1];
                }
                if j + 1 < m {
                    acc += self.upper[j] * x[j + 1];
                }
                acc
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        thomas_solve(self, rhs)
    }
}

/// `(u_{j-1} - 2u_j + u_{j+1}) / dx^2` with mirror ghosts at zero-flux ends.
/// The Dirichlet node of [`BoundarySpec::NeumannDirichlet`] yields 0.
pub fn apply_laplacian(u: &[f64], bc: BoundarySpec, grid: &Grid) -> Result<Vec<f64>> {
    grid.check_len(u)?;
    let m = u.len();
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let mut out = Vec::with_capacity(m);
    out.push(2.0 * (u[1] - u[0]) * inv_dx2);
    for w in u.windows(3) {
        out.push((w[0] - 2.0 * w[1] + w[2]) * inv_dx2);
    }
    out.push(match bc {
        BoundarySpec::NeumannDirichlet { .. } => 0.0,
        BoundarySpec::NeumannNeumann => 2.0 * (u[m - 2] - u[m - 1]) * inv_dx2,
    });
    Ok(out)
}

/// Matrix of `I - dt D Δ_bc + dt decay I`.
///
/// For [`BoundarySpec::NeumannDirichlet`] the last row is the identity with
/// the boundary value as load.
pub fn build_implicit_system(
    bc: BoundarySpec,
    grid: &Grid,
    diffusivity: f64,
    dt: f64,
    decay: f64,
) -> Result<Tridiagonal> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    if !(decay.is_finite() && decay >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay must be >= 0, got {decay}"
        )));
    }
    let m = grid.len();
    let s = dt * diffusivity / (grid.dx() * grid.dx());
    let centre = 1.0 + 2.0 * s + dt * decay;
    let mut diag = vec![centre; m];
    let mut lower = vec![-s; m - 1];
    let mut upper = vec![-s; m - 1];
    // mirror ghost at h = 0 folds onto the super-diagonal
    upper[0] = -2.0 * s;
    let load = match bc {
        BoundarySpec::NeumannNeumann => {
            lower[m - 2] = -2.0 * s;
            None
        }
        BoundarySpec::NeumannDirichlet { value } => {
            lower[m - 2] = 0.0;
            diag[m - 1] = 1.0;
            Some(Load { row: m - 1, value })
        }
    };
    Ok(Tridiagonal {
        lower,
        diag,
        upper,
        load,
    })
}

/// Thomas algorithm. If the system carries a [`Load`], the corresponding
/// entry of `rhs` is replaced by the load value before solving.
pub fn thomas_solve(sys: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = sys.len();
    if rhs.len() != m {
        return Err(Error::ShapeMismatch {
            expected: m,
            found: rhs.len(),
        });
    }
    let mut d: Vec<f64> = rhs.to_vec();
    if let Some(load) = sys.load {
        d[load.row] = load.value;
    }
    let mut c = vec![0.0; m];

    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot(0));
    }
    if m > 1 {
        c[0] = sys.upper[0] / pivot;
    }
    d[0] /= pivot;
    for j in 1..m {
        let a = sys.lower[j - 1];
        pivot = sys.diag[j] - a * c[j - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot(j));
        }
        if j + 1 < m {
            c[j] = sys.upper[j] / pivot;
        }
        d[j] = (d[j] - a * d[j - 1]) / pivot;
    }
    for j in (0..m - 1).rev() {
        d[j] -= c[j] * d[j + 1];
    }
    Ok(d)
}
