use nalgebra::{Complex, SymmetricEigen};

use super::operators::{max_abs, CMatrix};
use crate::error::{domain, Result};

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub levels: Vec<f64>,
    /// Column k is the eigenvector of `levels[k]`.
    pub states: CMatrix,
}

const HERMITIAN_TOL: f64 = 1e-9;

pub fn eigensystem(h: &CMatrix) -> Result<Eigensystem> {
    if !h.is_square() {
        return domain("matrix is not square");
    }
    if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return domain("matrix has non-finite entries");
    }
    let scale = max_abs(h);
    let skew = max_abs(&(h - h.adjoint()));
    if skew > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return domain(format!("matrix is not Hermitian (asymmetry {skew:e})"));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(Eigensystem { levels: vec![], states: CMatrix::zeros(0, 0) });
    }
    // Diagonal input (the common secular case) needs no iteration.
    let off_diag = (0..n).any(|i| (0..n).any(|j| i != j && h[(i, j)] != Complex::new(0.0, 0.0)));
    let (values, vectors) = if off_diag {
        let sym = (h + h.adjoint()) * Complex::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        (eig.eigenvalues.iter().copied().collect::<Vec<f64>>(), eig.eigenvectors)
    } else {
        ((0..n).map(|i| h[(i, i)].re).collect(), CMatrix::identity(n, n))
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let levels = order.iter().map(|&k| values[k]).collect();
    let states = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(Eigensystem { levels, states })
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// U diag(levels) U^dagger.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.states.clone();
        for c in 0..n {
            for r in 0..n {
                scaled[(r, c)] *= self.levels[c];
            }
        }
        scaled * self.states.adjoint()
    }

    /// Operator expressed in the eigenbasis, U^dagger A U.
    pub fn to_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        self.states.adjoint() * op * &self.states
    }
}
