use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// `Q diag(f(values)) Qᵀ`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        scaled * self.vectors.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.apply_fn(|x| x)
    }

    /// `‖QᵀQ − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.vectors.ncols();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(n, n)).norm()
    }

    /// `‖MQ − QΛ‖_F / ‖M‖_F`.
    pub fn residual(&self, m: &DMatrix<f64>) -> f64 {
        let mut ql = self.vectors.clone();
        for (j, mut col) in ql.column_iter_mut().enumerate() {
            col *= self.values[j];
        }
        let scale = m.norm().max(f64::MIN_POSITIVE);
        (m * &self.vectors - ql).norm() / scale
    }
}

fn inf_norm<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.clone().abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Relative asymmetry `‖M − Mᵀ‖_∞ / ‖M‖_∞`.
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let scale = inf_norm(m);
    if scale == 0.0 {
        return 0.0;
    }
    inf_norm(&(m - m.transpose())) / scale
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Dense symmetric eigendecomposition.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "eig_sym needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("eig_sym: non-finite entry".into()));
    }
    let asymmetry = symmetry_defect(m);
    if asymmetry > 1e-13 {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let sym = (m + m.transpose()) * 0.5;
    let raw = SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * n.max(10))
        .ok_or(Error::EigenNoConvergence { residual: f64::NAN })?;
    let order = sorted_order(raw.eigenvalues.as_slice());
    let values = DVector::from_iterator(n, order.iter().map(|&j| raw.eigenvalues[j]));
    let vectors = DMatrix::from_fn(n, n, |i, j| raw.eigenvectors[(i, order[j])]);
    let decomposition = EigenDecomposition { values, vectors };
    let residual = decomposition.residual(m);
    if !(residual <= 1e-9) {
        return Err(Error::EigenNoConvergence { residual });
    }
    Ok(decomposition)
}

/// Hermitian eigendecomposition with unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<Complex64>,
}

pub fn eig_herm(m: &DMatrix<Complex64>) -> Result<HermitianDecomposition> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput("eig_herm needs a square matrix".into()));
    }
    let scale = inf_norm(m);
    if scale > 0.0 {
        let asymmetry = inf_norm(&(m - m.adjoint())) / scale;
        if asymmetry > 1e-13 {
            return Err(Error::NotSymmetric { asymmetry });
        }
    }
    let n = m.nrows();
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let raw = SymmetricEigen::try_new(herm, f64::EPSILON, 1000 * n.max(10))
        .ok_or(Error::EigenNoConvergence { residual: f64::NAN })?;
    let order = sorted_order(raw.eigenvalues.as_slice());
    let values = DVector::from_iterator(n, order.iter().map(|&j| raw.eigenvalues[j]));
    let vectors = DMatrix::from_fn(n, n, |i, j| raw.eigenvectors[(i, order[j])]);
    Ok(HermitianDecomposition { values, vectors })
}
