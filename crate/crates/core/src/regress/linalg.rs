use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Fails with the names of columns that are linear combinations of earlier
/// ones (modified Gram-Schmidt, relative tolerance 1e-9).
pub fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut bad = Vec::new();
    for (j, name) in names.iter().enumerate().take(x.ncols()) {
        let col = x.column(j).into_owned();
        let norm0 = col.norm();
        let mut v = col;
        for q in &basis {
            let proj = q.dot(&v);
            v -= q * proj;
        }
        let norm = v.norm();
        if norm <= 1e-9 * norm0.max(1.0) {
            bad.push(name.clone());
        } else {
            basis.push(v / norm);
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("rank-deficient design; collinear columns: {}", bad.join(", "))))
    }
}

/// Inverse of a symmetric positive definite matrix.
pub(crate) fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Numeric("information matrix is not positive definite".into()))
}

pub(crate) fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_column(0, 1.0)
}

pub(crate) fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_collinear_columns() {
        let x = DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 2.0, 1.0, 2.0, 3.0, 1.0, 3.0, 4.0, 1.0, 5.0, 6.0]);
        let names: Vec<String> = ["const", "a", "b"].iter().map(|s| s.to_string()).collect();
        let err = check_rank(&x, &names).unwrap_err().to_string();
        assert!(err.contains('b') && !err.contains("a,"), "{err}");
        assert!(check_rank(&x.columns(0, 2).into_owned(), &names[..2]).is_ok());
    }
}
