use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub intercept: f64,
}

impl OlsFit {
    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x * &self.coefficients + DVector::from_element(x.nrows(), self.intercept)
    }
}

/// Ordinary least squares with an intercept.
///
/// The intercept is absorbed by centering `x` and `y`; the slopes then come
/// from a singular value decomposition of the centered design. Singular
/// values below `max(n, p) * eps * sigma_max` are treated as zero, which
/// yields the minimum-norm solution for rank-deficient designs. A constant
/// target gives zero slopes and `intercept = mean(y)`.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch(format!("{n} design rows vs {} targets", y.len())));
    }
    if n < p + 1 {
        return Err(Error::invalid(format!("{n} rows cannot fit {p} coefficients plus intercept")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("design or target contains non-finite values"));
    }

    let y_mean = y.mean();
    if p == 0 {
        return Ok(OlsFit { coefficients: DVector::zeros(0), intercept: y_mean });
    }
    let col_means = DVector::from_iterator(p, x.column_iter().map(|c| c.mean()));
    let mut centered = x.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-col_means[j]);
    }
    let yc = y.add_scalar(-y_mean);

    let coefficients = if yc.iter().all(|v| *v == 0.0) {
        DVector::zeros(p)
    } else {
        let svd = centered.svd(true, true);
        let sigma_max = svd.singular_values.max();
        let tol = (n.max(p) as f64) * f64::EPSILON * sigma_max;
        if sigma_max <= 0.0 {
            DVector::zeros(p)
        } else {
            svd.solve(&yc, tol).map_err(|e| Error::invalid(format!("least squares solve failed: {e}")))?
        }
    };
    let intercept = y_mean - col_means.dot(&coefficients);
    Ok(OlsFit { coefficients, intercept })
}
