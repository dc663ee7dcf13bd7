use nalgebra::{DMatrix, DVector};

use super::linalg::{check_rank, max_abs, spd_inverse, with_intercept};
use super::{
    llr_test, mcfadden_r2, wald_coefficients, DesignMatrix, ModelKind, RegressionFit, INTERCEPT, MAX_ITER,
    SCORE_TOL, SEPARATION_ETA,
};
use crate::error::{Error, Result};

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli (quasi-)log-likelihood; `x` includes the intercept column.
pub fn logistic_loglik(x: &DMatrix<f64>, y: &[f64], w: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y.iter().zip(w))
        .map(|(&e, (&yi, &wi))| wi * (yi * e - softplus(e)))
        .sum()
}

/// Gradient of [`logistic_loglik`].
pub fn logistic_score(x: &DMatrix<f64>, y: &[f64], w: &[f64], beta: &DVector<f64>) -> DVector<f64> {
    let eta = x * beta;
    let r = DVector::from_fn(y.len(), |i, _| w[i] * (y[i] - sigmoid(eta[i])));
    x.tr_mul(&r)
}

fn information(x: &DMatrix<f64>, w: &[f64], beta: &DVector<f64>) -> DMatrix<f64> {
    let eta = x * beta;
    let mut xw = x.clone();
    for i in 0..x.nrows() {
        let mu = sigmoid(eta[i]);
        let v = w[i] * mu * (1.0 - mu);
        xw.row_mut(i).scale_mut(v);
    }
    x.tr_mul(&xw)
}

/// Quasi-binomial logistic regression by IRLS (Newton steps with halving).
/// Responses may be fractions in `[0, 1]`. An intercept is added.
pub fn fit_logistic(design: &DesignMatrix, y: &[f64], weights: Option<&[f64]>) -> Result<RegressionFit> {
    let n = design.n_obs();
    if y.len() != n {
        return Err(Error::Data(format!("{} responses for {n} rows", y.len())));
    }
    if let Some(bad) = y.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Data(format!("logistic response {bad} outside [0, 1]")));
    }
    let w: Vec<f64> = match weights {
        Some(w) if w.len() != n => return Err(Error::Data(format!("{} weights for {n} rows", w.len()))),
        Some(w) => w.to_vec(),
        None => vec![1.0; n],
    };
    let x = with_intercept(&design.x);
    let mut names = vec![INTERCEPT.to_string()];
    names.extend(design.names.iter().cloned());
    if n <= names.len() {
        return Err(Error::Data(format!("{n} observations for {} parameters", names.len())));
    }
    check_rank(&x, &names)?;
    let wsum: f64 = w.iter().sum();
    let ybar = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / wsum;
    if ybar <= 0.0 || ybar >= 1.0 {
        return Err(Error::Numeric(format!("response is constant at {ybar}; nothing to fit")));
    }
    let null_ll = wsum * (ybar * ybar.ln() + (1.0 - ybar) * (1.0 - ybar).ln());

    let mut beta = DVector::zeros(x.ncols());
    beta[0] = (ybar / (1.0 - ybar)).ln();
    let mut ll = logistic_loglik(&x, y, &w, &beta);
    let mut iterations = 0;
    loop {
        let score = logistic_score(&x, y, &w, &beta);
        if max_abs(&score) < SCORE_TOL {
            break;
        }
        if iterations == MAX_ITER {
            return Err(Error::Numeric(format!(
                "logistic fit did not converge in {MAX_ITER} iterations (max |score| {:.3e}, max |beta| {:.3})",
                max_abs(&score),
                max_abs(&beta)
            )));
        }
        iterations += 1;
        let info = information(&x, &w, &beta);
        let step = spd_inverse(&info)? * &score;
        let mut t = 1.0;
        let mut candidate = &beta + &step;
        let mut cand_ll = logistic_loglik(&x, y, &w, &candidate);
        while cand_ll < ll - 1e-12 * ll.abs().max(1.0) && t > 1e-10 {
            t *= 0.5;
            candidate = &beta + &step * t;
            cand_ll = logistic_loglik(&x, y, &w, &candidate);
        }
        beta = candidate;
        ll = cand_ll;
        let max_eta = max_abs(&(&x * &beta));
        if max_eta > SEPARATION_ETA {
            return Err(Error::Numeric(format!(
                "perfect separation suspected: max |linear predictor| {max_eta:.1}, max |beta| {:.3}",
                max_abs(&beta)
            )));
        }
    }
    let score_norm = max_abs(&logistic_score(&x, y, &w, &beta));
    let cov = spd_inverse(&information(&x, &w, &beta))?;
    let se: Vec<f64> = (0..beta.len()).map(|i| cov[(i, i)].sqrt()).collect();
    Ok(RegressionFit {
        model: ModelKind::Logistic,
        n_obs: n,
        coefficients: wald_coefficients(&names, beta.as_slice(), &se),
        log_likelihood: Some(ll),
        null_log_likelihood: Some(null_ll),
        pseudo_r2: mcfadden_r2(ll, null_ll).ok(),
        r2: None,
        model_test: llr_test(ll, null_ll, beta.len() - 1),
        iterations,
        score_norm: Some(score_norm),
        dropped: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::{build_design, Feature};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intercept_only_closed_form() {
        let d = DesignMatrix::empty(100);
        let y: Vec<f64> = (0..100).map(|i| if i % 4 == 0 { 1.0 } else { 0.0 }).collect();
        let fit = fit_logistic(&d, &y, None).unwrap();
        assert!((fit.coefficients[0].estimate - (0.25f64 / 0.75).ln()).abs() < 1e-9);
        assert!((fit.coefficients[0].estimate + 1.0986).abs() < 1e-4);
        assert!(fit.pseudo_r2.unwrap().abs() < 1e-12);
    }

    #[test]
    fn fractional_response_intercept_only() {
        let d = DesignMatrix::empty(4);
        let fit = fit_logistic(&d, &[0.1, 0.2, 0.3, 0.4], None).unwrap();
        assert!((fit.coefficients[0].estimate - (0.25f64 / 0.75).ln()).abs() < 1e-9);
    }

    #[test]
    fn separation_is_reported() {
        let d = DesignMatrix::from_columns(&["x"], &[vec![-2.0, -1.0, 1.0, 2.0, 3.0]]);
        let err = fit_logistic(&d, &[0.0, 0.0, 1.0, 1.0, 1.0], None).unwrap_err().to_string();
        assert!(err.contains("separation"), "{err}");
    }

    #[test]
    fn collinear_columns_named() {
        let d = DesignMatrix::from_columns(&["a", "twice_a"], &[vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![2.0, 4.0, 6.0, 8.0, 10.0]]);
        let err = fit_logistic(&d, &[0.0, 1.0, 0.0, 1.0, 1.0], None).unwrap_err().to_string();
        assert!(err.contains("twice_a"), "{err}");
    }

    #[test]
    fn converged_score_and_finite_difference_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 400;
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let y: Vec<Option<f64>> = xs
            .iter()
            .map(|&x| Some(if rng.random::<f64>() < sigmoid(-0.5 + 0.8 * x) { 1.0 } else { 0.0 }))
            .collect();
        let (d, yy) = build_design(&[Feature::new("x", xs.into_iter().map(Some).collect())], &y).unwrap();
        let fit = fit_logistic(&d, &yy, None).unwrap();
        assert!(fit.score_norm.unwrap() < 1e-8);
        let x = with_intercept(&d.x);
        let w = vec![1.0; n];
        let beta = DVector::from_vec(vec![0.3, -0.2]);
        let g = logistic_score(&x, &yy, &w, &beta);
        for j in 0..2 {
            let h = 1e-5;
            let mut bp = beta.clone();
            bp[j] += h;
            let mut bm = beta.clone();
            bm[j] -= h;
            let fd = (logistic_loglik(&x, &yy, &w, &bp) - logistic_loglik(&x, &yy, &w, &bm)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1.0));
        }
    }
}
