use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::linalg::{check_rank, max_abs, spd_inverse, with_intercept};
use super::{
    llr_test, mcfadden_r2, wald_coefficients, Coefficient, DesignMatrix, ModelTest, INTERCEPT, MAX_ITER, SCORE_TOL,
    SEPARATION_ETA,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryBlock {
    pub category: i64,
    pub coefficients: Vec<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultinomialFit {
    pub reference: i64,
    pub categories: Vec<i64>,
    pub counts: BTreeMap<i64, usize>,
    pub n_obs: usize,
    pub blocks: Vec<CategoryBlock>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub pseudo_r2: Option<f64>,
    pub model_test: ModelTest,
    pub iterations: usize,
    pub score_norm: f64,
}

impl MultinomialFit {
    pub fn block(&self, category: i64) -> Option<&CategoryBlock> {
        self.blocks.iter().find(|b| b.category == category)
    }
}

/// Probabilities of the non-reference categories per row (`n x J`).
fn probabilities(x: &DMatrix<f64>, j: usize, theta: &DVector<f64>) -> DMatrix<f64> {
    let p = x.ncols();
    let n = x.nrows();
    let mut eta = DMatrix::zeros(n, j);
    for c in 0..j {
        let b = theta.rows(c * p, p);
        eta.set_column(c, &(x * b));
    }
    let mut prob = DMatrix::zeros(n, j);
    for i in 0..n {
        let m = eta.row(i).iter().fold(0.0f64, |a, &b| a.max(b));
        let denom = (-m).exp() + eta.row(i).iter().map(|&e| (e - m).exp()).sum::<f64>();
        for c in 0..j {
            prob[(i, c)] = (eta[(i, c)] - m).exp() / denom;
        }
    }
    prob
}

/// Multinomial log-likelihood. `y[i]` is the non-reference category index
/// `0..j`, or `None` for the reference category; `x` includes the intercept.
pub fn multinomial_loglik(x: &DMatrix<f64>, y: &[Option<usize>], j: usize, theta: &DVector<f64>) -> f64 {
    let p = x.ncols();
    let mut ll = 0.0;
    for i in 0..x.nrows() {
        let eta: Vec<f64> = (0..j).map(|c| x.row(i).dot(&theta.rows(c * p, p).transpose())).collect();
        let m = eta.iter().fold(0.0f64, |a, &b| a.max(b));
        let lse = m + ((-m).exp() + eta.iter().map(|&e| (e - m).exp()).sum::<f64>()).ln();
        ll += y[i].map_or(0.0, |c| eta[c]) - lse;
    }
    ll
}

/// Gradient of [`multinomial_loglik`], blocks stacked by category.
pub fn multinomial_score(x: &DMatrix<f64>, y: &[Option<usize>], j: usize, theta: &DVector<f64>) -> DVector<f64> {
    let p = x.ncols();
    let prob = probabilities(x, j, theta);
    let mut g = DVector::zeros(j * p);
    for c in 0..j {
        let r = DVector::from_fn(x.nrows(), |i, _| (y[i] == Some(c)) as u8 as f64 - prob[(i, c)]);
        g.rows_mut(c * p, p).copy_from(&x.tr_mul(&r));
    }
    g
}

fn information(x: &DMatrix<f64>, j: usize, theta: &DVector<f64>) -> DMatrix<f64> {
    let p = x.ncols();
    let prob = probabilities(x, j, theta);
    let mut h = DMatrix::zeros(j * p, j * p);
    for a in 0..j {
        for b in a..j {
            let mut xw = x.clone();
            for i in 0..x.nrows() {
                let w = prob[(i, a)] * ((a == b) as u8 as f64 - prob[(i, b)]);
                xw.row_mut(i).scale_mut(w);
            }
            let blk = x.tr_mul(&xw);
            h.view_mut((a * p, b * p), (p, p)).copy_from(&blk);
            if a != b {
                h.view_mut((b * p, a * p), (p, p)).copy_from(&blk.transpose());
            }
        }
    }
    h
}

/// Multinomial logit by Newton-Raphson against the `reference` category.
/// Every category in `y` gets a coefficient block except the reference.
pub fn fit_multinomial(design: &DesignMatrix, y: &[i64], reference: i64) -> Result<MultinomialFit> {
    let n = design.n_obs();
    if y.len() != n {
        return Err(Error::Data(format!("{} responses for {n} rows", y.len())));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in y {
        *counts.entry(v).or_default() += 1;
    }
    if !counts.contains_key(&reference) {
        return Err(Error::Data(format!("reference category {reference} has no observations")));
    }
    if counts.len() < 2 {
        return Err(Error::Data("multinomial response has a single category".into()));
    }
    let others: Vec<i64> = counts.keys().copied().filter(|&c| c != reference).collect();
    let j = others.len();
    let yi: Vec<Option<usize>> = y.iter().map(|v| others.iter().position(|c| c == v)).collect();
    let x = with_intercept(&design.x);
    let p = x.ncols();
    let mut names = vec![INTERCEPT.to_string()];
    names.extend(design.names.iter().cloned());
    if n <= j * p {
        return Err(Error::Data(format!("{n} observations for {} parameters", j * p)));
    }
    check_rank(&x, &names)?;

    let nref = counts[&reference] as f64;
    let null_ll: f64 = counts.values().map(|&c| c as f64 * (c as f64 / n as f64).ln()).sum();
    let mut theta = DVector::zeros(j * p);
    for (c, cat) in others.iter().enumerate() {
        theta[c * p] = (counts[cat] as f64 / nref).ln();
    }
    let mut ll = multinomial_loglik(&x, &yi, j, &theta);
    let mut iterations = 0;
    loop {
        let g = multinomial_score(&x, &yi, j, &theta);
        if max_abs(&g) < SCORE_TOL {
            break;
        }
        if iterations == MAX_ITER {
            return Err(Error::Numeric(format!(
                "multinomial fit did not converge in {MAX_ITER} iterations (max |score| {:.3e}, max |beta| {:.3})",
                max_abs(&g),
                max_abs(&theta)
            )));
        }
        iterations += 1;
        let step = spd_inverse(&information(&x, j, &theta))? * &g;
        let mut t = 1.0;
        let mut cand = &theta + &step;
        let mut cand_ll = multinomial_loglik(&x, &yi, j, &cand);
        while cand_ll < ll - 1e-12 * ll.abs().max(1.0) && t > 1e-10 {
            t *= 0.5;
            cand = &theta + &step * t;
            cand_ll = multinomial_loglik(&x, &yi, j, &cand);
        }
        theta = cand;
        ll = cand_ll;
        let max_eta = (0..j)
            .map(|c| max_abs(&(&x * theta.rows(c * p, p))))
            .fold(0.0f64, f64::max);
        if max_eta > SEPARATION_ETA {
            return Err(Error::Numeric(format!(
                "perfect separation suspected: max |linear predictor| {max_eta:.1}, max |beta| {:.3}",
                max_abs(&theta)
            )));
        }
    }
    let score_norm = max_abs(&multinomial_score(&x, &yi, j, &theta));
    let cov = spd_inverse(&information(&x, j, &theta))?;
    let blocks = others
        .iter()
        .enumerate()
        .map(|(c, &cat)| {
            let beta: Vec<f64> = (0..p).map(|k| theta[c * p + k]).collect();
            let se: Vec<f64> = (0..p).map(|k| cov[(c * p + k, c * p + k)].sqrt()).collect();
            CategoryBlock {
                category: cat,
                coefficients: wald_coefficients(&names, &beta, &se),
            }
        })
        .collect();
    Ok(MultinomialFit {
        reference,
        categories: counts.keys().copied().collect(),
        counts,
        n_obs: n,
        blocks,
        log_likelihood: ll,
        null_log_likelihood: null_ll,
        pseudo_r2: mcfadden_r2(ll, null_ll).ok(),
        model_test: llr_test(ll, null_ll, j * (p - 1)),
        iterations,
        score_norm,
    })
}

/// Edge-sign model: categories -1, 0, +1 with 0 as reference; all three must occur.
pub fn fit_sign_multinomial(design: &DesignMatrix, signs: &[i8]) -> Result<MultinomialFit> {
    for cat in [-1i8, 0, 1] {
        if !signs.contains(&cat) {
            return Err(Error::Data(format!("edge-sign category {cat} has no observations")));
        }
    }
    if let Some(bad) = signs.iter().find(|s| !(-1..=1).contains(*s)) {
        return Err(Error::Data(format!("edge sign {bad} not in {{-1, 0, 1}}")));
    }
    let y: Vec<i64> = signs.iter().map(|&s| s as i64).collect();
    fit_multinomial(design, &y, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::fit_logistic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intercept_only_closed_form() {
        let mut y = vec![0i8; 50];
        y.extend([1i8; 25]);
        y.extend([-1i8; 25]);
        let fit = fit_sign_multinomial(&DesignMatrix::empty(100), &y).unwrap();
        for cat in [-1, 1] {
            let b = fit.block(cat).unwrap().coefficients[0].estimate;
            assert!((b - 0.5f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_category_is_error() {
        let y = vec![0i8, 1, 1, 0, 0];
        assert!(fit_sign_multinomial(&DesignMatrix::empty(5), &y).is_err());
    }

    #[test]
    fn two_categories_match_binary_logit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 300;
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<i64> = x
            .iter()
            .zip(&z)
            .map(|(&a, &b)| {
                let u: f64 = rng.random();
                if u < 0.25 + 0.2 * a { -1 } else if u < 0.6 + 0.1 * b { 1 } else { 0 }
            })
            .collect();
        let d = DesignMatrix::from_columns(&["x", "z"], &[x, z]);
        let collapsed: Vec<i64> = y.iter().map(|&v| if v == -1 { -1 } else { 0 }).collect();
        let multi = fit_multinomial(&d, &collapsed, 0).unwrap();
        let binary: Vec<f64> = collapsed.iter().map(|&v| (v == -1) as u8 as f64).collect();
        let logit = fit_logistic(&d, &binary, None).unwrap();
        let blk = multi.block(-1).unwrap();
        for (a, b) in blk.coefficients.iter().zip(&logit.coefficients) {
            assert!((a.estimate - b.estimate).abs() < 1e-8);
            assert!((a.std_error - b.std_error).abs() < 1e-8);
        }
        assert!((multi.log_likelihood - logit.log_likelihood.unwrap()).abs() < 1e-8);
        let three = fit_multinomial(&d, &y, 0).unwrap();
        assert!(three.score_norm < 1e-8);
    }

    #[test]
    fn score_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 60;
        let x = with_intercept(&DMatrix::from_fn(n, 2, |_, _| rng.random::<f64>()));
        let y: Vec<Option<usize>> = (0..n).map(|i| [None, Some(0), Some(1)][i % 3]).collect();
        let theta = DVector::from_fn(6, |i, _| 0.1 * i as f64 - 0.2);
        let g = multinomial_score(&x, &y, 2, &theta);
        for k in 0..6 {
            let h = 1e-5;
            let mut a = theta.clone();
            a[k] += h;
            let mut b = theta.clone();
            b[k] -= h;
            let fd = (multinomial_loglik(&x, &y, 2, &a) - multinomial_loglik(&x, &y, 2, &b)) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1.0));
        }
    }
}
