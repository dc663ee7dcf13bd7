use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::linalg::{check_rank, spd_inverse};
use super::{Coefficient, ModelKind, ModelTest, RegressionFit, TestKind};
use crate::error::{Error, Result};

pub const DEMEAN_TOL: f64 = 1e-12;
const DEMEAN_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub unit: String,
    pub period: i32,
    pub features: Vec<Option<f64>>,
    pub outcome: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PanelData {
    pub feature_names: Vec<String>,
    pub rows: Vec<PanelRow>,
}

/// Sweeps out unit and period means alternately until one full pass changes
/// no entry by more than `tol` times the column's largest magnitude.
/// Returns the number of passes.
pub fn demean_twoway(col: &mut [f64], unit: &[usize], period: &[usize], tol: f64) -> Result<usize> {
    let nu = unit.iter().max().map_or(0, |m| m + 1);
    let np = period.iter().max().map_or(0, |m| m + 1);
    let scale = col.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut sum = Vec::new();
    let mut cnt = Vec::new();
    for pass in 1..=DEMEAN_MAX_ITER {
        let mut change = 0.0f64;
        for (groups, g) in [(unit, nu), (period, np)] {
            sum.clear();
            sum.resize(g, 0.0);
            cnt.clear();
            cnt.resize(g, 0usize);
            for (v, &k) in col.iter().zip(groups) {
                sum[k] += v;
                cnt[k] += 1;
            }
            for (v, &k) in col.iter_mut().zip(groups) {
                let m = sum[k] / cnt[k] as f64;
                *v -= m;
                change = change.max(m.abs());
            }
        }
        if change <= tol * scale {
            return Ok(pass);
        }
    }
    Err(Error::Numeric(format!("two-way demeaning did not converge in {DEMEAN_MAX_ITER} passes")))
}

/// Within estimator with unit and period fixed effects.
pub fn fit_twoway_fe(panel: &PanelData) -> Result<RegressionFit> {
    let k0 = panel.feature_names.len();
    let complete: Vec<&PanelRow> = panel
        .rows
        .iter()
        .filter(|r| {
            r.features.len() == k0
                && r.outcome.is_some_and(f64::is_finite)
                && r.features.iter().all(|f| f.is_some_and(f64::is_finite))
        })
        .collect();
    let n = complete.len();
    let units: BTreeMap<&str, usize> = {
        let mut m: BTreeMap<&str, usize> = complete.iter().map(|r| (r.unit.as_str(), 0)).collect();
        m.values_mut().enumerate().for_each(|(i, v)| *v = i);
        m
    };
    let periods: BTreeMap<i32, usize> = {
        let mut m: BTreeMap<i32, usize> = complete.iter().map(|r| (r.period, 0)).collect();
        m.values_mut().enumerate().for_each(|(i, v)| *v = i);
        m
    };
    let ui: Vec<usize> = complete.iter().map(|r| units[r.unit.as_str()]).collect();
    let pi: Vec<usize> = complete.iter().map(|r| periods[&r.period]).collect();

    let mut y: Vec<f64> = complete.iter().map(|r| r.outcome.expect("complete")).collect();
    demean_twoway(&mut y, &ui, &pi, DEMEAN_TOL)?;
    let mut names = Vec::new();
    let mut cols = Vec::new();
    let mut dropped = Vec::new();
    for (j, name) in panel.feature_names.iter().enumerate() {
        let mut c: Vec<f64> = complete.iter().map(|r| r.features[j].expect("complete")).collect();
        let norm0 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        demean_twoway(&mut c, &ui, &pi, DEMEAN_TOL)?;
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-9 * norm0.max(1.0) {
            log::warn!("feature {name} is constant within units and periods; dropped");
            dropped.push(name.clone());
        } else {
            names.push(name.clone());
            cols.push(c);
        }
    }
    let k = names.len();
    let dof = n as i64 - k as i64 - (units.len() as i64 - 1) - (periods.len() as i64 - 1) - 1;
    if dof <= 0 {
        return Err(Error::Data(format!(
            "{n} complete rows cannot identify {k} slopes with {} units and {} periods",
            units.len(),
            periods.len()
        )));
    }
    let dof_f = dof as f64;
    let x = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
    let yv = DVector::from_vec(y);
    let tss: f64 = yv.norm_squared();
    let (beta, cov_unscaled) = if k == 0 {
        (DVector::zeros(0), DMatrix::zeros(0, 0))
    } else {
        check_rank(&x, &names)?;
        let inv = spd_inverse(&x.tr_mul(&x))?;
        (&inv * x.tr_mul(&yv), inv)
    };
    let resid = &yv - &x * &beta;
    let rss = resid.norm_squared();
    let sigma2 = rss / dof_f;
    let tdist = StudentsT::new(0.0, 1.0, dof_f).expect("positive dof");
    let tcrit = tdist.inverse_cdf(0.975);
    let coefficients = (0..k)
        .map(|j| {
            let b = beta[j];
            let se = (sigma2 * cov_unscaled[(j, j)]).sqrt();
            let t = b / se;
            let p = if se > 0.0 { 2.0 * tdist.sf(t.abs()) } else { f64::NAN };
            Coefficient {
                name: names[j].clone(),
                estimate: b,
                std_error: se,
                statistic: t,
                p_value: p,
                ci_low: b - tcrit * se,
                ci_high: b + tcrit * se,
            }
        })
        .collect();
    let (f, fp) = if k > 0 && rss > 0.0 {
        let f = ((tss - rss) / k as f64) / (rss / dof_f);
        let fp = FisherSnedecor::new(k as f64, dof_f).expect("positive dof").sf(f);
        (f, fp)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(RegressionFit {
        model: ModelKind::TwoWayFixedEffects,
        n_obs: n,
        coefficients,
        log_likelihood: None,
        null_log_likelihood: None,
        pseudo_r2: None,
        r2: (tss > 0.0).then(|| 1.0 - rss / tss),
        model_test: ModelTest {
            kind: TestKind::F,
            statistic: f,
            dof: vec![k as f64, dof_f],
            p_value: fp,
        },
        iterations: 0,
        score_norm: None,
        dropped,
    })
}
