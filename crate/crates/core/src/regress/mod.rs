//! Logistic, multinomial logit and two-way fixed-effects regression with
//! Wald inference.

mod design;
mod linalg;
mod logit;
mod multinomial;
mod panel;
mod report;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub use design::{build_design, DesignMatrix, Feature, Transform};
pub use linalg::check_rank;
pub use logit::{fit_logistic, logistic_loglik, logistic_score};
pub use multinomial::{
    fit_multinomial, fit_sign_multinomial, multinomial_loglik, multinomial_score, CategoryBlock, MultinomialFit,
};
pub use panel::{demean_twoway, fit_twoway_fe, PanelData, PanelRow};
pub use report::{fit_json, multinomial_json, regression_table_tsv, TableColumn};

pub const MAX_ITER: usize = 100;
pub const SCORE_TOL: f64 = 1e-8;
/// Linear predictors beyond this magnitude mean fitted probabilities within
/// ~1e-15 of 0 or 1, which only happens when the data are separable.
pub const SEPARATION_ETA: f64 = 35.0;
pub(crate) const Z975: f64 = 1.959_963_984_540_054;
pub const INTERCEPT: &str = "const";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Multinomial,
    TwoWayFixedEffects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    LlrChiSquare,
    F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelTest {
    pub kind: TestKind,
    pub statistic: f64,
    pub dof: Vec<f64>,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// z for likelihood models, t for the panel model.
    pub statistic: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub model: ModelKind,
    pub n_obs: usize,
    pub coefficients: Vec<Coefficient>,
    pub log_likelihood: Option<f64>,
    pub null_log_likelihood: Option<f64>,
    pub pseudo_r2: Option<f64>,
    pub r2: Option<f64>,
    pub model_test: ModelTest,
    pub iterations: usize,
    /// Largest absolute score component at the solution.
    pub score_norm: Option<f64>,
    /// Features removed before fitting (constant after demeaning).
    pub dropped: Vec<String>,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

pub fn two_sided_normal_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Wald z and two-sided p for one estimate.
pub fn wald_test(estimate: f64, std_error: f64) -> Result<(f64, f64)> {
    if !(std_error > 0.0) || !std_error.is_finite() {
        return Err(Error::Undefined(format!("Wald test with standard error {std_error}")));
    }
    let z = estimate / std_error;
    Ok((z, two_sided_normal_p(z)))
}

/// McFadden's pseudo-R², `1 - L / L0`.
pub fn mcfadden_r2(log_likelihood: f64, null_log_likelihood: f64) -> Result<f64> {
    if null_log_likelihood == 0.0 {
        return Err(Error::Undefined("null log-likelihood is zero".into()));
    }
    Ok(1.0 - log_likelihood / null_log_likelihood)
}

pub(crate) fn llr_test(l: f64, l0: f64, dof: usize) -> ModelTest {
    let stat = (2.0 * (l - l0)).max(0.0);
    let p = if dof == 0 {
        f64::NAN
    } else {
        ChiSquared::new(dof as f64).expect("positive dof").sf(stat)
    };
    ModelTest {
        kind: TestKind::LlrChiSquare,
        statistic: stat,
        dof: vec![dof as f64],
        p_value: p,
    }
}

pub(crate) fn wald_coefficients(names: &[String], beta: &[f64], se: &[f64]) -> Vec<Coefficient> {
    names
        .iter()
        .zip(beta.iter().zip(se))
        .map(|(name, (&b, &s))| {
            let (z, p) = wald_test(b, s).unwrap_or((f64::NAN, f64::NAN));
            Coefficient {
                name: name.clone(),
                estimate: b,
                std_error: s,
                statistic: z,
                p_value: p,
                ci_low: b - Z975 * s,
                ci_high: b + Z975 * s,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wald_examples() {
        assert_eq!(wald_test(0.0, 0.5).unwrap().1, 1.0);
        let (z, p) = wald_test(0.4, 0.12).unwrap();
        assert!((z - 3.3333).abs() < 1e-4);
        assert!((p - 0.000858).abs() < 1e-5, "{p}");
        assert!((two_sided_normal_p(3.33) - 0.00087).abs() < 5e-6);
        assert!(wald_test(1.0, 0.0).is_err());
    }

    #[test]
    fn mcfadden_examples() {
        assert_eq!(mcfadden_r2(-10.0, -10.0).unwrap(), 0.0);
        assert!((mcfadden_r2(-5.0, -10.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(mcfadden_r2(0.0, 0.0).is_err());
    }
}
