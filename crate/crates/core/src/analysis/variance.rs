use super::ensemble::{run_ensemble, EnsembleOptions};
use crate::stability::{StabilityFunctions, TestProblem};
use crate::steppers::{Method, MethodConfig, StageRule};
use crate::{Error, Result};

/// Outcome of comparing a method's stationary variance with its linear theory.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceCheck {
    pub method: Method,
    pub z: f64,
    pub burn_in: usize,
    pub n_samples: usize,
    pub mean: f64,
    /// `(mean - exact mean) / SE`.
    pub mean_z_score: f64,
    /// Empirical variance over the exact stationary variance.
    pub empirical_ratio: f64,
    pub predicted_ratio: f64,
    /// Ratio error in units of the variance estimator's standard deviation
    /// `sigma^2 sqrt(2 / (n - 1))`.
    pub z_score: f64,
}

impl VarianceCheck {
    pub fn passed(&self, threshold: f64) -> bool {
        self.z_score.abs() < threshold && self.mean_z_score.abs() < threshold
    }
}

/// State amplification `A(z)` and stationary variance factor of `method` on the
/// linear test equation.
fn linear_theory(method: Method, s: usize, eps: f64, z: f64) -> Result<(f64, f64)> {
    let unstable = || Error::Unstable { z, ell: 2.0 };
    match method {
        Method::SkTauRock | Method::PskTauRock => {
            let f = StabilityFunctions::new(s, eps)?;
            let ratio = if method == Method::SkTauRock {
                f.c_factor(z)?
            } else {
                f.c_bar_factor(z)?
            };
            Ok((f.a_poly(z), ratio))
        }
        Method::ImplicitTau => Ok((1.0 / (1.0 - z), 2.0 / (2.0 - z))),
        Method::TrapezoidalTau => Ok(((1.0 + z / 2.0) / (1.0 - z / 2.0), 1.0)),
        Method::ExplicitTau if z > -2.0 => Ok((1.0 + z, 2.0 / (2.0 + z))),
        Method::ExplicitTau => Err(unstable()),
        Method::Ssa | Method::PimpTau => Err(Error::InvalidArgument(format!(
            "no linear variance theory for {}",
            method.label()
        ))),
    }
}

/// Smallest `n` with `|a|^(2n) < 1e-6`.
pub fn burn_in_steps(a: f64) -> Result<usize> {
    let a = a.abs();
    if a >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "amplification {a} does not contract"
        )));
    }
    if a == 0.0 {
        return Ok(1);
    }
    let n = (1e-6f64.ln() / (2.0 * a.ln())).floor() as usize + 1;
    Ok(n.max(1))
}

/// Runs `n_samples` independent paths of `method` with `s` fixed stages from
/// the exact stationary mean for the burn-in, then compares the variance of
/// the final observations with the method's predicted factor.
#[allow(clippy::too_many_arguments)]
pub fn variance_ratio_check(
    method: Method,
    problem: &TestProblem,
    s: usize,
    eps: f64,
    tau: f64,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<VarianceCheck> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(
            "a variance check needs at least two samples".into(),
        ));
    }
    let z = tau * problem.lambda();
    let (a, predicted_ratio) = linear_theory(method, s, eps, z)?;
    let burn_in = burn_in_steps(a)?;
    let model = problem.model()?;
    let (exact_mean, exact_var) = problem.invariant_measure();
    let cfg = MethodConfig::new(method, tau)
        .with_eps(eps)
        .with_stages(StageRule::Fixed(s));
    let opts = EnsembleOptions {
        workers,
        histogram: false,
    };
    let stats = run_ensemble(
        &model.network,
        &cfg,
        &[exact_mean],
        burn_in as f64 * tau,
        n_samples,
        seed,
        &opts,
    )?;

    let mean = stats.mean[0];
    let var = stats.variance[0];
    if !var.is_finite() || var > 1e6 * exact_var {
        return Err(Error::Unstable { z, ell: f64::NAN });
    }
    let empirical_ratio = var / exact_var;
    let sd_ratio = predicted_ratio * (2.0 / (n_samples - 1) as f64).sqrt();
    let z_score = (empirical_ratio - predicted_ratio) / sd_ratio;
    let se = stats.std_error_mean[0];
    let mean_z_score = if se > 0.0 {
        (mean - exact_mean) / se
    } else {
        0.0
    };
    Ok(VarianceCheck {
        method,
        z,
        burn_in,
        n_samples,
        mean,
        mean_z_score,
        empirical_ratio,
        predicted_ratio,
        z_score,
    })
}
