use super::StepperState;
use crate::chebyshev::ChebyshevCoefficients;
use crate::network::{check_tau, ReactionNetwork};
use crate::{Error, Result, RngStream};

/// The SK-tau-ROCK stage recursion for a given noise draw `q`:
///
/// ```text
/// K_0 = x
/// K_1 = K_0 + mu_1 tau f(K_0 + nu_1 q) + kappa_1 q
/// K_j = nu_j K_{j-1} + kappa_j K_{j-2} + mu_j tau f(K_{j-1}),  j = 2..s
/// ```
///
/// `drift(y, out)` writes `f(y)` into `out` and is called exactly `s` times.
pub fn sk_stages<F>(
    coeffs: &ChebyshevCoefficients,
    tau: f64,
    x: &[f64],
    q: &[f64],
    mut drift: F,
) -> Vec<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut f = vec![0.0; n];
    let mut k_older = x.to_vec();
    let mut k_old: Vec<f64> = x
        .iter()
        .zip(q)
        .map(|(xi, qi)| xi + coeffs.nu[0] * qi)
        .collect();
    drift(&k_old, &mut f);
    for i in 0..n {
        k_old[i] = x[i] + coeffs.mu[0] * tau * f[i] + coeffs.kappa[0] * q[i];
    }
    let mut k_new = vec![0.0; n];
    for j in 1..coeffs.s {
        drift(&k_old, &mut f);
        let (nu, kappa, mu_tau) = (coeffs.nu[j], coeffs.kappa[j], coeffs.mu[j] * tau);
        for i in 0..n {
            k_new[i] = nu * k_old[i] + kappa * k_older[i] + mu_tau * f[i];
        }
        std::mem::swap(&mut k_older, &mut k_old);
        std::mem::swap(&mut k_old, &mut k_new);
    }
    k_old
}

/// One SK-tau-ROCK step: a single noise draw `Q(x, tau)` followed by the
/// `s`-stage recursion.
pub fn sk_tau_rock_step(
    net: &ReactionNetwork,
    state: &mut StepperState,
    tau: f64,
    coeffs: &ChebyshevCoefficients,
) -> Result<()> {
    net.check_state(&state.x)?;
    check_tau(tau)?;
    let mut q = vec![0.0; state.x.len()];
    net.noise_into(&state.x, tau, &mut state.rng, &mut q);
    let mut next = sk_stages(coeffs, tau, &state.x, &q, |y, out| net.drift_into(y, out));
    net.restore_buffered(&state.x, &mut next);
    state.x = next;
    state.t += tau;
    state.counters.steps += 1;
    state.counters.stages += coeffs.s as u64;
    state.counters.drift_evals += coeffs.s as u64;
    Ok(())
}

/// Postprocessed observation `x + alpha Q(x, tau)`; the marching state is
/// not touched.
pub fn psk_postprocess(
    net: &ReactionNetwork,
    x: &[f64],
    tau: f64,
    coeffs: &ChebyshevCoefficients,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    net.check_state(x)?;
    check_tau(tau)?;
    if !coeffs.alpha.is_finite() {
        return Err(Error::InvalidArgument(
            "postprocessor gain must be finite".into(),
        ));
    }
    let mut q = vec![0.0; x.len()];
    net.noise_into(x, tau, rng, &mut q);
    Ok(x.iter()
        .zip(&q)
        .map(|(xi, qi)| xi + coeffs.alpha * qi)
        .collect())
}
