//! Spectral radius of the drift Jacobian by a matrix-free power method.

use nalgebra::DMatrix;

use crate::network::ReactionNetwork;
use crate::Result;

/// Multiplier applied to the converged power-method estimate.
pub const SAFETY_FACTOR: f64 = 1.05;
/// Relative change of `|Jv|` below which the iteration stops.
pub const RELATIVE_TOLERANCE: f64 = 0.05;
pub const MAX_ITERATIONS: usize = 50;
/// `|v_new . v|` above which the direction counts as converged.
const ALIGNMENT: f64 = 0.999;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEstimate {
    /// Spectral radius estimate, including [`SAFETY_FACTOR`].
    pub rho: f64,
    /// Unit-norm dominant direction, zero on buffered species.
    pub eigvec: Vec<f64>,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn initial_vector(net: &ReactionNetwork) -> Vec<f64> {
    (0..net.n_species())
        .map(|i| {
            if net.is_buffered(i) {
                0.0
            } else {
                // deterministic jitter keeps the start off any symmetric nullspace
                1.0 + 1e-3 * (((i * 7919) % 13) as f64 / 13.0 - 0.5)
            }
        })
        .collect()
}

/// Power iteration on `v <- Jv / |Jv|` with
/// `Jv ~ (f(x + delta v) - f(x)) / delta`.
pub fn estimate_rho(
    net: &ReactionNetwork,
    x: &[f64],
    warm_start: Option<&[f64]>,
) -> Result<SpectralEstimate> {
    net.check_state(x)?;
    let n = x.len();
    let mut v = match warm_start {
        Some(w) if w.len() == n => {
            let mut w = w.to_vec();
            for (i, wi) in w.iter_mut().enumerate() {
                if net.is_buffered(i) || !wi.is_finite() {
                    *wi = 0.0;
                }
            }
            if norm(&w) > 0.0 {
                w
            } else {
                initial_vector(net)
            }
        }
        _ => initial_vector(net),
    };
    let nv = norm(&v);
    if nv == 0.0 {
        return Ok(SpectralEstimate {
            rho: 0.0,
            eigvec: v,
            iterations: 0,
        });
    }
    v.iter_mut().for_each(|a| *a /= nv);

    let x_norm = norm(
        &x.iter()
            .enumerate()
            .map(|(i, &a)| if net.is_buffered(i) { 0.0 } else { a })
            .collect::<Vec<_>>(),
    );
    let delta = f64::EPSILON.sqrt() * (1.0 + x_norm);
    let mut fx = vec![0.0; n];
    net.drift_into(x, &mut fx);
    let mut y = vec![0.0; n];
    let mut fy = vec![0.0; n];
    let mut previous = f64::NAN;
    let mut r = 0.0;
    for iteration in 1..=MAX_ITERATIONS {
        for i in 0..n {
            y[i] = x[i] + delta * v[i];
        }
        net.drift_into(&y, &mut fy);
        let jv: Vec<f64> = fy.iter().zip(&fx).map(|(a, b)| (a - b) / delta).collect();
        r = norm(&jv);
        if !(r > 1e-12) {
            return Ok(SpectralEstimate {
                rho: 0.0,
                eigvec: v,
                iterations: iteration,
            });
        }
        let v_new: Vec<f64> = jv.iter().map(|a| a / r).collect();
        let aligned = v_new.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() >= ALIGNMENT;
        let settled = (r - previous).abs() < RELATIVE_TOLERANCE * r;
        v = v_new;
        if aligned || settled {
            return Ok(SpectralEstimate {
                rho: SAFETY_FACTOR * r,
                eigvec: v,
                iterations: iteration,
            });
        }
        previous = r;
    }
    Ok(SpectralEstimate {
        rho: SAFETY_FACTOR * r,
        eigvec: v,
        iterations: MAX_ITERATIONS,
    })
}

/// Exact mass-action Jacobian `df/dx = nu da/dx`.
pub fn analytic_jacobian(net: &ReactionNetwork, x: &[f64]) -> Result<DMatrix<f64>> {
    net.check_state(x)?;
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut grad = vec![0.0; n];
    for j in 0..net.n_reactions() {
        let change = net.state_change(j);
        if change.is_empty() {
            continue;
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        net.add_propensity_gradient(j, x, 1.0, &mut grad);
        for &(i, v) in change {
            for (k, g) in grad.iter().enumerate() {
                jac[(i, k)] += v * g;
            }
        }
    }
    Ok(jac)
}

/// Largest eigenvalue modulus of a dense square matrix.
pub fn dense_spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{builtin_model, BuiltinModel, ModelParams, NetworkBuilder};

    #[test]
    fn scalar_test_equation_converges_at_once() {
        let params = ModelParams {
            rates: Some(vec![9.0, 1.0]),
            total: Some(1000.0),
            ..Default::default()
        };
        let net = builtin_model(BuiltinModel::ReversibleIsomerization, &params)
            .unwrap()
            .network;
        let est = estimate_rho(&net, &[123.0], None).unwrap();
        assert_eq!(est.iterations, 1);
        assert!((est.rho - 1.05 * 10.0).abs() < 1e-5, "{}", est.rho);
        let jac = analytic_jacobian(&net, &[123.0]).unwrap();
        assert_eq!(jac.shape(), (1, 1));
        assert!((jac[(0, 0)] + 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_drift_has_zero_radius() {
        let params = ModelParams {
            rates: Some(vec![0.0; 3]),
            ..Default::default()
        };
        let model = builtin_model(BuiltinModel::MichaelisMenten, &params).unwrap();
        let est = estimate_rho(&model.network, &model.initial, None).unwrap();
        assert_eq!(est.rho, 0.0);
    }

    #[test]
    fn michaelis_menten_against_dense_eigensolve() {
        let model = builtin_model(BuiltinModel::MichaelisMenten, &ModelParams::default()).unwrap();
        let truth =
            dense_spectral_radius(&analytic_jacobian(&model.network, &model.initial).unwrap());
        let est = estimate_rho(&model.network, &model.initial, None).unwrap();
        let ratio = est.rho / SAFETY_FACTOR / truth;
        assert!(
            (ratio - 1.0).abs() < 0.1,
            "estimate {} truth {truth}",
            est.rho
        );
        let norm: f64 = est.eigvec.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_reuses_direction() {
        let model = builtin_model(BuiltinModel::GeneticLoop, &ModelParams::default()).unwrap();
        let x = [30.0, 10.0, 15.0, 5.0, 12.0];
        let cold = estimate_rho(&model.network, &x, None).unwrap();
        let warm = estimate_rho(&model.network, &x, Some(&cold.eigvec)).unwrap();
        assert!(warm.iterations <= 2, "{}", warm.iterations);
        assert!((warm.rho / cold.rho - 1.0).abs() < 0.1);
    }

    #[test]
    fn buffered_components_are_masked() {
        let model = builtin_model(BuiltinModel::Schlogl, &ModelParams::default()).unwrap();
        let est = estimate_rho(&model.network, &model.initial, None).unwrap();
        assert_eq!(&est.eigvec[1..], &[0.0, 0.0]);
        let jac = analytic_jacobian(&model.network, &model.initial).unwrap();
        assert!((est.rho / SAFETY_FACTOR - jac[(0, 0)].abs()).abs() < 1e-3 * jac[(0, 0)].abs());
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let net = NetworkBuilder::new()
            .species("A")
            .species("B")
            .reaction(0.3, &[("A", 2), ("B", 1)], &[("B", 2)])
            .reaction(2.0, &[("B", 1)], &[("A", 1)])
            .build()
            .unwrap();
        let x = [17.0, 9.0];
        let jac = analytic_jacobian(&net, &x).unwrap();
        for k in 0..2 {
            let h = 1e-4;
            let (mut xp, mut xm) = (x, x);
            xp[k] += h;
            xm[k] -= h;
            let (fp, fm) = (net.drift(&xp).unwrap(), net.drift(&xm).unwrap());
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!(
                    (fd - jac[(i, k)]).abs() < 1e-6 * (1.0 + fd.abs()),
                    "{i},{k}: {fd} vs {}",
                    jac[(i, k)]
                );
            }
        }
    }
}
