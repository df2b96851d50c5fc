//! Chebyshev polynomials and the SK-tau-ROCK stage coefficients.

use crate::{Error, Result};

/// Largest stage count accepted anywhere in the library.
pub const MAX_STAGES: usize = 200;

/// Default damping parameter.
pub const DEFAULT_EPS: f64 = 0.05;

/// `T_n(x)` by the three-term recursion.
pub fn cheb_t(n: usize, x: f64) -> f64 {
    cheb_t_with_derivative(n, x).0
}

/// `(T_n(x), T_n'(x))`, the derivative from
/// `T_j' = 2 T_{j-1} + 2 x T_{j-1}' - T_{j-2}'`.
pub fn cheb_t_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut t0, mut t1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (t0, d0);
    }
    for _ in 1..n {
        let t2 = 2.0 * x * t1 - t0;
        let d2 = 2.0 * t1 + 2.0 * x * d1 - d0;
        (t0, t1) = (t1, t2);
        (d0, d1) = (d1, d2);
    }
    (t1, d1)
}

/// `U_n(x)`, second kind.
pub fn cheb_u(n: usize, x: f64) -> f64 {
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    if n == 0 {
        return u0;
    }
    for _ in 1..n {
        (u0, u1) = (u1, 2.0 * x * u1 - u0);
    }
    u1
}

/// `beta = 2 - 4 eps / 3`, the guaranteed stability-interval slope.
pub fn beta(eps: f64) -> f64 {
    2.0 - 4.0 * eps / 3.0
}

/// Length `2 omega0 / omega1` of the real stability interval.
pub fn stability_domain_size(s: usize, eps: f64) -> Result<f64> {
    let (w0, w1) = omegas(s, eps)?;
    Ok(2.0 * w0 / w1)
}

fn check(s: usize, eps: f64) -> Result<()> {
    if s < 1 {
        return Err(Error::InvalidArgument(
            "stage count must be at least 1".into(),
        ));
    }
    if s > MAX_STAGES {
        return Err(Error::StageCapExceeded {
            required: s,
            max: MAX_STAGES,
        });
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must be finite and nonnegative, got {eps}"
        )));
    }
    Ok(())
}

fn omegas(s: usize, eps: f64) -> Result<(f64, f64)> {
    check(s, eps)?;
    let w0 = 1.0 + eps / (s * s) as f64;
    let (t, dt) = cheb_t_with_derivative(s, w0);
    Ok((w0, t / dt))
}

/// Constants of one `s`-stage SK-tau-ROCK step with damping `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevCoefficients {
    pub s: usize,
    pub eps: f64,
    pub omega0: f64,
    pub omega1: f64,
    /// `mu[j - 1]` is `mu_j`; likewise for `nu` and `kappa`.
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Postprocessor gain `sqrt(omega1 / omega0) / 2`.
    pub alpha: f64,
}

impl ChebyshevCoefficients {
    pub fn new(s: usize, eps: f64) -> Result<Self> {
        let (w0, w1) = omegas(s, eps)?;
        let mut t = Vec::with_capacity(s + 1);
        t.push(1.0);
        t.push(w0);
        for j in 2..=s {
            t.push(2.0 * w0 * t[j - 1] - t[j - 2]);
        }
        let sf = s as f64;
        let mut mu = vec![w1 / w0];
        let mut nu = vec![sf * w1 / (2.0 * w0)];
        let mut kappa = vec![sf * w1 / w0];
        for j in 2..=s {
            mu.push(2.0 * w1 * t[j - 1] / t[j]);
            nu.push(2.0 * w0 * t[j - 1] / t[j]);
            kappa.push(-t[j - 2] / t[j]);
        }
        Ok(ChebyshevCoefficients {
            s,
            eps,
            omega0: w0,
            omega1: w1,
            mu,
            nu,
            kappa,
            alpha: 0.5 * (w1 / w0).sqrt(),
        })
    }

    /// `ell = 2 omega0 / omega1`.
    pub fn stability_domain_size(&self) -> f64 {
        2.0 * self.omega0 / self.omega1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn first_kind_values() {
        assert_eq!(cheb_t(0, 0.7), 1.0);
        assert_eq!(cheb_t(1, 0.3), 0.3);
        assert_eq!(cheb_t(3, 2.0), 26.0);
        assert_eq!(cheb_t_with_derivative(5, 1.0), (1.0, 25.0));
        assert_eq!(cheb_t_with_derivative(0, 3.0), (1.0, 0.0));
        // 4x^3 - 3x and its derivative 12x^2 - 3
        let (t, d) = cheb_t_with_derivative(3, -0.4);
        assert!(close(t, 4.0 * -0.064 + 1.2, 1e-15));
        assert!(close(d, 12.0 * 0.16 - 3.0, 1e-15));
    }

    #[test]
    fn second_kind_values() {
        assert_eq!(cheb_u(0, 0.9), 1.0);
        assert_eq!(cheb_u(1, 0.5), 1.0);
        assert_eq!(cheb_u(2, 1.0), 3.0);
        assert_eq!(cheb_u(7, 1.0), 8.0);
        let (x, s) = (0.7, 6);
        let lhs = (1.0 - x * x) * cheb_u(s - 1, x).powi(2) + cheb_t(s, x).powi(2);
        assert!(close(lhs, 1.0, 1e-14));
    }

    #[test]
    fn undamped_coefficients() {
        for s in 1..=20 {
            let c = ChebyshevCoefficients::new(s, 0.0).unwrap();
            let s2 = (s * s) as f64;
            assert_eq!(c.omega0, 1.0);
            assert!(close(c.omega1, 1.0 / s2, 1e-14));
            assert!(close(c.alpha, 0.5 / s as f64, 1e-14));
            assert!(close(c.stability_domain_size(), 2.0 * s2, 1e-12));
        }
    }

    #[test]
    fn single_stage() {
        for eps in [0.0, 0.05, 1.0] {
            let c = ChebyshevCoefficients::new(1, eps).unwrap();
            assert_eq!(c.omega1, c.omega0);
            assert_eq!(
                (c.mu[0], c.nu[0], c.kappa[0], c.alpha),
                (1.0, 0.5, 1.0, 0.5)
            );
        }
        assert_eq!(stability_domain_size(1, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn consistency_of_later_stages() {
        let c = ChebyshevCoefficients::new(5, 0.05).unwrap();
        for j in 1..5 {
            assert!((c.nu[j] + c.kappa[j] - 1.0).abs() < 1e-15);
        }
        let c = ChebyshevCoefficients::new(10, 0.05).unwrap();
        assert!(c.stability_domain_size() > beta(0.05) * 100.0);
    }

    #[test]
    fn argument_errors() {
        assert!(ChebyshevCoefficients::new(0, 0.05).is_err());
        assert!(matches!(
            ChebyshevCoefficients::new(201, 0.05),
            Err(Error::StageCapExceeded {
                required: 201,
                max: 200
            })
        ));
        assert!(ChebyshevCoefficients::new(3, -0.1).is_err());
        assert!(ChebyshevCoefficients::new(3, f64::NAN).is_err());
        assert!(ChebyshevCoefficients::new(200, 0.05)
            .unwrap()
            .mu
            .iter()
            .all(|v| v.is_finite()));
    }
}
