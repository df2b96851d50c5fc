//! Linear stability and variance amplification of the stabilized tau-leap.
//!
//! On the test equation `dX = (lambda X + c2 X^T) dt + noise` with
//! `z = tau * lambda`, one SK-tau-ROCK step maps the state by `A_s(z)` and the
//! noise draw by `B_s(z)`. The stationary variance of the scheme is
//! `c_s(z) Var(X_inf)`; with postprocessing it is `c̄_s(z) Var(X_inf)`.

use std::fmt::Write as _;

use crate::chebyshev::{beta, cheb_t, cheb_u, ChebyshevCoefficients, MAX_STAGES};
use crate::network::{builtin_model, BuiltinModel, Model, ModelParams};
use crate::{Error, Result};

/// The stability functions of a fixed `(s, eps)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityFunctions {
    pub s: usize,
    pub eps: f64,
    omega0: f64,
    omega1: f64,
    alpha: f64,
    t_norm: f64,
    u_norm: f64,
}

impl StabilityFunctions {
    pub fn new(s: usize, eps: f64) -> Result<Self> {
        Ok(Self::from_coefficients(&ChebyshevCoefficients::new(
            s, eps,
        )?))
    }

    pub fn from_coefficients(c: &ChebyshevCoefficients) -> Self {
        StabilityFunctions {
            s: c.s,
            eps: c.eps,
            omega0: c.omega0,
            omega1: c.omega1,
            alpha: c.alpha,
            t_norm: cheb_t(c.s, c.omega0),
            u_norm: cheb_u(c.s - 1, c.omega0),
        }
    }

    /// `ell = 2 omega0 / omega1`.
    pub fn ell(&self) -> f64 {
        2.0 * self.omega0 / self.omega1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `A_s(z) = T_s(omega0 + omega1 z) / T_s(omega0)`.
    pub fn a_poly(&self, z: f64) -> f64 {
        cheb_t(self.s, self.omega0 + self.omega1 * z) / self.t_norm
    }

    /// `B_s(z) = U_{s-1}(omega0 + omega1 z) / U_{s-1}(omega0) * d_s(z)`.
    pub fn b_poly(&self, z: f64) -> f64 {
        cheb_u(self.s - 1, self.omega0 + self.omega1 * z) / self.u_norm * self.d_affine(z)
    }

    /// `d_s(z) = 1 + z / ell`.
    pub fn d_affine(&self, z: f64) -> f64 {
        1.0 + self.omega1 * z / (2.0 * self.omega0)
    }

    /// `c_s(z) = -2 z B_s(z)^2 / (1 - A_s(z)^2)` for `-ell <= z <= 0`.
    pub fn c_factor(&self, z: f64) -> Result<f64> {
        let ell = self.ell();
        if !z.is_finite() || z > 0.0 || z < -ell * (1.0 + 1e-12) {
            return Err(Error::Unstable { z, ell });
        }
        if z.abs() < 1e-10 {
            return Ok(1.0);
        }
        if (z + ell).abs() <= 1e-12 * ell {
            return Ok(0.0);
        }
        let a = self.a_poly(z);
        let denom = 1.0 - a * a;
        if denom < 1e-14 {
            return Err(Error::DegenerateAmplification { z });
        }
        let b = self.b_poly(z);
        Ok(-2.0 * z * b * b / denom)
    }

    /// `c̄_s(z) = c_s(z) - 2 alpha^2 z`.
    pub fn c_bar_factor(&self, z: f64) -> Result<f64> {
        Ok(self.c_factor(z)? - 2.0 * self.alpha * self.alpha * z)
    }
}

/// Stage count for a step: the smallest `s` with `tau rho <= beta s^2`, plus
/// one as a safety margin.
pub fn select_stages(tau: f64, rho: f64, eps: f64) -> Result<usize> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {tau}"
        )));
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spectral radius must be finite and nonnegative, got {rho}"
        )));
    }
    let b = beta(eps);
    let x = tau * rho;
    let cap = (MAX_STAGES as f64 + 1.0).powi(2);
    if x / b > cap {
        let required = ((x / b).sqrt().ceil() as usize).saturating_add(1);
        return Err(Error::StageCapExceeded {
            required,
            max: MAX_STAGES,
        });
    }
    let mut base = (x / b).sqrt().ceil() as usize;
    while base > 0 && x <= b * ((base - 1) * (base - 1)) as f64 {
        base -= 1;
    }
    while x > b * (base * base) as f64 {
        base += 1;
    }
    let s = (base + 1).max(1);
    if s > MAX_STAGES {
        return Err(Error::StageCapExceeded {
            required: s,
            max: MAX_STAGES,
        });
    }
    Ok(s)
}

/// The reversible isomerization `S1 <-> S2` used as a linear test problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestProblem {
    pub c1: f64,
    pub c2: f64,
    pub x_total: f64,
}

impl TestProblem {
    pub fn new(c1: f64, c2: f64, x_total: f64) -> Result<Self> {
        if !(c1.is_finite() && c1 > 0.0) || !(c2.is_finite() && c2 >= 0.0) {
            return Err(Error::InvalidArgument(
                "test problem needs c1 > 0 and c2 >= 0".into(),
            ));
        }
        if !(x_total.is_finite() && x_total > 0.0) {
            return Err(Error::InvalidArgument(
                "test problem needs a positive total".into(),
            ));
        }
        Ok(TestProblem { c1, c2, x_total })
    }

    /// The single Jacobian eigenvalue `-(c1 + c2)`.
    pub fn lambda(&self) -> f64 {
        -(self.c1 + self.c2)
    }

    pub fn rho(&self) -> f64 {
        self.c1 + self.c2
    }

    /// Mean and variance of the binomial stationary law.
    pub fn invariant_measure(&self) -> (f64, f64) {
        let l = self.lambda();
        (
            self.c2 * self.x_total / -l,
            self.c1 * self.c2 * self.x_total / (l * l),
        )
    }

    /// The network with `X^T` molecules, all starting as `S1`.
    pub fn model(&self) -> Result<Model> {
        let params = ModelParams {
            rates: Some(vec![self.c1, self.c2]),
            total: Some(self.x_total),
            initial: None,
        };
        builtin_model(BuiltinModel::ReversibleIsomerization, &params)
    }
}

/// The stability functions sampled on a uniform grid of `[-ell, 0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityCurve {
    pub s: usize,
    pub eps: f64,
    pub ell: f64,
    pub z: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub c_bar: Vec<f64>,
    pub d: Vec<f64>,
}

impl StabilityCurve {
    pub const DEFAULT_POINTS: usize = 2000;

    pub fn sample(s: usize, eps: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument(
                "a stability curve needs at least two grid points".into(),
            ));
        }
        let f = StabilityFunctions::new(s, eps)?;
        let ell = f.ell();
        let n = points - 1;
        let z: Vec<f64> = (0..=n)
            .map(|k| {
                if k == n {
                    0.0
                } else {
                    -ell + ell * k as f64 / n as f64
                }
            })
            .collect();
        // Points where |A| = 1 inside the interval (eps = 0 only) are removable
        // singularities of c; bridge them by the neighbouring average.
        let c_at = |zk: f64| -> Result<f64> {
            match f.c_factor(zk) {
                Err(Error::DegenerateAmplification { .. }) => {
                    let h = 1e-6 * ell;
                    Ok(0.5 * (f.c_factor(zk - h)? + f.c_factor(zk + h)?))
                }
                other => other,
            }
        };
        let c = z.iter().map(|&zk| c_at(zk)).collect::<Result<Vec<_>>>()?;
        let two_alpha2 = 2.0 * f.alpha() * f.alpha();
        Ok(StabilityCurve {
            s,
            eps,
            ell,
            a: z.iter().map(|&zk| f.a_poly(zk)).collect(),
            b: z.iter().map(|&zk| f.b_poly(zk)).collect(),
            c_bar: c
                .iter()
                .zip(&z)
                .map(|(ck, zk)| ck - two_alpha2 * zk)
                .collect(),
            d: z.iter().map(|&zk| f.d_affine(zk)).collect(),
            c,
            z,
        })
    }

    /// CSV with a `# ...` comment line carrying `s`, `eps` and `ell`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.z.len() + 2));
        let _ = writeln!(out, "# s={} eps={} ell={}", self.s, self.eps, self.ell);
        out.push_str("z,A,B,c,c_bar,d\n");
        for k in 0..self.z.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.z[k], self.a[k], self.b[k], self.c[k], self.c_bar[k], self.d[k]
            );
        }
        out
    }
}
