//! Time integrators: exact SSA, explicit tau-leap, the stabilized
//! SK-/PSK-tau-ROCK pair and implicit/trapezoidal tau-leap baselines.
//!
//! The single-step functions operate on a [`StepperState`]; [`Simulation`]
//! drives them to a target time, estimating the spectral radius and choosing
//! the stage count on every stabilized step.

mod exact;
mod implicit;
mod stabilized;

pub use exact::{explicit_tau_step, ssa_step, SsaOutcome};
pub use implicit::{implicit_tau_step, pimp_postprocess, trapezoidal_tau_step};
pub use stabilized::{psk_postprocess, sk_stages, sk_tau_rock_step};

use std::fmt;
use std::str::FromStr;

use crate::chebyshev::{ChebyshevCoefficients, DEFAULT_EPS, MAX_STAGES};
use crate::network::ReactionNetwork;
use crate::spectral::{estimate_rho, SAFETY_FACTOR};
use crate::stability::select_stages;
use crate::{Error, Result, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Ssa,
    ExplicitTau,
    SkTauRock,
    PskTauRock,
    ImplicitTau,
    PimpTau,
    TrapezoidalTau,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Ssa,
        Method::ExplicitTau,
        Method::SkTauRock,
        Method::PskTauRock,
        Method::ImplicitTau,
        Method::PimpTau,
        Method::TrapezoidalTau,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ssa => "ssa",
            Method::ExplicitTau => "explicit_tau",
            Method::SkTauRock => "sk_tau_rock",
            Method::PskTauRock => "psk_tau_rock",
            Method::ImplicitTau => "implicit_tau",
            Method::PimpTau => "pimp_tau",
            Method::TrapezoidalTau => "trapezoidal_tau",
        }
    }

    /// Short label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Method::Ssa => "SSA",
            Method::ExplicitTau => "Tau",
            Method::SkTauRock => "SK",
            Method::PskTauRock => "PSK",
            Method::ImplicitTau => "Imp",
            Method::PimpTau => "PImp",
            Method::TrapezoidalTau => "Trap",
        }
    }

    pub fn is_stabilized(self) -> bool {
        matches!(self, Method::SkTauRock | Method::PskTauRock)
    }

    pub fn is_implicit(self) -> bool {
        matches!(
            self,
            Method::ImplicitTau | Method::PimpTau | Method::TrapezoidalTau
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown method `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// How a stabilized method picks its stage count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StageRule {
    /// From the power-method estimate of the spectral radius, every step.
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    /// Step size; ignored by the SSA.
    pub tau: f64,
    pub eps: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub stages: StageRule,
    /// Multiplier on the power-method estimate before choosing `s`.
    pub rho_safety: f64,
}

impl MethodConfig {
    pub fn new(method: Method, tau: f64) -> Self {
        MethodConfig {
            method,
            tau,
            eps: DEFAULT_EPS,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            stages: StageRule::Auto,
            rho_safety: SAFETY_FACTOR,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_stages(mut self, stages: StageRule) -> Self {
        self.stages = stages;
        self
    }

    pub fn with_rho_safety(mut self, factor: f64) -> Self {
        self.rho_safety = factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.method != Method::Ssa && !(self.tau.is_finite() && self.tau > 0.0) {
            return bad(format!("step size must be positive, got {}", self.tau));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return bad(format!(
                "damping must be finite and nonnegative, got {}",
                self.eps
            ));
        }
        if !(self.rho_safety.is_finite() && self.rho_safety >= 1.0) {
            return bad(format!(
                "spectral safety factor must be at least 1, got {}",
                self.rho_safety
            ));
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("Newton tolerance and iteration cap must be positive".into());
        }
        if let StageRule::Fixed(s) = self.stages {
            if s == 0 {
                return bad("stage count must be at least 1".into());
            }
            if s > MAX_STAGES {
                return Err(Error::StageCapExceeded {
                    required: s,
                    max: MAX_STAGES,
                });
            }
        }
        Ok(())
    }
}

/// Work done by one trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Counters {
    pub steps: u64,
    pub ssa_events: u64,
    pub stages: u64,
    pub drift_evals: u64,
    pub power_calls: u64,
    pub power_iterations: u64,
    pub newton_solves: u64,
    pub newton_iterations: u64,
}

impl Counters {
    pub fn merge(&mut self, other: &Counters) {
        self.steps += other.steps;
        self.ssa_events += other.ssa_events;
        self.stages += other.stages;
        self.drift_evals += other.drift_evals;
        self.power_calls += other.power_calls;
        self.power_iterations += other.power_iterations;
        self.newton_solves += other.newton_solves;
        self.newton_iterations += other.newton_iterations;
    }

    fn ratio(a: u64, b: u64) -> f64 {
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    /// Average stage count per stabilized step.
    pub fn mean_stages(&self) -> f64 {
        Self::ratio(self.stages, self.steps)
    }

    pub fn mean_power_iterations(&self) -> f64 {
        Self::ratio(self.power_iterations, self.power_calls)
    }

    pub fn mean_newton_iterations(&self) -> f64 {
        Self::ratio(self.newton_iterations, self.newton_solves)
    }
}

/// Mutable per-trajectory state.
#[derive(Clone, Debug)]
pub struct StepperState {
    pub t: f64,
    pub x: Vec<f64>,
    /// Drives the time stepping.
    pub rng: RngStream,
    /// Drives postprocessed observations, so observing never perturbs the path.
    pub obs_rng: RngStream,
    /// Power-method warm start.
    pub cached_eigvec: Option<Vec<f64>>,
    pub current_s: usize,
    pub counters: Counters,
    coeffs: Option<ChebyshevCoefficients>,
}

impl StepperState {
    pub fn new(x0: Vec<f64>, mut rng: RngStream) -> Self {
        let obs_rng = rng.fork();
        StepperState {
            t: 0.0,
            x: x0,
            rng,
            obs_rng,
            cached_eigvec: None,
            current_s: 0,
            counters: Counters::default(),
            coeffs: None,
        }
    }

    /// Coefficients of the most recent stabilized step.
    pub fn coefficients(&self) -> Option<&ChebyshevCoefficients> {
        self.coeffs.as_ref()
    }

    /// Takes the cached coefficients for `(s, eps)`, recomputing only when
    /// the pair changed.
    fn take_coefficients(&mut self, s: usize, eps: f64) -> Result<ChebyshevCoefficients> {
        match self.coeffs.take() {
            Some(c) if c.s == s && c.eps == eps => Ok(c),
            _ => ChebyshevCoefficients::new(s, eps),
        }
    }
}

/// One trajectory of one method on one network.
#[derive(Clone, Debug)]
pub struct Simulation<'a> {
    net: &'a ReactionNetwork,
    cfg: MethodConfig,
    state: StepperState,
    last_tau: f64,
    absorbed: bool,
}

impl<'a> Simulation<'a> {
    pub fn new(
        net: &'a ReactionNetwork,
        cfg: MethodConfig,
        x0: &[f64],
        rng: RngStream,
    ) -> Result<Self> {
        cfg.validate()?;
        net.check_state(x0)?;
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "initial state must be finite".into(),
            ));
        }
        let last_tau = cfg.tau;
        Ok(Simulation {
            net,
            cfg,
            state: StepperState::new(x0.to_vec(), rng),
            last_tau,
            absorbed: false,
        })
    }

    pub fn state(&self) -> &StepperState {
        &self.state
    }

    pub fn config(&self) -> &MethodConfig {
        &self.cfg
    }

    pub fn into_state(self) -> StepperState {
        self.state
    }

    /// Whether the SSA reached a state where nothing can fire.
    pub fn is_absorbed(&self) -> bool {
        self.absorbed
    }

    /// One step (or one SSA event) not passing `t_limit`. Returns `false`
    /// when the state is already at `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<bool> {
        let remaining = t_limit - self.state.t;
        if remaining <= 0.0 {
            return Ok(false);
        }
        if self.absorbed {
            self.state.t = t_limit;
            return Ok(true);
        }
        if self.cfg.method == Method::Ssa {
            if ssa_step(self.net, &mut self.state, t_limit)? == SsaOutcome::Absorbed {
                self.absorbed = true;
            }
            return Ok(true);
        }

        let tau = self.cfg.tau;
        // Rounding in the accumulated time must neither add a sliver step nor
        // drop the last one.
        if remaining <= 1e-9 * tau {
            self.state.t = t_limit;
            return Ok(false);
        }
        let last = remaining <= tau * (1.0 + 1e-9);
        let h = if last { remaining } else { tau };
        match self.cfg.method {
            Method::Ssa => unreachable!(),
            Method::ExplicitTau => explicit_tau_step(self.net, &mut self.state, h)?,
            Method::SkTauRock | Method::PskTauRock => self.stabilized_step(h)?,
            Method::ImplicitTau | Method::PimpTau => {
                implicit_tau_step(self.net, &mut self.state, h, &self.cfg)?
            }
            Method::TrapezoidalTau => {
                trapezoidal_tau_step(self.net, &mut self.state, h, &self.cfg)?
            }
        }
        self.last_tau = h;
        if last {
            self.state.t = t_limit;
        }
        if self.state.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: self.state.t });
        }
        Ok(true)
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.step(t)? {}
        Ok(())
    }

    fn stage_count(&mut self, tau: f64) -> Result<usize> {
        match self.cfg.stages {
            StageRule::Fixed(s) => Ok(s),
            StageRule::Auto => {
                let st = &mut self.state;
                let est = estimate_rho(self.net, &st.x, st.cached_eigvec.as_deref())?;
                st.counters.power_calls += 1;
                st.counters.power_iterations += est.iterations as u64;
                st.cached_eigvec = Some(est.eigvec);
                select_stages(
                    tau,
                    est.rho / SAFETY_FACTOR * self.cfg.rho_safety,
                    self.cfg.eps,
                )
            }
        }
    }

    fn stabilized_step(&mut self, tau: f64) -> Result<()> {
        let s = self.stage_count(tau)?;
        let coeffs = self.state.take_coefficients(s, self.cfg.eps)?;
        let result = sk_tau_rock_step(self.net, &mut self.state, tau, &coeffs);
        self.state.current_s = s;
        self.state.coeffs = Some(coeffs);
        result
    }

    /// The method's observation of the current state: `x + alpha Q(x, tau)`
    /// for PSK, ten short implicit steps for PImp, the state itself otherwise.
    pub fn observe(&mut self) -> Result<Vec<f64>> {
        match self.cfg.method {
            Method::PskTauRock => {
                let tau = self.last_tau;
                let coeffs = match self.state.coeffs.take() {
                    Some(c) => c,
                    None => {
                        let s = self.stage_count(tau)?;
                        ChebyshevCoefficients::new(s, self.cfg.eps)?
                    }
                };
                let st = &mut self.state;
                let obs = psk_postprocess(self.net, &st.x, tau, &coeffs, &mut st.obs_rng);
                st.coeffs = Some(coeffs);
                obs
            }
            Method::PimpTau => {
                let st = &mut self.state;
                let est = estimate_rho(self.net, &st.x, st.cached_eigvec.as_deref())?;
                st.cached_eigvec = Some(est.eigvec);
                let rho = est.rho / SAFETY_FACTOR;
                if rho > 0.0 {
                    pimp_postprocess(self.net, &st.x, rho, &self.cfg, &mut st.obs_rng)
                } else {
                    Ok(st.x.clone())
                }
            }
            _ => Ok(self.state.x.clone()),
        }
    }

    /// Advances through the increasing `times`, observing at each.
    pub fn observe_at(&mut self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t < self.state.t {
                return Err(Error::InvalidArgument(
                    "observation times must be nondecreasing".into(),
                ));
            }
            self.advance_to(t)?;
            out.push(self.observe()?);
        }
        Ok(out)
    }
}

/// Runs one trajectory to `t_end` and returns the final observation.
pub fn run_trajectory(
    net: &ReactionNetwork,
    cfg: &MethodConfig,
    x0: &[f64],
    t_end: f64,
    rng: RngStream,
) -> Result<Vec<f64>> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "final time must be positive, got {t_end}"
        )));
    }
    let mut sim = Simulation::new(net, cfg.clone(), x0, rng)?;
    sim.advance_to(t_end)?;
    sim.observe()
}
