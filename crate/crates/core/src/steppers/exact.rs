use super::StepperState;
use crate::network::{check_tau, Eval, ReactionNetwork};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsaOutcome {
    /// Reaction `j` fired.
    Fired(usize),
    /// The next event would fall after the horizon; time was moved to it.
    ReachedHorizon,
    /// No reaction can fire; time was moved to the horizon.
    Absorbed,
}

/// One event of the stochastic simulation algorithm, or the move to
/// `horizon` if the next event falls after it.
pub fn ssa_step(
    net: &ReactionNetwork,
    state: &mut StepperState,
    horizon: f64,
) -> Result<SsaOutcome> {
    net.check_state(&state.x)?;
    let m = net.n_reactions();
    let a0: f64 = (0..m)
        .map(|j| net.propensity(j, &state.x, Eval::Clamped))
        .sum();
    if !(a0 > 0.0) {
        state.t = state.t.max(horizon);
        return Ok(SsaOutcome::Absorbed);
    }
    let dt = state.rng.exp1() / a0;
    if state.t + dt > horizon {
        // exponential waiting times are memoryless, so stopping here is exact
        state.t = horizon;
        return Ok(SsaOutcome::ReachedHorizon);
    }
    let target = state.rng.uniform() * a0;
    let mut acc = 0.0;
    let mut chosen = None;
    for j in 0..m {
        let a = net.propensity(j, &state.x, Eval::Clamped);
        if a > 0.0 {
            acc += a;
            chosen = Some(j);
            if target < acc {
                break;
            }
        }
    }
    let j = chosen.expect("a positive total propensity has a positive term");
    for &(i, v) in net.state_change(j) {
        state.x[i] += v;
    }
    state.t += dt;
    state.counters.ssa_events += 1;
    Ok(SsaOutcome::Fired(j))
}

/// `x <- x + sum_j nu_j P_j(a_j(|x|) tau)`.
pub fn explicit_tau_step(net: &ReactionNetwork, state: &mut StepperState, tau: f64) -> Result<()> {
    net.check_state(&state.x)?;
    check_tau(tau)?;
    let mut inc = vec![0.0; state.x.len()];
    net.poisson_increment_into(&state.x, tau, &mut state.rng, &mut inc);
    for (x, d) in state.x.iter_mut().zip(&inc) {
        *x += d;
    }
    state.t += tau;
    state.counters.steps += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkBuilder;
    use crate::RngStream;

    #[test]
    fn birth_process_counts() {
        let c = 3.0;
        let net = NetworkBuilder::new()
            .species("S")
            .reaction(c, &[], &[("S", 1)])
            .build()
            .unwrap();
        let t_end = 50.0;
        let mut total = 0.0;
        let mut waits = 0.0;
        let mut events = 0u64;
        let runs = 400;
        for k in 0..runs {
            let mut st = StepperState::new(vec![0.0], RngStream::new(11, k));
            let mut last = 0.0;
            while let SsaOutcome::Fired(_) = ssa_step(&net, &mut st, t_end).unwrap() {
                waits += st.t - last;
                last = st.t;
                events += 1;
            }
            total += st.x[0];
        }
        let mean = total / runs as f64;
        // Poisson(150) mean over 400 runs: SE ~ 0.61
        assert!(
            (mean - c * t_end).abs() < 4.0 * (c * t_end / runs as f64).sqrt(),
            "{mean}"
        );
        let mean_wait = waits / events as f64;
        assert!((mean_wait - 1.0 / c).abs() < 0.01, "{mean_wait}");
    }

    #[test]
    fn dead_state_is_absorbed() {
        let net = NetworkBuilder::new()
            .species("A")
            .reaction(1.0, &[("A", 1)], &[])
            .build()
            .unwrap();
        let mut st = StepperState::new(vec![0.0], RngStream::new(0, 0));
        assert_eq!(ssa_step(&net, &mut st, 5.0).unwrap(), SsaOutcome::Absorbed);
        assert_eq!(st.t, 5.0);
    }

    #[test]
    fn explicit_leap_is_drift_plus_noise() {
        let model = crate::network::builtin_model(
            crate::network::BuiltinModel::GeneticLoop,
            &crate::network::ModelParams::default(),
        )
        .unwrap();
        let net = &model.network;
        let x = vec![31.0, 7.0, 12.0, 8.0, 40.0];
        let tau = 0.05;
        for k in 0..50 {
            let mut st = StepperState::new(x.clone(), RngStream::new(21, k));
            let mut rng = st.rng.clone();
            explicit_tau_step(net, &mut st, tau).unwrap();
            let f = net.drift(&x).unwrap();
            let q = net.noise_q(&x, tau, &mut rng).unwrap();
            for i in 0..x.len() {
                let em = x[i] + tau * f[i] + q[i];
                assert!((st.x[i] - em).abs() < 1e-9, "{i}: {} vs {em}", st.x[i]);
                assert_eq!(st.x[i].fract(), 0.0);
            }
        }
    }

    #[test]
    fn nothing_to_fire_leaves_state() {
        let net = NetworkBuilder::new()
            .species("A")
            .reaction(1.0, &[("A", 2)], &[])
            .build()
            .unwrap();
        let mut st = StepperState::new(vec![1.0], RngStream::new(0, 0));
        explicit_tau_step(&net, &mut st, 10.0).unwrap();
        assert_eq!(st.x, vec![1.0]);
    }
}
