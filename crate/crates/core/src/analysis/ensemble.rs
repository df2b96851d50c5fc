use std::time::Instant;

use rayon::prelude::*;

use super::stats::{EnsembleStats, MomentAccumulator};
use crate::network::ReactionNetwork;
use crate::steppers::{Counters, MethodConfig, Simulation};
use crate::{Error, Result, RngStream};

/// Largest tolerated fraction of failed trajectories.
pub const MAX_FAILURE_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnsembleOptions {
    /// Worker threads: 0 uses the global pool, 1 runs sequentially.
    pub workers: usize,
    /// Keep per-species unit-bin histograms.
    pub histogram: bool,
}

/// Moments at each observation time, plus bookkeeping.
#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    /// One entry per observation time.
    pub stats: Vec<EnsembleStats>,
    pub failed: usize,
    pub counters: Counters,
    /// Wall-clock seconds for the whole ensemble.
    pub seconds: f64,
}

type Outcome = std::result::Result<(Vec<Vec<f64>>, Counters), Error>;

fn one_trajectory(
    net: &ReactionNetwork,
    cfg: &MethodConfig,
    x0: &[f64],
    times: &[f64],
    seed: u64,
    index: u64,
) -> Outcome {
    let mut sim = Simulation::new(net, cfg.clone(), x0, RngStream::new(seed, index))?;
    let obs = sim.observe_at(times)?;
    Ok((obs, sim.into_state().counters))
}

/// Runs `n_samples` trajectories keyed `(seed, index)` and observes each at
/// `times`. Results are merged in trajectory order, so the output does not
/// depend on the worker count.
pub fn run_ensemble_at(
    net: &ReactionNetwork,
    cfg: &MethodConfig,
    x0: &[f64],
    times: &[f64],
    n_samples: usize,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "an ensemble needs at least one sample".into(),
        ));
    }
    if times.is_empty()
        || times.iter().any(|t| !(t.is_finite() && *t >= 0.0))
        || times.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::InvalidArgument(
            "observation times must be finite, nonnegative and sorted".into(),
        ));
    }
    cfg.validate()?;
    net.check_state(x0)?;

    let start = Instant::now();
    let run = |i: usize| one_trajectory(net, cfg, x0, times, seed, i as u64);
    // Chunked so the ordered buffer stays bounded for large ensembles.
    const CHUNK: usize = 4096;
    let mut accs: Vec<MomentAccumulator> = times
        .iter()
        .map(|_| MomentAccumulator::new(x0.len(), opts.histogram))
        .collect();
    let mut counters = Counters::default();
    let mut failed = 0;
    let mut first_failure: Option<String> = None;
    let mut consume = |outcomes: Vec<Outcome>| {
        for o in outcomes {
            match o {
                Ok((obs, c)) => {
                    for (acc, x) in accs.iter_mut().zip(&obs) {
                        acc.push(x);
                    }
                    counters.merge(&c);
                }
                Err(e) => {
                    failed += 1;
                    first_failure.get_or_insert_with(|| e.to_string());
                }
            }
        }
    };

    let pool = if opts.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.workers)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?,
        )
    } else {
        None
    };
    for lo in (0..n_samples).step_by(CHUNK) {
        let hi = (lo + CHUNK).min(n_samples);
        let outcomes: Vec<Outcome> = match (&pool, opts.workers) {
            (_, 1) => (lo..hi).map(run).collect(),
            (Some(p), _) => p.install(|| (lo..hi).into_par_iter().map(run).collect()),
            (None, _) => (lo..hi).into_par_iter().map(run).collect(),
        };
        consume(outcomes);
    }

    if failed as f64 > MAX_FAILURE_FRACTION * n_samples as f64 || failed == n_samples {
        return Err(Error::TooManyFailures {
            failed,
            total: n_samples,
            first: first_failure.unwrap_or_default(),
        });
    }
    Ok(EnsembleResult {
        times: times.to_vec(),
        stats: accs.into_iter().map(MomentAccumulator::finish).collect(),
        failed,
        counters,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Ensemble statistics of the observation at `t_end`.
pub fn run_ensemble(
    net: &ReactionNetwork,
    cfg: &MethodConfig,
    x0: &[f64],
    t_end: f64,
    n_samples: usize,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleStats> {
    let mut r = run_ensemble_at(net, cfg, x0, &[t_end], n_samples, seed, opts)?;
    Ok(r.stats.pop().expect("one observation time"))
}
