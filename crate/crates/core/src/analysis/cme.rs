//! Transient master-equation solution for networks with a single free species,
//! used as an exact reference distribution.

use super::pdf::EmpiricalPdf;
use crate::network::ReactionNetwork;
use crate::{Error, Result};

/// Poisson weights below `exp(-LOG_CUTOFF)` are skipped.
const LOG_CUTOFF: f64 = 50.0;
const PROBABILITY_FLOOR: f64 = 1e-300;

/// Distribution of the single non-buffered species at time `t`, by
/// uniformization on the truncated state space `0..=max_state`. Jumps that
/// would leave the truncated space are suppressed, so mass is conserved.
///
/// Returns the pdf and the probability at `max_state`, which bounds the
/// truncation error.
pub fn cme_transient_1d(
    net: &ReactionNetwork,
    x0: &[f64],
    t: f64,
    max_state: usize,
) -> Result<(EmpiricalPdf, f64)> {
    net.check_state(x0)?;
    let free: Vec<usize> = (0..net.n_species())
        .filter(|&i| !net.is_buffered(i))
        .collect();
    let [i] = free[..] else {
        return Err(Error::InvalidArgument(format!(
            "the master-equation solver needs exactly one free species, found {}",
            free.len()
        )));
    };
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    let start = x0[i];
    if start.fract() != 0.0 || start < 0.0 || start > max_state as f64 {
        return Err(Error::InvalidArgument(format!(
            "initial count {start} is not a state in 0..={max_state}"
        )));
    }

    // transitions[k] = (target, rate)
    let n_states = max_state + 1;
    let mut transitions: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_states];
    let mut x = x0.to_vec();
    let mut max_out: f64 = 0.0;
    for (k, out) in transitions.iter_mut().enumerate() {
        x[i] = k as f64;
        let a = net.propensities(&x)?;
        let mut total = 0.0;
        for (j, &aj) in a.iter().enumerate() {
            let jump: f64 = net
                .state_change(j)
                .iter()
                .filter(|(s, _)| *s == i)
                .map(|(_, v)| v)
                .sum();
            if aj <= 0.0 || jump == 0.0 {
                continue;
            }
            let target = k as f64 + jump;
            if target < 0.0 || target > max_state as f64 {
                continue;
            }
            out.push((target as usize, aj));
            total += aj;
        }
        max_out = max_out.max(total);
    }

    let mut p = vec![0.0; n_states];
    p[start as usize] = 1.0;
    if max_out > 0.0 && t > 0.0 {
        let lambda = max_out;
        let lt = lambda * t;
        let mut v = p.clone();
        let mut next = vec![0.0; n_states];
        let mut acc = vec![0.0; n_states];
        let mut log_w = -lt;
        let mut n: u64 = 0;
        loop {
            if log_w > -LOG_CUTOFF {
                let w = log_w.exp();
                for (a, b) in acc.iter_mut().zip(&v) {
                    *a += w * b;
                }
            } else if n as f64 > lt {
                break;
            }
            // v <- v (I + Q / lambda)
            next.copy_from_slice(&v);
            for (k, out) in transitions.iter().enumerate() {
                let vk = v[k];
                if vk < PROBABILITY_FLOOR {
                    continue;
                }
                for &(target, rate) in out {
                    let flow = vk * rate / lambda;
                    next[k] -= flow;
                    next[target] += flow;
                }
            }
            std::mem::swap(&mut v, &mut next);
            n += 1;
            log_w += lt.ln() - (n as f64).ln();
        }
        let mass: f64 = acc.iter().sum();
        p = acc.into_iter().map(|a| a.max(0.0) / mass).collect();
    }
    let tail = p[max_state];
    let support = (0..n_states as i64).collect();
    // exact renormalization so the pdf passes the 1e-12 check
    let mass: f64 = p.iter().sum();
    p.iter_mut().for_each(|a| *a /= mass);
    Ok((EmpiricalPdf::new(support, p)?, tail))
}
