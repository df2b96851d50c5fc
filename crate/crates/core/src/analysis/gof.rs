use std::collections::BTreeMap;

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::{Error, Result};

/// Minimum expected count per merged bin.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-squared test of integer-valued counts against
/// `Binomial(trials, p)`. Adjacent states are merged until every bin expects at
/// least five samples; observations outside `0..=trials` join the end bins.
pub fn chi_squared_binomial(
    counts: &BTreeMap<i64, u64>,
    trials: u64,
    p: f64,
) -> Result<ChiSquaredTest> {
    let dist = Binomial::new(p, trials)
        .map_err(|e| Error::InvalidArgument(format!("binomial law: {e}")))?;
    let n: u64 = counts.values().sum();
    if n == 0 {
        return Err(Error::InvalidArgument("no samples to test".into()));
    }
    let observed = |k: u64| -> f64 {
        let mut o = counts.get(&(k as i64)).copied().unwrap_or(0);
        if k == 0 {
            o += counts.range(..0).map(|(_, c)| c).sum::<u64>();
        }
        if k == trials {
            o += counts
                .range(trials as i64 + 1..)
                .map(|(_, c)| c)
                .sum::<u64>();
        }
        o as f64
    };

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut e_acc, mut o_acc) = (0.0, 0.0);
    for k in 0..=trials {
        e_acc += n as f64 * dist.pmf(k);
        o_acc += observed(k);
        if e_acc >= MIN_EXPECTED {
            bins.push((o_acc, e_acc));
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    match bins.last_mut() {
        Some(last) => {
            last.0 += o_acc;
            last.1 += e_acc;
        }
        None => bins.push((o_acc, e_acc)),
    }
    if bins.len() < 2 {
        return Err(Error::InvalidArgument(
            "too few samples for a chi-squared test".into(),
        ));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidArgument(format!("chi-squared law: {e}")))?
        .sf(statistic);
    Ok(ChiSquaredTest {
        statistic,
        dof,
        p_value,
    })
}
