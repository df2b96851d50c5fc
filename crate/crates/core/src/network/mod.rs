//! Well-stirred chemical reaction networks with mass-action kinetics.
//!
//! A network tracks a state vector of species counts. Buffered species are
//! part of the state but their stoichiometric rows are zero, so no integrator
//! ever changes them. Species that are eliminated through a linear
//! conservation law (the reduced scalar forms of the reversible reactions) are
//! not part of the state; their counts are reconstructed from it whenever a
//! propensity needs them.
//!
//! The tau-leap increment is split into a drift and a compensated Poisson
//! noise,
//!
//! ```text
//! f(x)    = sum_j nu_j a_j(x)
//! Q(x, t) = sum_j nu_j (P_j(a_j(|x|) t) - a_j(|x|) t)
//! ```
//!
//! where the noise is evaluated on the componentwise absolute value of the
//! state so that a transiently negative population never yields a Poisson
//! draw with negative mean.

mod builtin;
mod file;

pub use builtin::{builtin_model, nonlinear_reversible_full, BuiltinModel, Model, ModelParams};
pub use file::{load_model, model_to_toml, parse_model};

use std::collections::HashSet;

use crate::{Error, Result, RngStream};

/// Highest total reactant order a reaction may have.
pub const MAX_REACTANT_ORDER: u32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Species {
    pub name: String,
    /// Population held constant by the environment.
    pub buffered: bool,
}

/// A species eliminated through `weight * X_d + sum_k w_k X_k = total`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservedSpecies {
    pub name: String,
    pub total: f64,
    pub weight: f64,
    /// `(state index, w_k)` pairs.
    pub terms: Vec<(usize, f64)>,
}

impl ConservedSpecies {
    pub fn count(&self, x: &[f64]) -> f64 {
        let tracked: f64 = self.terms.iter().map(|&(k, w)| w * x[k]).sum();
        (self.total - tracked) / self.weight
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpeciesRef {
    /// Index into the state vector.
    State(usize),
    /// Index into the conserved-species list.
    Conserved(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reaction {
    /// Stochastic rate constant `c_j`.
    pub rate: f64,
    pub reactants: Vec<(SpeciesRef, u32)>,
    pub products: Vec<(SpeciesRef, u32)>,
}

impl Reaction {
    /// Total reactant order.
    pub fn order(&self) -> u32 {
        self.reactants.iter().map(|&(_, n)| n).sum()
    }

    fn net_change(&self, who: SpeciesRef) -> i64 {
        let count = |side: &[(SpeciesRef, u32)]| -> i64 {
            side.iter()
                .filter(|(r, _)| *r == who)
                .map(|&(_, n)| n as i64)
                .sum()
        };
        count(&self.products) - count(&self.reactants)
    }
}

/// How counts enter a propensity evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Eval {
    /// Plain polynomial in the raw state (stiffness estimation).
    Raw,
    /// Raw state, negative combinatorial factors clamped to zero.
    Clamped,
    /// Absolute value of every population, then clamped.
    Abs,
}

/// Immutable reaction network; safe to share across concurrent trajectories.
#[derive(Clone, Debug, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    conserved: Vec<ConservedSpecies>,
    reactions: Vec<Reaction>,
    /// Row-major `N x M` stoichiometric matrix.
    stoich: Vec<i64>,
    /// Sparse columns of `stoich` as `(row, change)`.
    changes: Vec<Vec<(usize, f64)>>,
}

impl ReactionNetwork {
    /// Validates and assembles a network. Conserved species must be
    /// consistent with every reaction's stoichiometry.
    pub fn new(
        species: Vec<Species>,
        conserved: Vec<ConservedSpecies>,
        mut reactions: Vec<Reaction>,
    ) -> Result<Self> {
        for r in &mut reactions {
            r.reactants.sort_unstable();
            r.products.sort_unstable();
        }
        let invalid = |msg: String| Err(Error::InvalidNetwork(msg));
        if species.is_empty() {
            return invalid("at least one state species is required".into());
        }
        if reactions.is_empty() {
            return invalid("at least one reaction is required".into());
        }
        let mut names = HashSet::new();
        for name in species
            .iter()
            .map(|s| &s.name)
            .chain(conserved.iter().map(|c| &c.name))
        {
            if name.is_empty() {
                return invalid("species names must be non-empty".into());
            }
            if !names.insert(name.as_str()) {
                return invalid(format!("duplicate species name `{name}`"));
            }
        }
        let n = species.len();
        for c in &conserved {
            if !(c.weight.is_finite() && c.weight != 0.0) || !c.total.is_finite() {
                return invalid(format!(
                    "conservation law for `{}` needs a finite nonzero weight and finite total",
                    c.name
                ));
            }
            if c.terms.iter().any(|&(k, w)| k >= n || !w.is_finite()) {
                return invalid(format!(
                    "conservation law for `{}` references an unknown species",
                    c.name
                ));
            }
        }
        for (j, r) in reactions.iter().enumerate() {
            if !(r.rate.is_finite() && r.rate >= 0.0) {
                return invalid(format!(
                    "reaction {}: rate constant must be finite and nonnegative",
                    j + 1
                ));
            }
            if r.order() > MAX_REACTANT_ORDER {
                return invalid(format!(
                    "reaction {}: reactant order {} exceeds {MAX_REACTANT_ORDER}",
                    j + 1,
                    r.order()
                ));
            }
            for &(who, _) in r.reactants.iter().chain(&r.products) {
                let ok = match who {
                    SpeciesRef::State(i) => i < n,
                    SpeciesRef::Conserved(d) => d < conserved.len(),
                };
                if !ok {
                    return invalid(format!("reaction {}: unknown species reference", j + 1));
                }
            }
        }

        let m = reactions.len();
        let mut stoich = vec![0i64; n * m];
        let mut changes = Vec::with_capacity(m);
        for (j, r) in reactions.iter().enumerate() {
            let mut col = Vec::new();
            for (i, s) in species.iter().enumerate() {
                let v = if s.buffered {
                    0
                } else {
                    r.net_change(SpeciesRef::State(i))
                };
                stoich[i * m + j] = v;
                if v != 0 {
                    col.push((i, v as f64));
                }
            }
            for (d, c) in conserved.iter().enumerate() {
                let tracked: f64 = c
                    .terms
                    .iter()
                    .map(|&(k, w)| w * stoich[k * m + j] as f64)
                    .sum();
                let own = c.weight * r.net_change(SpeciesRef::Conserved(d)) as f64;
                if (tracked + own).abs() > 1e-9 * (1.0 + tracked.abs() + own.abs()) {
                    return invalid(format!(
                        "reaction {} violates the conservation law of `{}`",
                        j + 1,
                        c.name
                    ));
                }
            }
            let touches_buffered = r
                .reactants
                .iter()
                .chain(&r.products)
                .any(|&(who, _)| matches!(who, SpeciesRef::State(i) if species[i].buffered));
            if col.is_empty() && !touches_buffered {
                return invalid(format!("reaction {} has a zero state-change vector", j + 1));
            }
            changes.push(col);
        }

        Ok(ReactionNetwork {
            species,
            conserved,
            reactions,
            stoich,
            changes,
        })
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn conserved(&self) -> &[ConservedSpecies] {
        &self.conserved
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn is_buffered(&self, i: usize) -> bool {
        self.species[i].buffered
    }

    /// Entry `nu_{i j}` of the stoichiometric matrix.
    pub fn stoich(&self, i: usize, j: usize) -> i64 {
        self.stoich[i * self.reactions.len() + j]
    }

    /// The stoichiometric matrix as `N` rows of length `M`.
    pub fn stoich_matrix(&self) -> Vec<Vec<i64>> {
        self.stoich
            .chunks(self.reactions.len())
            .map(<[i64]>::to_vec)
            .collect()
    }

    /// Nonzero entries of the state-change vector of reaction `j`.
    pub fn state_change(&self, j: usize) -> &[(usize, f64)] {
        &self.changes[j]
    }

    pub fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.species.len() {
            return Err(Error::DimensionMismatch {
                expected: self.species.len(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Counts of the conserved species reconstructed from `x`.
    pub fn conserved_counts(&self, x: &[f64]) -> Vec<f64> {
        self.conserved.iter().map(|c| c.count(x)).collect()
    }

    /// Mass-action propensities `a(x)`, nonnegative.
    pub fn propensities(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_state(x)?;
        Ok((0..self.n_reactions())
            .map(|j| self.propensity(j, x, Eval::Clamped))
            .collect())
    }

    /// Drift `f(x) = sum_j nu_j a_j(x)`, evaluated on the raw state.
    pub fn drift(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_state(x)?;
        let mut out = vec![0.0; x.len()];
        self.drift_into(x, &mut out);
        Ok(out)
    }

    /// Poisson means `a_j(|x|) tau` the noise term draws from.
    pub fn leap_means(&self, x: &[f64], tau: f64) -> Result<Vec<f64>> {
        self.check_state(x)?;
        check_tau(tau)?;
        Ok((0..self.n_reactions())
            .map(|j| self.propensity(j, x, Eval::Abs) * tau)
            .collect())
    }

    /// One draw of the compensated Poisson noise `Q(|x|, tau)`.
    pub fn noise_q(&self, x: &[f64], tau: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
        self.check_state(x)?;
        check_tau(tau)?;
        let mut out = vec![0.0; x.len()];
        self.noise_into(x, tau, rng, &mut out);
        Ok(out)
    }

    pub(crate) fn propensity(&self, j: usize, x: &[f64], mode: Eval) -> f64 {
        let r = &self.reactions[j];
        let mut a = r.rate;
        for &(who, order) in &r.reactants {
            let mut n = self.count(who, x);
            match mode {
                Eval::Abs => n = n.abs(),
                _ => {}
            }
            let g = count_factor(n, order);
            if mode != Eval::Raw && g < 0.0 {
                return 0.0;
            }
            a *= g;
        }
        a
    }

    fn count(&self, who: SpeciesRef, x: &[f64]) -> f64 {
        match who {
            SpeciesRef::State(i) => x[i],
            SpeciesRef::Conserved(d) => self.conserved[d].count(x),
        }
    }

    pub(crate) fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, col) in self.changes.iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            let a = self.propensity(j, x, Eval::Raw);
            for &(i, v) in col {
                out[i] += v * a;
            }
        }
    }

    pub(crate) fn noise_into(&self, x: &[f64], tau: f64, rng: &mut RngStream, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, col) in self.changes.iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            let mean = self.propensity(j, x, Eval::Abs) * tau;
            let centered = rng.poisson(mean) - mean;
            for &(i, v) in col {
                out[i] += v * centered;
            }
        }
    }

    /// `sum_j nu_j P_j(a_j(|x|) tau)`: the raw explicit tau-leap increment.
    pub(crate) fn poisson_increment_into(
        &self,
        x: &[f64],
        tau: f64,
        rng: &mut RngStream,
        out: &mut [f64],
    ) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, col) in self.changes.iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            let firings = rng.poisson(self.propensity(j, x, Eval::Abs) * tau);
            for &(i, v) in col {
                out[i] += v * firings;
            }
        }
    }

    /// Adds `scale * d a_j / d x` of the raw propensity polynomial into `grad`.
    pub(crate) fn add_propensity_gradient(
        &self,
        j: usize,
        x: &[f64],
        scale: f64,
        grad: &mut [f64],
    ) {
        let r = &self.reactions[j];
        let counts: Vec<f64> = r
            .reactants
            .iter()
            .map(|&(who, _)| self.count(who, x))
            .collect();
        let factors: Vec<f64> = r
            .reactants
            .iter()
            .zip(&counts)
            .map(|(&(_, o), &n)| count_factor(n, o))
            .collect();
        for (p, &(who, order)) in r.reactants.iter().enumerate() {
            let others: f64 = factors
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != p)
                .map(|(_, g)| g)
                .product();
            let dg = r.rate * others * count_factor_derivative(counts[p], order) * scale;
            match who {
                SpeciesRef::State(i) => grad[i] += dg,
                SpeciesRef::Conserved(d) => {
                    let c = &self.conserved[d];
                    for &(k, w) in &c.terms {
                        grad[k] -= dg * w / c.weight;
                    }
                }
            }
        }
    }

    /// Copies buffered entries of `from` into `to`.
    pub(crate) fn restore_buffered(&self, from: &[f64], to: &mut [f64]) {
        for (i, s) in self.species.iter().enumerate() {
            if s.buffered {
                to[i] = from[i];
            }
        }
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {tau}"
        )));
    }
    Ok(())
}

/// Number of distinct reactant combinations `n (n-1) ... (n-k+1) / k!`.
fn count_factor(n: f64, order: u32) -> f64 {
    match order {
        0 => 1.0,
        1 => n,
        2 => n * (n - 1.0) / 2.0,
        3 => n * (n - 1.0) * (n - 2.0) / 6.0,
        _ => unreachable!("reactant order is validated at construction"),
    }
}

fn count_factor_derivative(n: f64, order: u32) -> f64 {
    match order {
        0 => 0.0,
        1 => 1.0,
        2 => (2.0 * n - 1.0) / 2.0,
        3 => (3.0 * n * n - 6.0 * n + 2.0) / 6.0,
        _ => unreachable!("reactant order is validated at construction"),
    }
}

/// Name-based network construction.
#[derive(Clone, Debug, Default)]
pub struct NetworkBuilder {
    species: Vec<Species>,
    conserved: Vec<(String, f64, f64, Vec<(String, f64)>)>,
    reactions: Vec<(f64, Vec<(String, u32)>, Vec<(String, u32)>)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn species(mut self, name: &str) -> Self {
        self.species.push(Species {
            name: name.to_string(),
            buffered: false,
        });
        self
    }

    pub fn buffered(mut self, name: &str) -> Self {
        self.species.push(Species {
            name: name.to_string(),
            buffered: true,
        });
        self
    }

    /// Declares `name` through `weight * name + sum terms = total`.
    pub fn conserved(mut self, name: &str, total: f64, weight: f64, terms: &[(&str, f64)]) -> Self {
        let terms = terms.iter().map(|&(s, w)| (s.to_string(), w)).collect();
        self.conserved
            .push((name.to_string(), total, weight, terms));
        self
    }

    pub fn reaction(
        mut self,
        rate: f64,
        reactants: &[(&str, u32)],
        products: &[(&str, u32)],
    ) -> Self {
        let own = |side: &[(&str, u32)]| side.iter().map(|&(s, n)| (s.to_string(), n)).collect();
        self.reactions.push((rate, own(reactants), own(products)));
        self
    }

    pub fn build(self) -> Result<ReactionNetwork> {
        let state_index = |name: &str| self.species.iter().position(|s| s.name == name);
        let conserved_index = |name: &str| self.conserved.iter().position(|c| c.0 == name);
        let resolve = |name: &str| -> Result<SpeciesRef> {
            state_index(name)
                .map(SpeciesRef::State)
                .or_else(|| conserved_index(name).map(SpeciesRef::Conserved))
                .ok_or_else(|| Error::InvalidNetwork(format!("unknown species `{name}`")))
        };

        let mut conserved = Vec::with_capacity(self.conserved.len());
        for (name, total, weight, terms) in &self.conserved {
            let terms = terms
                .iter()
                .map(|(s, w)| {
                    state_index(s).map(|k| (k, *w)).ok_or_else(|| {
                        Error::InvalidNetwork(format!(
                            "conservation law for `{name}` references unknown species `{s}`"
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            conserved.push(ConservedSpecies {
                name: name.clone(),
                total: *total,
                weight: *weight,
                terms,
            });
        }

        let side = |entries: &[(String, u32)]| -> Result<Vec<(SpeciesRef, u32)>> {
            let mut out: Vec<(SpeciesRef, u32)> = Vec::new();
            for (name, n) in entries {
                let who = resolve(name)?;
                match out.iter_mut().find(|(r, _)| *r == who) {
                    Some(e) => e.1 += n,
                    None if *n > 0 => out.push((who, *n)),
                    None => {}
                }
            }
            Ok(out)
        };
        let reactions = self
            .reactions
            .iter()
            .map(|(rate, re, pr)| {
                Ok(Reaction {
                    rate: *rate,
                    reactants: side(re)?,
                    products: side(pr)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        ReactionNetwork::new(self.species.clone(), conserved, reactions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn michaelis_menten() -> ReactionNetwork {
        builtin_model(BuiltinModel::MichaelisMenten, &ModelParams::default())
            .unwrap()
            .network
    }

    fn reviso(c1: f64, c2: f64, total: f64) -> ReactionNetwork {
        let params = ModelParams {
            rates: Some(vec![c1, c2]),
            total: Some(total),
            ..Default::default()
        };
        builtin_model(BuiltinModel::ReversibleIsomerization, &params)
            .unwrap()
            .network
    }

    #[test]
    fn michaelis_menten_propensities_and_drift() {
        let net = michaelis_menten();
        let x = [3000.0, 120.0, 0.0, 0.0];
        let a = net.propensities(&x).unwrap();
        assert!((a[0] - 597.6).abs() < 1e-9);
        assert_eq!(&a[1..], &[0.0, 0.0]);
        let f = net.drift(&x).unwrap();
        let expected = [-597.6, -597.6, 597.6, 0.0];
        for (got, want) in f.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{f:?}");
        }
    }

    #[test]
    fn reversible_isomerization_propensities() {
        let net = reviso(1.0, 1.0, 100.0);
        assert_eq!(net.propensities(&[40.0]).unwrap(), vec![40.0, 60.0]);
        // equilibrium of the linear drift lambda x + c2 X^T
        let (c1, c2, xt) = (3.0, 1.5, 90.0);
        let net = reviso(c1, c2, xt);
        let eq = c2 * xt / (c1 + c2);
        assert!(net.drift(&[eq]).unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn empty_state_fires_nothing() {
        let net = michaelis_menten();
        let zero = [0.0; 4];
        assert_eq!(net.propensities(&zero).unwrap(), vec![0.0; 3]);
        assert_eq!(net.drift(&zero).unwrap(), vec![0.0; 4]);
        let mut rng = RngStream::new(3, 0);
        for _ in 0..10 {
            assert_eq!(net.noise_q(&zero, 0.7, &mut rng).unwrap(), vec![0.0; 4]);
        }
    }

    #[test]
    fn dimension_and_tau_errors() {
        let net = michaelis_menten();
        assert!(matches!(
            net.propensities(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 1
            })
        ));
        let mut rng = RngStream::new(0, 0);
        assert!(net.noise_q(&[1.0; 4], 0.0, &mut rng).is_err());
        assert!(net.noise_q(&[1.0; 4], -1.0, &mut rng).is_err());
    }

    #[test]
    fn noise_uses_absolute_populations() {
        let net = NetworkBuilder::new()
            .species("S")
            .reaction(1.0, &[("S", 1)], &[])
            .build()
            .unwrap();
        assert_eq!(net.leap_means(&[-5.0], 1.0).unwrap(), vec![5.0]);
        // drift sees the raw state
        assert_eq!(net.drift(&[-5.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn negative_factors_are_clamped_in_propensities_only() {
        let net = NetworkBuilder::new()
            .species("S")
            .reaction(2.0, &[("S", 2)], &[])
            .build()
            .unwrap();
        assert_eq!(net.propensities(&[0.5]).unwrap(), vec![0.0]);
        assert_eq!(net.propensities(&[-3.0]).unwrap(), vec![12.0]);
        assert!(net.drift(&[0.5]).unwrap()[0] > 0.0);
    }

    #[test]
    fn third_order_combinatorics() {
        let net = NetworkBuilder::new()
            .species("S")
            .reaction(0.5, &[("S", 3)], &[("S", 1)])
            .build()
            .unwrap();
        // 10 * 9 * 8 / 6 = 120 combinations
        assert_eq!(net.propensities(&[10.0]).unwrap(), vec![60.0]);
        assert_eq!(net.stoich(0, 0), -2);
    }

    #[test]
    fn buffered_rows_are_zero() {
        let model = builtin_model(BuiltinModel::Schlogl, &ModelParams::default()).unwrap();
        let net = &model.network;
        for i in 0..net.n_species() {
            if net.is_buffered(i) {
                assert!((0..net.n_reactions()).all(|j| net.stoich(i, j) == 0));
            }
        }
        let a = net.propensities(&model.initial).unwrap();
        // c3 * N2 production through the buffered reactant
        assert!((a[2] - 1e-3 * 2e5).abs() < 1e-9);
        assert!((a[0] - 3e-7 * 1e5 * 250.0 * 249.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_networks() {
        let dup = NetworkBuilder::new()
            .species("A")
            .species("A")
            .reaction(1.0, &[("A", 1)], &[])
            .build();
        assert!(matches!(dup, Err(Error::InvalidNetwork(_))));
        let order4 = NetworkBuilder::new()
            .species("A")
            .reaction(1.0, &[("A", 4)], &[])
            .build();
        assert!(matches!(order4, Err(Error::InvalidNetwork(_))));
        let negative = NetworkBuilder::new()
            .species("A")
            .reaction(-1.0, &[("A", 1)], &[])
            .build();
        assert!(negative.is_err());
        let no_reactions = NetworkBuilder::new().species("A").build();
        assert!(no_reactions.is_err());
        let null_change = NetworkBuilder::new()
            .species("A")
            .reaction(1.0, &[("A", 1)], &[("A", 1)])
            .build();
        assert!(null_change.is_err());
        let unknown = NetworkBuilder::new()
            .species("A")
            .reaction(1.0, &[("B", 1)], &[])
            .build();
        assert!(unknown.is_err());
        let broken_law = NetworkBuilder::new()
            .species("A")
            .conserved("B", 10.0, 1.0, &[("A", 1.0)])
            .reaction(1.0, &[("A", 1)], &[("B", 2)])
            .build();
        assert!(broken_law.is_err());
    }

    #[test]
    fn conserved_species_gradient_uses_chain_rule() {
        let net = reviso(2.0, 3.0, 50.0);
        let mut g = vec![0.0];
        net.add_propensity_gradient(1, &[10.0], 1.0, &mut g);
        assert_eq!(g, vec![-3.0]);
    }
}
