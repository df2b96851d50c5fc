use std::fmt;
use std::str::FromStr;

use super::{NetworkBuilder, ReactionNetwork};
use crate::{Error, Result};

/// The benchmark systems shipped with the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinModel {
    /// `S1 <-> S2`, reduced to the scalar `S1` with `S2 = X^T - S1`.
    ReversibleIsomerization,
    /// Bistable Schlögl model with buffered `B1`, `B2`.
    Schlogl,
    /// Enzymatic catalysis `S1 + S2 <-> S3 -> S2 + S4`.
    MichaelisMenten,
    /// `2 X1 <-> X2`, reduced to the scalar `X1` with `X1 + 2 X2 = X_C`.
    NonlinearReversible,
    /// Genetic positive feedback loop, five species and nine reactions.
    GeneticLoop,
}

impl BuiltinModel {
    pub const ALL: [BuiltinModel; 5] = [
        BuiltinModel::ReversibleIsomerization,
        BuiltinModel::Schlogl,
        BuiltinModel::MichaelisMenten,
        BuiltinModel::NonlinearReversible,
        BuiltinModel::GeneticLoop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinModel::ReversibleIsomerization => "reversible_isomerization",
            BuiltinModel::Schlogl => "schlogl",
            BuiltinModel::MichaelisMenten => "michaelis_menten",
            BuiltinModel::NonlinearReversible => "nonlinear_reversible",
            BuiltinModel::GeneticLoop => "genetic_loop",
        }
    }

    /// Comma-separated list of every builtin name.
    pub fn names() -> String {
        Self::ALL
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for BuiltinModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownModel {
                name: s.to_string(),
                available: Self::names(),
            })
    }
}

/// Overrides applied on top of a builtin model's defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelParams {
    /// Replacement rate constants, one per reaction.
    pub rates: Option<Vec<f64>>,
    /// Replacement initial state.
    pub initial: Option<Vec<f64>>,
    /// Conserved total (`X^T` or `X_C`) for the reduced scalar models.
    pub total: Option<f64>,
}

/// A network together with its experiment defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub name: String,
    pub network: ReactionNetwork,
    pub initial: Vec<f64>,
    pub rates: Vec<f64>,
    pub default_tau: Option<f64>,
    pub default_t_end: Option<f64>,
}

struct Defaults {
    rates: &'static [f64],
    initial: &'static [f64],
    total: Option<f64>,
    tau: f64,
    t_end: f64,
}

fn defaults(model: BuiltinModel) -> Defaults {
    match model {
        BuiltinModel::ReversibleIsomerization => Defaults {
            rates: &[1.0, 1.0],
            initial: &[100.0],
            total: Some(100.0),
            tau: 0.1,
            t_end: 10.0,
        },
        BuiltinModel::Schlogl => Defaults {
            rates: &[3e-7, 1e-4, 1e-3, 3.5],
            initial: &[250.0, 1e5, 2e5],
            total: None,
            tau: 0.5,
            t_end: 50.0,
        },
        BuiltinModel::MichaelisMenten => Defaults {
            rates: &[1.66e-3, 1e-4, 1e3],
            initial: &[3000.0, 120.0, 0.0, 0.0],
            total: None,
            tau: 0.25,
            t_end: 50.0,
        },
        BuiltinModel::NonlinearReversible => Defaults {
            rates: &[50.0, 1e3],
            initial: &[400.0],
            total: Some(400.0 + 2.0 * 3990.0),
            tau: 0.01,
            t_end: 0.2,
        },
        BuiltinModel::GeneticLoop => Defaults {
            rates: &[50.0, 1e3, 50.0, 1e3, 1.0, 10.0, 3.0, 1.0, 6.0],
            initial: &[10.0, 0.0, 20.0, 0.0, 0.0],
            total: None,
            tau: 0.05,
            t_end: 100.0,
        },
    }
}

/// Builds a builtin model, applying any overrides in `params`.
pub fn builtin_model(model: BuiltinModel, params: &ModelParams) -> Result<Model> {
    let d = defaults(model);
    let rates = match &params.rates {
        Some(r) if r.len() != d.rates.len() => {
            return Err(Error::InvalidArgument(format!(
                "{model} has {} rate constants, got {}",
                d.rates.len(),
                r.len()
            )))
        }
        Some(r) => r.clone(),
        None => d.rates.to_vec(),
    };
    let total = match (params.total, d.total) {
        (Some(_), None) => {
            return Err(Error::InvalidArgument(format!(
                "{model} has no conserved total to override"
            )))
        }
        (Some(t), Some(_)) if !(t.is_finite() && t >= 0.0) => {
            return Err(Error::InvalidArgument(format!(
                "conserved total must be finite and nonnegative, got {t}"
            )))
        }
        (t, default) => t.or(default),
    };
    let c = &rates;
    let network = match model {
        BuiltinModel::ReversibleIsomerization => NetworkBuilder::new()
            .species("S1")
            .conserved("S2", total.unwrap_or_default(), 1.0, &[("S1", 1.0)])
            .reaction(c[0], &[("S1", 1)], &[("S2", 1)])
            .reaction(c[1], &[("S2", 1)], &[("S1", 1)]),
        BuiltinModel::Schlogl => NetworkBuilder::new()
            .species("S")
            .buffered("B1")
            .buffered("B2")
            .reaction(c[0], &[("B1", 1), ("S", 2)], &[("S", 3)])
            .reaction(c[1], &[("S", 3)], &[("B1", 1), ("S", 2)])
            .reaction(c[2], &[("B2", 1)], &[("S", 1)])
            .reaction(c[3], &[("S", 1)], &[("B2", 1)]),
        BuiltinModel::MichaelisMenten => NetworkBuilder::new()
            .species("S1")
            .species("S2")
            .species("S3")
            .species("S4")
            .reaction(c[0], &[("S1", 1), ("S2", 1)], &[("S3", 1)])
            .reaction(c[1], &[("S3", 1)], &[("S1", 1), ("S2", 1)])
            .reaction(c[2], &[("S3", 1)], &[("S2", 1), ("S4", 1)]),
        BuiltinModel::NonlinearReversible => NetworkBuilder::new()
            .species("X1")
            .conserved("X2", total.unwrap_or_default(), 2.0, &[("X1", 1.0)])
            .reaction(c[0], &[("X1", 2)], &[("X2", 1)])
            .reaction(c[1], &[("X2", 1)], &[("X1", 2)]),
        BuiltinModel::GeneticLoop => NetworkBuilder::new()
            .species("S1")
            .species("S2")
            .species("S3")
            .species("S4")
            .species("S5")
            .reaction(c[0], &[("S1", 2)], &[("S2", 1)])
            .reaction(c[1], &[("S2", 1)], &[("S1", 2)])
            .reaction(c[2], &[("S2", 1), ("S3", 1)], &[("S4", 1)])
            .reaction(c[3], &[("S4", 1)], &[("S2", 1), ("S3", 1)])
            .reaction(c[4], &[("S3", 1)], &[("S3", 1), ("S5", 1)])
            .reaction(c[5], &[("S4", 1)], &[("S4", 1), ("S5", 1)])
            .reaction(c[6], &[("S5", 1)], &[("S5", 1), ("S1", 1)])
            .reaction(c[7], &[("S1", 1)], &[])
            .reaction(c[8], &[("S5", 1)], &[]),
    }
    .build()
    .map_err(|e| match e {
        Error::InvalidNetwork(msg) => Error::InvalidArgument(msg),
        other => other,
    })?;

    let initial = match &params.initial {
        Some(x) => {
            network.check_state(x)?;
            x.clone()
        }
        // the reduced isomerization starts with every molecule in S1
        None if model == BuiltinModel::ReversibleIsomerization => vec![total.unwrap_or_default()],
        None => d.initial.to_vec(),
    };
    if initial.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument(
            "initial populations must be finite and nonnegative".into(),
        ));
    }

    Ok(Model {
        name: model.name().to_string(),
        network,
        initial,
        rates,
        default_tau: Some(d.tau),
        default_t_end: Some(d.t_end),
    })
}

/// The nonlinear reversible reaction in its two-species form, for SSA
/// cross-checks of the reduced model.
pub fn nonlinear_reversible_full() -> Model {
    let rates = vec![50.0, 1e3];
    let network = NetworkBuilder::new()
        .species("X1")
        .species("X2")
        .reaction(rates[0], &[("X1", 2)], &[("X2", 1)])
        .reaction(rates[1], &[("X2", 1)], &[("X1", 2)])
        .build()
        .expect("static network is valid");
    Model {
        name: "nonlinear_reversible_full".into(),
        network,
        initial: vec![400.0, 3990.0],
        rates,
        default_tau: Some(0.01),
        default_t_end: Some(0.2),
    }
}
