//! TOML model files.
//!
//! ```toml
//! name = "reversible_isomerization"   # optional
//! tau = 0.1                           # optional experiment defaults
//! t_end = 10.0
//!
//! [[species]]
//! name = "S1"
//! initial = 100
//! # buffered = true keeps the population constant
//!
//! # optional: species eliminated by `weight * S2 + sum terms = total`
//! [[conserved]]
//! name = "S2"
//! total = 100
//! terms = { S1 = 1 }
//!
//! [[reactions]]
//! rate = 1.0
//! reactants = { S1 = 1 }
//! products = { S2 = 1 }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Model, NetworkBuilder, ReactionNetwork, SpeciesRef};
use crate::{Error, Result};

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    species: Vec<SpeciesEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    conserved: Vec<ConservedEntry>,
    reactions: Vec<ReactionEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SpeciesEntry {
    name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    buffered: bool,
    initial: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ConservedEntry {
    name: String,
    total: f64,
    #[serde(default = "unit_weight")]
    weight: f64,
    terms: BTreeMap<String, f64>,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ReactionEntry {
    rate: f64,
    #[serde(default)]
    reactants: BTreeMap<String, u32>,
    #[serde(default)]
    products: BTreeMap<String, u32>,
}

/// Reads and validates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut model = parse_model(&text).map_err(|e| match e {
        Error::ModelParse(msg) => Error::ModelParse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    if model.name.is_empty() {
        model.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(model)
}

/// Parses a model from TOML text.
pub fn parse_model(text: &str) -> Result<Model> {
    let file: ModelFile = toml::from_str(text)
        .map_err(|e| Error::ModelParse(e.to_string().trim_end().to_string()))?;
    let field_error = |msg: String| Err(Error::ModelParse(msg));

    for (k, s) in file.species.iter().enumerate() {
        if !(s.initial.is_finite() && s.initial >= 0.0) {
            return field_error(format!(
                "species[{k}].initial: must be finite and nonnegative"
            ));
        }
    }
    if file.tau.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
        return field_error("tau: must be positive".into());
    }
    if file.t_end.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
        return field_error("t_end: must be nonnegative".into());
    }
    for (j, r) in file.reactions.iter().enumerate() {
        let order: u32 = r.reactants.values().sum();
        if order > super::MAX_REACTANT_ORDER {
            return field_error(format!(
                "reactions[{j}].reactants: total order {order} exceeds {}",
                super::MAX_REACTANT_ORDER
            ));
        }
    }

    let mut builder = NetworkBuilder::new();
    for s in &file.species {
        builder = if s.buffered {
            builder.buffered(&s.name)
        } else {
            builder.species(&s.name)
        };
    }
    for c in &file.conserved {
        let terms: Vec<(&str, f64)> = c.terms.iter().map(|(k, &w)| (k.as_str(), w)).collect();
        builder = builder.conserved(&c.name, c.total, c.weight, &terms);
    }
    for r in &file.reactions {
        let reactants: Vec<(&str, u32)> =
            r.reactants.iter().map(|(k, &n)| (k.as_str(), n)).collect();
        let products: Vec<(&str, u32)> = r.products.iter().map(|(k, &n)| (k.as_str(), n)).collect();
        builder = builder.reaction(r.rate, &reactants, &products);
    }
    let network = builder.build()?;

    Ok(Model {
        name: file.name.unwrap_or_default(),
        initial: file.species.iter().map(|s| s.initial).collect(),
        rates: file.reactions.iter().map(|r| r.rate).collect(),
        network,
        default_tau: file.tau,
        default_t_end: file.t_end,
    })
}

/// Serializes a model to the file format accepted by [`parse_model`].
pub fn model_to_toml(model: &Model) -> String {
    let net: &ReactionNetwork = &model.network;
    let name_of = |who: SpeciesRef| match who {
        SpeciesRef::State(i) => net.species()[i].name.clone(),
        SpeciesRef::Conserved(d) => net.conserved()[d].name.clone(),
    };
    let file = ModelFile {
        name: (!model.name.is_empty()).then(|| model.name.clone()),
        tau: model.default_tau,
        t_end: model.default_t_end,
        species: net
            .species()
            .iter()
            .zip(&model.initial)
            .map(|(s, &initial)| SpeciesEntry {
                name: s.name.clone(),
                buffered: s.buffered,
                initial,
            })
            .collect(),
        conserved: net
            .conserved()
            .iter()
            .map(|c| ConservedEntry {
                name: c.name.clone(),
                total: c.total,
                weight: c.weight,
                terms: c
                    .terms
                    .iter()
                    .map(|&(k, w)| (net.species()[k].name.clone(), w))
                    .collect(),
            })
            .collect(),
        reactions: net
            .reactions()
            .iter()
            .map(|r| ReactionEntry {
                rate: r.rate,
                reactants: r.reactants.iter().map(|&(w, n)| (name_of(w), n)).collect(),
                products: r.products.iter().map(|&(w, n)| (name_of(w), n)).collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("model file structure is always serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{builtin_model, BuiltinModel, ModelParams};

    const REVISO: &str = r#"
name = "reversible_isomerization"
tau = 0.1
t_end = 10

[[species]]
name = "S1"
initial = 100

[[conserved]]
name = "S2"
total = 100
terms = { S1 = 1 }

[[reactions]]
rate = 1
reactants = { S1 = 1 }
products = { S2 = 1 }

[[reactions]]
rate = 1
reactants = { S2 = 1 }
products = { S1 = 1 }
"#;

    #[test]
    fn reversible_isomerization_matches_builtin() {
        let parsed = parse_model(REVISO).unwrap();
        let builtin = builtin_model(
            BuiltinModel::ReversibleIsomerization,
            &ModelParams::default(),
        )
        .unwrap();
        assert_eq!(parsed, builtin);
    }

    #[test]
    fn builtins_round_trip() {
        for m in BuiltinModel::ALL {
            let model = builtin_model(m, &ModelParams::default()).unwrap();
            let text = model_to_toml(&model);
            assert_eq!(parse_model(&text).unwrap(), model, "{text}");
        }
    }

    #[test]
    fn duplicate_species_rejected() {
        let text = r#"
[[species]]
name = "A"
initial = 1
[[species]]
name = "A"
initial = 2
[[reactions]]
rate = 1
reactants = { A = 1 }
"#;
        let err = parse_model(text).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn fourth_order_rejected() {
        let text = r#"
[[species]]
name = "A"
initial = 1
[[reactions]]
rate = 1
reactants = { A = 4 }
products = {}
"#;
        let err = parse_model(text).unwrap_err();
        assert!(err.to_string().contains("reactions[0].reactants"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_location() {
        let text = "[[species]]\nname = \"A\"\ninitial = \"many\"\n";
        let err = parse_model(text).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let unknown = "[[species]]\nname = \"A\"\ninitial = 1\ncolour = 2\n";
        let err = parse_model(unknown).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn negative_initial_rejected() {
        let text = "[[species]]\nname = \"A\"\ninitial = -1\n[[reactions]]\nrate = 1\nreactants = { A = 1 }\n";
        assert!(parse_model(text)
            .unwrap_err()
            .to_string()
            .contains("species[0].initial"));
    }
}
