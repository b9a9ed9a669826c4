//! Explanation kits: relation types paired with relation properties.
//!
//! Properties are trait objects registered by name in a [`KitRegistry`]; kits are
//! declarative lists of `(relation type, property name)` pairs, so new kits can be
//! composed from registered properties, including from JSON files.

mod evaluator;
pub mod properties;

pub use evaluator::{enumeration_size, CfTable, Evaluator, EvaluatorOptions, DEFAULT_CF_BUDGET};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::GraphKind;
use crate::model::VarId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Attack,
    Support,
}

/// A relation type: a unique label, a display symbol and, for dialectical
/// relations, a polarity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationType {
    pub label: String,
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<Polarity>,
}

impl RelationType {
    pub fn new(label: &str, symbol: &str, polarity: Option<Polarity>) -> Self {
        RelationType {
            label: label.to_string(),
            symbol: symbol.to_string(),
            polarity,
        }
    }
}

/// Boolean predicate over an influence `(x, y)` under the evaluator's input.
pub trait RelationProperty: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Kind of influence graph the property is defined on.
    fn graph_kind(&self) -> GraphKind;

    fn holds(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<bool>;
}

/// A finite set of `(relation type, relation property)` pairs with unique labels.
#[derive(Clone, Debug)]
pub struct ExplanationKit {
    name: String,
    relations: Vec<(RelationType, Arc<dyn RelationProperty>)>,
    graph_kind: GraphKind,
    attribution: Option<String>,
}

impl ExplanationKit {
    pub fn new(
        name: &str,
        relations: Vec<(RelationType, Arc<dyn RelationProperty>)>,
    ) -> Result<Self> {
        let invalid = |msg: String| Error::InvalidKit(format!("`{name}`: {msg}"));
        let Some((_, first)) = relations.first() else {
            return Err(invalid("a kit needs at least one relation".into()));
        };
        let graph_kind = first.graph_kind();
        let mut labels = BTreeSet::new();
        for (t, p) in &relations {
            if !labels.insert(t.label.as_str()) {
                return Err(invalid(format!("duplicate relation label `{}`", t.label)));
            }
            if p.graph_kind() != graph_kind {
                return Err(invalid(format!(
                    "property `{}` needs a {} influence graph, `{}` needs {}",
                    p.name(),
                    p.graph_kind().as_str(),
                    first.name(),
                    graph_kind.as_str()
                )));
            }
        }
        Ok(ExplanationKit {
            name: name.to_string(),
            relations,
            graph_kind,
            attribution: None,
        })
    }

    /// Attribution source used when none is chosen explicitly.
    pub fn with_attribution(mut self, source: Option<String>) -> Self {
        self.attribution = source;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relations(&self) -> &[(RelationType, Arc<dyn RelationProperty>)] {
        &self.relations
    }

    pub fn relation_types(&self) -> impl Iterator<Item = &RelationType> {
        self.relations.iter().map(|(t, _)| t)
    }

    pub fn graph_kind(&self) -> GraphKind {
        self.graph_kind
    }

    pub fn default_attribution(&self) -> Option<&str> {
        self.attribution.as_deref()
    }

    /// Whether any relation carries a polarity.
    pub fn is_dialectical(&self) -> bool {
        self.relation_types().any(|t| t.polarity.is_some())
    }

    /// Which relations hold for `(x, y)`, in kit order.
    pub fn classify(&self, ev: &Evaluator<'_>, x: VarId, y: VarId) -> Result<Vec<bool>> {
        self.relations.iter().map(|(_, p)| p.holds(ev, x, y)).collect()
    }
}

/// Serializable description of a kit in terms of registered property names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KitDefinition {
    pub name: String,
    /// Default attribution source for attribution kits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribution: Option<String>,
    pub relations: Vec<RelationDefinition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDefinition {
    pub label: String,
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<Polarity>,
    pub property: String,
}

impl RelationDefinition {
    fn new(label: &str, symbol: &str, polarity: Option<Polarity>, property: &str) -> Self {
        RelationDefinition {
            label: label.to_string(),
            symbol: symbol.to_string(),
            polarity,
            property: property.to_string(),
        }
    }
}

/// Named relation properties and kit definitions.
#[derive(Clone, Debug, Default)]
pub struct KitRegistry {
    properties: BTreeMap<String, Arc<dyn RelationProperty>>,
    kits: BTreeMap<String, KitDefinition>,
}

impl KitRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding the built-in properties and the kits `md`, `sd`, `cf`,
    /// `cf-local`, `lime` and `shap`.
    pub fn builtin() -> Self {
        use properties::*;
        use Polarity::{Attack, Support};

        let mut r = Self::empty();
        let props: [Arc<dyn RelationProperty>; 10] = [
            Arc::new(MonotonicAttack),
            Arc::new(MonotonicSupport),
            Arc::new(StochasticAttack),
            Arc::new(StochasticSupport),
            Arc::new(Critical { observation_level: true }),
            Arc::new(Potential { observation_level: true }),
            Arc::new(Critical { observation_level: false }),
            Arc::new(Potential { observation_level: false }),
            Arc::new(AttributionAttack),
            Arc::new(AttributionSupport),
        ];
        for p in props {
            r.register_property(p).expect("unique builtin names");
        }
        let kit = |name: &str, attribution: Option<&str>, relations: Vec<RelationDefinition>| {
            KitDefinition {
                name: name.to_string(),
                attribution: attribution.map(str::to_string),
                relations,
            }
        };
        let defs = [
            kit(
                "md",
                None,
                vec![
                    RelationDefinition::new("monotonic-attack", "\u{2212}", Some(Attack), "md-attack"),
                    RelationDefinition::new("monotonic-support", "+", Some(Support), "md-support"),
                ],
            ),
            kit(
                "sd",
                None,
                vec![
                    RelationDefinition::new("stochastic-attack", "\u{b7}\u{2212}", Some(Attack), "sd-attack"),
                    RelationDefinition::new("stochastic-support", "\u{b7}+", Some(Support), "sd-support"),
                ],
            ),
            kit(
                "cf",
                None,
                vec![
                    RelationDefinition::new("critical", "!", None, "cf-critical"),
                    RelationDefinition::new("potential", "*", None, "cf-potential"),
                ],
            ),
            kit(
                "cf-local",
                None,
                vec![
                    RelationDefinition::new("critical", "!", None, "cf-local-critical"),
                    RelationDefinition::new("potential", "*", None, "cf-local-potential"),
                ],
            ),
            kit(
                "lime",
                Some("surrogate"),
                vec![
                    RelationDefinition::new("attr-attack", "attr\u{2212}", Some(Attack), "attr-attack"),
                    RelationDefinition::new("attr-support", "attr+", Some(Support), "attr-support"),
                ],
            ),
            kit(
                "shap",
                Some("shapley"),
                vec![
                    RelationDefinition::new("attr-attack", "attr\u{2212}", Some(Attack), "attr-attack"),
                    RelationDefinition::new("attr-support", "attr+", Some(Support), "attr-support"),
                ],
            ),
        ];
        for d in defs {
            r.register_kit(d).expect("valid builtin kits");
        }
        r
    }

    pub fn register_property(&mut self, property: Arc<dyn RelationProperty>) -> Result<()> {
        let name = property.name().to_string();
        if self.properties.contains_key(&name) {
            return Err(Error::InvalidKit(format!("property `{name}` is already registered")));
        }
        self.properties.insert(name, property);
        Ok(())
    }

    /// Registers a kit after checking that it builds.
    pub fn register_kit(&mut self, definition: KitDefinition) -> Result<()> {
        if self.kits.contains_key(&definition.name) {
            return Err(Error::InvalidKit(format!(
                "kit `{}` is already registered",
                definition.name
            )));
        }
        self.build(&definition)?;
        self.kits.insert(definition.name.clone(), definition);
        Ok(())
    }

    pub fn property(&self, name: &str) -> Result<Arc<dyn RelationProperty>> {
        self.properties.get(name).cloned().ok_or_else(|| {
            Error::InvalidKit(format!(
                "unknown relation property `{name}` (known: {})",
                self.property_names().join(", ")
            ))
        })
    }

    pub fn property_names(&self) -> Vec<&str> {
        self.properties.keys().map(String::as_str).collect()
    }

    pub fn kit_names(&self) -> Vec<&str> {
        self.kits.keys().map(String::as_str).collect()
    }

    pub fn definition(&self, name: &str) -> Option<&KitDefinition> {
        self.kits.get(name)
    }

    pub fn build(&self, definition: &KitDefinition) -> Result<ExplanationKit> {
        let relations = definition
            .relations
            .iter()
            .map(|r| {
                Ok((
                    RelationType {
                        label: r.label.clone(),
                        symbol: r.symbol.clone(),
                        polarity: r.polarity,
                    },
                    self.property(&r.property)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExplanationKit::new(&definition.name, relations)?
            .with_attribution(definition.attribution.clone()))
    }

    /// Resolves a registered kit name, or `file:<path>` to a JSON [`KitDefinition`].
    pub fn kit(&self, name: &str) -> Result<ExplanationKit> {
        if let Some(path) = name.strip_prefix("file:") {
            return self.build(&load_definition(path)?);
        }
        let def = self.kits.get(name).ok_or_else(|| {
            Error::InvalidKit(format!(
                "unknown kit `{name}` (known: {}, or file:<path>)",
                self.kit_names().join(", ")
            ))
        })?;
        self.build(def)
    }
}

pub fn load_definition(path: impl AsRef<Path>) -> Result<KitDefinition> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidKit(format!("kit file does not parse: {e}")))
}
