//! Named multifunctions, set functions and instances loaded from a JSON manifest.
//!
//! A manifest has three lists: `multifunctions` (`id`, `spec`, optional
//! `bound` and `support`), `setFunctions` (`id`, `spec`, optional `declared`
//! flags) and `instances` pairing the two by id with an optional `domain`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{MultiSpec, Multifunction};
use crate::spaces::{MeasurableSet, MeasureSpec, PropertyFlags, SetFunction};

const BUILTIN: &str = include_str!("builtin.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MultifunctionEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub spec: MultiSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<MeasurableSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SetFunctionEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub spec: MeasureSpec,
    /// Overrides the flags the construction guarantees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared: Option<PropertyFlags>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Instance {
    pub id: String,
    pub multifunction: String,
    pub set_function: String,
    /// Integration domain; the whole space when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<MeasurableSet>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub multifunctions: Vec<MultifunctionEntry>,
    #[serde(default)]
    pub set_functions: Vec<SetFunctionEntry>,
    #[serde(default)]
    pub instances: Vec<Instance>,
}

/// A validated manifest. Ids are unique per kind and every instance refers
/// to entries that live on the same space.
#[derive(Clone, Debug)]
pub struct Catalog {
    multifunctions: BTreeMap<String, Multifunction>,
    set_functions: BTreeMap<String, SetFunction>,
    instances: BTreeMap<String, Instance>,
}

fn insert_unique<V>(map: &mut BTreeMap<String, V>, kind: &str, id: &str, v: V) -> Result<()> {
    if map.insert(id.to_string(), v).is_some() {
        return Err(Error::Catalog(format!("duplicate {kind} id `{id}`")));
    }
    Ok(())
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("the builtin catalog is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_manifest(serde_json::from_str(text)?)
    }

    pub fn from_manifest(m: Manifest) -> Result<Self> {
        let mut multifunctions = BTreeMap::new();
        for e in m.multifunctions {
            let mut f = Multifunction::new(e.id.clone(), e.spec)?;
            if let Some(b) = e.bound {
                f = f.with_bound(b)?;
            }
            if let Some(s) = e.support {
                f = f.with_support(s)?;
            }
            insert_unique(&mut multifunctions, "multifunction", &e.id, f)?;
        }
        let mut set_functions = BTreeMap::new();
        for e in m.set_functions {
            let mut mu = SetFunction::from_spec(e.id.clone(), e.spec)?;
            if let Some(d) = e.declared {
                mu = mu.with_declared(d);
            }
            insert_unique(&mut set_functions, "set function", &e.id, mu)?;
        }
        let mut catalog = Self { multifunctions, set_functions, instances: BTreeMap::new() };
        for i in m.instances {
            let f = catalog.multifunction(&i.multifunction)?;
            let mu = catalog.set_function(&i.set_function)?;
            if !f.fits_space(mu.space()) {
                return Err(Error::Catalog(format!("instance `{}`: {} and {} live on different spaces", i.id, f.id(), mu.id())));
            }
            if let Some(d) = &i.domain {
                if !mu.space().admits(d) {
                    return Err(Error::Catalog(format!("instance `{}`: domain outside the space", i.id)));
                }
            }
            let id = i.id.clone();
            insert_unique(&mut catalog.instances, "instance", &id, i)?;
        }
        Ok(catalog)
    }

    pub fn multifunction(&self, id: &str) -> Result<&Multifunction> {
        self.multifunctions.get(id).ok_or_else(|| Error::UnknownId { kind: "multifunction", id: id.to_string() })
    }

    pub fn set_function(&self, id: &str) -> Result<&SetFunction> {
        self.set_functions.get(id).ok_or_else(|| Error::UnknownId { kind: "set function", id: id.to_string() })
    }

    pub fn instance(&self, id: &str) -> Result<&Instance> {
        self.instances.get(id).ok_or_else(|| Error::UnknownId { kind: "instance", id: id.to_string() })
    }

    /// The multifunction, set function and domain of an instance.
    pub fn resolve(&self, id: &str) -> Result<(&Multifunction, &SetFunction, MeasurableSet)> {
        let i = self.instance(id)?;
        let mu = self.set_function(&i.set_function)?;
        let domain = i.domain.clone().unwrap_or_else(|| mu.space().full());
        Ok((self.multifunction(&i.multifunction)?, mu, domain))
    }

    /// In id order.
    pub fn multifunctions(&self) -> impl Iterator<Item = &Multifunction> {
        self.multifunctions.values()
    }

    pub fn set_functions(&self) -> impl Iterator<Item = &SetFunction> {
        self.set_functions.values()
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::AxisBox;

    #[test]
    fn builtin_loads() {
        let c = Catalog::builtin();
        let f = c.multifunction("box-linear").unwrap();
        assert_eq!(f.eval(0.25), AxisBox::interval(0.0, 0.25).unwrap());
        assert_eq!(f.bound(), 1.0);
        assert_eq!(c.multifunction("exp-box").unwrap().dim(), 2);
        let half = c.multifunction("box-linear-half").unwrap();
        assert_eq!(half.eval(0.75), AxisBox::zero(1));
        assert!(c.set_function("dirac-third").unwrap().declared().countably_additive);
        assert!(!c.set_function("lebesgue-sq").unwrap().declared().finitely_additive);
        let (_, mu, d) = c.resolve("linear-lebesgue-half").unwrap();
        assert_eq!(mu.eval(&d), 0.5);
        for i in c.instances() {
            c.resolve(&i.id).unwrap();
        }
    }

    #[test]
    fn unknown_ids_are_reported() {
        let c = Catalog::builtin();
        assert!(matches!(c.multifunction("nosuch"), Err(Error::UnknownId { kind: "multifunction", .. })));
        assert!(matches!(c.instance("nosuch"), Err(Error::UnknownId { kind: "instance", .. })));
    }

    #[test]
    fn manifests_are_validated() {
        let dup = r#"{"setFunctions":[{"id":"a","spec":{"kind":"lebesgue"}},{"id":"a","spec":{"kind":"lebesgue"}}]}"#;
        assert!(matches!(Catalog::from_json(dup), Err(Error::Catalog(_))));
        let unknown_field = r#"{"setFunctions":[{"id":"a","spec":{"kind":"lebesgue"},"colour":1}]}"#;
        assert!(matches!(Catalog::from_json(unknown_field), Err(Error::Json(_))));
        let mixed = r#"{
            "multifunctions":[{"id":"t","spec":{"kind":"table","values":[[[0,1]],[[1,2]]]}}],
            "setFunctions":[{"id":"l","spec":{"kind":"lebesgue"}}],
            "instances":[{"id":"x","multifunction":"t","setFunction":"l"}]}"#;
        assert!(matches!(Catalog::from_json(mixed), Err(Error::Catalog(_))));
        let dangling = r#"{"instances":[{"id":"x","multifunction":"t","setFunction":"l"}]}"#;
        assert!(matches!(Catalog::from_json(dangling), Err(Error::UnknownId { .. })));
        assert!(Catalog::from_json("{").is_err());
    }
}
