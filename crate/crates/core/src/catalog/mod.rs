//! Cloud-service data model: schema, records, persistence, and synthetic generation.

mod builtin;
mod generate;
mod io;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builtin::{builtin_fixed_attributes, builtin_schema, FIXED_ATTRIBUTE_NAMES};
pub use generate::generate_synthetic;
pub use io::{load_catalog, load_catalog_with_schema, save_catalog, CatalogFormat};

/// Direction in which a numeric dimension improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// How much worse `a` is than `b` along this sense. Negative when `a` is better.
    #[inline]
    pub fn disadvantage(self, a: f64, b: f64) -> f64 {
        match self {
            Sense::Minimize => a - b,
            Sense::Maximize => b - a,
        }
    }

    pub fn flipped(self) -> Sense {
        match self {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub id: String,
    pub sense: Sense,
    pub range_lo: f64,
    pub range_hi: f64,
    #[serde(default)]
    pub description: String,
}

/// A categorical attribute and the vocabulary the generator draws from.
/// Loaded catalogs may carry values outside the vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedAttributeSpec {
    pub name: String,
    #[serde(default)]
    pub vocabulary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub dimensions: Vec<DimensionSpec>,
    pub fixed_attributes: Vec<FixedAttributeSpec>,
}

impl Schema {
    /// Reads a schema JSON file and validates it.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let schema: Schema = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for d in &self.dimensions {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::schema(None, &d.id, "dimension declared twice"));
            }
            if !(d.range_lo.is_finite() && d.range_hi.is_finite() && d.range_lo < d.range_hi) {
                return Err(Error::schema(
                    None,
                    &d.id,
                    format!("invalid generation range [{}, {}]", d.range_lo, d.range_hi),
                ));
            }
        }
        for a in &self.fixed_attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::schema(None, &a.name, "attribute name collides with another field"));
            }
            if matches!(a.name.as_str(), "id" | "name") {
                return Err(Error::schema(None, &a.name, "reserved column name"));
            }
        }
        Ok(())
    }

    pub fn dimension(&self, id: &str) -> Option<&DimensionSpec> {
        self.dimensions.iter().find(|d| d.id == id)
    }

    pub fn has_fixed_attribute(&self, name: &str) -> bool {
        self.fixed_attributes.iter().any(|a| a.name == name)
    }

    pub fn dimension_ids(&self) -> impl Iterator<Item = &str> {
        self.dimensions.iter().map(|d| d.id.as_str())
    }
}

impl Default for Schema {
    fn default() -> Self {
        builtin_schema()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudService {
    pub id: String,
    pub name: String,
    pub fixed: BTreeMap<String, String>,
    pub dims: BTreeMap<String, f64>,
}

impl CloudService {
    pub fn dim(&self, id: &str) -> Result<f64> {
        self.dims.get(id).copied().ok_or_else(|| Error::MissingDimension {
            service: self.id.clone(),
            dimension: id.to_owned(),
        })
    }

    /// Checks the record against `schema`: exact dimension set, finite values,
    /// exact fixed-attribute set.
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let rec = Some(self.id.as_str());
        for d in &schema.dimensions {
            match self.dims.get(&d.id) {
                None => return Err(Error::schema(rec, &d.id, "missing dimension")),
                Some(v) if !v.is_finite() => {
                    return Err(Error::schema(rec, &d.id, format!("non-finite value {v}")))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = self.dims.keys().find(|k| schema.dimension(k).is_none()) {
            return Err(Error::schema(rec, extra, "dimension not declared in schema"));
        }
        for a in &schema.fixed_attributes {
            if !self.fixed.contains_key(&a.name) {
                return Err(Error::schema(rec, &a.name, "missing fixed attribute"));
            }
        }
        if let Some(extra) = self.fixed.keys().find(|k| !schema.has_fixed_attribute(k)) {
            return Err(Error::schema(rec, extra, "fixed attribute not declared in schema"));
        }
        Ok(())
    }
}

/// An immutable, validated collection of services sharing one schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    schema: Schema,
    services: Vec<CloudService>,
}

impl Catalog {
    /// Builds a catalog, validating every record and id uniqueness.
    pub fn new(schema: Schema, services: Vec<CloudService>) -> Result<Self> {
        schema.validate()?;
        let mut ids = HashSet::with_capacity(services.len());
        for s in &services {
            s.validate(&schema)?;
            if !ids.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
        }
        Ok(Catalog { schema, services })
    }

    pub fn empty(schema: Schema) -> Result<Self> {
        Catalog::new(schema, Vec::new())
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn services(&self) -> &[CloudService] {
        &self.services
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    /// Services matching every predicate by case-insensitive equality, in catalog order.
    pub fn filter_fixed(&self, predicates: &BTreeMap<String, String>) -> Result<Vec<CloudService>> {
        Ok(self.filter_fixed_refs(predicates)?.into_iter().cloned().collect())
    }

    pub(crate) fn filter_fixed_refs(&self, predicates: &BTreeMap<String, String>) -> Result<Vec<&CloudService>> {
        let mut wanted = Vec::with_capacity(predicates.len());
        for (attr, value) in predicates {
            if !self.schema.has_fixed_attribute(attr) {
                return Err(Error::UnknownAttribute(attr.clone()));
            }
            wanted.push((attr.as_str(), value.to_lowercase()));
        }
        Ok(self
            .services
            .iter()
            .filter(|s| {
                wanted.iter().all(|(attr, value)| {
                    s.fixed.get(*attr).is_some_and(|v| v.to_lowercase() == *value)
                })
            })
            .collect())
    }

    /// Sorted distinct observed values of each fixed attribute.
    pub fn observed_values(&self) -> BTreeMap<String, Vec<String>> {
        self.schema
            .fixed_attributes
            .iter()
            .map(|a| {
                let mut values: Vec<String> = self
                    .services
                    .iter()
                    .filter_map(|s| s.fixed.get(&a.name).cloned())
                    .collect();
                values.sort();
                values.dedup();
                (a.name.clone(), values)
            })
            .collect()
    }
}

/// Convenience for `Catalog::filter_fixed`.
pub fn filter_fixed(catalog: &Catalog, predicates: &BTreeMap<String, String>) -> Result<Vec<CloudService>> {
    catalog.filter_fixed(predicates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn service(id: &str, model: &str) -> CloudService {
        let schema = builtin_schema();
        CloudService {
            id: id.into(),
            name: format!("svc {id}"),
            fixed: schema
                .fixed_attributes
                .iter()
                .map(|a| {
                    let v = if a.name == "service_model" { model } else { "General" };
                    (a.name.clone(), v.to_owned())
                })
                .collect(),
            dims: schema.dimensions.iter().map(|d| (d.id.clone(), d.range_lo)).collect(),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Catalog::new(builtin_schema(), vec![service("a", "IaaS"), service("a", "SaaS")]).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(id) if id == "a"));
    }

    #[test]
    fn missing_and_extra_dimensions_rejected() {
        let mut s = service("a", "IaaS");
        s.dims.remove("latency");
        let err = Catalog::new(builtin_schema(), vec![s]).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "latency"), "{err}");

        let mut s = service("a", "IaaS");
        s.dims.insert("memory".into(), 1.0);
        let err = Catalog::new(builtin_schema(), vec![s]).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "memory"), "{err}");
    }

    #[test]
    fn non_finite_rejected() {
        let mut s = service("a", "IaaS");
        s.dims.insert("bandwidth".into(), f64::INFINITY);
        let err = Catalog::new(builtin_schema(), vec![s]).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "bandwidth"));
    }

    #[test]
    fn filter_is_case_insensitive_and_order_preserving() {
        let c = Catalog::new(
            builtin_schema(),
            vec![service("a", "IaaS"), service("b", "SaaS"), service("c", "iaas")],
        )
        .unwrap();
        let preds = BTreeMap::from([("service_model".to_owned(), "IAAS".to_owned())]);
        let ids: Vec<_> = c.filter_fixed(&preds).unwrap().into_iter().map(|s| s.id).collect();
        assert_eq!(ids, ["a", "c"]);

        assert_eq!(c.filter_fixed(&BTreeMap::new()).unwrap().len(), 3);

        let preds = BTreeMap::from([("provider".to_owned(), "NoSuchCo".to_owned())]);
        assert!(c.filter_fixed(&preds).unwrap().is_empty());
    }

    #[test]
    fn filter_unknown_attribute() {
        let c = Catalog::empty(builtin_schema()).unwrap();
        let preds = BTreeMap::from([("colour".to_owned(), "red".to_owned())]);
        assert!(matches!(c.filter_fixed(&preds), Err(Error::UnknownAttribute(a)) if a == "colour"));
    }

    #[test]
    fn schema_rejects_bad_range() {
        let mut schema = builtin_schema();
        schema.dimensions[0].range_hi = schema.dimensions[0].range_lo;
        assert!(schema.validate().is_err());
    }
}
