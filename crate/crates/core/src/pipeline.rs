//! End-to-end selection: fixed-requirement filter, skyline, ELECTRE IS.
//!
//! Threshold precedence, highest first: query overrides, a deployment-level
//! threshold table, span-based defaults computed over the skyline.

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Deserializer, Serialize};

use crate::catalog::{Catalog, CloudService};
use crate::electre::{self, CriterionConfig, ElectreSettings, VetoRule, DEFAULT_CUT_LEVEL};
use crate::error::{Error, Result};
use crate::skyline::{self, DimensionView, ViewDimension};

/// Five-level importance scale mapped linearly onto weights 1..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Importance {
    #[serde(alias = "NotImportant", alias = "not important")]
    NotImportant = 1,
    #[serde(alias = "SlightlyImportant", alias = "slightly important")]
    SlightlyImportant = 2,
    #[serde(alias = "ModeratelyImportant", alias = "moderately important")]
    ModeratelyImportant = 3,
    #[serde(alias = "VeryImportant", alias = "very important")]
    VeryImportant = 4,
    #[serde(alias = "ExtremelyImportant", alias = "extremely important")]
    ExtremelyImportant = 5,
}

impl Importance {
    pub const ALL: [Importance; 5] = [
        Importance::NotImportant,
        Importance::SlightlyImportant,
        Importance::ModeratelyImportant,
        Importance::VeryImportant,
        Importance::ExtremelyImportant,
    ];

    pub fn weight(self) -> f64 {
        importance_to_weight(self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Importance::NotImportant => "not_important",
            Importance::SlightlyImportant => "slightly_important",
            Importance::ModeratelyImportant => "moderately_important",
            Importance::VeryImportant => "very_important",
            Importance::ExtremelyImportant => "extremely_important",
        }
    }
}

pub fn importance_to_weight(level: Importance) -> f64 {
    level as u8 as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    pub dim: String,
    pub importance: Importance,
}

/// Partial per-criterion thresholds. `v: null` disables the veto; an absent
/// field defers to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, deserialize_with = "present", skip_serializing_if = "Option::is_none")]
    pub v: Option<Option<f64>>,
}

impl ThresholdOverride {
    fn apply(&self, cfg: &mut CriterionConfig) {
        if let Some(q) = self.q {
            cfg.q_ind = q;
        }
        if let Some(p) = self.p {
            cfg.p_pref = p;
        }
        if let Some(v) = self.v {
            cfg.v_veto = v.unwrap_or(f64::INFINITY);
        }
    }
}

fn present<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Option<f64>>, D::Error> {
    Ok(Some(Option::deserialize(d)?))
}

/// ELECTRE parameters supplied by a query or by a deployment-wide threshold table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectreOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub veto_rule: Option<VetoRule>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub criteria: BTreeMap<String, ThresholdOverride>,
}

impl ElectreOverrides {
    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    #[serde(default)]
    pub fixed: BTreeMap<String, String>,
    #[serde(default)]
    pub optimize: Vec<OptimizeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electre: Option<ElectreOverrides>,
}

impl Query {
    /// Checks the query against the catalog schema and returns its dimension view.
    pub fn validate(&self, catalog: &Catalog) -> Result<DimensionView> {
        let schema = catalog.schema();
        if self.optimize.is_empty() {
            return Err(Error::invalid_query("optimize", "at least one dimension must be optimized"));
        }
        for attr in self.fixed.keys() {
            if schema.dimension(attr).is_some() {
                return Err(Error::invalid_query(
                    format!("fixed.{attr}"),
                    "numeric dimensions cannot be fixed requirements; optimize them instead",
                ));
            }
            if !schema.has_fixed_attribute(attr) {
                return Err(Error::UnknownAttribute(attr.clone()));
            }
        }
        let mut seen = HashSet::new();
        let mut dims = Vec::with_capacity(self.optimize.len());
        for (i, o) in self.optimize.iter().enumerate() {
            let path = format!("optimize[{i}].dim");
            let Some(spec) = schema.dimension(&o.dim) else {
                return Err(Error::invalid_query(path, format!("unknown dimension `{}`", o.dim)));
            };
            if !seen.insert(o.dim.as_str()) {
                return Err(Error::invalid_query(path, format!("dimension `{}` listed twice", o.dim)));
            }
            dims.push(ViewDimension {
                id: spec.id.clone(),
                sense: spec.sense,
            });
        }
        if let Some(ov) = &self.electre {
            if let Some(c) = ov.cut_level {
                if !(c > 0.5 && c <= 1.0) {
                    return Err(Error::invalid_query("electre.cut_level", "cut level must lie in (0.5, 1]"));
                }
            }
            if let Some(k) = ov.criteria.keys().find(|k| !seen.contains(k.as_str())) {
                return Err(Error::invalid_query(
                    format!("electre.criteria.{k}"),
                    "thresholds given for a dimension that is not optimized",
                ));
            }
        }
        DimensionView::new(dims)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.optimize.iter().map(|o| o.importance.weight()).collect()
    }
}

/// Resolves complete settings for `view` from the layered overrides and the
/// spans observed in `candidates`.
pub fn resolve_settings(
    candidates: &[&CloudService],
    view: &DimensionView,
    weights: &[f64],
    query: Option<&ElectreOverrides>,
    table: Option<&ElectreOverrides>,
) -> Result<ElectreSettings> {
    let spans = electre::observed_spans(candidates, view)?;
    let mut criteria = Vec::with_capacity(view.len());
    for ((id, &weight), span) in view.ids().zip(weights).zip(spans) {
        let mut cfg = CriterionConfig::from_span(id, weight, span);
        for layer in [table, query].into_iter().flatten() {
            if let Some(ov) = layer.criteria.get(id) {
                ov.apply(&mut cfg);
            }
        }
        cfg.validate().map_err(|e| match e {
            Error::InvalidSettings(m) => Error::invalid_query(format!("electre.criteria.{id}"), m),
            other => other,
        })?;
        criteria.push(cfg);
    }
    let cut_level = query
        .and_then(|o| o.cut_level)
        .or(table.and_then(|o| o.cut_level))
        .unwrap_or(DEFAULT_CUT_LEVEL);
    let veto_rule = query
        .and_then(|o| o.veto_rule)
        .or(table.and_then(|o| o.veto_rule))
        .unwrap_or_default();
    let settings = ElectreSettings {
        criteria,
        cut_level,
        veto_rule,
    };
    settings.validate().map_err(|e| match e {
        Error::InvalidSettings(m) => Error::invalid_query("electre", m),
        other => other,
    })?;
    Ok(settings)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub filter_ms: f64,
    pub skyline_ms: f64,
    pub electre_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub filtered_count: usize,
    pub skyline_count: usize,
    pub final_count: usize,
    pub skyline: Vec<CloudService>,
    #[serde(rename = "final")]
    pub final_set: Vec<CloudService>,
    pub timings: StageTimings,
    pub settings_used: ElectreSettings,
}

impl SelectionResult {
    /// Caps the service arrays at `limit` entries; counts are untouched.
    pub fn truncate(&mut self, limit: usize) {
        self.skyline.truncate(limit);
        self.final_set.truncate(limit);
    }

    pub fn skyline_ids(&self) -> Vec<&str> {
        self.skyline.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn final_ids(&self) -> Vec<&str> {
        self.final_set.iter().map(|s| s.id.as_str()).collect()
    }

    /// Canonical JSON rendering (pretty, trailing newline) shared by every front end.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("selection result is always serializable");
        s.push('\n');
        s
    }

    /// Copy with timings zeroed, for comparisons that must ignore wall-clock noise.
    pub fn without_timings(&self) -> Self {
        SelectionResult {
            timings: StageTimings::default(),
            ..self.clone()
        }
    }
}

pub fn run_query(catalog: &Catalog, query: &Query) -> Result<SelectionResult> {
    run_query_with(catalog, query, None)
}

/// As [`run_query`], with a deployment-level threshold table below the query's overrides.
pub fn run_query_with(catalog: &Catalog, query: &Query, table: Option<&ElectreOverrides>) -> Result<SelectionResult> {
    let started = Instant::now();
    let view = query.validate(catalog)?;

    let t = Instant::now();
    let filtered = catalog.filter_fixed_refs(&query.fixed)?;
    let filter_ms = ms(t.elapsed());

    let t = Instant::now();
    let skyline = skyline::compute_skyline_bnl(&filtered, &view)?;
    let skyline_ms = ms(t.elapsed());

    let t = Instant::now();
    let settings = resolve_settings(&skyline, &view, &query.weights(), query.electre.as_ref(), table)?;
    let final_set = if skyline.is_empty() {
        Vec::new()
    } else {
        electre::compute_solution(&skyline, &settings, &view)?
    };
    let electre_ms = ms(t.elapsed());

    Ok(SelectionResult {
        filtered_count: filtered.len(),
        skyline_count: skyline.len(),
        final_count: final_set.len(),
        skyline: skyline.into_iter().cloned().collect(),
        final_set: final_set.into_iter().cloned().collect(),
        timings: StageTimings {
            filter_ms,
            skyline_ms,
            electre_ms,
            total_ms: ms(started.elapsed()),
        },
        settings_used: settings,
    })
}

/// Output of the skyline stage alone, consumable by [`run_electre_stage`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkylineStage {
    pub dimensions: Vec<ViewDimension>,
    pub filtered_count: usize,
    pub skyline_count: usize,
    pub services: Vec<CloudService>,
}

pub fn run_skyline_stage(
    catalog: &Catalog,
    fixed: &BTreeMap<String, String>,
    dims: &[impl AsRef<str>],
) -> Result<SkylineStage> {
    let view = DimensionView::from_schema(catalog.schema(), dims)?;
    let filtered = catalog.filter_fixed_refs(fixed)?;
    let skyline = skyline::compute_skyline_bnl(&filtered, &view)?;
    Ok(SkylineStage {
        dimensions: view.dims().to_vec(),
        filtered_count: filtered.len(),
        skyline_count: skyline.len(),
        services: skyline.into_iter().cloned().collect(),
    })
}

/// One criterion of a stage settings file. Either `weight` or `importance`
/// must be present; missing thresholds take span-based defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCriterion {
    pub dimension_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<Importance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_ind: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_pref: Option<f64>,
    #[serde(default, deserialize_with = "present", skip_serializing_if = "Option::is_none")]
    pub v_veto: Option<Option<f64>>,
}

/// Settings file for the stand-alone ELECTRE stage. A fully resolved
/// `settings_used` block from a query result is a valid instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub veto_rule: Option<VetoRule>,
    pub criteria: Vec<StageCriterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectreStage {
    pub skyline_count: usize,
    pub final_count: usize,
    #[serde(rename = "final")]
    pub final_set: Vec<CloudService>,
    pub settings_used: ElectreSettings,
}

pub fn run_electre_stage(stage: &SkylineStage, settings: &StageSettings) -> Result<ElectreStage> {
    let view = DimensionView::new(stage.dimensions.clone())?;
    let mut weights = Vec::with_capacity(view.len());
    let mut overrides = ElectreOverrides {
        cut_level: settings.cut_level,
        veto_rule: settings.veto_rule,
        criteria: BTreeMap::new(),
    };
    for id in view.ids() {
        let c = settings
            .criteria
            .iter()
            .find(|c| c.dimension_id == id)
            .ok_or_else(|| Error::InvalidSettings(format!("no criterion configured for `{id}`")))?;
        let weight = c
            .weight
            .or(c.importance.map(Importance::weight))
            .ok_or_else(|| Error::InvalidSettings(format!("`{id}`: weight or importance required")))?;
        weights.push(weight);
        overrides.criteria.insert(
            id.to_owned(),
            ThresholdOverride {
                q: c.q_ind,
                p: c.p_pref,
                v: c.v_veto,
            },
        );
    }
    if settings.criteria.len() != view.len() {
        return Err(Error::InvalidSettings(
            "settings list criteria that are not skyline dimensions (or list one twice)".into(),
        ));
    }
    let services: Vec<&CloudService> = stage.services.iter().collect();
    let resolved = resolve_settings(&services, &view, &weights, Some(&overrides), None)?;
    let final_set = if services.is_empty() {
        Vec::new()
    } else {
        electre::compute_solution(&services, &resolved, &view)?
    };
    Ok(ElectreStage {
        skyline_count: services.len(),
        final_count: final_set.len(),
        final_set: final_set.into_iter().cloned().collect(),
        settings_used: resolved,
    })
}
