//! ELECTRE IS refinement of a skyline.
//!
//! For an ordered pair `(p, q)` the assertion "p outranks q" holds when the
//! weighted concordance `C(p, q)` reaches the cut level and no criterion vetoes
//! it. Every alternative that some other alternative outranks is removed.
//! Elimination power is not lost when an alternative is itself eliminated, so
//! the result depends only on the input set.

use std::borrow::Borrow;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{CloudService, Sense};
use crate::error::{Error, Result};
use crate::skyline::{DimensionView, OrientedMatrix};

pub const DEFAULT_CUT_LEVEL: f64 = 0.9;
/// Default thresholds as fractions of the observed value span of a criterion.
pub const DEFAULT_INDIFFERENCE_FRACTION: f64 = 0.0;
pub const DEFAULT_PREFERENCE_FRACTION: f64 = 0.01;
pub const DEFAULT_VETO_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub dimension_id: String,
    pub weight: f64,
    pub q_ind: f64,
    pub p_pref: f64,
    /// `f64::INFINITY` disables the veto; serialized as `null`.
    #[serde(with = "veto_threshold", default = "infinity")]
    pub v_veto: f64,
}

fn infinity() -> f64 {
    f64::INFINITY
}

impl CriterionConfig {
    /// Thresholds derived from the span of values the criterion takes in the input.
    pub fn from_span(dimension_id: impl Into<String>, weight: f64, span: f64) -> Self {
        let (q_ind, p_pref, v_veto) = default_thresholds(span);
        CriterionConfig {
            dimension_id: dimension_id.into(),
            weight,
            q_ind,
            p_pref,
            v_veto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let id = &self.dimension_id;
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(Error::InvalidSettings(format!("`{id}`: weight must be a non-negative number")));
        }
        if !(self.q_ind.is_finite() && self.p_pref.is_finite()) {
            return Err(Error::InvalidSettings(format!("`{id}`: thresholds must be finite")));
        }
        if !(0.0 <= self.q_ind && self.q_ind <= self.p_pref && self.p_pref < self.v_veto) {
            return Err(Error::InvalidSettings(format!(
                "`{id}`: thresholds must satisfy 0 <= q ({}) <= p ({}) < v ({})",
                self.q_ind, self.p_pref, self.v_veto
            )));
        }
        if self.v_veto.is_nan() {
            return Err(Error::InvalidSettings(format!("`{id}`: veto threshold is NaN")));
        }
        Ok(())
    }
}

/// `(q, p, v)` for a criterion whose observed values span `span`.
/// A zero span yields zero thresholds and no veto.
pub fn default_thresholds(span: f64) -> (f64, f64, f64) {
    if span > 0.0 && span.is_finite() {
        (
            DEFAULT_INDIFFERENCE_FRACTION * span,
            DEFAULT_PREFERENCE_FRACTION * span,
            DEFAULT_VETO_FRACTION * span,
        )
    } else {
        (0.0, 0.0, f64::INFINITY)
    }
}

/// Max minus min of each view dimension over `services` (0 when empty).
pub fn observed_spans<S: Borrow<CloudService>>(services: &[S], view: &DimensionView) -> Result<Vec<f64>> {
    view.dims()
        .iter()
        .map(|d| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in services {
                let v = s.borrow().dim(&d.id)?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok(if hi >= lo { hi - lo } else { 0.0 })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VetoRule {
    /// Veto iff the disadvantage reaches `v`.
    #[default]
    Simple,
    /// ELECTRE IS veto: the threshold shrinks towards `v - q` as the
    /// concordance approaches the cut level.
    Reinforced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectreSettings {
    pub criteria: Vec<CriterionConfig>,
    pub cut_level: f64,
    #[serde(default)]
    pub veto_rule: VetoRule,
}

impl ElectreSettings {
    pub fn new(criteria: Vec<CriterionConfig>, cut_level: f64) -> Result<Self> {
        let settings = ElectreSettings {
            criteria,
            cut_level,
            veto_rule: VetoRule::Simple,
        };
        settings.validate()?;
        Ok(settings)
    }

    /// Span-based thresholds and the default cut level for every view dimension.
    pub fn defaults_for<S: Borrow<CloudService>>(
        services: &[S],
        view: &DimensionView,
        weights: &[f64],
    ) -> Result<Self> {
        if weights.len() != view.len() {
            return Err(Error::InvalidSettings(format!(
                "{} weights for {} criteria",
                weights.len(),
                view.len()
            )));
        }
        let spans = observed_spans(services, view)?;
        let criteria = view
            .ids()
            .zip(weights)
            .zip(spans)
            .map(|((id, &w), span)| CriterionConfig::from_span(id, w, span))
            .collect();
        ElectreSettings::new(criteria, DEFAULT_CUT_LEVEL)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cut_level > 0.5 && self.cut_level <= 1.0) {
            return Err(Error::InvalidSettings(format!(
                "cut level {} outside (0.5, 1]",
                self.cut_level
            )));
        }
        for c in &self.criteria {
            c.validate()?;
        }
        if self.total_weight() <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.criteria.iter().map(|c| c.weight).sum()
    }

    pub fn criterion(&self, dimension_id: &str) -> Option<&CriterionConfig> {
        self.criteria.iter().find(|c| c.dimension_id == dimension_id)
    }

    /// Criteria reordered to follow `view`; errors unless they cover it exactly.
    fn aligned(&self, view: &DimensionView) -> Result<Vec<&CriterionConfig>> {
        let by_id: HashMap<&str, &CriterionConfig> =
            self.criteria.iter().map(|c| (c.dimension_id.as_str(), c)).collect();
        if by_id.len() != self.criteria.len() {
            return Err(Error::InvalidSettings("criterion configured twice".into()));
        }
        let aligned = view
            .ids()
            .map(|id| {
                by_id
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidSettings(format!("no criterion configured for `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if aligned.len() != self.criteria.len() {
            let extra = self
                .criteria
                .iter()
                .find(|c| !view.ids().any(|id| id == c.dimension_id))
                .map(|c| c.dimension_id.clone())
                .unwrap_or_default();
            return Err(Error::InvalidSettings(format!("criterion `{extra}` is not an optimized dimension")));
        }
        Ok(aligned)
    }
}

/// Support of criterion `cfg` for "a is at least as good as b".
pub fn partial_concordance(a: f64, b: f64, sense: Sense, cfg: &CriterionConfig) -> f64 {
    concordance_of_disadvantage(sense.disadvantage(a, b), cfg.q_ind, cfg.p_pref)
}

#[inline]
fn concordance_of_disadvantage(delta: f64, q: f64, p: f64) -> f64 {
    if delta <= q {
        1.0
    } else if delta >= p {
        0.0
    } else {
        (p - delta) / (p - q)
    }
}

/// Per-criterion arrays in view order, ready for pairwise evaluation.
struct Criteria {
    weights: Vec<f64>,
    q: Vec<f64>,
    p: Vec<f64>,
    v: Vec<f64>,
    total: f64,
    cut: f64,
    rule: VetoRule,
}

impl Criteria {
    fn new(settings: &ElectreSettings, view: &DimensionView) -> Result<Self> {
        settings.validate()?;
        let aligned = settings.aligned(view)?;
        let weights: Vec<f64> = aligned.iter().map(|c| c.weight).collect();
        // Summed in the same order as the concordance numerator so that
        // unanimous support yields exactly 1.
        let total = weights.iter().sum();
        Ok(Criteria {
            weights,
            q: aligned.iter().map(|c| c.q_ind).collect(),
            p: aligned.iter().map(|c| c.p_pref).collect(),
            v: aligned.iter().map(|c| c.v_veto).collect(),
            total,
            cut: settings.cut_level,
            rule: settings.veto_rule,
        })
    }

    /// `p` and `q` are oriented rows (smaller is better).
    #[inline]
    fn concordance(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut num = 0.0;
        for j in 0..self.weights.len() {
            num += self.weights[j] * concordance_of_disadvantage(p[j] - q[j], self.q[j], self.p[j]);
        }
        num / self.total
    }

    #[inline]
    fn veto_ok(&self, p: &[f64], q: &[f64], concordance: f64) -> bool {
        (0..self.weights.len()).all(|j| {
            let delta = p[j] - q[j];
            let threshold = match self.rule {
                VetoRule::Simple => self.v[j],
                VetoRule::Reinforced => {
                    let share = self.weights[j] / self.total;
                    let denom = 1.0 - self.cut - share;
                    let eta = if denom > 0.0 {
                        (1.0 - concordance - share) / denom
                    } else {
                        1.0
                    };
                    self.v[j] - self.q[j] * eta
                }
            };
            delta < threshold
        })
    }

    /// Cheap necessary condition for `concordance(p, q) >= cut`: the weight
    /// lost to partial discordance must stay within `(1 - cut) * total`. The
    /// bound carries a relative margin so it never rejects a pair the exact
    /// test would accept.
    #[inline]
    fn may_reach_cut(&self, p: &[f64], q: &[f64]) -> bool {
        let budget = (1.0 - self.cut) * self.total * (1.0 + 1e-9) + f64::EPSILON * self.total;
        let mut lost = 0.0;
        for j in 0..self.weights.len() {
            lost += self.weights[j] * (1.0 - concordance_of_disadvantage(p[j] - q[j], self.q[j], self.p[j]));
            if lost > budget {
                return false;
            }
        }
        true
    }

    #[inline]
    fn outranks(&self, p: &[f64], q: &[f64]) -> bool {
        if !self.may_reach_cut(p, q) {
            return false;
        }
        let c = self.concordance(p, q);
        c >= self.cut && self.veto_ok(p, q, c)
    }
}

fn project_pair(p: &CloudService, q: &CloudService, view: &DimensionView) -> Result<OrientedMatrix> {
    OrientedMatrix::project(&[p, q], view)
}

/// Weighted, normalized concordance `C(p, q)` over the view's criteria.
pub fn global_concordance(
    p: &CloudService,
    q: &CloudService,
    settings: &ElectreSettings,
    view: &DimensionView,
) -> Result<f64> {
    let criteria = Criteria::new(settings, view)?;
    let m = project_pair(p, q, view)?;
    Ok(criteria.concordance(m.row(0), m.row(1)))
}

/// True when no criterion vetoes "p outranks q".
pub fn veto_ok(p: &CloudService, q: &CloudService, settings: &ElectreSettings, view: &DimensionView) -> Result<bool> {
    let criteria = Criteria::new(settings, view)?;
    let m = project_pair(p, q, view)?;
    let c = criteria.concordance(m.row(0), m.row(1));
    Ok(criteria.veto_ok(m.row(0), m.row(1), c))
}

/// Whether "p outranks q" is validated (concordance at the cut level, no veto).
pub fn outranks(p: &CloudService, q: &CloudService, settings: &ElectreSettings, view: &DimensionView) -> Result<bool> {
    let criteria = Criteria::new(settings, view)?;
    let m = project_pair(p, q, view)?;
    Ok(criteria.outranks(m.row(0), m.row(1)))
}

/// Indices (ascending) of alternatives no other alternative outranks.
fn solution_indices(matrix: &OrientedMatrix, criteria: &Criteria) -> Vec<usize> {
    let n = matrix.rows();
    let keep: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|qi| {
            let q = matrix.row(qi);
            !(0..n).any(|pi| pi != qi && criteria.outranks(matrix.row(pi), q))
        })
        .collect();
    keep.into_iter()
        .enumerate()
        .filter_map(|(i, k)| k.then_some(i))
        .collect()
}

/// Removes every alternative outranked by another; keeps input order.
/// The result may be empty when alternatives outrank each other.
pub fn compute_solution<S: Borrow<CloudService> + Clone>(
    skyline: &[S],
    settings: &ElectreSettings,
    view: &DimensionView,
) -> Result<Vec<S>> {
    let criteria = Criteria::new(settings, view)?;
    let matrix = OrientedMatrix::project(skyline, view)?;
    Ok(solution_indices(&matrix, &criteria)
        .into_iter()
        .map(|i| skyline[i].clone())
        .collect())
}

mod veto_threshold {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
