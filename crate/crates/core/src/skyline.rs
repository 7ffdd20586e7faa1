//! Pareto dominance and skyline computation.
//!
//! [`compute_skyline_bnl`] is the block-nested-loops operator used by the
//! pipeline: every input tuple is compared against an in-memory window of
//! currently undominated tuples, discarded if some window tuple dominates it,
//! and otherwise appended after evicting every window tuple it dominates.
//! [`compute_skyline_naive`] is the literal quadratic definition, kept as a
//! test oracle.

use std::borrow::Borrow;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::catalog::{CloudService, Schema, Sense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewDimension {
    pub id: String,
    pub sense: Sense,
}

/// Ordered, non-empty selection of dimensions a query optimizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DimensionView {
    dims: Vec<ViewDimension>,
}

impl DimensionView {
    pub fn new(dims: Vec<ViewDimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSettings("dimension view is empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = dims.iter().find(|d| !seen.insert(d.id.as_str())) {
            return Err(Error::InvalidSettings(format!("dimension `{}` selected twice", dup.id)));
        }
        Ok(DimensionView { dims })
    }

    /// Looks the ids up in `schema`, taking each dimension's declared sense.
    pub fn from_schema<S: AsRef<str>>(schema: &Schema, ids: &[S]) -> Result<Self> {
        let dims = ids
            .iter()
            .map(|id| {
                let id = id.as_ref();
                schema
                    .dimension(id)
                    .map(|d| ViewDimension {
                        id: d.id.clone(),
                        sense: d.sense,
                    })
                    .ok_or_else(|| Error::UnknownDimension(id.to_owned()))
            })
            .collect::<Result<Vec<_>>>()?;
        DimensionView::new(dims)
    }

    /// The first `d` dimensions in schema order.
    pub fn leading(schema: &Schema, d: usize) -> Result<Self> {
        if d > schema.dimensions.len() {
            return Err(Error::InvalidSettings(format!(
                "requested {d} dimensions but schema declares {}",
                schema.dimensions.len()
            )));
        }
        let ids: Vec<&str> = schema.dimension_ids().take(d).collect();
        DimensionView::from_schema(schema, &ids)
    }

    pub fn dims(&self) -> &[ViewDimension] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.dims.iter().map(|d| d.id.as_str())
    }
}

/// Outcome of comparing `p` against `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceRelation {
    Dominates,
    DominatedBy,
    Equal,
    Incomparable,
}

impl DominanceRelation {
    pub fn reversed(self) -> Self {
        match self {
            DominanceRelation::Dominates => DominanceRelation::DominatedBy,
            DominanceRelation::DominatedBy => DominanceRelation::Dominates,
            other => other,
        }
    }
}

/// Row-major view values oriented so that smaller is always better
/// (maximized dimensions are negated, which is exact in IEEE arithmetic).
#[derive(Debug, Clone)]
pub(crate) struct OrientedMatrix {
    width: usize,
    values: Vec<f64>,
}

impl OrientedMatrix {
    pub(crate) fn project<S: Borrow<CloudService>>(services: &[S], view: &DimensionView) -> Result<Self> {
        let width = view.len();
        let mut values = Vec::with_capacity(services.len() * width);
        for s in services {
            let s = s.borrow();
            for d in view.dims() {
                let v = s.dim(&d.id)?;
                values.push(match d.sense {
                    Sense::Minimize => v,
                    Sense::Maximize => -v,
                });
            }
        }
        Ok(OrientedMatrix { width, values })
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub(crate) fn rows(&self) -> usize {
        self.values.len().checked_div(self.width).unwrap_or(0)
    }
}

/// Dominance between two oriented rows (smaller is better).
#[inline]
pub(crate) fn relation(p: &[f64], q: &[f64]) -> DominanceRelation {
    let mut better = false;
    let mut worse = false;
    for (a, b) in p.iter().zip(q) {
        if a < b {
            better = true;
        } else if a > b {
            worse = true;
        }
        if better && worse {
            return DominanceRelation::Incomparable;
        }
    }
    match (better, worse) {
        (true, false) => DominanceRelation::Dominates,
        (false, true) => DominanceRelation::DominatedBy,
        (false, false) => DominanceRelation::Equal,
        (true, true) => DominanceRelation::Incomparable,
    }
}

/// Compares `p` with `q` over the view's dimensions.
pub fn compare(p: &CloudService, q: &CloudService, view: &DimensionView) -> Result<DominanceRelation> {
    let (mut better, mut worse) = (0usize, 0usize);
    for d in view.dims() {
        match d.sense.disadvantage(p.dim(&d.id)?, q.dim(&d.id)?) {
            x if x < 0.0 => better += 1,
            x if x > 0.0 => worse += 1,
            _ => {}
        }
    }
    Ok(match (better, worse) {
        (b, 0) if b > 0 => DominanceRelation::Dominates,
        (0, w) if w > 0 => DominanceRelation::DominatedBy,
        (0, 0) => DominanceRelation::Equal,
        _ => DominanceRelation::Incomparable,
    })
}

/// Block-nested-loops skyline over row indices; returns survivors in window
/// admission order.
pub(crate) fn bnl_indices(matrix: &OrientedMatrix) -> Vec<usize> {
    let mut window: Vec<usize> = Vec::new();
    'tuples: for p in 0..matrix.rows() {
        let row = matrix.row(p);
        let mut evicts = false;
        for &w in &window {
            match relation(row, matrix.row(w)) {
                DominanceRelation::DominatedBy => continue 'tuples,
                DominanceRelation::Dominates => evicts = true,
                _ => {}
            }
        }
        if evicts {
            window.retain(|&w| relation(row, matrix.row(w)) != DominanceRelation::Dominates);
        }
        window.push(p);
    }
    window
}

pub(crate) fn naive_indices(matrix: &OrientedMatrix) -> Vec<usize> {
    let n = matrix.rows();
    (0..n)
        .filter(|&s| !(0..n).any(|t| relation(matrix.row(t), matrix.row(s)) == DominanceRelation::Dominates))
        .collect()
}

/// Skyline of `input` under `view` via block-nested loops.
///
/// Exact duplicates never dominate each other and are all kept. The result
/// set does not depend on input order; the output order does.
pub fn compute_skyline_bnl<S: Borrow<CloudService> + Clone>(input: &[S], view: &DimensionView) -> Result<Vec<S>> {
    let matrix = OrientedMatrix::project(input, view)?;
    Ok(bnl_indices(&matrix).into_iter().map(|i| input[i].clone()).collect())
}

/// Quadratic reference skyline: keeps `s` iff no `t` dominates it. Input order.
pub fn compute_skyline_naive<S: Borrow<CloudService> + Clone>(input: &[S], view: &DimensionView) -> Result<Vec<S>> {
    let matrix = OrientedMatrix::project(input, view)?;
    Ok(naive_indices(&matrix).into_iter().map(|i| input[i].clone()).collect())
}
