#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use skyfilter_core::electre::CriterionConfig;
use skyfilter_core::{CloudService, DimensionView, Sense, ViewDimension};

pub fn dim_id(j: usize) -> String {
    format!("d{j}")
}

pub fn view(senses: &[Sense]) -> DimensionView {
    DimensionView::new(
        senses
            .iter()
            .enumerate()
            .map(|(j, &sense)| ViewDimension { id: dim_id(j), sense })
            .collect(),
    )
    .unwrap()
}

pub fn svc(id: impl Into<String>, values: &[f64]) -> CloudService {
    CloudService {
        id: id.into(),
        name: String::new(),
        fixed: BTreeMap::new(),
        dims: values.iter().enumerate().map(|(j, &v)| (dim_id(j), v)).collect(),
    }
}

pub fn services(rows: &[Vec<f64>]) -> Vec<CloudService> {
    rows.iter().enumerate().map(|(i, r)| svc(format!("s{i}"), r)).collect()
}

pub fn random_senses(rng: &mut impl Rng, d: usize) -> Vec<Sense> {
    (0..d)
        .map(|_| if rng.gen() { Sense::Minimize } else { Sense::Maximize })
        .collect()
}

/// Uniform values in [0, 1000).
pub fn continuous_rows(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(0.0..1000.0)).collect()).collect()
}

/// Small integer values, so ties and exact duplicates are common.
pub fn discrete_rows(rng: &mut impl Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    let levels = rng.gen_range(2..6);
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(0..levels) as f64).collect())
        .collect()
}

pub fn sorted_ids<S: std::borrow::Borrow<CloudService>>(set: &[S]) -> Vec<String> {
    let mut ids: Vec<String> = set.iter().map(|s| s.borrow().id.clone()).collect();
    ids.sort();
    ids
}

pub fn neutral_criteria(weights: &[f64]) -> Vec<CriterionConfig> {
    weights
        .iter()
        .enumerate()
        .map(|(j, &w)| CriterionConfig {
            dimension_id: dim_id(j),
            weight: w,
            q_ind: 0.0,
            p_pref: 0.0,
            v_veto: f64::INFINITY,
        })
        .collect()
}
