//! Multi-criteria cloud-service selection.
//!
//! A query first narrows the catalog by categorical requirements, then keeps
//! the Pareto-optimal services over the dimensions it optimizes (skyline), and
//! finally removes services outranked under ELECTRE IS with the user's
//! importance weights.

pub mod bench;
pub mod catalog;
pub mod electre;
pub mod error;
pub mod pipeline;
pub mod skyline;

pub use catalog::{
    builtin_schema, filter_fixed, generate_synthetic, load_catalog, load_catalog_with_schema, save_catalog, Catalog,
    CatalogFormat, CloudService, DimensionSpec, FixedAttributeSpec, Schema, Sense,
};
pub use electre::{
    compute_solution, global_concordance, partial_concordance, veto_ok, CriterionConfig, ElectreSettings, VetoRule,
};
pub use error::{Error, Result};
pub use pipeline::{importance_to_weight, run_query, run_query_with, Importance, Query, SelectionResult};
pub use skyline::{compare, compute_skyline_bnl, compute_skyline_naive, DimensionView, DominanceRelation, ViewDimension};
