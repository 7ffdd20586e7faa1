use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Catalog, CloudService, Schema};
use crate::error::Result;

/// Generates `n` services with every dimension drawn independently and
/// uniformly from its schema range and every fixed attribute drawn uniformly
/// from its vocabulary. Pure in `(n, schema, seed)`.
pub fn generate_synthetic(n: usize, schema: &Schema, seed: u64) -> Result<Catalog> {
    schema.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n.saturating_sub(1).to_string().len().max(6);
    let services = (0..n)
        .map(|i| {
            let fixed = schema
                .fixed_attributes
                .iter()
                .map(|a| {
                    let value = a.vocabulary.choose(&mut rng).map_or("unspecified", String::as_str);
                    (a.name.clone(), value.to_owned())
                })
                .collect();
            let dims = schema
                .dimensions
                .iter()
                .map(|d| (d.id.clone(), rng.gen_range(d.range_lo..=d.range_hi)))
                .collect();
            CloudService {
                id: format!("svc-{i:0width$}"),
                name: format!("Service {i}"),
                fixed,
                dims,
            }
        })
        .collect();
    Catalog::new(schema.clone(), services)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_schema;

    #[test]
    fn deterministic_for_seed() {
        let schema = builtin_schema();
        let a = generate_synthetic(1, &schema, 42).unwrap();
        let b = generate_synthetic(1, &schema, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(1, &schema, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn values_within_bounds() {
        let schema = builtin_schema();
        let cat = generate_synthetic(2000, &schema, 9).unwrap();
        for s in cat.services() {
            for d in &schema.dimensions {
                let v = s.dims[&d.id];
                assert!(d.range_lo <= v && v <= d.range_hi, "{} = {v}", d.id);
            }
            for a in &schema.fixed_attributes {
                assert!(a.vocabulary.contains(&s.fixed[&a.name]));
            }
        }
    }

    #[test]
    fn bandwidth_mean_converges() {
        // Uniform on [0, 10]: mean 5, sd 10/sqrt(12) ~ 2.89; with n = 10_000 the
        // standard error is ~0.029, so a 0.3 band is more than 10 sigma wide.
        let cat = generate_synthetic(10_000, &builtin_schema(), 2024).unwrap();
        let values: Vec<f64> = cat.services().iter().map(|s| s.dims["bandwidth"]).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!(min >= 0.0 && max <= 10.0);
        assert!((mean - 5.0).abs() <= 0.3, "mean {mean}");
    }

    #[test]
    fn ids_unique_and_sortable() {
        let cat = generate_synthetic(50, &builtin_schema(), 1).unwrap();
        let ids: Vec<_> = cat.services().iter().map(|s| s.id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        assert_eq!(ids[0], "svc-000000");
    }
}
