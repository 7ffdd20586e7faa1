//! The built-in ten-dimension QoS schema and the generator's categorical vocabulary.
//!
//! Dimension order is significant: benchmark sweeps take the first `d` entries,
//! so `d = 3` always means storage space, bandwidth and latency. Units are
//! documentation only; every dimension is compared as a unitless real.

use super::{DimensionSpec, FixedAttributeSpec, Schema, Sense};

pub const FIXED_ATTRIBUTE_NAMES: [&str; 8] = [
    "provider",
    "service_model",
    "os_series",
    "os_distribution",
    "cpu_manufacturer",
    "cpu_range",
    "industry",
    "category",
];

const VOCABULARY: [&[&str]; 8] = [
    &["Microsoft", "IBM", "Amazon", "Google", "Oracle", "Salesforce", "Rackspace"],
    &["IaaS", "PaaS", "SaaS"],
    &["Windows", "Mac", "Unix", "Linux"],
    &["Windows XP", "Windows Vista", "Windows 7", "Linux", "Ubuntu", "Red Hat", "Mac OS X"],
    &["Intel", "IBM", "AMD"],
    &["Pentium", "Intel 64", "Xeon", "Opteron", "POWER"],
    &["General", "Education", "Healthcare", "Finance", "Government", "Retail"],
    &["General", "CRM", "E-procurement", "ERP", "Collaboration", "Storage"],
];

// (id, sense, lo, hi, description)
const DIMENSIONS: [(&str, Sense, f64, f64, &str); 10] = [
    ("storage_space", Sense::Maximize, 0.14, 4000.0, "storage space offered (GB)"),
    ("bandwidth", Sense::Maximize, 0.0, 10.0, "network bandwidth"),
    ("latency", Sense::Minimize, 0.0, 10000.0, "network latency (ms)"),
    (
        "portability",
        Sense::Maximize,
        0.03,
        400.0,
        "number of OS compatible with the service / number of OS required by the user",
    ),
    (
        "risk_certifications",
        Sense::Maximize,
        0.0,
        400.0,
        "number of risk management certifications obtained by the provider",
    ),
    ("data_loss", Sense::Minimize, 0.0, 9000.0, "number of data-loss related incidents"),
    ("acquisition_cost", Sense::Minimize, 1.0, 20000.0, "acquisition cost (currency units)"),
    ("ongoing_cost", Sense::Minimize, 0.1, 2000.0, "on-going cost (currency units)"),
    (
        "response_time",
        Sense::Minimize,
        0.0,
        40.0,
        "average response time / maximum response time defined in the SLA",
    ),
    (
        "availability",
        Sense::Minimize,
        0.0,
        1000.0,
        "time during which the service is unavailable / total time of use",
    ),
];

pub fn builtin_fixed_attributes() -> Vec<FixedAttributeSpec> {
    FIXED_ATTRIBUTE_NAMES
        .iter()
        .zip(VOCABULARY)
        .map(|(name, vocab)| FixedAttributeSpec {
            name: (*name).to_owned(),
            vocabulary: vocab.iter().map(|v| (*v).to_owned()).collect(),
        })
        .collect()
}

pub fn builtin_schema() -> Schema {
    Schema {
        dimensions: DIMENSIONS
            .iter()
            .map(|&(id, sense, lo, hi, desc)| DimensionSpec {
                id: id.to_owned(),
                sense,
                range_lo: lo,
                range_hi: hi,
                description: desc.to_owned(),
            })
            .collect(),
        fixed_attributes: builtin_fixed_attributes(),
    }
}
