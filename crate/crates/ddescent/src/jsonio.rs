//! Canonical serialization. JSON objects are emitted with sorted keys and
//! no whitespace, exact integers as decimal strings, and floats with 17
//! significant digits, so byte equality of payloads coincides with
//! semantic equality.

use num::BigUint;
use serde_json::{json, Map, Value};
use std::str::FromStr;

use crate::dist::DistributionTable;
use crate::error::{Error, Result};
use crate::janson::JansonCertificate;
use crate::mc::{GrowthEntry, GrowthOutcome, NormalityReport};
use crate::perm::{DescentSpec, MomentReport, Rational};
use crate::stats::PairClassCounts;

/// 17 significant digits: enough to round-trip any finite f64 exactly.
pub fn format_float(x: f64) -> String {
    assert!(x.is_finite(), "refusing to serialize non-finite float {x}");
    format!("{x:.16e}")
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if let Some(u) = num.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = num.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format_float(num.as_f64().expect("numeric json value")));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            out.push('[');
            for (idx, item) in items.iter().enumerate() {
                if idx > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap, so iteration is
            // already key-sorted
            out.push('{');
            for (idx, (key, item)) in map.iter().enumerate() {
                if idx > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push(':');
                write_canonical(item, out);
            }
            out.push('}');
        }
    }
}

/// Canonical textual form of a JSON value.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

pub fn spec_value(spec: &DescentSpec) -> Value {
    match spec {
        DescentSpec::Uniform { d } => json!({"kind": "uniform", "d": d}),
        DescentSpec::Vector { ds } => json!({"kind": "vector", "d": ds}),
    }
}

pub fn spec_from_value(value: &Value) -> Result<DescentSpec> {
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Input("spec is missing \"kind\"".into()))?;
    match kind {
        "uniform" => {
            let d = value
                .get("d")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Input("uniform spec needs integer \"d\"".into()))?;
            DescentSpec::uniform(u32::try_from(d).map_err(|_| Error::Input("d too large".into()))?)
        }
        "vector" => {
            let ds = value
                .get("d")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Input("vector spec needs array \"d\"".into()))?;
            let ds = ds
                .iter()
                .map(|entry| {
                    entry
                        .as_u64()
                        .and_then(|d| u32::try_from(d).ok())
                        .ok_or_else(|| Error::Input("vector entries must be integers".into()))
                })
                .collect::<Result<Vec<u32>>>()?;
            DescentSpec::vector(ds)
        }
        other => Err(Error::Input(format!("unknown spec kind {other:?}"))),
    }
}

pub fn table_value(table: &DistributionTable) -> Value {
    let counts: Vec<Value> = table
        .counts()
        .iter()
        .map(|c| Value::String(c.to_string()))
        .collect();
    json!({
        "n": table.n(),
        "spec": spec_value(table.spec()),
        "counts": counts,
        "total": table.total().to_string(),
    })
}

pub fn table_from_value(value: &Value) -> Result<DistributionTable> {
    let n = value
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Input("table is missing \"n\"".into()))?;
    let n = u32::try_from(n).map_err(|_| Error::Input("n too large".into()))?;
    let spec = spec_from_value(
        value
            .get("spec")
            .ok_or_else(|| Error::Input("table is missing \"spec\"".into()))?,
    )?;
    spec.validate_for(n)?;
    let raw_counts = value
        .get("counts")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Input("table is missing \"counts\"".into()))?;
    let counts = raw_counts
        .iter()
        .map(|entry| {
            entry
                .as_str()
                .and_then(|s| BigUint::from_str(s).ok())
                .ok_or_else(|| Error::Input("counts must be decimal strings".into()))
        })
        .collect::<Result<Vec<BigUint>>>()?;
    if counts.len() as u64 != spec.max_statistic(n) + 1 {
        return Err(Error::Input(format!(
            "table has {} counts, expected {}",
            counts.len(),
            spec.max_statistic(n) + 1
        )));
    }
    let total = value
        .get("total")
        .and_then(Value::as_str)
        .and_then(|s| BigUint::from_str(s).ok())
        .ok_or_else(|| Error::Input("table is missing \"total\"".into()))?;
    if counts.iter().sum::<BigUint>() != total {
        return Err(Error::Input("table total does not match counts".into()));
    }
    Ok(DistributionTable::new(n, spec, counts))
}

pub fn rational_string(value: &Rational) -> String {
    value.to_string()
}

pub fn moment_value(report: &MomentReport) -> Value {
    json!({
        "mean": rational_string(&report.mean),
        "variance": rational_string(&report.variance),
        "source": report.source.name(),
    })
}

fn uniform_d(spec: &DescentSpec) -> Option<u32> {
    match spec {
        DescentSpec::Uniform { d } => Some(*d),
        DescentSpec::Vector { .. } => None,
    }
}

pub fn normality_value(report: &NormalityReport) -> Value {
    let mut map = Map::new();
    map.insert("n".into(), json!(report.n));
    map.insert("spec".into(), spec_value(&report.spec));
    map.insert("trials".into(), json!(report.trials));
    map.insert("seed".into(), json!(report.seed));
    map.insert(
        "mu".into(),
        Value::String(rational_string(&report.standardization.mu)),
    );
    map.insert("sigma".into(), json!(report.standardization.sigma));
    map.insert(
        "sigma_source".into(),
        json!(report.standardization.source.name()),
    );
    map.insert("empirical_mean".into(), json!(report.empirical_mean));
    map.insert(
        "empirical_variance".into(),
        json!(report.empirical_variance),
    );
    map.insert("ks_statistic".into(), json!(report.ks_statistic));
    map.insert("skewness".into(), json!(report.skewness));
    map.insert("excess_kurtosis".into(), json!(report.excess_kurtosis));
    map.insert(
        "ks_resolution_floor".into(),
        json!(report.ks_resolution_floor),
    );
    Value::Object(map)
}

pub fn growth_value(epsilon: f64, trials: u64, seed: u64, entries: &[GrowthEntry]) -> Value {
    let rows: Vec<Value> = entries
        .iter()
        .map(|entry| match &entry.outcome {
            GrowthOutcome::Report(report) => json!({
                "n": entry.n,
                "d": entry.d,
                "report": normality_value(report),
                "skipped": Value::Null,
            }),
            GrowthOutcome::Skipped { reason } => json!({
                "n": entry.n,
                "d": entry.d,
                "report": Value::Null,
                "skipped": reason,
            }),
        })
        .collect();
    json!({
        "epsilon": epsilon,
        "trials": trials,
        "seed": seed,
        "entries": rows,
    })
}

pub fn certificate_value(cert: &JansonCertificate) -> Value {
    json!({
        "n": cert.n,
        "d": cert.d,
        "m": cert.m,
        "N_n": cert.pair_count,
        "delta_used": cert.degree_used,
        "sigma_sq": rational_string(&cert.sigma_sq),
        "bound_value": cert.bound_value,
        "simplified_bound": cert.simplified_bound,
    })
}

pub fn pair_class_value(n: u32, d: u32, counts: &PairClassCounts) -> Value {
    json!({
        "n": n,
        "d": d,
        "equal": counts.equal.to_string(),
        "aligned": counts.aligned.to_string(),
        "crossed": counts.crossed.to_string(),
        "independent": counts.independent.to_string(),
        "total": counts.total().to_string(),
    })
}

// --- CSV schemas (header row mandatory, floats in 17-digit form) ---

pub const DISTRIBUTION_CSV_HEADER: &str = "k,count";

pub fn distribution_csv(table: &DistributionTable) -> String {
    let mut out = String::from(DISTRIBUTION_CSV_HEADER);
    out.push('\n');
    for (k, count) in table.counts().iter().enumerate() {
        out.push_str(&format!("{k},{count}\n"));
    }
    out
}

pub const NORMALITY_CSV_HEADER: &str = "n,d,spec,trials,seed,mu,sigma,sigma_source,\
empirical_mean,empirical_variance,ks_statistic,skewness,excess_kurtosis,ks_resolution_floor";

pub fn normality_csv_row(report: &NormalityReport) -> String {
    let d = uniform_d(&report.spec)
        .map(|d| d.to_string())
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        report.n,
        d,
        report.spec.label(),
        report.trials,
        report.seed,
        rational_string(&report.standardization.mu),
        format_float(report.standardization.sigma),
        report.standardization.source.name(),
        format_float(report.empirical_mean),
        format_float(report.empirical_variance),
        format_float(report.ks_statistic),
        format_float(report.skewness),
        format_float(report.excess_kurtosis),
        format_float(report.ks_resolution_floor),
    )
}

pub const CERTIFICATE_CSV_HEADER: &str =
    "n,d,m,N_n,delta_used,sigma_sq,bound_value,simplified_bound";

pub fn certificate_csv_row(cert: &JansonCertificate) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        cert.n,
        cert.d,
        cert.m,
        cert.pair_count,
        cert.degree_used,
        rational_string(&cert.sigma_sq),
        format_float(cert.bound_value),
        format_float(cert.simplified_bound),
    )
}

pub const PAIRS_CSV_HEADER: &str = "class,count";

pub fn pairs_csv(counts: &PairClassCounts) -> String {
    format!(
        "{PAIRS_CSV_HEADER}\nequal,{}\naligned,{}\ncrossed,{}\nindependent,{}\n",
        counts.equal, counts.aligned, counts.crossed, counts.independent
    )
}

pub const PAIR_DUMP_CSV_HEADER: &str = "i1,j1,i2,j2,class,expectation";
