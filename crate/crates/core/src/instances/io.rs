//! Instance files: a `value,weight` CSV plus a `<stem>.json` sidecar holding
//! `{L, U, m, name, seed}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_instance, Instance, Item};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Metadata<T> {
    #[serde(rename = "L")]
    pub lower: T,
    #[serde(rename = "U")]
    pub upper: T,
    pub m: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Capacity of the source trace; rows are divided by it on ingest.
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<T>,
}

/// Path of the sidecar belonging to an instance CSV.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `inst` as CSV at `path` and its sidecar next to it.
pub fn write_instance<T: Scalar>(inst: &Instance<T>, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(["value", "weight"]).map_err(csv_io)?;
    for it in &inst.items {
        w.write_record([it.value.to_string(), it.weight.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;
    let meta = Metadata {
        lower: inst.lower,
        upper: inst.upper,
        m: inst.granularity,
        name: inst.name.clone(),
        seed: inst.seed,
        capacity: None,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::InvalidInstance(format!("{other:?}")),
    }
}

/// A parsed instance together with non-fatal findings.
#[derive(Clone, Debug)]
pub struct Ingested<T> {
    pub instance: Instance<T>,
    pub warnings: Vec<String>,
}

/// Reads and validates an instance file written by [`write_instance`].
pub fn ingest<T: Scalar>(path: &Path) -> Result<Instance<T>> {
    let got = ingest_checked(path)?;
    for w in &got.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(got.instance)
}

pub fn ingest_checked<T: Scalar>(path: &Path) -> Result<Ingested<T>> {
    let shown = path.display().to_string();
    let side = sidecar_path(path);
    if !side.exists() {
        return Err(Error::MissingMetadata(side.display().to_string()));
    }
    let meta: Metadata<T> = serde_json::from_str(&fs::read_to_string(&side)?)?;
    if meta.m == 0 {
        return Err(Error::InvalidInstance(format!("{}: m = 0", side.display())));
    }
    let scale = match meta.capacity {
        None => T::one(),
        Some(b) if b > T::zero() && b.is_finite() => b,
        Some(b) => {
            return Err(Error::InvalidInstance(format!(
                "{}: capacity B = {b} must be positive",
                side.display()
            )))
        }
    };

    let parse_err = |line: u64, message: String| Error::Parse {
        path: shown.clone(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_io)?;
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.len() != 2 || &header[0] != "value" || &header[1] != "weight" {
        return Err(parse_err(1, format!("expected header `value,weight`, got `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }

    let mut items = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, got {}", rec.len())));
        }
        let field = |i: usize, name: &str| -> Result<T> {
            rec[i]
                .parse::<T>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("{name} `{}` is not a finite number", &rec[i])))
        };
        let value = field(0, "value")?;
        let weight = field(1, "weight")?;
        if weight <= T::zero() {
            return Err(parse_err(line, format!("weight must be positive, got {weight}")));
        }
        if value < T::zero() {
            return Err(parse_err(line, format!("value must be non-negative, got {value}")));
        }
        items.push(if scale == T::one() {
            Item::new(value, weight)
        } else {
            Item::new(value / scale, weight / scale)
        });
    }

    let mut inst = Instance::new(items, meta.lower, meta.upper, meta.m);
    inst.name = meta.name;
    inst.seed = meta.seed;
    let violations = validate_instance(&inst);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidInstance(format!(
            "{shown}: {v} ({} violation(s))",
            violations.len()
        )));
    }
    let mut warnings = Vec::new();
    if inst.is_empty() {
        warnings.push("instance has no items".to_string());
    }
    Ok(Ingested {
        instance: inst,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::generators::gen_x_nondecreasing;

    fn write_raw(dir: &Path, body: &str, meta: &str) -> PathBuf {
        let p = dir.join("inst.csv");
        fs::write(&p, body).unwrap();
        fs::write(sidecar_path(&p), meta).unwrap();
        p
    }

    const META: &str = r#"{"L": 1.0, "U": 5.0, "m": 10, "name": null, "seed": 3}"#;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ix.csv");
        let inst = gen_x_nondecreasing(2.9, 7, 9, 1.0, std::f64::consts::PI).unwrap();
        write_instance(&inst, &p).unwrap();
        let back: Instance<f64> = ingest(&p).unwrap();
        assert_eq!(back, inst);
        for j in 0..inst.len() {
            assert_eq!(back.density(j).to_bits(), inst.density(j).to_bits());
        }
    }

    #[test]
    fn zero_weight_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_raw(dir.path(), "value,weight\n0.1,0.1\n0.2,0\n", META);
        match ingest::<f64>(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn garbage_field_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_raw(dir.path(), "value,weight\nabc,0.1\n", META);
        let err = ingest::<f64>(&p).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn missing_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lonely.csv");
        fs::write(&p, "value,weight\n").unwrap();
        assert!(matches!(ingest::<f64>(&p), Err(Error::MissingMetadata(_))));
    }

    #[test]
    fn header_only_is_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_raw(dir.path(), "value,weight\n", META);
        let got = ingest_checked::<f64>(&p).unwrap();
        assert!(got.instance.is_empty());
        assert_eq!(got.instance.seed, Some(3));
        assert_eq!(got.warnings.len(), 1);
    }

    #[test]
    fn capacity_is_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let meta = r#"{"L": 1.0, "U": 5.0, "m": 10, "B": 2.0}"#;
        let p = write_raw(dir.path(), "value,weight\n0.4,0.2\n", meta);
        let inst = ingest::<f64>(&p).unwrap();
        assert_eq!(inst.items[0], Item::new(0.2, 0.1));
    }

    #[test]
    fn invalid_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_raw(dir.path(), "value,weight\n0.9,0.1\n", META);
        let err = ingest::<f64>(&p).unwrap_err();
        assert!(err.to_string().contains("density out of [L,U]"), "{err}");
    }
}
