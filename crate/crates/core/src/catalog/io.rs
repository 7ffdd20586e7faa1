//! Catalog persistence. JSON-Lines is canonical; CSV uses the fixed column order
//! `id,name,<fixed attributes>,<dimensions>` in schema order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

use super::{builtin_schema, Catalog, CloudService, Schema};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogFormat {
    Jsonl,
    Csv,
}

impl CatalogFormat {
    /// `.csv` files are CSV, anything else JSON-Lines.
    pub fn from_path(path: impl AsRef<Path>) -> Self {
        match path.as_ref().extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CatalogFormat::Csv,
            _ => CatalogFormat::Jsonl,
        }
    }
}

impl FromStr for CatalogFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json-lines" | "ndjson" => Ok(CatalogFormat::Jsonl),
            "csv" => Ok(CatalogFormat::Csv),
            other => Err(format!("unknown catalog format `{other}` (expected jsonl or csv)")),
        }
    }
}

/// Loads a catalog against the built-in schema.
pub fn load_catalog(path: impl AsRef<Path>, format: CatalogFormat) -> Result<Catalog> {
    load_catalog_with_schema(path, format, builtin_schema())
}

pub fn load_catalog_with_schema(path: impl AsRef<Path>, format: CatalogFormat, schema: Schema) -> Result<Catalog> {
    let file = File::open(path)?;
    let services = match format {
        CatalogFormat::Jsonl => read_jsonl(BufReader::new(file))?,
        CatalogFormat::Csv => read_csv(BufReader::new(file), &schema)?,
    };
    Catalog::new(schema, services)
}

pub fn save_catalog(catalog: &Catalog, path: impl AsRef<Path>, format: CatalogFormat) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        CatalogFormat::Jsonl => {
            for s in catalog.services() {
                serde_json::to_writer(&mut out, s)?;
                out.write_all(b"\n")?;
            }
        }
        CatalogFormat::Csv => write_csv(&mut out, catalog)?,
    }
    out.flush()?;
    Ok(())
}

fn read_jsonl(reader: impl BufRead) -> Result<Vec<CloudService>> {
    let mut services = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        services.push(service_from_json(value, lineno)?);
    }
    Ok(services)
}

fn service_from_json(value: Value, line: usize) -> Result<CloudService> {
    let parse_err = |message: String| Error::Parse { line, message };
    let Value::Object(mut obj) = value else {
        return Err(parse_err("record is not a JSON object".into()));
    };
    let id = match obj.remove("id") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(parse_err("`id` must be a string".into())),
        None => return Err(parse_err("missing `id`".into())),
    };
    let name = match obj.remove("name") {
        Some(Value::String(s)) => s,
        None | Some(Value::Null) => String::new(),
        Some(_) => return Err(parse_err("`name` must be a string".into())),
    };
    let fixed = match obj.remove("fixed") {
        Some(Value::Object(m)) => m
            .into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => Ok((k, s)),
                _ => Err(parse_err(format!("fixed attribute `{k}` must be a string"))),
            })
            .collect::<Result<BTreeMap<_, _>>>()?,
        None => BTreeMap::new(),
        Some(_) => return Err(parse_err("`fixed` must be an object".into())),
    };
    let dims = match obj.remove("dims") {
        Some(Value::Object(m)) => m
            .into_iter()
            .map(|(k, v)| {
                let x = match &v {
                    Value::Number(n) => n.as_f64(),
                    // Non-finite values can only travel as strings in JSON.
                    Value::String(s) => s.trim().parse::<f64>().ok(),
                    _ => None,
                };
                match x {
                    Some(x) if x.is_finite() => Ok((k, x)),
                    Some(x) => Err(Error::schema(Some(&id), &k, format!("non-finite value {x}"))),
                    None => Err(parse_err(format!("dimension `{k}` is not a number: {v}"))),
                }
            })
            .collect::<Result<BTreeMap<_, _>>>()?,
        None => BTreeMap::new(),
        Some(_) => return Err(parse_err("`dims` must be an object".into())),
    };
    if let Some(extra) = obj.keys().next() {
        return Err(parse_err(format!("unexpected field `{extra}`")));
    }
    Ok(CloudService { id, name, fixed, dims })
}

enum Column {
    Id,
    Name,
    Fixed(String),
    Dim(String),
}

fn read_csv(reader: impl std::io::Read, schema: &Schema) -> Result<Vec<CloudService>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }

    let mut columns = Vec::with_capacity(headers.len());
    for h in headers.iter() {
        let col = match h {
            "id" => Column::Id,
            "name" => Column::Name,
            h if schema.has_fixed_attribute(h) => Column::Fixed(h.to_owned()),
            h if schema.dimension(h).is_some() => Column::Dim(h.to_owned()),
            h => return Err(Error::schema(None, h, "column not declared in schema")),
        };
        columns.push(col);
    }
    if !headers.iter().any(|h| h == "id") {
        return Err(Error::Parse {
            line: 1,
            message: "missing `id` column".into(),
        });
    }
    for d in schema.dimension_ids() {
        if !headers.iter().any(|h| h == d) {
            return Err(Error::schema(None, d, "missing dimension column"));
        }
    }

    let mut services = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut s = CloudService {
            id: String::new(),
            name: String::new(),
            fixed: BTreeMap::new(),
            dims: BTreeMap::new(),
        };
        for (col, cell) in columns.iter().zip(record.iter()) {
            match col {
                Column::Id => s.id = cell.to_owned(),
                Column::Name => s.name = cell.to_owned(),
                Column::Fixed(a) => {
                    s.fixed.insert(a.clone(), cell.to_owned());
                }
                Column::Dim(d) => {
                    let x = cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("dimension `{d}` is not a number: {cell:?}"),
                    })?;
                    s.dims.insert(d.clone(), x);
                }
            }
        }
        services.push(s);
    }
    Ok(services)
}

fn write_csv(out: impl Write, catalog: &Catalog) -> Result<()> {
    let schema = catalog.schema();
    let mut wtr = csv::Writer::from_writer(out);
    let header: Vec<&str> = ["id", "name"]
        .into_iter()
        .chain(schema.fixed_attributes.iter().map(|a| a.name.as_str()))
        .chain(schema.dimension_ids())
        .collect();
    wtr.write_record(&header).map_err(csv_io)?;
    for s in catalog.services() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        row.push(s.id.clone());
        row.push(s.name.clone());
        row.extend(schema.fixed_attributes.iter().map(|a| s.fixed[&a.name].clone()));
        // `Display` for f64 is the shortest text that parses back to the same value.
        row.extend(schema.dimension_ids().map(|d| s.dims[d].to_string()));
        wtr.write_record(&row).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(e.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::generate_synthetic;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn header_only_csv_is_empty_catalog() {
        let dir = tempfile::tempdir().unwrap();
        let schema = builtin_schema();
        let header: Vec<&str> = ["id", "name"]
            .into_iter()
            .chain(schema.fixed_attributes.iter().map(|a| a.name.as_str()))
            .chain(schema.dimension_ids())
            .collect();
        let path = write(&dir, "c.csv", &format!("{}\n", header.join(",")));
        let cat = load_catalog(&path, CatalogFormat::Csv).unwrap();
        assert!(cat.is_empty());

        let path = write(&dir, "c.jsonl", "");
        assert!(load_catalog(&path, CatalogFormat::Jsonl).unwrap().is_empty());
    }

    #[test]
    fn single_record_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let cat = generate_synthetic(1, &builtin_schema(), 5).unwrap();
        for fmt in [CatalogFormat::Jsonl, CatalogFormat::Csv] {
            let path = dir.path().join("one");
            save_catalog(&cat, &path, fmt).unwrap();
            let back = load_catalog(&path, fmt).unwrap();
            assert_eq!(back, cat);
            for (k, v) in &cat.services()[0].dims {
                assert_eq!(back.services()[0].dims[k].to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn nan_is_a_schema_error_naming_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let cat = generate_synthetic(1, &builtin_schema(), 5).unwrap();

        let path = dir.path().join("c.csv");
        save_catalog(&cat, &path, CatalogFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let latency_col = lines[0].split(',').position(|h| h == "latency").unwrap();
        let mut cells: Vec<String> = lines[1].split(',').map(str::to_owned).collect();
        cells[latency_col] = "NaN".into();
        lines[1] = cells.join(",");
        std::fs::write(&path, lines.join("\n")).unwrap();
        let err = load_catalog(&path, CatalogFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "latency"), "{err}");

        let mut v = serde_json::to_value(&cat.services()[0]).unwrap();
        v["dims"]["latency"] = Value::String("NaN".into());
        let path = write(&dir, "c.jsonl", &v.to_string());
        let err = load_catalog(&path, CatalogFormat::Jsonl).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "latency"), "{err}");
        assert!(err.to_string().contains("latency"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let cat = generate_synthetic(2, &builtin_schema(), 5).unwrap();
        let first = serde_json::to_string(&cat.services()[0]).unwrap();
        let path = write(&dir, "c.jsonl", &format!("{first}\n{{not json\n"));
        match load_catalog(&path, CatalogFormat::Jsonl).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_id_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let cat = generate_synthetic(1, &builtin_schema(), 5).unwrap();
        let line = serde_json::to_string(&cat.services()[0]).unwrap();
        let path = write(&dir, "c.jsonl", &format!("{line}\n{line}\n"));
        assert!(matches!(load_catalog(&path, CatalogFormat::Jsonl), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn save_to_unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let cat = generate_synthetic(1, &builtin_schema(), 5).unwrap();
        let path = dir.path().join("no/such/dir/c.jsonl");
        assert!(matches!(save_catalog(&cat, &path, CatalogFormat::Jsonl), Err(Error::Io(_))));
        // A directory cannot be opened as a file for writing, even as root.
        assert!(matches!(save_catalog(&cat, dir.path(), CatalogFormat::Csv), Err(Error::Io(_))));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(CatalogFormat::from_path("a/b.CSV"), CatalogFormat::Csv);
        assert_eq!(CatalogFormat::from_path("a/b.jsonl"), CatalogFormat::Jsonl);
        assert_eq!("csv".parse::<CatalogFormat>().unwrap(), CatalogFormat::Csv);
        assert!("xml".parse::<CatalogFormat>().is_err());
    }
}
