use std::path::Path;

use sha2::{Digest, Sha256};

use crate::CliError;

/// Lifetimes read from a single-column CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub file: String,
    pub values: Vec<f64>,
    pub sha256: String,
}

/// Parses one positive real per record. Lines starting with '#' are comments;
/// a non-numeric first record is taken as a header.
pub fn parse_lifetimes(bytes: &[u8]) -> Result<Vec<f64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let mut values = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [] => continue,
            [field] => match field.parse::<f64>() {
                Ok(v) if v.is_finite() && v > 0.0 => values.push(v),
                Ok(v) => {
                    return Err(format!(
                        "line {line}: lifetimes must be positive and finite, got {v}"
                    ))
                }
                Err(_) if index == 0 => continue,
                Err(_) => return Err(format!("line {line}: cannot parse '{field}' as a number")),
            },
            _ => {
                return Err(format!(
                    "line {line}: expected a single column, found {} fields",
                    fields.len()
                ))
            }
        }
    }
    if values.is_empty() {
        return Err("no observations found".into());
    }
    Ok(values)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let values =
        parse_lifetimes(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(Dataset {
        file: path.display().to_string(),
        values,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}
