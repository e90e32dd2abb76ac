use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Reads and parses a JSON document, reporting the path of the offending
/// field on failure.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, &path.display().to_string())
}

pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        CliError::Json {
            origin: origin.to_string(),
            field: if field == "." { "(root)".into() } else { field },
            message: inner.to_string(),
        }
    })
}

/// SHA-256 of the compact JSON form of `value`; object keys are sorted, so
/// the hash depends only on content.
pub fn hash<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value).expect("inputs serialize");
    let bytes = serde_json::to_vec(&canonical).expect("value serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// `"a,b"` into a pair of reals.
pub fn parse_domain(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected \"a,b\", got \"{text}\""))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("lower bound: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("upper bound: {e}"))?;
    Ok((a, b))
}
