use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cechsim_core::{Error, PointCloud};
use serde::de::DeserializeOwned;
use serde::Serialize;

const CONFIG_PREFIX: &str = "config: ";

/// Header lines (without the `#` marker) recording the command and its resolved config.
pub fn header<C: Serialize>(command: &str, config: &C) -> Result<Vec<String>, Error> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(vec![
        format!("cechsim {} {command}", env!("CARGO_PKG_VERSION")),
        format!("{CONFIG_PREFIX}{}", serde_json::to_string(config)?),
        format!("generated-unix: {stamp}"),
    ])
}

pub fn create(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `prefix` with `ext` appended to its file name.
pub fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

/// Reads a config from a JSON file, a JSON summary written by this tool, or
/// the `# config:` header line of any CSV output.
pub fn read_config<C: DeserializeOwned>(path: &Path) -> Result<C, Error> {
    let text = std::fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(trimmed)?;
        let inner = match value.get("config") {
            Some(c) if value.get("records").is_some() || value.get("results").is_some() => c.clone(),
            _ => value,
        };
        return Ok(serde_json::from_value(inner)?);
    }
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix('#').map(str::trim).and_then(|l| l.strip_prefix(CONFIG_PREFIX)))
        .ok_or_else(|| Error::Parse(format!("{} holds no JSON config", path.display())))?;
    Ok(serde_json::from_str(line)?)
}

/// Reads a cloud in either the CSV or the binary format.
pub fn read_cloud(path: &Path) -> Result<PointCloud, Error> {
    let mut reader = BufReader::new(File::open(path)?);
    let starts_binary = reader.fill_buf()?.starts_with(cechsim_core::sampling::BINARY_MAGIC);
    if starts_binary {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        PointCloud::read_binary(bytes.as_slice())
    } else {
        PointCloud::read_csv(reader)
    }
}
