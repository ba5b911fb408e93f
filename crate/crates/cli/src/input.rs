use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Reads `path`, or stdin when `path` is `-`.
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    parse_series(&text, &path.display().to_string())
}

/// One finite value per line, oldest first. Blank lines and `#` comments
/// are skipped.
pub fn parse_series(text: &str, origin: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() || token.starts_with('#') {
            continue;
        }
        let v: f64 = match token.parse() {
            Ok(v) => v,
            Err(_) => bail!("{origin}: line {}: '{token}' is not a number", i + 1),
        };
        if !v.is_finite() {
            bail!("{origin}: line {}: value must be finite, got '{token}'", i + 1);
        }
        values.push(v);
    }
    Ok(values)
}
