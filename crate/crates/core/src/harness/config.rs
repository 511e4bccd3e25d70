//! Flat `key = value` configuration files.
//!
//! Keys mirror the long CLI flags without the leading dashes. Blank lines
//! and lines starting with `#` are ignored.

use super::HarnessError;
use std::collections::BTreeMap;

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(HarnessError::Config(format!(
                "line {}: empty key",
                lineno + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_skips_comments() {
        let cfg = parse_config("# sweep\nattack = eve-bell\n\npositions=2\n--seed = 9\n").unwrap();
        assert_eq!(cfg["attack"], "eve-bell");
        assert_eq!(cfg["positions"], "2");
        assert_eq!(cfg["seed"], "9");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            parse_config("attack eve-bell"),
            Err(HarnessError::Config(_))
        ));
        assert!(matches!(parse_config(" = 3"), Err(HarnessError::Config(_))));
    }
}
