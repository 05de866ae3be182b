//! Optional JSON configuration: tolerances and catalog aliases.

use std::collections::BTreeMap;
use std::path::Path;

use lft::verify::Tolerances;
use lft::{Error, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub tolerances: Tolerances,
    /// Short names for function specs, e.g. `"q2": "quadratic{dim=2}"`.
    pub aliases: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let config: Config = serde_json::from_str(&text)?;
        config.tolerances.validate()?;
        Ok(config)
    }

    /// The spec behind an alias, or `spec` itself.
    pub fn resolve<'a>(&'a self, spec: &'a str) -> &'a str {
        self.aliases.get(spec).map(String::as_str).unwrap_or(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c: Config =
            serde_json::from_str(r#"{"aliases": {"q": "quadratic{dim=2}"}, "tolerances": {"gradients": 1e-3}}"#).unwrap();
        assert_eq!(c.resolve("q"), "quadratic{dim=2}");
        assert_eq!(c.resolve("exp"), "exp");
        assert_eq!(c.tolerances.gradients, 1e-3);
        assert_eq!(c.tolerances.theorem_closed, Tolerances::default().theorem_closed);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"tolerance": {}}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"tolerances": {"theorem": 1}}"#).is_err());
    }
}
