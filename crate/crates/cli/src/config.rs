//! TOML run configuration, merged underneath command-line flags.
//!
//! Grammar: top-level `workers` and `format`, plus one table per subcommand
//! (`[synth]`, `[solve]`, `[refine]`, `[eval]`, `[reach]`, `[demo]`) whose
//! keys are the subcommand's long flag names. A flag given on the command
//! line always wins; a boolean flag only overrides when set.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub workers: Option<usize>,
    pub format: Option<String>,
    pub synth: Option<toml::Table>,
    pub solve: Option<toml::Table>,
    pub refine: Option<toml::Table>,
    pub eval: Option<toml::Table>,
    pub reach: Option<toml::Table>,
    pub demo: Option<toml::Table>,
}

pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Fill every unset field of `flags` from `section`.
pub fn merge<T: Serialize + DeserializeOwned>(flags: T, section: Option<&toml::Table>) -> Result<T, CliError> {
    let Some(section) = section else { return Ok(flags) };
    let mut merged = serde_json::to_value(&flags).expect("flags serialize");
    let base = serde_json::to_value(section).map_err(|e| CliError::Usage(format!("config: {e}")))?;
    let (Value::Object(m), Value::Object(base)) = (&mut merged, base) else {
        return Ok(flags);
    };
    for (key, value) in base {
        match m.get(&key) {
            None => return Err(CliError::Usage(format!("config: unknown key `{key}`"))),
            Some(Value::Null | Value::Bool(false)) => {
                m.insert(key, value);
            }
            Some(_) => {}
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::Usage(format!("config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case")]
    struct Flags {
        n: Option<usize>,
        seed: Option<u64>,
        visible_only: bool,
    }

    fn table(text: &str) -> toml::Table {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn flags_win_and_gaps_are_filled() {
        let flags = Flags { n: Some(3), seed: None, visible_only: false };
        let out = merge(flags, Some(&table("n = 10\nseed = 4\nvisible-only = true"))).unwrap();
        assert_eq!(out, Flags { n: Some(3), seed: Some(4), visible_only: true });
    }

    #[test]
    fn unknown_and_mistyped_keys_are_usage_errors() {
        let flags = || Flags { n: None, seed: None, visible_only: false };
        assert!(matches!(merge(flags(), Some(&table("bogus = 1"))), Err(CliError::Usage(_))));
        assert!(matches!(merge(flags(), Some(&table("n = \"ten\""))), Err(CliError::Usage(_))));
    }
}
