//! Flat `key=value` configuration files.
//!
//! Keys are flag names (`lambda_max` and `lambda-max` are the same key).
//! Blank lines and lines starting with `#` are ignored; a repeated key keeps
//! its last value and logs a warning.

use crate::error::CliError;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Every entry, typed or not, by normalised key.
    pub entries: BTreeMap<String, String>,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

fn typed<T: std::str::FromStr>(path: &Path, line: usize, key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Parse {
        path: path.display().to_string(),
        line,
        message: format!("invalid value {value:?} for {key}"),
    })
}

pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Parse {
                path: path.display().to_string(),
                line: line_no,
                message: format!("expected key=value, got {line:?}"),
            });
        };
        let key = normalize_key(k);
        let value = v.trim().to_string();
        if key.is_empty() {
            return Err(CliError::Parse { path: path.display().to_string(), line: line_no, message: "empty key".into() });
        }
        match key.as_str() {
            "seed" => cfg.seed = Some(typed(path, line_no, &key, &value)?),
            "threads" => cfg.threads = Some(typed(path, line_no, &key, &value)?),
            "out" => cfg.out = Some(PathBuf::from(&value)),
            "format" => {
                cfg.format = Some(match value.as_str() {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => {
                        return Err(CliError::Parse {
                            path: path.display().to_string(),
                            line: line_no,
                            message: format!("format must be json or csv, got {value:?}"),
                        })
                    }
                })
            }
            _ => {}
        }
        if let Some(old) = cfg.entries.insert(key.clone(), value.clone()) {
            if old != value {
                log::warn!("{}:{line_no}: {key} redefined ({old} -> {value}); using the last value", path.display());
            }
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ExperimentConfig, CliError> {
        parse_config(s, Path::new("test.cfg"))
    }

    #[test]
    fn empty_is_default() {
        assert_eq!(parse("").unwrap(), ExperimentConfig::default());
        assert_eq!(parse("# nothing\n\n   \n").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn typed_keys() {
        let c = parse("seed=7\nthreads = 2\nformat=csv\nout=a/b.csv\nlambda_max=4096\n").unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.threads, Some(2));
        assert_eq!(c.format, Some(Format::Csv));
        assert_eq!(c.out, Some(PathBuf::from("a/b.csv")));
        assert_eq!(c.entries["lambda-max"], "4096");
    }

    #[test]
    fn last_wins() {
        let c = parse("seed=1\nseed=9\n").unwrap();
        assert_eq!(c.seed, Some(9));
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("seed=1\n\nnot a pair\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse("# c\nseed=x\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
