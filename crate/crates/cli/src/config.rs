//! Optional TOML file supplying defaults for any flag.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub cv: Option<usize>,
    pub vectorizer: Option<String>,
    pub clf: Option<String>,
    #[serde(rename = "C", alias = "c")]
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub class_weight: Option<String>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub min_df: Option<usize>,
    pub max_features: Option<usize>,
    pub min_words: Option<usize>,
    pub min_confidence: Option<f64>,
    pub k: Option<usize>,
    pub addr: Option<String>,
    pub stopwords: Option<PathBuf>,
    pub bench_reps: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flag, else config value, else default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let c: Config = toml::from_str(
            r#"
            seed = 7
            cv = 10
            vectorizer = "bow"
            clf = "lr"
            C = 10.0
            alpha = 0.5
            class_weight = "none"
            max_iter = 50
            tol = 1e-6
            min_df = 2
            max_features = 100
            min_words = 3
            min_confidence = 0.8
            k = 12
            addr = "0.0.0.0:9000"
            stopwords = "stop.txt"
            bench_reps = 2
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.c, Some(10.0));
        assert_eq!(c.stopwords.as_deref(), Some(Path::new("stop.txt")));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<Config>("sede = 1").is_err());
    }

    #[test]
    fn flag_beats_config_beats_default() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None, None, 3), 3);
    }
}
