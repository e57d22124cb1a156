//! Bundled data files. Setting `LIQGAME_FIXTURES` to a directory makes
//! every lookup read from that directory instead.

use std::path::PathBuf;

use thiserror::Error;

pub const ENV_VAR: &str = "LIQGAME_FIXTURES";

pub const BAYES_LARGE_SMALL: &str = "bayes_large_small.json";
pub const MARKET_CONSTRUCTIVE: &str = "market_constructive.json";
pub const FINAL_4X4: &str = "final_4x4.csv";
pub const INTERMEDIATE_2X4: &str = "intermediate_2x4.csv";

const BUNDLED: &[(&str, &str)] = &[
    (BAYES_LARGE_SMALL, include_str!("../fixtures/bayes_large_small.json")),
    (MARKET_CONSTRUCTIVE, include_str!("../fixtures/market_constructive.json")),
    (FINAL_4X4, include_str!("../fixtures/final_4x4.csv")),
    (INTERMEDIATE_2X4, include_str!("../fixtures/intermediate_2x4.csv")),
];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("no bundled fixture named {0:?}")]
    Unknown(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub fn override_dir() -> Option<PathBuf> {
    std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn read(name: &str) -> Result<String, FixtureError> {
    if let Some(dir) = override_dir() {
        let path = dir.join(name);
        return std::fs::read_to_string(&path).map_err(|source| FixtureError::Io { path, source });
    }
    bundled(name)
        .map(str::to_owned)
        .ok_or_else(|| FixtureError::Unknown(name.into()))
}

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, body)| *body)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}
