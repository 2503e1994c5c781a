//! Capacity caps.
//!
//! Exhaustive routines (coset enumeration, hypertree enumeration,
//! skeleton-expansion search, dense kernels) refuse to run past these
//! limits with a loud [`crate::Error::Capacity`] instead of silently
//! degrading. The `HYPERTREE_CAPS` environment variable and the CLI
//! `--caps` flag override the defaults with `key=value` pairs.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// Max rank of the coboundary space enumerated per coset (2^rank walk).
    pub coset: u32,
    /// Max dimension of the ambient cochain space for exact expansion
    /// constants (2^dim cosets overall).
    pub ambient: u32,
    /// Max number of candidate face-sets in hypertree enumeration.
    pub enumeration: u64,
    /// Max ground-set size for dense kernel materialization/eigensolves.
    pub dense: u64,
    /// Max vertex count for the exhaustive skeleton-expansion search.
    pub skeleton: u32,
    /// Max subset size for Poisson-binomial count laws.
    pub count_law: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            coset: 30,
            ambient: 25,
            enumeration: 1_000_000,
            dense: 2048,
            skeleton: 22,
            count_law: 2000,
        }
    }
}

impl Caps {
    /// Defaults, then `HYPERTREE_CAPS`, then `overrides` (e.g. `--caps`).
    pub fn from_env_and(overrides: Option<&str>) -> Result<Self> {
        let mut caps = Caps::default();
        if let Ok(env) = std::env::var("HYPERTREE_CAPS") {
            caps.apply(&env)?;
        }
        if let Some(s) = overrides {
            caps.apply(s)?;
        }
        Ok(caps)
    }

    /// Applies a comma-separated `key=value` list.
    pub fn apply(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("caps entry `{item}` is not key=value")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::invalid(format!("caps value `{v}` is not an integer")))
            };
            match key.trim() {
                "coset" => self.coset = parse(value)? as u32,
                "ambient" => self.ambient = parse(value)? as u32,
                "enum" | "enumeration" => self.enumeration = parse(value)?,
                "dense" => self.dense = parse(value)?,
                "skeleton" => self.skeleton = parse(value)? as u32,
                "countlaw" | "count_law" => self.count_law = parse(value)?,
                other => return Err(Error::invalid(format!("unknown caps key `{other}`"))),
            }
        }
        Ok(())
    }
}
