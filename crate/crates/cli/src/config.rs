//! Flat `key = value` configuration files.
//!
//! ```text
//! # circular-law at desk scale
//! schema = 1
//! n = 500
//! d = 12
//! z = 0.3, 0.8, 1.5+0.2i
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. `schema` is
//! required. Every other key must belong to the subcommand being run;
//! anything else is rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use circlaw_core::Complex64;

use crate::error::{config_err, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Kind {
    Sample,
    Spectrum,
    CircularLaw,
    SvRegimes,
    Normals,
    Anticonc,
    Report,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Sample => "sample",
            Kind::Spectrum => "spectrum",
            Kind::CircularLaw => "circular-law",
            Kind::SvRegimes => "sv-regimes",
            Kind::Normals => "normals",
            Kind::Anticonc => "anticonc",
            Kind::Report => "report",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Kind::Sample => &["n", "d", "max_attempts", "burn_in"],
            Kind::Spectrum => &[
                "matrix",
                "n",
                "d",
                "scale",
                "z",
                "eig_sweeps",
                "max_attempts",
                "burn_in",
            ],
            Kind::CircularLaw => &["n", "d", "z", "floor", "eig_sweeps", "max_attempts", "burn_in"],
            Kind::SvRegimes => &[
                "n",
                "d",
                "z",
                "t",
                "c_const",
                "cook_c_range",
                "cook_c_bound",
                "inter_c",
                "floor",
                "max_attempts",
                "burn_in",
            ],
            Kind::Normals => &[
                "n",
                "d",
                "k",
                "z",
                "small_c",
                "large_c",
                "indices",
                "alpha",
                "beta",
                "ic_size",
                "a",
                "gamma",
                "rho",
                "max_attempts",
                "burn_in",
            ],
            Kind::Anticonc => &[
                "n",
                "d",
                "z",
                "experiments",
                "s_size",
                "coupling_draws",
                "smallball_draws",
                "rho",
                "delta",
                "step_rho",
                "c_const",
                "gamma",
                "row_index",
                "exact_budget",
                "max_attempts",
                "burn_in",
            ],
            Kind::Report => &["inputs"],
        }
    }
}

/// Keys accepted by every subcommand.
const COMMON_KEYS: &[&str] = &["schema", "kind", "seed", "trials", "threads"];

/// Keys that never influence artifacts and are left out of the config hash.
const UNHASHED_KEYS: &[&str] = &["threads"];

/// A validated configuration for one subcommand.
#[derive(Clone, Debug)]
pub struct Settings {
    pub kind: Kind,
    values: BTreeMap<String, String>,
    /// Directory relative paths in the config are resolved against.
    pub base_dir: PathBuf,
}

/// Parses the raw `key = value` lines.
pub fn parse_entries(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(config_err(format!("line {}: expected `key = value`", no + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty()
            || !k
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
        {
            return Err(config_err(format!("line {}: bad key `{k}`", no + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(config_err(format!("line {}: duplicate key `{k}`", no + 1)));
        }
    }
    Ok(out)
}

impl Settings {
    pub fn from_text(kind: Kind, text: &str, base_dir: &Path) -> CliResult<Self> {
        let values = parse_entries(text)?;
        let schema = values.get("schema").ok_or_else(|| config_err("missing `schema`"))?;
        if schema.parse::<u32>().ok() != Some(SCHEMA_VERSION) {
            return Err(config_err(format!(
                "unsupported schema `{schema}`, expected {SCHEMA_VERSION}"
            )));
        }
        if let Some(k) = values.get("kind") {
            if k != kind.name() {
                return Err(config_err(format!("config is for `{k}`, not `{}`", kind.name())));
            }
        }
        for key in values.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !kind.keys().contains(&key.as_str()) {
                return Err(config_err(format!("unknown key `{key}` for `{}`", kind.name())));
            }
        }
        Ok(Self {
            kind,
            values,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(kind: Kind, path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_text(kind, &text, &base)
    }

    /// Replaces a value, as command-line overrides do.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Entries that determine the artifacts, in key order.
    pub fn hashed_entries(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !UNHASHED_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    /// `key=value` lines of [`Self::hashed_entries`].
    pub fn canonical_text(&self) -> String {
        self.hashed_entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| config_err(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?.ok_or_else(|| config_err(format!("missing `{key}`")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|_| config_err(format!("bad entry `{s}` in `{key}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn complex_list(&self, key: &str) -> CliResult<Option<Vec<Complex64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_complex(s).ok_or_else(|| config_err(format!("bad complex `{s}` in `{key}`"))))
                    .collect()
            })
            .transpose()
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`, with `i` alone meaning `1i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return finite(s.parse().ok()?).map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not the leading one or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse().ok()?,
    };
    Some(Complex64::new(finite(re.parse().ok()?)?, finite(im)?))
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.3"), Some(c(0.3, 0.0)));
        assert_eq!(parse_complex("1.5+0.2i"), Some(c(1.5, 0.2)));
        assert_eq!(parse_complex("-1-2i"), Some(c(-1.0, -2.0)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("2.5i"), Some(c(0.0, 2.5)));
        assert_eq!(parse_complex("1e-3+2E+1i"), Some(c(1e-3, 20.0)));
        assert_eq!(parse_complex("1 + 2i"), Some(c(1.0, 2.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("nan"), None);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let base = Path::new(".");
        assert!(Settings::from_text(Kind::Sample, "schema = 1\nn = 4\nd = 2\n", base).is_ok());
        assert!(Settings::from_text(Kind::Sample, "schema = 1\nnn = 4\n", base).is_err());
        assert!(Settings::from_text(Kind::Sample, "schema = 1\nz = 0.5\n", base).is_err());
        assert!(Settings::from_text(Kind::Sample, "schema = 1\nn = 4\nn = 5\n", base).is_err());
        assert!(Settings::from_text(Kind::Sample, "n = 4\n", base).is_err());
        assert!(Settings::from_text(Kind::Sample, "schema = 2\n", base).is_err());
        assert!(Settings::from_text(Kind::Sample, "schema = 1\nkind = spectrum\n", base).is_err());
        assert!(Settings::from_text(Kind::Sample, "schema = 1\njunk line\n", base).is_err());
    }

    #[test]
    fn typed_access() {
        let s = Settings::from_text(
            Kind::CircularLaw,
            "# c\nschema = 1\nn = 10\nz = 0.3, 1+i\nthreads = 4\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(s.require::<usize>("n").unwrap(), 10);
        assert_eq!(s.get_or::<usize>("d", 3).unwrap(), 3);
        assert!(s.require::<usize>("d").is_err());
        assert_eq!(s.complex_list("z").unwrap().unwrap(), vec![c(0.3, 0.0), c(1.0, 1.0)]);
        assert_eq!(s.canonical_text(), "n=10\nschema=1\nz=0.3, 1+i\n");
    }
}
