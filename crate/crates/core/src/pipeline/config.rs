//! Run configuration: a `key = value` text file, overridable key by key.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::balance::{SemicycleKind, DEFAULT_ENSEMBLE, DEFAULT_SWAPS_PER_EDGE};
use crate::community::DEFAULT_RESTARTS;
use crate::ideas::DEFAULT_MIN_FIRST_YEAR;
use crate::ingest::DEFAULT_WINDOW;
use crate::netbuild::DEFAULT_ALPHA;
use crate::netmetrics::DEFAULT_DAMPING;
use crate::preference::DEFAULT_MIN_CITED;
use crate::scimetrics::{TopicLevel, DEFAULT_TOP_K};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_240_501;
pub const DEFAULT_MAX_BLOCKS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub publications: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub covariates_cy: Option<PathBuf>,
    pub covariates_dyad: Option<PathBuf>,
    pub ideas: Option<PathBuf>,
    pub texts: Option<PathBuf>,
    pub out: PathBuf,
    pub alpha: f64,
    pub window: i32,
    pub min_cited: usize,
    pub damping: f64,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub years: Option<(i32, i32)>,
    pub ensemble: usize,
    pub swaps_per_edge: usize,
    pub restarts: usize,
    pub max_blocks: usize,
    pub top_k: usize,
    pub min_first_year: i32,
    pub topic_level: TopicLevel,
    pub semicycles: SemicycleKind,
    pub plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            publications: None,
            citations: None,
            covariates_cy: None,
            covariates_dyad: None,
            ideas: None,
            texts: None,
            out: PathBuf::from("citepref-out"),
            alpha: DEFAULT_ALPHA,
            window: DEFAULT_WINDOW,
            min_cited: DEFAULT_MIN_CITED,
            damping: DEFAULT_DAMPING,
            seed: DEFAULT_SEED,
            threads: 0,
            years: None,
            ensemble: DEFAULT_ENSEMBLE,
            swaps_per_edge: DEFAULT_SWAPS_PER_EDGE,
            restarts: DEFAULT_RESTARTS,
            max_blocks: DEFAULT_MAX_BLOCKS,
            top_k: DEFAULT_TOP_K,
            min_first_year: DEFAULT_MIN_FIRST_YEAR,
            topic_level: TopicLevel::default(),
            semicycles: SemicycleKind::default(),
            plots: true,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

/// Parses `A:B` (inclusive) or a single year.
pub fn parse_years(value: &str) -> Result<(i32, i32)> {
    let (a, b) = value.split_once(':').unwrap_or((value, value));
    let a: i32 = parse("years", a.trim())?;
    let b: i32 = parse("years", b.trim())?;
    if a > b {
        return Err(Error::Config(format!("years: start {a} is after end {b}")));
    }
    Ok((a, b))
}

impl RunConfig {
    /// Reads a config file. Relative paths are resolved against the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, base)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim(), base)?;
        }
        Ok(())
    }

    /// Sets one key. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let key = key.replace('-', "_");
        let path = || Some(base.join(value));
        match key.as_str() {
            "publications" => self.publications = path(),
            "citations" => self.citations = path(),
            "covariates_cy" => self.covariates_cy = path(),
            "covariates_dyad" => self.covariates_dyad = path(),
            "ideas" => self.ideas = path(),
            "texts" => self.texts = path(),
            "out" => self.out = base.join(value),
            "alpha" => self.alpha = parse(&key, value)?,
            "window" => self.window = parse(&key, value)?,
            "min_cited" => self.min_cited = parse(&key, value)?,
            "damping" => self.damping = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "threads" => self.threads = parse(&key, value)?,
            "years" => self.years = Some(parse_years(value)?),
            "ensemble" => self.ensemble = parse(&key, value)?,
            "swaps_per_edge" => self.swaps_per_edge = parse(&key, value)?,
            "restarts" => self.restarts = parse(&key, value)?,
            "max_blocks" => self.max_blocks = parse(&key, value)?,
            "top_k" => self.top_k = parse(&key, value)?,
            "min_first_year" => self.min_first_year = parse(&key, value)?,
            "topic_level" => {
                self.topic_level = match value {
                    "concept" => TopicLevel::Concept,
                    "field" => TopicLevel::Field,
                    _ => return Err(Error::Config(format!("topic_level: expected concept or field, got {value:?}"))),
                }
            }
            "semicycles" => {
                self.semicycles = match value {
                    "transitive" => SemicycleKind::Transitive,
                    "cyclic" => SemicycleKind::Cyclic,
                    _ => return Err(Error::Config(format!("semicycles: expected transitive or cyclic, got {value:?}"))),
                }
            }
            "plots" => self.plots = parse(&key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.window < 1 {
            return bad(format!("window must be at least 1, got {}", self.window));
        }
        if self.min_cited < 1 {
            return bad("min_cited must be at least 1".into());
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad(format!("damping must lie in (0, 1), got {}", self.damping));
        }
        if self.max_blocks < 1 || self.restarts < 1 || self.top_k < 1 {
            return bad("max_blocks, restarts and top_k must be at least 1".into());
        }
        if self.publications.is_none() || self.citations.is_none() {
            return bad("both publications and citations inputs are required".into());
        }
        Ok(())
    }

    /// Analysis settings in canonical text form. Paths and the thread count
    /// are left out since they do not affect results.
    pub fn canonical_settings(&self) -> String {
        let mut s = String::new();
        let years = self.years.map(|(a, b)| format!("{a}:{b}")).unwrap_or_else(|| "auto".into());
        let level = match self.topic_level {
            TopicLevel::Concept => "concept",
            TopicLevel::Field => "field",
        };
        let kind = match self.semicycles {
            SemicycleKind::Transitive => "transitive",
            SemicycleKind::Cyclic => "cyclic",
        };
        let pairs: [(&str, String); 16] = [
            ("alpha", self.alpha.to_string()),
            ("window", self.window.to_string()),
            ("min_cited", self.min_cited.to_string()),
            ("damping", self.damping.to_string()),
            ("seed", self.seed.to_string()),
            ("years", years),
            ("ensemble", self.ensemble.to_string()),
            ("swaps_per_edge", self.swaps_per_edge.to_string()),
            ("restarts", self.restarts.to_string()),
            ("max_blocks", self.max_blocks.to_string()),
            ("top_k", self.top_k.to_string()),
            ("min_first_year", self.min_first_year.to_string()),
            ("topic_level", level.into()),
            ("semicycles", kind.into()),
            ("plots", self.plots.to_string()),
            ("version", env!("CARGO_PKG_VERSION").into()),
        ];
        for (k, v) in pairs {
            writeln!(s, "{k} = {v}").expect("write to string");
        }
        s
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_settings().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_override() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\npublications = p.tsv\ncitations=c.tsv\nmin-cited = 20 # inline\nyears = 2003:2017\n", Path::new("/data"))
            .unwrap();
        assert_eq!(c.publications.as_deref(), Some(Path::new("/data/p.tsv")));
        assert_eq!(c.min_cited, 20);
        assert_eq!(c.years, Some((2003, 2017)));
        c.set("alpha", "0.05", Path::new("")).unwrap();
        assert_eq!(c.alpha, 0.05);
        c.validate().unwrap();
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let mut c = RunConfig::default();
        assert!(c.set("alpha", "x", Path::new("")).is_err());
        assert!(c.set("bogus", "1", Path::new("")).is_err());
        assert!(parse_years("2010:2000").is_err());
        c.alpha = 1.0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn digest_ignores_paths_and_threads() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.threads = 8;
        b.out = PathBuf::from("/elsewhere");
        b.publications = Some(PathBuf::from("x"));
        assert_eq!(a.digest(), b.digest());
        b.seed += 1;
        assert_ne!(a.digest(), b.digest());
    }
}
