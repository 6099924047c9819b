use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{Cli, Command};
use crate::error::{Error, Result};
use crate::rotsym::RadialMetric;
use crate::surfspec::AmbientMode;

const KEYS: &[&str] = &[
    "band_limit",
    "seed",
    "out",
    "tol_scale",
    "delta",
    "trials",
    "p2_draws",
    "u",
    "u_file",
    "u_sup",
    "n_eigs",
    "metric",
    "m",
    "a",
    "mode",
    "points",
    "r_lo",
    "r_hi",
    "small_volume",
];

/// `key=value` lines; `#` starts a comment, dashes in keys read as
/// underscores.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: no + 1, msg: format!("expected `key=value`, found `{line}`") })?;
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse { line: no + 1, msg: format!("unknown key `{key}`") });
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| Error::Config(format!("config value `{v}` for `{key}` does not parse")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricChoice {
    Flat,
    Schwarzschild,
    Hyperbolic,
    AdsSchwarzschild,
    MassProfile,
}

impl FromStr for MetricChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "flat" => Ok(Self::Flat),
            "schwarzschild" => Ok(Self::Schwarzschild),
            "hyperbolic" => Ok(Self::Hyperbolic),
            "ads-schwarzschild" => Ok(Self::AdsSchwarzschild),
            "mass-profile" => Ok(Self::MassProfile),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    Zero,
    Random,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ProfileConfig {
    pub metric: MetricChoice,
    pub m: f64,
    pub a: Option<f64>,
    pub mode: Option<AmbientMode>,
    pub points: usize,
    pub r_lo: Option<f64>,
    pub r_hi: Option<f64>,
    pub small_volume: Option<bool>,
}

impl ProfileConfig {
    pub fn build_metric(&self) -> Result<RadialMetric> {
        let metric = match self.metric {
            MetricChoice::Flat => RadialMetric::flat(),
            MetricChoice::Schwarzschild => RadialMetric::schwarzschild(self.m)?,
            MetricChoice::Hyperbolic => RadialMetric::hyperbolic(),
            MetricChoice::AdsSchwarzschild => RadialMetric::ads_schwarzschild(self.m)?,
            MetricChoice::MassProfile => RadialMetric::mass_profile(self.m, self.a.unwrap_or(2.0 * self.m))?,
        };
        Ok(match self.mode {
            Some(mode) => metric.with_mode(mode),
            None => metric,
        })
    }

    /// Sampled radius range, `[1.05 r_h, 40 m]` with a horizon and
    /// `[0.05, 40]` (or `[0.05, 10]` for hyperbolic growth) without.
    pub fn radius_range(&self, metric: &RadialMetric) -> Result<(f64, f64)> {
        let (lo, hi) = if metric.has_horizon() {
            (1.05 * metric.r_min(), 40.0 * self.m.max(metric.r_min()))
        } else if matches!(metric.mode(), AmbientMode::Hyperbolic) {
            (0.05, 10.0)
        } else {
            (0.05, 40.0)
        };
        let lo = self.r_lo.unwrap_or(lo);
        let hi = self.r_hi.unwrap_or(hi);
        if !(lo > metric.r_min() && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!(
                "radius range [{lo}, {hi}] must satisfy r_min = {} < r_lo < r_hi",
                metric.r_min()
            )));
        }
        Ok((lo, hi))
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub band_limit: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub tol_scale: f64,
    pub delta: f64,
    pub trials: u64,
    pub p2_draws: u64,
    pub spectrum_source: SpectrumSource,
    pub u_sup: f64,
    pub n_eigs: usize,
    pub profile: ProfileConfig,
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T> {
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

fn pick_opt<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>> {
    Ok(match flag {
        Some(v) => Some(v),
        None => file.get(key)?,
    })
}

impl RunConfig {
    /// Merges defaults, the config file and the flags, flags last.
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let (mf, sp, pr) = match &cli.command {
            Command::Meanfield(a) => (Some(a), None, None),
            Command::Spectrum(a) => (None, Some(a), None),
            Command::Profile(a) => (None, None, Some(a)),
            Command::ShtCheck => (None, None, None),
        };
        let band_limit = pick(cli.band_limit, &file, "band_limit", 12)?;
        let tol_scale = pick(cli.tol_scale, &file, "tol_scale", 1.0)?;
        if !(tol_scale > 0.0 && tol_scale.is_finite()) {
            return Err(Error::Config(format!("tol_scale {tol_scale} must be positive")));
        }
        let min_band = if mf.is_some() { 8 } else { 4 };
        if band_limit < min_band {
            return Err(Error::Config(format!("band limit {band_limit} below the minimum {min_band}")));
        }

        let u: String = pick(sp.and_then(|a| a.u.clone()), &file, "u", "zero".into())?;
        let u_file: Option<PathBuf> = pick_opt(sp.and_then(|a| a.u_file.clone()), &file, "u_file")?;
        let spectrum_source = match u.as_str() {
            "zero" => SpectrumSource::Zero,
            "random" => SpectrumSource::Random,
            "file" => {
                SpectrumSource::File(u_file.ok_or_else(|| Error::Config("`--u file` needs `--u-file PATH`".into()))?)
            }
            other => return Err(Error::Config(format!("unknown u source `{other}`"))),
        };

        let mode: Option<String> = pick_opt(pr.and_then(|a| a.mode.clone()), &file, "mode")?;
        let profile = ProfileConfig {
            metric: pick::<String>(pr.and_then(|a| a.metric.clone()), &file, "metric", "flat".into())?.parse()?,
            m: pick(pr.and_then(|a| a.m), &file, "m", 1.0)?,
            a: pick_opt(pr.and_then(|a| a.a), &file, "a")?,
            mode: mode.map(|s| s.parse()).transpose()?,
            points: pick(pr.and_then(|a| a.points), &file, "points", 200)?,
            r_lo: pick_opt(pr.and_then(|a| a.r_lo), &file, "r_lo")?,
            r_hi: pick_opt(pr.and_then(|a| a.r_hi), &file, "r_hi")?,
            small_volume: pick_opt(pr.and_then(|a| a.small_volume), &file, "small_volume")?,
        };
        if profile.points < 3 {
            return Err(Error::Config(format!("points {} must be at least 3", profile.points)));
        }

        Ok(RunConfig {
            band_limit,
            seed: pick(cli.seed, &file, "seed", 0)?,
            out: pick(cli.out.clone(), &file, "out", PathBuf::from("hawklab_out"))?,
            tol_scale,
            delta: pick(mf.and_then(|a| a.delta), &file, "delta", 0.05)?,
            trials: pick(mf.and_then(|a| a.trials), &file, "trials", 100)?,
            p2_draws: pick(mf.and_then(|a| a.p2_draws), &file, "p2_draws", 1000)?,
            spectrum_source,
            u_sup: pick(sp.and_then(|a| a.u_sup), &file, "u_sup", 0.2)?,
            n_eigs: pick(sp.and_then(|a| a.n_eigs), &file, "n_eigs", 9)?,
            profile,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn config_file_syntax() {
        let c = ConfigFile::parse("# run\nseed = 4\nband-limit=16\n\n").unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(4));
        assert_eq!(c.get::<usize>("band_limit").unwrap(), Some(16));
        assert!(matches!(ConfigFile::parse("x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ConfigFile::parse("colour=red"), Err(Error::Parse { .. })));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "seed=9\ndelta=0.1\n").unwrap();
        let args = ["hawklab", "--config", p.to_str().unwrap(), "meanfield", "--delta", "0.02"];
        let cfg = RunConfig::resolve(&Cli::parse_from(args)).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.delta, 0.02);
        assert_eq!(cfg.band_limit, 12);
    }

    #[test]
    fn band_limit_floors() {
        let low = Cli::parse_from(["hawklab", "--band-limit", "6", "meanfield"]);
        assert!(matches!(RunConfig::resolve(&low), Err(Error::Config(_))));
        let ok = Cli::parse_from(["hawklab", "--band-limit", "6", "sht-check"]);
        assert!(RunConfig::resolve(&ok).is_ok());
    }

    #[test]
    fn metric_names() {
        assert_eq!("ads_schwarzschild".parse::<MetricChoice>().unwrap(), MetricChoice::AdsSchwarzschild);
        assert!("kerr".parse::<MetricChoice>().is_err());
    }
}
