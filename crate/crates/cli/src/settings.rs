//! `key = value` configuration files. Every command-line flag has a file
//! key of the same name (dashes or underscores); flags override the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use mefuse::{BackendKind, PipelineConfig, PyramidDepth};

const KNOWN_KEYS: &[&str] = &[
    "sigma-spatial",
    "sigma-range",
    "key",
    "backend",
    "pyramid-depth",
    "evs",
    "skip-enhance",
    "dump-stacks",
    "output",
    "out-dir",
    "report",
    "scores",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    origin: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg =
            Self::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        cfg.origin = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", n + 1))?;
            let key = k.trim().to_ascii_lowercase().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{}`", n + 1, k.trim());
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self {
            values,
            origin: None,
        })
    }

    /// Flag value if given, else the parsed file value, else `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("{}: `{key}`: {e}", self.describe())),
        }
    }

    /// Boolean switch: on if the flag is set or the file says so.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.values.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(false),
            Some(v) => match v.as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => bail!(
                    "{}: `{key}` must be true or false, got `{v}`",
                    self.describe()
                ),
            },
        }
    }

    pub fn evs(&self, flag: Option<&str>) -> Result<Option<Vec<f64>>> {
        match flag
            .map(str::to_string)
            .or_else(|| self.values.get("evs").cloned())
        {
            None => Ok(None),
            Some(s) => parse_evs(&s).map(Some),
        }
    }

    fn describe(&self) -> String {
        match &self.origin {
            Some(p) => format!("config {}", p.display()),
            None => "config".to_string(),
        }
    }
}

pub fn parse_evs(s: &str) -> Result<Vec<f64>> {
    let evs = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad EV `{}` in `{s}`", t.trim()))
        })
        .collect::<Result<Vec<_>>>()?;
    if evs.is_empty() || evs.iter().any(|v| !v.is_finite()) {
        bail!("EV list `{s}` must hold finite numbers");
    }
    if evs.windows(2).any(|w| w[0] >= w[1]) {
        bail!("EV list `{s}` must be strictly increasing");
    }
    Ok(evs)
}

/// Pipeline flags shared by every subcommand.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct PipelineArgs {
    /// Spatial sigma of the bilateral local average, in pixels [default: 16]
    #[arg(long)]
    pub sigma_spatial: Option<f64>,
    /// Range sigma of the bilateral local average [default: 3/255]
    #[arg(long)]
    pub sigma_range: Option<f64>,
    /// Target log-average luminance of the middle exposure [default: 0.18]
    #[arg(long)]
    pub key: Option<f64>,
    /// Fusion backend [default: mertens]
    #[arg(long)]
    pub backend: Option<BackendKind>,
    /// Pyramid levels, or `auto` [default: auto]
    #[arg(long)]
    pub pyramid_depth: Option<PyramidDepth>,
}

impl PipelineArgs {
    pub fn resolve(&self, file: &ConfigFile) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(v) = file.pick(self.sigma_spatial, "sigma-spatial")? {
            cfg.sigma_spatial = v;
        }
        if let Some(v) = file.pick(self.sigma_range, "sigma-range")? {
            cfg.sigma_range = v;
        }
        if let Some(v) = file.pick(self.key, "key")? {
            cfg.key = v;
        }
        if let Some(v) = file.pick(self.backend, "backend")? {
            cfg.backend = v;
        }
        if let Some(v) = file.pick(self.pyramid_depth, "pyramid-depth")? {
            cfg.pyramid_depth = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse(
            "# experiment\nsigma_spatial = 8\nkey=0.25 # brighter\n\nbackend = MERTENS\n",
        )
        .unwrap();
        let args = PipelineArgs {
            key: Some(0.1),
            ..PipelineArgs::default()
        };
        let cfg = args.resolve(&file).unwrap();
        assert_eq!(cfg.sigma_spatial, 8.0);
        assert_eq!(cfg.key, 0.1);
        assert_eq!(cfg.backend, BackendKind::Mertens);
        assert_eq!(cfg.sigma_range, PipelineConfig::default().sigma_range);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ConfigFile::parse("sigma-spatial 8").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        let file = ConfigFile::parse("key = dark").unwrap();
        assert!(PipelineArgs::default().resolve(&file).is_err());
        let file = ConfigFile::parse("key = 1.5").unwrap();
        assert!(PipelineArgs::default().resolve(&file).is_err());
        let file = ConfigFile::parse("skip-enhance = maybe").unwrap();
        assert!(file.switch(false, "skip-enhance").is_err());
    }

    #[test]
    fn switches_and_evs() {
        let file = ConfigFile::parse("skip_enhance = yes\nevs = -2, 0, 2").unwrap();
        assert!(file.switch(false, "skip-enhance").unwrap());
        assert!(!file.switch(false, "dump-stacks").unwrap());
        assert_eq!(file.evs(None).unwrap(), Some(vec![-2.0, 0.0, 2.0]));
        assert_eq!(
            file.evs(Some("-1,0,1")).unwrap(),
            Some(vec![-1.0, 0.0, 1.0])
        );
        assert!(parse_evs("0,0").is_err());
        assert!(parse_evs("1,x").is_err());
        assert!(parse_evs("").is_err());
    }
}
