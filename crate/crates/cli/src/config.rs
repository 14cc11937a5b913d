//! Run configuration: a `key=value` file, positional `key=value` words and
//! flags, merged in that order of increasing precedence.

use clap::{Args, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrandKind {
    Oracle,
    Lemma,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RawArgs {
    /// `key=value` settings, overridden by flags.
    #[arg(value_name = "KEY=VALUE")]
    pub assignments: Vec<String>,
    /// File of `key=value` lines; `#` starts a comment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Time-derivative order.
    #[arg(long)]
    pub i: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; relative paths resolve against `DRHEAT_OUT_DIR` when set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Recurrence depth.
    #[arg(long = "levels")]
    pub levels: Option<usize>,
    /// Highest recurrence order.
    #[arg(long = "orders")]
    pub orders: Option<usize>,
    /// Homogeneous dimension, for `sigma-threshold` without a space.
    #[arg(long = "q")]
    pub q: Option<f64>,
    /// Random samples per identity in `geometry-check`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub integrand: Option<IntegrandKind>,
}

/// Fully resolved configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub m: usize,
    pub k: usize,
    pub eps: f64,
    pub sigma: f64,
    pub p: f64,
    pub i: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub r_max: f64,
    pub points: usize,
    pub seed: u64,
    pub levels: usize,
    pub orders: usize,
    pub q: Option<f64>,
    pub samples: usize,
    pub integrand: IntegrandKind,
    pub format: Format,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn canonical_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "m" => "m",
        "k" => "k",
        "eps" | "epsilon" => "eps",
        "sigma" => "sigma",
        "p" => "p",
        "i" => "i",
        "t_min" | "t-min" => "t_min",
        "t_max" | "t-max" => "t_max",
        "r_max" | "r-max" => "r_max",
        "points" => "points",
        "seed" => "seed",
        "out" => "out",
        "format" => "format",
        "L" | "levels" => "levels",
        "I" | "orders" => "orders",
        "Q" | "q" => "q",
        "samples" => "samples",
        "integrand" => "integrand",
        _ => return None,
    })
}

fn parse_assignment(word: &str, origin: &str) -> Result<(&'static str, String), ConfigError> {
    let (key, value) = word
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("{origin}: expected KEY=VALUE, found `{word}`")))?;
    let canon = canonical_key(key.trim()).ok_or_else(|| ConfigError(format!("{origin}: unknown key `{}`", key.trim())))?;
    Ok((canon, value.trim().to_string()))
}

fn parse<T: std::str::FromStr>(map: &BTreeMap<&'static str, String>, key: &str) -> Result<Option<T>, ConfigError> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| ConfigError(format!("invalid value `{v}` for `{key}`")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(command: &'static str, raw: &RawArgs) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<&'static str, String> = BTreeMap::new();
        if let Some(path) = &raw.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = parse_assignment(line, &format!("{}:{}", path.display(), n + 1))?;
                map.insert(k, v);
            }
        }
        for word in &raw.assignments {
            let (k, v) = parse_assignment(word, "argument")?;
            map.insert(k, v);
        }
        macro_rules! flag {
            ($field:ident, $key:literal) => {
                if let Some(v) = &raw.$field {
                    map.insert($key, v.to_string());
                }
            };
        }
        flag!(m, "m");
        flag!(k, "k");
        flag!(eps, "eps");
        flag!(sigma, "sigma");
        flag!(p, "p");
        flag!(i, "i");
        flag!(t_min, "t_min");
        flag!(t_max, "t_max");
        flag!(r_max, "r_max");
        flag!(points, "points");
        flag!(seed, "seed");
        flag!(levels, "levels");
        flag!(orders, "orders");
        flag!(q, "q");
        flag!(samples, "samples");
        if let Some(out) = &raw.out {
            map.insert("out", out.display().to_string());
        }
        if let Some(f) = raw.format {
            map.insert("format", f.to_possible_value().unwrap().get_name().to_string());
        }
        if let Some(f) = raw.integrand {
            map.insert("integrand", f.to_possible_value().unwrap().get_name().to_string());
        }

        let enum_value = |key: &str| -> Result<Option<String>, ConfigError> { Ok(map.get(key).cloned()) };
        let format = match enum_value("format")?.as_deref() {
            None => default_format(command),
            Some(s) => Format::from_str(s, true).map_err(|_| ConfigError(format!("invalid format `{s}`; use csv or json")))?,
        };
        let integrand = match enum_value("integrand")?.as_deref() {
            None => IntegrandKind::Oracle,
            Some(s) => IntegrandKind::from_str(s, true)
                .map_err(|_| ConfigError(format!("invalid integrand `{s}`; use oracle or lemma")))?,
        };
        let cfg = RunConfig {
            command,
            m: parse(&map, "m")?.unwrap_or(2),
            k: parse(&map, "k")?.unwrap_or(0),
            eps: parse(&map, "eps")?.unwrap_or(0.1),
            sigma: parse(&map, "sigma")?.unwrap_or(0.0),
            p: parse(&map, "p")?.unwrap_or(2.0),
            i: parse(&map, "i")?.unwrap_or(0),
            t_min: parse(&map, "t_min")?.unwrap_or(0.1),
            t_max: parse(&map, "t_max")?.unwrap_or(10.0),
            r_max: parse(&map, "r_max")?.unwrap_or(12.0),
            points: parse(&map, "points")?.unwrap_or(20),
            seed: parse(&map, "seed")?.unwrap_or(0),
            levels: parse(&map, "levels")?.unwrap_or(400),
            orders: parse(&map, "orders")?.unwrap_or(8),
            q: parse(&map, "q")?,
            samples: parse(&map, "samples")?.unwrap_or(1000),
            integrand,
            format,
            out: map.get("out").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError(msg));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return fail(format!("eps = {} must lie in (0, 1)", self.eps));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return fail(format!("need 0 < t_min < t_max, got t_min = {}, t_max = {}", self.t_min, self.t_max));
        }
        if !(self.r_max >= 0.0 && self.r_max.is_finite()) {
            return fail(format!("r_max = {} must be finite and non-negative", self.r_max));
        }
        if self.points < 2 {
            return fail(format!("points = {} must be at least 2", self.points));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma = {} must be finite and non-negative", self.sigma));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return fail(format!("p = {} must lie in (1, ∞)", self.p));
        }
        if let Some(q) = self.q {
            if !(q > 0.0 && q.is_finite()) {
                return fail(format!("Q = {q} must be positive"));
            }
        }
        if self.samples == 0 || self.levels == 0 {
            return fail("samples and L must be positive".into());
        }
        Ok(())
    }
}

fn default_format(command: &str) -> Format {
    match command {
        "eval-kernel" | "recurrence" => Format::Csv,
        _ => Format::Json,
    }
}
