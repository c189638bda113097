//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pinching_core::{Point, Scenario, ScenarioParams};

use crate::error::SimError;

/// A reported scheme, as named in configs and CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Cas,
    Static,
    Dyn,
    Bound,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [SchemeKind::Cas, SchemeKind::Static, SchemeKind::Dyn, SchemeKind::Bound];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Cas => "cas",
            SchemeKind::Static => "static",
            SchemeKind::Dyn => "dyn",
            SchemeKind::Bound => "bound",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| format!("unknown scheme `{s}` (expected cas, static, dyn or bound)"))
    }
}

/// Which parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Number of pinching patterns `M`, at fixed `N`.
    Patterns,
    /// Number of antennas `N`, at fixed `M`.
    Antennas,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m" | "M" => Ok(Sweep::Patterns),
            "n" | "N" => Ok(Sweep::Antennas),
            _ => Err(format!("sweep must be `m` or `n`, got `{s}`")),
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sweep::Patterns => "m",
            Sweep::Antennas => "n",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    /// Number of users `K`.
    pub users: usize,
    /// Region side lengths `(D_x, D_y)` in meters; the waveguide spans `D_x`.
    pub region: (f64, f64),
    pub waveguide_height: f64,
    pub carrier_frequency: f64,
    pub refractive_index: f64,
    /// Minimum antenna spacing in wavelengths.
    pub spacing_wavelengths: f64,
    pub noise_power_dbm: f64,
    pub power_budget_dbm: f64,
    pub sweep: Sweep,
    pub m_list: Vec<usize>,
    pub n_list: Vec<usize>,
    /// `N` used while sweeping `M`.
    pub antennas: usize,
    /// `M` used while sweeping `N`.
    pub patterns: usize,
    pub schemes: Vec<SchemeKind>,
    pub out: PathBuf,
    pub summary_out: Option<PathBuf>,
    pub schedule_out: Option<PathBuf>,
    /// Record per-row wall-clock time. Off by default so repeated runs give
    /// byte-identical output.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 1,
            users: 10,
            region: (100.0, 40.0),
            waveguide_height: 3.0,
            carrier_frequency: 28e9,
            refractive_index: 1.4,
            spacing_wavelengths: 0.5,
            noise_power_dbm: -80.0,
            power_budget_dbm: 10.0,
            sweep: Sweep::Patterns,
            m_list: (1..=10).collect(),
            n_list: vec![1, 2, 3, 4],
            antennas: 1,
            patterns: 4,
            schemes: SchemeKind::ALL.to_vec(),
            out: PathBuf::from("results.csv"),
            summary_out: None,
            schedule_out: None,
            timing: false,
        }
    }
}

/// Every recognized key, in the order `describe` prints them.
pub const KEYS: [&str; 21] = [
    "trials",
    "seed",
    "k",
    "dx",
    "dy",
    "d",
    "carrier_frequency",
    "n_eff",
    "delta",
    "noise_power_dbm",
    "power_budget_dbm",
    "sweep",
    "m_list",
    "n_list",
    "n",
    "m",
    "schemes",
    "out",
    "summary_out",
    "schedule_out",
    "timing",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| format!("{key}: cannot parse `{value}`: {e}"))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn flag(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got `{value}`")),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

/// `10^((dBm − 30)/10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl ExperimentConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_path(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            SimError::Config { line, message } => SimError::ConfigFile {
                path: path.to_path_buf(),
                line,
                message,
            },
            other => other,
        })
    }

    /// Parses config text: one `key = value` per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut config = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| SimError::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if seen.iter().any(|k| k == key) {
                return Err(SimError::Config {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            config
                .set(key, value.trim())
                .map_err(|message| SimError::Config { line, message })?;
            seen.push(key.to_string());
        }
        Ok(config)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "k" => self.users = num(key, value)?,
            "dx" => self.region.0 = num(key, value)?,
            "dy" => self.region.1 = num(key, value)?,
            "d" => self.waveguide_height = num(key, value)?,
            "carrier_frequency" => self.carrier_frequency = num(key, value)?,
            "n_eff" => self.refractive_index = num(key, value)?,
            "delta" => self.spacing_wavelengths = num(key, value)?,
            "noise_power_dbm" => self.noise_power_dbm = num(key, value)?,
            "power_budget_dbm" => self.power_budget_dbm = num(key, value)?,
            "sweep" => self.sweep = value.parse()?,
            "m_list" => self.m_list = list(key, value)?,
            "n_list" => self.n_list = list(key, value)?,
            "n" => self.antennas = num(key, value)?,
            "m" => self.patterns = num(key, value)?,
            "schemes" => {
                let mut schemes: Vec<SchemeKind> = list(key, value)?;
                schemes.sort();
                schemes.dedup();
                self.schemes = schemes;
            }
            "out" => self.out = PathBuf::from(value),
            "summary_out" => self.summary_out = optional_path(value),
            "schedule_out" => self.schedule_out = optional_path(value),
            "timing" => self.timing = flag(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.users == 0 {
            return bad("k must be at least 1".into());
        }
        let positive = [
            ("dx", self.region.0),
            ("d", self.waveguide_height),
            ("carrier_frequency", self.carrier_frequency),
            ("n_eff", self.refractive_index),
            ("delta", self.spacing_wavelengths),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if !(self.region.1.is_finite() && self.region.1 >= 0.0) {
            return bad(format!("dy must be finite and nonnegative, got {}", self.region.1));
        }
        for (name, v) in [("noise_power_dbm", self.noise_power_dbm), ("power_budget_dbm", self.power_budget_dbm)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        for (name, values) in [("m_list", &self.m_list), ("n_list", &self.n_list)] {
            if values.is_empty() || values.contains(&0) {
                return bad(format!("{name} must be nonempty with positive entries"));
            }
        }
        if self.antennas == 0 || self.patterns == 0 {
            return bad("n and m must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("schemes must name at least one scheme".into());
        }
        let widest = self.antenna_counts().into_iter().max().unwrap_or(1);
        Scenario::new(&self.scenario_params(widest), vec![Point::ground(0.0, 0.0)])
            .map_err(|e| SimError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Antenna counts visited by the sweep.
    pub fn antenna_counts(&self) -> Vec<usize> {
        match self.sweep {
            Sweep::Patterns => vec![self.antennas],
            Sweep::Antennas => self.n_list.clone(),
        }
    }

    /// `(N, M)` pairs visited by the sweep, in output order.
    pub fn sweep_points(&self) -> Vec<(usize, usize)> {
        match self.sweep {
            Sweep::Patterns => self.m_list.iter().map(|&m| (self.antennas, m)).collect(),
            Sweep::Antennas => self.n_list.iter().map(|&n| (n, self.patterns)).collect(),
        }
    }

    pub fn scenario_params(&self, antennas: usize) -> ScenarioParams {
        ScenarioParams {
            carrier_frequency: self.carrier_frequency,
            refractive_index: self.refractive_index,
            waveguide_height: self.waveguide_height,
            spacing_wavelengths: self.spacing_wavelengths,
            region_length_x: self.region.0,
            waveguide_length: None,
            noise_power: dbm_to_watts(self.noise_power_dbm),
            power_budget: dbm_to_watts(self.power_budget_dbm),
            period: 1.0,
            antenna_count: antennas,
        }
    }

    /// Summary path: `summary_out`, or `<out stem>_summary.csv` beside `out`.
    pub fn summary_path(&self) -> PathBuf {
        self.summary_out.clone().unwrap_or_else(|| {
            let stem = self.out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
            self.out.with_file_name(format!("{stem}_summary.csv"))
        })
    }

    /// The configuration as config-file text; parsing it gives back `self`.
    pub fn describe(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let values = [
            self.trials.to_string(),
            self.seed.to_string(),
            self.users.to_string(),
            self.region.0.to_string(),
            self.region.1.to_string(),
            self.waveguide_height.to_string(),
            self.carrier_frequency.to_string(),
            self.refractive_index.to_string(),
            self.spacing_wavelengths.to_string(),
            self.noise_power_dbm.to_string(),
            self.power_budget_dbm.to_string(),
            self.sweep.to_string(),
            join(&self.m_list),
            join(&self.n_list),
            self.antennas.to_string(),
            self.patterns.to_string(),
            self.schemes.iter().map(|s| s.label()).collect::<Vec<_>>().join(","),
            self.out.display().to_string(),
            path(&self.summary_out),
            path(&self.schedule_out),
            self.timing.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
