//! Flat `key = value` configuration with fail-closed parsing: unknown keys
//! are errors, every accepted key is validated, and the effective
//! configuration (defaults applied) echoes into the metadata sidecars.

use std::fmt;
use std::path::{Path, PathBuf};

use gaugeline_core::dynamics::{BackgroundGaugeChoice, OmegaGridSpec};
use gaugeline_core::potentials::{GaugeChoice, SystemConfig, TimeGridSpec};

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub what: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.what),
            None => write!(f, "config: {}", self.what),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, what: impl Into<String>) -> ConfigError {
    ConfigError { line, what: what.into() }
}

/// Parameters a sweep axis may range over.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SweepParam {
    ClusterCount,
    Beta,
    LNm,
    YOverL,
    SpanY,
    TfNs,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] = [
        SweepParam::ClusterCount,
        SweepParam::Beta,
        SweepParam::LNm,
        SweepParam::YOverL,
        SweepParam::SpanY,
        SweepParam::TfNs,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SweepParam::ClusterCount => "N",
            SweepParam::Beta => "beta",
            SweepParam::LNm => "l_nm",
            SweepParam::YOverL => "Y_over_l",
            SweepParam::SpanY => "span_Y",
            SweepParam::TfNs => "t_f_ns",
        }
    }

    fn from_key(key: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.key() == key)
    }
}

#[derive(Clone, Debug)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Fully validated run configuration with defaults applied.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub cluster_count: f64,
    pub beta: f64,
    pub l_nm: f64,
    pub y_over_l: f64,
    pub span_y: f64,
    pub electron_mass_ev: f64,
    pub gauges: Vec<GaugeChoice>,
    pub backgrounds: Vec<BackgroundGaugeChoice>,
    pub t_f_ns: Option<f64>,
    pub time_grid: TimeGridSpec,
    pub omega_grid: OmegaGridSpec,
    pub berry_correction: bool,
    pub oracle_photon_conserving: bool,
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    pub sweep: Vec<SweepAxis>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sys = SystemConfig::study_defaults();
        Self {
            cluster_count: sys.cluster_count,
            beta: sys.beta,
            l_nm: sys.l_nm,
            y_over_l: sys.y_nm / sys.l_nm,
            span_y: sys.span_in_y,
            electron_mass_ev: sys.electron_mass_ev,
            gauges: GaugeChoice::ALL.to_vec(),
            backgrounds: vec![BackgroundGaugeChoice::Multipolar],
            t_f_ns: None,
            time_grid: TimeGridSpec::default(),
            omega_grid: OmegaGridSpec::default(),
            berry_correction: false,
            oracle_photon_conserving: false,
            workers: 1,
            out_dir: None,
            sweep: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            cluster_count: self.cluster_count,
            beta: self.beta,
            l_nm: self.l_nm,
            y_nm: self.y_over_l * self.l_nm,
            span_in_y: self.span_y,
            electron_mass_ev: self.electron_mass_ev,
            cluster_charge_sign: 1.0,
        }
    }

    /// Spectrum accumulation time: explicit t_f, else the transit
    /// duration.
    pub fn effective_t_f_ns(&self) -> Result<f64, ConfigError> {
        match (self.t_f_ns, self.system().transit_duration_ns()) {
            (Some(t), _) => Ok(t),
            (None, Some(t)) => Ok(t),
            (None, None) => Err(err(None, "t_f_ns is required when beta = 0")),
        }
    }

    /// Trajectory/adiabaticity window: the full transit, or t_f for a
    /// parked (β = 0) cluster.
    pub fn scan_window_ns(&self) -> Result<(f64, f64), ConfigError> {
        match self.system().transit_duration_ns() {
            Some(t) => Ok((t, 0.5 * t)),
            None => {
                let t = self.effective_t_f_ns()?;
                Ok((t, 0.5 * t))
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system().validate().map_err(|e| err(None, e.to_string()))?;
        self.time_grid.validate().map_err(|e| err(None, e.to_string()))?;
        self.omega_grid.validate().map_err(|e| err(None, e.to_string()))?;
        if let Some(t) = self.t_f_ns {
            if !(t > 0.0) {
                return Err(err(None, "t_f_ns must be positive"));
            }
        }
        if self.gauges.is_empty() || self.backgrounds.is_empty() {
            return Err(err(None, "gauge and background lists must be non-empty"));
        }
        if self.workers == 0 {
            return Err(err(None, "workers must be >= 1"));
        }
        for axis in &self.sweep {
            if axis.values.is_empty() {
                return Err(err(None, format!("sweep axis {} has no values", axis.param.key())));
            }
        }
        Ok(())
    }

    /// With one sweep axis value substituted.
    pub fn with_sweep_value(&self, param: SweepParam, value: f64) -> Self {
        let mut out = self.clone();
        match param {
            SweepParam::ClusterCount => out.cluster_count = value,
            SweepParam::Beta => out.beta = value,
            SweepParam::LNm => out.l_nm = value,
            SweepParam::YOverL => out.y_over_l = value,
            SweepParam::SpanY => out.span_y = value,
            SweepParam::TfNs => out.t_f_ns = Some(value),
        }
        out.sweep = Vec::new();
        out
    }

    /// The effective configuration as sidecar key=value pairs, in a fixed
    /// order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let f = |x: f64| gaugeline_core::report::fmt_f64(x).unwrap_or_else(|_| "nan".into());
        let mut kv = vec![
            ("N".into(), f(self.cluster_count)),
            ("beta".into(), f(self.beta)),
            ("l_nm".into(), f(self.l_nm)),
            ("Y_over_l".into(), f(self.y_over_l)),
            ("span_Y".into(), f(self.span_y)),
            ("electron_mass_ev".into(), f(self.electron_mass_ev)),
            (
                "gauge".into(),
                self.gauges.iter().map(|g| g.label()).collect::<Vec<_>>().join(","),
            ),
            (
                "background".into(),
                self.backgrounds.iter().map(|b| b.label()).collect::<Vec<_>>().join(","),
            ),
            (
                "t_f_ns".into(),
                self.t_f_ns.map(f).unwrap_or_else(|| "transit".into()),
            ),
            ("time_coarse_points".into(), self.time_grid.coarse_points.to_string()),
            ("time_refine_factor".into(), self.time_grid.refine_factor.to_string()),
            ("time_refine_window_y".into(), f(self.time_grid.refine_window_y)),
            ("omega_half_window_per_s".into(), f(self.omega_grid.half_window_per_s)),
            ("omega_points".into(), self.omega_grid.points.to_string()),
            (
                "omega_insert_half_window_per_s".into(),
                f(self.omega_grid.insert_half_window_per_s),
            ),
            ("omega_insert_factor".into(), self.omega_grid.insert_factor.to_string()),
            ("berry_correction".into(), self.berry_correction.to_string()),
            ("oracle_photon_conserving".into(), self.oracle_photon_conserving.to_string()),
            ("workers".into(), self.workers.to_string()),
        ];
        if let Some(dir) = &self.out_dir {
            kv.push(("out_dir".into(), dir.display().to_string()));
        }
        for axis in &self.sweep {
            kv.push((
                format!("sweep_{}", axis.param.key()),
                axis.values.iter().map(|&v| f(v)).collect::<Vec<_>>().join(","),
            ));
        }
        kv
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| err(Some(line), format!("key `{key}`: `{value}` is not a number")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse::<usize>()
        .map_err(|_| err(Some(line), format!("key `{key}`: `{value}` is not a count")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(err(Some(line), format!("key `{key}`: `{other}` is not a boolean"))),
    }
}

fn parse_f64_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|v| parse_f64(line, key, v.trim())).collect()
}

/// Parse the `key = value` text into a validated config. Absent keys fall
/// back to the study defaults (N = 10¹², β = 0.1, l = 6.33 nm,
/// Y/l = 10⁶, span 100Y).
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(Some(line_no), format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "N" => cfg.cluster_count = parse_f64(line_no, key, value)?,
            "beta" => cfg.beta = parse_f64(line_no, key, value)?,
            "l_nm" => cfg.l_nm = parse_f64(line_no, key, value)?,
            "Y_over_l" => cfg.y_over_l = parse_f64(line_no, key, value)?,
            "span_Y" => cfg.span_y = parse_f64(line_no, key, value)?,
            "electron_mass_ev" => cfg.electron_mass_ev = parse_f64(line_no, key, value)?,
            "gauge" => {
                cfg.gauges = value
                    .split(',')
                    .map(|v| v.trim().parse::<GaugeChoice>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(Some(line_no), e.to_string()))?;
            }
            "background" => {
                cfg.backgrounds = value
                    .split(',')
                    .map(|v| v.trim().parse::<BackgroundGaugeChoice>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| err(Some(line_no), e.to_string()))?;
            }
            "t_f_ns" => cfg.t_f_ns = Some(parse_f64(line_no, key, value)?),
            "time_coarse_points" => cfg.time_grid.coarse_points = parse_usize(line_no, key, value)?,
            "time_refine_factor" => cfg.time_grid.refine_factor = parse_usize(line_no, key, value)?,
            "time_refine_window_y" => {
                cfg.time_grid.refine_window_y = parse_f64(line_no, key, value)?
            }
            "omega_half_window_per_s" => {
                cfg.omega_grid.half_window_per_s = parse_f64(line_no, key, value)?
            }
            "omega_points" => cfg.omega_grid.points = parse_usize(line_no, key, value)?,
            "omega_insert_half_window_per_s" => {
                cfg.omega_grid.insert_half_window_per_s = parse_f64(line_no, key, value)?
            }
            "omega_insert_factor" => {
                cfg.omega_grid.insert_factor = parse_usize(line_no, key, value)?
            }
            "berry_correction" => cfg.berry_correction = parse_bool(line_no, key, value)?,
            "oracle_photon_conserving" => {
                cfg.oracle_photon_conserving = parse_bool(line_no, key, value)?
            }
            "workers" => cfg.workers = parse_usize(line_no, key, value)?,
            "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
            other => {
                if let Some(param) = other.strip_prefix("sweep_").and_then(SweepParam::from_key) {
                    cfg.sweep.push(SweepAxis {
                        param,
                        values: parse_f64_list(line_no, other, value)?,
                    });
                } else if other.starts_with("sweep_") {
                    return Err(err(
                        Some(line_no),
                        format!("sweep axis `{other}` does not name an existing parameter"),
                    ));
                } else {
                    return Err(err(Some(line_no), format!("unknown key `{other}`")));
                }
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(None, format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}
