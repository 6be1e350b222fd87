//! Run configuration: CLI parsing, config-file parsing, validation.
//!
//! A configuration is assembled in three layers: built-in defaults, then a
//! flat `key = value` config file (`--config PATH`), then individual CLI
//! override flags. Keys in the file match the `SimulationConfig` field names
//! exactly; `#` starts a comment.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Parser};
use thiserror::Error;

/// How small-scale fading enters the collected-power computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingMode {
    /// Channel-hardened approximation: per-AP power is `n_r * beta`.
    Hardened,
    /// Realized Rayleigh fading: per-AP power is `||h||^2 * beta`.
    Exact,
}

/// Which out-of-region terminals count as interferers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceMode {
    /// Every terminal outside the coordination region interferes.
    AllOutOfRegion,
    /// Only terminals whose random pilot collides with the victim's pilot.
    PilotCollisionOnly,
}

impl FromStr for FadingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hardened" => Ok(FadingMode::Hardened),
            "exact" => Ok(FadingMode::Exact),
            _ => Err(format!("expected `hardened` or `exact`, got `{s}`")),
        }
    }
}

impl fmt::Display for FadingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FadingMode::Hardened => "hardened",
            FadingMode::Exact => "exact",
        })
    }
}

impl FromStr for InterferenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all_out_of_region" => Ok(InterferenceMode::AllOutOfRegion),
            "pilot_collision_only" => Ok(InterferenceMode::PilotCollisionOnly),
            _ => Err(format!(
                "expected `all_out_of_region` or `pilot_collision_only`, got `{s}`"
            )),
        }
    }
}

impl fmt::Display for InterferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterferenceMode::AllOutOfRegion => "all_out_of_region",
            InterferenceMode::PilotCollisionOnly => "pilot_collision_only",
        })
    }
}

/// All physical, geometric and run-control parameters of a simulation.
///
/// Distances are in meters, densities in entities per km², shadowing in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// User-terminal density, UTs per km².
    pub rho_u: f64,
    /// Access-point density, APs per km².
    pub rho_a: f64,
    /// Spacing between adjacent EPU lattice centers, meters.
    pub d_epu: f64,
    /// Coordination radii to sweep, meters.
    pub r_coord_list: Vec<f64>,
    /// Also evaluate the mode where each EPU coordinates only the APs
    /// inside its own service hexagon.
    pub baseline_service_area: bool,
    /// Path-loss exponent below the outer breakpoint.
    pub gamma0: f64,
    /// Path-loss exponent beyond the outer breakpoint.
    pub gamma1: f64,
    /// Inner path-loss breakpoint, meters.
    pub d0: f64,
    /// Outer path-loss breakpoint, meters.
    pub d1: f64,
    /// Lognormal shadowing standard deviation, dB.
    pub sigma_sh_db: f64,
    /// Antennas per AP.
    pub n_r: u32,
    /// Coherence interval in channel uses.
    pub tau_c: u32,
    /// EPU lattice columns.
    pub window_nx: u32,
    /// EPU lattice rows (must be even for seamless wrap-around).
    pub window_ny: u32,
    /// Monte Carlo trials.
    pub trials: u32,
    /// Master seed; every random stream in a run derives from it.
    pub master_seed: u64,
    pub fading_mode: FadingMode,
    pub interference_mode: InterferenceMode,
    /// Cap applied to SIR before the spectral-efficiency computation, dB.
    pub max_sir_db: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            rho_u: 10.0,
            rho_a: 40.0,
            d_epu: 1000.0,
            r_coord_list: vec![300.0, 500.0, 700.0, 1000.0],
            baseline_service_area: false,
            gamma0: 2.0,
            gamma1: 3.5,
            d0: 10.0,
            d1: 100.0,
            sigma_sh_db: 8.0,
            n_r: 1,
            tau_c: 200,
            window_nx: 6,
            window_ny: 6,
            trials: 100,
            master_seed: 1,
            fading_mode: FadingMode::Hardened,
            interference_mode: InterferenceMode::AllOutOfRegion,
            max_sir_db: 60.0,
        }
    }
}

impl SimulationConfig {
    /// Torus width in meters.
    pub fn torus_width(&self) -> f64 {
        f64::from(self.window_nx) * self.d_epu
    }

    /// Torus height in meters.
    pub fn torus_height(&self) -> f64 {
        f64::from(self.window_ny) * 3f64.sqrt() / 2.0 * self.d_epu
    }

    /// Renders the configuration in the config-file format.
    ///
    /// Parsing the returned text back yields an identical configuration;
    /// floats use the shortest round-tripping representation.
    pub fn to_file_string(&self) -> String {
        let radii = self
            .r_coord_list
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "rho_u = {}\n\
             rho_a = {}\n\
             d_epu = {}\n\
             r_coord_list = {}\n\
             baseline_service_area = {}\n\
             gamma0 = {}\n\
             gamma1 = {}\n\
             d0 = {}\n\
             d1 = {}\n\
             sigma_sh_db = {}\n\
             n_r = {}\n\
             tau_c = {}\n\
             window_nx = {}\n\
             window_ny = {}\n\
             trials = {}\n\
             master_seed = {}\n\
             fading_mode = {}\n\
             interference_mode = {}\n\
             max_sir_db = {}\n",
            self.rho_u,
            self.rho_a,
            self.d_epu,
            radii,
            self.baseline_service_area,
            self.gamma0,
            self.gamma1,
            self.d0,
            self.d1,
            self.sigma_sh_db,
            self.n_r,
            self.tau_c,
            self.window_nx,
            self.window_ny,
            self.trials,
            self.master_seed,
            self.fading_mode,
            self.interference_mode,
            self.max_sir_db,
        )
    }

    /// Checks every parameter invariant, naming the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invariant(key, format!("must be positive and finite, got {v}")))
            }
        }

        positive("rho_u", self.rho_u)?;
        positive("rho_a", self.rho_a)?;
        positive("d_epu", self.d_epu)?;
        positive("gamma0", self.gamma0)?;
        positive("gamma1", self.gamma1)?;
        positive("d0", self.d0)?;
        positive("d1", self.d1)?;
        if self.d0 >= self.d1 {
            return Err(ConfigError::invariant(
                "d0",
                format!("d0 < d1 violated (d0 = {}, d1 = {})", self.d0, self.d1),
            ));
        }
        if !self.sigma_sh_db.is_finite() || self.sigma_sh_db < 0.0 {
            return Err(ConfigError::invariant(
                "sigma_sh_db",
                format!("must be non-negative and finite, got {}", self.sigma_sh_db),
            ));
        }
        if !self.max_sir_db.is_finite() {
            return Err(ConfigError::invariant("max_sir_db", "must be finite".to_string()));
        }
        if self.n_r < 1 {
            return Err(ConfigError::invariant("n_r", "must be >= 1".to_string()));
        }
        if self.tau_c < 2 {
            return Err(ConfigError::invariant("tau_c", "must be >= 2".to_string()));
        }
        if self.trials < 1 {
            return Err(ConfigError::invariant("trials", "must be >= 1".to_string()));
        }
        if self.window_nx < 1 {
            return Err(ConfigError::invariant("window_nx", "must be >= 1".to_string()));
        }
        if self.window_ny < 2 || !self.window_ny.is_multiple_of(2) {
            return Err(ConfigError::invariant(
                "window_ny",
                format!("must be even and >= 2 for seamless wrap-around, got {}", self.window_ny),
            ));
        }
        if self.r_coord_list.is_empty() && !self.baseline_service_area {
            return Err(ConfigError::invariant(
                "r_coord_list",
                "must name at least one radius unless baseline_service_area is enabled".to_string(),
            ));
        }
        let r_max = self.torus_width().min(self.torus_height()) / 2.0;
        for &r in &self.r_coord_list {
            if !r.is_finite() || r <= 0.0 {
                return Err(ConfigError::invariant(
                    "r_coord_list",
                    format!("radii must be positive and finite, got {r}"),
                ));
            }
            if r > r_max {
                return Err(ConfigError::invariant(
                    "r_coord_list",
                    format!("radius {r} m exceeds half the smaller torus dimension ({r_max} m)"),
                ));
            }
        }
        Ok(())
    }
}

/// Configuration-stage failures; any of these exits the CLI with code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid value for {key}: {reason}")]
    Parse { key: String, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("{key}: {reason}")]
    Invariant { key: String, reason: String },
    #[error("{0}")]
    Cli(String),
}

impl ConfigError {
    fn invariant(key: &str, reason: String) -> Self {
        ConfigError::Invariant { key: key.to_string(), reason }
    }

    fn parse(key: &str, reason: impl fmt::Display) -> Self {
        ConfigError::Parse { key: key.to_string(), reason: reason.to_string() }
    }
}

/// Everything the CLI needs to run: the validated config plus the output dir.
#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: SimulationConfig,
    pub out_dir: PathBuf,
}

#[derive(Parser, Debug)]
#[command(name = "fmamimo", about = "Coordination-radius sweep simulator for fog massive MIMO networks")]
struct CliArgs {
    /// Config file with `key = value` lines; CLI flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV results
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// UT density, per km²
    #[arg(long)]
    rho_u: Option<f64>,
    /// AP density, per km²
    #[arg(long)]
    rho_a: Option<f64>,
    /// EPU lattice spacing, meters
    #[arg(long)]
    d_epu: Option<f64>,
    /// Comma-separated coordination radii, meters
    #[arg(long = "r-coord", value_delimiter = ',')]
    r_coord: Option<Vec<f64>>,
    /// Also evaluate the service-hexagon baseline
    #[arg(long, action = ArgAction::SetTrue)]
    baseline_service_area: bool,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    /// Inner path-loss breakpoint, meters
    #[arg(long)]
    d0: Option<f64>,
    /// Outer path-loss breakpoint, meters
    #[arg(long)]
    d1: Option<f64>,
    /// Shadowing standard deviation, dB
    #[arg(long)]
    sigma_sh_db: Option<f64>,
    /// Antennas per AP
    #[arg(long)]
    n_r: Option<u32>,
    /// Coherence interval, channel uses
    #[arg(long)]
    tau_c: Option<u32>,
    #[arg(long)]
    window_nx: Option<u32>,
    #[arg(long)]
    window_ny: Option<u32>,
    /// Monte Carlo trials
    #[arg(long)]
    trials: Option<u32>,
    /// Master seed
    #[arg(long = "seed")]
    master_seed: Option<u64>,
    /// hardened | exact
    #[arg(long)]
    fading_mode: Option<String>,
    /// all_out_of_region | pilot_collision_only
    #[arg(long)]
    interference_mode: Option<String>,
    /// SIR cap, dB
    #[arg(long)]
    max_sir_db: Option<f64>,
}

/// Parses CLI arguments (without the program name) into a validated config.
pub fn parse_config<I, T>(args: I) -> Result<SimulationConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    parse_cli(args).map(|run| run.config)
}

/// Parses CLI arguments (without the program name) into config + output dir.
pub fn parse_cli<I, T>(args: I) -> Result<RunArgs, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("fmamimo"))
        .chain(args.into_iter().map(Into::into));
    let cli = CliArgs::try_parse_from(argv).map_err(|e| ConfigError::Cli(e.to_string()))?;

    let mut config = SimulationConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
        apply_file(&mut config, &text)?;
    }
    apply_overrides(&mut config, &cli)?;
    config.validate()?;
    Ok(RunArgs { config, out_dir: cli.out })
}

fn apply_overrides(config: &mut SimulationConfig, cli: &CliArgs) -> Result<(), ConfigError> {
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = cli.$field {
                config.$field = v;
            }
        };
    }
    set!(rho_u);
    set!(rho_a);
    set!(d_epu);
    set!(gamma0);
    set!(gamma1);
    set!(d0);
    set!(d1);
    set!(sigma_sh_db);
    set!(n_r);
    set!(tau_c);
    set!(window_nx);
    set!(window_ny);
    set!(trials);
    set!(master_seed);
    set!(max_sir_db);
    if let Some(radii) = &cli.r_coord {
        config.r_coord_list = radii.clone();
    }
    // The flag can only enable the baseline; absence defers to the file.
    if cli.baseline_service_area {
        config.baseline_service_area = true;
    }
    if let Some(s) = &cli.fading_mode {
        config.fading_mode = s.parse().map_err(|e| ConfigError::parse("fading_mode", e))?;
    }
    if let Some(s) = &cli.interference_mode {
        config.interference_mode =
            s.parse().map_err(|e| ConfigError::parse("interference_mode", e))?;
    }
    Ok(())
}

fn apply_file(config: &mut SimulationConfig, text: &str) -> Result<(), ConfigError> {
    for raw_line in text.lines() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::parse(line, "expected `key = value`"))?;
        apply_kv(config, key.trim(), value.trim())?;
    }
    Ok(())
}

fn apply_kv(config: &mut SimulationConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        value.parse().map_err(|e| ConfigError::parse(key, e))
    }

    match key {
        "rho_u" => config.rho_u = num(key, value)?,
        "rho_a" => config.rho_a = num(key, value)?,
        "d_epu" => config.d_epu = num(key, value)?,
        "r_coord_list" => {
            config.r_coord_list = value
                .split(',')
                .map(|s| num(key, s.trim()))
                .collect::<Result<Vec<f64>, _>>()?;
        }
        "baseline_service_area" => config.baseline_service_area = num(key, value)?,
        "gamma0" => config.gamma0 = num(key, value)?,
        "gamma1" => config.gamma1 = num(key, value)?,
        "d0" => config.d0 = num(key, value)?,
        "d1" => config.d1 = num(key, value)?,
        "sigma_sh_db" => config.sigma_sh_db = num(key, value)?,
        "n_r" => config.n_r = num(key, value)?,
        "tau_c" => config.tau_c = num(key, value)?,
        "window_nx" => config.window_nx = num(key, value)?,
        "window_ny" => config.window_ny = num(key, value)?,
        "trials" => config.trials = num(key, value)?,
        "master_seed" => config.master_seed = num(key, value)?,
        "fading_mode" => {
            config.fading_mode = value.parse().map_err(|e| ConfigError::parse(key, e))?
        }
        "interference_mode" => {
            config.interference_mode = value.parse().map_err(|e| ConfigError::parse(key, e))?
        }
        "max_sir_db" => config.max_sir_db = num(key, value)?,
        other => return Err(ConfigError::UnknownKey(other.to_string())),
    }
    Ok(())
}
