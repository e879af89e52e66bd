use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Dump the expanded (Galerkin) matrices.
    Transform,
    /// Synthesize a gain.
    Synthesize,
    /// Stability report and norm distribution for a gain.
    Analyze,
    /// Trajectory statistics and transform-error comparison for a gain.
    Evaluate,
    /// Norm statistics of the published benchmark gains.
    ReproduceTable1,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Synthesize => "synthesize",
            Command::Analyze => "analyze",
            Command::Evaluate => "evaluate",
            Command::ReproduceTable1 => "reproduce-table1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    WorstCase,
    NominalPce,
    RobustPce,
}

/// Every knob of a run; loaded from `--config` and overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub plant: Option<PathBuf>,
    pub out: PathBuf,
    pub mode: ModeArg,
    pub degree: usize,
    pub rho2: f64,
    /// Search the smallest `ρ²` in `[0, rho2]` (robust mode).
    pub bisect: bool,
    pub gain: Option<Vec<Vec<f64>>>,
    pub gain_file: Option<PathBuf>,
    pub restarts: usize,
    pub max_outer_iters: usize,
    pub gamma_tol: f64,
    pub vertices: Option<Vec<Vec<f64>>>,
    /// Points per parameter for norm distributions.
    pub grid: usize,
    /// Points per parameter for the stability post-analysis.
    pub stability_grid: usize,
    pub stability_margin: f64,
    pub mc: usize,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    /// Initial state; all ones when absent.
    pub x0: Option<Vec<f64>>,
    /// Gauss nodes per parameter for transform errors.
    pub error_nodes: usize,
    pub quad_nodes: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            plant: None,
            out: PathBuf::from("out"),
            mode: ModeArg::NominalPce,
            degree: 2,
            rho2: 0.0,
            bisect: false,
            gain: None,
            gain_file: None,
            restarts: 1,
            max_outer_iters: 60,
            gamma_tol: 1e-7,
            vertices: None,
            grid: 1000,
            stability_grid: 1001,
            stability_margin: 1e-6,
            mc: 5000,
            t_end: 10.0,
            dt: 1e-3,
            record_every: 10,
            x0: None,
            error_nodes: 101,
            quad_nodes: None,
            seed: 0,
        }
    }
}

pub const MAX_DEGREE: usize = 20;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::schema(path.display().to_string(), e.to_string()))?;
        // Relative paths inside a config resolve against its directory.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.plant, &mut cfg.gain_file].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.degree > MAX_DEGREE {
            return bad(format!("degree must be at most {MAX_DEGREE}"));
        }
        if !(self.rho2 >= 0.0 && self.rho2.is_finite()) {
            return bad("rho2 must be finite and nonnegative".into());
        }
        if self.grid < 2 || self.stability_grid < 2 {
            return bad("grids need at least 2 points".into());
        }
        if self.mc < 2 {
            return bad("mc needs at least 2 samples".into());
        }
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.dt <= self.t_end) {
            return bad("need 0 < dt <= t_end".into());
        }
        if self.restarts == 0 || self.record_every == 0 || self.error_nodes == 0 {
            return bad("restarts, record_every and error_nodes must be positive".into());
        }
        if self.gain.is_some() && self.gain_file.is_some() {
            return bad("give either gain or gain_file, not both".into());
        }
        for p in [&self.plant, &self.gain_file].into_iter().flatten() {
            if !p.exists() {
                return bad(format!("{} does not exist", p.display()));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let c = RunConfig { out: PathBuf::new(), ..self.clone() };
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
