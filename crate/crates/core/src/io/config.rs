//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use crate::cases::{CaseSpec, Geometry};
use crate::driver::DriverOptions;
use crate::error::{Error, Result};
use crate::material::Material;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    Pgd,
    Fe,
    Both,
}

impl SolverChoice {
    pub fn pgd(self) -> bool {
        matches!(self, SolverChoice::Pgd | SolverChoice::Both)
    }

    pub fn fe(self) -> bool {
        matches!(self, SolverChoice::Fe | SolverChoice::Both)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub case: CaseSpec,
    pub material: Material,
    pub driver: DriverOptions,
    /// Sub-mode tolerance of the multi-time decomposition.
    pub mt_tol: f64,
    /// Loading cycles per macro step.
    pub macro_cycles: usize,
    /// Equilibrium tolerance of the incremental FE solver.
    pub tol_eq: f64,
    pub solver: SolverChoice,
    pub output_dir: PathBuf,
    pub probes: Vec<[f64; 2]>,
    pub vtk: bool,
}

impl RunConfig {
    pub fn for_case(case: CaseSpec) -> Self {
        RunConfig {
            case,
            material: Material::steel(),
            driver: DriverOptions::default(),
            mt_tol: 1e-6,
            macro_cycles: 1,
            tol_eq: 1e-8,
            solver: SolverChoice::Pgd,
            output_dir: PathBuf::from("output"),
            probes: vec![[0.0, 0.0]],
            vtk: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses the key-value text; `path` only labels error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Config { path: path.to_path_buf(), line, message };
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(i + 1, format!("expected `key = value`, got `{line}`")))?;
            entries.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }

        let mut geometry = Geometry::DogBone;
        for (line, k, v) in &entries {
            if k == "geometry" {
                geometry = match v.to_ascii_lowercase().as_str() {
                    "dogbone" | "dog-bone" | "dog_bone" => Geometry::DogBone,
                    "plate" | "cracked_plate" | "crackedplate" => Geometry::CrackedPlate,
                    _ => return Err(err(*line, format!("unknown geometry `{v}`"))),
                };
            }
        }
        let mut cfg = RunConfig::for_case(match geometry {
            Geometry::DogBone => CaseSpec::dogbone(),
            Geometry::CrackedPlate => CaseSpec::cracked_plate(),
        });
        let (mut young, mut nu, mut sy, mut h) = (210.0, 0.3, 205.0, 2.0);
        let mut cycle_duration = None;
        let mut load_rate_given = false;
        let mut ramp_given = false;
        let mut probes = Vec::new();

        for (line, k, v) in &entries {
            let line = *line;
            let float = || v.parse::<f64>().map_err(|_| err(line, format!("`{k}` expects a number, got `{v}`")));
            let count = || v.parse::<usize>().map_err(|_| err(line, format!("`{k}` expects a count, got `{v}`")));
            match k.as_str() {
                "geometry" => {}
                "n_elements" => cfg.case.n_elements = count()?,
                "n_cycles" => cfg.case.n_cycles = count()?,
                "n_times" => cfg.case.n_times = count()?,
                "amplitude_mm" => cfg.case.amplitude = float()?,
                "load_rate_mm_s" => {
                    cfg.case.load_rate = float()?;
                    load_rate_given = true;
                }
                "ramp_mm_s" => {
                    cfg.case.ramp_slope = float()?;
                    ramp_given = true;
                }
                "crack_fraction" => cfg.case.crack_fraction = float()?,
                "cycle_duration_s" => cycle_duration = Some(float()?),
                "young_gpa" => young = float()?,
                "poisson" => nu = float()?,
                "yield_mpa" => sy = float()?,
                "hardening_gpa" => h = float()?,
                "delta" => cfg.driver.delta = float()?,
                "eps_mode" => cfg.driver.pgd.eps_mode = float()?,
                "rhs_tol" => cfg.driver.rhs_tol = float()?,
                "mt_tol" => cfg.mt_tol = float()?,
                "tol_eq" => cfg.tol_eq = float()?,
                "macro_cycles" => cfg.macro_cycles = count()?,
                "max_iters" => cfg.driver.max_iters = count()?,
                "max_modes" => cfg.driver.pgd.max_modes = count()?,
                "relaxation" => cfg.driver.relaxation = float()?,
                "anderson_depth" => cfg.driver.anderson_depth = count()?,
                "solver" => {
                    cfg.solver = match v.to_ascii_lowercase().as_str() {
                        "pgd" => SolverChoice::Pgd,
                        "fe" => SolverChoice::Fe,
                        "both" => SolverChoice::Both,
                        _ => return Err(err(line, format!("solver must be pgd, fe or both, got `{v}`"))),
                    }
                }
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                "probe" => {
                    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                    let xy: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
                    match xy {
                        Ok(xy) if xy.len() == 2 => probes.push([xy[0], xy[1]]),
                        _ => return Err(err(line, format!("probe expects `x, y`, got `{v}`"))),
                    }
                }
                "vtk" => {
                    cfg.vtk = v
                        .parse::<bool>()
                        .map_err(|_| err(line, format!("`vtk` expects true or false, got `{v}`")))?
                }
                _ => return Err(err(line, format!("unknown key `{k}`"))),
            }
        }
        if !probes.is_empty() {
            cfg.probes = probes;
        }
        cfg.material = Material::new(young * 1e3, nu, sy, h * 1e3).map_err(|e| err(0, e.to_string()))?;
        match (cycle_duration, geometry) {
            (Some(d), _) => cfg.case.cycle_duration = d,
            (None, Geometry::DogBone) => cfg.case.cycle_duration = 4.0 * cfg.case.amplitude / cfg.case.load_rate,
            (None, Geometry::CrackedPlate) if load_rate_given => {
                cfg.case.cycle_duration = 4.0 * cfg.case.amplitude / cfg.case.load_rate
            }
            _ => {}
        }
        if geometry == Geometry::CrackedPlate && !ramp_given {
            cfg.case.ramp_slope = cfg.case.amplitude / cfg.case.final_time();
        }
        for (name, v) in [
            ("delta", cfg.driver.delta),
            ("eps_mode", cfg.driver.pgd.eps_mode),
            ("rhs_tol", cfg.driver.rhs_tol),
            ("mt_tol", cfg.mt_tol),
            ("tol_eq", cfg.tol_eq),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(err(0, format!("`{name}` must lie in (0, 1), got {v}")));
            }
        }
        if !(cfg.driver.relaxation > 0.0 && cfg.driver.relaxation <= 1.0) {
            return Err(err(0, format!("`relaxation` must lie in (0, 1], got {}", cfg.driver.relaxation)));
        }
        cfg.case.validate().map_err(|e| err(0, e.to_string()))?;
        Ok(cfg)
    }
}
