//! Specimen geometries, boundary sets and cyclic loading waveforms.

use crate::error::{Error, Result};
use crate::mesh::{DirichletSet, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    DogBone,
    CrackedPlate,
}

/// Outline of the dog-bone specimen (mm), centered at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DogBoneDims {
    pub gauge_length: f64,
    pub gauge_width: f64,
    pub taper_length: f64,
    pub grip_length: f64,
    pub grip_width: f64,
}

impl Default for DogBoneDims {
    fn default() -> Self {
        DogBoneDims { gauge_length: 40.0, gauge_width: 10.0, taper_length: 10.0, grip_length: 20.0, grip_width: 20.0 }
    }
}

impl DogBoneDims {
    pub fn total_length(&self) -> f64 {
        self.gauge_length + 2.0 * (self.taper_length + self.grip_length)
    }

    /// Half width of the outline at abscissa `x`.
    pub fn half_width(&self, x: f64) -> f64 {
        let ax = x.abs();
        let g = 0.5 * self.gauge_length;
        let (hg, hw) = (0.5 * self.gauge_width, 0.5 * self.grip_width);
        if ax <= g {
            hg
        } else if ax >= g + self.taper_length {
            hw
        } else {
            hg + (hw - hg) * (ax - g) / self.taper_length
        }
    }
}

/// Rectangular plate (mm), centered at the origin, with an edge crack from the top.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateDims {
    pub width: f64,
    pub height: f64,
}

impl Default for PlateDims {
    fn default() -> Self {
        PlateDims { width: 50.0, height: 50.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseSpec {
    pub geometry: Geometry,
    pub n_elements: usize,
    pub n_cycles: usize,
    /// Number of time nodes `N_t`.
    pub n_times: usize,
    /// Displacement amplitude (mm).
    pub amplitude: f64,
    /// Load rate (mm/s).
    pub load_rate: f64,
    /// Slope of the superposed linear drift (mm/s); used by the plate only.
    pub ramp_slope: f64,
    /// Duration of one load-unload-load cycle (s).
    pub cycle_duration: f64,
    /// Crack length as a fraction of the plate height.
    pub crack_fraction: f64,
    pub dogbone: DogBoneDims,
    pub plate: PlateDims,
}

impl CaseSpec {
    /// Dog-bone specimen: 500 elements, 10 cycles, 800 time nodes.
    pub fn dogbone() -> Self {
        let amplitude = 0.125;
        let load_rate = 0.025;
        CaseSpec {
            geometry: Geometry::DogBone,
            n_elements: 500,
            n_cycles: 10,
            n_times: 800,
            amplitude,
            load_rate,
            ramp_slope: 0.0,
            cycle_duration: 4.0 * amplitude / load_rate,
            crack_fraction: 0.0,
            dogbone: DogBoneDims::default(),
            plate: PlateDims::default(),
        }
    }

    /// Reduced dog-bone: 50 elements, 10 cycles, 200 time nodes.
    pub fn dogbone_desk() -> Self {
        CaseSpec { n_elements: 50, n_times: 200, ..Self::dogbone() }
    }

    /// Edge-cracked plate: 400 elements, 40 cycles of 30 s, 3200 time nodes.
    /// The drift is chosen so that the mean displacement reaches the amplitude at the final time.
    pub fn cracked_plate() -> Self {
        let amplitude = 0.125;
        let cycle_duration = 30.0;
        let n_cycles = 40;
        CaseSpec {
            geometry: Geometry::CrackedPlate,
            n_elements: 400,
            n_cycles,
            n_times: 3200,
            amplitude,
            load_rate: 4.0 * amplitude / cycle_duration,
            ramp_slope: amplitude / (n_cycles as f64 * cycle_duration),
            cycle_duration,
            crack_fraction: 0.5,
            dogbone: DogBoneDims::default(),
            plate: PlateDims::default(),
        }
    }

    /// Reduced plate: 100 elements, 10 cycles, 200 time nodes.
    pub fn cracked_plate_desk() -> Self {
        let mut spec = CaseSpec { n_elements: 100, n_cycles: 10, n_times: 200, ..Self::cracked_plate() };
        spec.ramp_slope = spec.amplitude / spec.final_time();
        spec
    }

    pub fn final_time(&self) -> f64 {
        self.n_cycles as f64 * self.cycle_duration
    }

    /// Time nodes per cycle.
    pub fn steps_per_cycle(&self) -> usize {
        self.n_times / self.n_cycles
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cycles == 0 || self.n_times == 0 {
            return Err(Error::InvalidSpec("at least one cycle and one time node are required".into()));
        }
        if self.n_times % self.n_cycles != 0 {
            return Err(Error::InvalidSpec(format!(
                "n_times = {} is not a multiple of n_cycles = {}",
                self.n_times, self.n_cycles
            )));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::InvalidSpec(format!("amplitude must be positive, got {}", self.amplitude)));
        }
        if !(self.cycle_duration > 0.0) {
            return Err(Error::InvalidSpec(format!("cycle duration must be positive, got {}", self.cycle_duration)));
        }
        if self.geometry == Geometry::DogBone {
            let expected = 4.0 * self.amplitude / self.load_rate;
            if !((self.cycle_duration - expected).abs() <= 1e-9 * expected) {
                return Err(Error::InconsistentSpec(format!(
                    "cycle duration {} s differs from 4 a / v = {} s",
                    self.cycle_duration, expected
                )));
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match self.geometry {
            Geometry::DogBone => build_dogbone(self),
            Geometry::CrackedPlate => build_cracked_plate(self),
        }
    }
}

/// Imposed displacement `u_D(t_i)` at `t_i = i T_f / N_t`, `i = 0..N_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadWaveform {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl LoadWaveform {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }
}

/// Grid split `n = cols * rows` with `rows, cols >= 4` and aspect closest to `aspect`.
fn grid_split(n: usize, aspect: f64) -> Option<(usize, usize)> {
    (4..=n / 4)
        .filter(|rows| n % rows == 0 && n / rows >= 4)
        .map(|rows| (n / rows, rows))
        .min_by(|a, b| {
            let da = (a.0 as f64 / a.1 as f64 - aspect).abs();
            let db = (b.0 as f64 / b.1 as f64 - aspect).abs();
            da.total_cmp(&db).then(b.1.cmp(&a.1))
        })
}

/// Mapped structured grid of the dog-bone outline.
///
/// Columns are uniform in x; each column is stretched to the local half width.
/// Both grip-end columns are clamped in y and carry the loading in x (left -1, right +1).
pub fn build_dogbone(spec: &CaseSpec) -> Result<Mesh> {
    if spec.geometry != Geometry::DogBone {
        return Err(Error::InvalidSpec("expected a dog-bone specimen".into()));
    }
    let dims = &spec.dogbone;
    let length = dims.total_length();
    let (nx, ny) = grid_split(spec.n_elements, length / dims.grip_width).ok_or_else(|| {
        Error::InvalidSpec(format!(
            "{} elements cannot form a grid with at least 4 elements across every direction",
            spec.n_elements
        ))
    })?;
    let mut mesh = Mesh::rectangle(nx, ny, [0.0, -1.0], [1.0, 2.0]);
    for p in mesh.nodes.iter_mut() {
        let x = -0.5 * length + length * p[0];
        *p = [x, p[1] * dims.half_width(x)];
    }
    let column = |i: usize| (0..=ny).map(|j| j * (nx + 1) + i).collect::<Vec<_>>();
    mesh.add_dirichlet(DirichletSet { name: "left".into(), nodes: column(0), mask: [true, true], lift: [-1.0, 0.0] });
    mesh.add_dirichlet(DirichletSet { name: "right".into(), nodes: column(nx), mask: [true, true], lift: [1.0, 0.0] });
    Ok(mesh)
}

/// Structured plate with a vertical edge crack from the top edge at the middle column.
///
/// Crack-face nodes (top edge down to, excluding, the tip) are duplicated; elements
/// right of the crack use the duplicates.
pub fn build_cracked_plate(spec: &CaseSpec) -> Result<Mesh> {
    if spec.geometry != Geometry::CrackedPlate {
        return Err(Error::InvalidSpec("expected a cracked plate".into()));
    }
    if !(0.0..=1.0).contains(&spec.crack_fraction) {
        return Err(Error::InvalidSpec(format!(
            "crack length fraction {} exceeds the plate height",
            spec.crack_fraction
        )));
    }
    let dims = &spec.plate;
    let (nx, ny) = grid_split(spec.n_elements, dims.width / dims.height).ok_or_else(|| {
        Error::InvalidSpec(format!("{} elements cannot form a plate grid", spec.n_elements))
    })?;
    let mut mesh = Mesh::rectangle(nx, ny, [-0.5 * dims.width, -0.5 * dims.height], [dims.width, dims.height]);
    let n_crack = (spec.crack_fraction * ny as f64).round() as usize;
    let ic = nx / 2;
    for j in (ny + 1 - n_crack)..=ny {
        let original = j * (nx + 1) + ic;
        let dup = mesh.nodes.len();
        mesh.nodes.push(mesh.nodes[original]);
        // elements of column ic own the node as their bottom-left / top-left corner
        for jj in [j.wrapping_sub(1), j] {
            if jj < ny {
                let e = jj * nx + ic;
                for n in mesh.elements[e].iter_mut() {
                    if *n == original {
                        *n = dup;
                    }
                }
            }
        }
    }
    let column = |i: usize| (0..=ny).map(|j| j * (nx + 1) + i).collect::<Vec<_>>();
    mesh.add_dirichlet(DirichletSet { name: "left".into(), nodes: column(0), mask: [true, true], lift: [-1.0, 0.0] });
    mesh.add_dirichlet(DirichletSet { name: "right".into(), nodes: column(nx), mask: [true, true], lift: [1.0, 0.0] });
    Ok(mesh)
}

/// Symmetric triangle 0 → +1 → −1 → 0 sampled at `j / n` of the cycle, exact at quarter points.
fn unit_triangle(j: usize, n: usize) -> f64 {
    let q = 4 * j as i64;
    let n = n as i64;
    let v = if q <= n {
        q
    } else if q <= 3 * n {
        2 * n - q
    } else {
        q - 4 * n
    };
    v as f64 / n as f64
}

pub fn make_waveform(spec: &CaseSpec) -> Result<LoadWaveform> {
    spec.validate()?;
    let per_cycle = spec.steps_per_cycle();
    let dt = spec.cycle_duration / per_cycle as f64;
    let times: Vec<f64> = (0..spec.n_times).map(|i| i as f64 * dt).collect();
    let values = times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let tri = spec.amplitude * unit_triangle(i % per_cycle, per_cycle);
            match spec.geometry {
                Geometry::DogBone => tri,
                Geometry::CrackedPlate => tri + spec.ramp_slope * t,
            }
        })
        .collect();
    Ok(LoadWaveform { times, values })
}
