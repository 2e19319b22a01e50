//! FTPE over rectangular `(j1, j2, r)` grids and grayscale heatmaps of the
//! result.
//!
//! Points are evaluated on a rayon pool and collected into a buffer indexed
//! by grid position, so row order (`j1` outermost, then `j2`, then `r`, each
//! ascending) never depends on scheduling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::{evolve, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, CouplingParams, RingTopology};
use crate::observables::ftpe;

pub const DEFAULT_MAX_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    J1,
    J2,
    R,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::J1, Axis::J2, Axis::R];

    pub fn name(self) -> &'static str {
        match self {
            Axis::J1 => "j1",
            Axis::J2 => "j2",
            Axis::R => "r",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "j1" => Ok(Axis::J1),
            "j2" => Ok(Axis::J2),
            "r" => Ok(Axis::R),
            other => Err(format!("unknown axis {other:?}, expected j1, j2 or r")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `steps` equally spaced values from `min` to `max`; a single step pins the
/// axis at `min`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn pinned(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            steps: 1,
        }
    }

    pub fn linspace(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn validate(&self, axis: Axis) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "{axis} range must be finite"
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument(format!(
                "{axis} needs at least one step"
            )));
        }
        if self.min > self.max {
            return Err(Error::InvalidArgument(format!(
                "{axis} range has min {} > max {}",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.max
                } else {
                    self.min + i as f64 * span / last as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub j1: AxisRange,
    pub j2: AxisRange,
    pub r: AxisRange,
    /// Tunneling energy, shared by every point.
    pub g: f64,
}

impl GridSpec {
    pub fn axis(&self, axis: Axis) -> &AxisRange {
        match axis {
            Axis::J1 => &self.j1,
            Axis::J2 => &self.j2,
            Axis::R => &self.r,
        }
    }

    pub fn point_count(&self) -> usize {
        self.j1
            .steps
            .saturating_mul(self.j2.steps)
            .saturating_mul(self.r.steps)
    }

    /// Grid points in output order.
    pub fn points(&self) -> Vec<CouplingParams> {
        let (j1s, j2s, rs) = (self.j1.values(), self.j2.values(), self.r.values());
        let mut out = Vec::with_capacity(self.point_count());
        for &j1 in &j1s {
            for &j2 in &j2s {
                for &r in &rs {
                    out.push(CouplingParams {
                        g: self.g,
                        j1,
                        j2,
                        r,
                    });
                }
            }
        }
        out
    }
}

/// Everything a grid point needs besides its couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepBase {
    pub n_sites: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub integrator: IntegratorConfig,
    /// Worker count; 0 lets rayon choose.
    pub threads: usize,
    pub max_points: usize,
}

impl Default for SweepBase {
    fn default() -> Self {
        Self {
            n_sites: 4,
            t_start: -30.0,
            t_end: 30.0,
            integrator: IntegratorConfig::default(),
            threads: 0,
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub j1: f64,
    pub j2: f64,
    pub r: f64,
    pub ftpe: f64,
}

impl SweepRow {
    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::J1 => self.j1,
            Axis::J2 => self.j2,
            Axis::R => self.r,
        }
    }
}

/// Build, initialize, evolve and average one parameter point.
pub fn evaluate_point(params: &CouplingParams, base: &SweepBase) -> Result<f64> {
    let topo = RingTopology::for_sites(base.n_sites)?;
    let h = build_hamiltonian(params, &topo)?;
    let traj = evolve(&h, &base.integrator, base.t_start, base.t_end)?;
    Ok(ftpe(&traj.es_mean, &traj.times)?.ftpe)
}

pub(crate) fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {threads} worker threads: {e}")))
}

pub fn run_grid(grid: &GridSpec, base: &SweepBase) -> Result<Vec<SweepRow>> {
    for axis in Axis::ALL {
        grid.axis(axis).validate(axis)?;
    }
    let points = grid.point_count();
    if points > base.max_points {
        return Err(Error::GridTooLarge {
            points,
            cap: base.max_points,
        });
    }
    let params = grid.points();
    let results: Vec<Result<f64>> = thread_pool(base.threads)?
        .install(|| params.par_iter().map(|p| evaluate_point(p, base)).collect());

    // the first failure in grid order wins, whatever finished first
    params
        .iter()
        .zip(results)
        .map(|(p, res)| match res {
            Ok(ftpe) => Ok(SweepRow {
                j1: p.j1,
                j2: p.j2,
                r: p.r,
                ftpe,
            }),
            Err(e) => Err(Error::SweepPoint {
                j1: p.j1,
                j2: p.j2,
                r: p.r,
                source: Box::new(e),
            }),
        })
        .collect()
}

/// Round half up to the nearest of 0..=255.
pub fn quantize(ftpe: f64) -> u8 {
    let v = ftpe.clamp(0.0, 1.0);
    (255.0 * v + 0.5).floor() as u8
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Binary PGM (`P5`, maxval 255) of FTPE over two axes. `x` grows left to
/// right and `y` grows bottom to top.
pub fn render_heatmap(rows: &[SweepRow], x_axis: Axis, y_axis: Axis) -> Result<Vec<u8>> {
    if x_axis == y_axis {
        return Err(Error::Heatmap(format!("x and y are both {x_axis}")));
    }
    if rows.is_empty() {
        return Err(Error::Heatmap("no rows".into()));
    }
    let other = Axis::ALL
        .into_iter()
        .find(|a| *a != x_axis && *a != y_axis)
        .expect("three axes");
    let pinned = distinct_sorted(rows.iter().map(|r| r.get(other)));
    if pinned.len() > 1 {
        return Err(Error::Heatmap(format!(
            "{other} takes {} values; only {x_axis} and {y_axis} may vary",
            pinned.len()
        )));
    }

    let xs = distinct_sorted(rows.iter().map(|r| r.get(x_axis)));
    let ys = distinct_sorted(rows.iter().map(|r| r.get(y_axis)));
    let (width, height) = (xs.len(), ys.len());
    let mut cells: Vec<Option<u8>> = vec![None; width * height];
    for row in rows {
        let xi = xs.partition_point(|&v| v < row.get(x_axis));
        let yi = ys.partition_point(|&v| v < row.get(y_axis));
        let slot = &mut cells[(height - 1 - yi) * width + xi];
        if slot.is_some() {
            return Err(Error::Heatmap(format!(
                "duplicate point {x_axis} = {}, {y_axis} = {}",
                row.get(x_axis),
                row.get(y_axis)
            )));
        }
        *slot = Some(quantize(row.ftpe));
    }
    let pixels: Option<Vec<u8>> = cells.into_iter().collect();
    let pixels = pixels.ok_or_else(|| {
        Error::Heatmap(format!(
            "rows do not cover the {width}x{height} {x_axis}/{y_axis} rectangle"
        ))
    })?;

    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}
