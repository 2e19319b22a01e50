//! Command-line front end: `key = value` run configuration, the
//! `evolve` / `sweep` / `validate` / `heatmap` subcommands, and the CSV
//! formats they read and write.
//!
//! Floats are written in C-style scientific notation with nine significant
//! digits (`-1.23456789e-05`), `.` as decimal separator and `\n` line ends.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::dynamics::{evolve, InitMode, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, CouplingParams, RingTopology};
use crate::observables::ftpe;
use crate::operators::MAX_SITES;
use crate::sweep::{
    render_heatmap, run_grid, thread_pool, Axis, AxisRange, GridSpec, SweepBase, SweepRow,
    DEFAULT_MAX_POINTS,
};

/// Every key accepted in a config file, in canonical order.
pub const CONFIG_KEYS: &[&str] = &[
    "n_sites",
    "g",
    "j1",
    "j2",
    "r",
    "t_start",
    "t_end",
    "dt",
    "samples",
    "init_mode",
    "threads",
    "output",
    "j1_min",
    "j1_max",
    "j1_steps",
    "j2_min",
    "j2_max",
    "j2_steps",
    "r_min",
    "r_max",
    "r_steps",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_sites: usize,
    pub g: f64,
    pub j1: f64,
    pub j2: f64,
    pub r: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub samples: usize,
    pub init_mode: InitMode,
    /// 0 = one worker per core.
    pub threads: usize,
    pub output: Option<PathBuf>,
    pub j1_axis: Option<AxisRange>,
    pub j2_axis: Option<AxisRange>,
    pub r_axis: Option<AxisRange>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_sites: 4,
            g: 1.0,
            j1: 0.0,
            j2: 0.0,
            r: 1.0,
            t_start: -30.0,
            t_end: 30.0,
            dt: 1e-3,
            samples: 2001,
            init_mode: InitMode::Adiabatic,
            threads: 0,
            output: None,
            j1_axis: None,
            j2_axis: None,
            r_axis: None,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> CouplingParams {
        CouplingParams {
            g: self.g,
            j1: self.j1,
            j2: self.j2,
            r: self.r,
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt,
            sample_count: self.samples,
            init_mode: self.init_mode,
            ..IntegratorConfig::default()
        }
    }

    pub fn sweep_base(&self) -> SweepBase {
        SweepBase {
            n_sites: self.n_sites,
            t_start: self.t_start,
            t_end: self.t_end,
            integrator: self.integrator(),
            threads: self.threads,
            max_points: DEFAULT_MAX_POINTS,
        }
    }

    pub fn has_grid(&self) -> bool {
        self.j1_axis.is_some() || self.j2_axis.is_some() || self.r_axis.is_some()
    }

    /// Swept axes from the config; unswept axes are pinned at the scalar
    /// value.
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            j1: self.j1_axis.unwrap_or(AxisRange::pinned(self.j1)),
            j2: self.j2_axis.unwrap_or(AxisRange::pinned(self.j2)),
            r: self.r_axis.unwrap_or(AxisRange::pinned(self.r)),
            g: self.g,
        }
    }
}

/// Where a setting came from, for error messages.
#[derive(Clone, Debug)]
enum Source {
    Default,
    Line(usize),
    Flag,
}

impl Source {
    fn describe(&self, key: &str) -> String {
        match self {
            Source::Default => "default".into(),
            Source::Line(n) => format!("line {n}"),
            Source::Flag => format!("flag --{key}"),
        }
    }
}

fn config_error(location: String, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        location,
        key: key.to_string(),
        message: message.into(),
    }
}

/// Parses a config file body and applies `overrides` (flag values, keyed
/// like the file) on top. Unknown keys, malformed values and constraint
/// violations all fail with the offending key and its line or flag.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut settings: Vec<(String, String, Source)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_error(
                format!("line {lineno}"),
                line,
                "expected `key = value`",
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return Err(config_error(format!("line {lineno}"), key, "unknown key"));
        }
        if let Some((_, _, Source::Line(prev))) = settings.iter().find(|(k, _, _)| k == key) {
            return Err(config_error(
                format!("line {lineno}"),
                key,
                format!("already set on line {prev}"),
            ));
        }
        settings.push((key.to_string(), value.to_string(), Source::Line(lineno)));
    }
    for (key, value) in overrides {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(config_error(Source::Flag.describe(key), key, "unknown key"));
        }
        settings.retain(|(k, _, _)| k != key);
        settings.push((key.clone(), value.trim().to_string(), Source::Flag));
    }

    let lookup = |key: &str| settings.iter().find(|(k, _, _)| k == key);
    let source_of = |key: &str| {
        lookup(key)
            .map(|(_, _, s)| s.describe(key))
            .unwrap_or_else(|| Source::Default.describe(key))
    };

    fn parse_value<T: std::str::FromStr>(key: &str, value: &str, src: &Source) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        value.parse::<T>().map_err(|e| {
            config_error(
                src.describe(key),
                key,
                format!("cannot parse {value:?}: {e}"),
            )
        })
    }
    let get_f64 = |key: &str, default: f64| -> Result<f64> {
        match lookup(key) {
            Some((_, v, src)) => parse_value(key, v, src),
            None => Ok(default),
        }
    };
    let get_usize = |key: &str, default: usize| -> Result<usize> {
        match lookup(key) {
            Some((_, v, src)) => parse_value(key, v, src),
            None => Ok(default),
        }
    };

    let d = RunConfig::default();
    let mut cfg = RunConfig {
        n_sites: get_usize("n_sites", d.n_sites)?,
        g: get_f64("g", d.g)?,
        j1: get_f64("j1", d.j1)?,
        j2: get_f64("j2", d.j2)?,
        r: get_f64("r", d.r)?,
        t_start: get_f64("t_start", d.t_start)?,
        t_end: get_f64("t_end", d.t_end)?,
        dt: get_f64("dt", d.dt)?,
        samples: get_usize("samples", d.samples)?,
        init_mode: match lookup("init_mode") {
            Some((_, v, src)) => parse_value("init_mode", v, src)?,
            None => d.init_mode,
        },
        threads: get_usize("threads", d.threads)?,
        output: lookup("output").map(|(_, v, _)| PathBuf::from(v)),
        j1_axis: None,
        j2_axis: None,
        r_axis: None,
    };
    for axis in Axis::ALL {
        let name = axis.name();
        let keys = [
            format!("{name}_min"),
            format!("{name}_max"),
            format!("{name}_steps"),
        ];
        let present: Vec<bool> = keys.iter().map(|k| lookup(k).is_some()).collect();
        if present.iter().all(|p| !p) {
            continue;
        }
        if let Some(missing) = keys
            .iter()
            .zip(&present)
            .find(|(_, p)| !**p)
            .map(|(k, _)| k)
        {
            let set = keys
                .iter()
                .zip(&present)
                .find(|(_, p)| **p)
                .map(|(k, _)| k)
                .unwrap();
            return Err(config_error(
                source_of(set),
                missing,
                format!("{set} is set, so {missing} is required too"),
            ));
        }
        let range = AxisRange {
            min: get_f64(&keys[0], 0.0)?,
            max: get_f64(&keys[1], 0.0)?,
            steps: get_usize(&keys[2], 1)?,
        };
        if !(range.min.is_finite() && range.max.is_finite()) {
            return Err(config_error(
                source_of(&keys[0]),
                &keys[0],
                "range must be finite",
            ));
        }
        if range.steps == 0 {
            return Err(config_error(
                source_of(&keys[2]),
                &keys[2],
                "must be at least 1",
            ));
        }
        if range.min > range.max {
            return Err(config_error(
                source_of(&keys[1]),
                &keys[1],
                format!("must be >= {}", keys[0]),
            ));
        }
        if axis == Axis::R && range.min <= 0.0 {
            return Err(config_error(
                source_of(&keys[0]),
                &keys[0],
                "sweep rate must be > 0",
            ));
        }
        match axis {
            Axis::J1 => cfg.j1_axis = Some(range),
            Axis::J2 => cfg.j2_axis = Some(range),
            Axis::R => cfg.r_axis = Some(range),
        }
    }

    let check = |ok: bool, key: &str, message: String| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(config_error(source_of(key), key, message))
        }
    };
    check(
        (1..=MAX_SITES).contains(&cfg.n_sites),
        "n_sites",
        format!("must be between 1 and {MAX_SITES}, got {}", cfg.n_sites),
    )?;
    check(
        cfg.g.is_finite() && cfg.g >= 0.0,
        "g",
        format!("must be >= 0, got {}", cfg.g),
    )?;
    check(
        cfg.j1.is_finite(),
        "j1",
        format!("must be finite, got {}", cfg.j1),
    )?;
    check(
        cfg.j2.is_finite(),
        "j2",
        format!("must be finite, got {}", cfg.j2),
    )?;
    check(
        cfg.r.is_finite() && cfg.r > 0.0,
        "r",
        format!("must be > 0, got {}", cfg.r),
    )?;
    check(
        cfg.t_start.is_finite(),
        "t_start",
        format!("must be finite, got {}", cfg.t_start),
    )?;
    check(
        cfg.t_end.is_finite() && cfg.t_end > cfg.t_start,
        "t_end",
        format!("must be > t_start ({}), got {}", cfg.t_start, cfg.t_end),
    )?;
    check(
        cfg.dt.is_finite() && cfg.dt > 0.0,
        "dt",
        format!("must be > 0, got {}", cfg.dt),
    )?;
    check(
        cfg.samples >= 2,
        "samples",
        format!("must be at least 2, got {}", cfg.samples),
    )?;
    check(
        (cfg.t_end - cfg.t_start) / cfg.dt >= cfg.samples as f64,
        "samples",
        format!(
            "{} samples need at least as many steps, but the window holds {:.0}",
            cfg.samples,
            (cfg.t_end - cfg.t_start) / cfg.dt
        ),
    )?;
    Ok(cfg)
}

/// `x` in scientific notation with nine significant digits and a signed,
/// at-least-two-digit exponent.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let x = if x == 0.0 { 0.0 } else { x }; // no "-0"
    let s = format!("{x:.8e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn timeseries_csv(traj: &Trajectory) -> String {
    let n = traj.n();
    let mut out = String::from("t,es_mean,gs_mean,norm");
    for site in 0..n {
        let _ = write!(out, ",es_site{site}");
    }
    out.push('\n');
    for i in 0..traj.times.len() {
        let fields = [
            traj.times[i],
            traj.es_mean[i],
            traj.gs_mean[i],
            traj.norm[i],
        ]
        .into_iter()
        .chain(traj.site_flip_prob[i].iter().copied())
        .map(format_float)
        .collect::<Vec<_>>();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub const SWEEP_HEADER: &str = "j1,j2,r,ftpe";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_float(row.j1),
            format_float(row.j2),
            format_float(row.r),
            format_float(row.ftpe)
        );
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SWEEP_HEADER => {}
        Some(h) => {
            return Err(Error::Heatmap(format!(
                "expected header {SWEEP_HEADER:?}, got {h:?}"
            )))
        }
        None => return Err(Error::Heatmap("empty sweep file".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Heatmap(format!(
                "line {}: expected 4 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let mut vals = [0.0; 4];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| Error::Heatmap(format!("line {}: bad number {f:?}", idx + 2)))?;
        }
        rows.push(SweepRow {
            j1: vals[0],
            j2: vals[1],
            r: vals[2],
            ftpe: vals[3],
        });
    }
    Ok(rows)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Runs one sweep and writes the time-series CSV. Returns the trajectory's
/// FTPE.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<f64> {
    if cfg.has_grid() {
        return Err(config_error(
            "config".into(),
            "grid",
            "evolve takes no grid axes; use sweep",
        ));
    }
    let topo = RingTopology::for_sites(cfg.n_sites)?;
    let h = build_hamiltonian(&cfg.params(), &topo)?;
    let traj = evolve(&h, &cfg.integrator(), cfg.t_start, cfg.t_end)?;
    let value = ftpe(&traj.es_mean, &traj.times)?.ftpe;
    write_output(cfg.output.as_deref(), timeseries_csv(&traj).as_bytes())?;
    Ok(value)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg.grid();
    if Axis::ALL.iter().all(|&a| grid.axis(a).steps <= 1) {
        return Err(config_error(
            "config".into(),
            "grid",
            "sweep needs at least one axis with more than one step",
        ));
    }
    let rows = run_grid(&grid, &cfg.sweep_base())?;
    write_output(cfg.output.as_deref(), sweep_csv(&rows).as_bytes())?;
    Ok(rows)
}

pub fn cmd_heatmap(input: &Path, x_axis: Axis, y_axis: Axis, output: &Path) -> Result<()> {
    let text = fs::read_to_string(input).map_err(|source| Error::Io {
        path: input.display().to_string(),
        source,
    })?;
    let rows = parse_sweep_csv(&text)?;
    let pgm = render_heatmap(&rows, x_axis, y_axis)?;
    write_output(Some(output), &pgm)
}

pub const VALIDATE_RATES: [f64; 4] = [0.5, 1.0, 2.0, 7.0];
pub const VALIDATE_LZ_TOL: f64 = 0.02;
pub const VALIDATE_FACTORIZATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct LzCheck {
    pub r: f64,
    pub measured: f64,
    pub formula: f64,
}

impl LzCheck {
    pub fn delta(&self) -> f64 {
        (self.measured - self.formula).abs()
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub lz: Vec<LzCheck>,
    /// Largest per-site difference between the uncoupled 4-ring and a lone
    /// site, over all samples.
    pub factorization: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.lz.iter().all(|c| c.delta() <= VALIDATE_LZ_TOL)
            && self.factorization <= VALIDATE_FACTORIZATION_TOL
    }

    pub fn render(&self) -> String {
        let mut out = String::from("single-site Landau-Zener check (g = 1, t in [-30, 30])\n");
        let _ = writeln!(
            out,
            "{:>6}  {:>12}  {:>12}  {:>10}  status",
            "r", "measured", "formula", "|delta|"
        );
        for c in &self.lz {
            let _ = writeln!(
                out,
                "{:>6}  {:>12.6}  {:>12.6}  {:>10.2e}  {}",
                c.r,
                c.measured,
                c.formula,
                c.delta(),
                if c.delta() <= VALIDATE_LZ_TOL {
                    "ok"
                } else {
                    "FAIL"
                }
            );
        }
        let _ = writeln!(
            out,
            "factorization (n = 4, j1 = j2 = 0 vs n = 1): max |delta| = {:.3e}  {}",
            self.factorization,
            if self.factorization <= VALIDATE_FACTORIZATION_TOL {
                "ok"
            } else {
                "FAIL"
            }
        );
        let _ = writeln!(
            out,
            "{}",
            if self.passed() {
                "all checks passed"
            } else {
                "checks FAILED"
            }
        );
        out
    }
}

/// Largest difference between every site of `many` and the lone site of
/// `single`, over all samples.
pub fn factorization_gap(many: &Trajectory, single: &Trajectory) -> f64 {
    many.site_flip_prob
        .iter()
        .zip(&single.site_flip_prob)
        .flat_map(|(row, lone)| row.iter().map(move |p| (p - lone[0]).abs()))
        .fold(0.0, f64::max)
}

/// Closed-form Landau–Zener comparisons and the uncoupled-ring
/// factorization check.
pub fn cmd_validate(threads: usize) -> Result<ValidationReport> {
    let cfg = IntegratorConfig::default();
    let run = |n: usize, r: f64| -> Result<Trajectory> {
        let h = build_hamiltonian(
            &CouplingParams::new(0.0, 0.0, r),
            &RingTopology::for_sites(n)?,
        )?;
        evolve(&h, &cfg, -30.0, 30.0)
    };
    let jobs: Vec<(usize, f64)> = VALIDATE_RATES
        .iter()
        .map(|&r| (1, r))
        .chain([(4, 1.0)])
        .collect();
    let mut trajs = thread_pool(threads)?.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(n, r)| run(n, r))
            .collect::<Result<Vec<_>>>()
    })?;
    let ring = trajs.pop().expect("ring run");
    let lz: Vec<LzCheck> = VALIDATE_RATES
        .iter()
        .zip(&trajs)
        .map(|(&r, t)| LzCheck {
            r,
            measured: *t.es_mean.last().expect("samples"),
            formula: crate::dynamics::lz_closed_form(1.0, r),
        })
        .collect();
    let single_r1 = &trajs[1];
    Ok(ValidationReport {
        lz,
        factorization: factorization_gap(&ring, single_r1),
    })
}
