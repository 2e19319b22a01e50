//! Initial-state preparation and time integration of `i dψ/dt = H(t) ψ`.
//!
//! [`evolve`] integrates in the interaction frame of the diagonal part of
//! `H(t)`. Writing `H(t) = D(t) + V` with `D(t) = t·diag(K) + diag(C)`, the
//! diagonal phases `θ_b(t) = K_bb t²/2 + C_bb t` are exact, and
//! `φ_b = e^{iθ_b} ψ_b` obeys
//!
//! ```text
//! dφ/dt = −i e^{iθ(t)} V e^{−iθ(t)} φ
//! ```
//!
//! whose generator is bounded by `‖V‖` instead of the sweep energy. RK4 on
//! the lab-frame equation loses norm at a rate set by `(E·dt)^6` and cannot
//! hold a 1e-6 norm budget at sweep energies of several hundred. Populations
//! `|φ_b|² = |ψ_b|²` are identical in both frames.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{hamiltonian_at, LzHamiltonian};
use crate::observables::{excited_mean, site_flip_probabilities};
use crate::operators::MAX_SITES;

/// Smallest ground-state gap accepted for adiabatic initialization.
pub const GROUND_GAP_TOL: f64 = 1e-9;

/// Largest phase (radians) the fastest interaction-frame oscillation may
/// advance within one RK4 substep; steps are subdivided to respect it.
pub const MAX_PHASE_PER_STEP: f64 = 0.25;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Amplitudes over the diabatic product basis of `n` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::InvalidArgument(format!(
                "state needs 1..={MAX_SITES} sites, got {n}"
            )));
        }
        if amplitudes.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for {n} sites (need {})",
                amplitudes.len(),
                1usize << n
            )));
        }
        Ok(Self { n, amplitudes })
    }

    /// The basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut amplitudes = vec![ZERO; 1usize.checked_shl(n as u32).unwrap_or(0)];
        if index >= amplitudes.len() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} sites"
            )));
        }
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(n, amplitudes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Instantaneous ground state of `H(t_start)`.
    #[default]
    Adiabatic,
    /// Basis state with the lowest diagonal energy at `t_start`.
    Diabatic,
}

impl FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "adiabatic" => Ok(Self::Adiabatic),
            "diabatic" => Ok(Self::Diabatic),
            other => Err(format!("expected adiabatic or diabatic, got {other:?}")),
        }
    }
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Adiabatic => "adiabatic",
            Self::Diabatic => "diabatic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Allowed `|‖ψ‖ − 1|` at any step.
    pub norm_tol: f64,
    /// Number of equally spaced output samples, endpoints included.
    pub sample_count: usize,
    pub init_mode: InitMode,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            norm_tol: 1e-6,
            sample_count: 2001,
            init_mode: InitMode::Adiabatic,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.norm_tol.is_finite() && self.norm_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "norm_tol must be > 0, got {}",
                self.norm_tol
            )));
        }
        if self.sample_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "sample_count must be at least 2, got {}",
                self.sample_count
            )));
        }
        Ok(())
    }
}

/// Sampled populations of one sweep.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `site_flip_prob[sample][site]`.
    pub site_flip_prob: Vec<Vec<f64>>,
    pub es_mean: Vec<f64>,
    pub gs_mean: Vec<f64>,
    pub norm: Vec<f64>,
    /// Basis index of the initial diabatic configuration.
    pub reference_config: usize,
    /// Largest `|‖ψ‖ − 1|` seen at any step, not just at samples.
    pub max_norm_drift: f64,
    /// Lab-frame state at `t_end`.
    pub final_state: StateVector,
}

impl Trajectory {
    pub fn n(&self) -> usize {
        self.final_state.n()
    }

    /// Flip probability of one site at every sample.
    pub fn site_series(&self, site: usize) -> Vec<f64> {
        self.site_flip_prob.iter().map(|row| row[site]).collect()
    }
}

fn to_nalgebra(m: &crate::operators::ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.entries())
}

/// Prepares the state at `t_start` and the reference configuration that
/// flip probabilities are measured against.
pub fn initial_state(
    h: &LzHamiltonian,
    t_start: f64,
    mode: InitMode,
) -> Result<(StateVector, usize)> {
    if !t_start.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "t_start must be finite, got {t_start}"
        )));
    }
    let n = h.n();
    let ham = hamiltonian_at(h, t_start);
    match mode {
        InitMode::Diabatic => {
            let diag = ham.diagonal();
            let mut best = 0;
            for (b, e) in diag.iter().enumerate() {
                if e.re < diag[best].re {
                    best = b;
                }
            }
            Ok((StateVector::basis(n, best)?, best))
        }
        InitMode::Adiabatic => {
            let dim = ham.dim();
            let eig = SymmetricEigen::try_new(to_nalgebra(&ham), 1e-15, 10_000)
                .ok_or(Error::EigenNonConvergence { dim })?;
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            if dim > 1 {
                let gap = eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]];
                if gap <= GROUND_GAP_TOL {
                    return Err(Error::DegenerateGround {
                        t: t_start,
                        gap,
                        tol: GROUND_GAP_TOL,
                    });
                }
            }
            let column = eig.eigenvectors.column(order[0]);
            let mut amps: Vec<Complex64> = column.iter().copied().collect();

            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let largest = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
            // ties (within rounding) go to the lowest basis index
            let reference = amps
                .iter()
                .position(|a| a.norm() >= largest * (1.0 - 1e-9))
                .expect("eigenvector has a nonzero entry");
            let phase = amps[reference].conj() / amps[reference].norm();
            for a in amps.iter_mut() {
                *a = *a * phase / norm;
            }
            amps[reference].im = 0.0;
            Ok((StateVector::new(n, amps)?, reference))
        }
    }
}

/// One classical RK4 step of `dψ/dt = −i H(t) ψ` in the lab frame.
pub fn rk4_step(h: &LzHamiltonian, psi: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let dim = h.dim();
    if psi.amplitudes.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "state of dimension {} does not match Hamiltonian of dimension {dim}",
            psi.amplitudes.len()
        )));
    }
    let deriv = |time: f64, v: &[Complex64], out: &mut [Complex64]| {
        let mut field = vec![ZERO; dim];
        h.sweep().apply(v, &mut field);
        h.static_part().apply(v, out);
        for (o, f) in out.iter_mut().zip(&field) {
            *o = -I * (*o + f * time);
        }
    };
    let y = &psi.amplitudes;
    let mut k1 = vec![ZERO; dim];
    let mut k2 = vec![ZERO; dim];
    let mut k3 = vec![ZERO; dim];
    let mut k4 = vec![ZERO; dim];
    let mut tmp = vec![ZERO; dim];

    deriv(t, y, &mut k1);
    for i in 0..dim {
        tmp[i] = y[i] + k1[i] * (dt / 2.0);
    }
    deriv(t + dt / 2.0, &tmp, &mut k2);
    for i in 0..dim {
        tmp[i] = y[i] + k2[i] * (dt / 2.0);
    }
    deriv(t + dt / 2.0, &tmp, &mut k3);
    for i in 0..dim {
        tmp[i] = y[i] + k3[i] * dt;
    }
    deriv(t + dt, &tmp, &mut k4);

    let amplitudes: Vec<Complex64> = (0..dim)
        .map(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
        .collect();
    if amplitudes
        .iter()
        .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(Error::NonFinite { t: t + dt });
    }
    Ok(StateVector {
        n: psi.n,
        amplitudes,
    })
}

/// RK4 on the interaction-frame equation, with scratch buffers.
///
/// Within one run of equal steps the phases advance multiplicatively:
/// `e^{−iθ(t+h)} = e^{−iθ(t)}·w(t)` with `w(t+h) = w(t)·e^{−iK h²}`. Each run
/// is seeded from exact `sin_cos` values so rounding cannot accumulate
/// across runs.
struct FrameIntegrator {
    sweep_diag: Vec<f64>,
    static_diag: Vec<f64>,
    /// Nonzero off-diagonal entries of the static part as `(row, col, value)`.
    coupling: Vec<(usize, usize, Complex64)>,
    rotated: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
    phase_start: Vec<Complex64>,
    phase_mid: Vec<Complex64>,
    phase_end: Vec<Complex64>,
    advance_start: Vec<Complex64>,
    advance_mid: Vec<Complex64>,
    chirp: Vec<Complex64>,
}

fn unit(angle: f64) -> Complex64 {
    let (s, c) = angle.sin_cos();
    Complex64::new(c, -s)
}

impl FrameIntegrator {
    fn new(h: &LzHamiltonian) -> Self {
        let dim = h.dim();
        let c = h.static_part();
        let mut coupling = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                if i != j && c[(i, j)] != ZERO {
                    coupling.push((i, j, c[(i, j)]));
                }
            }
        }
        let buf = || vec![ZERO; dim];
        Self {
            sweep_diag: h.sweep().diagonal().iter().map(|z| z.re).collect(),
            static_diag: c.diagonal().iter().map(|z| z.re).collect(),
            coupling,
            rotated: buf(),
            k: std::array::from_fn(|_| buf()),
            stage: buf(),
            phase_start: buf(),
            phase_mid: buf(),
            phase_end: buf(),
            advance_start: buf(),
            advance_mid: buf(),
            chirp: buf(),
        }
    }

    fn theta(&self, b: usize, t: f64) -> f64 {
        self.sweep_diag[b] * t * t / 2.0 + self.static_diag[b] * t
    }

    /// `e^{−iθ_b(t)}` for every basis state.
    fn phases(&self, t: f64) -> Vec<Complex64> {
        (0..self.sweep_diag.len())
            .map(|b| unit(self.theta(b, t)))
            .collect()
    }

    /// Fastest diagonal-energy difference across a coupling at time `t`.
    fn max_frequency(&self, t: f64) -> f64 {
        self.coupling
            .iter()
            .map(|&(a, b, _)| {
                ((self.sweep_diag[a] - self.sweep_diag[b]) * t
                    + (self.static_diag[a] - self.static_diag[b]))
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Seeds the phase recurrences for equal steps of size `h` from `t`.
    fn seed(&mut self, t: f64, h: f64) {
        for b in 0..self.sweep_diag.len() {
            let (k, c) = (self.sweep_diag[b], self.static_diag[b]);
            let mid = t + h / 2.0;
            self.phase_start[b] = unit(self.theta(b, t));
            self.phase_mid[b] = unit(self.theta(b, mid));
            // θ(s + h) − θ(s) = k (s h + h²/2) + c h
            self.advance_start[b] = unit(k * (t * h + h * h / 2.0) + c * h);
            self.advance_mid[b] = unit(k * (mid * h + h * h / 2.0) + c * h);
            self.chirp[b] = unit(k * h * h);
        }
    }

    fn derivative(
        coupling: &[(usize, usize, Complex64)],
        rotated: &mut [Complex64],
        phase: &[Complex64],
        phi: &[Complex64],
        out: &mut [Complex64],
    ) {
        for ((r, p), x) in rotated.iter_mut().zip(phase).zip(phi) {
            *r = p * x;
        }
        out.fill(ZERO);
        for &(a, b, v) in coupling {
            out[a] += v * rotated[b];
        }
        for (o, p) in out.iter_mut().zip(phase) {
            *o = -I * p.conj() * *o;
        }
    }

    /// One RK4 step of size `h` from the seeded time, then advances the
    /// phase recurrences by `h`.
    fn step(&mut self, phi: &mut [Complex64], h: f64) {
        for b in 0..phi.len() {
            self.phase_end[b] = self.phase_start[b] * self.advance_start[b];
        }

        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        let rot = &mut self.rotated;
        let cp = &self.coupling;

        Self::derivative(cp, rot, &self.phase_start, phi, k1);
        for i in 0..phi.len() {
            stage[i] = phi[i] + k1[i] * (h / 2.0);
        }
        Self::derivative(cp, rot, &self.phase_mid, stage, k2);
        for i in 0..phi.len() {
            stage[i] = phi[i] + k2[i] * (h / 2.0);
        }
        Self::derivative(cp, rot, &self.phase_mid, stage, k3);
        for i in 0..phi.len() {
            stage[i] = phi[i] + k3[i] * h;
        }
        Self::derivative(cp, rot, &self.phase_end, stage, k4);
        for i in 0..phi.len() {
            phi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }

        std::mem::swap(&mut self.phase_start, &mut self.phase_end);
        for b in 0..phi.len() {
            self.phase_mid[b] *= self.advance_mid[b];
            self.advance_start[b] *= self.chirp[b];
            self.advance_mid[b] *= self.chirp[b];
        }
    }
}

fn sample_times(t_start: f64, t_end: f64, count: usize) -> Vec<f64> {
    let span = t_end - t_start;
    let last = count - 1;
    (0..count)
        .map(|i| {
            if i == last {
                t_end
            } else {
                t_start + span * (i as f64 / last as f64)
            }
        })
        .collect()
}

/// Integrates from the initial state at `t_start` to `t_end` with fixed
/// step `cfg.dt`, recording `cfg.sample_count` equally spaced samples.
///
/// Steps never cross a sample time: each interval between samples is cut
/// into the fewest equal steps no longer than `dt`, so runs whose sample
/// spacing is a multiple of `dt` step by exactly `dt`. Each step is further
/// split into equal substeps
/// when the fastest interaction-frame phase would otherwise advance by more
/// than [`MAX_PHASE_PER_STEP`]. The state is never renormalized; the run
/// fails as soon as `|‖ψ‖ − 1|` exceeds `cfg.norm_tol`.
pub fn evolve(
    h: &LzHamiltonian,
    cfg: &IntegratorConfig,
    t_start: f64,
    t_end: f64,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
        return Err(Error::InvalidArgument(format!(
            "need finite t_start < t_end, got [{t_start}, {t_end}]"
        )));
    }
    if (t_end - t_start) / cfg.dt < cfg.sample_count as f64 {
        return Err(Error::InvalidArgument(format!(
            "window of {} with dt = {} has fewer steps than the {} requested samples",
            t_end - t_start,
            cfg.dt,
            cfg.sample_count
        )));
    }

    let n = h.n();
    let (psi0, reference_config) = initial_state(h, t_start, cfg.init_mode)?;
    let mut integrator = FrameIntegrator::new(h);

    // φ = e^{iθ} ψ
    let mut phi: Vec<Complex64> = psi0
        .amplitudes
        .iter()
        .zip(integrator.phases(t_start))
        .map(|(a, p)| a * p.conj())
        .collect();

    let times = sample_times(t_start, t_end, cfg.sample_count);
    let mut site_flip_prob = Vec::with_capacity(times.len());
    let mut es_mean = Vec::with_capacity(times.len());
    let mut gs_mean = Vec::with_capacity(times.len());
    let mut norm = Vec::with_capacity(times.len());
    let mut max_norm_drift = 0.0f64;

    let mut populations = vec![0.0; h.dim()];
    let mut record = |phi: &[Complex64], populations: &mut Vec<f64>| {
        for (p, a) in populations.iter_mut().zip(phi) {
            *p = a.norm_sqr();
        }
        let flips = site_flip_probabilities(populations, n, reference_config);
        let es = excited_mean(&flips);
        site_flip_prob.push(flips);
        es_mean.push(es);
        gs_mean.push(1.0 - es);
        norm.push(populations.iter().sum::<f64>().sqrt());
    };
    record(&phi, &mut populations);
    max_norm_drift = max_norm_drift.max((psi0.norm() - 1.0).abs());

    for seg in times.windows(2) {
        let (seg_start, seg_end) = (seg[0], seg[1]);
        let steps = (((seg_end - seg_start) / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
        let omega = integrator
            .max_frequency(seg_start)
            .max(integrator.max_frequency(seg_end));
        let substeps = ((cfg.dt * omega / MAX_PHASE_PER_STEP).ceil() as usize).max(1);
        let h = (seg_end - seg_start) / (steps * substeps) as f64;
        integrator.seed(seg_start, h);

        for k in 0..steps {
            for _ in 0..substeps {
                integrator.step(&mut phi, h);
            }
            let norm_sq: f64 = phi.iter().map(|a| a.norm_sqr()).sum();
            let t = seg_start + ((k + 1) * substeps) as f64 * h;
            if !norm_sq.is_finite() {
                return Err(Error::NonFinite { t });
            }
            let drift = (norm_sq.sqrt() - 1.0).abs();
            max_norm_drift = max_norm_drift.max(drift);
            if drift > cfg.norm_tol {
                return Err(Error::NormDrift {
                    drift,
                    t,
                    tol: cfg.norm_tol,
                });
            }
        }
        record(&phi, &mut populations);
    }

    let amplitudes = phi
        .iter()
        .zip(integrator.phases(t_end))
        .map(|(a, p)| a * p)
        .collect();
    Ok(Trajectory {
        times,
        site_flip_prob,
        es_mean,
        gs_mean,
        norm,
        reference_config,
        max_norm_drift,
        final_state: StateVector { n, amplitudes },
    })
}

/// Infinite-window Landau–Zener flip probability `1 − exp(−2π g²/r)`
/// (ħ = 1).
pub fn lz_closed_form(g: f64, r: f64) -> f64 {
    1.0 - (-2.0 * PI * g * g / r).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, ring_topology, CouplingParams, RingTopology};

    fn single(g: f64, r: f64) -> LzHamiltonian {
        let p = CouplingParams {
            g,
            j1: 0.0,
            j2: 0.0,
            r,
        };
        build_hamiltonian(&p, &RingTopology::single_site()).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert!((lz_closed_form(1.0, 1.0) - 0.998_132_557).abs() < 5e-10);
        assert!((lz_closed_form(1.0, 7.0) - 0.592_452_5).abs() < 5e-8);
        assert!(lz_closed_form(1.0, 1e12) < 1e-11);
    }

    #[test]
    fn single_site_ground_state_is_up() {
        let (psi, reference) =
            initial_state(&single(1.0, 1.0), -30.0, InitMode::Adiabatic).unwrap();
        assert_eq!(reference, 0);
        let a = psi.amplitudes();
        assert!(a[0].im == 0.0 && a[0].re > 0.0);
        // admixture ~ g / (r |t|) = 1/30
        assert!(a[1].norm() < 0.04 && a[1].norm() > 0.02);
        assert!((psi.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn init_modes_agree_without_tunneling() {
        let p = CouplingParams {
            g: 0.0,
            j1: 0.0,
            j2: 0.0,
            r: 1.0,
        };
        let h = build_hamiltonian(&p, &ring_topology(3).unwrap()).unwrap();
        let (a, ra) = initial_state(&h, -5.0, InitMode::Adiabatic).unwrap();
        let (d, rd) = initial_state(&h, -5.0, InitMode::Diabatic).unwrap();
        assert_eq!(ra, 0);
        assert_eq!(rd, 0);
        assert_eq!(d, StateVector::basis(3, 0).unwrap());
        assert_eq!(a, d);
    }

    #[test]
    fn four_ring_reference_is_all_up() {
        // Oracle: the dominant basis state of the 16x16 H(-30), found by
        // power iteration on (σ - H), independent of the eigensolver path.
        let h = build_hamiltonian(
            &CouplingParams::new(1.0, 1.0, 1.0),
            &ring_topology(4).unwrap(),
        )
        .unwrap();
        let m = hamiltonian_at(&h, -30.0);
        let shift = 200.0;
        let mut v = vec![Complex64::new(1.0, 0.0); 16];
        let mut w = vec![ZERO; 16];
        for _ in 0..500 {
            m.apply(&v, &mut w);
            for i in 0..16 {
                v[i] = v[i] * shift - w[i];
            }
            let nrm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= nrm);
        }
        let dominant = (0..16)
            .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
            .unwrap();
        assert_eq!(dominant, 0);

        let (psi, reference) = initial_state(&h, -30.0, InitMode::Adiabatic).unwrap();
        assert_eq!(reference, 0);
        let overlap: Complex64 = psi
            .amplitudes()
            .iter()
            .zip(&v)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_ground_is_reported() {
        // ferromagnetic pair at t = 0: ↑↑ and ↓↓ split only at order g²
        let p = CouplingParams {
            g: 1e-12,
            j1: -1.0,
            j2: 0.0,
            r: 1.0,
        };
        let h = build_hamiltonian(&p, &ring_topology(2).unwrap()).unwrap();
        let err = initial_state(&h, 0.0, InitMode::Adiabatic).unwrap_err();
        assert!(matches!(err, Error::DegenerateGround { .. }), "{err}");
        assert!(initial_state(&h, f64::NAN, InitMode::Diabatic).is_err());
    }

    #[test]
    fn rk4_step_on_constant_diagonal() {
        // |↑↓⟩ has no net magnetization, so K vanishes on it and with g = 0
        // its energy is the constant −j1
        let p = CouplingParams {
            g: 0.0,
            j1: 0.7,
            j2: 0.0,
            r: 1.0,
        };
        let h = build_hamiltonian(&p, &ring_topology(2).unwrap()).unwrap();
        let psi = StateVector::basis(2, 0b01).unwrap();
        let dt = 0.01;
        let out = rk4_step(&h, &psi, 3.0, dt).unwrap();
        let z = Complex64::new(0.0, 0.7 * dt);
        let expected =
            Complex64::new(1.0, 0.0) + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
        assert!((out.amplitudes()[1] - expected).norm() < 1e-15);
        assert!(out
            .amplitudes()
            .iter()
            .enumerate()
            .all(|(b, a)| b == 1 || *a == ZERO));
    }

    #[test]
    fn rk4_step_errors_and_zero_hamiltonian_limit() {
        let h = single(1.0, 1.0);
        let psi = StateVector::basis(1, 0).unwrap();
        assert!(rk4_step(&h, &psi, 0.0, 0.0).is_err());
        assert!(rk4_step(&h, &StateVector::basis(2, 0).unwrap(), 0.0, 0.1).is_err());
        assert!(matches!(
            rk4_step(&h, &psi, 0.0, 1e300),
            Err(Error::NonFinite { .. })
        ));

        // only the sweep acts when g = 0: amplitudes keep their moduli
        let field_only = single(0.0, 1.0);
        let psi =
            StateVector::new(1, vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let out = rk4_step(&field_only, &psi, 0.0, 0.01).unwrap();
        assert!((out.amplitudes()[0].norm() - 0.6).abs() < 1e-12);
        assert!((out.amplitudes()[1].norm() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn stationary_populations_are_preserved() {
        let p = CouplingParams {
            g: 0.0,
            j1: 1.0,
            j2: -0.5,
            r: 2.0,
        };
        let h = build_hamiltonian(&p, &ring_topology(4).unwrap()).unwrap();
        let amp = Complex64::new(0.25, 0.0);
        let mut psi = StateVector::new(4, vec![amp; 16]).unwrap();
        let mut t = -1.0;
        for _ in 0..100 {
            psi = rk4_step(&h, &psi, t, 1e-3).unwrap();
            t += 1e-3;
        }
        for p in psi.populations() {
            assert!((p - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn no_tunneling_means_no_flips() {
        let p = CouplingParams {
            g: 0.0,
            j1: 0.5,
            j2: -0.6,
            r: 1.0,
        };
        let h = build_hamiltonian(&p, &ring_topology(4).unwrap()).unwrap();
        let cfg = IntegratorConfig {
            dt: 1e-2,
            sample_count: 101,
            ..Default::default()
        };
        let traj = evolve(&h, &cfg, -5.0, 5.0).unwrap();
        assert!(traj.es_mean.iter().all(|&e| e == 0.0));
        assert!(traj.site_flip_prob.iter().flatten().all(|&e| e == 0.0));
    }

    #[test]
    fn evolve_samples_and_complements() {
        let cfg = IntegratorConfig {
            dt: 1e-2,
            sample_count: 7,
            ..Default::default()
        };
        let traj = evolve(&single(1.0, 2.0), &cfg, -3.0, 3.0).unwrap();
        assert_eq!(traj.times, vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        for (e, g) in traj.es_mean.iter().zip(&traj.gs_mean) {
            assert!((e + g - 1.0).abs() < 1e-12);
        }
        assert!(traj.norm.iter().all(|n| (n - 1.0).abs() < 1e-6));
        assert!((traj.final_state.norm() - traj.norm[6]).abs() < 1e-14);
    }

    #[test]
    fn evolve_rejects_bad_windows() {
        let h = single(1.0, 1.0);
        let cfg = IntegratorConfig::default();
        assert!(evolve(&h, &cfg, 1.0, -1.0).is_err());
        assert!(evolve(&h, &cfg, 0.0, 1.0).is_err()); // 1000 steps < 2001 samples
        let bad = IntegratorConfig {
            sample_count: 1,
            ..cfg
        };
        assert!(evolve(&h, &bad, -30.0, 30.0).is_err());
    }

    #[test]
    fn tight_norm_budget_is_enforced() {
        let cfg = IntegratorConfig {
            dt: 0.2,
            norm_tol: 1e-12,
            sample_count: 11,
            ..Default::default()
        };
        let err = evolve(&single(1.0, 1.0), &cfg, -5.0, 5.0).unwrap_err();
        assert!(matches!(err, Error::NormDrift { .. }), "{err}");
    }

    #[test]
    fn lab_and_frame_integrators_agree() {
        let p = CouplingParams::new(0.5, -0.3, 1.0);
        let h = build_hamiltonian(&p, &ring_topology(3).unwrap()).unwrap();
        let cfg = IntegratorConfig {
            dt: 1e-3,
            sample_count: 3,
            ..Default::default()
        };
        let traj = evolve(&h, &cfg, -2.0, 2.0).unwrap();

        let (mut psi, _) = initial_state(&h, -2.0, InitMode::Adiabatic).unwrap();
        let mut t = -2.0;
        for k in 0..4000 {
            psi = rk4_step(&h, &psi, t, 1e-3).unwrap();
            t = -2.0 + (k + 1) as f64 * 1e-3;
        }
        let d: f64 = psi
            .amplitudes()
            .iter()
            .zip(traj.final_state.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-9, "max amplitude difference {d}");
    }
}
