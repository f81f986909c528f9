//! Time propagation of flattened states.
//!
//! [`evolve_expm`] applies the exponential of the generator (dense
//! Padé or Krylov action), [`evolve_ode`] integrates with an embedded
//! Runge–Kutta pair, and [`evolve_reduced`] works on the single-excitation
//! Liouville block only. Every produced state is checked for physicality;
//! violations are reported, never repaired.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::couplings::CouplingSet;
use crate::hilbert::{DensityMatrix, Physicality, PureState, Register};
use crate::krylov::{expmv, KrylovOptions};
use crate::linalg::{expm, hermitian_eigenvalues, hermiticity_residual, ONE};
use crate::liouvillian::{sector_generator, Form, Superoperator};
use crate::sector::SectorMatrix;
use crate::{CMat, CVec, Error, Result, C64};

/// Trace drift tolerated along a trajectory.
pub const TRAJ_TOL_TRACE: f64 = 1e-9;
/// Hermiticity residual tolerated along a trajectory.
pub const TRAJ_TOL_HERM: f64 = 1e-10;
/// Most negative eigenvalue tolerated along a trajectory.
pub const TRAJ_TOL_PSD: f64 = 1e-7;

/// Largest number of points a generated grid may hold.
pub const MAX_GRID_POINTS: usize = 10_000_000;

fn check_points(points: usize) -> Result<()> {
    match points {
        0 => Err(Error::InvalidArgument("time grid needs at least one point".into())),
        p if p > MAX_GRID_POINTS => {
            Err(Error::SizeGuard(format!("time grid with {p} points exceeds {MAX_GRID_POINTS}")))
        }
        _ => Ok(()),
    }
}

/// Strictly increasing, non-negative sample times in units of `1/gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.times
    }
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("time grid is empty".into()));
        }
        if let Some(bad) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidArgument(format!("time {bad} must be finite and >= 0")));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { times })
    }

    /// `points` evenly spaced times from `start` to `stop` inclusive.
    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        check_points(points)?;
        match points {
            1 => Self::new(vec![start]),
            _ => {
                let step = (stop - start) / (points - 1) as f64;
                let mut times: Vec<f64> = (0..points).map(|k| start + step * k as f64).collect();
                times[points - 1] = stop;
                Self::new(times)
            }
        }
    }

    /// Geometrically spaced times; `start` must be positive.
    pub fn log(start: f64, stop: f64, points: usize) -> Result<Self> {
        if start.is_nan() || start <= 0.0 {
            return Err(Error::InvalidArgument("log grid needs start > 0".into()));
        }
        check_points(points)?;
        match points {
            1 => Self::new(vec![start]),
            _ => {
                let (a, b) = (start.ln(), stop.ln());
                let step = (b - a) / (points - 1) as f64;
                let mut times: Vec<f64> = (0..points).map(|k| (a + step * k as f64).exp()).collect();
                times[0] = start;
                times[points - 1] = stop;
                Self::new(times)
            }
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.times.last().expect("grid is non-empty")
    }
}

/// States on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn register(&self) -> Register {
        self.states[0].register()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.grid.times.iter().copied().zip(&self.states)
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is non-empty")
    }
}

/// Sector-block states on a time grid.
#[derive(Debug, Clone)]
pub struct SectorTrajectory {
    grid: TimeGrid,
    states: Vec<SectorMatrix>,
}

impl SectorTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[SectorMatrix] {
        &self.states
    }

    pub fn register(&self) -> Register {
        self.states[0].register()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &SectorMatrix)> {
        self.grid.times.iter().copied().zip(&self.states)
    }

    pub fn last(&self) -> &SectorMatrix {
        self.states.last().expect("trajectory is non-empty")
    }

    /// Full-space trajectory; requires a register within the full-space limit.
    pub fn to_full(&self) -> Result<Trajectory> {
        let states = self.states.iter().map(SectorMatrix::to_density_matrix).collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { grid: self.grid.clone(), states })
    }

    /// `<psi0| rho(t) |psi0>` for a sector-supported `psi0`.
    pub fn population(&self, psi0: &PureState) -> Result<Vec<f64>> {
        self.states.iter().map(|s| Ok(s.expectation(psi0)?.re)).collect()
    }
}

/// Propagation engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Expm,
    Ode,
    Reduced,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Expm => "expm",
            Engine::Ode => "ode",
            Engine::Reduced => "reduced",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expm" => Ok(Engine::Expm),
            "ode" => Ok(Engine::Ode),
            "reduced" => Ok(Engine::Reduced),
            other => Err(Error::Config(format!("unknown engine '{other}' (expm, ode, reduced)"))),
        }
    }
}

fn check_physical(t: f64, m: &CMat) -> Result<()> {
    let p = Physicality::of(m);
    if !p.within(TRAJ_TOL_TRACE, TRAJ_TOL_HERM, TRAJ_TOL_PSD) {
        return Err(Error::Integration {
            time: t,
            reason: format!(
                "unphysical state: trace error {:e}, hermiticity residual {:e}, min eigenvalue {:e}",
                p.trace_error, p.hermiticity_residual, p.min_eigenvalue
            ),
        });
    }
    Ok(())
}

fn check_sector(t: f64, m: &CMat) -> Result<()> {
    // the full state is this block padded with zeros, same spectrum up to zeros
    let tr: C64 = m.diagonal().iter().sum();
    let trace_error = (tr - ONE).norm();
    let herm = hermiticity_residual(m);
    let lo = hermitian_eigenvalues(m).first().copied().unwrap_or(0.0).min(0.0);
    if trace_error > TRAJ_TOL_TRACE || herm > TRAJ_TOL_HERM || lo < -TRAJ_TOL_PSD {
        return Err(Error::Integration {
            time: t,
            reason: format!(
                "unphysical state: trace error {trace_error:e}, hermiticity residual {herm:e}, min eigenvalue {lo:e}"
            ),
        });
    }
    Ok(())
}

fn check_registers(l: &Superoperator, rho0: &DensityMatrix) -> Result<()> {
    if l.register() != rho0.register() {
        return Err(Error::DimensionMismatch { expected: l.register().n(), found: rho0.register().n() });
    }
    Ok(())
}

fn finish(l: &Superoperator, grid: &TimeGrid, flats: Vec<CVec>) -> Result<Trajectory> {
    let d = l.register().dim();
    let mut states = Vec::with_capacity(flats.len());
    for (t, v) in grid.times.iter().zip(flats) {
        let m = CMat::from_column_slice(d, d, v.as_slice());
        check_physical(*t, &m)?;
        states.push(DensityMatrix::unchecked(l.register(), m)?);
    }
    Ok(Trajectory { grid: grid.clone(), states })
}

/// Steps `v` through the grid with `e^{L dt}`, reusing the propagator while
/// the increment repeats.
fn dense_steps(l: &CMat, v0: &CVec, grid: &TimeGrid) -> Vec<CVec> {
    let mut out = Vec::with_capacity(grid.len());
    let mut cached: Option<(f64, CMat)> = None;
    let mut v = v0.clone();
    let mut prev = 0.0;
    for &t in &grid.times {
        let dt = t - prev;
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-14 * dt.max(1.0));
            if !reuse {
                cached = Some((dt, expm(&l.scale(dt))));
            }
            v = &cached.as_ref().expect("propagator cached").1 * &v;
        }
        out.push(v.clone());
        prev = t;
    }
    out
}

/// `rho(t_k) = unflatten(e^{L t_k} vec(rho0))`: dense Padé exponentials for
/// a dense generator, Krylov exponential action otherwise.
pub fn evolve_expm(l: &Superoperator, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Trajectory> {
    evolve_expm_with(l, rho0, grid, KrylovOptions::default())
}

pub fn evolve_expm_with(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: KrylovOptions,
) -> Result<Trajectory> {
    check_registers(l, rho0)?;
    let v0 = rho0.flatten().into_entries();
    let flats = match l.as_dense() {
        Some(m) => dense_steps(m, &v0, grid),
        None => {
            let norm = l.norm_bound();
            let mut out = Vec::with_capacity(grid.len());
            let mut v = v0;
            let mut prev = 0.0;
            for &t in &grid.times {
                if t > prev {
                    v = expmv(|x, y| l.apply_slice(x, y), norm, &v, t - prev, opts).map_err(|e| match e {
                        Error::Integration { time, reason } => {
                            Error::Integration { time: prev + time, reason }
                        }
                        other => other,
                    })?;
                }
                out.push(v.clone());
                prev = t;
            }
            out
        }
    };
    finish(l, grid, flats)
}

/// Step control of [`evolve_ode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    /// Default tolerances with the step bound `0.05 / max(1, omega0)`.
    pub fn for_omega0(omega0: f64) -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_step: 0.05 / omega0.abs().max(1.0), max_steps: 10_000_000 }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::for_omega0(1.0)
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Rk<'a, F: Fn(&[C64], &mut [C64])> {
    f: &'a F,
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
}

impl<'a, F: Fn(&[C64], &mut [C64])> Rk<'a, F> {
    fn new(f: &'a F, dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self { f, k: std::array::from_fn(|_| z.clone()), tmp: z }
    }

    fn stage(&mut self, y: &[C64], h: f64, coeffs: &[(usize, f64)], into: usize) {
        for (i, t) in self.tmp.iter_mut().enumerate() {
            let mut acc = y[i];
            for &(s, a) in coeffs {
                acc += self.k[s][i] * (h * a);
            }
            *t = acc;
        }
        let (tmp, k) = (&self.tmp, &mut self.k[into]);
        (self.f)(tmp, k);
    }

    /// One step from `y` (with `k[0] = f(y)`), writing the 5th-order result
    /// to `out` and returning the scaled error norm.
    fn step(&mut self, y: &[C64], h: f64, rtol: f64, atol: f64, out: &mut [C64]) -> f64 {
        self.stage(y, h, &[(0, A21)], 1);
        self.stage(y, h, &[(0, A31), (1, A32)], 2);
        self.stage(y, h, &[(0, A41), (1, A42), (2, A43)], 3);
        self.stage(y, h, &[(0, A51), (1, A52), (2, A53), (3, A54)], 4);
        self.stage(y, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], 5);
        for i in 0..y.len() {
            let k = &self.k;
            out[i] = y[i] + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h;
        }
        (self.f)(out, &mut self.k[6]);
        let mut sum = 0.0;
        for i in 0..y.len() {
            let k = &self.k;
            let e =
                (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let scale = atol + rtol * y[i].norm().max(out[i].norm());
            sum += (e.norm() / scale).powi(2);
        }
        (sum / y.len() as f64).sqrt()
    }
}

/// Integrates `d vec(rho)/dt = L vec(rho)` with adaptive Dormand–Prince
/// steps, landing exactly on every grid time.
pub fn evolve_ode(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: OdeOptions,
) -> Result<Trajectory> {
    check_registers(l, rho0)?;
    let v0 = rho0.flatten().into_entries();
    let flats = integrate(&|x: &[C64], y: &mut [C64]| l.apply_slice(x, y), v0, grid, opts)?;
    finish(l, grid, flats)
}

fn integrate<F: Fn(&[C64], &mut [C64])>(
    f: &F,
    v0: CVec,
    grid: &TimeGrid,
    opts: OdeOptions,
) -> Result<Vec<CVec>> {
    let dim = v0.len();
    let mut rk = Rk::new(f, dim);
    let mut y: Vec<C64> = v0.as_slice().to_vec();
    let mut next = y.clone();
    let mut t = 0.0;
    let mut h = opts.max_step;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(grid.len());
    f(&y, &mut rk.k[0]);
    for &target in &grid.times {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    time: t,
                    reason: format!("tolerance not met within {} steps", opts.max_steps),
                });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let err = rk.step(&y, step, opts.rtol, opts.atol, &mut next);
            if !err.is_finite() {
                return Err(Error::Integration { time: t, reason: "non-finite error estimate".into() });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut next);
                // first-same-as-last: f(y_new) is already in k[6]
                rk.k.swap(0, 6);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            let proposed = step * factor;
            h = if err <= 1.0 && last { h.max(proposed) } else { proposed }.min(opts.max_step);
            if h < 1e-14 * target.max(1.0) {
                return Err(Error::Integration { time: t, reason: "step size underflow".into() });
            }
        }
        out.push(CVec::from_vec(y.clone()));
    }
    Ok(out)
}

fn sector_flat(m: &SectorMatrix) -> CVec {
    CVec::from_column_slice(m.entries().as_slice())
}

/// Propagates a sector-supported initial state on the `(n+1)^2` Liouville
/// block with the dense exponential. Works beyond the full-space limit.
pub fn evolve_reduced(c: &CouplingSet, psi0: &PureState, grid: &TimeGrid) -> Result<SectorTrajectory> {
    if c.register() != psi0.register() {
        return Err(Error::DimensionMismatch { expected: c.register().n(), found: psi0.register().n() });
    }
    evolve_reduced_state(c, &SectorMatrix::projector(psi0)?, grid)
}

/// [`evolve_reduced`] from a sector density matrix.
pub fn evolve_reduced_state(
    c: &CouplingSet,
    rho0: &SectorMatrix,
    grid: &TimeGrid,
) -> Result<SectorTrajectory> {
    if c.register() != rho0.register() {
        return Err(Error::DimensionMismatch { expected: c.register().n(), found: rho0.register().n() });
    }
    let l = sector_generator(c, Form::PerPair)?;
    let flats = dense_steps(&l, &sector_flat(rho0), grid);
    let d = c.register().n() + 1;
    let mut states = Vec::with_capacity(flats.len());
    for (t, v) in grid.times.iter().zip(flats) {
        let m = CMat::from_column_slice(d, d, v.as_slice());
        check_sector(*t, &m)?;
        states.push(SectorMatrix::new(c.register(), m)?);
    }
    Ok(SectorTrajectory { grid: grid.clone(), states })
}

/// `P(t_k) = <psi0| rho(t_k) |psi0>`.
pub fn population(traj: &Trajectory, psi0: &PureState) -> Result<Vec<f64>> {
    traj.states.iter().map(|s| Ok(s.expectation(psi0)?.re)).collect()
}
