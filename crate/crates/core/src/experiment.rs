//! Experiment configuration and the table-producing runs behind the
//! command-line driver.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::couplings::{all_to_all, couplings_from_field, CouplingSet};
use crate::dynamics::{evolve_expm, evolve_ode, evolve_reduced, Engine, OdeOptions, TimeGrid};
use crate::entanglement::{
    concurrence, fidelity, fidelity_sector, multipartite_negativity, multipartite_negativity_sector, n_half,
    n_half_sector, Bipartition,
};
use crate::hilbert::{
    max_entangled_steady, preset, single_excitation_ket, w_state, DensityMatrix, PureState, Register,
};
use crate::io::{load_couplings, load_field_samples, load_pure_state};
use crate::liouvillian::{build_liouvillian, spectrum, Form, Representation};
use crate::sector::SectorMatrix;
use crate::steady::{classify_initial, steady_basis, Classification, FinalStatePrediction};
use crate::{Error, RMat, Result, C64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Largest register for scans and random studies.
pub const STUDY_MAX_N: usize = 8;
/// Full-space engines switch from dense to sparse generators above this.
const DENSE_ENGINE_MAX_N: usize = 4;

const CONVENTIONS: &str =
    "emitter i is bit i-1 (|i> = index 2^(i-1)); column-stacked flattening; t in units of 1/gamma; gamma_ii = 1";

/// Where the coupling matrices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingSource {
    /// Uniform `gamma_ij = alpha` and `g_ij = g` off the diagonal.
    AllToAll {
        alpha: f64,
        #[serde(default)]
        g: f64,
    },
    Inline {
        gamma: Vec<Vec<f64>>,
        g: Vec<Vec<f64>>,
    },
    /// Couplings JSON file; its `omega0` takes precedence.
    File {
        path: PathBuf,
    },
    /// Field-sample JSON file converted with the configured `omega0`.
    Field {
        path: PathBuf,
    },
}

/// Initial pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// `r1` .. `r6` (six emitters).
    Preset {
        name: String,
    },
    W,
    /// `|i>` with emitter `index` excited; `0` is vacuum.
    Excitation {
        index: usize,
    },
    /// Dark state with Fourier phases `exp(2 pi i k (j-1)/n)`.
    MaxEntangled {
        k: usize,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { start: 0.0, stop: 20.0, points: 401, spacing: Spacing::Linear }
    }
}

impl TimeSpec {
    pub fn grid(&self) -> Result<TimeGrid> {
        match self.spacing {
            Spacing::Linear => TimeGrid::linear(self.start, self.stop, self.points),
            Spacing::Log => TimeGrid::log(self.start, self.stop, self.points),
        }
        .map_err(|e| Error::Config(format!("time: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Population,
    #[serde(rename = "n_n")]
    NN,
    NHalf,
    Concurrence,
    Fidelity,
}

impl Observable {
    pub fn column(self) -> &'static str {
        match self {
            Observable::Population => "population",
            Observable::NN => "N_n",
            Observable::NHalf => "N_half",
            Observable::Concurrence => "concurrence",
            Observable::Fidelity => "fidelity_vs_prediction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMode {
    #[default]
    Exact,
    Quasi,
}

/// A complete run description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub omega0: f64,
    pub couplings: CouplingSource,
    pub initial: InitialState,
    pub time: TimeSpec,
    pub observables: Vec<Observable>,
    pub engine: Engine,
    pub prediction: PredictionMode,
    /// Co-write prediction curves as `*_th` columns.
    pub theory: bool,
    /// Coupling values swept by `scan`.
    pub alphas: Vec<f64>,
    /// Sample count of `random-study`.
    pub count: usize,
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 6,
            omega0: 10.0,
            couplings: CouplingSource::AllToAll { alpha: 1.0, g: 0.0 },
            initial: InitialState::Preset { name: "r1".into() },
            time: TimeSpec::default(),
            observables: vec![Observable::Population, Observable::NN],
            engine: Engine::Expm,
            prediction: PredictionMode::Exact,
            theory: true,
            alphas: vec![0.9, 0.95, 0.99, 1.0],
            count: 100,
            seed: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON; messages carry line and column of the offending field.
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(dir) = path.parent() {
            let rebase = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            match &mut cfg.couplings {
                CouplingSource::File { path } | CouplingSource::Field { path } => rebase(path),
                _ => {}
            }
            if let InitialState::File { path } = &mut cfg.initial {
                rebase(path);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that does not require reading referenced files.
    pub fn validate(&self) -> Result<()> {
        let register = self.register()?;
        self.time.grid()?;
        if !self.omega0.is_finite() {
            return Err(Error::Config("omega0 must be finite".into()));
        }
        if !matches!(self.initial, InitialState::File { .. }) {
            self.initial_state_for(register)?;
        }
        if let CouplingSource::AllToAll { .. } | CouplingSource::Inline { .. } = self.couplings {
            self.couplings()?;
        }
        if let Some(bad) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Config(format!("alphas: {bad} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn register(&self) -> Result<Register> {
        Register::new(self.n).map_err(|e| Error::Config(format!("n: {e}")))
    }

    fn initial_state_for(&self, register: Register) -> Result<PureState> {
        let wrap = |e: Error| match e {
            Error::Config(m) => Error::Config(format!("initial: {m}")),
            other => Error::Config(format!("initial: {other}")),
        };
        match &self.initial {
            InitialState::Preset { name } => preset(name, register).map_err(wrap),
            InitialState::W => Ok(w_state(register)),
            InitialState::Excitation { index } => single_excitation_ket(*index, register).map_err(wrap),
            InitialState::MaxEntangled { k } => max_entangled_steady(register, *k).map_err(wrap),
            InitialState::File { path } => {
                let psi = load_pure_state(path)?;
                if psi.register() != register {
                    return Err(Error::Config(format!(
                        "initial: {} holds n = {}, config has n = {}",
                        path.display(),
                        psi.register().n(),
                        register.n()
                    )));
                }
                Ok(psi)
            }
        }
    }

    pub fn initial_state(&self) -> Result<PureState> {
        self.initial_state_for(self.register()?)
    }

    pub fn couplings(&self) -> Result<CouplingSet> {
        let register = self.register()?;
        let c = match &self.couplings {
            CouplingSource::AllToAll { alpha, g } => all_to_all(register, *alpha, Some(*g), self.omega0)?,
            CouplingSource::Inline { gamma, g } => {
                let n = self.n;
                let shape_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
                if !shape_ok(gamma) || !shape_ok(g) {
                    return Err(Error::Config(format!("couplings: inline matrices must be {n}x{n}")));
                }
                CouplingSet::new(
                    register,
                    self.omega0,
                    RMat::from_fn(n, n, |i, j| gamma[i][j]),
                    RMat::from_fn(n, n, |i, j| g[i][j]),
                )?
            }
            CouplingSource::File { path } => load_couplings(path)?,
            CouplingSource::Field { path } => couplings_from_field(&load_field_samples(path)?, self.omega0)?,
        };
        if c.register() != register {
            return Err(Error::Config(format!(
                "couplings: source holds n = {}, config has n = {}",
                c.register().n(),
                register.n()
            )));
        }
        Ok(c)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_string(self).expect("config serializes").as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Formats a float losslessly (shortest round-trip representation).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Named columns with `#` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl Table {
    fn new(cfg: &ExperimentConfig, run: &str, columns: Vec<String>) -> Self {
        let meta = vec![
            format!("subradiance {VERSION} {run}"),
            format!("config_sha256 {}", cfg.hash()),
            format!("conventions: {CONVENTIONS}"),
        ];
        Self { meta, columns, rows: Vec::new(), warnings: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for m in &self.meta {
            let _ = writeln!(out, "# {m}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// A propagated state, either full or restricted to the sector.
#[derive(Debug, Clone)]
pub enum Snapshot {
    Full(DensityMatrix),
    Sector(SectorMatrix),
}

impl Snapshot {
    pub fn register(&self) -> Register {
        match self {
            Snapshot::Full(m) => m.register(),
            Snapshot::Sector(m) => m.register(),
        }
    }

    pub fn population(&self, psi: &PureState) -> Result<f64> {
        Ok(match self {
            Snapshot::Full(m) => m.expectation(psi)?.re,
            Snapshot::Sector(m) => m.expectation(psi)?.re,
        })
    }

    pub fn multipartite_negativity(&self) -> Result<f64> {
        match self {
            Snapshot::Full(m) => multipartite_negativity(m),
            Snapshot::Sector(m) => multipartite_negativity_sector(m),
        }
    }

    pub fn n_half(&self) -> Result<f64> {
        match self {
            Snapshot::Full(m) => n_half(m),
            Snapshot::Sector(m) => n_half_sector(m),
        }
    }

    pub fn concurrence(&self) -> Result<f64> {
        match self {
            Snapshot::Full(m) => concurrence(m),
            Snapshot::Sector(m) => concurrence(&m.to_density_matrix()?),
        }
    }

    pub fn fidelity_to(&self, predicted: &SectorMatrix) -> Result<f64> {
        match self {
            Snapshot::Full(m) => fidelity(m, &predicted.to_density_matrix()?),
            Snapshot::Sector(m) => fidelity_sector(m, predicted),
        }
    }
}

/// Propagates `psi0` with the configured engine.
pub fn propagate(
    engine: Engine,
    c: &CouplingSet,
    psi0: &PureState,
    grid: &TimeGrid,
) -> Result<Vec<Snapshot>> {
    let register = c.register();
    Ok(match engine {
        Engine::Reduced => {
            evolve_reduced(c, psi0, grid)?.states().iter().cloned().map(Snapshot::Sector).collect()
        }
        Engine::Expm | Engine::Ode => {
            register.require_full()?;
            let rep = if register.n() <= DENSE_ENGINE_MAX_N && engine == Engine::Expm {
                Representation::Dense
            } else {
                Representation::Sparse
            };
            let l = build_liouvillian(c, Form::PerPair, rep)?;
            let rho0 = psi0.projector()?;
            let traj = if engine == Engine::Expm {
                evolve_expm(&l, &rho0, grid)?
            } else {
                evolve_ode(&l, &rho0, grid, OdeOptions::for_omega0(c.omega0()))?
            };
            traj.states().iter().cloned().map(Snapshot::Full).collect()
        }
    })
}

/// The closed-form prediction for the configured mode, or `None` when the
/// initial state leaves the sector.
pub fn prediction(
    cfg: &ExperimentConfig,
    c: &CouplingSet,
    psi0: &PureState,
) -> Result<Option<FinalStatePrediction>> {
    if psi0.weight_outside_sector() > crate::hilbert::TOL_NORM || c.register().n() < 2 {
        return Ok(None);
    }
    let decay = match cfg.prediction {
        PredictionMode::Exact => 0.0,
        PredictionMode::Quasi => {
            let alpha = match c.uniform_alpha() {
                Some(a) => a,
                None => {
                    c.off_diagonal_stats()
                        .ok_or_else(|| Error::Config("prediction: quasi mode needs n >= 2".into()))?
                        .0
                }
            };
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Config(format!("prediction: alpha = {alpha} outside [0, 1]")));
            }
            1.0 - alpha
        }
    };
    Ok(Some(steady_basis(c.register())?.prediction(psi0, c.omega0(), decay)?))
}

fn prediction_warnings(cfg: &ExperimentConfig, c: &CouplingSet) -> Vec<String> {
    let mut out = Vec::new();
    if c.has_coherent_coupling() {
        out.push("coherent coupling g is ignored by the prediction".to_string());
    }
    if cfg.prediction == PredictionMode::Quasi && c.uniform_alpha().is_none() {
        if let Some((mean, spread)) = c.off_diagonal_stats() {
            out.push(format!(
                "off-diagonal gamma is not uniform; the quasi prediction uses the mean {} (max deviation {})",
                fmt_f64(mean),
                fmt_f64(spread)
            ));
        }
    }
    out
}

fn observable_defined(o: Observable, register: Register, predicted: bool) -> bool {
    match o {
        Observable::Population => true,
        Observable::NN | Observable::NHalf => register.n() >= 2,
        Observable::Concurrence => register.n() == 2,
        Observable::Fidelity => predicted,
    }
}

/// Propagates and tabulates `t` plus each requested observable that is
/// defined for the register, optionally with `*_th` prediction columns.
pub fn run_evolve(cfg: &ExperimentConfig) -> Result<Table> {
    evolve_table(cfg, &cfg.observables, cfg.theory, "evolve")
}

/// `t,N_n,N_half,concurrence,fidelity_vs_prediction`, columns kept only
/// when defined.
pub fn run_entanglement(cfg: &ExperimentConfig) -> Result<Table> {
    let obs = [Observable::NN, Observable::NHalf, Observable::Concurrence, Observable::Fidelity];
    evolve_table(cfg, &obs, false, "entanglement")
}

fn evolve_table(cfg: &ExperimentConfig, requested: &[Observable], theory: bool, run: &str) -> Result<Table> {
    let c = cfg.couplings()?;
    let psi0 = cfg.initial_state()?;
    let grid = cfg.time.grid()?;
    let register = c.register();
    let pred = prediction(cfg, &c, &psi0)?;
    let obs: Vec<Observable> =
        requested.iter().copied().filter(|&o| observable_defined(o, register, pred.is_some())).collect();
    let with_th = |o: Observable| theory && pred.is_some() && o != Observable::Fidelity;
    let mut columns = vec!["t".to_string()];
    for &o in &obs {
        columns.push(o.column().to_string());
        if with_th(o) {
            columns.push(format!("{}_th", o.column()));
        }
    }
    let mut table = Table::new(cfg, run, columns);
    table.meta.push(format!("engine {} prediction {:?}", cfg.engine, cfg.prediction).to_lowercase());
    if register.n() >= 2 {
        let half = Bipartition::half(register)?;
        table.meta.push(format!("N_half partition A = {:?}", half.subset()));
    }
    let dropped: Vec<&str> = requested.iter().filter(|o| !obs.contains(o)).map(|o| o.column()).collect();
    if !dropped.is_empty() {
        table.meta.push(format!("undefined for this register: {}", dropped.join(" ")));
    }
    if pred.is_some() {
        table.warnings.extend(prediction_warnings(cfg, &c));
    }

    let states = propagate(cfg.engine, &c, &psi0, &grid)?;
    for (&t, s) in grid.times().iter().zip(&states) {
        let predicted = pred.as_ref().map(|p| p.evaluate(t)).transpose()?;
        let th = predicted.clone().map(Snapshot::Sector);
        let mut row = vec![t];
        for &o in &obs {
            let value = |snap: &Snapshot| -> Result<f64> {
                match o {
                    Observable::Population => snap.population(&psi0).map(|p| p.clamp(0.0, 1.0)),
                    Observable::NN => snap.multipartite_negativity(),
                    Observable::NHalf => snap.n_half(),
                    Observable::Concurrence => snap.concurrence(),
                    Observable::Fidelity => snap.fidelity_to(predicted.as_ref().expect("prediction present")),
                }
            };
            row.push(value(s)?);
            if with_th(o) {
                row.push(value(th.as_ref().expect("prediction present"))?);
            }
        }
        table.rows.push(row);
    }
    Ok(table)
}

/// Predicted state at `time.stop` and the classification of the initial
/// state.
#[derive(Debug, Clone)]
pub struct PredictReport {
    pub state: DensityMatrix,
    pub classification: Classification,
    pub warnings: Vec<String>,
}

impl PredictReport {
    /// `steady=<bool> max_entangled=<bool> fidelity_initial_final=<float>`.
    pub fn summary(&self) -> String {
        format!(
            "steady={} max_entangled={} fidelity_initial_final={}",
            self.classification.steady,
            self.classification.max_entangled,
            fmt_f64(self.classification.fidelity_initial_final)
        )
    }
}

pub fn run_predict(cfg: &ExperimentConfig) -> Result<PredictReport> {
    let c = cfg.couplings()?;
    let psi0 = cfg.initial_state()?;
    let pred = prediction(cfg, &c, &psi0)?.ok_or_else(|| {
        Error::OutsideSector("the prediction needs a single-excitation initial state".into())
    })?;
    let state = pred.evaluate(cfg.time.stop)?.to_density_matrix()?;
    let classification = classify_initial(&steady_basis(c.register())?, &psi0)?;
    Ok(PredictReport { state, classification, warnings: prediction_warnings(cfg, &c) })
}

/// Eigenvalues of the configured generator, `re,im`.
pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<Table> {
    let c = cfg.couplings()?;
    let l = build_liouvillian(&c, Form::PerPair, Representation::Dense)?;
    let report = spectrum(&l, false)?;
    let mut table = Table::new(cfg, "spectrum", vec!["re".into(), "im".into()]);
    table.rows = report.eigenvalues.iter().map(|z| vec![z.re, z.im]).collect();
    Ok(table)
}

fn study_register(cfg: &ExperimentConfig) -> Result<Register> {
    let register = cfg.register()?;
    if register.n() < 2 || register.n() > STUDY_MAX_N {
        return Err(Error::Config(format!("n = {} outside 2..={STUDY_MAX_N} for this run", register.n())));
    }
    Ok(register)
}

/// Fidelity and `N_n` difference between the reduced-engine state and the
/// quasi prediction over `(alpha, t)`: `alpha,t,fidelity,delta_Nn`.
pub fn run_scan(cfg: &ExperimentConfig) -> Result<Table> {
    let register = study_register(cfg)?;
    let g = match cfg.couplings {
        CouplingSource::AllToAll { g, .. } => g,
        _ => return Err(Error::Config("scan needs all_to_all couplings".into())),
    };
    if cfg.alphas.is_empty() {
        return Err(Error::Config("alphas: empty".into()));
    }
    let psi0 = cfg.initial_state()?;
    let grid = cfg.time.grid()?;
    let basis = steady_basis(register)?;
    let mut table =
        Table::new(cfg, "scan", vec!["alpha".into(), "t".into(), "fidelity".into(), "delta_Nn".into()]);
    if g != 0.0 {
        table.warnings.push("coherent coupling g is ignored by the prediction".into());
    }
    for &alpha in &cfg.alphas {
        let c = all_to_all(register, alpha, Some(g), cfg.omega0)?;
        let traj = evolve_reduced(&c, &psi0, &grid)?;
        let pred = basis.prediction(&psi0, cfg.omega0, 1.0 - alpha)?;
        for (t, s) in traj.iter() {
            let p = pred.evaluate(t)?;
            let f = fidelity_sector(s, &p)?;
            let dn = (multipartite_negativity_sector(s)? - multipartite_negativity_sector(&p)?).abs();
            table.rows.push(vec![alpha, t, f, dn]);
        }
    }
    Ok(table)
}

/// Normalized complex-Gaussian amplitudes on the `n` single-excitation
/// kets (no vacuum part).
pub fn random_single_excitation(register: Register, rng: &mut ChaCha8Rng) -> Result<PureState> {
    loop {
        let coeffs: Vec<C64> = (0..register.n())
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            let coeffs: Vec<C64> = coeffs.iter().map(|z| z / norm).collect();
            return PureState::from_excitation_coefficients(register, &coeffs);
        }
    }
}

/// `Nn_initial,Nn_final,fidelity_initial_final` for seeded random
/// single-excitation states, with the final state from the exact
/// prediction at `time.stop`.
pub fn run_random_study(cfg: &ExperimentConfig) -> Result<Table> {
    let register = study_register(cfg)?;
    let seed = cfg.seed.ok_or_else(|| Error::Config("random-study needs a seed".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = steady_basis(register)?;
    let mut table = Table::new(
        cfg,
        "random-study",
        vec!["Nn_initial".into(), "Nn_final".into(), "fidelity_initial_final".into()],
    );
    table.meta.push(format!("seed {seed} count {}", cfg.count));
    for _ in 0..cfg.count {
        let psi = random_single_excitation(register, &mut rng)?;
        let initial = SectorMatrix::projector(&psi)?;
        let fin = basis.prediction(&psi, cfg.omega0, 0.0)?.evaluate(cfg.time.stop)?;
        table.rows.push(vec![
            multipartite_negativity_sector(&initial)?,
            multipartite_negativity_sector(&fin)?,
            fidelity_sector(&initial, &fin)?,
        ]);
    }
    Ok(table)
}
