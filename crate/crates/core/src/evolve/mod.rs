//! Discrete adiabatic evolution: midpoint propagator, Trotter steps, phase-shift steps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::aeqs::{interpolated_hamiltonian, AeqsError, AeqsInstance, DEGENERACY_TOL};
use crate::linalg::{hadamard_power, hermitian_eig, spectral_norm, DenseMatrix, EigenSettings, Eigenpairs, LinalgError, StateVector, C64};

/// Default largest dimension evolved with dense per-step exponentials.
pub const DEFAULT_EVOLVE_MAX: usize = 512;

/// Hard cap on the number of steps a single run may take.
pub const MAX_STEPS: usize = 1 << 22;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Aeqs(#[from] AeqsError),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("dimension {dim} exceeds the evolution limit {limit}")]
    Capacity { dim: usize, limit: usize },
    #[error("initial Hamiltonian has a degenerate ground level (gap {gap:.3e})")]
    DegenerateStart { gap: f64 },
    #[error("H_ini is not diagonal in the Hadamard or Helmert basis (largest off-diagonal entry {0:.3e})")]
    NotHadamardDiagonal(f64),
    #[error("no T up to {max_t} reached the target; best overlap^2 {best_overlap_sq:.6} at T = {best_t}")]
    SearchExhausted { max_t: f64, best_t: f64, best_overlap_sq: f64 },
    #[error("T = {t} needs {steps} steps, above the cap {cap}")]
    StepCap { t: f64, steps: u128, cap: usize },
    #[error("unknown method '{0}' (expected midpoint, trotter or phase)")]
    UnknownMethod(String),
    #[error("trace export failed: {0}")]
    Export(String),
}

/// Total time `T`, number of steps `R` and `hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub t: f64,
    pub r: usize,
    pub hbar: f64,
}

impl Schedule {
    pub fn new(t: f64, r: usize) -> Result<Self, EvolveError> {
        Self::with_hbar(t, r, 1.0)
    }

    /// `T = 0` is accepted and yields identity propagators.
    pub fn with_hbar(t: f64, r: usize, hbar: f64) -> Result<Self, EvolveError> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(EvolveError::Schedule(format!("T = {t} must be finite and nonnegative")));
        }
        if r == 0 {
            return Err(EvolveError::Schedule("R must be at least 1".to_string()));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(EvolveError::Schedule(format!("hbar = {hbar} must be positive")));
        }
        Ok(Self { t, r, hbar })
    }

    fn tau(&self) -> f64 {
        self.t / self.r as f64 / self.hbar
    }

    /// Weight of `H_ini` in step `j`.
    pub fn alpha(&self, j: usize) -> f64 {
        self.tau() * (1.0 - (2 * j + 1) as f64 / (2 * self.r) as f64)
    }

    /// Weight of `H_fin` in step `j`.
    pub fn beta(&self, j: usize) -> f64 {
        self.tau() * ((2 * j + 1) as f64 / (2 * self.r) as f64)
    }

    /// `(T/R) / (2R hbar)`; `alpha_j = (2R-2j-1) gamma`, `beta_j = (2j+1) gamma`.
    pub fn gamma(&self) -> f64 {
        self.tau() / (2 * self.r) as f64
    }

    /// Midpoint `s` of step `j`.
    pub fn midpoint(&self, j: usize) -> f64 {
        (2 * j + 1) as f64 / (2 * self.r) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Midpoint,
    Trotter,
    Phase,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Midpoint => "midpoint",
            Self::Trotter => "trotter",
            Self::Phase => "phase",
        })
    }
}

impl FromStr for Method {
    type Err = EvolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "midpoint" => Ok(Self::Midpoint),
            "trotter" => Ok(Self::Trotter),
            "phase" | "phase-shift" => Ok(Self::Phase),
            _ => Err(EvolveError::UnknownMethod(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSettings {
    pub eigen: EigenSettings,
    pub dim_limit: usize,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self { eigen: EigenSettings::default(), dim_limit: DEFAULT_EVOLVE_MAX }
    }
}

impl EvolveSettings {
    fn check_dim(&self, dim: usize) -> Result<(), EvolveError> {
        let limit = self.dim_limit.min(self.eigen.dense_max);
        if dim > limit {
            return Err(EvolveError::Capacity { dim, limit });
        }
        Ok(())
    }
}

/// Eigenbasis kept for repeated exponentials `exp(-i theta H)`.
struct Spectral {
    basis: DenseMatrix,
    values: Vec<f64>,
}

impl Spectral {
    fn of(h: &DenseMatrix, settings: &EigenSettings) -> Result<Self, EvolveError> {
        let eig = hermitian_eig(h, settings)?;
        Ok(Self { basis: eig.vector_matrix(), values: eig.values })
    }

    fn from_eigenpairs(eig: &Eigenpairs) -> Self {
        Self { basis: eig.vector_matrix(), values: eig.values.clone() }
    }

    fn exp(&self, theta: f64) -> DenseMatrix {
        let n = self.values.len();
        let scaled = DenseMatrix::from_fn(n, n, |r, c| self.basis[(r, c)] * C64::from_polar(1.0, -theta * self.values[c]));
        scaled.matmul(&self.basis.adjoint()).expect("square")
    }

    fn exp_apply(&self, theta: f64, v: &[C64]) -> Vec<C64> {
        let n = self.values.len();
        let mut coeff = vec![C64::new(0.0, 0.0); n];
        for (c, k) in coeff.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (r, x) in v.iter().enumerate() {
                acc += self.basis[(r, c)].conj() * x;
            }
            *k = acc * C64::from_polar(1.0, -theta * self.values[c]);
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|c| self.basis[(r, c)] * coeff[c]).sum();
        }
        out
    }
}

fn dense_pair(instance: &AeqsInstance, settings: &EvolveSettings) -> Result<(DenseMatrix, DenseMatrix), EvolveError> {
    settings.check_dim(instance.dim())?;
    Ok((instance.h_ini.to_dense(), instance.h_fin.to_dense()))
}

fn dense_at(instance: &AeqsInstance, s: f64) -> Result<DenseMatrix, EvolveError> {
    Ok(interpolated_hamiltonian(instance, s.clamp(0.0, 1.0))?.to_dense())
}

/// `prod_j exp(-(i/hbar)(T/R) H((2j+1)/(2R)))`, later steps on the left.
pub fn midpoint_propagator(instance: &AeqsInstance, schedule: &Schedule, settings: &EvolveSettings) -> Result<DenseMatrix, EvolveError> {
    settings.check_dim(instance.dim())?;
    let mut u = DenseMatrix::identity(instance.dim());
    if schedule.t == 0.0 {
        return Ok(u);
    }
    for j in 0..schedule.r {
        let step = Spectral::of(&dense_at(instance, schedule.midpoint(j))?, &settings.eigen)?.exp(schedule.tau());
        u = step.matmul(&u)?;
    }
    Ok(u)
}

/// Factored steps `V(j) = exp(-i alpha_j H_ini) exp(-i beta_j H_fin)`.
pub struct Trotter {
    schedule: Schedule,
    ini: Spectral,
    fin: Spectral,
}

impl Trotter {
    pub fn new(instance: &AeqsInstance, schedule: &Schedule, settings: &EvolveSettings) -> Result<Self, EvolveError> {
        let (hi, hf) = dense_pair(instance, settings)?;
        Ok(Self { schedule: *schedule, ini: Spectral::of(&hi, &settings.eigen)?, fin: Spectral::of(&hf, &settings.eigen)? })
    }

    pub fn step(&self, j: usize) -> DenseMatrix {
        self.ini.exp(self.schedule.alpha(j)).matmul(&self.fin.exp(self.schedule.beta(j))).expect("square")
    }

    fn apply_step(&self, j: usize, v: &[C64]) -> Vec<C64> {
        self.ini.exp_apply(self.schedule.alpha(j), &self.fin.exp_apply(self.schedule.beta(j), v))
    }

    pub fn product(&self) -> DenseMatrix {
        let n = self.ini.values.len();
        if self.schedule.t == 0.0 {
            return DenseMatrix::identity(n);
        }
        (0..self.schedule.r).fold(DenseMatrix::identity(n), |u, j| self.step(j).matmul(&u).expect("square"))
    }
}

/// `V(R-1) ... V(0)`.
pub fn trotter_product(instance: &AeqsInstance, schedule: &Schedule, settings: &EvolveSettings) -> Result<DenseMatrix, EvolveError> {
    Ok(Trotter::new(instance, schedule, settings)?.product())
}

/// `||midpoint - trotter||`.
pub fn trotter_error(instance: &AeqsInstance, schedule: &Schedule, settings: &EvolveSettings) -> Result<f64, EvolveError> {
    let a = midpoint_propagator(instance, schedule, settings)?;
    let b = trotter_product(instance, schedule, settings)?;
    Ok(spectral_norm(&(&a - &b), &settings.eigen)?)
}

/// Steps `Z(j+1, j) = W (PS_ini)^{2R-2j-1} W^dagger (PS_fin)^{2j+1}` for `H_ini` diagonal in the basis `W`.
///
/// `W` is the Walsh-Hadamard transform on power-of-two dimensions and the Helmert basis otherwise;
/// both have the uniform vector as their first column.
pub struct PhaseShift {
    schedule: Schedule,
    basis: DenseMatrix,
    basis_adj: DenseMatrix,
    ini_phases: Vec<f64>,
    fin: Spectral,
}

/// Orthogonal `n x n` matrix whose first column is uniform and whose column `k` is
/// `(1, ..., 1, -k, 0, ..., 0) / sqrt(k (k+1))`.
fn helmert(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |r, c| {
        let v = if c == 0 {
            1.0 / (n as f64).sqrt()
        } else {
            let norm = ((c * (c + 1)) as f64).sqrt();
            match r.cmp(&c) {
                std::cmp::Ordering::Less => 1.0 / norm,
                std::cmp::Ordering::Equal => -(c as f64) / norm,
                std::cmp::Ordering::Greater => 0.0,
            }
        };
        C64::new(v, 0.0)
    })
}

/// Tolerance on the off-diagonal part of `W^dagger H_ini W`.
const HADAMARD_DIAGONAL_TOL: f64 = 1e-9;

impl PhaseShift {
    pub fn new(instance: &AeqsInstance, schedule: &Schedule, settings: &EvolveSettings) -> Result<Self, EvolveError> {
        let (hi, hf) = dense_pair(instance, settings)?;
        let n = hi.rows();
        let w = if n.is_power_of_two() { hadamard_power(n.trailing_zeros(), &settings.eigen)? } else { helmert(n) };
        let w_adj = w.adjoint();
        let d = w_adj.matmul(&hi)?.matmul(&w)?;
        let mut off = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    off = off.max(d[(r, c)].norm());
                }
            }
        }
        if off > HADAMARD_DIAGONAL_TOL {
            return Err(EvolveError::NotHadamardDiagonal(off));
        }
        Ok(Self {
            schedule: *schedule,
            basis: w,
            basis_adj: w_adj,
            ini_phases: (0..n).map(|q| d[(q, q)].re).collect(),
            fin: Spectral::of(&hf, &settings.eigen)?,
        })
    }

    fn ini_power(&self, power: usize) -> DenseMatrix {
        let g = self.schedule.gamma() * power as f64;
        DenseMatrix::from_fn(self.ini_phases.len(), self.ini_phases.len(), |r, c| {
            if r == c {
                C64::from_polar(1.0, -g * self.ini_phases[r])
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn step(&self, j: usize) -> DenseMatrix {
        let r = self.schedule.r;
        let ini = self.basis.matmul(&self.ini_power(2 * r - 2 * j - 1)).and_then(|m| m.matmul(&self.basis_adj));
        let fin = self.fin.exp(self.schedule.gamma() * (2 * j + 1) as f64);
        ini.and_then(|m| m.matmul(&fin)).expect("square")
    }

    fn apply_step(&self, j: usize, v: &[C64]) -> Vec<C64> {
        let r = self.schedule.r;
        let g = self.schedule.gamma() * (2 * r - 2 * j - 1) as f64;
        let u = self.fin.exp_apply(self.schedule.gamma() * (2 * j + 1) as f64, v);
        let mut u = self.basis_adj.apply(&u).expect("square");
        for (x, &lambda) in u.iter_mut().zip(&self.ini_phases) {
            *x *= C64::from_polar(1.0, -g * lambda);
        }
        self.basis.apply(&u).expect("square")
    }

    pub fn product(&self) -> DenseMatrix {
        let n = self.ini_phases.len();
        if self.schedule.t == 0.0 {
            return DenseMatrix::identity(n);
        }
        (0..self.schedule.r).fold(DenseMatrix::identity(n), |u, j| self.step(j).matmul(&u).expect("square"))
    }
}

pub fn phase_shift_product(instance: &AeqsInstance, schedule: &Schedule, settings: &EvolveSettings) -> Result<DenseMatrix, EvolveError> {
    Ok(PhaseShift::new(instance, schedule, settings)?.product())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub j: usize,
    #[serde(serialize_with = "crate::numfmt::sig")]
    pub s: f64,
    #[serde(serialize_with = "crate::numfmt::sig")]
    pub ground_energy: f64,
    #[serde(serialize_with = "crate::numfmt::sig")]
    pub overlap_sq: f64,
    #[serde(serialize_with = "crate::numfmt::sig")]
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub method: Method,
    pub schedule: Schedule,
    pub records: Vec<StepRecord>,
    /// `|<psi_g(T)|psi(T)>|^2`.
    #[serde(serialize_with = "crate::numfmt::sig")]
    pub final_overlap_sq: f64,
    /// `min_theta ||psi(T) - e^{i theta} psi_g(T)||`.
    #[serde(serialize_with = "crate::numfmt::sig")]
    pub final_distance: f64,
}

impl EvolutionTrace {
    /// Columns `j,s,ground_energy,overlap_sq,norm`.
    pub fn write_csv(&self, out: impl Write) -> Result<(), EvolveError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "s", "ground_energy", "overlap_sq", "norm"]).map_err(|e| EvolveError::Export(e.to_string()))?;
        for r in &self.records {
            let fields = [
                r.j.to_string(),
                crate::numfmt::fmt_sig(r.s),
                crate::numfmt::fmt_sig(r.ground_energy),
                crate::numfmt::fmt_sig(r.overlap_sq),
                crate::numfmt::fmt_sig(r.norm),
            ];
            w.write_record(&fields).map_err(|e| EvolveError::Export(e.to_string()))?;
        }
        w.flush().map_err(|e| EvolveError::Export(e.to_string()))
    }
}

enum Stepper {
    Midpoint,
    Trotter(Trotter),
    Phase(PhaseShift),
}

struct Run {
    initial: StateVector,
    stepper: Stepper,
}

impl Run {
    fn new(instance: &AeqsInstance, schedule: &Schedule, method: Method, settings: &EvolveSettings) -> Result<Self, EvolveError> {
        let (hi, _) = dense_pair(instance, settings)?;
        let eig = hermitian_eig(&hi, &settings.eigen)?;
        let gap = eig.values.get(1).map_or(f64::INFINITY, |v| v - eig.values[0]);
        if gap <= DEGENERACY_TOL {
            return Err(EvolveError::DegenerateStart { gap });
        }
        let stepper = match method {
            Method::Midpoint => Stepper::Midpoint,
            Method::Trotter => Stepper::Trotter(Trotter {
                schedule: *schedule,
                ini: Spectral::from_eigenpairs(&eig),
                fin: Spectral::of(&instance.h_fin.to_dense(), &settings.eigen)?,
            }),
            Method::Phase => Stepper::Phase(PhaseShift::new(instance, schedule, settings)?),
        };
        Ok(Self { initial: eig.vectors[0].clone(), stepper })
    }

    fn step(&self, instance: &AeqsInstance, schedule: &Schedule, j: usize, v: &[C64], settings: &EvolveSettings) -> Result<Vec<C64>, EvolveError> {
        if schedule.t == 0.0 {
            return Ok(v.to_vec());
        }
        Ok(match &self.stepper {
            Stepper::Midpoint => Spectral::of(&dense_at(instance, schedule.midpoint(j))?, &settings.eigen)?.exp_apply(schedule.tau(), v),
            Stepper::Trotter(t) => t.apply_step(j, v),
            Stepper::Phase(p) => p.apply_step(j, v),
        })
    }
}

fn ground_of(instance: &AeqsInstance, s: f64, settings: &EvolveSettings) -> Result<(f64, StateVector), EvolveError> {
    let eig = hermitian_eig(&dense_at(instance, s)?, &settings.eigen)?;
    Ok((eig.values[0], eig.vectors[0].clone()))
}

/// Evolves the ground state of `H_ini` step by step, recording every step.
pub fn evolve_trace(
    instance: &AeqsInstance,
    schedule: &Schedule,
    method: Method,
    settings: &EvolveSettings,
) -> Result<EvolutionTrace, EvolveError> {
    run(instance, schedule, method, settings, true)
}

/// Final state only; no per-step ground states.
pub fn evolve_final(
    instance: &AeqsInstance,
    schedule: &Schedule,
    method: Method,
    settings: &EvolveSettings,
) -> Result<EvolutionTrace, EvolveError> {
    run(instance, schedule, method, settings, false)
}

fn run(instance: &AeqsInstance, schedule: &Schedule, method: Method, settings: &EvolveSettings, record: bool) -> Result<EvolutionTrace, EvolveError> {
    let machine = Run::new(instance, schedule, method, settings)?;
    let mut psi = machine.initial.amplitudes().to_vec();
    let mut records = Vec::new();
    for j in 0..schedule.r {
        psi = machine.step(instance, schedule, j, &psi, settings)?;
        if record {
            let s = (j + 1) as f64 / schedule.r as f64;
            let (energy, g) = ground_of(instance, s, settings)?;
            let state = StateVector::new(psi.clone());
            records.push(StepRecord { j, s, ground_energy: energy, overlap_sq: g.inner(&state).norm_sqr(), norm: state.norm() });
        }
    }
    let (_, g) = ground_of(instance, 1.0, settings)?;
    let state = StateVector::new(psi);
    Ok(EvolutionTrace {
        method,
        schedule: *schedule,
        records,
        final_overlap_sq: g.inner(&state).norm_sqr(),
        final_distance: state.phase_aligned_distance(&g),
    })
}

/// How `R` follows `T` in searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    /// `R = max(floor, ceil(T^3))`, and `R = 1` at `T = 0`.
    Cubic { floor: usize },
    Fixed(usize),
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self::Cubic { floor: 64 }
    }
}

impl StepPolicy {
    pub fn steps(self, t: f64) -> Result<usize, EvolveError> {
        let r: u128 = match self {
            _ if t == 0.0 => 1,
            Self::Cubic { floor } => (t.powi(3).ceil() as u128).max(floor as u128),
            Self::Fixed(r) => r as u128,
        };
        if r > MAX_STEPS as u128 {
            return Err(EvolveError::StepCap { t, steps: r, cap: MAX_STEPS });
        }
        Ok(r.max(1) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSearch {
    pub t: f64,
    pub r: usize,
    pub overlap_sq: f64,
    /// Every `(T, overlap^2)` evaluated, in order.
    pub probes: Vec<(f64, f64)>,
}

/// Largest `T` tried by the doubling phase.
pub const MAX_SEARCH_T: f64 = (1u64 << 20) as f64;

/// Doubling `T = 1, 2, 4, ...` until the final overlap^2 reaches `target`, then bisection
/// on the last doubling interval down to relative width 1e-3.
pub fn find_sufficient_t(
    instance: &AeqsInstance,
    target: f64,
    policy: StepPolicy,
    method: Method,
    settings: &EvolveSettings,
) -> Result<TimeSearch, EvolveError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(EvolveError::Schedule(format!("target {target} must lie in (0, 1)")));
    }
    let mut probes = Vec::new();
    let mut probe = |t: f64| -> Result<(f64, usize), EvolveError> {
        let r = policy.steps(t)?;
        let overlap = evolve_final(instance, &Schedule::new(t, r)?, method, settings)?.final_overlap_sq;
        probes.push((t, overlap));
        Ok((overlap, r))
    };
    let mut best = (0.0, 0.0);
    let mut t = 1.0;
    let found = loop {
        let (overlap, r) = match probe(t) {
            Ok(v) => v,
            Err(EvolveError::StepCap { .. }) => break None,
            Err(e) => return Err(e),
        };
        if overlap > best.1 {
            best = (t, overlap);
        }
        if overlap >= target {
            break Some((t, overlap, r));
        }
        if t >= MAX_SEARCH_T {
            break None;
        }
        t *= 2.0;
    };
    let Some((mut hi, mut hi_overlap, mut hi_r)) = found else {
        return Err(EvolveError::SearchExhausted { max_t: t, best_t: best.0, best_overlap_sq: best.1 });
    };
    if hi > 1.0 {
        let mut lo = hi / 2.0;
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            let (overlap, r) = probe(mid)?;
            if overlap >= target {
                (hi, hi_overlap, hi_r) = (mid, overlap, r);
            } else {
                lo = mid;
            }
        }
    }
    Ok(TimeSearch { t: hi, r: hi_r, overlap_sq: hi_overlap, probes })
}
