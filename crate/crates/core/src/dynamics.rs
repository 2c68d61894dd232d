//! Trajectory dynamics: symplectic deterministic integration of the explicit
//! system-bath models, equilibrium trajectory ensembles (classical Boltzmann
//! or Wigner sampling), impulse-response experiments, a white-noise Langevin
//! integrator for the Ohmic limit of the two-body problem, and a residual
//! check of the memory-kernel (generalized Langevin) equation.
//!
//! Determinism contract: every stochastic operation derives per-trajectory
//! randomness from `(seed, trajectory index)` through a counter-based stream
//! cipher, and reduces with compensated summation, so results are
//! reproducible bit-for-bit.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // redundant when inherent f64 methods are available (std builds)
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::bath::memory_kernel;
use crate::error::{Error, Result};
use crate::quad_model::{io_bath_modes, BathSpec, QuadraticSystem};
use crate::spectrum::{decompose, sample_equilibrium_point, CovarianceKind};

/// Hard cap on the time step relative to the fastest mode.
pub const DT_CAP_FACTOR: f64 = 0.05;

/// Initial-condition statistics for ensemble runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Classical Boltzmann distribution at the configured temperature.
    Classical,
    /// Quantum equilibrium Gaussian (exact for quadratic dynamics).
    Wigner,
}

/// Ensemble-simulation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub temperature: f64,
}

impl SimConfig {
    pub fn validate(&self, max_frequency: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
        }
        if max_frequency > 0.0 && self.dt > DT_CAP_FACTOR / max_frequency {
            return Err(Error::InvalidParameter(format!(
                "dt = {} exceeds the stability cap {} = {DT_CAP_FACTOR}/max mode frequency",
                self.dt,
                DT_CAP_FACTOR / max_frequency
            )));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be nonnegative, got {}",
                self.temperature
            )));
        }
        if self.sampling == Sampling::Classical && self.temperature <= 0.0 {
            return Err(Error::InvalidParameter(
                "classical sampling needs positive temperature".into(),
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Per-trajectory RNG: one counter-based stream per trajectory index, so the
/// ensemble is reproducible independent of evaluation order.
fn trajectory_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Compensated (Kahan) accumulator; reduction error stays at the rounding
/// level regardless of summand count.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Statistically tagged correlation estimate on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_traj: usize,
}

/// Lagged and equal-time estimates for one observable pair `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelation {
    pub i: String,
    pub j: String,
    /// `< a_i(t) a_j(0) >`.
    pub lagged: CorrelationEstimate,
    /// `< a_i(t) a_j(t) >`.
    pub equal_time: CorrelationEstimate,
}

struct PairAccumulator {
    lagged: Vec<Kahan>,
    lagged_sq: Vec<Kahan>,
    equal: Vec<Kahan>,
    equal_sq: Vec<Kahan>,
}

impl PairAccumulator {
    fn new(n_points: usize) -> Self {
        Self {
            lagged: vec![Kahan::default(); n_points],
            lagged_sq: vec![Kahan::default(); n_points],
            equal: vec![Kahan::default(); n_points],
            equal_sq: vec![Kahan::default(); n_points],
        }
    }

    fn record(&mut self, k: usize, ai_t: f64, aj_t: f64, aj_0: f64) {
        let lag = ai_t * aj_0;
        let eq = ai_t * aj_t;
        self.lagged[k].add(lag);
        self.lagged_sq[k].add(lag * lag);
        self.equal[k].add(eq);
        self.equal_sq[k].add(eq * eq);
    }

    fn finish(self, times: &[f64], n_traj: usize, i: &str, j: &str) -> PairCorrelation {
        let estimate = |sums: Vec<Kahan>, sq: Vec<Kahan>| {
            let n = n_traj as f64;
            let mut mean = Vec::with_capacity(sums.len());
            let mut stderr = Vec::with_capacity(sums.len());
            for (s, s2) in sums.iter().zip(&sq) {
                let m = s.value() / n;
                let var = if n_traj > 1 {
                    ((s2.value() - n * m * m) / (n - 1.0)).max(0.0)
                } else {
                    0.0
                };
                mean.push(m);
                stderr.push((var / n).sqrt());
            }
            CorrelationEstimate {
                times: times.to_vec(),
                mean,
                stderr,
                n_traj,
            }
        };
        PairCorrelation {
            i: i.to_string(),
            j: j.to_string(),
            lagged: estimate(self.lagged, self.lagged_sq),
            equal_time: estimate(self.equal, self.equal_sq),
        }
    }
}

/// Fourth-order symplectic propagator (Yoshida triple-jump composition of
/// position-Verlet) for the linear force `f = -K r`.
struct Propagator<'a> {
    stiffness: &'a DMatrix<f64>,
    inv_masses: Vec<f64>,
    force: DVector<f64>,
}

impl<'a> Propagator<'a> {
    fn new(sys: &'a QuadraticSystem) -> Self {
        Self {
            stiffness: sys.stiffness(),
            inv_masses: sys.masses().iter().map(|&m| 1.0 / m).collect(),
            force: DVector::zeros(sys.dim()),
        }
    }

    fn step(&mut self, r: &mut DVector<f64>, v: &mut DVector<f64>, dt: f64) {
        const CBRT2: f64 = 1.259_921_049_894_873_2;
        let w1 = 1.0 / (2.0 - CBRT2);
        let w0 = -CBRT2 * w1;
        let drifts = [0.5 * w1, 0.5 * (w0 + w1), 0.5 * (w0 + w1), 0.5 * w1];
        let kicks = [w1, w0, w1];

        r.axpy(drifts[0] * dt, v, 1.0);
        for s in 0..3 {
            self.stiffness.mul_to(r, &mut self.force);
            for i in 0..v.len() {
                v[i] -= kicks[s] * dt * self.inv_masses[i] * self.force[i];
            }
            r.axpy(drifts[s + 1] * dt, v, 1.0);
        }
    }
}

fn uniform_times(dt: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|k| k as f64 * dt).collect()
}

fn resolve_pairs(labels: &[String], pairs: &[(String, String)]) -> Result<Vec<(usize, usize)>> {
    pairs
        .iter()
        .map(|(i, j)| {
            let a = labels
                .iter()
                .position(|l| l == i)
                .ok_or_else(|| Error::Usage(format!("unknown observable label {i:?}")))?;
            let b = labels
                .iter()
                .position(|l| l == j)
                .ok_or_else(|| Error::Usage(format!("unknown observable label {j:?}")))?;
            Ok((a, b))
        })
        .collect()
}

/// Integrate an equilibrium trajectory ensemble of the explicit system and
/// estimate lagged and equal-time correlations for each observable pair.
///
/// Initial conditions are sampled from the classical Boltzmann distribution
/// or the quantum equilibrium Gaussian (Wigner sampling; classical evolution
/// of such samples is exact for quadratic Hamiltonians).
pub fn simulate_ensemble(
    sys: &QuadraticSystem,
    cfg: &SimConfig,
    observables: &[(String, String)],
) -> Result<Vec<PairCorrelation>> {
    let modes = decompose(sys)?;
    crate::spectrum::require_equilibrium(sys, &modes)?;
    cfg.validate(modes.max_frequency())?;
    let pair_idx = resolve_pairs(sys.labels(), observables)?;
    let kind = match cfg.sampling {
        Sampling::Classical => CovarianceKind::Classical,
        Sampling::Wigner => CovarianceKind::Quantum,
    };

    let n_steps = cfg.n_steps();
    let times = uniform_times(cfg.dt, n_steps);
    let mut accs: Vec<PairAccumulator> = pair_idx
        .iter()
        .map(|_| PairAccumulator::new(n_steps + 1))
        .collect();

    let mut prop = Propagator::new(sys);
    for traj in 0..cfg.n_traj {
        let mut rng = trajectory_rng(cfg.seed, traj as u64);
        let mut draw = || rng.sample::<f64, _>(StandardNormal);
        let (mut r, p) = sample_equilibrium_point(sys, &modes, cfg.temperature, kind, &mut draw);
        let mut v = DVector::from_iterator(
            sys.dim(),
            p.iter().zip(sys.masses()).map(|(&pi, &mi)| pi / mi),
        );
        let initial: Vec<f64> = pair_idx.iter().map(|&(_, b)| r[b]).collect();
        for (acc, (&(a, b), &a0)) in accs.iter_mut().zip(pair_idx.iter().zip(&initial)) {
            acc.record(0, r[a], r[b], a0);
        }
        for k in 1..=n_steps {
            prop.step(&mut r, &mut v, cfg.dt);
            for (acc, (&(a, b), &a0)) in accs.iter_mut().zip(pair_idx.iter().zip(&initial)) {
                acc.record(k, r[a], r[b], a0);
            }
        }
    }

    Ok(accs
        .into_iter()
        .zip(observables)
        .map(|(acc, (i, j))| acc.finish(&times, cfg.n_traj, i, j))
        .collect())
}

/// Which momentum impulse to apply at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kick {
    /// Impulse `+J` on the first system coordinate only.
    X1,
    /// Impulses `+J, -J` on the two system coordinates.
    Antisymmetric,
    /// Impulses `+J, +J` on the two system coordinates.
    Symmetric,
}

/// Coordinate histories after a t = 0 momentum impulse on a system starting
/// at rest at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSeries {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `series[i][k]` is coordinate `i` at time `times[k]`.
    pub series: Vec<Vec<f64>>,
}

/// Apply a momentum impulse at t = 0 and integrate deterministically. No
/// equilibrium state is needed; unbounded systems are legal here.
pub fn impulse_response(
    sys: &QuadraticSystem,
    kick: Kick,
    impulse: f64,
    dt: f64,
    t_max: f64,
) -> Result<ResponseSeries> {
    if !impulse.is_finite() {
        return Err(Error::InvalidParameter("impulse must be finite".into()));
    }
    let modes = decompose(sys)?;
    let cfg = SimConfig {
        dt,
        t_max,
        n_traj: 1,
        seed: 0,
        sampling: Sampling::Wigner,
        temperature: 0.0,
    };
    cfg.validate(modes.max_frequency())?;

    let sys_idx = sys.system_indices();
    let n = sys.dim();
    let mut v = DVector::<f64>::zeros(n);
    match kick {
        Kick::X1 => {
            let i = *sys_idx.first().ok_or_else(|| {
                Error::Usage("impulse response needs at least one system coordinate".to_string())
            })?;
            v[i] = impulse / sys.masses()[i];
        }
        Kick::Antisymmetric | Kick::Symmetric => {
            if sys_idx.len() != 2 {
                return Err(Error::Usage(format!(
                    "two-sided kick needs exactly two system coordinates, got {}",
                    sys_idx.len()
                )));
            }
            let sign = if kick == Kick::Antisymmetric { -1.0 } else { 1.0 };
            v[sys_idx[0]] = impulse / sys.masses()[sys_idx[0]];
            v[sys_idx[1]] = sign * impulse / sys.masses()[sys_idx[1]];
        }
    }

    let n_steps = cfg.n_steps();
    let times = uniform_times(dt, n_steps);
    let mut r = DVector::<f64>::zeros(n);
    let mut series = vec![Vec::with_capacity(n_steps + 1); n];
    for i in 0..n {
        series[i].push(r[i]);
    }
    let mut prop = Propagator::new(sys);
    for _ in 0..n_steps {
        prop.step(&mut r, &mut v, dt);
        for i in 0..n {
            series[i].push(r[i]);
        }
    }
    Ok(ResponseSeries {
        times,
        labels: sys.labels().to_vec(),
        series,
    })
}

/// Bath initial conditions and the random force they induce on the time
/// grid: `F(t) = sum_j m_j w_j^2 [q_j(0) cos(w_j t) + p_j(0)/(m_j w_j) sin(w_j t)]`,
/// the homogeneous bath solution of the explicit model.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub bath_positions: Vec<f64>,
    pub bath_momenta: Vec<f64>,
    pub times: Vec<f64>,
    pub force: Vec<f64>,
}

impl NoiseRealization {
    /// Build from explicit bath initial conditions.
    pub fn from_state(
        bath: &BathSpec,
        positions: Vec<f64>,
        momenta: Vec<f64>,
        times: Vec<f64>,
    ) -> Result<Self> {
        if positions.len() != bath.len() || momenta.len() != bath.len() {
            return Err(Error::InvalidParameter(format!(
                "bath has {} modes but got {} positions, {} momenta",
                bath.len(),
                positions.len(),
                momenta.len()
            )));
        }
        let force = times
            .iter()
            .map(|&t| {
                bath.modes()
                    .iter()
                    .enumerate()
                    .map(|(j, mode)| {
                        let w = mode.frequency();
                        mode.coupling()
                            * (positions[j] * (w * t).cos()
                                + momenta[j] / (mode.mass() * w) * (w * t).sin())
                    })
                    .sum()
            })
            .collect();
        Ok(Self {
            bath_positions: positions,
            bath_momenta: momenta,
            times,
            force,
        })
    }

    /// Sample bath initial conditions from the decoupled thermal state of the
    /// bath (classical Boltzmann or per-mode Wigner Gaussian).
    pub fn sample_thermal(
        bath: &BathSpec,
        temperature: f64,
        sampling: Sampling,
        times: Vec<f64>,
        seed: u64,
        trajectory: u64,
    ) -> Result<Self> {
        if sampling == Sampling::Classical && temperature <= 0.0 {
            return Err(Error::InvalidParameter(
                "classical bath sampling needs positive temperature".into(),
            ));
        }
        let mut rng = trajectory_rng(seed, trajectory);
        let mut positions = Vec::with_capacity(bath.len());
        let mut momenta = Vec::with_capacity(bath.len());
        for mode in bath.modes() {
            let (m, w) = (mode.mass(), mode.frequency());
            let (var_q, var_p) = match sampling {
                Sampling::Classical => (temperature / (m * w * w), m * temperature),
                Sampling::Wigner => {
                    let coth = if temperature == 0.0 {
                        1.0
                    } else {
                        1.0 / (w / (2.0 * temperature)).tanh()
                    };
                    (coth / (2.0 * m * w), m * w * coth / 2.0)
                }
            };
            positions.push(var_q.sqrt() * rng.sample::<f64, _>(StandardNormal));
            momenta.push(var_p.sqrt() * rng.sample::<f64, _>(StandardNormal));
        }
        Self::from_state(bath, positions, momenta, times)
    }
}

/// Residual statistics of the memory-kernel equation check.
#[derive(Debug, Clone, PartialEq)]
pub struct GleResidual {
    /// RMS of the residual normalized by the RMS of the restoring force.
    pub normalized_rms: f64,
    pub rms_residual: f64,
    pub rms_reference: f64,
}

/// Check that an explicit-bath trajectory of a one-body independent-oscillator
/// system satisfies the memory-kernel equation
/// `m x'' + int_0^t mu(t - s) x'(s) ds + m w^2 x = F(t) - mu(t) x(0)`,
/// with the kernel from the bath modes and the force from the realization's
/// bath initial conditions. Trapezoidal convolution on the trajectory grid.
pub fn verify_gle_residual(
    sys: &QuadraticSystem,
    cfg: &SimConfig,
    realization: &NoiseRealization,
    system_position: f64,
    system_velocity: f64,
) -> Result<GleResidual> {
    let sys_idx = sys.system_indices();
    if sys_idx.len() != 1 {
        return Err(Error::Usage(format!(
            "the memory-kernel check needs exactly one system coordinate, got {}",
            sys_idx.len()
        )));
    }
    let bath = io_bath_modes(sys)?;
    let modes = decompose(sys)?;
    cfg.validate(modes.max_frequency())?;

    let si = sys_idx[0];
    let m = sys.masses()[si];
    let coupling_total: f64 = bath.modes().iter().map(|mo| mo.coupling()).sum();
    // Bare restoring stiffness, with the counterterm removed.
    let bare = sys.stiffness()[(si, si)] - coupling_total;

    let n_steps = realization.times.len().checked_sub(1).ok_or_else(|| {
        Error::InvalidParameter("realization time grid is empty".into())
    })?;
    let dt = cfg.dt;
    for (k, &t) in realization.times.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-9 * dt {
            return Err(Error::InvalidParameter(
                "realization time grid must be uniform with spacing cfg.dt".into(),
            ));
        }
    }

    // Propagate the full explicit system from the combined initial state.
    let n = sys.dim();
    let bath_idx = sys.bath_indices();
    let mut r = DVector::<f64>::zeros(n);
    let mut v = DVector::<f64>::zeros(n);
    r[si] = system_position;
    v[si] = system_velocity;
    for (j, &bi) in bath_idx.iter().enumerate() {
        r[bi] = realization.bath_positions[j];
        v[bi] = realization.bath_momenta[j] / sys.masses()[bi];
    }

    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut vs = Vec::with_capacity(n_steps + 1);
    let mut accels = Vec::with_capacity(n_steps + 1);
    let mut prop = Propagator::new(sys);
    let accel = |r: &DVector<f64>| -> f64 {
        let mut f = 0.0;
        for i in 0..n {
            f -= sys.stiffness()[(si, i)] * r[i];
        }
        f / m
    };
    xs.push(r[si]);
    vs.push(v[si]);
    accels.push(accel(&r));
    for _ in 0..n_steps {
        prop.step(&mut r, &mut v, dt);
        xs.push(r[si]);
        vs.push(v[si]);
        accels.push(accel(&r));
    }

    let kernel = memory_kernel(&bath, &realization.times)?;
    let x0 = xs[0];
    let mut res_sq = Kahan::default();
    let mut ref_sq = Kahan::default();
    for k in 0..=n_steps {
        // Trapezoid of mu(t_k - s) x'(s) over s in [0, t_k], with the
        // Gregory end correction (third order) once enough points exist.
        let mut conv = 0.0;
        if k > 0 {
            let g = |l: usize| kernel.values[k - l] * vs[l];
            let mut acc = Kahan::default();
            for l in 0..=k {
                let weight = if l == 0 || l == k { 0.5 } else { 1.0 };
                acc.add(weight * g(l));
            }
            if k >= 2 {
                acc.add(-((g(k) - g(k - 1)) - (g(1) - g(0))) / 12.0);
            }
            conv = dt * acc.value();
        }
        let residual =
            m * accels[k] + conv + bare * xs[k] - (realization.force[k] - kernel.values[k] * x0);
        res_sq.add(residual * residual);
        let reference = bare * xs[k];
        ref_sq.add(reference * reference);
    }
    let np = (n_steps + 1) as f64;
    let rms_residual = (res_sq.value() / np).sqrt();
    let rms_reference = (ref_sq.value() / np).sqrt();
    Ok(GleResidual {
        normalized_rms: rms_residual / rms_reference,
        rms_residual,
        rms_reference,
    })
}

/// Parameters of the two-body white-noise Langevin model
/// `m x_i'' + m gamma (x_1' + x_2') + m w^2 x_i - kappa x_other = F(t)`
/// with a common Gaussian white force of classical strength `2 m gamma T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhiteNoiseParams {
    pub mass: f64,
    pub omega: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub temperature: f64,
}

impl WhiteNoiseParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("omega", self.omega),
            ("gamma", self.gamma),
            ("temperature", self.temperature),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let k_bare = self.mass * self.omega * self.omega;
        if k_bare - self.kappa.abs() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "effective potential unbounded: |kappa| = {} >= m omega^2 = {k_bare}",
                self.kappa.abs()
            )));
        }
        Ok(())
    }

    /// Conservative stiffness matrix over (x1, x2).
    fn stiffness(&self) -> [[f64; 2]; 2] {
        let k = self.mass * self.omega * self.omega;
        [[k, -self.kappa], [-self.kappa, k]]
    }
}

/// Observable labels accepted by [`simulate_gle_white_noise`]:
/// `x1, x2, v1, v2`.
pub const WHITE_NOISE_LABELS: [&str; 4] = ["x1", "x2", "v1", "v2"];

/// Integrate the two-body white-noise Langevin model with a Strang splitting:
/// the damping+noise velocity sub-step (singular damping matrix
/// `gamma [[1,1],[1,1]]`, common noise) is solved exactly as a Gaussian
/// update of the summed velocity, then a position-Verlet step of the
/// conservative part. Initial conditions are Boltzmann at `T`; stationary
/// statistics start after a burn-in of `10 / gamma`.
pub fn simulate_gle_white_noise(
    params: &WhiteNoiseParams,
    cfg: &SimConfig,
    observables: &[(String, String)],
) -> Result<Vec<PairCorrelation>> {
    params.validate()?;
    let max_freq = ((params.mass * params.omega * params.omega + params.kappa.abs())
        / params.mass)
        .sqrt();
    cfg.validate(max_freq)?;
    let labels: Vec<String> = WHITE_NOISE_LABELS.iter().map(|s| s.to_string()).collect();
    let pair_idx = resolve_pairs(&labels, observables)?;

    let k = params.stiffness();
    let m = params.mass;
    let temp = cfg.temperature;
    let dt = cfg.dt;
    let n_steps = cfg.n_steps();
    let burn_steps = (10.0 / (params.gamma * dt)).ceil() as usize;
    let times = uniform_times(dt, n_steps);

    // Exact Ornstein-Uhlenbeck half-step for the summed velocity.
    let h = 0.5 * dt;
    let decay = (-2.0 * params.gamma * h).exp();
    let noise_sd = ((2.0 * temp / m) * (1.0 - decay * decay)).sqrt();

    // Boltzmann sampling of the conservative part in symmetric/antisymmetric
    // normal coordinates.
    let k_sym = (k[0][0] + k[0][1]) / m; // squared frequency of (x1+x2)/sqrt(2)
    let k_asym = (k[0][0] - k[0][1]) / m;

    let mut accs: Vec<PairAccumulator> = pair_idx
        .iter()
        .map(|_| PairAccumulator::new(n_steps + 1))
        .collect();

    for traj in 0..cfg.n_traj {
        let mut rng = trajectory_rng(cfg.seed, traj as u64);
        let draw = |sd: f64, rng: &mut ChaCha12Rng| sd * rng.sample::<f64, _>(StandardNormal);

        let amp_s = draw((temp / (m * k_sym)).sqrt(), &mut rng);
        let amp_a = draw((temp / (m * k_asym)).sqrt(), &mut rng);
        let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
        let mut x = [
            (amp_s + amp_a) * inv_sqrt2,
            (amp_s - amp_a) * inv_sqrt2,
        ];
        let v_sd = (temp / m).sqrt();
        let mut v = [draw(v_sd, &mut rng), draw(v_sd, &mut rng)];

        let force = |x: &[f64; 2]| {
            [
                -(k[0][0] * x[0] + k[0][1] * x[1]) / m,
                -(k[1][0] * x[0] + k[1][1] * x[1]) / m,
            ]
        };
        let ou_half = |v: &mut [f64; 2], rng: &mut ChaCha12Rng| {
            let u = decay * (v[0] + v[1]) + draw(noise_sd, rng);
            let w = v[0] - v[1];
            v[0] = 0.5 * (u + w);
            v[1] = 0.5 * (u - w);
        };
        let step = |x: &mut [f64; 2], v: &mut [f64; 2], rng: &mut ChaCha12Rng| {
            ou_half(v, rng);
            let f = force(x);
            v[0] += 0.5 * dt * f[0];
            v[1] += 0.5 * dt * f[1];
            x[0] += dt * v[0];
            x[1] += dt * v[1];
            let f = force(x);
            v[0] += 0.5 * dt * f[0];
            v[1] += 0.5 * dt * f[1];
            ou_half(v, rng);
        };

        for _ in 0..burn_steps {
            step(&mut x, &mut v, &mut rng);
        }

        let state = |x: &[f64; 2], v: &[f64; 2]| [x[0], x[1], v[0], v[1]];
        let s0 = state(&x, &v);
        for (acc, &(a, b)) in accs.iter_mut().zip(&pair_idx) {
            acc.record(0, s0[a], s0[b], s0[b]);
        }
        for kstep in 1..=n_steps {
            step(&mut x, &mut v, &mut rng);
            let s = state(&x, &v);
            for (acc, &(a, b)) in accs.iter_mut().zip(&pair_idx) {
                acc.record(kstep, s[a], s[b], s0[b]);
            }
        }
    }

    Ok(accs
        .into_iter()
        .zip(observables)
        .map(|(acc, (i, j))| acc.finish(&times, cfg.n_traj, i, j))
        .collect())
}

/// Deterministically integrate one trajectory and return the relative energy
/// drift `|E(t_max) - E(0)| / |E(0)|`. Test support for the conservation
/// contract.
pub fn energy_drift(
    sys: &QuadraticSystem,
    r0: &[f64],
    v0: &[f64],
    dt: f64,
    t_max: f64,
) -> Result<f64> {
    let modes = decompose(sys)?;
    let cfg = SimConfig {
        dt,
        t_max,
        n_traj: 1,
        seed: 0,
        sampling: Sampling::Wigner,
        temperature: 0.0,
    };
    cfg.validate(modes.max_frequency())?;
    let n = sys.dim();
    let mut r = DVector::from_column_slice(r0);
    let mut v = DVector::from_column_slice(v0);
    let p0: Vec<f64> = v0
        .iter()
        .zip(sys.masses())
        .map(|(&vi, &mi)| vi * mi)
        .collect();
    let e0 = sys.energy(r0, &p0);
    let mut prop = Propagator::new(sys);
    for _ in 0..cfg.n_steps() {
        prop.step(&mut r, &mut v, dt);
    }
    let rs: Vec<f64> = r.iter().cloned().collect();
    let ps: Vec<f64> = (0..n).map(|i| v[i] * sys.masses()[i]).collect();
    let e1 = sys.energy(&rs, &ps);
    Ok((e1 - e0).abs() / e0.abs())
}
