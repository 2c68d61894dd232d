//! Exact normal-mode analysis of bounded quadratic systems: mode
//! frequencies, equilibrium quantum/classical covariances at temperature T,
//! time-correlation functions, and the converged zero-temperature
//! bath-induced cross-correlation of the two-oscillator common-bath model.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // redundant when inherent f64 methods are available (std builds)
use num_traits::Float;

use crate::bath::{discretize_ohmic, kernel_total, SpectralModel};
use crate::error::{Error, Result};
use crate::quad_model::{build_two_body_common, QuadraticSystem, BOUNDED_TOL};

/// Relative threshold below which a squared mode frequency counts as a zero
/// mode, and below whose negative the system counts as indefinite.
const MODE_TOL: f64 = 1e-9;

/// Generalized eigensolution of `(K, M)`: ascending frequencies and mode
/// vectors `v_k` (columns of `mode_matrix`) normalized in the mass-weighted
/// metric, `v_k^T M v_l = delta_kl`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub frequencies: Vec<f64>,
    pub squared_frequencies: Vec<f64>,
    pub mode_matrix: DMatrix<f64>,
    pub indefinite: bool,
}

impl ModeDecomposition {
    pub fn max_frequency(&self) -> f64 {
        self.frequencies.iter().fold(0.0_f64, |a, &x| a.max(x))
    }
}

/// Which statistics a covariance matrix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    Quantum,
    Classical,
}

/// Equilibrium second moments: position block `<r_i r_j>` and momentum block
/// `<p_i p_j>` (cross moments vanish in equilibrium).
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub labels: Vec<String>,
    pub positions: DMatrix<f64>,
    pub momenta: DMatrix<f64>,
    pub temperature: f64,
    pub kind: CovarianceKind,
}

impl CovarianceMatrix {
    pub fn position(&self, i: &str, j: &str) -> Option<f64> {
        let a = self.labels.iter().position(|l| l == i)?;
        let b = self.labels.iter().position(|l| l == j)?;
        Some(self.positions[(a, b)])
    }
}

/// Mass-weighted symmetric eigensolution of the system. Negative squared
/// frequencies are flagged (`indefinite`), not rejected.
pub fn decompose(sys: &QuadraticSystem) -> Result<ModeDecomposition> {
    if !sys.all_masses_positive() {
        return Err(Error::InvalidParameter(
            "normal-mode analysis needs positive masses on every coordinate".to_string(),
        ));
    }
    let n = sys.dim();
    let inv_sqrt_m: Vec<f64> = sys.masses().iter().map(|&m| 1.0 / m.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = inv_sqrt_m[i] * sys.stiffness()[(i, j)] * inv_sqrt_m[j];
        }
    }
    let a = (&a + a.transpose()) * 0.5;
    let eig = a.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("eigenvalues are finite")
    });

    let scale = sys.stiffness_scale().max(1.0);
    let mut squared = Vec::with_capacity(n);
    let mut freqs = Vec::with_capacity(n);
    let mut modes = DMatrix::<f64>::zeros(n, n);
    let mut indefinite = false;
    for (col, &k) in order.iter().enumerate() {
        let lam = eig.eigenvalues[k];
        squared.push(lam);
        freqs.push(lam.max(0.0).sqrt());
        if lam < -MODE_TOL * scale {
            indefinite = true;
        }
        for i in 0..n {
            modes[(i, col)] = inv_sqrt_m[i] * eig.eigenvectors[(i, k)];
        }
    }
    Ok(ModeDecomposition {
        frequencies: freqs,
        squared_frequencies: squared,
        mode_matrix: modes,
        indefinite,
    })
}

/// coth(w / 2T), evaluated as exactly 1 at T = 0.
fn thermal_factor(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        1.0 / (omega / (2.0 * temperature)).tanh()
    }
}

pub(crate) fn require_equilibrium(sys: &QuadraticSystem, modes: &ModeDecomposition) -> Result<()> {
    let scale = sys.stiffness_scale().max(1.0);
    if modes.indefinite {
        return Err(Error::NoEquilibrium(format!(
            "potential is indefinite (min squared frequency {})",
            modes.squared_frequencies[0]
        )));
    }
    if let Some(k) = modes
        .squared_frequencies
        .iter()
        .position(|&l| l.abs() <= MODE_TOL * scale)
    {
        let dir: Vec<f64> = modes.mode_matrix.column(k).iter().cloned().collect();
        return Err(Error::NoEquilibrium(format!(
            "zero mode along direction {dir:?}"
        )));
    }
    Ok(())
}

/// Equilibrium quantum covariance at temperature `T >= 0`:
/// `<r r^T> = sum_k coth(w_k/2T)/(2 w_k) v_k v_k^T` and
/// `<p p^T> = sum_k w_k coth(w_k/2T)/2 (M v_k)(M v_k)^T`.
pub fn quantum_covariance(sys: &QuadraticSystem, temperature: f64) -> Result<CovarianceMatrix> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be nonnegative, got {temperature}"
        )));
    }
    let modes = decompose(sys)?;
    require_equilibrium(sys, &modes)?;
    let n = sys.dim();
    let mut pos = DMatrix::<f64>::zeros(n, n);
    let mut mom = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let w = modes.frequencies[k];
        let coth = thermal_factor(w, temperature);
        let wq = coth / (2.0 * w);
        let wp = w * coth / 2.0;
        let v = modes.mode_matrix.column(k);
        for i in 0..n {
            let mvi = sys.masses()[i] * v[i];
            for j in 0..n {
                pos[(i, j)] += wq * v[i] * v[j];
                mom[(i, j)] += wp * mvi * sys.masses()[j] * v[j];
            }
        }
    }
    Ok(CovarianceMatrix {
        labels: sys.labels().to_vec(),
        positions: pos,
        momenta: mom,
        temperature,
        kind: CovarianceKind::Quantum,
    })
}

/// Classical equilibrium covariance: `<r r^T> = T K^{-1}`, `<p p^T> = T M`.
pub fn classical_covariance(sys: &QuadraticSystem, temperature: f64) -> Result<CovarianceMatrix> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "classical covariance needs positive temperature, got {temperature}"
        )));
    }
    if !sys.all_masses_positive() {
        return Err(Error::InvalidParameter(
            "classical covariance needs positive masses".to_string(),
        ));
    }
    let n = sys.dim();
    let k = (sys.stiffness() + sys.stiffness().transpose()) * 0.5;
    let chol = k.cholesky().ok_or_else(|| {
        Error::NoEquilibrium("stiffness matrix is not positive definite".to_string())
    })?;
    let pos = chol.inverse() * temperature;
    let mut mom = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        mom[(i, i)] = temperature * sys.masses()[i];
    }
    Ok(CovarianceMatrix {
        labels: sys.labels().to_vec(),
        positions: pos,
        momenta: mom,
        temperature,
        kind: CovarianceKind::Classical,
    })
}

/// Symmetrized equilibrium correlation
/// `C_ij(t) = sum_k coth(w_k/2T)/(2 w_k) cos(w_k t) v_ki v_kj`.
/// At `t = 0` this is the covariance entry.
pub fn correlation_series(
    sys: &QuadraticSystem,
    temperature: f64,
    i: &str,
    j: &str,
    times: &[f64],
) -> Result<Vec<f64>> {
    let ii = sys
        .index_of(i)
        .ok_or_else(|| Error::Usage(format!("unknown coordinate label {i:?}")))?;
    let jj = sys
        .index_of(j)
        .ok_or_else(|| Error::Usage(format!("unknown coordinate label {j:?}")))?;
    let modes = decompose(sys)?;
    require_equilibrium(sys, &modes)?;
    let n = sys.dim();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut c = 0.0;
        for k in 0..n {
            let w = modes.frequencies[k];
            let wq = thermal_factor(w, temperature) / (2.0 * w);
            c += wq * (w * t).cos() * modes.mode_matrix[(ii, k)] * modes.mode_matrix[(jj, k)];
        }
        out.push(c);
    }
    Ok(out)
}

/// Result of the converged bath-induced cross-correlation calculation.
#[derive(Debug, Clone, PartialEq)]
pub struct CasimirEstimate {
    /// Converged `<x1 x2>` at the requested temperature.
    pub value: f64,
    /// The `(n_modes, value)` sequence visited by the doubling protocol.
    pub sequence: Vec<(usize, f64)>,
    /// Whether the 0.1% drift target was reached before the mode-count cap.
    pub converged: bool,
}

const CASIMIR_N_START: usize = 64;
const CASIMIR_N_CAP: usize = 4096;
const CASIMIR_RELDIFF: f64 = 1e-3;

/// Equilibrium `<x1 x2>` of the common-bath model with an Ohmic-discretized
/// bath, re-run at doubling mode counts (64 up to 4096) until successive
/// values drift by less than 0.1% relative.
pub fn casimir_cross_correlation(
    m: f64,
    omega: f64,
    model: &SpectralModel,
    temperature: f64,
) -> Result<CasimirEstimate> {
    let total = kernel_total(&discretize_ohmic(&model.with_n_modes(CASIMIR_N_START)));
    if m * omega * omega - total <= BOUNDED_TOL * (m * omega * omega).max(total) {
        return Err(Error::NoEquilibrium(format!(
            "unbounded regime: total coupling stiffness {total} >= m omega^2 = {}; \
             reduce gamma or the cutoff",
            m * omega * omega
        )));
    }
    let mut sequence = Vec::new();
    let mut prev: Option<f64> = None;
    let mut n = CASIMIR_N_START;
    loop {
        let bath = discretize_ohmic(&model.with_n_modes(n));
        let sys = build_two_body_common(m, omega, &bath)?;
        let cov = quantum_covariance(&sys, temperature)?;
        let value = cov.positions[(0, 1)];
        sequence.push((n, value));
        if let Some(p) = prev {
            let denom = value.abs().max(1e-300);
            if (value - p).abs() / denom < CASIMIR_RELDIFF {
                return Ok(CasimirEstimate {
                    value,
                    sequence,
                    converged: true,
                });
            }
        }
        prev = Some(value);
        if n >= CASIMIR_N_CAP {
            return Ok(CasimirEstimate {
                value: prev.unwrap(),
                sequence,
                converged: false,
            });
        }
        n *= 2;
    }
}

/// Sample a phase-space point from the equilibrium Gaussian of the given
/// mode decomposition: independent mode amplitudes with the quantum
/// (`coth`) or classical (`T / w^2`) weights. Used by the trajectory
/// ensembles; exposed for tests.
pub fn sample_equilibrium_point(
    sys: &QuadraticSystem,
    modes: &ModeDecomposition,
    temperature: f64,
    kind: CovarianceKind,
    normals: &mut dyn FnMut() -> f64,
) -> (DVector<f64>, DVector<f64>) {
    let n = sys.dim();
    let mut r = DVector::<f64>::zeros(n);
    let mut p = DVector::<f64>::zeros(n);
    for k in 0..n {
        let w = modes.frequencies[k];
        let (var_q, var_p) = match kind {
            CovarianceKind::Quantum => {
                let coth = thermal_factor(w, temperature);
                (coth / (2.0 * w), w * coth / 2.0)
            }
            CovarianceKind::Classical => (temperature / (w * w), temperature),
        };
        let a = var_q.sqrt() * normals();
        let b = var_p.sqrt() * normals();
        for i in 0..n {
            r[i] += a * modes.mode_matrix[(i, k)];
            p[i] += b * sys.masses()[i] * modes.mode_matrix[(i, k)];
        }
    }
    (r, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad_model::{build_one_body_io, build_two_body_bilinear, BathSpec};
    use approx::assert_abs_diff_eq;

    fn bath1(m: f64, w: f64) -> BathSpec {
        BathSpec::from_pairs(&[(m, w)]).unwrap()
    }

    #[test]
    fn bare_oscillator_frequency() {
        let sys = build_one_body_io(1.0, 2.0, &BathSpec::empty()).unwrap();
        let md = decompose(&sys).unwrap();
        assert_abs_diff_eq!(md.frequencies[0], 2.0, epsilon = 1e-12);
        assert!(!md.indefinite);
    }

    #[test]
    fn common_bath_squared_frequencies() {
        let sys = build_two_body_common(1.0, 1.0, &bath1(1.0, 0.5)).unwrap();
        let md = decompose(&sys).unwrap();
        let mut sq = md.squared_frequencies.clone();
        sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(sq[0], 0.1376275643042054, epsilon = 1e-10);
        assert_abs_diff_eq!(sq[1], 1.25, epsilon = 1e-10);
        assert_abs_diff_eq!(sq[2], 1.3623724356957947, epsilon = 1e-10);
    }

    #[test]
    fn bilinear_system_is_indefinite() {
        let sys = build_two_body_bilinear(1.0, 1.0, &bath1(1.0, 1.0)).unwrap();
        let md = decompose(&sys).unwrap();
        assert!(md.indefinite);
        assert!(quantum_covariance(&sys, 0.0).is_err());
    }

    #[test]
    fn ground_state_width() {
        let sys = build_one_body_io(1.0, 2.0, &BathSpec::empty()).unwrap();
        let cov = quantum_covariance(&sys, 0.0).unwrap();
        assert_abs_diff_eq!(cov.positions[(0, 0)], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(cov.momenta[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_temperature_cross_correlation_oracle() {
        let sys = build_two_body_common(1.0, 1.0, &bath1(1.0, 0.5)).unwrap();
        let cov = quantum_covariance(&sys, 0.0).unwrap();
        assert_abs_diff_eq!(cov.positions[(0, 1)], 0.0327580358034964, epsilon = 1e-10);
        assert_abs_diff_eq!(cov.positions[(0, 0)], 0.479971631303454, epsilon = 1e-10);
    }

    #[test]
    fn decoupled_oscillators_uncorrelated() {
        let sys = build_two_body_common(1.0, 1.0, &BathSpec::empty()).unwrap();
        for temp in [0.0, 1.7] {
            let cov = quantum_covariance(&sys, temp).unwrap();
            assert_abs_diff_eq!(cov.positions[(0, 1)], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_mode_rejected() {
        let sys = build_one_body_io(1.0, 0.0, &bath1(1.0, 1.0)).unwrap();
        assert!(matches!(
            quantum_covariance(&sys, 0.0),
            Err(Error::NoEquilibrium(_))
        ));
    }

    #[test]
    fn classical_equipartition_and_inverse() {
        let sys = build_one_body_io(1.0, 2.0, &BathSpec::empty()).unwrap();
        let cov = classical_covariance(&sys, 1.0).unwrap();
        assert_abs_diff_eq!(cov.positions[(0, 0)], 0.25, epsilon = 1e-12);

        let sys = build_two_body_common(1.0, 1.0, &bath1(1.0, 0.5)).unwrap();
        let cov = classical_covariance(&sys, 1.0).unwrap();
        let prod = sys.stiffness() * &cov.positions;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[(i, j)], expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn classical_limit_of_quantum() {
        let sys = build_two_body_common(1.0, 1.0, &bath1(1.0, 0.5)).unwrap();
        let temp = 200.0;
        let q = quantum_covariance(&sys, temp).unwrap();
        let c = classical_covariance(&sys, temp).unwrap();
        for i in 0..3 {
            let ratio = q.positions[(i, i)] / c.positions[(i, i)];
            assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");
        }
    }

    #[test]
    fn correlation_series_matches_covariance_at_zero() {
        let sys = build_two_body_common(1.0, 1.0, &bath1(1.0, 0.5)).unwrap();
        let cov = quantum_covariance(&sys, 0.3).unwrap();
        let c = correlation_series(&sys, 0.3, "x1", "x2", &[0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(c[0], cov.positions[(0, 1)], epsilon = 1e-12);
    }

    #[test]
    fn single_mode_correlation_closed_form() {
        let sys = build_one_body_io(1.0, 2.0, &BathSpec::empty()).unwrap();
        let times: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
        let c = correlation_series(&sys, 0.0, "x", "x", &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            assert_abs_diff_eq!(c[k], (2.0 * t).cos() / 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn casimir_explicit_identity() {
        // <x1 x2> = <X^2> - 1/4 <x^2> under the coordinate change.
        let sys = build_two_body_common(1.0, 1.0, &bath1(1.0, 0.5)).unwrap();
        let cov = quantum_covariance(&sys, 0.0).unwrap();
        let tr = crate::quad_model::to_cm_rel(&sys).unwrap();
        let cov_tr = quantum_covariance(&tr, 0.0).unwrap();
        let lhs = cov.positions[(0, 1)];
        let rhs = cov_tr.positions[(0, 0)] - 0.25 * cov_tr.positions[(1, 1)];
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
    }

    #[test]
    fn casimir_converges_and_decouples() {
        let model = SpectralModel::ohmic(0.1, 10.0, 1.0, 64).unwrap();
        let est = casimir_cross_correlation(1.0, 1.0, &model, 0.0).unwrap();
        assert!(est.converged);
        assert_abs_diff_eq!(est.value, 0.1826, epsilon = 5e-4);
        // gamma -> 0 decouples the oscillators.
        let weak = SpectralModel::ohmic(1e-8, 10.0, 1.0, 64).unwrap();
        let est = casimir_cross_correlation(1.0, 1.0, &weak, 0.0).unwrap();
        assert!(est.value.abs() < 1e-6);
    }

    #[test]
    fn casimir_unbounded_regime_reports_boundary() {
        let model = SpectralModel::ohmic(0.2, 10.0, 1.0, 64).unwrap();
        match casimir_cross_correlation(1.0, 1.0, &model, 0.0) {
            Err(Error::NoEquilibrium(msg)) => assert!(msg.contains("unbounded")),
            other => panic!("expected no-equilibrium error, got {other:?}"),
        }
    }
}
