//! Spectral-density recipes, finite-bath discretization, and the memory
//! kernel `mu(t) = sum_j m_j w_j^2 cos(w_j t)` of the generalized Langevin
//! equation. `mu` vanishes for negative times by convention; the sampler
//! refuses negative grids instead of silently returning zero.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // redundant when inherent f64 methods are available (std builds)
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad_model::{BathMode, BathSpec};

/// Spectral-density family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    /// Flat (Ohmic) density with a sharp frequency cutoff.
    OhmicSharpCutoff,
}

/// Frequency-sampling scheme for the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    /// Midpoints of a uniform grid on `[0, cutoff]`.
    LinearMidpoint,
}

/// Recipe producing a finite [`BathSpec`] whose kernel approximates Ohmic
/// friction `mu(t) -> 2 m gamma delta(t)`: friction rate `gamma`, sharp
/// cutoff `cutoff`, particle mass, and mode count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    pub kind: SpectralKind,
    pub gamma: f64,
    pub cutoff: f64,
    pub particle_mass: f64,
    pub n_modes: usize,
    pub scheme: SamplingScheme,
}

impl SpectralModel {
    pub fn ohmic(gamma: f64, cutoff: f64, particle_mass: f64, n_modes: usize) -> Result<Self> {
        for (name, v) in [
            ("gamma", gamma),
            ("cutoff", cutoff),
            ("particle_mass", particle_mass),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if n_modes == 0 {
            return Err(Error::InvalidParameter(
                "n_modes must be at least 1".into(),
            ));
        }
        Ok(Self {
            kind: SpectralKind::OhmicSharpCutoff,
            gamma,
            cutoff,
            particle_mass,
            n_modes,
            scheme: SamplingScheme::LinearMidpoint,
        })
    }

    pub fn with_n_modes(&self, n_modes: usize) -> Self {
        Self { n_modes, ..*self }
    }
}

/// Sampled memory kernel on a time grid, with `mu_zero = sum_j m_j w_j^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub mu_zero: f64,
}

/// Total coupling stiffness `mu(0) = sum_j m_j w_j^2`; the combination
/// appearing in every counterterm.
pub fn kernel_total(bath: &BathSpec) -> f64 {
    bath.modes().iter().map(|m| m.coupling()).sum()
}

/// Sample `mu(t) = sum_j m_j w_j^2 cos(w_j t)` on a nonnegative, strictly
/// increasing grid.
pub fn memory_kernel(bath: &BathSpec, times: &[f64]) -> Result<KernelSeries> {
    for (k, &t) in times.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "time grid entry {k} is {t}; the kernel is defined for t >= 0 only"
            )));
        }
        if k > 0 && t <= times[k - 1] {
            return Err(Error::InvalidParameter(format!(
                "time grid must be strictly increasing, entry {k} = {t}"
            )));
        }
    }
    let values = times
        .iter()
        .map(|&t| {
            bath.modes()
                .iter()
                .map(|m| m.coupling() * (m.frequency() * t).cos())
                .sum()
        })
        .collect();
    Ok(KernelSeries {
        times: times.to_vec(),
        values,
        mu_zero: kernel_total(bath),
    })
}

/// Discretize the Ohmic model into `N` modes at the midpoint frequencies
/// `w_j = (j - 1/2) cutoff / N`, each carrying equal coupling stiffness
/// `m_j w_j^2 = (2 m gamma / pi) (cutoff / N)`.
///
/// The discrete kernel converges to `(2 m gamma / pi) sin(cutoff t) / t`
/// as `N` grows, and its total is exactly `2 m gamma cutoff / pi`.
pub fn discretize_ohmic(model: &SpectralModel) -> BathSpec {
    let n = model.n_modes;
    let dw = model.cutoff / n as f64;
    let coupling = 2.0 * model.particle_mass * model.gamma / core::f64::consts::PI * dw;
    let modes = (0..n)
        .map(|j| {
            let w = (j as f64 + 0.5) * dw;
            // Solve the mass from the fixed per-mode coupling stiffness.
            BathMode::new(coupling / (w * w), w).expect("midpoint frequencies are positive")
        })
        .collect();
    BathSpec::new(modes)
}

/// Continuum kernel targeted by the sharp-cutoff Ohmic discretization.
pub fn ohmic_continuum_kernel(model: &SpectralModel, t: f64) -> f64 {
    let a = 2.0 * model.particle_mass * model.gamma / core::f64::consts::PI;
    if t == 0.0 {
        a * model.cutoff
    } else {
        a * (model.cutoff * t).sin() / t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_values_single_mode() {
        let bath = BathSpec::from_pairs(&[(2.0, 3.0)]).unwrap();
        let ks = memory_kernel(&bath, &[0.0, core::f64::consts::PI / 3.0]).unwrap();
        assert_abs_diff_eq!(ks.values[0], 18.0);
        assert_abs_diff_eq!(ks.values[1], -18.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ks.mu_zero, 18.0);
    }

    #[test]
    fn kernel_empty_bath_is_zero() {
        let ks = memory_kernel(&BathSpec::empty(), &[0.0, 1.0, 2.5]).unwrap();
        assert!(ks.values.iter().all(|&v| v == 0.0));
        assert_eq!(ks.mu_zero, 0.0);
    }

    #[test]
    fn kernel_refuses_negative_and_nonincreasing_times() {
        let bath = BathSpec::from_pairs(&[(1.0, 1.0)]).unwrap();
        assert!(memory_kernel(&bath, &[-0.1, 0.0]).is_err());
        assert!(memory_kernel(&bath, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn kernel_total_matches_examples() {
        assert_abs_diff_eq!(
            kernel_total(&BathSpec::from_pairs(&[(2.0, 3.0)]).unwrap()),
            18.0
        );
        assert_eq!(kernel_total(&BathSpec::empty()), 0.0);
    }

    #[test]
    fn ohmic_midpoint_discretization() {
        let model = SpectralModel::ohmic(1.0, core::f64::consts::PI, 1.0, 8).unwrap();
        let bath = discretize_ohmic(&model);
        assert_eq!(bath.len(), 8);
        for mode in bath.modes() {
            assert_abs_diff_eq!(mode.coupling(), 0.25, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(
            bath.modes()[0].frequency(),
            core::f64::consts::PI / 16.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(kernel_total(&bath), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ohmic_total_closed_form() {
        let model = SpectralModel::ohmic(0.7, 13.0, 2.5, 301).unwrap();
        let expected = 2.0 * 2.5 * 0.7 * 13.0 / core::f64::consts::PI;
        let total = kernel_total(&discretize_ohmic(&model));
        assert_abs_diff_eq!(total, expected, epsilon = 1e-12 * expected);
    }

    #[test]
    fn invalid_model_parameters() {
        assert!(SpectralModel::ohmic(0.0, 1.0, 1.0, 4).is_err());
        assert!(SpectralModel::ohmic(1.0, 1.0, 1.0, 0).is_err());
    }
}
