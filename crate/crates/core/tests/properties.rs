//! Property-based invariants across the model-building, bath, and spectrum
//! layers: randomized instances exercise the structural identities that the
//! unit tests only spot-check.

use nalgebra::DVector;
use proptest::prelude::*;

use oscbath::bath::{
    discretize_ohmic, kernel_total, memory_kernel, ohmic_continuum_kernel, SpectralModel,
};
use oscbath::quad_model::{
    build_one_body_io, build_two_body_bilinear, build_two_body_common, io_bath_modes, is_io_form,
    min_potential_eigenvalue, rescale_bath_cm, split_cm_rel, to_cm_rel, BathSpec,
};
use oscbath::spectrum::{classical_covariance, decompose, quantum_covariance};

fn mode_pair() -> impl Strategy<Value = (f64, f64)> {
    ((0.1f64..10.0), (0.1f64..10.0))
}

fn instance() -> impl Strategy<Value = (f64, f64, Vec<(f64, f64)>)> {
    (
        0.1f64..10.0,
        0.1f64..10.0,
        proptest::collection::vec(mode_pair(), 0..=6),
    )
}

/// Embed the stiffness of a split part back onto the transformed coordinate
/// set `(X, x, q_1..q_N)` and return the largest entrywise deviation of the
/// reassembled sum from the original.
fn split_reassembly_deviation(
    full: &oscbath::QuadraticSystem,
    h_cm: &oscbath::QuadraticSystem,
    h_rel: &oscbath::QuadraticSystem,
) -> f64 {
    let n = full.dim();
    let embed_cm = |i: usize| if i == 0 { 0 } else { i + 1 };
    let embed_rel = |i: usize| i + 1;
    let mut sum = vec![vec![0.0f64; n]; n];
    let kc = h_cm.stiffness();
    let kr = h_rel.stiffness();
    for i in 0..h_cm.dim() {
        for j in 0..h_cm.dim() {
            sum[embed_cm(i)][embed_cm(j)] += kc[(i, j)];
        }
    }
    for i in 0..h_rel.dim() {
        for j in 0..h_rel.dim() {
            sum[embed_rel(i)][embed_rel(j)] += kr[(i, j)];
        }
    }
    let k = full.stiffness();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((sum[i][j] - k[(i, j)]).abs());
        }
    }
    dev
}

proptest! {
    /// The CM/relative change of variables is a congruence: potential energy
    /// is invariant point by point.
    #[test]
    fn transform_preserves_potential((m, omega, pairs) in instance(),
                                     point in proptest::collection::vec(-2.0f64..2.0, 2..=8)) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let sys = build_two_body_common(m, omega, &bath).unwrap();
        let transformed = to_cm_rel(&sys).unwrap();
        let n = sys.dim();
        let mut r = vec![0.0; n];
        for (i, slot) in r.iter_mut().enumerate() {
            *slot = point[i % point.len()];
        }
        // r is (x1, x2, q..); the transformed coordinates are (X, x, q..).
        let mut rt = r.clone();
        rt[0] = 0.5 * (r[0] + r[1]);
        rt[1] = r[0] - r[1];
        let a = sys.potential(&r);
        let b = transformed.potential(&rt);
        let scale = sys.stiffness_scale().max(1.0);
        prop_assert!((a - b).abs() <= 1e-10 * scale * (1.0 + a.abs()),
                     "potential changed: {a} vs {b}");
    }

    /// The two split parts reassemble the transformed stiffness entrywise.
    #[test]
    fn split_reassembles_exactly((m, omega, pairs) in instance()) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let sys = build_two_body_common(m, omega, &bath).unwrap();
        let transformed = to_cm_rel(&sys).unwrap();
        let (h_cm, h_rel) = split_cm_rel(&transformed).unwrap();
        let dev = split_reassembly_deviation(&transformed, &h_cm, &h_rel);
        prop_assert!(dev <= 1e-12 * sys.stiffness_scale().max(1.0), "deviation {dev}");
    }

    /// Counterterm model boundedness boundary: the minimum stiffness
    /// eigenvalue changes sign exactly where the bare stiffness minus the
    /// total coupling does.
    #[test]
    fn boundedness_matches_closed_form((m, omega, pairs) in instance()) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let sys = build_two_body_common(m, omega, &bath).unwrap();
        let min_eig = min_potential_eigenvalue(&sys);
        let margin = m * omega * omega - kernel_total(&bath);
        let tol = 1e-9 * sys.stiffness_scale().max(1.0);
        if margin > tol {
            prop_assert!(min_eig > -tol, "margin {margin} but min eig {min_eig}");
        } else if margin < -tol {
            prop_assert!(min_eig < tol, "margin {margin} but min eig {min_eig}");
        }
    }

    /// Dropping the counterterm can only lower the spectrum.
    #[test]
    fn bilinear_never_above_counterterm((m, omega, pairs) in instance()) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let common = build_two_body_common(m, omega, &bath).unwrap();
        let bilinear = build_two_body_bilinear(m, omega, &bath).unwrap();
        let a = min_potential_eigenvalue(&bilinear);
        let b = min_potential_eigenvalue(&common);
        prop_assert!(a <= b + 1e-9 * common.stiffness_scale().max(1.0),
                     "bilinear {a} above counterterm {b}");
    }

    /// Structural round trip: the one-body builder is recognized as IO form
    /// and its bath modes are recovered exactly.
    #[test]
    fn io_form_round_trip((m, omega, pairs) in instance()) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let sys = build_one_body_io(m, omega, &bath).unwrap();
        let report = is_io_form(&sys).unwrap();
        prop_assert!(report.is_io_form, "violations: {:?}", report.violations);
        let recovered = io_bath_modes(&sys).unwrap();
        prop_assert_eq!(recovered.len(), bath.len());
        for (a, b) in recovered.modes().iter().zip(bath.modes()) {
            prop_assert!((a.mass() - b.mass()).abs() <= 1e-12 * b.mass());
            prop_assert!((a.frequency() - b.frequency()).abs() <= 1e-9 * b.frequency());
        }
    }

    /// Split verdicts hold on every instance with a nonempty bath: the
    /// rescaled center-of-mass part is IO form, the relative part is not.
    #[test]
    fn split_io_verdicts((m, omega) in (0.1f64..10.0, 0.1f64..10.0),
                         pairs in proptest::collection::vec(mode_pair(), 1..=6)) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let sys = build_two_body_common(m, omega, &bath).unwrap();
        let (h_cm, h_rel) = split_cm_rel(&to_cm_rel(&sys).unwrap()).unwrap();
        let cm = is_io_form(&rescale_bath_cm(&h_cm).unwrap()).unwrap();
        prop_assert!(cm.is_io_form, "violations: {:?}", cm.violations);
        let rel = is_io_form(&h_rel).unwrap();
        prop_assert!(!rel.is_io_form);
        for needed in ["negative bath diagonal block", "counterterm without linear coupling"] {
            prop_assert!(rel.violations.iter().any(|v| v == needed), "missing {needed:?}");
        }
    }

    /// The memory kernel is a positive-coefficient cosine sum, so it peaks
    /// at t = 0.
    #[test]
    fn kernel_bounded_by_initial_value(pairs in proptest::collection::vec(mode_pair(), 1..=6),
                                       ts in proptest::collection::vec(0.0f64..50.0, 1..=20)) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let mut times = ts;
        times.sort_by(f64::total_cmp);
        times.insert(0, 0.0);
        times.dedup();
        let series = memory_kernel(&bath, &times).unwrap();
        for v in &series.values {
            prop_assert!(v.abs() <= series.mu_zero * (1.0 + 1e-12));
        }
    }

    /// Classical covariance solves the equipartition linear system
    /// `K S = T I` for bounded instances.
    #[test]
    fn classical_covariance_solves_stiffness((m, omega) in (1.0f64..5.0, 1.0f64..3.0),
                                             pairs in proptest::collection::vec(
                                                 ((0.1f64..2.0), (0.05f64..0.3)), 0..=4),
                                             temperature in 0.1f64..5.0) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let sys = build_two_body_common(m, omega, &bath).unwrap();
        let cov = classical_covariance(&sys, temperature).unwrap();
        let product = sys.stiffness() * &cov.positions;
        let n = sys.dim();
        let scale = sys.stiffness_scale().max(1.0) * temperature;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { temperature } else { 0.0 };
                prop_assert!((product[(i, j)] - expect).abs() <= 1e-8 * scale,
                             "K S mismatch at ({i},{j}): {}", product[(i, j)]);
            }
        }
    }

    /// Quantum ground-state covariance is positive definite on its diagonal
    /// blocks and dominated by Cauchy-Schwarz off the diagonal.
    #[test]
    fn ground_state_covariance_is_positive((m, omega) in (1.0f64..5.0, 1.0f64..3.0),
                                           pairs in proptest::collection::vec(
                                               ((0.1f64..2.0), (0.05f64..0.3)), 0..=4)) {
        let bath = BathSpec::from_pairs(&pairs).unwrap();
        let sys = build_two_body_common(m, omega, &bath).unwrap();
        let cov = quantum_covariance(&sys, 0.0).unwrap();
        let n = sys.dim();
        for i in 0..n {
            prop_assert!(cov.positions[(i, i)] > 0.0);
            prop_assert!(cov.momenta[(i, i)] > 0.0);
            for j in 0..n {
                let bound = (cov.positions[(i, i)] * cov.positions[(j, j)]).sqrt();
                prop_assert!(cov.positions[(i, j)].abs() <= bound * (1.0 + 1e-12));
            }
        }
    }
}

/// Cross-correlation decomposes over the coordinate change:
/// `<x1 x2> = <X^2> - <x^2>/4`, with `<x^2>` equal to the bare-mode value at
/// the shifted relative frequency because the relative coordinate decouples.
#[test]
fn cross_correlation_decomposes_over_transform() {
    let bath = BathSpec::from_pairs(&[(1.0, 0.5), (2.0, 0.25)]).unwrap();
    let sys = build_two_body_common(1.0, 1.0, &bath).unwrap();
    let transformed = to_cm_rel(&sys).unwrap();

    let full = quantum_covariance(&sys, 0.0).unwrap();
    let x1x2 = full.position("x1", "x2").unwrap();

    let cov_t = quantum_covariance(&transformed, 0.0).unwrap();
    let xx_cm = cov_t.positions[(0, 0)];
    let xx_rel = cov_t.positions[(1, 1)];
    assert!(
        (x1x2 - (xx_cm - 0.25 * xx_rel)).abs() <= 1e-10,
        "direct {x1x2} vs transformed {}",
        xx_cm - 0.25 * xx_rel
    );

    let m_x = transformed.masses()[1];
    let w_rel = (transformed.stiffness()[(1, 1)] / m_x).sqrt();
    let bare = 1.0 / (2.0 * m_x * w_rel);
    assert!(
        (xx_rel - bare).abs() <= 1e-10,
        "relative variance {xx_rel} vs bare-mode {bare}"
    );
}

/// Refining the Ohmic discretization shrinks the sup-norm distance to the
/// continuum kernel on the pre-cutoff window.
#[test]
fn ohmic_discretization_refines() {
    let model = SpectralModel::ohmic(0.5, 10.0, 1.0, 64).unwrap();
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * (1.0 / 200.0)).collect();
    let sup_err = |n: usize| {
        let bath = discretize_ohmic(&model.with_n_modes(n));
        let series = memory_kernel(&bath, &times).unwrap();
        series
            .times
            .iter()
            .zip(&series.values)
            .map(|(&t, &v)| (v - ohmic_continuum_kernel(&model, t)).abs())
            .fold(0.0f64, f64::max)
    };
    let coarse = sup_err(64);
    let fine = sup_err(256);
    let finest = sup_err(1024);
    assert!(fine < coarse, "no improvement: {coarse} -> {fine}");
    assert!(finest < fine, "no improvement: {fine} -> {finest}");
    let scale = 2.0 * 1.0 * 0.5 * 10.0 / core::f64::consts::PI;
    assert!(finest <= 0.005 * scale, "finest sup error {finest}");
}

/// The closed-form kernel total matches the discretized mode sum for any
/// mode count.
#[test]
fn ohmic_kernel_total_is_exact() {
    for n in [1usize, 7, 64, 513] {
        let model = SpectralModel::ohmic(0.3, 7.0, 2.0, n).unwrap();
        let bath = discretize_ohmic(&model);
        let expect = 2.0 * 2.0 * 0.3 * 7.0 / core::f64::consts::PI;
        assert!(
            (kernel_total(&bath) - expect).abs() <= 1e-12 * expect,
            "n = {n}"
        );
    }
}

/// Normal-mode decomposition diagonalizes the dynamics: `K v = w^2 M v` for
/// every returned mode.
#[test]
fn decomposition_satisfies_generalized_eigenproblem() {
    let bath = BathSpec::from_pairs(&[(1.0, 0.5), (0.5, 0.8), (2.0, 0.3)]).unwrap();
    let sys = build_two_body_common(1.0, 1.0, &bath).unwrap();
    let modes = decompose(&sys).unwrap();
    let n = sys.dim();
    for (k, &sq) in modes.squared_frequencies.iter().enumerate() {
        let v: DVector<f64> = modes.mode_matrix.column(k).into();
        let kv = sys.stiffness() * &v;
        for i in 0..n {
            let mv = sys.masses()[i] * v[i];
            assert!(
                (kv[i] - sq * mv).abs() <= 1e-9 * sys.stiffness_scale(),
                "mode {k}, row {i}"
            );
        }
    }
}
