//! Explicit (mass, stiffness) representation of the quadratic Hamiltonians:
//! one or two oscillators coupled to a finite bath of independent oscillators,
//! the center-of-mass/relative transformation, and structural checks on the
//! results (lower bounds, independent-oscillator form).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // redundant when inherent f64 methods are available (std builds)
use num_traits::Float;

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check on stiffness matrices.
pub const SYMMETRY_RTOL: f64 = 1e-12;
/// Boundedness tolerance, applied as `tol * max|K|`.
pub const BOUNDED_TOL: f64 = 1e-9;

/// One bath oscillator: mass and angular frequency, natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    mass: f64,
    frequency: f64,
}

impl BathMode {
    pub fn new(mass: f64, frequency: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bath mode mass must be positive and finite, got {mass}"
            )));
        }
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bath mode frequency must be positive and finite, got {frequency}"
            )));
        }
        Ok(Self { mass, frequency })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// The coupling stiffness `c_j = m_j w_j^2` this mode contributes.
    pub fn coupling(&self) -> f64 {
        self.mass * self.frequency * self.frequency
    }
}

/// An ordered finite set of bath modes. Empty means "no bath" and is legal
/// everywhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BathSpec {
    modes: Vec<BathMode>,
}

impl BathSpec {
    pub fn new(modes: Vec<BathMode>) -> Self {
        Self { modes }
    }

    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    /// Build from `(mass, frequency)` pairs, validating each.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let modes = pairs
            .iter()
            .map(|&(m, w)| BathMode::new(m, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[BathMode] {
        &self.modes
    }
}

/// Per-coordinate tag carried through every transformation, so structural
/// checks never have to guess which coordinate is which.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    Bath,
}

/// A quadratic Hamiltonian `H = 1/2 sum_i p_i^2 / m_i + 1/2 r^T K r` with
/// labeled coordinates.
///
/// Masses are positive for every physically constructed system. The
/// center-of-mass/relative bookkeeping split produces a part whose bath
/// kinetic term enters with a minus sign; such parts carry negative masses
/// and are accepted here (masses must be finite and nonzero), but are
/// rejected by any operation that needs a physical system.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSystem {
    labels: Vec<String>,
    masses: Vec<f64>,
    stiffness: DMatrix<f64>,
    roles: Vec<Role>,
}

impl QuadraticSystem {
    pub fn new(
        labels: Vec<String>,
        masses: Vec<f64>,
        stiffness: DMatrix<f64>,
        roles: Vec<Role>,
    ) -> Result<Self> {
        let n = labels.len();
        if masses.len() != n || roles.len() != n || stiffness.nrows() != n || stiffness.ncols() != n
        {
            return Err(Error::InvalidParameter(format!(
                "dimension mismatch: {} labels, {} masses, {} roles, {}x{} stiffness",
                n,
                masses.len(),
                roles.len(),
                stiffness.nrows(),
                stiffness.ncols()
            )));
        }
        for (i, &m) in masses.iter().enumerate() {
            if !m.is_finite() || m == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "mass of coordinate {} must be finite and nonzero, got {m}",
                    labels[i]
                )));
            }
        }
        let scale = stiffness.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (stiffness[(i, j)] - stiffness[(j, i)]).abs();
                if d > SYMMETRY_RTOL * scale.max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "stiffness not symmetric at ({i},{j}): {} vs {}",
                        stiffness[(i, j)],
                        stiffness[(j, i)]
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            masses,
            stiffness,
            roles,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn system_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.roles[i] == Role::System)
            .collect()
    }

    pub fn bath_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.roles[i] == Role::Bath)
            .collect()
    }

    pub fn all_masses_positive(&self) -> bool {
        self.masses.iter().all(|&m| m > 0.0)
    }

    /// Potential energy `1/2 r^T K r`.
    pub fn potential(&self, r: &[f64]) -> f64 {
        let n = self.dim();
        assert_eq!(r.len(), n);
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v += r[i] * self.stiffness[(i, j)] * r[j];
            }
        }
        0.5 * v
    }

    /// Total energy for phase-space point `(r, p)`.
    pub fn energy(&self, r: &[f64], p: &[f64]) -> f64 {
        let kin: f64 = p
            .iter()
            .zip(&self.masses)
            .map(|(&pi, &mi)| 0.5 * pi * pi / mi)
            .sum();
        kin + self.potential(r)
    }

    /// Largest absolute stiffness entry, the scale used by tolerance checks.
    pub fn stiffness_scale(&self) -> f64 {
        self.stiffness.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
    }
}

/// Structural findings about a quadratic system: boundedness of the
/// potential and whether it matches the independent-oscillator pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub is_io_form: bool,
    pub min_potential_eigenvalue: f64,
    pub bounded: bool,
    pub violations: Vec<String>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be nonnegative and finite, got {v}"
        )));
    }
    Ok(())
}

/// One oscillator of mass `m` and bare frequency `omega` coupled to `bath`
/// through complete squares `1/2 m_j w_j^2 (q_j - x)^2`.
///
/// Coordinates are `[x, q_1, .., q_N]`.
pub fn build_one_body_io(m: f64, omega: f64, bath: &BathSpec) -> Result<QuadraticSystem> {
    check_positive("oscillator mass", m)?;
    check_nonnegative("oscillator frequency", omega)?;
    let nb = bath.len();
    let n = 1 + nb;
    let mut k = DMatrix::<f64>::zeros(n, n);
    k[(0, 0)] = m * omega * omega;
    for (j, mode) in bath.modes().iter().enumerate() {
        let c = mode.coupling();
        k[(0, 0)] += c;
        k[(1 + j, 1 + j)] = c;
        k[(0, 1 + j)] = -c;
        k[(1 + j, 0)] = -c;
    }
    let mut labels = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    let mut roles = Vec::with_capacity(n);
    labels.push("x".to_string());
    masses.push(m);
    roles.push(Role::System);
    for (j, mode) in bath.modes().iter().enumerate() {
        labels.push(format!("q_{}", j + 1));
        masses.push(mode.mass());
        roles.push(Role::Bath);
    }
    QuadraticSystem::new(labels, masses, k, roles)
}

fn build_two_body(
    m: f64,
    omega: f64,
    bath: &BathSpec,
    with_counterterm: bool,
) -> Result<QuadraticSystem> {
    check_positive("oscillator mass", m)?;
    check_nonnegative("oscillator frequency", omega)?;
    let nb = bath.len();
    let n = 2 + nb;
    let mut k = DMatrix::<f64>::zeros(n, n);
    k[(0, 0)] = m * omega * omega;
    k[(1, 1)] = m * omega * omega;
    for (j, mode) in bath.modes().iter().enumerate() {
        let c = mode.coupling();
        if with_counterterm {
            k[(0, 0)] += c;
            k[(1, 1)] += c;
        }
        k[(2 + j, 2 + j)] = c;
        for s in 0..2 {
            k[(s, 2 + j)] = -c;
            k[(2 + j, s)] = -c;
        }
    }
    let mut labels = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    let mut roles = Vec::with_capacity(n);
    for s in 1..=2 {
        labels.push(format!("x{s}"));
        masses.push(m);
        roles.push(Role::System);
    }
    for (j, mode) in bath.modes().iter().enumerate() {
        labels.push(format!("q_{}", j + 1));
        masses.push(mode.mass());
        roles.push(Role::Bath);
    }
    QuadraticSystem::new(labels, masses, k, roles)
}

/// Two equal oscillators in a common bath, counterterm included: each bath
/// mode couples through `-c_j q_j (x1 + x2)` and contributes `+c_j` to both
/// oscillator diagonals. Coordinates `[x1, x2, q_1, .., q_N]`.
pub fn build_two_body_common(m: f64, omega: f64, bath: &BathSpec) -> Result<QuadraticSystem> {
    build_two_body(m, omega, bath, true)
}

/// The same two-body model with the counterterm omitted: purely bilinear
/// coupling. The potential loses positivity once the total coupling exceeds
/// the bare stiffness.
pub fn build_two_body_bilinear(m: f64, omega: f64, bath: &BathSpec) -> Result<QuadraticSystem> {
    build_two_body(m, omega, bath, false)
}

/// Smallest eigenvalue of the stiffness matrix. The Hamiltonian is bounded
/// below iff this is nonnegative (the kinetic form is positive whenever all
/// masses are).
pub fn min_potential_eigenvalue(sys: &QuadraticSystem) -> f64 {
    let k = sys.stiffness();
    let sym = (k + k.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    eig.eigenvalues.iter().fold(f64::INFINITY, |a, &x| a.min(x))
}

/// Boundedness verdict: `bounded` iff the smallest stiffness eigenvalue is
/// `>= -tol * max|K|`.
pub fn has_lower_bound(sys: &QuadraticSystem, tol: f64) -> Result<StructureReport> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let min_ev = min_potential_eigenvalue(sys);
    let scale = sys.stiffness_scale().max(1.0);
    let bounded = min_ev >= -tol * scale;
    let mut violations = Vec::new();
    if !bounded {
        violations.push(format!(
            "stiffness has negative eigenvalue {min_ev} (scale {scale})"
        ));
    }
    let io = if sys.system_indices().len() == 1 {
        io_violations(sys).is_empty()
    } else {
        false
    };
    Ok(StructureReport {
        is_io_form: io,
        min_potential_eigenvalue: min_ev,
        bounded,
        violations,
    })
}

/// Transform a two-oscillator system to center-of-mass and relative
/// coordinates `X = (x1 + x2)/2`, `x = x1 - x2`, with masses `M = 2m` and
/// `m_x = m/2`. The stiffness is transformed by congruence, so the
/// Hamiltonian is exactly preserved. Output coordinates `[X, x, q_1, ..]`.
pub fn to_cm_rel(sys: &QuadraticSystem) -> Result<QuadraticSystem> {
    let sys_idx = sys.system_indices();
    if sys_idx.len() != 2 {
        return Err(Error::Usage(format!(
            "center-of-mass transform needs exactly two system coordinates, got {}",
            sys_idx.len()
        )));
    }
    let (i1, i2) = (sys_idx[0], sys_idx[1]);
    let m1 = sys.masses()[i1];
    let m2 = sys.masses()[i2];
    if (m1 - m2).abs() > 1e-12 * m1.abs().max(m2.abs()) {
        return Err(Error::UnsupportedConfiguration(format!(
            "unequal system masses {m1} and {m2}; the transform assumes equal masses"
        )));
    }
    let m = m1;
    let n = sys.dim();
    let bath_idx = sys.bath_indices();
    // Old coordinates in terms of new: x1 = X + x/2, x2 = X - x/2, q = q.
    // Columns of T are ordered (X, x, q_1, ..).
    let mut t = DMatrix::<f64>::zeros(n, n);
    t[(i1, 0)] = 1.0;
    t[(i1, 1)] = 0.5;
    t[(i2, 0)] = 1.0;
    t[(i2, 1)] = -0.5;
    for (col, &bi) in bath_idx.iter().enumerate() {
        t[(bi, 2 + col)] = 1.0;
    }
    let k_new = t.transpose() * sys.stiffness() * &t;

    let mut labels = Vec::with_capacity(n);
    let mut masses = Vec::with_capacity(n);
    let mut roles = Vec::with_capacity(n);
    labels.push("X".to_string());
    masses.push(2.0 * m);
    roles.push(Role::System);
    labels.push("x".to_string());
    masses.push(0.5 * m);
    roles.push(Role::System);
    for &bi in &bath_idx {
        labels.push(sys.labels()[bi].clone());
        masses.push(sys.masses()[bi]);
        roles.push(Role::Bath);
    }
    QuadraticSystem::new(labels, masses, k_new, roles)
}

fn expect_cm_rel(sys: &QuadraticSystem) -> Result<()> {
    if sys.dim() < 2 || sys.labels()[0] != "X" || sys.labels()[1] != "x" {
        return Err(Error::Usage(
            "input must be in center-of-mass/relative coordinates (X, x, q_1, ..)".to_string(),
        ));
    }
    Ok(())
}

/// Split a transformed system into the center-of-mass and relative parts of
/// the bookkeeping decomposition `H = H_cm + H_rel`.
///
/// `H_cm` lives on `(X, q_1, ..)` with doubled bath kinetic and potential
/// terms completed to `(q_j - X)^2`; `H_rel` lives on `(x, q_1, ..)` and
/// carries the relative oscillator, the counterterm, and a *subtracted* bath
/// block (negative bath stiffness and negative bath masses). The two parts
/// sum exactly to the input, both in stiffness and in the inverse-mass
/// kinetic coefficients.
pub fn split_cm_rel(sys: &QuadraticSystem) -> Result<(QuadraticSystem, QuadraticSystem)> {
    expect_cm_rel(sys)?;
    let n = sys.dim();
    let nb = n - 2;
    let k = sys.stiffness();

    // Bath couplings read off the X row: K[X, q_j] = -2 c_j.
    let mut cs = Vec::with_capacity(nb);
    for j in 0..nb {
        cs.push(-0.5 * k[(0, 2 + j)]);
    }

    // H_cm over (X, q_1, ..): the whole X row/diagonal plus doubled bath.
    let mut k_cm = DMatrix::<f64>::zeros(1 + nb, 1 + nb);
    k_cm[(0, 0)] = k[(0, 0)];
    for j in 0..nb {
        k_cm[(0, 1 + j)] = k[(0, 2 + j)];
        k_cm[(1 + j, 0)] = k[(2 + j, 0)];
        k_cm[(1 + j, 1 + j)] = 2.0 * cs[j];
    }
    let mut labels_cm = Vec::with_capacity(1 + nb);
    let mut masses_cm = Vec::with_capacity(1 + nb);
    let mut roles_cm = Vec::with_capacity(1 + nb);
    labels_cm.push("X".to_string());
    masses_cm.push(sys.masses()[0]);
    roles_cm.push(Role::System);
    for j in 0..nb {
        labels_cm.push(sys.labels()[2 + j].clone());
        // Doubled kinetic term: 2 p_j^2 / 2m_j, i.e. effective mass m_j / 2.
        masses_cm.push(0.5 * sys.masses()[2 + j]);
        roles_cm.push(Role::Bath);
    }
    let h_cm = QuadraticSystem::new(labels_cm, masses_cm, k_cm, roles_cm)?;

    // H_rel over (x, q_1, ..): the x row plus whatever of the bath block is
    // left over, which is the subtracted (negative) bath.
    let mut k_rel = DMatrix::<f64>::zeros(1 + nb, 1 + nb);
    k_rel[(0, 0)] = k[(1, 1)];
    for j in 0..nb {
        k_rel[(0, 1 + j)] = k[(1, 2 + j)];
        k_rel[(1 + j, 0)] = k[(2 + j, 1)];
        k_rel[(1 + j, 1 + j)] = k[(2 + j, 2 + j)] - 2.0 * cs[j];
    }
    for a in 0..nb {
        for b in 0..nb {
            if a != b {
                k_rel[(1 + a, 1 + b)] = k[(2 + a, 2 + b)];
            }
        }
    }
    let mut labels_rel = Vec::with_capacity(1 + nb);
    let mut masses_rel = Vec::with_capacity(1 + nb);
    let mut roles_rel = Vec::with_capacity(1 + nb);
    labels_rel.push("x".to_string());
    masses_rel.push(sys.masses()[1]);
    roles_rel.push(Role::System);
    for j in 0..nb {
        labels_rel.push(sys.labels()[2 + j].clone());
        // Subtracted kinetic term: -p_j^2 / 2m_j.
        masses_rel.push(-sys.masses()[2 + j]);
        roles_rel.push(Role::Bath);
    }
    let h_rel = QuadraticSystem::new(labels_rel, masses_rel, k_rel, roles_rel)?;

    Ok((h_cm, h_rel))
}

/// Rescale the bath of a center-of-mass part to exhibit it as a one-body
/// independent-oscillator system: the doubled bath mode `(m_j, w_j)` is read
/// as a single mode `(m_j/2, 2 w_j)`, which leaves the quadratic form
/// entrywise unchanged.
pub fn rescale_bath_cm(h_cm: &QuadraticSystem) -> Result<QuadraticSystem> {
    let sys_idx = h_cm.system_indices();
    if sys_idx.len() != 1 {
        return Err(Error::Structure(
            "center-of-mass part must have exactly one system coordinate".to_string(),
        ));
    }
    let report = is_io_form(h_cm)?;
    if !report.is_io_form {
        return Err(Error::Structure(format!(
            "input is not of the doubled-bath independent-oscillator shape: {:?}",
            report.violations
        )));
    }
    // The masses already carry the factor 1/2 from the doubled kinetic term,
    // so the rescaled system is the same quadratic form; only the implied
    // per-mode (mass, frequency) bookkeeping changes, which io_bath_modes
    // recovers from (mass, diagonal).
    Ok(h_cm.clone())
}

/// Recover the implied bath modes of an independent-oscillator-form system
/// from its masses and bath diagonal: `w_j = sqrt(K_jj / m_j)`.
pub fn io_bath_modes(sys: &QuadraticSystem) -> Result<BathSpec> {
    let report = is_io_form(sys)?;
    if !report.is_io_form {
        return Err(Error::Structure(format!(
            "not an independent-oscillator form: {:?}",
            report.violations
        )));
    }
    let k = sys.stiffness();
    let mut modes = Vec::new();
    for &bi in &sys.bath_indices() {
        let m = sys.masses()[bi];
        let w = (k[(bi, bi)] / m).sqrt();
        modes.push(BathMode::new(m, w)?);
    }
    Ok(BathSpec::new(modes))
}

fn io_violations(sys: &QuadraticSystem) -> Vec<String> {
    let mut violations = Vec::new();
    let si = sys.system_indices()[0];
    let bath_idx = sys.bath_indices();
    let k = sys.stiffness();
    let tol = BOUNDED_TOL * sys.stiffness_scale().max(1.0);

    let mut negative_diag = false;
    let mut counterterm_no_coupling = false;
    let mut diag_mismatch = false;
    let mut bath_bath = false;
    let mut bad_mass = false;
    let mut coupling_total = 0.0;

    for (a, &ia) in bath_idx.iter().enumerate() {
        if sys.masses()[ia] <= 0.0 {
            bad_mass = true;
        }
        let diag = k[(ia, ia)];
        let coupling = -k[(si, ia)];
        coupling_total += coupling;
        if diag < -tol {
            negative_diag = true;
        }
        if (diag - coupling).abs() > tol {
            if coupling.abs() <= tol {
                counterterm_no_coupling = true;
            } else {
                diag_mismatch = true;
            }
        }
        for &ib in bath_idx.iter().skip(a + 1) {
            if k[(ia, ib)].abs() > tol {
                bath_bath = true;
            }
        }
    }
    if negative_diag {
        violations.push("negative bath diagonal block".to_string());
    }
    if counterterm_no_coupling {
        violations.push("counterterm without linear coupling".to_string());
    }
    if diag_mismatch {
        violations.push("bath diagonal does not match linear system-bath coupling".to_string());
    }
    if bath_bath {
        violations.push("direct bath-bath coupling present".to_string());
    }
    if bad_mass {
        violations.push("nonpositive bath mass".to_string());
    }
    if k[(si, si)] - coupling_total < -tol {
        violations.push("system diagonal below coupling counterterm".to_string());
    }
    violations
}

/// Check whether a one-system-coordinate quadratic form matches the
/// independent-oscillator pattern: every bath mode couples to the system as a
/// completed square `1/2 c_j (q_j - x)^2`, with no direct bath-bath coupling.
pub fn is_io_form(sys: &QuadraticSystem) -> Result<StructureReport> {
    let sys_idx = sys.system_indices();
    if sys_idx.len() != 1 {
        return Err(Error::Usage(format!(
            "independent-oscillator check needs exactly one system coordinate, got {}",
            sys_idx.len()
        )));
    }
    let violations = io_violations(sys);
    let min_ev = min_potential_eigenvalue(sys);
    let scale = sys.stiffness_scale().max(1.0);
    Ok(StructureReport {
        is_io_form: violations.is_empty(),
        min_potential_eigenvalue: min_ev,
        bounded: min_ev >= -BOUNDED_TOL * scale,
        violations,
    })
}
