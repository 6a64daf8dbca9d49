//! Symmetry projection, post-selected expectation values, symmetry
//! subspace expansion (S-QSE) and subspace expansion with an operator that
//! anticommutes with the Hamiltonian.

use num_complex::Complex64;

use crate::densim::DensityMatrix;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, SymmetrySpec};

/// Smallest acceptance probability or denominator treated as non-zero.
pub const REJECTION_THRESHOLD: f64 = 1e-12;

/// Expectation value on a post-selected state with its acceptance probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifiedExpectation {
    pub value: f64,
    pub acceptance_probability: f64,
}

/// `(M_s ρ M_s / Tr[M_s ρ], Tr[M_s ρ])`.
pub fn project_symmetry(rho: &DensityMatrix, s: &SymmetrySpec) -> Result<(DensityMatrix, f64)> {
    let mut out = rho.project_unnormalized(s)?;
    let p = out.trace() / rho.trace();
    if !(p > REJECTION_THRESHOLD) {
        return Err(Error::Rejection(format!("sector {s} has weight {p:.3e}")));
    }
    out.normalize()?;
    Ok((out, p))
}

/// Projects onto the joint sector of several commuting symmetries in turn.
/// The returned probability is the product of the step probabilities.
pub fn project_symmetries(rho: &DensityMatrix, syms: &[SymmetrySpec]) -> Result<(DensityMatrix, f64)> {
    check_mutually_commuting(syms)?;
    let mut state = rho.clone();
    let mut p = 1.0;
    for s in syms {
        let (next, q) = project_symmetry(&state, s)?;
        state = next;
        p *= q;
    }
    Ok((state, p))
}

pub(crate) fn check_mutually_commuting(syms: &[SymmetrySpec]) -> Result<()> {
    for (i, a) in syms.iter().enumerate() {
        for b in &syms[i + 1..] {
            if !a.operator.commutes(&b.operator)? {
                return Err(Error::Domain(format!("symmetries {} and {} anticommute", a.operator, b.operator)));
            }
        }
    }
    Ok(())
}

/// `(⟨P⟩ + s⟨PS⟩) / (1 + s⟨S⟩)`, the expectation of `P` after post-selecting
/// sector `s`, for `P` commuting with `S`.
pub fn postselected_expectation(exp_p: f64, exp_ps: f64, exp_s: f64, sector: i8) -> Result<f64> {
    if sector != 1 && sector != -1 {
        return Err(Error::Domain(format!("sector must be ±1, got {sector}")));
    }
    for (name, v) in [("⟨P⟩", exp_p), ("⟨PS⟩", exp_ps), ("⟨S⟩", exp_s)] {
        if !v.is_finite() || v.abs() > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("{name} = {v} is not a Pauli expectation")));
        }
    }
    let s = f64::from(sector);
    let den = 1.0 + s * exp_s;
    if den.abs() <= REJECTION_THRESHOLD {
        return Err(Error::Rejection(format!("sector {sector} is unpopulated (1 + s⟨S⟩ = {den:.3e})")));
    }
    Ok((exp_p + s * exp_ps) / den)
}

/// Expectation of `obs` on the state post-selected into the joint sector of
/// `syms`, computed from traces on the unprojected state only.
///
/// Each symmetry is applied in turn with the single-symmetry formula, so a
/// term needs the traces of its products with every subset of `syms`. Terms
/// anticommuting with any symmetry have zero projected expectation.
pub fn verified_expectation(rho: &DensityMatrix, obs: &PauliSum, syms: &[SymmetrySpec]) -> Result<VerifiedExpectation> {
    check_mutually_commuting(syms)?;
    for s in syms {
        if s.n_qubits() != rho.n_qubits() {
            return Err(Error::Dimension(format!(
                "{}-qubit symmetry on a {}-qubit state",
                s.n_qubits(),
                rho.n_qubits()
            )));
        }
    }
    let mut acceptance = 1.0;
    for k in 0..syms.len() {
        let e = sequential_value(rho, &syms[k].operator, &syms[..k])?;
        acceptance *= (1.0 + syms[k].sector_f64() * e) / 2.0;
    }
    if !(acceptance > REJECTION_THRESHOLD) {
        return Err(Error::Rejection(format!("joint sector has weight {acceptance:.3e}")));
    }
    let mut value = 0.0;
    for (p, c) in obs.terms() {
        value += c * sequential_value(rho, p, syms)?;
    }
    Ok(VerifiedExpectation { value, acceptance_probability: acceptance })
}

fn sequential_value(rho: &DensityMatrix, p: &PauliString, syms: &[SymmetrySpec]) -> Result<f64> {
    let Some((last, rest)) = syms.split_last() else {
        return rho.pauli_value(p);
    };
    if !p.commutes(&last.operator)? {
        return Ok(0.0);
    }
    let s = last.sector_f64();
    let ep = sequential_value(rho, p, rest)?;
    let eps = sequential_value(rho, &p.multiply(&last.operator)?, rest)?;
    let es = sequential_value(rho, &last.operator, rest)?;
    let den = 1.0 + s * es;
    if den.abs() <= REJECTION_THRESHOLD {
        return Err(Error::Rejection(format!("sector {last} is unpopulated")));
    }
    Ok((ep + s * eps) / den)
}

/// Solution of the two-dimensional S-QSE problem with excitations `{I, S}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QseSolution {
    /// `[λ(+1), λ(−1)]`, the energies of the two symmetry sectors.
    pub eigenvalues: [f64; 2],
    /// The lesser eigenvalue.
    pub chosen: f64,
    /// `det B = 1 − ⟨S⟩²`.
    pub b_condition: f64,
}

impl QseSolution {
    pub fn sector_energy(&self, sector: i8) -> f64 {
        if sector >= 0 {
            self.eigenvalues[0]
        } else {
            self.eigenvalues[1]
        }
    }
}

/// Eigenvalues of `B⁻¹H` for 2×2 matrices, via the closed-form inverse.
pub fn generalized_eigenvalues_2x2(h: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> Result<[Complex64; 2]> {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    if det.norm() <= REJECTION_THRESHOLD {
        return Err(Error::DegenerateOverlap(format!("det B = {det}")));
    }
    let inv = [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]];
    let m = |i: usize, j: usize| inv[i][0] * h[0][j] + inv[i][1] * h[1][j];
    let tr = m(0, 0) + m(1, 1);
    let dm = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    let root = (tr * tr / 4.0 - dm).sqrt();
    Ok([tr / 2.0 + root, tr / 2.0 - root])
}

/// S-QSE from `⟨H⟩`, `⟨HS⟩` and `⟨S⟩` for a Hamiltonian commuting with `S`.
///
/// Solves `H_QSE v = λ B_QSE v` with `H_QSE = [[⟨H⟩, ⟨HS⟩], [⟨HS⟩, ⟨H⟩]]`
/// and `B_QSE = [[1, ⟨S⟩], [⟨S⟩, 1]]` and checks the result against
/// `λ± = (⟨H⟩ ± ⟨HS⟩)/(1 ± ⟨S⟩)`.
pub fn sqse_energy(h_exp: f64, hs_exp: f64, s_exp: f64) -> Result<QseSolution> {
    if !(h_exp.is_finite() && hs_exp.is_finite() && s_exp.is_finite()) {
        return Err(Error::Domain("non-finite S-QSE input".into()));
    }
    if s_exp.abs() >= 1.0 - REJECTION_THRESHOLD {
        return Err(Error::DegenerateOverlap(format!("⟨S⟩ = {s_exp}")));
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let hq = [[c(h_exp), c(hs_exp)], [c(hs_exp), c(h_exp)]];
    let bq = [[c(1.0), c(s_exp)], [c(s_exp), c(1.0)]];
    let num = generalized_eigenvalues_2x2(hq, bq)?;
    let plus = (h_exp + hs_exp) / (1.0 + s_exp);
    let minus = (h_exp - hs_exp) / (1.0 - s_exp);
    let tol = 1e-10 * (1.0 + plus.abs().max(minus.abs()));
    let matched = |a: f64, b: f64| (num[0].re - a).abs() <= tol && (num[1].re - b).abs() <= tol;
    if !(matched(plus, minus) || matched(minus, plus)) || num.iter().any(|z| z.im.abs() > tol) {
        return Err(Error::Domain(format!(
            "numerical eigenvalues {:?} disagree with closed form ({plus}, {minus})",
            num
        )));
    }
    Ok(QseSolution { eigenvalues: [plus, minus], chosen: plus.min(minus), b_condition: 1.0 - s_exp * s_exp })
}

/// S-QSE on a state: measures `⟨H⟩`, `⟨HS⟩` and `⟨S⟩` and solves.
pub fn sqse_from_state(rho: &DensityMatrix, h: &PauliSum, s: &PauliString) -> Result<QseSolution> {
    if !h.commutes_with(s)? {
        return Err(Error::Domain(format!("Hamiltonian does not commute with {s}")));
    }
    let mut sp = PauliSum::new(s.n_qubits());
    sp.add_term(*s, 1.0)?;
    let hs = h.multiply_hermitian(&sp)?;
    sqse_energy(rho.expectation(h)?, rho.expectation(&hs)?, rho.pauli_value(s)?)
}

/// Sector-resolved energies of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderingDiagnostic {
    pub total: f64,
    /// Energy and weight of the target sector, if populated.
    pub sector: Option<(f64, f64)>,
    /// Energy and weight of the opposite sector, if populated.
    pub rest: Option<(f64, f64)>,
    /// Whether the rejected sector lies at or above the target sector;
    /// `None` when either sector is empty.
    pub verification_trustworthy: Option<bool>,
}

/// Splits `Tr[Hρ]` into the two sectors of `s`.
pub fn energy_ordering_check(rho: &DensityMatrix, h: &PauliSum, s: &SymmetrySpec) -> Result<OrderingDiagnostic> {
    if !h.commutes_with(&s.operator)? {
        return Err(Error::Domain(format!("Hamiltonian does not commute with {}", s.operator)));
    }
    let total = rho.expectation(h)? / rho.trace();
    let branch = |spec: &SymmetrySpec| -> Result<Option<(f64, f64)>> {
        match project_symmetry(rho, spec) {
            Ok((state, p)) => Ok(Some((state.expectation(h)?, p))),
            Err(Error::Rejection(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let sector = branch(s)?;
    let rest = branch(&s.flipped())?;
    let verification_trustworthy = match (sector, rest) {
        (Some((es, _)), Some((er, _))) => Some(er >= es),
        _ => None,
    };
    Ok(OrderingDiagnostic { total, sector, rest, verification_trustworthy })
}

/// Result of subspace expansion with `{I, A}` where `{A, H} = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnticommutingQse {
    /// `(⟨H⟩² + |⟨HA⟩|²) / (1 − ⟨A⟩²)`.
    pub energy_squared: f64,
    /// `±√E²`, lower root first.
    pub roots: [f64; 2],
}

/// Subspace expansion with an operator `A` anticommuting with `H`.
///
/// The closed form is checked against the generalized eigenproblem on
/// `H_QSE = [[⟨H⟩, ⟨HA⟩], [⟨AH⟩, ⟨AHA⟩]]`, `B_QSE = [[1, ⟨A⟩], [⟨A⟩, 1]]`.
pub fn anticommuting_qse(rho: &DensityMatrix, h: &PauliSum, a: &PauliString) -> Result<AnticommutingQse> {
    if a.sign().is_none() {
        return Err(Error::Domain(format!("{a} is not Hermitian")));
    }
    let hm = h.dense_matrix()?;
    let am = a.dense_matrix()?;
    let anti = &hm * &am + &am * &hm;
    let worst = anti.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if worst >= 1e-10 {
        return Err(Error::Domain(format!("{{A, H}} has max-norm {worst:.3e}")));
    }
    let norm = rho.trace();
    let ev = |m: &crate::pauli::CMatrix| -> Complex64 { (m * rho.matrix()).trace() / norm };
    let e_h = ev(&hm);
    let e_ha = ev(&(&hm * &am));
    let e_ah = ev(&(&am * &hm));
    let e_aha = ev(&(&am * &hm * &am));
    let e_a = rho.pauli_value(a)? / norm;
    if e_a * e_a >= 1.0 - REJECTION_THRESHOLD {
        return Err(Error::DegenerateOverlap(format!("⟨A⟩ = {e_a}")));
    }
    let energy_squared = (e_h.re * e_h.re + e_ha.norm_sqr()) / (1.0 - e_a * e_a);
    let one = Complex64::new(1.0, 0.0);
    let ca = Complex64::new(e_a, 0.0);
    let num = generalized_eigenvalues_2x2([[e_h, e_ha], [e_ah, e_aha]], [[one, ca], [ca, one]])?;
    for z in num {
        let d = (z * z - energy_squared).norm();
        if d > 1e-8 * (1.0 + energy_squared) {
            return Err(Error::Domain(format!("eigenvalue {z} disagrees with E² = {energy_squared}")));
        }
    }
    let e = energy_squared.sqrt();
    Ok(AnticommutingQse { energy_squared, roots: [-e, e] })
}

/// `χ± = (1 ± A e^{iφ})(1 ± A e^{−iφ}) = 1 ± 2A cos φ + A²`.
pub fn coherent_chi(phi: f64, a: f64) -> Result<(f64, f64)> {
    if !(a.abs() <= 1.0) || !phi.is_finite() {
        return Err(Error::Domain(format!("need |A| ≤ 1 and finite φ, got A = {a}, φ = {phi}")));
    }
    let c = 2.0 * a * phi.cos();
    Ok((1.0 + c + a * a, 1.0 - c + a * a))
}
