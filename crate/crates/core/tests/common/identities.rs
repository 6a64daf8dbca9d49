//! Randomized identity checks shared by the test suites and the acceptance run.
//! Each returns the worst deviation observed.

use nalgebra::{Cholesky, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use symverify::mitigate::{
    anticommuting_qse, postselected_expectation, project_symmetry, sqse_energy, verified_expectation,
};
use symverify::pauli::{CMatrix, Letter, PauliString, PauliSum, SymmetrySpec};
use symverify::symtools::{conjugate_by_rotations, extend_hamiltonian};
use symverify::DensityMatrix;

use super::*;

/// Eigenvalues of the Hermitian pencil `(h, b)` with `b` positive definite.
pub fn generalized_eigen(h: &CMatrix, b: &CMatrix) -> Vec<f64> {
    let l = Cholesky::new(b.clone()).expect("positive definite overlap").l();
    let li = l.try_inverse().unwrap();
    let m = &li * h * li.adjoint();
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn random_sector(r: &mut impl Rng) -> i8 {
    if r.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

fn dense_expectation(m: &CMatrix, rho: &DensityMatrix) -> f64 {
    (m * rho.matrix()).trace().re / rho.trace()
}

/// Post-selection formula against expectation on the projected state.
pub fn postselection_vs_projection(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 2 + k % 3;
        let rho = random_rho(&mut r, n);
        let s = SymmetrySpec::new(random_nontrivial_pauli(&mut r, n), random_sector(&mut r)).unwrap();
        let p = loop {
            let p = random_pauli(&mut r, n);
            if p.commutes(&s.operator).unwrap() {
                break p;
            }
        };
        let ps = p.multiply(&s.operator).unwrap();
        let got = postselected_expectation(
            rho.pauli_value(&p).unwrap(),
            rho.pauli_value(&ps).unwrap(),
            rho.pauli_value(&s.operator).unwrap(),
            s.sector,
        )
        .unwrap();
        let (proj, _) = project_symmetry(&rho, &s).unwrap();
        worst = worst.max((got - proj.pauli_value(&p).unwrap()).abs());
    }
    worst
}

/// S-QSE eigenvalues against an independent pencil solve and against the
/// two post-selected energies.
pub fn sqse_vs_generalized_eigenproblem(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 2 + k % 3;
        let s = random_nontrivial_pauli(&mut r, n);
        let h = random_commuting_sum(&mut r, &s, 6);
        let rho = random_rho(&mut r, n);
        let hm = h.dense_matrix().unwrap();
        let sm = s.dense_matrix().unwrap();
        let (eh, ehs, es) =
            (dense_expectation(&hm, &rho), dense_expectation(&(&hm * &sm), &rho), dense_expectation(&sm, &rho));
        let sol = sqse_energy(eh, ehs, es).unwrap();
        let hq = CMatrix::from_row_slice(2, 2, &[c(eh, 0.0), c(ehs, 0.0), c(ehs, 0.0), c(eh, 0.0)]);
        let bq = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(es, 0.0), c(es, 0.0), c(1.0, 0.0)]);
        let numeric = generalized_eigen(&hq, &bq);
        let mut closed = sol.eigenvalues.to_vec();
        closed.sort_by(f64::total_cmp);
        for (a, b) in closed.iter().zip(&numeric) {
            worst = worst.max((a - b).abs());
        }
        for sector in [1i8, -1] {
            let spec = SymmetrySpec::new(s, sector).unwrap();
            let (proj, _) = project_symmetry(&rho, &spec).unwrap();
            let e = dense_expectation(&hm, &proj);
            worst = worst.max((sol.sector_energy(sector) - e).abs());
        }
        worst = worst.max((sol.chosen - closed[0]).abs());
    }
    worst
}

/// Smallest `Tr[ρ_s ψψ†] − Tr[ρ ψψ†]` over random states and in-sector targets.
pub fn overlap_gain(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = f64::INFINITY;
    for k in 0..instances {
        let n = 2 + k % 3;
        let rho = random_rho(&mut r, n);
        let s = SymmetrySpec::new(random_nontrivial_pauli(&mut r, n), random_sector(&mut r)).unwrap();
        let m = s.projector().unwrap();
        let v = nalgebra::DVector::from_vec(random_vector(&mut r, 1 << n));
        let w = &m * v;
        let w = &w / c(w.norm(), 0.0);
        let target = outer(w.as_slice());
        let (proj, _) = project_symmetry(&rho, &s).unwrap();
        worst = worst.min(dense_expectation(&target, &proj) - dense_expectation(&target, &rho));
    }
    worst
}

/// Largest gap between sorted spectra of `H ⊕ H` and the extended Hamiltonian.
pub fn spectrum_doubling(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 2 + k % 2;
        let h = random_sum(&mut r, n, 2 + k % 7);
        let pivot = random_nontrivial_pauli(&mut r, n);
        let ext = extend_hamiltonian(&h, &pivot).unwrap();
        let base = hermitian_eigenvalues(&h.dense_matrix().unwrap());
        let doubled: Vec<f64> = base.iter().flat_map(|&e| [e, e]).collect();
        let got = hermitian_eigenvalues(&ext.dense_matrix().unwrap());
        for (a, b) in doubled.iter().zip(&got) {
            worst = worst.max((a - b).abs());
        }
        let new_sym = PauliString::single(1, 0, Letter::X).tensor(&pivot);
        let hm = ext.dense_matrix().unwrap();
        let sm = new_sym.dense_matrix().unwrap();
        worst = worst.max(max_norm(&(&hm * &sm - &sm * &hm)));
    }
    worst
}

pub fn rotation_axes() -> [PauliString; 2] {
    [PauliString::lit("YIXI"), PauliString::lit("IYIX")]
}

pub fn unrotated_symmetries() -> [PauliString; 3] {
    [PauliString::lit("ZZII"), PauliString::lit("ZIZI"), PauliString::lit("ZZZZ")]
}

/// The cluster rotation sends `Z₀Z₁` to `X₀X₁X₂X₃` and fixes the other two.
pub fn rotation_maps_symmetries() -> bool {
    let axes = rotation_axes();
    let [s0, s1, s2] = unrotated_symmetries();
    let r0 = conjugate_by_rotations(&s0, &axes).unwrap();
    r0.unsigned() == PauliString::lit("XXXX")
        && conjugate_by_rotations(&s1, &axes).unwrap() == s1
        && conjugate_by_rotations(&s2, &axes).unwrap() == s2
}

/// Every weight-1 X or Z error anticommutes with some rotated symmetry, and
/// every weight-1 Z error commutes with the whole unrotated set.
pub fn rotated_set_detects_single_flips() -> bool {
    let rotated = [PauliString::lit("XXXX"), PauliString::lit("ZIZI"), PauliString::lit("ZZZZ")];
    let mut ok = true;
    for q in 0..4 {
        for l in [Letter::X, Letter::Z] {
            let e = PauliString::single(4, q, l);
            ok &= rotated.iter().any(|s| !s.commutes(&e).unwrap());
        }
        let z = PauliString::single(4, q, Letter::Z);
        ok &= unrotated_symmetries().iter().all(|s| s.commutes(&z).unwrap());
    }
    ok
}

/// Random Hamiltonian whose terms all anticommute with `a`.
pub fn random_chiral_sum(r: &mut impl Rng, a: &PauliString, terms: usize) -> PauliSum {
    let n = a.n_qubits();
    let mut h = PauliSum::new(n);
    while h.len() < terms {
        let p = random_pauli(r, n);
        if !p.commutes(a).unwrap() {
            h.add_term(p, r.gen_range(-1.0..1.0)).unwrap();
        }
    }
    h
}

/// Anticommuting-QSE closed form against a brute-force pencil solve,
/// relative to `1 + E²`.
pub fn anticommuting_closed_vs_numeric(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 2 + k % 3;
        let a = random_nontrivial_pauli(&mut r, n);
        let h = random_chiral_sum(&mut r, &a, 1 + k % 5);
        let rho = random_rho(&mut r, n);
        let got = anticommuting_qse(&rho, &h, &a).unwrap();
        let (hm, am) = (h.dense_matrix().unwrap(), a.dense_matrix().unwrap());
        let ev = |m: &CMatrix| -> Complex64 { (m * rho.matrix()).trace() };
        let ea = ev(&am);
        let hq = CMatrix::from_row_slice(2, 2, &[ev(&hm), ev(&(&hm * &am)), ev(&(&am * &hm)), ev(&(&am * &hm * &am))]);
        let bq = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ea, ea.conj(), c(1.0, 0.0)]);
        let roots = generalized_eigen(&hq, &bq);
        let scale = 1.0 + got.energy_squared;
        for (x, y) in roots.iter().zip(got.roots) {
            worst = worst.max((x * x - got.energy_squared).abs() / scale);
            worst = worst.max((x - y).abs() / scale);
        }
    }
    worst
}

fn chiral_pair(r: &mut impl Rng, n: usize) -> (PauliSum, PauliString, Vec<Complex64>, f64) {
    let a = random_nontrivial_pauli(r, n);
    let h = random_chiral_sum(r, &a, 4);
    let eig = SymmetricEigen::new(h.dense_matrix().unwrap());
    let (mut idx, mut best) = (0, f64::INFINITY);
    for (i, &e) in eig.eigenvalues.iter().enumerate() {
        if e < best {
            best = e;
            idx = i;
        }
    }
    let psi: Vec<Complex64> = eig.eigenvectors.column(idx).iter().copied().collect();
    (h, a, psi, best)
}

/// Incoherent mixtures of `|ψ⟩` and `A|ψ⟩` gain nothing: `E²_QSE = Tr[Hρ]²`.
pub fn incoherent_mixture_gain(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 2 + k % 3;
        let (h, a, psi, _) = chiral_pair(&mut r, n);
        let am = a.dense_matrix().unwrap();
        let apsi: Vec<Complex64> = (&am * nalgebra::DVector::from_vec(psi.clone())).iter().copied().collect();
        let w = r.gen_range(0.05..0.95);
        let m = outer(&psi) * c(w, 0.0) + outer(&apsi) * c(1.0 - w, 0.0);
        let rho = DensityMatrix::from_matrix(m).unwrap();
        let got = anticommuting_qse(&rho, &h, &a).unwrap();
        let e = rho.expectation(&h).unwrap();
        worst = worst.max((got.energy_squared - e * e).abs());
    }
    worst
}

/// Coherent superposition `cos θ|ψ⟩ + sin θ e^{iφ}A|ψ⟩` at `φ = π/2`
/// recovers `E²` exactly.
pub fn coherent_quarter_phase(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 2 + k % 3;
        let (h, a, psi, e) = chiral_pair(&mut r, n);
        let am = a.dense_matrix().unwrap();
        let v = nalgebra::DVector::from_vec(psi);
        let theta: f64 = r.gen_range(0.05..1.5);
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2);
        let state = &v * c(theta.cos(), 0.0) + (&am * &v) * (phase * theta.sin());
        let rho = DensityMatrix::from_pure(state.as_slice()).unwrap();
        let got = anticommuting_qse(&rho, &h, &a).unwrap();
        worst = worst.max((got.energy_squared - e * e).abs());
    }
    worst
}

/// `χ±` against the complex products `(1 ± Ae^{iφ})(1 ± Ae^{−iφ})` on an `(A, φ)` grid.
pub fn chi_grid() -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..=48 {
        let phi = -std::f64::consts::PI + std::f64::consts::TAU * f64::from(j) / 48.0;
        for k in 0..=8 {
            let a = -1.0 + 0.25 * f64::from(k);
            let (cp, cm) = symverify::mitigate::coherent_chi(phi, a).unwrap();
            let e = Complex64::from_polar(a, phi);
            let plus = (c(1.0, 0.0) + e) * (c(1.0, 0.0) + e.conj());
            let minus = (c(1.0, 0.0) - e) * (c(1.0, 0.0) - e.conj());
            worst = worst.max((cp - plus.re).abs()).max(plus.im.abs());
            worst = worst.max((cm - minus.re).abs()).max(minus.im.abs());
        }
    }
    worst
}

/// Sequential verification of commuting symmetries against the joint projector.
pub fn sequential_vs_joint(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let n = 3 + k % 2;
        let mut syms: Vec<SymmetrySpec> = Vec::new();
        let count = 1 + k % 3;
        while syms.len() < count {
            let s = random_nontrivial_pauli(&mut r, n);
            let fits = syms.iter().all(|t| t.operator.commutes(&s).unwrap() && t.operator.unsigned() != s);
            let independent = syms.len() < 2 || s != syms[0].operator.multiply(&syms[1].operator).unwrap().unsigned();
            if fits && independent {
                syms.push(SymmetrySpec::new(s, random_sector(&mut r)).unwrap());
            }
        }
        let h = random_sum(&mut r, n, 8);
        let rho = random_rho(&mut r, n);
        let d = 1 << n;
        let joint = syms.iter().fold(CMatrix::identity(d, d), |acc, s| acc * s.projector().unwrap());
        let proj = &joint * rho.matrix() * &joint;
        let p = proj.trace().re;
        let want = (h.dense_matrix().unwrap() * &proj).trace().re / p;
        let got = verified_expectation(&rho, &h, &syms).unwrap();
        worst = worst.max((got.value - want).abs()).max((got.acceptance_probability - p).abs());
    }
    worst
}
