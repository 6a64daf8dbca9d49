#![allow(dead_code)]

pub mod identities;
pub mod verification;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symverify::pauli::{CMatrix, Letter, PauliString, PauliSum};
use symverify::DensityMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_matrix(r: &mut impl Rng, d: usize) -> CMatrix {
    DMatrix::from_fn(d, d, |_, _| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

/// Full-rank random state `G G† / Tr`.
pub fn random_rho(r: &mut impl Rng, n: usize) -> DensityMatrix {
    let g = random_matrix(r, 1 << n);
    let m = &g * g.adjoint();
    let t = m.trace();
    DensityMatrix::from_matrix(m / t).unwrap()
}

pub fn random_vector(r: &mut impl Rng, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_letter(r: &mut impl Rng) -> Letter {
    [Letter::I, Letter::X, Letter::Y, Letter::Z][r.gen_range(0..4)]
}

pub fn random_pauli(r: &mut impl Rng, n: usize) -> PauliString {
    let letters: Vec<Letter> = (0..n).map(|_| random_letter(r)).collect();
    PauliString::from_letters(&letters)
}

pub fn random_nontrivial_pauli(r: &mut impl Rng, n: usize) -> PauliString {
    loop {
        let p = random_pauli(r, n);
        if !p.is_identity() {
            return p;
        }
    }
}

pub fn random_sum(r: &mut impl Rng, n: usize, terms: usize) -> PauliSum {
    let mut h = PauliSum::new(n);
    for _ in 0..terms {
        h.add_term(random_pauli(r, n), r.gen_range(-1.0..1.0)).unwrap();
    }
    h
}

/// Random Hamiltonian built only from terms commuting with `s`.
pub fn random_commuting_sum(r: &mut impl Rng, s: &PauliString, terms: usize) -> PauliSum {
    let n = s.n_qubits();
    let mut h = PauliSum::new(n);
    while h.len() < terms {
        let p = random_pauli(r, n);
        if p.commutes(s).unwrap() {
            h.add_term(p, r.gen_range(-1.0..1.0)).unwrap();
        }
    }
    h
}

/// All `4^n` unsigned Pauli strings.
pub fn all_paulis(n: usize) -> Vec<PauliString> {
    (0..4usize.pow(n as u32))
        .map(|k| {
            let letters: Vec<Letter> =
                (0..n).map(|q| [Letter::I, Letter::X, Letter::Y, Letter::Z][(k >> (2 * q)) & 3]).collect();
            PauliString::from_letters(&letters)
        })
        .collect()
}

pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `exp(−i a P)` for a Hermitian Pauli matrix `P`.
pub fn pauli_exp(p: &PauliString, a: f64) -> CMatrix {
    let m = p.dense_matrix().unwrap();
    let d = m.nrows();
    CMatrix::identity(d, d) * c(a.cos(), 0.0) - m * c(0.0, a.sin())
}

/// Max-norm distance between `u` and `v` after removing a global phase.
pub fn phase_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let (mut best, mut idx) = (0.0, (0, 0));
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            if v[(i, j)].norm() > best {
                best = v[(i, j)].norm();
                idx = (i, j);
            }
        }
    }
    let ph = u[idx] / v[idx];
    let ph = ph / ph.norm();
    max_norm(&(u - v * ph))
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut e: Vec<f64> = nalgebra::SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn outer(v: &[Complex64]) -> CMatrix {
    let d = v.len();
    DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj())
}

/// Statevector simulator over bit manipulation, qubit 0 most significant.
/// Measurement markers are skipped; a reset is only allowed on `|0…0⟩` wires
/// and is treated as a no-op.
pub fn statevector_run(circ: &symverify::circuitlib::Circuit, psi: &[Complex64]) -> Vec<Complex64> {
    use symverify::circuitlib::{Axis, GateKind};
    let n = circ.n_qubits();
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut v = psi.to_vec();
    for &g in &circ.time_order() {
        let gate = &circ.gates()[g];
        let q = &gate.qubits;
        match gate.kind {
            GateKind::Measure | GateKind::Prepare => {}
            GateKind::Rotation { axis, angle } => {
                let (s, co) = (angle / 2.0).sin_cos();
                let m = match axis {
                    Axis::X => [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]],
                    Axis::Y => [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
                    Axis::Z => [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]],
                };
                let b = bit(q[0]);
                for i in 0..v.len() {
                    if i & b == 0 {
                        let (a0, a1) = (v[i], v[i | b]);
                        v[i] = m[0][0] * a0 + m[0][1] * a1;
                        v[i | b] = m[1][0] * a0 + m[1][1] * a1;
                    }
                }
            }
            GateKind::Cnot => {
                let (cb, tb) = (bit(q[0]), bit(q[1]));
                for i in 0..v.len() {
                    if i & cb != 0 && i & tb == 0 {
                        v.swap(i, i | tb);
                    }
                }
            }
            GateKind::Cz => {
                let (ab, bb) = (bit(q[0]), bit(q[1]));
                for (i, z) in v.iter_mut().enumerate() {
                    if i & ab != 0 && i & bb != 0 {
                        *z = -*z;
                    }
                }
            }
            GateKind::Swap => {
                let (ab, bb) = (bit(q[0]), bit(q[1]));
                for i in 0..v.len() {
                    if i & ab != 0 && i & bb == 0 {
                        v.swap(i, i ^ ab ^ bb);
                    }
                }
            }
        }
    }
    v
}

/// Unitary of a reset-free circuit, column by column from the statevector oracle.
pub fn oracle_unitary(circ: &symverify::circuitlib::Circuit) -> CMatrix {
    let d = 1usize << circ.n_qubits();
    let mut u = CMatrix::zeros(d, d);
    for col in 0..d {
        let mut e = vec![c(0.0, 0.0); d];
        e[col] = c(1.0, 0.0);
        for (r, z) in statevector_run(circ, &e).into_iter().enumerate() {
            u[(r, col)] = z;
        }
    }
    u
}

/// Circuit with the reset slots removed.
pub fn without_resets(circ: &symverify::circuitlib::Circuit) -> symverify::circuitlib::Circuit {
    use symverify::circuitlib::{Circuit, GateKind};
    let mut out = Circuit::new(circ.n_qubits());
    for &g in &circ.time_order() {
        let gate = &circ.gates()[g];
        if gate.kind != GateKind::Prepare {
            out.push(gate.clone()).unwrap();
        }
    }
    out
}
