//! Verification circuits against direct projector application.

use rand::Rng;
use symverify::chemdata::{Encoding, MoleculeDataset};
use symverify::circuitlib::{ancilla_verification, inline_verification, Topology};
use symverify::experiments::{problem_frame, run_ancilla};
use symverify::mitigate::project_symmetry;
use symverify::pauli::SymmetrySpec;
use symverify::{simulate, DensityMatrix};

use super::*;

/// Every symmetry the experiments verify, in both frames.
pub fn experiment_symmetries() -> Vec<SymmetrySpec> {
    let point = MoleculeDataset::builtin().point_at(0.75).unwrap().clone();
    let mut out = Vec::new();
    for (enc, rotated) in [(Encoding::TwoQubitBk, false), (Encoding::FourQubitJw, false), (Encoding::FourQubitJw, true)]
    {
        out.extend(problem_frame(&point, enc, rotated).unwrap().1);
    }
    out
}

pub fn random_symmetry(r: &mut impl Rng, n: usize, min_weight: usize) -> SymmetrySpec {
    loop {
        let p = random_pauli(r, n);
        if p.weight() >= min_weight {
            return SymmetrySpec::new(p, if r.gen_bool(0.5) { 1 } else { -1 }).unwrap();
        }
    }
}

pub fn ancilla_oracle_check(s: &SymmetrySpec, local: bool, rho: &DensityMatrix) -> (f64, f64) {
    let v = ancilla_verification(s, local).unwrap();
    let after = simulate(&v.circuit, None, &rho.with_ancilla().unwrap()).unwrap();
    let (keep, _) = after.measure_pauli(&v.readout_symmetry(), 0.0).unwrap();
    let mut wires = v.data_wires.clone();
    wires.push(v.readout);
    let got = keep.post_state.unwrap().permute_qubits(&wires).unwrap().partial_trace(rho.n_qubits()).unwrap();
    let (want, p) = project_symmetry(rho, s).unwrap();
    let (piped, pp) = run_ancilla(&v, rho, None).unwrap();
    let state_err = got.max_abs_diff(&want).max(piped.max_abs_diff(&want));
    (state_err, (keep.probability - p).abs().max((pp - p).abs()))
}

pub fn inline_oracle_check(s: &SymmetrySpec, topology: Topology, rho: &DensityMatrix) -> (f64, f64) {
    let v = inline_verification(s, topology).unwrap();
    let after = simulate(&v.circuit, None, rho).unwrap();
    let (keep, _) = after.measure_pauli(&v.readout_symmetry(), 0.0).unwrap();
    let restored = simulate(&v.circuit.inverse().unwrap(), None, &keep.post_state.unwrap()).unwrap();
    let (want, p) = project_symmetry(rho, s).unwrap();
    (restored.max_abs_diff(&want), (keep.probability - p).abs())
}

/// Worst state and probability deviation over the experiment symmetries and
/// random symmetries on two to four qubits, for every circuit variant.
pub fn worst_projection_error(seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let mut worst = (0.0f64, 0.0f64);
    let mut note = |(e, p): (f64, f64)| worst = (worst.0.max(e), worst.1.max(p));
    for s in experiment_symmetries() {
        for _ in 0..5 {
            let rho = random_rho(&mut r, s.n_qubits());
            for local in [false, true] {
                note(ancilla_oracle_check(&s, local, &rho));
            }
            for topo in [Topology::Tree, Topology::Linear] {
                note(inline_oracle_check(&s, topo, &rho));
            }
        }
    }
    for k in 0..60 {
        let n = 2 + k % 3;
        let rho = random_rho(&mut r, n);
        let s = random_symmetry(&mut r, n, 1);
        for local in [false, true] {
            note(ancilla_oracle_check(&s, local, &rho));
        }
        let s = random_symmetry(&mut r, n, 2);
        for topo in [Topology::Tree, Topology::Linear] {
            note(inline_oracle_check(&s, topo, &rho));
        }
    }
    worst
}
