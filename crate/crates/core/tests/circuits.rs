mod common;

use common::verification::*;
use common::*;
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use symverify::circuitlib::*;
use symverify::pauli::{CMatrix, Letter, PauliString, SymmetrySpec};
use symverify::{simulate, DensityMatrix, Error};

fn reset_layers(c: &Circuit) -> u64 {
    c.gates().iter().filter(|g| g.kind == GateKind::Prepare).map(|g| g.duration_ps / LAYER_PS).sum()
}

#[test]
fn ansatz_durations() {
    let cases = [(ucc_2q(0.3), 220_000, 10), (ucc_4q(0.3, false), 400_000, 18), (ucc_4q(0.3, true), 440_000, 19)];
    for (c, total, body) in cases {
        assert_eq!(c.total_duration_ps(), total);
        assert_eq!(c.depth_layers() - reset_layers(&c), body);
        c.check_schedule().unwrap();
    }
    assert_eq!(UCC_2Q_TOTAL_PS, 220_000);
    assert_eq!(UCC_4Q_TOTAL_PS, 400_000);
    assert_eq!(UCC_4Q_ROTATED_TOTAL_PS, 440_000);
}

#[test]
fn ansatz_states_match_exponentials() {
    let mut r = rng(31);
    for _ in 0..10 {
        let theta = r.gen_range(-3.0..3.0);
        let two = simulate(&ucc_2q(theta), None, &DensityMatrix::initial_state("00").unwrap()).unwrap();
        let hf = DensityMatrix::initial_state("01").unwrap();
        let u = pauli_exp(&PauliString::lit("XY"), theta);
        assert!(max_norm(&(two.matrix() - &u * hf.matrix() * u.adjoint())) < 1e-10);

        let hf4 = DensityMatrix::initial_state("1100").unwrap();
        let u4 = pauli_exp(&PauliString::lit("YXXX"), -theta);
        let want = &u4 * hf4.matrix() * u4.adjoint();
        let four = simulate(&ucc_4q(theta, false), None, &DensityMatrix::initial_state("0000").unwrap()).unwrap();
        assert!(max_norm(&(four.matrix() - &want)) < 1e-10);

        let rot = pauli_exp(&PauliString::lit("YIXI"), -FRAC_PI_4) * pauli_exp(&PauliString::lit("IYIX"), -FRAC_PI_4);
        let rotated = simulate(&ucc_4q(theta, true), None, &DensityMatrix::initial_state("0000").unwrap()).unwrap();
        assert!(max_norm(&(rotated.matrix() - &rot * &want * rot.adjoint())) < 1e-10);
    }
}

#[test]
fn pauli_exponentials_synthesize_their_unitary() {
    let mut r = rng(32);
    for _ in 0..100 {
        let n = r.gen_range(1..=4);
        let p = random_nontrivial_pauli(&mut r, n);
        let p = if r.gen_bool(0.5) { p } else { p.negate() };
        let a = r.gen_range(-3.0..3.0);
        for style in [LadderStyle::Cnot, LadderStyle::CzNative] {
            let mut c = Circuit::new(n);
            c.push_pauli_exponential(&p, a, style).unwrap();
            let want = pauli_exp(&p, a);
            assert!(phase_distance(&oracle_unitary(&c), &want) < 1e-10);
            assert!(phase_distance(&c.unitary().unwrap(), &want) < 1e-10);
        }
    }
}

#[test]
fn inverse_is_adjoint() {
    let mut r = rng(33);
    for _ in 0..30 {
        let mut c = Circuit::new(3);
        for _ in 0..4 {
            c.push_pauli_exponential(
                &random_nontrivial_pauli(&mut r, 3),
                r.gen_range(-2.0..2.0),
                LadderStyle::CzNative,
            )
            .unwrap();
        }
        c.push(Gate::swap(0, 2)).unwrap();
        let u = oracle_unitary(&c);
        let ui = oracle_unitary(&c.inverse().unwrap());
        assert!(max_norm(&(ui * u - CMatrix::identity(8, 8))) < 1e-10);
    }
    assert!(matches!(ucc_2q(0.1).inverse(), Err(Error::Domain(_))));
}

#[test]
fn json_round_trip() {
    let mut c = Circuit::new(2);
    c.push(Gate::rotation(Axis::Y, -FRAC_PI_2, 1)).unwrap();
    c.push(Gate::cnot(0, 1)).unwrap();
    c.push(Gate::measure(1)).unwrap();
    assert_eq!(c.to_json().trim(), include_str!("data/small_circuit.json").trim());
    for circ in
        [c, ucc_2q(0.7), ucc_4q(-1.1, true), ancilla_verification(&SymmetrySpec::lit("XYZ", -1), true).unwrap().circuit]
    {
        let back = Circuit::from_json(&circ.to_json()).unwrap();
        assert_eq!(back.to_json(), circ.to_json());
        assert_eq!(back.total_duration_ps(), circ.total_duration_ps());
    }
    assert!(Circuit::from_json("{\"n_qubits\": 2}").is_err());
}

#[test]
fn overlapping_schedule_rejected() {
    let doc = include_str!("data/small_circuit.json").replace("\"start_ps\": 20000", "\"start_ps\": 10000");
    assert!(Circuit::from_json(&doc).is_err());
}

#[test]
fn verification_circuits_project_experiment_symmetries() {
    let mut r = rng(34);
    for s in experiment_symmetries() {
        for _ in 0..5 {
            let rho = random_rho(&mut r, s.n_qubits());
            for local in [false, true] {
                let (e, p) = ancilla_oracle_check(&s, local, &rho);
                assert!(e <= 1e-10 && p <= 1e-10, "{s} local={local}: {e:e} {p:e}");
            }
            for topo in [Topology::Tree, Topology::Linear] {
                let (e, p) = inline_oracle_check(&s, topo, &rho);
                assert!(e <= 1e-10 && p <= 1e-10, "{s} {topo:?}: {e:e} {p:e}");
            }
        }
    }
}

#[test]
fn verification_circuits_project_random_symmetries() {
    let mut r = rng(35);
    for k in 0..60 {
        let n = 2 + k % 3;
        let rho = random_rho(&mut r, n);
        let s = random_symmetry(&mut r, n, 1);
        for local in [false, true] {
            let (e, p) = ancilla_oracle_check(&s, local, &rho);
            assert!(e <= 1e-10 && p <= 1e-10, "{s} local={local}: {e:e} {p:e}");
        }
        let s = random_symmetry(&mut r, n, 2);
        for topo in [Topology::Tree, Topology::Linear] {
            let (e, p) = inline_oracle_check(&s, topo, &rho);
            assert!(e <= 1e-10 && p <= 1e-10, "{s} {topo:?}: {e:e} {p:e}");
        }
    }
}

#[test]
fn local_ancilla_uses_neighbours_only() {
    let mut r = rng(36);
    for k in 0..100 {
        let n = 1 + k % 5;
        let s = random_symmetry(&mut r, n, 1);
        let v = ancilla_verification(&s, true).unwrap();
        // line order: ancilla, 0, 1, …
        let pos = |w: usize| if w == n { 0 } else { w + 1 };
        for g in v.circuit.gates() {
            if g.qubits.len() == 2 {
                assert_eq!(pos(g.qubits[0]).abs_diff(pos(g.qubits[1])), 1, "{s}: {g:?}");
            }
        }
        v.circuit.check_schedule().unwrap();
    }
}

/// First-to-last-gate window, in layers, of each system qubit's state as it
/// moves through SWAPs. After the first CNOT onto the fresh ancilla the two
/// wires hold the same bit and the data is followed on the ancilla wire.
fn content_windows(v: &VerificationCircuit) -> Vec<Option<u64>> {
    let c = &v.circuit;
    let n = c.n_qubits() - 1;
    let mut holder: Vec<usize> = (0..=n).collect();
    let mut span = vec![(u64::MAX, 0u64); n + 1];
    let mut fresh = true;
    let owner = |holder: &[usize], w: usize| holder.iter().position(|&h| h == w).unwrap();
    for i in c.time_order() {
        let g = &c.gates()[i];
        if g.kind == GateKind::Measure {
            continue;
        }
        let start = c.start_ps()[i];
        for &w in &g.qubits {
            let k = owner(&holder, w);
            span[k] = (span[k].0.min(start), span[k].1.max(start + g.duration_ps));
        }
        if g.kind == GateKind::Swap {
            let (a, b) = (owner(&holder, g.qubits[0]), owner(&holder, g.qubits[1]));
            holder.swap(a, b);
        }
        if g.kind == GateKind::Cnot && fresh && g.qubits[1] == holder[n] {
            let a = owner(&holder, g.qubits[0]);
            holder.swap(a, n);
            fresh = false;
        }
    }
    span[..n].iter().map(|&(lo, hi)| (hi > 0).then(|| (hi - lo).div_ceil(LAYER_PS))).collect()
}

#[test]
fn local_ancilla_duty_cycle_is_constant() {
    for n in 2..=5 {
        let z = SymmetrySpec::new(PauliString::from_letters(&vec![Letter::Z; n]), 1).unwrap();
        let v = ancilla_verification(&z, true).unwrap();
        assert!(content_windows(&v).iter().all(|w| w.unwrap() <= 3));
        assert_eq!(v.circuit.depth_layers() as usize, 2 * n - 2);
    }
    for s in experiment_symmetries() {
        let v = ancilla_verification(&s, true).unwrap();
        let bound = if s.operator.letters().iter().all(|&l| l == Letter::I || l == Letter::Z) { 3 } else { 4 };
        for w in content_windows(&v).into_iter().flatten() {
            assert!(w <= bound, "{s}: window {w}");
        }
    }
    let mut r = rng(37);
    for _ in 0..100 {
        let s = random_symmetry(&mut r, 5, 1);
        let v = ancilla_verification(&s, true).unwrap();
        assert!(content_windows(&v).into_iter().flatten().all(|w| w <= 4));
    }
}

#[test]
fn tree_root_spans_every_fan_in_layer() {
    for ns in 2..=6 {
        let s = SymmetrySpec::new(PauliString::from_letters(&vec![Letter::Z; ns]), 1).unwrap();
        let v = inline_verification(&s, Topology::Tree).unwrap();
        let layers = (ns as f64).log2().ceil() as u64;
        assert_eq!(v.circuit.depth_layers(), layers);
        let (mut lo, mut hi) = (u64::MAX, 0);
        for (g, &st) in v.circuit.gates().iter().zip(v.circuit.start_ps()) {
            if g.kind == GateKind::Cnot && g.qubits.contains(&v.readout) {
                lo = lo.min(st);
                hi = hi.max(st + g.duration_ps);
            }
        }
        assert_eq!((hi - lo) / LAYER_PS, layers);
        let lin = inline_verification(&s, Topology::Linear).unwrap();
        assert_eq!(lin.circuit.depth_layers() as usize, ns - 1);
        assert_eq!(v.readout, ns - 1);
    }
}

#[test]
fn verification_circuits_conserve_the_symmetry() {
    let mut r = rng(38);
    for k in 0..100 {
        let n = 2 + k % 3;
        let s = random_symmetry(&mut r, n, 2);
        for local in [false, true] {
            let v = ancilla_verification(&s, local).unwrap();
            let inverse = v.circuit.inverse().unwrap();
            // Heisenberg images must reduce to S on the system for an ancilla prepared in |0⟩
            let on_input = |q: PauliString| {
                let back = propagate_pauli(&inverse, &q).unwrap();
                assert_eq!(PauliString::from_letters(&back.letters()[..n]), s.operator, "{s} local={local}");
                assert!(matches!(back.letter(n), Letter::I | Letter::Z));
                assert_eq!(back.sign(), Some(1.0));
            };
            let mut moved = PauliString::identity(n + 1);
            for (j, &w) in v.data_wires.iter().enumerate() {
                moved.set_letter(w, s.operator.letter(j));
            }
            on_input(moved);
            on_input(PauliString::single(n + 1, v.readout, Letter::Z));
            if !local {
                let lifted = s.operator.tensor(&PauliString::identity(1));
                assert_eq!(propagate_pauli(&v.circuit, &lifted).unwrap(), lifted);
            }
        }
        for topo in [Topology::Tree, Topology::Linear] {
            let v = inline_verification(&s, topo).unwrap();
            let out = propagate_pauli(&v.circuit, &s.operator).unwrap();
            assert_eq!(out, PauliString::single(n, v.readout, Letter::Z), "{s} {topo:?}");
        }
    }
}

#[test]
fn propagation_matches_dense_conjugation() {
    let mut r = rng(39);
    for _ in 0..200 {
        let n = r.gen_range(1..=4);
        let mut c = Circuit::new(n);
        for _ in 0..8 {
            let a = r.gen_range(0..n);
            let b = (a + r.gen_range(1..n.max(2))) % n;
            let g = match r.gen_range(0..5) {
                0 => Gate::rotation(
                    [Axis::X, Axis::Y, Axis::Z][r.gen_range(0..3)],
                    FRAC_PI_2 * f64::from(r.gen_range(-3..4)),
                    a,
                ),
                1 if n > 1 => Gate::cnot(a, b),
                2 if n > 1 => Gate::cz(a, b),
                3 if n > 1 => Gate::swap(a, b),
                _ => Gate::measure(a),
            };
            c.push(g).unwrap();
        }
        let p = random_pauli(&mut r, n);
        let u = oracle_unitary(&c);
        let want = &u * p.dense_matrix().unwrap() * u.adjoint();
        let got = propagate_pauli(&c, &p).unwrap().dense_matrix().unwrap();
        assert!(max_norm(&(got - want)) < 1e-10);
    }
    let mut c = Circuit::new(1);
    c.push(Gate::rotation(Axis::X, 0.3, 0)).unwrap();
    assert!(matches!(propagate_pauli(&c, &PauliString::lit("Z")), Err(Error::Domain(_))));
}

#[test]
fn verification_capacity_and_domain_errors() {
    assert!(matches!(ancilla_verification(&SymmetrySpec::lit("ZZZZZZ", 1), false), Err(Error::Capacity { .. })));
    assert!(matches!(inline_verification(&SymmetrySpec::lit("IZI", 1), Topology::Linear), Err(Error::Domain(_))));
    let mut c = Circuit::new(2);
    assert!(matches!(c.push(Gate::cnot(0, 0)), Err(Error::Dimension(_))));
    assert!(matches!(c.push(Gate::rotation(Axis::X, 0.1, 5)), Err(Error::Dimension(_))));
}
