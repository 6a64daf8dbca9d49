//! Timed circuits, Pauli-exponential synthesis, the VQE ansätze and the
//! ancilla / in-line symmetry-verification circuits.
//!
//! Times are integer picoseconds so that schedules add up exactly.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{CMatrix, Letter, PauliString, SymmetrySpec, MAX_DENSE_QUBITS};

/// Duration of one gate layer, 20 ns.
pub const LAYER_PS: u64 = 20_000;

/// Scheduled length of the two-qubit ansatz.
pub const UCC_2Q_TOTAL_PS: u64 = 220_000;
/// Scheduled length of the unrotated four-qubit ansatz.
pub const UCC_4Q_TOTAL_PS: u64 = 400_000;
/// Scheduled length of the rotated four-qubit ansatz.
pub const UCC_4Q_ROTATED_TOTAL_PS: u64 = 440_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn letter(self) -> Letter {
        match self {
            Axis::X => Letter::X,
            Axis::Y => Letter::Y,
            Axis::Z => Letter::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GateKind {
    /// `exp(−i·angle/2·σ_axis)`.
    Rotation {
        axis: Axis,
        angle: f64,
    },
    /// Control first, target second.
    Cnot,
    Cz,
    Swap,
    /// Reset of every listed qubit to `|0⟩`.
    Prepare,
    /// Z-basis verification readout; a marker for the post-selection step.
    Measure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub duration_ps: u64,
}

impl Gate {
    pub fn rotation(axis: Axis, angle: f64, q: usize) -> Gate {
        Gate { kind: GateKind::Rotation { axis, angle }, qubits: vec![q], duration_ps: LAYER_PS }
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate { kind: GateKind::Cnot, qubits: vec![control, target], duration_ps: LAYER_PS }
    }

    pub fn cz(a: usize, b: usize) -> Gate {
        Gate { kind: GateKind::Cz, qubits: vec![a, b], duration_ps: LAYER_PS }
    }

    pub fn swap(a: usize, b: usize) -> Gate {
        Gate { kind: GateKind::Swap, qubits: vec![a, b], duration_ps: LAYER_PS }
    }

    pub fn prepare(qubits: Vec<usize>, duration_ps: u64) -> Gate {
        Gate { kind: GateKind::Prepare, qubits, duration_ps }
    }

    pub fn measure(q: usize) -> Gate {
        Gate { kind: GateKind::Measure, qubits: vec![q], duration_ps: 0 }
    }

    /// Matrix on the gate's own qubits, in the listed order.
    pub fn unitary(&self) -> Result<CMatrix> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        match self.kind {
            GateKind::Rotation { axis, angle } => {
                let s = PauliString::single(1, 0, axis.letter()).dense_matrix()?;
                let (sn, cs) = (angle / 2.0).sin_cos();
                Ok(CMatrix::identity(2, 2) * Complex64::new(cs, 0.0) - s * Complex64::new(0.0, sn))
            }
            GateKind::Cnot => Ok(CMatrix::from_row_slice(4, 4, &[l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o])),
            GateKind::Cz => Ok(CMatrix::from_row_slice(4, 4, &[l, o, o, o, o, l, o, o, o, o, l, o, o, o, o, -l])),
            GateKind::Swap => Ok(CMatrix::from_row_slice(4, 4, &[l, o, o, o, o, o, l, o, o, l, o, o, o, o, o, l])),
            GateKind::Prepare | GateKind::Measure => {
                Err(Error::Domain(format!("{:?} is not a unitary gate", self.kind)))
            }
        }
    }

    fn is_physical(&self) -> bool {
        !matches!(self.kind, GateKind::Measure)
    }
}

/// Two-qubit primitive used by Pauli-exponential ladders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderStyle {
    /// CNOT as a single native gate.
    Cnot,
    /// CNOT compiled as `Ry(π/2)_t · CZ · Ry(−π/2)_t`.
    CzNative,
}

/// Gates with per-gate start times.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    start_ps: Vec<u64>,
    busy: Vec<u64>,
}

impl Circuit {
    pub fn new(n: usize) -> Circuit {
        assert!(n >= 1, "circuit needs at least one qubit");
        Circuit { n, gates: Vec::new(), start_ps: Vec::new(), busy: vec![0; n] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn start_ps(&self) -> &[u64] {
        &self.start_ps
    }

    /// End of the last gate.
    pub fn total_duration_ps(&self) -> u64 {
        self.gates.iter().zip(&self.start_ps).map(|(g, s)| s + g.duration_ps).max().unwrap_or(0)
    }

    pub fn total_duration(&self) -> f64 {
        self.total_duration_ps() as f64 * 1e-12
    }

    /// Number of 20 ns layers spanned by the schedule.
    pub fn depth_layers(&self) -> u64 {
        self.total_duration_ps().div_ceil(LAYER_PS)
    }

    fn validate_gate(&self, g: &Gate) -> Result<()> {
        if g.qubits.is_empty() {
            return Err(Error::Domain("gate without qubits".into()));
        }
        for (i, &q) in g.qubits.iter().enumerate() {
            if q >= self.n {
                return Err(Error::Dimension(format!("qubit {q} out of range for {} qubits", self.n)));
            }
            if g.qubits[..i].contains(&q) {
                return Err(Error::Dimension(format!("gate repeats qubit {q}")));
            }
        }
        let arity_ok = match g.kind {
            GateKind::Rotation { .. } | GateKind::Measure => g.qubits.len() == 1,
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => g.qubits.len() == 2,
            GateKind::Prepare => true,
        };
        if !arity_ok {
            return Err(Error::Dimension(format!("{:?} on {} qubits", g.kind, g.qubits.len())));
        }
        if g.is_physical() && g.duration_ps == 0 {
            return Err(Error::Domain(format!("{:?} needs a positive duration", g.kind)));
        }
        Ok(())
    }

    /// Appends a gate at the earliest time its qubits are free.
    pub fn push(&mut self, g: Gate) -> Result<()> {
        self.push_not_before(g, 0)
    }

    /// Appends a gate no earlier than `earliest_ps`.
    pub fn push_not_before(&mut self, g: Gate, earliest_ps: u64) -> Result<()> {
        self.validate_gate(&g)?;
        let start = g.qubits.iter().map(|&q| self.busy[q]).max().unwrap_or(0).max(earliest_ps);
        for &q in &g.qubits {
            self.busy[q] = start + g.duration_ps;
        }
        self.gates.push(g);
        self.start_ps.push(start);
        Ok(())
    }

    /// Time at which `q` becomes free.
    pub fn busy_until(&self, q: usize) -> u64 {
        self.busy[q]
    }

    /// Gate indices grouped by start time, in increasing time order.
    pub fn moments(&self) -> Vec<(u64, Vec<usize>)> {
        let mut map: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, &s) in self.start_ps.iter().enumerate() {
            map.entry(s).or_default().push(i);
        }
        map.into_iter().collect()
    }

    /// Gate indices in execution order.
    pub fn time_order(&self) -> Vec<usize> {
        self.moments().into_iter().flat_map(|(_, g)| g).collect()
    }

    /// Checks that no two physical gates overlap on a shared qubit.
    pub fn check_schedule(&self) -> Result<()> {
        for i in 0..self.gates.len() {
            for j in i + 1..self.gates.len() {
                let (a, b) = (&self.gates[i], &self.gates[j]);
                if !a.is_physical() || !b.is_physical() {
                    continue;
                }
                if a.qubits.iter().any(|q| b.qubits.contains(q)) {
                    let (sa, sb) = (self.start_ps[i], self.start_ps[j]);
                    if sa < sb + b.duration_ps && sb < sa + a.duration_ps {
                        return Err(Error::Domain(format!("gates {i} and {j} overlap in time")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Appends `exp(−i·angle·P)` via basis changes, a ladder onto the last
    /// active qubit, `Rz(2·angle)` and the mirrored ladder.
    pub fn push_pauli_exponential(&mut self, p: &PauliString, angle: f64, style: LadderStyle) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::Dimension(format!("{}-qubit exponent in a {}-qubit circuit", p.n_qubits(), self.n)));
        }
        let sign = p.sign().ok_or_else(|| Error::Domain(format!("exponent {p} is not Hermitian")))?;
        let angle = angle * sign;
        let act = p.support();
        let Some(&last) = act.last() else {
            return Ok(());
        };
        for &q in &act {
            if let Some(g) = basis_change(p.letter(q), q, false) {
                self.push(g)?;
            }
        }
        let pairs: Vec<(usize, usize)> = act.windows(2).map(|w| (w[0], w[1])).collect();
        for &(c, t) in &pairs {
            self.push_cnot(c, t, style)?;
        }
        self.push(Gate::rotation(Axis::Z, 2.0 * angle, last))?;
        for &(c, t) in pairs.iter().rev() {
            self.push_cnot(c, t, style)?;
        }
        for &q in &act {
            if let Some(g) = basis_change(p.letter(q), q, true) {
                self.push(g)?;
            }
        }
        Ok(())
    }

    pub fn push_cnot(&mut self, control: usize, target: usize, style: LadderStyle) -> Result<()> {
        match style {
            LadderStyle::Cnot => self.push(Gate::cnot(control, target)),
            LadderStyle::CzNative => {
                self.push(Gate::rotation(Axis::Y, -FRAC_PI_2, target))?;
                self.push(Gate::cz(control, target))?;
                self.push(Gate::rotation(Axis::Y, FRAC_PI_2, target))
            }
        }
    }

    /// Appends every gate of `other`, rescheduled after the current gates.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::Dimension(format!("appending a {}-qubit circuit to {} qubits", other.n, self.n)));
        }
        for i in other.time_order() {
            self.push(other.gates[i].clone())?;
        }
        Ok(())
    }

    /// The same gate sequence rescheduled as soon as possible with new gate
    /// durations. Reset slots keep their length in layers of the longer gate.
    pub fn retimed(&self, one_qubit_ps: u64, two_qubit_ps: u64) -> Result<Circuit> {
        if one_qubit_ps == 0 || two_qubit_ps == 0 {
            return Err(Error::Domain("gate durations must be positive".into()));
        }
        let layer = one_qubit_ps.max(two_qubit_ps);
        let mut out = Circuit::new(self.n);
        for i in self.time_order() {
            let g = &self.gates[i];
            let duration_ps = match g.kind {
                GateKind::Rotation { .. } => one_qubit_ps,
                GateKind::Cnot | GateKind::Cz | GateKind::Swap => two_qubit_ps,
                GateKind::Prepare => g.duration_ps.div_ceil(LAYER_PS) * layer,
                GateKind::Measure => 0,
            };
            out.push(Gate { kind: g.kind, qubits: g.qubits.clone(), duration_ps })?;
        }
        Ok(out)
    }

    /// Full unitary (global phase included). Measurement markers are skipped.
    pub fn unitary(&self) -> Result<CMatrix> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: self.n, max: MAX_DENSE_QUBITS });
        }
        let dim = 1usize << self.n;
        let mut u = CMatrix::identity(dim, dim);
        for i in self.time_order() {
            let g = &self.gates[i];
            if g.kind == GateKind::Measure {
                continue;
            }
            let local = g.unitary()?;
            u = embed(&local, &g.qubits, self.n) * u;
        }
        Ok(u)
    }

    /// Inverse of the unitary part, scheduled as soon as possible.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.n);
        for i in self.time_order().into_iter().rev() {
            let g = &self.gates[i];
            let kind = match g.kind {
                GateKind::Rotation { axis, angle } => GateKind::Rotation { axis, angle: -angle },
                GateKind::Measure => continue,
                GateKind::Prepare => return Err(Error::Domain("reset has no inverse".into())),
                k => k,
            };
            out.push(Gate { kind, qubits: g.qubits.clone(), duration_ps: g.duration_ps })?;
        }
        Ok(out)
    }

    pub fn to_doc(&self) -> CircuitDoc {
        let gates = self
            .time_order()
            .into_iter()
            .map(|i| GateDoc {
                op: self.gates[i].kind,
                qubits: self.gates[i].qubits.clone(),
                start_ps: self.start_ps[i],
                duration_ps: self.gates[i].duration_ps,
            })
            .collect();
        CircuitDoc { n_qubits: self.n, total_duration_ps: self.total_duration_ps(), gates }
    }

    pub fn from_doc(doc: &CircuitDoc) -> Result<Circuit> {
        let mut c = Circuit::new(doc.n_qubits);
        for g in &doc.gates {
            let gate = Gate { kind: g.op, qubits: g.qubits.clone(), duration_ps: g.duration_ps };
            c.validate_gate(&gate)?;
            for &q in &gate.qubits {
                c.busy[q] = c.busy[q].max(g.start_ps + g.duration_ps);
            }
            c.gates.push(gate);
            c.start_ps.push(g.start_ps);
        }
        c.check_schedule()?;
        if c.total_duration_ps() != doc.total_duration_ps {
            return Err(Error::Parse(format!(
                "declared duration {} ps, schedule ends at {} ps",
                doc.total_duration_ps,
                c.total_duration_ps()
            )));
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("circuit documents serialize")
    }

    pub fn from_json(s: &str) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Circuit::from_doc(&doc)
    }
}

/// Serialized form of a [`Circuit`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitDoc {
    pub n_qubits: usize,
    pub total_duration_ps: u64,
    pub gates: Vec<GateDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDoc {
    #[serde(flatten)]
    pub op: GateKind,
    pub qubits: Vec<usize>,
    pub start_ps: u64,
    pub duration_ps: u64,
}

/// Embeds a `2^k` gate acting on `qubits` into the full register.
pub fn embed(u: &CMatrix, qubits: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let k = qubits.len();
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mask: usize = qubits.iter().map(|&q| bit(q)).fold(0, |a, b| a | b);
    let sub_index =
        |i: usize| -> usize { qubits.iter().fold(0usize, |acc, &q| acc << 1 | usize::from(i & bit(q) != 0)) };
    let spread = |j: usize| -> usize {
        let mut o = 0usize;
        for (idx, &q) in qubits.iter().enumerate() {
            if j >> (k - 1 - idx) & 1 == 1 {
                o |= bit(q);
            }
        }
        o
    };
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let rest = col & !mask;
        let sc = sub_index(col);
        for j in 0..(1usize << k) {
            let v = u[(j, sc)];
            if v != Complex64::new(0.0, 0.0) {
                out[(rest | spread(j), col)] = v;
            }
        }
    }
    out
}

/// Rotation mapping the +1 eigenstate of `letter` to `|0⟩`, or its inverse.
///
/// X uses `exp(iπ/4·Y) = Ry(−π/2)` and Y uses `exp(−iπ/4·X) = Rx(π/2)`.
fn basis_change(letter: Letter, q: usize, inverse: bool) -> Option<Gate> {
    let s = if inverse { -1.0 } else { 1.0 };
    match letter {
        Letter::X => Some(Gate::rotation(Axis::Y, -s * FRAC_PI_2, q)),
        Letter::Y => Some(Gate::rotation(Axis::X, s * FRAC_PI_2, q)),
        _ => None,
    }
}

/// Two-qubit UCC ansatz: `|01⟩` followed by `exp(−iθ X₀Y₁)`.
///
/// A one-layer reset opens the schedule, giving 220 ns in total.
pub fn ucc_2q(theta: f64) -> Circuit {
    let mut c = Circuit::new(2);
    c.push(Gate::prepare(vec![0, 1], LAYER_PS)).expect("valid gate");
    c.push(Gate::rotation(Axis::X, PI, 1)).expect("valid gate");
    c.push_pauli_exponential(&PauliString::lit("XY"), theta, LadderStyle::CzNative).expect("valid exponent");
    c
}

/// The rotation `R = exp(iπ/4·Y₀X₂) exp(iπ/4·Y₁X₃)` as Pauli exponentials
/// `(P, a)` meaning `exp(−i·a·P)`, rightmost factor first.
pub fn rotation_r_factors() -> [(PauliString, f64); 2] {
    [(PauliString::lit("IYIX"), -FRAC_PI_4), (PauliString::lit("YIXI"), -FRAC_PI_4)]
}

/// Four-qubit UCC ansatz from `|1100⟩`.
///
/// Unrotated: `exp(iθ Y₀X₁X₂X₃)`, 400 ns. Rotated: prepares `R|1100⟩` and
/// applies `exp(iθ Y₀Z₁X₂) = R exp(iθ Y₀X₁X₂X₃) R†`, 440 ns. Each opens
/// with a reset slot of two (unrotated) or three (rotated) layers.
pub fn ucc_4q(theta: f64, rotated: bool) -> Circuit {
    let mut c = Circuit::new(4);
    let reset_layers = if rotated { 3 } else { 2 };
    c.push(Gate::prepare(vec![0, 1, 2, 3], reset_layers * LAYER_PS)).expect("valid gate");
    c.push(Gate::rotation(Axis::X, PI, 0)).expect("valid gate");
    c.push(Gate::rotation(Axis::X, PI, 1)).expect("valid gate");
    if rotated {
        for (p, a) in rotation_r_factors() {
            c.push_pauli_exponential(&p, a, LadderStyle::CzNative).expect("valid exponent");
        }
        c.push_pauli_exponential(&PauliString::lit("YZXI"), -theta, LadderStyle::CzNative).expect("valid exponent");
    } else {
        c.push_pauli_exponential(&PauliString::lit("YXXX"), -theta, LadderStyle::CzNative).expect("valid exponent");
    }
    c
}

/// A verification circuit and how to read its result.
#[derive(Clone, Debug)]
pub struct VerificationCircuit {
    pub circuit: Circuit,
    pub symmetry: SymmetrySpec,
    /// Wire whose Z eigenvalue equals the symmetry eigenvalue.
    pub readout: usize,
    /// `data_wires[j]` is the wire holding system qubit `j` at the end.
    pub data_wires: Vec<usize>,
}

impl VerificationCircuit {
    /// Z on the readout wire with the symmetry's sector.
    pub fn readout_symmetry(&self) -> SymmetrySpec {
        let op = PauliString::single(self.circuit.n_qubits(), self.readout, Letter::Z);
        SymmetrySpec { operator: op, sector: self.symmetry.sector }
    }
}

/// Ancilla verification of `s` with the ancilla as the last wire.
///
/// With `local_only` the ancilla sits next to qubit 0 on a line
/// `anc, 0, 1, …` and the parity carrier is walked along it with SWAPs, so
/// every two-qubit gate acts on neighbours.
pub fn ancilla_verification(s: &SymmetrySpec, local_only: bool) -> Result<VerificationCircuit> {
    let n = s.n_qubits();
    let act = s.operator.support();
    if act.is_empty() {
        return Err(Error::Domain("cannot verify the identity".into()));
    }
    if n + 1 > MAX_DENSE_QUBITS {
        return Err(Error::Capacity { qubits: n + 1, max: MAX_DENSE_QUBITS });
    }
    let anc = n;
    let mut c = Circuit::new(n + 1);
    let mut wire: Vec<usize> = (0..n).collect();
    let mut readout = anc;
    if !local_only {
        for &q in &act {
            if let Some(g) = basis_change(s.operator.letter(q), q, false) {
                c.push(g)?;
            }
            c.push(Gate::cnot(q, anc))?;
            if let Some(g) = basis_change(s.operator.letter(q), q, true) {
                c.push(g)?;
            }
        }
    } else {
        let last = *act.last().expect("non-empty");
        let mut carrier = anc;
        let mut fresh = true;
        for j in 0..=last {
            let letter = s.operator.letter(j);
            if letter == Letter::I {
                if j < last {
                    c.push(Gate::swap(wire[j], carrier))?;
                    std::mem::swap(&mut wire[j], &mut carrier);
                }
                continue;
            }
            if let Some(g) = basis_change(letter, wire[j], false) {
                let ready = c.busy_until(carrier).saturating_sub(g.duration_ps);
                c.push_not_before(g, ready)?;
            }
            c.push(Gate::cnot(wire[j], carrier))?;
            if fresh {
                // data and carrier now hold identical bits: relabel instead of swapping
                std::mem::swap(&mut wire[j], &mut carrier);
                fresh = false;
            } else if j < last {
                c.push(Gate::swap(wire[j], carrier))?;
                std::mem::swap(&mut wire[j], &mut carrier);
            }
            if let Some(g) = basis_change(letter, wire[j], true) {
                c.push(g)?;
            }
        }
        readout = carrier;
    }
    c.push(Gate::measure(readout))?;
    Ok(VerificationCircuit { circuit: c, symmetry: *s, readout, data_wires: wire })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    /// Binary-tree fan-in, `⌈log₂ N_S⌉` CNOT layers.
    Tree,
    /// Chain fan-in, `N_S − 1` CNOT layers.
    Linear,
}

/// In-line verification: basis changes, then a CNOT fan-in that leaves the
/// parity of `s` on its highest-indexed non-trivial qubit.
pub fn inline_verification(s: &SymmetrySpec, topology: Topology) -> Result<VerificationCircuit> {
    let n = s.n_qubits();
    let act = s.operator.support();
    if act.len() < 2 {
        return Err(Error::Domain(format!("in-line verification needs weight ≥ 2, {} has {}", s.operator, act.len())));
    }
    let mut c = Circuit::new(n);
    for &q in &act {
        if let Some(g) = basis_change(s.operator.letter(q), q, false) {
            c.push(g)?;
        }
    }
    match topology {
        Topology::Linear => {
            for w in act.windows(2) {
                c.push(Gate::cnot(w[0], w[1]))?;
            }
        }
        Topology::Tree => {
            let mut holders = act.clone();
            while holders.len() > 1 {
                let mut next = Vec::with_capacity(holders.len().div_ceil(2));
                let odd = holders.len() % 2 == 1;
                if odd {
                    next.push(holders[0]);
                }
                let start = usize::from(odd);
                for pair in holders[start..].chunks(2) {
                    c.push(Gate::cnot(pair[0], pair[1]))?;
                    next.push(pair[1]);
                }
                holders = next;
            }
        }
    }
    let target = *act.last().expect("non-empty");
    c.push(Gate::measure(target))?;
    Ok(VerificationCircuit { circuit: c, symmetry: *s, readout: target, data_wires: (0..n).collect() })
}

/// Returns `U P U†`: measuring the result after the circuit is equivalent
/// to measuring `p` before it. Measurement markers are transparent.
pub fn propagate_pauli(c: &Circuit, p: &PauliString) -> Result<PauliString> {
    if p.n_qubits() != c.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit operator through a {}-qubit circuit",
            p.n_qubits(),
            c.n_qubits()
        )));
    }
    let mut cur = *p;
    for i in c.time_order() {
        cur = conjugate_by_gate(&c.gates()[i], &cur)?;
    }
    Ok(cur)
}

/// `G P G†` for a Clifford gate `G`.
pub fn conjugate_by_gate(g: &Gate, p: &PauliString) -> Result<PauliString> {
    let n = p.n_qubits();
    let single = |q: usize, l: Letter| PauliString::single(n, q, l);
    let image = |q: usize, l: Letter| -> Result<PauliString> {
        match g.kind {
            GateKind::Measure => Ok(single(q, l)),
            GateKind::Prepare => Err(Error::Domain("reset is not a Clifford gate".into())),
            GateKind::Rotation { axis, angle } => {
                let k = angle / FRAC_PI_2;
                let kr = k.round();
                if (k - kr).abs() > 1e-12 {
                    return Err(Error::Domain(format!("rotation by {angle} is not Clifford")));
                }
                let base = single(q, l);
                if q != g.qubits[0] || l == axis.letter() {
                    return Ok(base);
                }
                // exp(−iθσ/2) P exp(iθσ/2) = P (cos θ + i sin θ σ) for anticommuting P
                let sigma = single(q, axis.letter());
                let prod = base.multiply(&sigma)?;
                Ok(match (kr as i64).rem_euclid(4) {
                    0 => base,
                    1 => prod.with_phase(prod.phase() + 1),
                    2 => base.negate(),
                    _ => prod.with_phase(prod.phase() + 3),
                })
            }
            GateKind::Cnot => {
                let (ctl, tgt) = (g.qubits[0], g.qubits[1]);
                Ok(match (q, l) {
                    (q, Letter::X) if q == ctl => single(ctl, Letter::X).multiply(&single(tgt, Letter::X))?,
                    (q, Letter::Z) if q == tgt => single(ctl, Letter::Z).multiply(&single(tgt, Letter::Z))?,
                    _ => single(q, l),
                })
            }
            GateKind::Cz => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                Ok(match (q, l) {
                    (q, Letter::X) if q == a => single(a, Letter::X).multiply(&single(b, Letter::Z))?,
                    (q, Letter::X) if q == b => single(a, Letter::Z).multiply(&single(b, Letter::X))?,
                    _ => single(q, l),
                })
            }
            GateKind::Swap => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                Ok(if q == a {
                    single(b, l)
                } else if q == b {
                    single(a, l)
                } else {
                    single(q, l)
                })
            }
        }
    };
    let mut out = PauliString::identity(n).with_phase(p.phase());
    for q in 0..n {
        let l = p.letter(q);
        let img = match l {
            Letter::I => continue,
            Letter::X | Letter::Z => image(q, l)?,
            Letter::Y => {
                // Y = i X Z
                let xz = image(q, Letter::X)?.multiply(&image(q, Letter::Z)?)?;
                xz.with_phase(xz.phase() + 1)
            }
        };
        out = out.multiply(&img)?;
    }
    Ok(out)
}
