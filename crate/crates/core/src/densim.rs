//! Dense density-matrix simulation of timed circuits under a T1/Tφ,
//! gate-dephasing and readout-error noise model.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuitlib::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::pauli::{i_pow, pauli_trace, CMatrix, PauliString, PauliSum, SymmetrySpec, MAX_DENSE_QUBITS};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Noise parameters. Times are in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub t1: f64,
    pub tphi: f64,
    /// Z-dephasing probability applied after every single-qubit gate.
    pub p_deph_1q: f64,
    /// Z-dephasing probability applied to each qubit of a two-qubit gate.
    pub p_deph_2q: f64,
    /// Symmetric bit-flip probability on verification readout.
    pub p_readout: f64,
    pub duration_1q: f64,
    pub duration_2q: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            t1: 20e-6,
            tphi: 20e-6,
            p_deph_1q: 1e-4,
            p_deph_2q: 1e-2,
            p_readout: 1e-2,
            duration_1q: 20e-9,
            duration_2q: 20e-9,
        }
    }
}

impl NoiseModel {
    /// Amplitude damping and pure dephasing only; gate and readout errors off.
    pub fn decoherence_only(t1: f64, tphi: f64) -> NoiseModel {
        NoiseModel { t1, tphi, p_deph_1q: 0.0, p_deph_2q: 0.0, p_readout: 0.0, ..NoiseModel::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in
            [("t1", self.t1), ("tphi", self.tphi), ("duration_1q", self.duration_1q), ("duration_2q", self.duration_2q)]
        {
            if !(t > 0.0) || t.is_nan() {
                return Err(Error::Domain(format!("{name} must be positive, got {t}")));
            }
        }
        for (name, p) in [("p_deph_1q", self.p_deph_1q), ("p_deph_2q", self.p_deph_2q), ("p_readout", self.p_readout)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// A `2^N × 2^N` density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: CMatrix,
    normalized: bool,
}

/// One branch of a two-outcome measurement.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub probability: f64,
    /// `None` when the branch has vanishing probability.
    pub post_state: Option<DensityMatrix>,
    pub observed_value: i8,
}

fn bit(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

impl DensityMatrix {
    /// `|b⟩⟨b|` for a bitstring such as `"1100"`.
    pub fn initial_state(bits: &str) -> Result<DensityMatrix> {
        let n = bits.len();
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: n, max: MAX_DENSE_QUBITS });
        }
        let mut idx = 0usize;
        for ch in bits.chars() {
            idx <<= 1;
            match ch {
                '0' => {}
                '1' => idx |= 1,
                _ => return Err(Error::Parse(format!("bad bit {ch:?} in {bits:?}"))),
            }
        }
        let dim = 1usize << n;
        let mut data = CMatrix::zeros(dim, dim);
        data[(idx, idx)] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { n, data, normalized: true })
    }

    pub fn maximally_mixed(n: usize) -> Result<DensityMatrix> {
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: n, max: MAX_DENSE_QUBITS });
        }
        let dim = 1usize << n;
        Ok(DensityMatrix {
            n,
            data: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
            normalized: true,
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<DensityMatrix> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let m = &v * v.adjoint();
        DensityMatrix::from_matrix(m)
    }

    /// Wraps a matrix, checking shape, Hermiticity and unit trace.
    pub fn from_matrix(m: CMatrix) -> Result<DensityMatrix> {
        let dim = m.nrows();
        if dim != m.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "density matrix must be 2^N square, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: n, max: MAX_DENSE_QUBITS });
        }
        let rho = DensityMatrix { n, data: m, normalized: true };
        let herm = rho.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::Domain(format!("matrix not Hermitian (deviation {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("trace {tr} differs from 1")));
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Rescales to unit trace.
    pub fn normalize(&mut self) -> Result<()> {
        let tr = self.trace();
        if !(tr > 1e-300) {
            return Err(Error::Rejection("cannot normalize a zero-trace state".into()));
        }
        self.data *= Complex64::new(1.0 / tr, 0.0);
        self.normalized = true;
        Ok(())
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.data.clone().symmetric_eigenvalues().min()
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.data - &other.data).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n {
                return Err(Error::Dimension(format!("qubit {q} out of range for {} qubits", self.n)));
            }
            if qubits[..i].contains(&q) {
                return Err(Error::Dimension(format!("repeated qubit {q}")));
            }
        }
        Ok(())
    }

    /// `ρ → U ρ U†` with `u` acting on `qubits` (first listed is most significant).
    pub fn apply_unitary(&mut self, u: &CMatrix, qubits: &[usize]) -> Result<()> {
        self.check_qubits(qubits)?;
        let sub = 1usize << qubits.len();
        if u.nrows() != sub || u.ncols() != sub {
            return Err(Error::Dimension(format!("{}×{} gate on {} qubits", u.nrows(), u.ncols(), qubits.len())));
        }
        let dev = (u * u.adjoint() - CMatrix::identity(sub, sub)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(Error::Domain(format!("gate is not unitary (deviation {dev:.3e})")));
        }
        self.apply_unitary_unchecked(u, qubits);
        Ok(())
    }

    pub(crate) fn apply_unitary_unchecked(&mut self, u: &CMatrix, qubits: &[usize]) {
        let n = self.n;
        let dim = self.dim();
        let k = qubits.len();
        let sub = 1usize << k;
        let mut offsets = vec![0usize; sub];
        for (j, off) in offsets.iter_mut().enumerate() {
            for (idx, &q) in qubits.iter().enumerate() {
                if j >> (k - 1 - idx) & 1 == 1 {
                    *off |= bit(n, q);
                }
            }
        }
        let mask: usize = qubits.iter().map(|&q| bit(n, q)).fold(0, |a, b| a | b);
        let bases: Vec<usize> = (0..dim).filter(|i| i & mask == 0).collect();
        let mut v = vec![ZERO; sub];
        let m = &mut self.data;
        for col in 0..dim {
            for &b in &bases {
                for j in 0..sub {
                    v[j] = m[(b + offsets[j], col)];
                }
                for j in 0..sub {
                    let mut acc = ZERO;
                    for l in 0..sub {
                        acc += u[(j, l)] * v[l];
                    }
                    m[(b + offsets[j], col)] = acc;
                }
            }
        }
        for row in 0..dim {
            for &b in &bases {
                for j in 0..sub {
                    v[j] = m[(row, b + offsets[j])];
                }
                for j in 0..sub {
                    let mut acc = ZERO;
                    for l in 0..sub {
                        acc += v[l] * u[(j, l)].conj();
                    }
                    m[(row, b + offsets[j])] = acc;
                }
            }
        }
    }

    /// Amplitude damping with `γ = 1 − exp(−duration/T1)`.
    pub fn apply_amplitude_damping(&mut self, qubit: usize, duration: f64, model: &NoiseModel) -> Result<()> {
        self.check_qubits(&[qubit])?;
        if duration < 0.0 {
            return Err(Error::Domain(format!("negative duration {duration}")));
        }
        let gamma = 1.0 - (-duration / model.t1).exp();
        self.damp(qubit, gamma);
        Ok(())
    }

    fn damp(&mut self, qubit: usize, gamma: f64) {
        if gamma == 0.0 {
            return;
        }
        let b = bit(self.n, qubit);
        let dim = self.dim();
        let keep = (1.0 - gamma).sqrt();
        let m = &mut self.data;
        for r in (0..dim).filter(|r| r & b == 0) {
            for c in (0..dim).filter(|c| c & b == 0) {
                let p11 = m[(r | b, c | b)];
                m[(r, c)] += p11 * gamma;
                m[(r | b, c | b)] = p11 * (1.0 - gamma);
                m[(r, c | b)] *= keep;
                m[(r | b, c)] *= keep;
            }
        }
    }

    /// Pure dephasing: coherences in `qubit` decay by `exp(−duration/Tφ)`.
    pub fn apply_pure_dephasing(&mut self, qubit: usize, duration: f64, model: &NoiseModel) -> Result<()> {
        self.check_qubits(&[qubit])?;
        if duration < 0.0 {
            return Err(Error::Domain(format!("negative duration {duration}")));
        }
        let p = (1.0 - (-duration / model.tphi).exp()) / 2.0;
        self.dephase(qubit, p);
        Ok(())
    }

    /// `(1 − p) ρ + p ZρZ` on each listed qubit.
    pub fn apply_gate_dephasing(&mut self, qubits: &[usize], p: f64) -> Result<()> {
        self.check_qubits(qubits)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        for &q in qubits {
            self.dephase(q, p);
        }
        Ok(())
    }

    fn dephase(&mut self, qubit: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let b = bit(self.n, qubit);
        let f = 1.0 - 2.0 * p;
        let dim = self.dim();
        for c in 0..dim {
            for r in 0..dim {
                if (r ^ c) & b != 0 {
                    self.data[(r, c)] *= f;
                }
            }
        }
    }

    /// Replaces `qubit` with `|0⟩`, discarding its state.
    pub fn reset_qubit(&mut self, qubit: usize) -> Result<()> {
        self.check_qubits(&[qubit])?;
        let b = bit(self.n, qubit);
        let dim = self.dim();
        let m = &mut self.data;
        for r in (0..dim).filter(|r| r & b == 0) {
            for c in (0..dim).filter(|c| c & b == 0) {
                let v = m[(r | b, c | b)];
                m[(r, c)] += v;
                m[(r | b, c | b)] = ZERO;
                m[(r, c | b)] = ZERO;
                m[(r | b, c)] = ZERO;
            }
        }
        Ok(())
    }

    /// `Tr[P ρ]` for a single Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        if p.n_qubits() != self.n {
            return Err(Error::Dimension(format!("{}-qubit operator on a {}-qubit state", p.n_qubits(), self.n)));
        }
        Ok(pauli_trace(p, &self.data))
    }

    /// Real expectation of a Hermitian Pauli string.
    pub fn pauli_value(&self, p: &PauliString) -> Result<f64> {
        let v = self.pauli_expectation(p)?;
        if v.im.abs() > 1e-10 {
            return Err(Error::Domain(format!("expectation of {p} has imaginary part {:.3e}", v.im)));
        }
        Ok(v.re)
    }

    /// `Σ_P c_P Tr[P ρ]`.
    pub fn expectation(&self, obs: &PauliSum) -> Result<f64> {
        if obs.n_qubits() != self.n {
            return Err(Error::Dimension(format!("{}-qubit observable on a {}-qubit state", obs.n_qubits(), self.n)));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, c) in obs.terms() {
            acc += pauli_trace(p, &self.data) * c;
        }
        if acc.im.abs() > 1e-10 {
            return Err(Error::Domain(format!("expectation has imaginary part {:.3e}", acc.im)));
        }
        Ok(acc.re)
    }

    /// Unnormalized `M_s ρ M_s` with `M_s = ½(1 + sS)`.
    pub fn project_unnormalized(&self, s: &SymmetrySpec) -> Result<DensityMatrix> {
        if s.n_qubits() != self.n {
            return Err(Error::Dimension(format!("{}-qubit symmetry on a {}-qubit state", s.n_qubits(), self.n)));
        }
        let sp = s.operator;
        let sv = Complex64::new(s.sector_f64(), 0.0);
        let left = pauli_left(&self.data, &sp);
        let right = pauli_right(&self.data, &sp);
        let both = pauli_right(&left, &sp);
        let m = (&self.data + (left + right) * sv + both) * Complex64::new(0.25, 0.0);
        Ok(DensityMatrix { n: self.n, data: m, normalized: false })
    }

    /// Measures a Pauli symmetry with a symmetric readout error `ε`.
    ///
    /// Returns the branch reporting `s.sector` first and the opposite branch
    /// second. Reported probabilities are `(1−ε)q_± + ε q_∓` and post-states
    /// are the matching mixtures of the ideal projected states.
    pub fn measure_pauli(
        &self,
        s: &SymmetrySpec,
        readout_error: f64,
    ) -> Result<(MeasurementOutcome, MeasurementOutcome)> {
        if !(0.0..=1.0).contains(&readout_error) {
            return Err(Error::Domain(format!("readout error {readout_error} outside [0, 1]")));
        }
        let plus = self.project_unnormalized(s)?;
        let minus = self.project_unnormalized(&s.flipped())?;
        let eps = readout_error;
        let branch = |a: &DensityMatrix, b: &DensityMatrix, value: i8| -> MeasurementOutcome {
            let data = &a.data * Complex64::new(1.0 - eps, 0.0) + &b.data * Complex64::new(eps, 0.0);
            let p = data.trace().re;
            let post_state = if p > 1e-15 {
                Some(DensityMatrix { n: self.n, data: data * Complex64::new(1.0 / p, 0.0), normalized: true })
            } else {
                None
            };
            MeasurementOutcome { probability: p.max(0.0), post_state, observed_value: value }
        };
        Ok((branch(&plus, &minus, s.sector), branch(&minus, &plus, -s.sector)))
    }

    /// Traces out `qubit`.
    pub fn partial_trace(&self, qubit: usize) -> Result<DensityMatrix> {
        self.check_qubits(&[qubit])?;
        if self.n == 1 {
            return Err(Error::Dimension("cannot trace out the only qubit".into()));
        }
        let n = self.n;
        let hi = n - 1 - qubit;
        let insert = |i: usize, b: usize| -> usize {
            let low = i & ((1 << hi) - 1);
            let high = i >> hi;
            (high << (hi + 1)) | (b << hi) | low
        };
        let d = 1usize << (n - 1);
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = self.data[(insert(r, 0), insert(c, 0))] + self.data[(insert(r, 1), insert(c, 1))];
            }
        }
        Ok(DensityMatrix { n: n - 1, data: out, normalized: self.normalized })
    }

    /// `ρ ⊗ |0⟩⟨0|` with the new qubit appended as the last index.
    pub fn with_ancilla(&self) -> Result<DensityMatrix> {
        if self.n + 1 > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: self.n + 1, max: MAX_DENSE_QUBITS });
        }
        let d = self.dim();
        let mut out = CMatrix::zeros(2 * d, 2 * d);
        for r in 0..d {
            for c in 0..d {
                out[(r << 1, c << 1)] = self.data[(r, c)];
            }
        }
        Ok(DensityMatrix { n: self.n + 1, data: out, normalized: self.normalized })
    }

    /// Relabels wires: logical qubit `j` of the result is read from wire `wires[j]`.
    pub fn permute_qubits(&self, wires: &[usize]) -> Result<DensityMatrix> {
        if wires.len() != self.n {
            return Err(Error::Dimension(format!("permutation of length {} on {} qubits", wires.len(), self.n)));
        }
        self.check_qubits(wires)?;
        let n = self.n;
        let map = |i: usize| -> usize {
            let mut o = 0usize;
            for (j, &w) in wires.iter().enumerate() {
                if i & bit(n, w) != 0 {
                    o |= bit(n, j);
                }
            }
            o
        };
        let d = self.dim();
        let idx: Vec<usize> = (0..d).map(map).collect();
        let mut out = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out[(idx[r], idx[c])] = self.data[(r, c)];
            }
        }
        Ok(DensityMatrix { n, data: out, normalized: self.normalized })
    }
}

/// `P · M` for a Pauli string `P`.
pub(crate) fn pauli_left(m: &CMatrix, p: &PauliString) -> CMatrix {
    let dim = m.nrows();
    let (xd, zd) = p.dense_masks();
    let base = i_pow(p.phase() + (p.y_count() % 4) as u8);
    DMatrix::from_fn(dim, dim, |r, c| {
        let k = r ^ xd;
        let v = m[(k, c)] * base;
        if (k & zd).count_ones() % 2 == 1 {
            -v
        } else {
            v
        }
    })
}

/// `M · P` for a Pauli string `P`.
pub(crate) fn pauli_right(m: &CMatrix, p: &PauliString) -> CMatrix {
    let dim = m.nrows();
    let (xd, zd) = p.dense_masks();
    let base = i_pow(p.phase() + (p.y_count() % 4) as u8);
    DMatrix::from_fn(dim, dim, |r, c| {
        let v = m[(r, c ^ xd)] * base;
        if (c & zd).count_ones() % 2 == 1 {
            -v
        } else {
            v
        }
    })
}

/// Runs `circuit` on `rho`.
///
/// Gates are grouped into moments by start time. Each moment applies its
/// gates with gate dephasing on the participating qubits, then amplitude
/// damping and pure dephasing act on every qubit until the next moment.
/// Verification measurements are markers and leave the state untouched;
/// callers post-select on the measured qubits afterwards.
pub fn simulate(circuit: &Circuit, noise: Option<&NoiseModel>, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if circuit.n_qubits() != rho.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit on a {}-qubit state",
            circuit.n_qubits(),
            rho.n_qubits()
        )));
    }
    let mut state = rho.clone();
    let moments = circuit.moments();
    let end = circuit.total_duration_ps();
    for (i, (start, gates)) in moments.iter().enumerate() {
        for &g in gates {
            let gate = &circuit.gates()[g];
            match gate.kind {
                GateKind::Measure => {}
                GateKind::Prepare => {
                    for &q in &gate.qubits {
                        state.reset_qubit(q)?;
                    }
                }
                _ => {
                    let u = gate.unitary()?;
                    state.apply_unitary_unchecked(&u, &gate.qubits);
                    if let Some(nm) = noise {
                        let p = if gate.qubits.len() == 1 { nm.p_deph_1q } else { nm.p_deph_2q };
                        for &q in &gate.qubits {
                            state.dephase(q, p);
                        }
                    }
                }
            }
        }
        if let Some(nm) = noise {
            let next = moments.get(i + 1).map(|m| m.0).unwrap_or(end);
            let dt = (next - start) as f64 * 1e-12;
            if dt > 0.0 {
                let gamma = 1.0 - (-dt / nm.t1).exp();
                let p = (1.0 - (-dt / nm.tphi).exp()) / 2.0;
                for q in 0..state.n_qubits() {
                    state.damp(q, gamma);
                    state.dephase(q, p);
                }
            }
        }
    }
    Ok(state)
}
