//! Symmetry engineering: extending a problem by a qubit that carries a new
//! symmetry, rotating symmetries with Clifford Pauli rotations, and reducing
//! the set of observables to measure once symmetries are fixed.

use crate::circuitlib::{Circuit, LadderStyle};
use crate::error::{Error, Result};
use crate::mitigate::check_mutually_commuting;
use crate::pauli::{Letter, PauliString, PauliSum, SymmetrySpec};

/// Extension of an `N`-qubit problem to `N + 1` qubits by a pivot `P`.
///
/// The new qubit is index 0 of the extended register and the new symmetry
/// is `X ⊗ P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionMap {
    pub pivot: PauliString,
    pub new_symmetry: PauliString,
}

impl ExtensionMap {
    pub fn new(pivot: PauliString) -> Result<ExtensionMap> {
        if pivot.sign().is_none() {
            return Err(Error::Domain(format!("pivot {pivot} is not Hermitian")));
        }
        let new_symmetry = PauliString::single(1, 0, Letter::X).tensor(&pivot);
        Ok(ExtensionMap { pivot, new_symmetry })
    }

    pub fn extend_pauli(&self, q: &PauliString) -> Result<PauliString> {
        extend_pauli(q, &self.pivot)
    }

    pub fn extend_hamiltonian(&self, h: &PauliSum) -> Result<PauliSum> {
        extend_hamiltonian(h, &self.pivot)
    }
}

/// `I ⊗ Q` if `Q` commutes with the pivot, `Z ⊗ Q` otherwise.
///
/// This is the Pauli form of the block operator `diag(Q, PQP)`.
pub fn extend_pauli(q: &PauliString, pivot: &PauliString) -> Result<PauliString> {
    let prefix = if q.commutes(pivot)? { Letter::I } else { Letter::Z };
    Ok(PauliString::single(1, 0, prefix).tensor(q))
}

/// Term-wise [`extend_pauli`]. The result has the spectrum of `h` with every
/// multiplicity doubled and commutes with `X ⊗ pivot`.
pub fn extend_hamiltonian(h: &PauliSum, pivot: &PauliString) -> Result<PauliSum> {
    if h.n_qubits() != pivot.n_qubits() {
        return Err(Error::Dimension(format!(
            "{}-qubit pivot for a {}-qubit Hamiltonian",
            pivot.n_qubits(),
            h.n_qubits()
        )));
    }
    let mut out = PauliSum::new(h.n_qubits() + 1);
    for (p, c) in h.terms() {
        out.add_term(extend_pauli(p, pivot)?, c)?;
    }
    Ok(out)
}

/// `R† P R` with `R = exp(iπ/4·Q)`: `P` if the two commute, `iPQ` otherwise.
pub fn rotate_pauli(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    if p.sign().is_none() {
        return Err(Error::Domain(format!("{p} is not Hermitian")));
    }
    if q.sign().is_none() {
        return Err(Error::Domain(format!("rotation axis {q} is not Hermitian")));
    }
    if p.commutes(q)? {
        return Ok(*p);
    }
    let r = p.multiply(q)?;
    Ok(r.with_phase(r.phase() + 1))
}

/// `R P R†` with `R = exp(iπ/4·Q)`.
pub fn conjugate_by_rotation(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    rotate_pauli(p, &q.negate())
}

/// `R P R†` for `R = R₁ R₂ ⋯ R_k`, each `R_j = exp(iπ/4·Q_j)`.
pub fn conjugate_by_rotations(p: &PauliString, axes: &[PauliString]) -> Result<PauliString> {
    axes.iter().rev().try_fold(*p, |acc, q| conjugate_by_rotation(&acc, q))
}

/// Applies [`conjugate_by_rotations`] to every symmetry, keeping its sector.
pub fn rotate_symmetries(syms: &[SymmetrySpec], axes: &[PauliString]) -> Result<Vec<SymmetrySpec>> {
    syms.iter()
        .map(|s| {
            let op = conjugate_by_rotations(&s.operator, axes)?;
            let sign = op.sign().expect("Clifford images of Hermitian Paulis are Hermitian");
            // fold a −1 phase into the sector so the operator stays unsigned
            SymmetrySpec::new(op.unsigned(), if sign < 0.0 { -s.sector } else { s.sector })
        })
        .collect()
}

/// A circuit written as `exp(−i a_k P_k) ⋯ exp(−i a_1 P_1)`, first factor
/// applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliProgram {
    n: usize,
    factors: Vec<(PauliString, f64)>,
}

impl PauliProgram {
    pub fn new(n: usize) -> PauliProgram {
        PauliProgram { n, factors: Vec::new() }
    }

    pub fn push(&mut self, p: PauliString, angle: f64) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::Dimension(format!("{}-qubit factor in a {}-qubit program", p.n_qubits(), self.n)));
        }
        if p.sign().is_none() || !angle.is_finite() {
            return Err(Error::Domain(format!("exp(−i·{angle}·{p}) is not unitary")));
        }
        self.factors.push((p, angle));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[(PauliString, f64)] {
        &self.factors
    }

    /// The same program on the extended register; commutes with `X ⊗ pivot`.
    pub fn extend(&self, pivot: &PauliString) -> Result<PauliProgram> {
        let mut out = PauliProgram::new(self.n + 1);
        for (p, a) in &self.factors {
            out.push(extend_pauli(p, pivot)?, *a)?;
        }
        Ok(out)
    }

    /// `R U R†` for `R = R₁ ⋯ R_k`, each `R_j = exp(iπ/4·Q_j)`.
    pub fn conjugate(&self, axes: &[PauliString]) -> Result<PauliProgram> {
        let mut out = PauliProgram::new(self.n);
        for (p, a) in &self.factors {
            out.push(conjugate_by_rotations(p, axes)?, *a)?;
        }
        Ok(out)
    }

    pub fn to_circuit(&self, style: LadderStyle) -> Result<Circuit> {
        let mut c = Circuit::new(self.n);
        for (p, a) in &self.factors {
            c.push_pauli_exponential(p, *a, style)?;
        }
        Ok(c)
    }
}

/// How to recover one Hamiltonian term from the measured set.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionRule {
    pub term: PauliString,
    pub coefficient: f64,
    /// Index into [`Reduction::measured`]; `None` when the term is a product
    /// of fixed symmetries only.
    pub measured: Option<usize>,
    /// `term = sign · measured · Π_k S_k` over `symmetries`.
    pub sign: f64,
    pub symmetries: Vec<usize>,
}

/// Observables left to measure after fixing symmetry sectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub fixed: Vec<SymmetrySpec>,
    pub measured: Vec<PauliString>,
    pub rules: Vec<ReconstructionRule>,
}

impl Reduction {
    /// `Σ c · sign · ⟨measured⟩ · Π s_k` given the measured expectations.
    pub fn evaluate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.measured.len() {
            return Err(Error::Dimension(format!("{} values for {} observables", values.len(), self.measured.len())));
        }
        Ok(self
            .rules
            .iter()
            .map(|r| {
                let m = r.measured.map_or(1.0, |i| values[i]);
                let s: f64 = r.symmetries.iter().map(|&k| self.fixed[k].sector_f64()).product();
                r.coefficient * r.sign * m * s
            })
            .sum())
    }

    /// Evaluates with a closure supplying `⟨P⟩` for each measured `P`.
    pub fn evaluate_with<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&PauliString) -> Result<f64>,
    {
        let values = self.measured.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        self.evaluate(&values)
    }
}

fn representative_key(p: &PauliString) -> (usize, PauliString) {
    (p.weight(), p.unsigned())
}

/// Reduces `h` using fixed symmetry sectors.
///
/// Each term commuting with every fixed symmetry is replaced by the
/// lowest-weight member of its coset under the group the symmetries
/// generate (ties broken lexicographically with `I < X < Y < Z`). Other
/// terms are measured as they are.
pub fn reduce_observables(h: &PauliSum, fixed: &[SymmetrySpec]) -> Result<Reduction> {
    check_mutually_commuting(fixed)?;
    for s in fixed {
        if s.n_qubits() != h.n_qubits() {
            return Err(Error::Dimension(format!(
                "{}-qubit symmetry for a {}-qubit Hamiltonian",
                s.n_qubits(),
                h.n_qubits()
            )));
        }
    }
    let k = fixed.len();
    let group: Vec<(PauliString, Vec<usize>)> = (0..1usize << k)
        .map(|mask| {
            let members: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            let g = members
                .iter()
                .try_fold(PauliString::identity(h.n_qubits()), |acc, &i| acc.multiply(&fixed[i].operator))
                .expect("sizes checked");
            (g, members)
        })
        .collect();
    let mut measured: Vec<PauliString> = Vec::new();
    let mut rules = Vec::new();
    for (p, c) in h.terms() {
        let commutes_all = fixed.iter().all(|s| p.commutes_unchecked(&s.operator));
        let (q, members) = if commutes_all {
            group
                .iter()
                .map(|(g, m)| (p.multiply(g).expect("sizes checked"), m.clone()))
                .min_by_key(|(q, _)| representative_key(q))
                .expect("group contains the identity")
        } else {
            (*p, Vec::new())
        };
        let sign = q.sign().expect("commuting Hermitian products are Hermitian");
        let rep = q.unsigned();
        let idx = if rep.is_identity() {
            None
        } else if let Some(i) = measured.iter().position(|m| *m == rep) {
            Some(i)
        } else {
            measured.push(rep);
            Some(measured.len() - 1)
        };
        rules.push(ReconstructionRule { term: *p, coefficient: c, measured: idx, sign, symmetries: members });
    }
    Ok(Reduction { fixed: fixed.to_vec(), measured, rules })
}
