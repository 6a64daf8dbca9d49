//! Tabulated H₂ Hamiltonian coefficients along the dissociation curve.
//!
//! Each point carries a two-qubit Bravyi-Kitaev form
//! `h0 II + h1 IZ + h2 ZI + h3 XX + h4 YY + h5 ZZ` and a four-qubit
//! Jordan-Wigner form
//! `hI + Σ h_i Z_i + Σ h_ij Z_i Z_j + hs (XYYX + YXXY − XXYY − YYXX)`.

use std::path::Path;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum, SymmetrySpec, MAX_DENSE_QUBITS};

/// Dataset compiled into the binary.
pub const BUILTIN_DATASET: &str = include_str!("../data/h2_sto3g.json");

/// Tolerance for cross-encoding and reference-energy agreement.
pub const ENERGY_AGREEMENT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    TwoQubitBk,
    FourQubitJw,
}

impl Encoding {
    pub fn n_qubits(self) -> usize {
        match self {
            Encoding::TwoQubitBk => 2,
            Encoding::FourQubitJw => 4,
        }
    }

    /// Hartree-Fock reference, qubit 0 first.
    pub fn hartree_fock(self) -> &'static str {
        match self {
            Encoding::TwoQubitBk => "01",
            Encoding::FourQubitJw => "1100",
        }
    }

    /// Conserved Pauli operators with the sectors of the Hartree-Fock state.
    pub fn symmetries(self) -> Vec<SymmetrySpec> {
        match self {
            Encoding::TwoQubitBk => vec![SymmetrySpec::lit("ZZ", -1)],
            Encoding::FourQubitJw => {
                vec![SymmetrySpec::lit("ZZII", 1), SymmetrySpec::lit("ZIZI", -1), SymmetrySpec::lit("ZZZZ", 1)]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitBk {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
    pub h5: f64,
}

impl TwoQubitBk {
    fn values(&self) -> [f64; 6] {
        [self.h0, self.h1, self.h2, self.h3, self.h4, self.h5]
    }

    pub fn assemble(&self) -> PauliSum {
        let labels = ["II", "IZ", "ZI", "XX", "YY", "ZZ"];
        let mut h = PauliSum::new(2);
        for (l, v) in labels.iter().zip(self.values()) {
            h.add_term(PauliString::lit(l), v).expect("finite coefficients");
        }
        h
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourQubitJw {
    #[serde(rename = "hI")]
    pub h_identity: f64,
    pub h: [f64; 4],
    /// `(i, j, h_ij)` with `i < j`.
    pub hij: Vec<(usize, usize, f64)>,
    pub hs: f64,
}

impl FourQubitJw {
    pub fn assemble(&self) -> PauliSum {
        let mut out = PauliSum::new(4);
        let add = |out: &mut PauliSum, p: PauliString, v: f64| out.add_term(p, v).expect("finite coefficients");
        add(&mut out, PauliString::identity(4), self.h_identity);
        for (i, &v) in self.h.iter().enumerate() {
            add(&mut out, PauliString::single(4, i, Letter::Z), v);
        }
        for &(i, j, v) in &self.hij {
            let mut p = PauliString::single(4, i, Letter::Z);
            p.set_letter(j, Letter::Z);
            add(&mut out, p, v);
        }
        for (l, s) in [("XYYX", 1.0), ("YXXY", 1.0), ("XXYY", -1.0), ("YYXX", -1.0)] {
            add(&mut out, PauliString::lit(l), s * self.hs);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculePoint {
    pub r_angstrom: f64,
    pub two_qubit_bk: TwoQubitBk,
    pub four_qubit_jw: FourQubitJw,
    /// Reference ground energy from the generating chemistry code.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fci_hartree: Option<f64>,
}

impl MoleculePoint {
    pub fn assemble(&self, encoding: Encoding) -> PauliSum {
        match encoding {
            Encoding::TwoQubitBk => self.two_qubit_bk.assemble(),
            Encoding::FourQubitJw => self.four_qubit_jw.assemble(),
        }
    }

    fn label(&self, index: usize) -> String {
        format!("point {index} (r = {} Å)", self.r_angstrom)
    }

    fn check_schema(&self, index: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Load(format!("{}: {msg}", self.label(index))));
        if !self.r_angstrom.is_finite() || self.r_angstrom <= 0.0 {
            return fail("bond distance must be positive and finite".into());
        }
        let jw = &self.four_qubit_jw;
        let finite = self.two_qubit_bk.values().iter().all(|v| v.is_finite())
            && jw.h_identity.is_finite()
            && jw.hs.is_finite()
            && jw.h.iter().all(|v| v.is_finite())
            && jw.hij.iter().all(|t| t.2.is_finite())
            && self.fci_hartree.is_none_or(f64::is_finite);
        if !finite {
            return fail("non-finite coefficient".into());
        }
        let mut seen = Vec::new();
        for &(i, j, _) in &jw.hij {
            if !(i < j && j < 4) {
                return fail(format!("h_ij index pair ({i}, {j}) must satisfy i < j < 4"));
            }
            if seen.contains(&(i, j)) {
                return fail(format!("duplicate h_ij pair ({i}, {j})"));
            }
            seen.push((i, j));
        }
        Ok(())
    }
}

/// Errors with a Load error if `h` fails to commute with any symmetry.
pub fn check_symmetries(h: &PauliSum, syms: &[SymmetrySpec], context: &str) -> Result<()> {
    for s in syms {
        let w = h.anticommuting_weight(&s.operator)?;
        if w > 1e-10 {
            return Err(Error::Load(format!(
                "{context}: Hamiltonian does not commute with {} (anticommuting weight {w:.3e})",
                s.operator
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeDataset {
    pub provenance: String,
    pub points: Vec<MoleculePoint>,
}

impl MoleculeDataset {
    /// Parses and validates a dataset.
    pub fn from_json_str(s: &str) -> Result<MoleculeDataset> {
        let ds: MoleculeDataset =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("schema violation: {e}")))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn builtin() -> MoleculeDataset {
        MoleculeDataset::from_json_str(BUILTIN_DATASET).expect("builtin dataset is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("datasets serialize")
    }

    /// Schema invariants and symmetry commutation of every point.
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Load("dataset has no points".into()));
        }
        for (i, p) in self.points.iter().enumerate() {
            p.check_schema(i)?;
            if i > 0 && p.r_angstrom <= self.points[i - 1].r_angstrom {
                return Err(Error::Load(format!("{}: bond distances must strictly increase", p.label(i))));
            }
            for enc in [Encoding::TwoQubitBk, Encoding::FourQubitJw] {
                check_symmetries(&p.assemble(enc), &enc.symmetries(), &p.label(i))?;
            }
        }
        Ok(())
    }

    /// Point whose distance is within `1e−9 Å` of `r`.
    pub fn point_at(&self, r: f64) -> Option<&MoleculePoint> {
        self.points.iter().find(|p| (p.r_angstrom - r).abs() < 1e-9)
    }

    /// Cross-encoding ground-energy agreement and, where present, agreement
    /// with the stored reference energy. Returns one message per failure.
    pub fn consistency_report(&self) -> Result<Vec<String>> {
        let mut issues = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            let e2 = exact_ground_energy(&p.assemble(Encoding::TwoQubitBk))?;
            let e4 = exact_ground_energy(&p.assemble(Encoding::FourQubitJw))?;
            if (e2 - e4).abs() > ENERGY_AGREEMENT {
                issues.push(format!("{}: two-qubit ground energy {e2} differs from four-qubit {e4}", p.label(i)));
            }
            if let Some(f) = p.fci_hartree {
                if (e2 - f).abs() > ENERGY_AGREEMENT {
                    issues.push(format!("{}: ground energy {e2} differs from reference {f}", p.label(i)));
                }
            }
        }
        Ok(issues)
    }
}

/// Reads and validates a dataset file.
pub fn load_dataset(path: &Path) -> Result<MoleculeDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    MoleculeDataset::from_json_str(&text)
}

/// Minimum eigenvalue of the dense matrix of `h`.
pub fn exact_ground_energy(h: &PauliSum) -> Result<f64> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(Error::Capacity { qubits: h.n_qubits(), max: MAX_DENSE_QUBITS });
    }
    let m = h.dense_matrix()?;
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
