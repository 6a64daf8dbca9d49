//! Pauli-group algebra on up to 64 qubits and Pauli decompositions of
//! Hermitian operators.
//!
//! Qubit 0 is the most significant factor of every Kronecker product, so the
//! string `IZ` is the matrix `I ⊗ Z` and the basis state `|01⟩` has index 1.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Largest register for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 6;

/// Coefficients with magnitude below this are dropped from a [`PauliSum`].
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    /// Product `a·b = i^k · c`, returned as `(k, c)`.
    fn product(a: Letter, b: Letter) -> (u8, Letter) {
        use Letter::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }
}

/// Power of `i` as a complex number.
pub fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A signed tensor product of single-qubit Paulis, `i^phase · P₀ ⊗ P₁ ⊗ …`.
///
/// Stored symplectically: bit `q` of `x` (`z`) is set when the letter on
/// qubit `q` has an X (Z) component, with `Y` carrying both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> PauliString {
        assert!((1..=64).contains(&n), "qubit count must lie in 1..=64");
        PauliString { n, x: 0, z: 0, phase: 0 }
    }

    pub fn from_letters(letters: &[Letter]) -> PauliString {
        let mut p = PauliString::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }

    /// Weight-one string with `letter` on qubit `q`.
    pub fn single(n: usize, q: usize, letter: Letter) -> PauliString {
        let mut p = PauliString::identity(n);
        p.set_letter(q, letter);
        p
    }

    /// Parses a phase-free or signed string, panicking on malformed input.
    /// Intended for literals; use [`str::parse`] for untrusted text.
    pub fn lit(s: &str) -> PauliString {
        s.parse().unwrap_or_else(|e| panic!("bad Pauli literal {s:?}: {e}"))
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Exponent `k` of the overall phase `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn phase_value(&self) -> Complex64 {
        i_pow(self.phase)
    }

    pub fn with_phase(mut self, phase: u8) -> PauliString {
        self.phase = phase & 3;
        self
    }

    /// Same letters with phase `+1`.
    pub fn unsigned(self) -> PauliString {
        self.with_phase(0)
    }

    pub fn negate(self) -> PauliString {
        let p = self.phase;
        self.with_phase(p + 2)
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn set_letter(&mut self, q: usize, l: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (bx, bz) = l.bits();
        let m = 1u64 << q;
        self.x = (self.x & !m) | if bx { m } else { 0 };
        self.z = (self.z & !m) | if bz { m } else { 0 };
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|q| self.letter(q)).collect()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| (self.x | self.z) >> q & 1 == 1).collect()
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Phase `±1`, so the dense matrix is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// `+1` or `-1` for Hermitian strings.
    pub fn sign(&self) -> Option<f64> {
        match self.phase {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    fn check_dims(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("Pauli strings on {} and {} qubits", self.n, other.n)));
        }
        Ok(())
    }

    /// Group product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_dims(other)?;
        let mut out = PauliString::identity(self.n);
        let mut phase = self.phase + other.phase;
        for q in 0..self.n {
            let (k, l) = Letter::product(self.letter(q), other.letter(q));
            phase += k;
            out.set_letter(q, l);
        }
        out.phase = phase & 3;
        Ok(out)
    }

    /// True when the two strings commute.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// Tensor product `self ⊗ other`; `self` occupies the leading qubits.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let n = self.n + other.n;
        assert!(n <= 64, "tensor product exceeds 64 qubits");
        PauliString {
            n,
            x: self.x | other.x << self.n,
            z: self.z | other.z << self.n,
            phase: (self.phase + other.phase) & 3,
        }
    }

    /// Masks in dense-index bit order (qubit `q` ↦ bit `n-1-q`).
    pub fn dense_masks(&self) -> (usize, usize) {
        let mut xd = 0usize;
        let mut zd = 0usize;
        for q in 0..self.n {
            let b = 1usize << (self.n - 1 - q);
            if self.x >> q & 1 == 1 {
                xd |= b;
            }
            if self.z >> q & 1 == 1 {
                zd |= b;
            }
        }
        (xd, zd)
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Dense `2^N × 2^N` matrix.
    pub fn dense_matrix(&self) -> Result<CMatrix> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: self.n, max: MAX_DENSE_QUBITS });
        }
        let dim = 1usize << self.n;
        let (xd, zd) = self.dense_masks();
        let base = i_pow(self.phase + (self.y_count() % 4) as u8);
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let sign = if (col & zd).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(col ^ xd, col)] = base * sign;
        }
        Ok(m)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by qubit count, then lexicographically over letters with
/// `I < X < Y < Z` starting at qubit 0, then by phase.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.letters().cmp(&other.letters()))
            .then_with(|| self.phase.cmp(&other.phase))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts `[phase]LLLL` with phase one of `+`, `-`, `+i`, `-i` (optional).
    fn from_str(s: &str) -> Result<PauliString> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        if rest.is_empty() {
            return Err(Error::Parse(format!("no Pauli letters in {s:?}")));
        }
        if rest.chars().count() > 64 {
            return Err(Error::Parse(format!("more than 64 letters in {s:?}")));
        }
        let letters = rest
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| Error::Parse(format!("bad letter {c:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_letters(&letters).with_phase(phase))
    }
}

/// Real linear combination of phase-free Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(n: usize) -> PauliSum {
        PauliSum { n, terms: BTreeMap::new() }
    }

    /// Builds a sum from `(string, coefficient)` pairs.
    pub fn from_terms<'a, I>(n: usize, terms: I) -> Result<PauliSum>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut h = PauliSum::new(n);
        for (s, c) in terms {
            h.add_term(s.parse()?, c)?;
        }
        Ok(h)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Adds `c · p`. A `-1` phase on `p` is folded into the coefficient;
    /// imaginary phases are rejected since the sum must stay Hermitian.
    pub fn add_term(&mut self, p: PauliString, c: f64) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::Dimension(format!("term on {} qubits added to a {}-qubit sum", p.n_qubits(), self.n)));
        }
        if !c.is_finite() {
            return Err(Error::Domain(format!("non-finite coefficient for {p}")));
        }
        let sign = p.sign().ok_or_else(|| Error::Domain(format!("anti-Hermitian term {p} in a Hermitian sum")))?;
        let key = p.unsigned();
        let v = self.terms.get(&key).copied().unwrap_or(0.0) + sign * c;
        if v.abs() < PRUNE_THRESHOLD {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, v);
        }
        Ok(())
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        let c = self.terms.get(&p.unsigned()).copied().unwrap_or(0.0);
        c * p.sign().unwrap_or(1.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, f64)> + '_ {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every term commutes with `s`.
    pub fn commutes_with(&self, s: &PauliString) -> Result<bool> {
        for p in self.terms.keys() {
            if !p.commutes(s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest coefficient among terms anticommuting with `s`.
    pub fn anticommuting_weight(&self, s: &PauliString) -> Result<f64> {
        let mut w: f64 = 0.0;
        for (p, c) in self.terms() {
            if !p.commutes(s)? {
                w = w.max(c.abs());
            }
        }
        Ok(w)
    }

    pub fn dense_matrix(&self) -> Result<CMatrix> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: self.n, max: MAX_DENSE_QUBITS });
        }
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for (p, c) in self.terms() {
            m += p.dense_matrix()? * Complex64::new(c, 0.0);
        }
        Ok(m)
    }

    /// Pauli decomposition `O = Σ_P O_P P` with `O_P = Tr[P O] / 2^N`.
    pub fn decompose(o: &CMatrix) -> Result<PauliSum> {
        let dim = o.nrows();
        if dim != o.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!("expected a square 2^N matrix, got {}×{}", o.nrows(), o.ncols())));
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity { qubits: n, max: MAX_DENSE_QUBITS });
        }
        let herm_err = (o - o.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > 1e-10 {
            return Err(Error::Domain(format!("matrix is not Hermitian (deviation {herm_err:.3e})")));
        }
        let mut h = PauliSum::new(n);
        for xm in 0..dim as u64 {
            for zm in 0..dim as u64 {
                let p = PauliString { n, x: xm, z: zm, phase: 0 };
                let c = pauli_trace(&p, o) / dim as f64;
                h.add_term(p, c.re)?;
            }
        }
        Ok(h)
    }

    /// Sum with every coefficient multiplied by `k`.
    pub fn scaled(&self, k: f64) -> PauliSum {
        let mut out = PauliSum::new(self.n);
        for (p, c) in self.terms() {
            out.add_term(*p, c * k).expect("scaling keeps terms valid");
        }
        out
    }

    /// Operator product restricted to Hermitian results.
    ///
    /// Fails when a pair of terms anticommutes, since the product would then
    /// carry an imaginary coefficient.
    pub fn multiply_hermitian(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = PauliSum::new(self.n);
        for (p, a) in self.terms() {
            for (q, b) in other.terms() {
                let r = p.multiply(q)?;
                out.add_term(r, a * b)?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}·{p}")?;
        }
        Ok(())
    }
}

/// `Tr[P · O]` without forming the dense Pauli matrix.
pub fn pauli_trace(p: &PauliString, o: &CMatrix) -> Complex64 {
    let dim = o.nrows();
    let (xd, zd) = p.dense_masks();
    let base = i_pow(p.phase() + (p.y_count() % 4) as u8);
    let mut acc = Complex64::new(0.0, 0.0);
    for col in 0..dim {
        let v = o[(col, col ^ xd)];
        if (col & zd).count_ones() % 2 == 1 {
            acc -= v;
        } else {
            acc += v;
        }
    }
    acc * base
}

/// A Hermitian Pauli operator together with a target eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymmetrySpec {
    pub operator: PauliString,
    pub sector: i8,
}

impl SymmetrySpec {
    pub fn new(operator: PauliString, sector: i8) -> Result<SymmetrySpec> {
        if !operator.is_hermitian() {
            return Err(Error::Domain(format!("symmetry {operator} is not Hermitian")));
        }
        if sector != 1 && sector != -1 {
            return Err(Error::Domain(format!("sector must be ±1, got {sector}")));
        }
        let sq = operator.multiply(&operator)?;
        debug_assert!(sq.is_identity() && sq.phase() == 0);
        Ok(SymmetrySpec { operator, sector })
    }

    /// Convenience constructor from a string literal.
    pub fn lit(op: &str, sector: i8) -> SymmetrySpec {
        SymmetrySpec::new(PauliString::lit(op), sector).expect("valid symmetry literal")
    }

    pub fn n_qubits(&self) -> usize {
        self.operator.n_qubits()
    }

    pub fn sector_f64(&self) -> f64 {
        self.sector as f64
    }

    /// Same operator, opposite eigenvalue.
    pub fn flipped(&self) -> SymmetrySpec {
        SymmetrySpec { operator: self.operator, sector: -self.sector }
    }

    /// Projector `½(1 + s S)` onto the sector.
    pub fn projector(&self) -> Result<CMatrix> {
        let s = self.operator.dense_matrix()?;
        let dim = s.nrows();
        Ok((CMatrix::identity(dim, dim) + s * Complex64::new(self.sector_f64(), 0.0)) * Complex64::new(0.5, 0.0))
    }
}

impl fmt::Display for SymmetrySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {:+}", self.operator, self.sector)
    }
}
