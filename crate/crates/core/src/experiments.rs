//! VQE driver: the four mitigation pipelines, the scalar optimizer and the
//! dissociation, decoherence and symmetry-engineering studies.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chemdata::{exact_ground_energy, Encoding, MoleculeDataset, MoleculePoint};
use crate::circuitlib::{
    ancilla_verification, inline_verification, propagate_pauli, ucc_2q, ucc_4q, Circuit, Topology, VerificationCircuit,
    LAYER_PS,
};
use crate::densim::{simulate, DensityMatrix, NoiseModel};
use crate::error::{Error, Result};
use crate::mitigate::verified_expectation;
use crate::pauli::{Letter, PauliString, PauliSum, SymmetrySpec};
use crate::symtools::{conjugate_by_rotations, reduce_observables, rotate_symmetries, Reduction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mitigation {
    None,
    Ancilla,
    Inline,
    Sqse,
}

impl Mitigation {
    pub const ALL: [Mitigation; 4] = [Mitigation::None, Mitigation::Ancilla, Mitigation::Inline, Mitigation::Sqse];

    pub fn label(self) -> &'static str {
        match self {
            Mitigation::None => "none",
            Mitigation::Ancilla => "ancilla",
            Mitigation::Inline => "inline",
            Mitigation::Sqse => "sqse",
        }
    }
}

/// Which energy the optimizer minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeOn {
    Raw,
    Mitigated,
}

/// Coarse grid followed by golden-section refinement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: String,
    pub lower: f64,
    pub upper: f64,
    /// Final bracket width in radians.
    pub tolerance: f64,
    pub grid_points: usize,
    pub max_evaluations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: "grid+golden".to_string(),
            lower: -PI,
            upper: PI,
            tolerance: 1e-6,
            grid_points: 25,
            max_evaluations: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub encoding: Encoding,
    pub mitigation: Mitigation,
    /// Rotated symmetries; four-qubit encoding only.
    pub rotated: bool,
    /// `None` runs noiselessly.
    pub noise: Option<NoiseModel>,
    pub optimizer: OptimizerConfig,
    pub optimize_on: OptimizeOn,
    /// Nearest-neighbour ancilla circuit instead of all-to-all.
    pub local_ancilla: bool,
    pub inline_topology: Topology,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            encoding: Encoding::TwoQubitBk,
            mitigation: Mitigation::None,
            rotated: false,
            noise: Some(NoiseModel::default()),
            optimizer: OptimizerConfig::default(),
            optimize_on: OptimizeOn::Mitigated,
            local_ancilla: false,
            inline_topology: Topology::Tree,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rotated && self.encoding != Encoding::FourQubitJw {
            return Err(Error::Domain("rotated symmetries need the four-qubit encoding".into()));
        }
        let o = &self.optimizer;
        if !(o.lower < 0.0 && o.upper > 0.0) {
            return Err(Error::Domain(format!("θ bounds [{}, {}] must contain 0", o.lower, o.upper)));
        }
        if !(o.tolerance > 0.0) || o.grid_points < 3 || o.max_evaluations <= o.grid_points {
            return Err(Error::Domain("optimizer needs tolerance > 0, ≥ 3 grid points and spare evaluations".into()));
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(())
    }

    /// Short label such as `4q_rotated_sqse`.
    pub fn method_label(&self) -> String {
        let enc = match (self.encoding, self.rotated) {
            (Encoding::TwoQubitBk, _) => "2q",
            (Encoding::FourQubitJw, false) => "4q",
            (Encoding::FourQubitJw, true) => "4q_rotated",
        };
        format!("{enc}_{}", self.mitigation.label())
    }
}

/// The axes of `R = exp(iπ/4·Y₀X₂) exp(iπ/4·Y₁X₃)`.
pub fn rotation_axes() -> [PauliString; 2] {
    [PauliString::lit("YIXI"), PauliString::lit("IYIX")]
}

/// Hamiltonian and target symmetries in the frame the circuit runs in.
pub fn problem_frame(
    point: &MoleculePoint,
    encoding: Encoding,
    rotated: bool,
) -> Result<(PauliSum, Vec<SymmetrySpec>)> {
    let h = point.assemble(encoding);
    let syms = encoding.symmetries();
    if !rotated {
        return Ok((h, syms));
    }
    let axes = rotation_axes();
    let mut hr = PauliSum::new(h.n_qubits());
    for (p, c) in h.terms() {
        hr.add_term(conjugate_by_rotations(p, &axes)?, c)?;
    }
    Ok((hr, rotate_symmetries(&syms, &axes)?))
}

/// Ansatz circuit timed for `noise`.
pub fn ansatz(theta: f64, encoding: Encoding, rotated: bool, noise: Option<&NoiseModel>) -> Result<Circuit> {
    let c = match encoding {
        Encoding::TwoQubitBk => ucc_2q(theta),
        Encoding::FourQubitJw => ucc_4q(theta, rotated),
    };
    timed(c, noise)
}

fn timed(c: Circuit, noise: Option<&NoiseModel>) -> Result<Circuit> {
    let Some(n) = noise else { return Ok(c) };
    let d1 = (n.duration_1q * 1e12).round() as u64;
    let d2 = (n.duration_2q * 1e12).round() as u64;
    if d1 == LAYER_PS && d2 == LAYER_PS {
        Ok(c)
    } else {
        c.retimed(d1, d2)
    }
}

/// Energy and acceptance probability at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub energy: f64,
    pub raw_energy: f64,
    pub acceptance_probability: f64,
}

/// Prepared problem at one distance.
struct Problem {
    h: PauliSum,
    syms: Vec<SymmetrySpec>,
    reduction: Reduction,
    verifiers: Vec<VerificationCircuit>,
}

impl Problem {
    fn new(cfg: &ExperimentConfig, point: &MoleculePoint) -> Result<Problem> {
        let (h, syms) = problem_frame(point, cfg.encoding, cfg.rotated)?;
        let reduction = reduce_observables(&h, &syms)?;
        let noise = cfg.noise.as_ref();
        let verifiers = match cfg.mitigation {
            Mitigation::Ancilla => syms
                .iter()
                .map(|s| {
                    let mut v = ancilla_verification(s, cfg.local_ancilla)?;
                    v.circuit = timed(v.circuit, noise)?;
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?,
            Mitigation::Inline => syms
                .iter()
                .map(|s| {
                    let mut v = inline_verification(s, cfg.inline_topology)?;
                    v.circuit = timed(v.circuit, noise)?;
                    Ok(v)
                })
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        Ok(Problem { h, syms, reduction, verifiers })
    }
}

/// Post-selects the readout of a verification circuit, returning the state
/// (still on the circuit's wires) and the acceptance probability.
fn postselect(
    v: &VerificationCircuit,
    rho: &DensityMatrix,
    noise: Option<&NoiseModel>,
) -> Result<(DensityMatrix, f64)> {
    let eps = noise.map_or(0.0, |n| n.p_readout);
    let (keep, _) = rho.measure_pauli(&v.readout_symmetry(), eps)?;
    let post = keep.post_state.ok_or_else(|| Error::Rejection(format!("sector {} is unpopulated", v.symmetry)))?;
    Ok((post, keep.probability))
}

/// Runs ancilla verification of one symmetry and returns the system state.
pub fn run_ancilla(
    v: &VerificationCircuit,
    rho: &DensityMatrix,
    noise: Option<&NoiseModel>,
) -> Result<(DensityMatrix, f64)> {
    let extended = rho.with_ancilla()?;
    let after = simulate(&v.circuit, noise, &extended)?;
    let (post, p) = postselect(v, &after, noise)?;
    let mut wires = v.data_wires.clone();
    wires.push(v.readout);
    let ordered = post.permute_qubits(&wires)?;
    Ok((ordered.partial_trace(rho.n_qubits())?, p))
}

fn evaluate_state(rho: &DensityMatrix, cfg: &ExperimentConfig, pb: &Problem) -> Result<Evaluation> {
    let noise = cfg.noise.as_ref();
    let raw_energy = rho.expectation(&pb.h)?;
    let (energy, acceptance_probability) = match cfg.mitigation {
        Mitigation::None => (raw_energy, 1.0),
        Mitigation::Sqse => {
            // target-sector eigenvalue in its trace form, which stays defined
            // when the state already lies in the sector and B is singular
            let v = verified_expectation(rho, &pb.h, &pb.syms)?;
            (v.value, v.acceptance_probability)
        }
        Mitigation::Ancilla => {
            let mut state = rho.clone();
            let mut acc = 1.0;
            for v in &pb.verifiers {
                let (next, p) = run_ancilla(v, &state, noise)?;
                state = next;
                acc *= p;
            }
            (pb.reduction.evaluate_with(|p| state.pauli_value(p))?, acc)
        }
        Mitigation::Inline => {
            let (last, rest) = pb.verifiers.split_last().expect("at least one symmetry");
            let mut state = rho.clone();
            let mut acc = 1.0;
            for v in rest {
                let after = simulate(&v.circuit, noise, &state)?;
                let (post, p) = postselect(v, &after, noise)?;
                state = simulate(&v.circuit.inverse()?, noise, &post)?;
                acc *= p;
            }
            let after = simulate(&last.circuit, noise, &state)?;
            let (post, p) = postselect(last, &after, noise)?;
            acc *= p;
            let sector = last.symmetry.sector_f64();
            let energy = pb.reduction.evaluate_with(|m| {
                let mut q = propagate_pauli(&last.circuit, m)?;
                // the readout bit is already known: substitute its recorded value
                let mut factor = 1.0;
                if q.letter(last.readout) == Letter::Z {
                    q.set_letter(last.readout, Letter::I);
                    factor = sector;
                }
                Ok(factor * post.pauli_value(&q)?)
            })?;
            (energy, acc)
        }
    };
    Ok(Evaluation { energy, raw_energy, acceptance_probability })
}

/// Energy of the ansatz at `theta` under `cfg`.
pub fn energy_at(theta: f64, cfg: &ExperimentConfig, point: &MoleculePoint) -> Result<Evaluation> {
    cfg.validate()?;
    let pb = Problem::new(cfg, point)?;
    energy_with(theta, cfg, &pb)
}

fn energy_with(theta: f64, cfg: &ExperimentConfig, pb: &Problem) -> Result<Evaluation> {
    let noise = cfg.noise.as_ref();
    let circuit = ansatz(theta, cfg.encoding, cfg.rotated, noise)?;
    let zero = DensityMatrix::initial_state(&"0".repeat(cfg.encoding.n_qubits()))?;
    let rho = simulate(&circuit, noise, &zero)?;
    evaluate_state(&rho, cfg, pb)
}

/// Result of a scalar minimization.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes `f` on `[lower, upper]`: a uniform grid locates candidate
/// brackets around its lowest local minima (up to [`REFINED_CANDIDATES`]),
/// and golden-section search narrows each below `tolerance`.
pub fn minimize_scalar<F>(mut f: F, opt: &OptimizerConfig) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut eval = |x: f64, trace: &mut Vec<(f64, f64)>| -> Result<f64> {
        if trace.len() >= opt.max_evaluations {
            let tail: Vec<String> = trace.iter().rev().take(5).map(|(x, v)| format!("f({x:.9}) = {v:.12}")).collect();
            return Err(Error::Optimizer(format!(
                "no convergence after {} evaluations; last: {}",
                trace.len(),
                tail.join(", ")
            )));
        }
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::Optimizer(format!("objective is {v} at {x}")));
        }
        trace.push((x, v));
        Ok(v)
    };
    let n = opt.grid_points;
    let step = (opt.upper - opt.lower) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| opt.lower + step * i as f64).collect();
    let mut values = Vec::with_capacity(n);
    for &x in &grid {
        values.push(eval(x, &mut trace)?);
    }
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || values[i] <= values[i - 1]) && (i == n - 1 || values[i] <= values[i + 1]))
        .collect();
    candidates.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    candidates.truncate(REFINED_CANDIDATES);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for &i in &candidates {
        let (mut a, mut b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(n - 1)]);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = eval(c, &mut trace)?;
        let mut fd = eval(d, &mut trace)?;
        while b - a > opt.tolerance {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = eval(c, &mut trace)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = eval(d, &mut trace)?;
            }
        }
    }
    let (x, value) = trace.iter().copied().fold(trace[0], |acc, (x, v)| if v < acc.1 { (x, v) } else { acc });
    Ok(Minimum { x, value, evaluations: trace.len() })
}

/// Number of grid minima refined by [`minimize_scalar`].
pub const REFINED_CANDIDATES: usize = 3;

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub distance: f64,
    pub method: String,
    pub theta_star: f64,
    pub energy: f64,
    pub exact_energy: f64,
    /// `energy − exact_energy`.
    pub error: f64,
    pub acceptance_probability: f64,
}

/// Optimizes θ at one distance.
pub fn optimize(cfg: &ExperimentConfig, point: &MoleculePoint) -> Result<SweepRecord> {
    cfg.validate()?;
    let pb = Problem::new(cfg, point)?;
    let objective = |t: f64| -> Result<f64> {
        let e = energy_with(t, cfg, &pb)?;
        Ok(match cfg.optimize_on {
            OptimizeOn::Raw => e.raw_energy,
            OptimizeOn::Mitigated => e.energy,
        })
    };
    let m = minimize_scalar(objective, &cfg.optimizer)?;
    let e = energy_with(m.x, cfg, &pb)?;
    let exact_energy = exact_ground_energy(&point.assemble(cfg.encoding))?;
    Ok(SweepRecord {
        distance: point.r_angstrom,
        method: cfg.mitigation.label().to_string(),
        theta_star: m.x,
        energy: e.energy,
        exact_energy,
        error: e.energy - exact_energy,
        acceptance_probability: e.acceptance_probability,
    })
}

/// Optimizes every point independently; records come back in dataset order.
pub fn dissociation_sweep(cfg: &ExperimentConfig, points: &[MoleculePoint]) -> Result<Vec<SweepRecord>> {
    points.par_iter().map(|p| optimize(cfg, p).map_err(|e| with_distance(e, p.r_angstrom))).collect()
}

fn with_distance(e: Error, r: f64) -> Error {
    let ctx = |m: String| format!("at r = {r} Å: {m}");
    match e {
        Error::Dimension(m) => Error::Dimension(ctx(m)),
        Error::Domain(m) => Error::Domain(ctx(m)),
        Error::Parse(m) => Error::Parse(ctx(m)),
        Error::Rejection(m) => Error::Rejection(ctx(m)),
        Error::DegenerateOverlap(m) => Error::DegenerateOverlap(ctx(m)),
        Error::Optimizer(m) => Error::Optimizer(ctx(m)),
        Error::Load(m) => Error::Load(ctx(m)),
        Error::Io(m) => Error::Io(ctx(m)),
        e @ Error::Capacity { .. } => e,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    T1,
    Tphi,
}

impl Channel {
    pub fn label(self) -> &'static str {
        match self {
            Channel::T1 => "T1",
            Channel::Tphi => "Tphi",
        }
    }
}

/// One row of a decoherence scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub time: f64,
    pub swept_channel: Channel,
    pub mitigation: Mitigation,
    pub abs_error: f64,
}

/// The fixed time of the channel that is not being swept.
pub const SCAN_FIXED_TIME: f64 = 20e-6;

/// Two-qubit errors with only decoherence, sweeping `T₁` (with
/// `T_φ` fixed) and `T_φ` (with `T₁` fixed), unmitigated and with S-QSE.
pub fn decoherence_scan(point: &MoleculePoint, times: &[f64], base: &ExperimentConfig) -> Result<Vec<ScanRow>> {
    if times.is_empty() {
        return Err(Error::Domain("no times to scan".into()));
    }
    let jobs: Vec<(f64, Channel, Mitigation)> = times
        .iter()
        .flat_map(|&t| {
            [Channel::T1, Channel::Tphi]
                .into_iter()
                .flat_map(move |c| [Mitigation::None, Mitigation::Sqse].into_iter().map(move |m| (t, c, m)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(t, channel, mitigation)| {
            let noise = match channel {
                Channel::T1 => NoiseModel::decoherence_only(t, SCAN_FIXED_TIME),
                Channel::Tphi => NoiseModel::decoherence_only(SCAN_FIXED_TIME, t),
            };
            let cfg = ExperimentConfig {
                encoding: Encoding::TwoQubitBk,
                rotated: false,
                mitigation,
                noise: Some(noise),
                ..base.clone()
            };
            let rec = optimize(&cfg, point)?;
            Ok(ScanRow { time: t, swept_channel: channel, mitigation, abs_error: rec.error.abs() })
        })
        .collect()
}

/// The six curves comparing two-qubit, four-qubit and rotated four-qubit
/// encodings with and without S-QSE.
pub fn engineering_comparison(points: &[MoleculePoint], base: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    let variants = [
        (Encoding::TwoQubitBk, false, Mitigation::None),
        (Encoding::TwoQubitBk, false, Mitigation::Sqse),
        (Encoding::FourQubitJw, false, Mitigation::None),
        (Encoding::FourQubitJw, false, Mitigation::Sqse),
        (Encoding::FourQubitJw, true, Mitigation::None),
        (Encoding::FourQubitJw, true, Mitigation::Sqse),
    ];
    let jobs: Vec<(ExperimentConfig, &MoleculePoint)> = variants
        .iter()
        .flat_map(|&(encoding, rotated, mitigation)| {
            let cfg = ExperimentConfig { encoding, rotated, mitigation, ..base.clone() };
            points.iter().map(move |p| (cfg.clone(), p))
        })
        .collect();
    jobs.par_iter()
        .map(|(cfg, p)| {
            let mut rec = optimize(cfg, p).map_err(|e| with_distance(e, p.r_angstrom))?;
            rec.method = cfg.method_label();
            Ok(rec)
        })
        .collect()
}

/// Points of `ds` whose distances lie in `[lo, hi]`.
pub fn select_points(ds: &MoleculeDataset, lo: f64, hi: f64) -> Vec<MoleculePoint> {
    ds.points.iter().filter(|p| p.r_angstrom >= lo - 1e-12 && p.r_angstrom <= hi + 1e-12).cloned().collect()
}
