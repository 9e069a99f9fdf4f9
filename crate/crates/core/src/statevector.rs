//! Dense statevector simulator.
//!
//! Qubit 0 is the least-significant bit of the basis index. Amplitudes are
//! `Complex64`; all reductions run in index order so results are bitwise
//! reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest register the engine will allocate.
pub const MAX_QUBITS: usize = 28;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Single-qubit operation applied to a target, optionally under controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    /// `cos(θ/2) I - i sin(θ/2) σ_y`
    Ry(f64),
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    Rz(f64),
    /// `diag(1, e^{iθ})`
    Phase(f64),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "p",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Phase(t) => Some(t),
            GateKind::H | GateKind::X => None,
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            other => other,
        }
    }

    /// Row-major 2x2 matrix.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        match *self {
            GateKind::H => {
                let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[s, s], [s, -s]]
            }
            GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Ry(t) => {
                let (s, c) = (0.5 * t).sin_cos();
                [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ]
            }
            GateKind::Rz(t) => [
                [Complex64::from_polar(1.0, -0.5 * t), ZERO],
                [ZERO, Complex64::from_polar(1.0, 0.5 * t)],
            ],
            GateKind::Phase(t) => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, t)]],
        }
    }
}

/// A circuit element.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// `kind` on `target`, active when every control qubit is `|1⟩`.
    Unitary {
        kind: GateKind,
        target: usize,
        controls: Vec<usize>,
    },
    Swap {
        a: usize,
        b: usize,
    },
    /// `e^{iθ}` on the subspace where every control is `|1⟩` (the whole
    /// space without controls).
    GlobalPhase {
        angle: f64,
        controls: Vec<usize>,
    },
    /// `body` applied `power` times, controlled by `control`.
    ControlledPower {
        control: usize,
        body: Arc<[Gate]>,
        power: u64,
    },
}

impl Gate {
    pub fn h(target: usize) -> Self {
        Self::single(GateKind::H, target)
    }
    pub fn x(target: usize) -> Self {
        Self::single(GateKind::X, target)
    }
    pub fn ry(target: usize, theta: f64) -> Self {
        Self::single(GateKind::Ry(theta), target)
    }
    pub fn rz(target: usize, theta: f64) -> Self {
        Self::single(GateKind::Rz(theta), target)
    }
    pub fn phase(target: usize, theta: f64) -> Self {
        Self::single(GateKind::Phase(theta), target)
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::controlled(GateKind::X, control, target)
    }
    pub fn cry(control: usize, target: usize, theta: f64) -> Self {
        Self::controlled(GateKind::Ry(theta), control, target)
    }
    pub fn crz(control: usize, target: usize, theta: f64) -> Self {
        Self::controlled(GateKind::Rz(theta), control, target)
    }
    pub fn cphase(control: usize, target: usize, theta: f64) -> Self {
        Self::controlled(GateKind::Phase(theta), control, target)
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        Gate::Unitary {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    pub fn controlled(kind: GateKind, control: usize, target: usize) -> Self {
        Gate::Unitary {
            kind,
            target,
            controls: vec![control],
        }
    }

    /// Short label used for gate counting and text dumps: `ry`, `cry`,
    /// `cx`, `c3p`, `swap`, `gphase`, `cpow`, ...
    pub fn label(&self) -> String {
        match self {
            Gate::Unitary { kind, controls, .. } => prefixed(controls.len(), kind.name()),
            Gate::Swap { .. } => "swap".into(),
            Gate::GlobalPhase { controls, .. } => prefixed(controls.len(), "gphase"),
            Gate::ControlledPower { .. } => "cpow".into(),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Gate::Unitary {
                kind,
                target,
                controls,
            } => Gate::Unitary {
                kind: kind.inverse(),
                target: *target,
                controls: controls.clone(),
            },
            Gate::Swap { a, b } => Gate::Swap { a: *a, b: *b },
            Gate::GlobalPhase { angle, controls } => Gate::GlobalPhase {
                angle: -angle,
                controls: controls.clone(),
            },
            Gate::ControlledPower {
                control,
                body,
                power,
            } => Gate::ControlledPower {
                control: *control,
                body: inverse_sequence(body).into(),
                power: *power,
            },
        }
    }

    /// Every qubit the gate touches.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Unitary {
                target, controls, ..
            } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
            Gate::Swap { a, b } => vec![*a, *b],
            Gate::GlobalPhase { controls, .. } => controls.clone(),
            Gate::ControlledPower { control, body, .. } => {
                let mut q = vec![*control];
                for g in body.iter() {
                    q.extend(g.qubits());
                }
                q.sort_unstable();
                q.dedup();
                q
            }
        }
    }
}

fn prefixed(controls: usize, base: &str) -> String {
    match controls {
        0 => base.to_string(),
        1 => format!("c{base}"),
        c => format!("c{c}{base}"),
    }
}

/// Reverses a gate sequence and inverts each element.
pub fn inverse_sequence(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

/// Normalized amplitude vector of a `num_qubits` register.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Size {
                qubits: num_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Ok(Self { num_qubits, amps })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() || len.trailing_zeros() as usize > MAX_QUBITS {
            return Err(Error::Size {
                qubits: len.trailing_zeros() as usize,
                max: MAX_QUBITS,
            });
        }
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(crate::error::domain(
                "amplitudes must have a positive finite norm",
            ));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q < self.num_qubits {
            Ok(())
        } else {
            Err(Error::Index {
                index: q,
                num_qubits: self.num_qubits,
            })
        }
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        let qubits = match gate {
            Gate::ControlledPower { control, body, .. } => {
                self.check(*control)?;
                for g in body.iter() {
                    self.check_gate(g)?;
                    if g.qubits().contains(control) {
                        return Err(crate::error::domain(format!(
                            "controlled block acts on its own control qubit {control}"
                        )));
                    }
                }
                return Ok(());
            }
            g => g.qubits(),
        };
        for (i, q) in qubits.iter().enumerate() {
            self.check(*q)?;
            if qubits[..i].contains(q) {
                return Err(crate::error::domain(format!(
                    "qubit {q} used twice in one gate"
                )));
            }
        }
        if let Gate::Unitary { kind, .. } = gate {
            if kind.angle().is_some_and(|t| !t.is_finite()) {
                return Err(crate::error::domain("non-finite rotation angle"));
            }
        }
        Ok(())
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        self.check_gate(gate)?;
        self.apply_controlled(gate, 0);
        Ok(())
    }

    /// Applies a gate sequence in order.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    fn apply_controlled(&mut self, gate: &Gate, extra_mask: usize) {
        match gate {
            Gate::Unitary {
                kind,
                target,
                controls,
            } => {
                let mask = extra_mask | mask_of(controls);
                self.apply_1q(&kind.matrix(), *target, mask);
            }
            Gate::Swap { a, b } => {
                let (ba, bb) = (1usize << a, 1usize << b);
                for i in 0..self.amps.len() {
                    if i & ba != 0 && i & bb == 0 && i & extra_mask == extra_mask {
                        self.amps.swap(i, i ^ ba ^ bb);
                    }
                }
            }
            Gate::GlobalPhase { angle, controls } => {
                let mask = extra_mask | mask_of(controls);
                let ph = Complex64::from_polar(1.0, *angle);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a *= ph;
                    }
                }
            }
            Gate::ControlledPower {
                control,
                body,
                power,
            } => {
                let mask = extra_mask | (1 << control);
                for _ in 0..*power {
                    for g in body.iter() {
                        self.apply_controlled(g, mask);
                    }
                }
            }
        }
    }

    fn apply_1q(&mut self, u: &[[Complex64; 2]; 2], target: usize, mask: usize) {
        let bit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & bit != 0 || i & mask != mask {
                continue;
            }
            let j = i | bit;
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = u[0][0] * a + u[0][1] * b;
            self.amps[j] = u[1][0] * a + u[1][1] * b;
        }
    }

    /// `⟨ψ| σ_axis on qubit |ψ⟩`.
    pub fn expval_pauli(&self, axis: Pauli, qubit: usize) -> Result<f64> {
        self.check(qubit)?;
        let bit = 1usize << qubit;
        let mut acc = 0.0;
        for i in (0..self.amps.len()).filter(|i| i & bit == 0) {
            let (a, b) = (self.amps[i], self.amps[i | bit]);
            acc += match axis {
                Pauli::X => 2.0 * (a.conj() * b).re,
                Pauli::Y => 2.0 * (a.conj() * b).im,
                Pauli::Z => a.norm_sqr() - b.norm_sqr(),
            };
        }
        Ok(acc)
    }

    /// Probability that `qubit` reads `value`.
    pub fn subspace_probability(&self, qubit: usize, value: u8) -> Result<f64> {
        self.check(qubit)?;
        if value > 1 {
            return Err(crate::error::domain(format!(
                "qubit value {value} is not 0 or 1"
            )));
        }
        let bit = 1usize << qubit;
        let want = if value == 1 { bit } else { 0 };
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Outcome distribution of the given qubits; `qubits[0]` is the
    /// least-significant bit of the returned index.
    pub fn marginal_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check(q)?;
        }
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let y = qubits
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &q)| acc | (((i >> q) & 1) << k));
            out[y] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Draws `shots` full-register measurements. Keys are bit strings with
    /// the highest qubit first.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
        if shots == 0 {
            return Err(crate::error::domain("shots must be at least 1"));
        }
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.gen::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            *hist.entry(idx).or_default() += 1;
        }
        Ok(hist
            .into_iter()
            .map(|(i, c)| (format!("{:0width$b}", i, width = self.num_qubits), c))
            .collect())
    }

    /// Writes `index,re,im` rows.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(out, "{i},{},{}", a.re, a.im)?;
        }
        Ok(())
    }
}

fn mask_of(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, q| m | (1 << q))
}

/// Pauli measurement axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}
