//! Lowers a [`DspModel`] and an evaluation point into a gate-level circuit:
//! index-register preparation followed by the controlled-V data ladder.
//!
//! Register layout: index qubits `0..n` (qubit `l` holds `j_{l+1}`), the
//! data qubit at `n`, amplitude-estimation ancillas from `n + 1` upwards.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{DspModel, ModelKind};
use crate::statevector::{Gate, GateKind, Statevector};

/// An ordered gate list on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    index_qubits: Option<usize>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            index_qubits: None,
            gates: Vec::new(),
        }
    }

    /// Circuit with the DSP register layout for `n` index qubits plus the
    /// data qubit.
    pub fn with_layout(n: usize) -> Self {
        Self {
            num_qubits: n + 1,
            index_qubits: Some(n),
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn index_qubits(&self) -> Option<usize> {
        self.index_qubits
    }

    pub fn data_qubit(&self) -> Option<usize> {
        self.index_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    /// Appends a gate, growing the register if the gate reaches past it.
    pub fn push(&mut self, gate: Gate) {
        if let Some(&top) = gate.qubits().iter().max() {
            self.num_qubits = self.num_qubits.max(top + 1);
        }
        self.gates.push(gate);
    }

    pub fn extend(&mut self, other: &Circuit) {
        for g in &other.gates {
            self.push(g.clone());
        }
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            index_qubits: self.index_qubits,
            gates: crate::statevector::inverse_sequence(&self.gates),
        }
    }

    /// Runs the circuit on `|0…0⟩`.
    pub fn simulate(&self) -> Result<Statevector> {
        let mut s = Statevector::new(self.num_qubits)?;
        s.apply_all(&self.gates)?;
        Ok(s)
    }

    /// Same circuit with every controlled Rz replaced by its two-CNOT form.
    pub fn with_crz_decomposed(&self) -> Circuit {
        let mut out = Circuit {
            num_qubits: self.num_qubits,
            index_qubits: self.index_qubits,
            gates: Vec::with_capacity(self.gates.len()),
        };
        for g in &self.gates {
            match decompose_controlled_rz(g) {
                Ok(parts) => out.gates.extend(parts),
                Err(_) => out.gates.push(g.clone()),
            }
        }
        out
    }

    /// Number of singly-controlled Ry/Rz gates acting on the data qubit.
    pub fn controlled_v_count(&self) -> usize {
        let Some(data) = self.data_qubit() else {
            return 0;
        };
        self.gates
            .iter()
            .filter(|g| {
                matches!(g, Gate::Unitary { kind: GateKind::Ry(_) | GateKind::Rz(_), target, controls }
                    if *target == data && controls.len() == 1)
            })
            .count()
    }

    /// One gate per line: `label qubits [angle]`, qubits listed controls
    /// first and comma separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let layout = self
            .index_qubits
            .map_or_else(|| "-".to_string(), |n| n.to_string());
        writeln!(out, "circuit {} {}", self.num_qubits, layout).unwrap();
        write_gates(&mut out, &self.gates, 0);
        out
    }

    /// Parses the format written by [`Circuit::to_text`].
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lno, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty circuit text".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (num_qubits, index_qubits) = match parts.as_slice() {
            ["circuit", q, layout] => {
                let q: usize = parse_num(q, lno)?;
                let layout = match *layout {
                    "-" => None,
                    s => Some(parse_num::<usize>(s, lno)?),
                };
                (q, layout)
            }
            _ => {
                return Err(Error::Parse {
                    line: lno,
                    msg: "expected `circuit <qubits> <index-qubits|->`".into(),
                })
            }
        };
        if num_qubits == 0 || num_qubits > crate::statevector::MAX_QUBITS {
            return Err(Error::Parse {
                line: lno,
                msg: format!("unsupported qubit count {num_qubits}"),
            });
        }
        if index_qubits.is_some_and(|n| n + 1 > num_qubits) {
            return Err(Error::Parse {
                line: lno,
                msg: "layout does not fit the register".into(),
            });
        }
        let lines: Vec<(usize, &str)> = lines.collect();
        let mut pos = 0;
        let gates = parse_gates(&lines, &mut pos, usize::MAX, num_qubits, 0)?;
        Ok(Circuit {
            num_qubits,
            index_qubits,
            gates,
        })
    }
}

fn write_gates(out: &mut String, gates: &[Gate], depth: usize) {
    let pad = "  ".repeat(depth);
    for g in gates {
        match g {
            Gate::Unitary {
                kind,
                target,
                controls,
            } => {
                let qs = join(controls.iter().chain(std::iter::once(target)));
                match kind.angle() {
                    Some(t) => writeln!(out, "{pad}{} {qs} {t}", g.label()),
                    None => writeln!(out, "{pad}{} {qs}", g.label()),
                }
                .unwrap();
            }
            Gate::Swap { a, b } => writeln!(out, "{pad}swap {a},{b}").unwrap(),
            Gate::GlobalPhase { angle, controls } => {
                let qs = if controls.is_empty() {
                    "-".to_string()
                } else {
                    join(controls.iter())
                };
                writeln!(out, "{pad}{} {qs} {angle}", g.label()).unwrap();
            }
            Gate::ControlledPower {
                control,
                body,
                power,
            } => {
                writeln!(out, "{pad}cpow {control} {power} {}", body.len()).unwrap();
                write_gates(out, body, depth + 1);
            }
        }
    }
}

fn join<'a>(qs: impl Iterator<Item = &'a usize>) -> String {
    qs.map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number `{s}`"),
    })
}

const MAX_NESTING: usize = 8;

fn parse_gates(
    lines: &[(usize, &str)],
    pos: &mut usize,
    count: usize,
    num_qubits: usize,
    depth: usize,
) -> Result<Vec<Gate>> {
    let mut gates = Vec::new();
    while *pos < lines.len() && gates.len() < count {
        let (lno, line) = lines[*pos];
        *pos += 1;
        let err = |msg: String| Error::Parse { line: lno, msg };
        let parts: Vec<&str> = line.split_whitespace().collect();
        let qubits = |s: &str| -> Result<Vec<usize>> {
            if s == "-" {
                return Ok(Vec::new());
            }
            let qs = s
                .split(',')
                .map(|q| parse_num::<usize>(q, lno))
                .collect::<Result<Vec<_>>>()?;
            if let Some(q) = qs.iter().find(|&&q| q >= num_qubits) {
                return Err(err(format!(
                    "qubit {q} outside a {num_qubits}-qubit register"
                )));
            }
            Ok(qs)
        };
        let gate = match parts.as_slice() {
            ["swap", qs] => match qubits(qs)?.as_slice() {
                [a, b] => Gate::Swap { a: *a, b: *b },
                _ => return Err(err("swap takes two qubits".into())),
            },
            ["cpow", control, power, len] => {
                if depth >= MAX_NESTING {
                    return Err(err("blocks nested too deeply".into()));
                }
                let control: usize = parse_num(control, lno)?;
                if control >= num_qubits {
                    return Err(err(format!("control {control} outside register")));
                }
                let power: u64 = parse_num(power, lno)?;
                let len: usize = parse_num(len, lno)?;
                let body = parse_gates(lines, pos, len, num_qubits, depth + 1)?;
                if body.len() != len {
                    return Err(err(format!(
                        "block declares {len} gates, found {}",
                        body.len()
                    )));
                }
                Gate::ControlledPower {
                    control,
                    body: Arc::from(body),
                    power,
                }
            }
            [label, qs, rest @ ..] => {
                let (controls_n, base) =
                    split_label(label).ok_or_else(|| err(format!("unknown gate `{label}`")))?;
                let mut qs = qubits(qs)?;
                let angle = match rest {
                    [] => None,
                    [a] => Some(parse_num::<f64>(a, lno)?),
                    _ => return Err(err("trailing fields".into())),
                };
                if base == "gphase" {
                    let angle = angle.ok_or_else(|| err("gphase needs an angle".into()))?;
                    if qs.len() != controls_n {
                        return Err(err("control count does not match label".into()));
                    }
                    Gate::GlobalPhase {
                        angle,
                        controls: qs,
                    }
                } else {
                    if qs.len() != controls_n + 1 {
                        return Err(err("qubit count does not match label".into()));
                    }
                    let kind = match (base, angle) {
                        ("h", None) => GateKind::H,
                        ("x", None) => GateKind::X,
                        ("ry", Some(t)) => GateKind::Ry(t),
                        ("rz", Some(t)) => GateKind::Rz(t),
                        ("p", Some(t)) => GateKind::Phase(t),
                        _ => return Err(err(format!("bad operands for `{label}`"))),
                    };
                    let target = qs.pop().expect("non-empty");
                    Gate::Unitary {
                        kind,
                        target,
                        controls: qs,
                    }
                }
            }
            _ => return Err(err(format!("cannot parse `{line}`"))),
        };
        gates.push(gate);
    }
    Ok(gates)
}

fn split_label(label: &str) -> Option<(usize, &str)> {
    const BASES: [&str; 6] = ["gphase", "ry", "rz", "h", "x", "p"];
    if let Some(base) = BASES.iter().find(|b| **b == label) {
        return Some((0, base));
    }
    let rest = label.strip_prefix('c')?;
    if let Some(base) = BASES.iter().find(|b| **b == rest) {
        return Some((1, base));
    }
    let digits = rest.chars().take_while(char::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let n: usize = rest[..digits].parse().ok()?;
    let base = BASES.iter().find(|b| **b == &rest[digits..])?;
    (2..=64).contains(&n).then_some((n, base))
}

/// Measurement scheme used to read out the characteristic function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// `V(x) = Rz(x)`, data input `|+⟩`, read `⟨σ_x⟩ + i⟨σ_y⟩`.
    PauliRz,
    /// `V(x) = Ry(±x)`, data input `|0⟩` (sign +1) or `Ry(π/2)|0⟩`
    /// (sign -1), read the `|1⟩` subspace weight.
    AmplitudeRy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementScheme {
    pub kind: SchemeKind,
    pub sign: i8,
    pub v: f64,
}

impl MeasurementScheme {
    pub fn pauli(v: f64) -> Self {
        Self {
            kind: SchemeKind::PauliRz,
            sign: 1,
            v,
        }
    }

    /// Cosine readout (`sign = +1`) of the amplitude scheme.
    pub fn amplitude_cos(v: f64) -> Self {
        Self {
            kind: SchemeKind::AmplitudeRy,
            sign: 1,
            v,
        }
    }

    /// Sine readout (`sign = -1`, data input `Ry(π/2)|0⟩`).
    pub fn amplitude_sin(v: f64) -> Self {
        Self {
            kind: SchemeKind::AmplitudeRy,
            sign: -1,
            v,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.v.is_finite() {
            return Err(crate::error::domain("evaluation point v must be finite"));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(crate::error::domain("scheme sign must be +1 or -1"));
        }
        Ok(())
    }

    /// The data-qubit unitary `V(v·x)`.
    pub fn v_kind(&self, x: f64) -> GateKind {
        let angle = f64::from(self.sign) * self.v * x;
        match self.kind {
            SchemeKind::PauliRz => GateKind::Rz(angle),
            SchemeKind::AmplitudeRy => GateKind::Ry(angle),
        }
    }

    /// Gates that prepare the data-qubit input state `|ψ⟩`.
    pub fn data_input(&self, data: usize) -> Vec<Gate> {
        match (self.kind, self.sign) {
            (SchemeKind::PauliRz, _) => vec![Gate::h(data)],
            (SchemeKind::AmplitudeRy, 1) => Vec::new(),
            (SchemeKind::AmplitudeRy, _) => vec![Gate::ry(data, FRAC_PI_2)],
        }
    }
}

fn check_k(model: &DspModel) -> Result<()> {
    if model.k() > 2 {
        Err(Error::UnsupportedK(model.k()))
    } else {
        Ok(())
    }
}

fn prob_at(row: &[f64], j: usize) -> f64 {
    row.get(j).copied().unwrap_or(0.0)
}

fn value_at(model: &DspModel, level: usize, j: usize) -> f64 {
    model.values(level).get(j).copied().unwrap_or(0.0)
}

/// Rotation with `Ry(θ)|0⟩ = sqrt(p0)|0⟩ + sqrt(1 - p0)|1⟩`.
pub fn prep_angle(p0: f64) -> f64 {
    2.0 * p0.clamp(0.0, 1.0).sqrt().acos()
}

fn prep_single(target: usize, p0: f64) -> Gate {
    if p0 == 0.5 {
        Gate::h(target)
    } else {
        Gate::ry(target, prep_angle(p0))
    }
}

/// Gates preparing `Σ_j sqrt(p(j)) |j⟩` on the index register.
///
/// Independent models get one rotation per index qubit. Markov and
/// correlated-walk models rotate the first qubit and then prepare qubit
/// `l` with `|0⟩⟨0| ⊗ Ry(θ⁽⁰⁾) + |1⟩⟨1| ⊗ Ry(θ⁽¹⁾)` controlled by qubit
/// `l - 1`; the `|0⟩` branch is an X-conjugated CRy.
pub fn compile_index_prep(model: &DspModel) -> Result<Circuit> {
    check_k(model)?;
    let n = model.n();
    let mut c = Circuit::with_layout(n);
    c.push(prep_single(0, prob_at(model.initial(), 0)));
    for level in 1..n {
        match model.kind() {
            ModelKind::Independent => {
                let probs = model.level_probs(level).expect("independent");
                c.push(prep_single(level, prob_at(probs, 0)));
            }
            ModelKind::FirstOrderMarkov | ModelKind::CorrelatedWalk => {
                let t = model.transition(level);
                let from_one = t.get(1).map_or(1.0, |row| prob_at(row, 0));
                c.push(Gate::cry(level - 1, level, prep_angle(from_one)));
                c.push(Gate::x(level - 1));
                c.push(Gate::cry(level - 1, level, prep_angle(prob_at(&t[0], 0))));
                c.push(Gate::x(level - 1));
            }
        }
    }
    Ok(c)
}

/// The data ladder: the unconditional `V(v·x0)` followed, per level, by
/// controlled `V(v·x_{l,1})` on the `|1⟩` branch and X-conjugated
/// controlled `V(v·x_{l,0})` on the `|0⟩` branch. Exactly `n·k`
/// controlled-V gates.
pub fn compile_data_ladder(model: &DspModel, scheme: &MeasurementScheme) -> Result<Circuit> {
    check_k(model)?;
    scheme.validate()?;
    let n = model.n();
    let data = n;
    let mut c = Circuit::with_layout(n);
    c.push(Gate::single(scheme.v_kind(model.x0()), data));
    for level in 0..n {
        c.push(Gate::controlled(
            scheme.v_kind(value_at(model, level, 1)),
            level,
            data,
        ));
        c.push(Gate::x(level));
        c.push(Gate::controlled(
            scheme.v_kind(value_at(model, level, 0)),
            level,
            data,
        ));
        c.push(Gate::x(level));
    }
    Ok(c)
}

/// Index preparation, data input and ladder in one circuit.
pub fn compile(model: &DspModel, scheme: &MeasurementScheme) -> Result<Circuit> {
    let mut c = compile_index_prep(model)?;
    let data = model.n();
    for g in scheme.data_input(data) {
        c.push(g);
    }
    c.extend(&compile_data_ladder(model, scheme)?);
    Ok(c)
}

/// `CRz(θ) = Rz(θ/2)_t · CNOT · Rz(-θ/2)_t · CNOT`.
pub fn decompose_controlled_rz(gate: &Gate) -> Result<Vec<Gate>> {
    match gate {
        Gate::Unitary {
            kind: GateKind::Rz(theta),
            target,
            controls,
        } if controls.len() == 1 => {
            let (c, t) = (controls[0], *target);
            Ok(vec![
                Gate::rz(t, theta / 2.0),
                Gate::cnot(c, t),
                Gate::rz(t, -theta / 2.0),
                Gate::cnot(c, t),
            ])
        }
        other => Err(Error::WrongGateKind {
            expected: "crz",
            found: other.label(),
        }),
    }
}

/// Gate counts keyed by [`Gate::label`]. Bodies of controlled powers are
/// not expanded.
pub fn gate_count(circuit: &Circuit) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for g in circuit.gates() {
        *counts.entry(g.label()).or_insert(0) += 1;
    }
    counts
}
