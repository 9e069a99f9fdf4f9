//! Amplitude estimation: the Grover-type operator `Q = -A S_0 A† S_f` and
//! phase estimation of its eigenphases `±2θ_a`, where `sin²θ_a = a` is the
//! weight of the flag qubit's `|1⟩` subspace in `A|0⟩`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::Circuit;
use crate::error::{domain, Error, Result};
use crate::statevector::{Gate, GateKind, Statevector, MAX_QUBITS};

/// An amplitude-estimation instance.
#[derive(Clone, Debug)]
pub struct AeProblem {
    /// The algorithm `A`; acts on qubits `0..prep.num_qubits()`.
    pub prep: Circuit,
    /// Qubit whose `|1⟩` subspace is the "good" subspace.
    pub flag_qubit: usize,
    /// Number of phase-estimation ancillas; `M = 2^m`.
    pub m: u32,
}

impl AeProblem {
    pub fn new(prep: Circuit, flag_qubit: usize, m: u32) -> Result<Self> {
        if flag_qubit >= prep.num_qubits() {
            return Err(Error::Index {
                index: flag_qubit,
                num_qubits: prep.num_qubits(),
            });
        }
        if m == 0 {
            return Err(domain("amplitude estimation needs at least one ancilla"));
        }
        Ok(Self {
            prep,
            flag_qubit,
            m,
        })
    }

    pub fn resolution(&self) -> u64 {
        1u64 << self.m
    }
}

/// How the ancilla register is read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AeReadout {
    /// Most probable outcome of the exact distribution (smallest `y` on ties).
    MostLikely,
    /// One outcome sampled from the distribution.
    Sampled { seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AeResult {
    pub y: u64,
    pub m: u32,
    /// `sin²(π y / M)`
    pub a_hat: f64,
    /// Full outcome pmf, indexed by `y`.
    pub distribution: Option<Vec<f64>>,
}

/// Estimator of `a` for outcome `y` out of `M`.
pub fn a_from_outcome(y: u64, m: u32) -> f64 {
    let s = (PI * y as f64 / (1u64 << m) as f64).sin();
    s * s
}

/// Standard error bound `2π sqrt(a(1-a)) / M + π² / M²` that holds with
/// probability at least `8/π²`.
pub fn error_bound(a: f64, m: u32) -> f64 {
    let mm = (1u64 << m) as f64;
    2.0 * PI * (a * (1.0 - a)).max(0.0).sqrt() / mm + PI * PI / (mm * mm)
}

/// Phase flip of `|0…0⟩` on qubits `0..r`.
fn zero_reflection(r: usize) -> Vec<Gate> {
    let mut gates: Vec<Gate> = (0..r).map(Gate::x).collect();
    gates.push(Gate::Unitary {
        kind: GateKind::Phase(PI),
        target: 0,
        controls: (1..r).collect(),
    });
    gates.extend((0..r).map(Gate::x));
    gates
}

/// `Q = -A S_0 A† S_f` as a circuit on the prep register.
pub fn build_grover_operator(problem: &AeProblem) -> Circuit {
    let r = problem.prep.num_qubits();
    let mut q = Circuit::new(r);
    // S_f
    q.push(Gate::phase(problem.flag_qubit, PI));
    q.extend(&problem.prep.inverse());
    for g in zero_reflection(r) {
        q.push(g);
    }
    q.extend(&problem.prep);
    q.push(Gate::GlobalPhase {
        angle: PI,
        controls: Vec::new(),
    });
    q
}

/// Quantum Fourier transform on qubits `0..m`, qubit 0 least significant:
/// `|x⟩ ↦ M^{-1/2} Σ_k e^{2πi xk/M} |k⟩`.
pub fn qft_circuit(m: usize) -> Result<Circuit> {
    if m == 0 {
        return Err(domain("QFT needs at least one qubit"));
    }
    let mut c = Circuit::new(m);
    for j in (0..m).rev() {
        c.push(Gate::h(j));
        for k in (0..j).rev() {
            c.push(Gate::cphase(k, j, PI / (1u64 << (j - k)) as f64));
        }
    }
    for i in 0..m / 2 {
        c.push(Gate::Swap { a: i, b: m - 1 - i });
    }
    Ok(c)
}

fn shifted(gate: &Gate, offset: usize) -> Gate {
    match gate {
        Gate::Unitary {
            kind,
            target,
            controls,
        } => Gate::Unitary {
            kind: *kind,
            target: target + offset,
            controls: controls.iter().map(|c| c + offset).collect(),
        },
        Gate::Swap { a, b } => Gate::Swap {
            a: a + offset,
            b: b + offset,
        },
        Gate::GlobalPhase { angle, controls } => Gate::GlobalPhase {
            angle: *angle,
            controls: controls.iter().map(|c| c + offset).collect(),
        },
        Gate::ControlledPower {
            control,
            body,
            power,
        } => Gate::ControlledPower {
            control: control + offset,
            body: body
                .iter()
                .map(|g| shifted(g, offset))
                .collect::<Vec<_>>()
                .into(),
            power: *power,
        },
    }
}

/// Full phase-estimation circuit: prep on `0..r`, ancillas on `r..r+m`.
pub fn ae_circuit(problem: &AeProblem) -> Result<Circuit> {
    let r = problem.prep.num_qubits();
    let m = problem.m as usize;
    if r + m > MAX_QUBITS {
        return Err(Error::Size {
            qubits: r + m,
            max: MAX_QUBITS,
        });
    }
    let q_body: Arc<[Gate]> = build_grover_operator(problem).into_gates().into();
    let mut c = Circuit::new(r + m);
    c.extend(&problem.prep);
    for j in 0..m {
        c.push(Gate::h(r + j));
    }
    for j in 0..m {
        c.push(Gate::ControlledPower {
            control: r + j,
            body: q_body.clone(),
            power: 1 << j,
        });
    }
    for g in qft_circuit(m)?.inverse().gates() {
        c.push(shifted(g, r));
    }
    Ok(c)
}

/// Outcome distribution of the ancilla register.
pub fn ae_distribution(problem: &AeProblem) -> Result<Vec<f64>> {
    let r = problem.prep.num_qubits();
    let c = ae_circuit(problem)?;
    let mut s = Statevector::new(c.num_qubits())?;
    s.apply_all(c.gates())?;
    let ancillas: Vec<usize> = (r..r + problem.m as usize).collect();
    s.marginal_distribution(&ancillas)
}

/// Runs amplitude estimation and reads one outcome.
pub fn run_ae(problem: &AeProblem, readout: AeReadout) -> Result<AeResult> {
    let pmf = ae_distribution(problem)?;
    let y = match readout {
        AeReadout::MostLikely => {
            pmf.iter()
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |best, (y, &p)| {
                    if p > best.1 + 1e-12 {
                        (y, p)
                    } else {
                        best
                    }
                })
                .0
        }
        AeReadout::Sampled { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let total: f64 = pmf.iter().sum();
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = pmf.len() - 1;
            for (y, p) in pmf.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = y;
                    break;
                }
            }
            pick
        }
    } as u64;
    Ok(AeResult {
        y,
        m: problem.m,
        a_hat: a_from_outcome(y, problem.m),
        distribution: match readout {
            AeReadout::MostLikely => Some(pmf),
            AeReadout::Sampled { .. } => None,
        },
    })
}

/// Writes `y,probability,a_hat` rows.
pub fn write_pmf_csv(pmf: &[f64], m: u32, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["y", "probability", "a_hat"])?;
    for (y, p) in pmf.iter().enumerate() {
        w.write_record([
            y.to_string(),
            p.to_string(),
            a_from_outcome(y as u64, m).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
