//! Gate set and circuit representation.
//!
//! The gate set is small: Hadamard, the phase rotations `R_k` and `-R_k`,
//! X (plain, singly or multiply controlled with per-control polarity), SWAP,
//! and general controlled dyadic phases. Every gate has a closed-form inverse.

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Result, SimError};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GateKind {
    H,
    /// `diag(1, e^{2πi/2^k})`
    Rk(u8),
    /// `diag(1, e^{-2πi/2^k})`
    NegRk(u8),
    X,
    Swap,
    /// `diag(1, e^{2πiθ})`
    CPhase(Dyadic),
    /// `diag(1, e^{-2πiθ})`
    NegCPhase(Dyadic),
}

impl GateKind {
    /// The phase this gate applies to a `|1⟩` target, if it is diagonal.
    pub fn phase(&self) -> Option<Dyadic> {
        match *self {
            GateKind::Rk(k) => Some(Dyadic::rk(k)),
            GateKind::NegRk(k) => Some(Dyadic::rk(k).neg()),
            GateKind::CPhase(theta) => Some(theta),
            GateKind::NegCPhase(theta) => Some(theta.neg()),
            _ => None,
        }
    }

    pub fn inverse(&self) -> GateKind {
        match *self {
            GateKind::H => GateKind::H,
            GateKind::Rk(k) => GateKind::NegRk(k),
            GateKind::NegRk(k) => GateKind::Rk(k),
            GateKind::X => GateKind::X,
            GateKind::Swap => GateKind::Swap,
            GateKind::CPhase(theta) => GateKind::NegCPhase(theta),
            GateKind::NegCPhase(theta) => GateKind::CPhase(theta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::Rk(_) => "rk",
            GateKind::NegRk(_) => "neg_rk",
            GateKind::X => "x",
            GateKind::Swap => "swap",
            GateKind::CPhase(_) => "cphase",
            GateKind::NegCPhase(_) => "neg_cphase",
        }
    }
}

/// A control qubit with polarity: `positive` enables on `|1⟩`, otherwise `|0⟩`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Control {
    pub qubit: usize,
    pub positive: bool,
}

impl Control {
    pub fn pos(qubit: usize) -> Self {
        Control { qubit, positive: true }
    }

    pub fn neg(qubit: usize) -> Self {
        Control { qubit, positive: false }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn h(target: usize) -> Self {
        Gate { kind: GateKind::H, targets: vec![target], controls: vec![] }
    }

    pub fn x(target: usize) -> Self {
        Gate { kind: GateKind::X, targets: vec![target], controls: vec![] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::x(target).controlled(Control::pos(control))
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        Gate { kind: GateKind::X, targets: vec![target], controls }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate { kind: GateKind::Swap, targets: vec![a, b], controls: vec![] }
    }

    pub fn rk(k: u8, target: usize) -> Self {
        Gate { kind: GateKind::Rk(k), targets: vec![target], controls: vec![] }
    }

    pub fn neg_rk(k: u8, target: usize) -> Self {
        Gate { kind: GateKind::NegRk(k), targets: vec![target], controls: vec![] }
    }

    pub fn cphase(theta: Dyadic, target: usize) -> Self {
        Gate { kind: GateKind::CPhase(theta), targets: vec![target], controls: vec![] }
    }

    pub fn neg_cphase(theta: Dyadic, target: usize) -> Self {
        Gate { kind: GateKind::NegCPhase(theta), targets: vec![target], controls: vec![] }
    }

    pub fn controlled(mut self, c: Control) -> Self {
        self.controls.push(c);
        self
    }

    pub fn with_controls(mut self, cs: &[Control]) -> Self {
        self.controls.extend_from_slice(cs);
        self
    }

    pub fn inverse(&self) -> Gate {
        Gate { kind: self.kind.inverse(), targets: self.targets.clone(), controls: self.controls.clone() }
    }

    /// All qubits the gate touches, targets first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit))
    }

    /// Rejects duplicate indices and indices at or beyond `num_qubits`.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let mut seen: Vec<usize> = Vec::with_capacity(self.targets.len() + self.controls.len());
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(SimError::QubitOutOfRange { index: q, num_qubits });
            }
            if seen.contains(&q) {
                return Err(SimError::IndexCollision(q));
            }
            seen.push(q);
        }
        Ok(())
    }
}

/// An ordered gate list, optionally grouped into parallel rounds of
/// pairwise-disjoint gates.
#[derive(Clone, Default, Debug)]
pub struct Circuit {
    pub gates: Vec<Gate>,
    /// `rounds[i]` is the round index of `gates[i]`; `None` means sequential.
    pub rounds: Option<Vec<usize>>,
}

impl Circuit {
    pub fn new() -> Self {
        Circuit::default()
    }

    pub fn push(&mut self, gate: Gate) {
        debug_assert!(self.rounds.is_none(), "cannot push into a scheduled circuit");
        self.gates.push(gate);
    }

    pub fn append(&mut self, other: &Circuit) {
        debug_assert!(self.rounds.is_none() && other.rounds.is_none());
        self.gates.extend_from_slice(&other.gates);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gate-by-gate inverse in reverse order. Round grouping is dropped.
    pub fn inverted(&self) -> Circuit {
        Circuit { gates: self.gates.iter().rev().map(Gate::inverse).collect(), rounds: None }
    }

    pub fn num_rounds(&self) -> usize {
        match &self.rounds {
            Some(rounds) => rounds.iter().copied().max().map_or(0, |m| m + 1),
            None => self.gates.len(),
        }
    }

    pub fn trace_records(&self) -> Vec<GateRecord> {
        self.gates
            .iter()
            .enumerate()
            .map(|(i, g)| GateRecord {
                kind: g.kind.name(),
                k: match g.kind {
                    GateKind::Rk(k) | GateKind::NegRk(k) => Some(k),
                    _ => None,
                },
                theta: match g.kind {
                    GateKind::CPhase(t) | GateKind::NegCPhase(t) => Some(t.to_string()),
                    _ => None,
                },
                targets: g.targets.clone(),
                controls: g
                    .controls
                    .iter()
                    .map(|c| ControlRecord { qubit: c.qubit, polarity: if c.positive { "pos" } else { "neg" } })
                    .collect(),
                round: self.rounds.as_ref().map(|r| r[i]),
            })
            .collect()
    }
}

/// One line of the serialized circuit trace.
#[derive(Serialize, Debug, Clone)]
pub struct GateRecord {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    pub targets: Vec<usize>,
    pub controls: Vec<ControlRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
}

#[derive(Serialize, Debug, Clone)]
pub struct ControlRecord {
    pub qubit: usize,
    pub polarity: &'static str,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_collisions_and_range() {
        let g = Gate::cnot(1, 1);
        assert!(matches!(g.validate(3), Err(SimError::IndexCollision(1))));
        let g = Gate::h(5);
        assert!(matches!(g.validate(3), Err(SimError::QubitOutOfRange { .. })));
    }

    #[test]
    fn inverse_kinds() {
        assert_eq!(GateKind::Rk(3).inverse(), GateKind::NegRk(3));
        let theta = Dyadic::new(3, 3);
        assert_eq!(GateKind::CPhase(theta).inverse(), GateKind::NegCPhase(theta));
        assert_eq!(GateKind::H.inverse(), GateKind::H);
    }

    #[test]
    fn phase_of_neg_rk_is_negated() {
        assert_eq!(GateKind::NegRk(2).phase().unwrap(), Dyadic::new(3, 2));
    }
}
