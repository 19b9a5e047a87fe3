//! Product-state backend.
//!
//! Every circuit in this crate keeps registers unentangled on basis inputs:
//! controls always sit in basis states, and the QFT of a basis state is a
//! product of single-qubit phase states. Each qubit is therefore either a
//! basis state or a Fourier phase state `(|0⟩ + e^{2πiθ}|1⟩)/√2` with dyadic
//! θ, and gate application is exact integer arithmetic, constant time per
//! gate regardless of system size.
//!
//! A control qubit found in a Fourier state is a usage error, not a reason to
//! fall back to dense simulation: none of the supported circuits do this, and
//! silent backend switching would mask the misuse.

use num_complex::Complex64;

use crate::dyadic::Dyadic;
use crate::error::{Result, SimError};
use crate::gate::{Gate, GateKind};
use crate::layout::RegisterLayout;
use crate::statevec::DenseState;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QubitState {
    Basis(u8),
    /// `(|0⟩ + e^{2πiθ}|1⟩)/√2`
    Fourier(Dyadic),
}

#[derive(Clone, Debug)]
pub struct ProductState {
    qubits: Vec<QubitState>,
    global_phase: Dyadic,
}

/// A register's contents: a basis value, or the per-qubit Fourier phases.
#[derive(Clone, PartialEq, Debug)]
pub enum RegisterView {
    Basis(u64),
    Phases(Vec<Dyadic>),
    Mixed,
}

impl ProductState {
    pub fn new(num_qubits: usize) -> Self {
        ProductState { qubits: vec![QubitState::Basis(0); num_qubits], global_phase: Dyadic::zero() }
    }

    pub fn init_basis(layout: &RegisterLayout, assignments: &[(&str, u64)]) -> Result<Self> {
        let mut state = Self::new(layout.num_qubits());
        for (name, value) in assignments {
            let qubits = layout.register(name)?;
            if qubits.is_empty() {
                return Err(SimError::EmptyRegister);
            }
            if *value >> qubits.len() != 0 {
                return Err(SimError::ValueOverflow { value: *value, width: qubits.len() });
            }
            for (i, &q) in qubits.iter().enumerate() {
                state.qubits[q] = QubitState::Basis(((value >> (qubits.len() - 1 - i)) & 1) as u8);
            }
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubit(&self, q: usize) -> QubitState {
        self.qubits[q]
    }

    pub fn global_phase(&self) -> Dyadic {
        self.global_phase
    }

    /// Checks that every control sits in a basis state and returns whether the
    /// gate is enabled.
    fn controls_enabled(&self, gate: &Gate) -> Result<bool> {
        let mut enabled = true;
        for c in &gate.controls {
            match self.qubits[c.qubit] {
                QubitState::Basis(b) => {
                    if (b == 1) != c.positive {
                        enabled = false;
                    }
                }
                QubitState::Fourier(_) => return Err(SimError::WouldEntangle(c.qubit)),
            }
        }
        Ok(enabled)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.qubits.len())?;
        if !self.controls_enabled(gate)? {
            return Ok(());
        }

        if let Some(theta) = gate.kind.phase() {
            let t = gate.targets[0];
            match self.qubits[t] {
                QubitState::Basis(0) => {}
                QubitState::Basis(_) => self.global_phase = self.global_phase.add(theta),
                QubitState::Fourier(phi) => self.qubits[t] = QubitState::Fourier(phi.add(theta)),
            }
            return Ok(());
        }

        match gate.kind {
            GateKind::H => {
                let t = gate.targets[0];
                self.qubits[t] = match self.qubits[t] {
                    QubitState::Basis(0) => QubitState::Fourier(Dyadic::zero()),
                    QubitState::Basis(_) => QubitState::Fourier(Dyadic::half()),
                    QubitState::Fourier(phi) if phi.is_zero() => QubitState::Basis(0),
                    QubitState::Fourier(phi) if phi == Dyadic::half() => QubitState::Basis(1),
                    QubitState::Fourier(phi) => {
                        return Err(SimError::NonProductHadamard { qubit: t, phase: phi })
                    }
                };
            }
            GateKind::X => {
                let t = gate.targets[0];
                self.qubits[t] = match self.qubits[t] {
                    QubitState::Basis(b) => QubitState::Basis(1 - b),
                    QubitState::Fourier(phi) => {
                        // X|φ⟩ = e^{2πiφ} (|0⟩ + e^{−2πiφ}|1⟩)/√2
                        self.global_phase = self.global_phase.add(phi);
                        QubitState::Fourier(phi.neg())
                    }
                };
            }
            GateKind::Swap => {
                self.qubits.swap(gate.targets[0], gate.targets[1]);
            }
            _ => unreachable!("phase kinds handled above"),
        }
        Ok(())
    }

    pub fn run(&mut self, circuit: &crate::gate::Circuit) -> Result<()> {
        for gate in &circuit.gates {
            self.apply(gate)?;
        }
        Ok(())
    }

    pub fn register_view(&self, qubits: &[usize]) -> RegisterView {
        let mut value = 0u64;
        let mut phases = Vec::with_capacity(qubits.len());
        let mut all_basis = true;
        let mut all_fourier = true;
        for (i, &q) in qubits.iter().enumerate() {
            match self.qubits[q] {
                QubitState::Basis(b) => {
                    all_fourier = false;
                    value |= (b as u64) << (qubits.len() - 1 - i);
                }
                QubitState::Fourier(phi) => {
                    all_basis = false;
                    phases.push(phi);
                }
            }
        }
        if all_basis {
            RegisterView::Basis(value)
        } else if all_fourier {
            RegisterView::Phases(phases)
        } else {
            RegisterView::Mixed
        }
    }

    /// Deterministic readout; every qubit of the register must be in a basis
    /// state.
    pub fn read_register(&self, qubits: &[usize]) -> Result<u64> {
        if qubits.is_empty() {
            return Err(SimError::EmptyRegister);
        }
        match self.register_view(qubits) {
            RegisterView::Basis(v) => Ok(v),
            _ => Err(SimError::NotDeterministic { best: 0, prob: 0.5 }),
        }
    }

    /// Algebraic inverse-QFT shortcut: reads the register value straight off
    /// the Fourier phases instead of applying the literal gate sequence.
    ///
    /// Diagnostic/test aid only; the simulated circuits always run the literal
    /// inverse QFT.
    pub fn fourier_read_register(&self, qubits: &[usize]) -> Result<u64> {
        if qubits.is_empty() {
            return Err(SimError::EmptyRegister);
        }
        let n = qubits.len();
        let top = match self.qubits[qubits[0]] {
            QubitState::Fourier(phi) => phi,
            QubitState::Basis(_) => return Err(SimError::NotDeterministic { best: 0, prob: 0.0 }),
        };
        if usize::from(top.log_denom()) > n {
            return Err(SimError::NotDeterministic { best: 0, prob: 0.0 });
        }
        let value = top.numerator() << (n - usize::from(top.log_denom()));
        // every other qubit must carry the matching truncated fraction
        for (j, &q) in qubits.iter().enumerate() {
            let expect = Dyadic::new(value, (n - j) as u8);
            match self.qubits[q] {
                QubitState::Fourier(phi) if phi == expect => {}
                _ => return Err(SimError::NotDeterministic { best: value, prob: 0.0 }),
            }
        }
        Ok(value)
    }

    /// Tensor-product expansion onto the dense backend, for cross-validation.
    pub fn embed_dense(&self) -> Result<DenseState> {
        let n = self.qubits.len();
        let dim = 1usize << n;
        let global = Complex64::from_polar(1.0, TAU * self.global_phase.to_f64());
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for (i, amp) in amps.iter_mut().enumerate() {
            let mut a = global;
            for (q, qs) in self.qubits.iter().enumerate() {
                let bit = (i >> (n - 1 - q)) & 1;
                match qs {
                    QubitState::Basis(b) => {
                        if bit != *b as usize {
                            a = Complex64::new(0.0, 0.0);
                            break;
                        }
                    }
                    QubitState::Fourier(phi) => {
                        a *= inv_sqrt2;
                        if bit == 1 {
                            a *= Complex64::from_polar(1.0, TAU * phi.to_f64());
                        }
                    }
                }
            }
            *amp = a;
        }
        DenseState::from_amplitudes(n, amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Control;

    #[test]
    fn h_then_controlled_rotation() {
        let mut state = ProductState::new(2);
        state.apply(&Gate::h(1)).unwrap();
        assert_eq!(state.qubit(1), QubitState::Fourier(Dyadic::zero()));
        // control |0⟩ leaves the target unchanged
        state.apply(&Gate::rk(1, 1).controlled(Control::pos(0))).unwrap();
        assert_eq!(state.qubit(1), QubitState::Fourier(Dyadic::zero()));
        // control |1⟩ adds 1/2
        state.apply(&Gate::x(0)).unwrap();
        state.apply(&Gate::rk(1, 1).controlled(Control::pos(0))).unwrap();
        assert_eq!(state.qubit(1), QubitState::Fourier(Dyadic::half()));
    }

    #[test]
    fn fourier_control_is_rejected() {
        let mut state = ProductState::new(2);
        state.apply(&Gate::h(0)).unwrap();
        let err = state.apply(&Gate::rk(1, 1).controlled(Control::pos(0)));
        assert!(matches!(err, Err(SimError::WouldEntangle(0))));
    }

    #[test]
    fn embed_single_fourier_half() {
        // Fourier(1/2) is (|0⟩ − |1⟩)/√2
        let mut state = ProductState::new(1);
        state.apply(&Gate::x(0)).unwrap();
        state.apply(&Gate::h(0)).unwrap();
        let dense = state.embed_dense().unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((dense.amplitudes()[0].re - inv_sqrt2).abs() < 1e-15);
        assert!((dense.amplitudes()[1].re + inv_sqrt2).abs() < 1e-15);
    }

    #[test]
    fn embed_all_zero() {
        let state = ProductState::new(3);
        let dense = state.embed_dense().unwrap();
        assert_eq!(dense.amplitudes()[0].re, 1.0);
    }

    #[test]
    fn x_on_fourier_tracks_global_phase() {
        let mut state = ProductState::new(1);
        state.apply(&Gate::h(0)).unwrap();
        state.apply(&Gate::cphase(Dyadic::new(1, 2), 0)).unwrap();
        state.apply(&Gate::x(0)).unwrap();
        assert_eq!(state.global_phase(), Dyadic::new(1, 2));
        assert_eq!(state.qubit(0), QubitState::Fourier(Dyadic::new(3, 2)));
    }
}
