//! Dense state-vector backend.
//!
//! This is the general-purpose oracle: it represents all `2^n` amplitudes and
//! applies gates by direct kernel loops. Qubit `q` occupies bit
//! `num_qubits - 1 - q` of the amplitude index, so qubit 0 is the most
//! significant bit of the basis label.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::gate::{Gate, GateKind};
use crate::layout::RegisterLayout;

/// Default qubit cap: 2^24 amplitudes at 16 bytes each is 256 MiB of state,
/// which is already past desk scale; the product backend handles bigger runs.
pub const DEFAULT_QUBIT_CAP: usize = 24;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Clone)]
pub struct DenseState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self> {
        Self::with_cap(num_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(num_qubits: usize, cap: usize) -> Result<Self> {
        if num_qubits > cap {
            return Err(SimError::TooManyQubits { num_qubits, cap });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState { num_qubits, amps })
    }

    /// The unique basis state with the given register contents.
    pub fn init_basis(layout: &RegisterLayout, assignments: &[(&str, u64)]) -> Result<Self> {
        let mut state = Self::new(layout.num_qubits())?;
        let mut index = 0u64;
        for (name, value) in assignments {
            let qubits = layout.register(name)?;
            if qubits.is_empty() {
                return Err(SimError::EmptyRegister);
            }
            if *value >> qubits.len() != 0 {
                return Err(SimError::ValueOverflow { value: *value, width: qubits.len() });
            }
            for (i, &q) in qubits.iter().enumerate() {
                let bit = (value >> (qubits.len() - 1 - i)) & 1;
                index |= bit << state.bit_pos(q);
            }
        }
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Wraps an explicit amplitude vector (used by the product-state embed).
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if num_qubits > DEFAULT_QUBIT_CAP {
            return Err(SimError::TooManyQubits { num_qubits, cap: DEFAULT_QUBIT_CAP });
        }
        assert_eq!(amps.len(), 1 << num_qubits);
        Ok(DenseState { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    fn bit_pos(&self, qubit: usize) -> u64 {
        (self.num_qubits - 1 - qubit) as u64
    }

    fn control_masks(&self, gate: &Gate) -> (u64, u64) {
        let mut mask = 0u64;
        let mut value = 0u64;
        for c in &gate.controls {
            let bit = 1u64 << self.bit_pos(c.qubit);
            mask |= bit;
            if c.positive {
                value |= bit;
            }
        }
        (mask, value)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let (cmask, cval) = self.control_masks(gate);
        let dim = self.amps.len() as u64;

        if let Some(theta) = gate.kind.phase() {
            let tmask = 1u64 << self.bit_pos(gate.targets[0]);
            let factor = Complex64::from_polar(1.0, TAU * theta.to_f64());
            for i in 0..dim {
                if i & tmask != 0 && i & cmask == cval {
                    self.amps[i as usize] *= factor;
                }
            }
            return Ok(());
        }

        match gate.kind {
            GateKind::H => {
                let tmask = 1u64 << self.bit_pos(gate.targets[0]);
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..dim {
                    if i & tmask == 0 && i & cmask == cval {
                        let j = (i | tmask) as usize;
                        let a = self.amps[i as usize];
                        let b = self.amps[j];
                        self.amps[i as usize] = (a + b) * inv_sqrt2;
                        self.amps[j] = (a - b) * inv_sqrt2;
                    }
                }
            }
            GateKind::X => {
                let tmask = 1u64 << self.bit_pos(gate.targets[0]);
                for i in 0..dim {
                    if i & tmask == 0 && i & cmask == cval {
                        self.amps.swap(i as usize, (i | tmask) as usize);
                    }
                }
            }
            GateKind::Swap => {
                let m1 = 1u64 << self.bit_pos(gate.targets[0]);
                let m2 = 1u64 << self.bit_pos(gate.targets[1]);
                for i in 0..dim {
                    if i & m1 != 0 && i & m2 == 0 && i & cmask == cval {
                        self.amps.swap(i as usize, (i ^ m1 ^ m2) as usize);
                    }
                }
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

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of each register value, indexed by value.
    pub fn register_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if qubits.is_empty() {
            return Err(SimError::EmptyRegister);
        }
        for &q in qubits {
            if q >= self.num_qubits {
                return Err(SimError::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
            }
        }
        let mut probs = vec![0.0f64; 1 << qubits.len()];
        for (i, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut value = 0u64;
            for (bi, &q) in qubits.iter().enumerate() {
                let bit = (i as u64 >> self.bit_pos(q)) & 1;
                value |= bit << (qubits.len() - 1 - bi);
            }
            probs[value as usize] += p;
        }
        Ok(probs)
    }

    /// Deterministic readout: the value carrying probability ≥ 1 − 1e−9.
    ///
    /// These circuits end in basis states on valid inputs; anything less
    /// deterministic signals a circuit bug, so fail loudly instead of sampling.
    pub fn read_register(&self, qubits: &[usize]) -> Result<u64> {
        let probs = self.register_probabilities(qubits)?;
        let (best, prob) = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("register has at least one value");
        if *prob >= 1.0 - 1e-9 {
            Ok(best as u64)
        } else {
            Err(SimError::NotDeterministic { best: best as u64, prob: *prob })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Control;

    fn single_register(width: usize) -> RegisterLayout {
        let mut layout = RegisterLayout::new();
        layout.add("r", width);
        layout
    }

    #[test]
    fn init_basis_places_single_amplitude() {
        // 3-qubit register holding 2 is |010⟩
        let layout = single_register(3);
        let state = DenseState::init_basis(&layout, &[("r", 2)]).unwrap();
        assert_eq!(state.amplitudes()[0b010].re, 1.0);
        assert_eq!(state.read_register(&[0, 1, 2]).unwrap(), 2);
    }

    #[test]
    fn init_basis_ground_state() {
        let layout = single_register(1);
        let state = DenseState::init_basis(&layout, &[("r", 0)]).unwrap();
        assert_eq!(state.read_register(&[0]).unwrap(), 0);
    }

    #[test]
    fn init_basis_concatenates_registers() {
        // (3, 1) in two 2-qubit registers is |1101⟩
        let mut layout = RegisterLayout::new();
        layout.add("a", 2);
        layout.add("b", 2);
        let state = DenseState::init_basis(&layout, &[("a", 3), ("b", 1)]).unwrap();
        assert_eq!(state.amplitudes()[0b1101].re, 1.0);
    }

    #[test]
    fn init_basis_rejects_overflow() {
        let layout = single_register(2);
        let err = DenseState::init_basis(&layout, &[("r", 4)]);
        assert!(matches!(err, Err(SimError::ValueOverflow { .. })));
    }

    #[test]
    fn qubit_cap_enforced() {
        assert!(matches!(DenseState::new(25), Err(SimError::TooManyQubits { .. })));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut state = DenseState::new(1).unwrap();
        state.apply(&Gate::h(0)).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state.amplitudes()[0].re - inv_sqrt2).abs() < 1e-15);
        assert!((state.amplitudes()[1].re - inv_sqrt2).abs() < 1e-15);
    }

    #[test]
    fn rk_phase_on_one() {
        // R_1 on |1⟩ applies e^{2πi/2} = −1
        let layout = single_register(1);
        let mut state = DenseState::init_basis(&layout, &[("r", 1)]).unwrap();
        state.apply(&Gate::rk(1, 0)).unwrap();
        assert!((state.amplitudes()[1].re + 1.0).abs() < 1e-12);
        // −R_2 on |1⟩ applies e^{−2πi/4} = −i
        let mut state = DenseState::init_basis(&layout, &[("r", 1)]).unwrap();
        state.apply(&Gate::neg_rk(2, 0)).unwrap();
        assert!((state.amplitudes()[1].im + 1.0).abs() < 1e-12);
    }

    #[test]
    fn read_register_on_basis_states() {
        let layout = single_register(3);
        let state = DenseState::init_basis(&layout, &[("r", 4)]).unwrap();
        assert_eq!(state.read_register(&[0, 1, 2]).unwrap(), 4);
        let state = DenseState::init_basis(&layout, &[("r", 0)]).unwrap();
        assert_eq!(state.read_register(&[0, 1, 2]).unwrap(), 0);
    }

    #[test]
    fn read_register_rejects_superposition() {
        let mut state = DenseState::new(1).unwrap();
        state.apply(&Gate::h(0)).unwrap();
        assert!(matches!(state.read_register(&[0]), Err(SimError::NotDeterministic { .. })));
    }

    #[test]
    fn negative_polarity_control() {
        let mut state = DenseState::new(2).unwrap();
        // X on qubit 1 enabled when qubit 0 is |0⟩
        state.apply(&Gate::x(1).controlled(Control::neg(0))).unwrap();
        assert_eq!(state.read_register(&[0, 1]).unwrap(), 0b01);
    }

    #[test]
    fn swap_gate() {
        let layout = single_register(2);
        let mut state = DenseState::init_basis(&layout, &[("r", 0b10)]).unwrap();
        state.apply(&Gate::swap(0, 1)).unwrap();
        assert_eq!(state.read_register(&[0, 1]).unwrap(), 0b01);
    }
}
