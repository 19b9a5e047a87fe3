//! Named register layouts over a flat qubit array.
//!
//! Within a register the first listed qubit is the most significant bit.

use crate::error::{Result, SimError};

#[derive(Clone, Debug, Default)]
pub struct RegisterLayout {
    registers: Vec<(String, Vec<usize>)>,
    num_qubits: usize,
}

impl RegisterLayout {
    pub fn new() -> Self {
        RegisterLayout::default()
    }

    /// Appends a register of `width` fresh consecutive qubits, MSB first.
    pub fn add(&mut self, name: &str, width: usize) -> Vec<usize> {
        let qubits: Vec<usize> = (self.num_qubits..self.num_qubits + width).collect();
        self.num_qubits += width;
        self.registers.push((name.to_string(), qubits.clone()));
        qubits
    }

    /// Registers over explicitly chosen qubits; rejects overlaps.
    pub fn from_parts(parts: &[(&str, Vec<usize>)]) -> Result<Self> {
        let mut layout = RegisterLayout::new();
        let mut seen = Vec::new();
        for (name, qubits) in parts {
            for &q in qubits {
                if seen.contains(&q) {
                    return Err(SimError::RegisterOverlap(q));
                }
                seen.push(q);
                layout.num_qubits = layout.num_qubits.max(q + 1);
            }
            layout.registers.push((name.to_string(), qubits.clone()));
        }
        Ok(layout)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn register(&self, name: &str) -> Result<&[usize]> {
        self.registers
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, q)| q.as_slice())
            .ok_or_else(|| SimError::UnknownRegister(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.registers.iter().map(|(n, q)| (n.as_str(), q.as_slice()))
    }
}
