//! Common execution surface over the two state representations.

use crate::error::Result;
use crate::gate::{Circuit, Gate};
use crate::product::ProductState;
use crate::statevec::DenseState;

pub trait Backend {
    fn apply(&mut self, gate: &Gate) -> Result<()>;
    fn read_register(&self, qubits: &[usize]) -> Result<u64>;

    fn run(&mut self, circuit: &Circuit) -> Result<()> {
        for gate in &circuit.gates {
            self.apply(gate)?;
        }
        Ok(())
    }
}

impl Backend for DenseState {
    fn apply(&mut self, gate: &Gate) -> Result<()> {
        DenseState::apply(self, gate)
    }

    fn read_register(&self, qubits: &[usize]) -> Result<u64> {
        DenseState::read_register(self, qubits)
    }
}

impl Backend for ProductState {
    fn apply(&mut self, gate: &Gate) -> Result<()> {
        ProductState::apply(self, gate)
    }

    fn read_register(&self, qubits: &[usize]) -> Result<u64> {
        ProductState::read_register(self, qubits)
    }
}
