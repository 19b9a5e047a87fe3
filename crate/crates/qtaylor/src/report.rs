//! JSON run reports for the command-line tool.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::gate::GateRecord;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Debug)]
pub struct RunReport {
    pub schema: u32,
    pub op: String,
    pub backend: String,
    pub num_qubits: usize,
    pub gate_count: usize,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub outputs: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<Snapshot>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<Vec<GateRecord>>,
}

impl RunReport {
    pub fn new(op: &str, backend: &str, num_qubits: usize, gate_count: usize) -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            op: op.to_string(),
            backend: backend.to_string(),
            num_qubits,
            gate_count,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            snapshots: Vec::new(),
            circuit: None,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), serde_json::to_value(value).unwrap());
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) {
        self.outputs.insert(key.to_string(), serde_json::to_value(value).unwrap());
    }
}

/// State capture at a labeled point of a staged circuit.
#[derive(Serialize, Debug, Clone)]
pub struct Snapshot {
    pub label: String,
    /// Register contents; basis values render as integers, Fourier-basis
    /// registers as their phase list.
    pub registers: BTreeMap<String, RegisterSnapshot>,
}

#[derive(Serialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegisterSnapshot {
    Basis { value: u64 },
    Phases { phases: Vec<String> },
    Mixed,
}
