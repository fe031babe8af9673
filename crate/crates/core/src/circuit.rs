//! Staged composition of elements over a mode registry.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elements::{ElementSpec, ModeUnitary};
use crate::error::{Error, Result};
use crate::fock::{FockState, ModeId, ModeRegistry};
use crate::matrix::ComplexMatrix;

/// Version tag written into serialized circuit documents.
pub const CIRCUIT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Stage {
    pub label: String,
    pub spec: ElementSpec,
    pub unitary: ModeUnitary,
}

/// An immutable, validated sequence of labeled stages.
///
/// Validation enforces the feed-forward order of the optical table: once a
/// routing element has drained a mode no later stage may touch it, and a mode
/// produced by a routing element may not have been acted on earlier.
#[derive(Debug, Clone)]
pub struct Circuit {
    registry: Arc<ModeRegistry>,
    stages: Vec<Stage>,
}

/// JSON form of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitDocument {
    pub schema_version: u32,
    pub modes: Vec<ModeId>,
    pub stages: Vec<StageDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDocument {
    pub label: String,
    pub element: ElementSpec,
}

impl Circuit {
    pub fn new(registry: Arc<ModeRegistry>, stages: Vec<(String, ElementSpec)>) -> Result<Self> {
        let mut labels = HashSet::new();
        let mut built = Vec::with_capacity(stages.len());
        for (label, spec) in stages {
            if !labels.insert(label.clone()) {
                return Err(Error::Config(format!("stage label {label} used twice")));
            }
            let unitary = spec.build()?;
            for m in unitary.modes() {
                registry.index_of(m)?;
            }
            built.push(Stage { label, spec, unitary });
        }
        check_feed_order(&built)?;
        Ok(Circuit {
            registry,
            stages: built,
        })
    }

    pub fn from_document(doc: &CircuitDocument) -> Result<Self> {
        if doc.schema_version != CIRCUIT_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported circuit schema version {}",
                doc.schema_version
            )));
        }
        let registry = Arc::new(ModeRegistry::new(doc.modes.iter().cloned())?);
        Circuit::new(
            registry,
            doc.stages
                .iter()
                .map(|s| (s.label.clone(), s.element.clone()))
                .collect(),
        )
    }

    pub fn to_document(&self) -> CircuitDocument {
        CircuitDocument {
            schema_version: CIRCUIT_SCHEMA_VERSION,
            modes: self.registry.modes().to_vec(),
            stages: self
                .stages
                .iter()
                .map(|s| StageDocument {
                    label: s.label.clone(),
                    element: s.spec.clone(),
                })
                .collect(),
        }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.stages.iter().map(|s| s.label.as_str())
    }

    pub fn stage_index(&self, label: &str) -> Result<usize> {
        self.stages
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::Config(format!("no stage labeled {label}")))
    }

    /// Circuit consisting of the stages up to and including `label`.
    pub fn prefix(&self, label: &str) -> Result<Circuit> {
        let end = self.stage_index(label)? + 1;
        Ok(Circuit {
            registry: self.registry.clone(),
            stages: self.stages[..end].to_vec(),
        })
    }

    /// Applies stages in order, stopping after `upto` (inclusive) when given.
    pub fn evolve(&self, input: &FockState, upto: Option<&str>) -> Result<FockState> {
        if input.registry().as_ref() != self.registry.as_ref() {
            return Err(Error::Mode("input state is not on the circuit registry".into()));
        }
        let end = match upto {
            Some(label) => self.stage_index(label)? + 1,
            None => self.stages.len(),
        };
        let mut state = input.clone();
        for stage in &self.stages[..end] {
            state = state.apply_mode_unitary(&stage.unitary)?;
        }
        Ok(state)
    }

    /// States after every stage, paired with the stage label.
    pub fn snapshots(&self, input: &FockState) -> Result<Vec<(String, FockState)>> {
        let mut state = input.clone();
        let mut out = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            state = state.apply_mode_unitary(&stage.unitary)?;
            out.push((stage.label.clone(), state.clone()));
        }
        Ok(out)
    }

    /// Product of every stage embedded in the full registry.
    pub fn global_unitary(&self) -> Result<ModeUnitary> {
        let mut acc = ComplexMatrix::identity(self.registry.len());
        for stage in &self.stages {
            acc = &acc * &stage.unitary.embed(&self.registry)?;
        }
        ModeUnitary::new(self.registry.modes().to_vec(), acc)
    }
}

fn check_feed_order(stages: &[Stage]) -> Result<()> {
    let mut drained: HashSet<ModeId> = HashSet::new();
    let mut touched: HashSet<ModeId> = HashSet::new();
    for stage in stages {
        let inputs = stage.spec.input_modes();
        let outputs = stage.spec.output_modes();
        for m in inputs.iter().chain(&outputs) {
            if drained.contains(m) {
                return Err(Error::Config(format!(
                    "stage {} acts on {m}, which an earlier stage already routed away",
                    stage.label
                )));
            }
        }
        for m in outputs.iter().filter(|m| !inputs.contains(m)) {
            if touched.contains(m) {
                return Err(Error::Config(format!(
                    "stage {} feeds {m}, which an earlier stage already acted on",
                    stage.label
                )));
            }
        }
        for m in inputs.iter().filter(|m| !outputs.contains(m)) {
            drained.insert(m.clone());
        }
        touched.extend(inputs);
        touched.extend(outputs);
    }
    Ok(())
}
