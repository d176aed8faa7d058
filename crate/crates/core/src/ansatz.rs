//! Circuit families and their compilation into gate programs.
//!
//! Every family is a stack of `N` layers. A layer applies the feature map
//! `U` (first layer only, or every layer when re-uploading), one trainable
//! `V` gate per qubit and then the entangler block `W_i`.

use serde::{Deserialize, Serialize};

use crate::error::{QtlError, Result};
use crate::scalar::Real;
use crate::statevec::{gate_u, gate_v, StateVector, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Rotation angle only, phases pinned to zero, all-to-all controlled-X.
    RealAmplitudes,
    /// Full phase/phase/rotation triple, ring of controlled-X with growing range.
    StrongEntangling,
    /// One qubit, three features composed on it, no entangler.
    SingleQubit,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RealAmplitudes => "real-amplitudes",
            Family::StrongEntangling => "strong-entangling",
            Family::SingleQubit => "single-qubit",
        }
    }

    /// Entangler the family is defined with.
    pub fn entangler(self) -> Option<EntanglerKind> {
        match self {
            Family::RealAmplitudes => Some(EntanglerKind::AllToAll),
            Family::StrongEntangling => Some(EntanglerKind::Ring),
            Family::SingleQubit => None,
        }
    }

    /// Which of the three `V` slots (phase, phase, rotation) are trainable.
    pub fn free_slots(self) -> [bool; 3] {
        match self {
            Family::RealAmplitudes => [false, false, true],
            Family::StrongEntangling | Family::SingleQubit => [true, true, true],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = QtlError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "real-amplitudes" | "ra" => Ok(Family::RealAmplitudes),
            "strong-entangling" | "se" => Ok(Family::StrongEntangling),
            "single-qubit" | "single" => Ok(Family::SingleQubit),
            other => Err(QtlError::invalid(format!("unknown ansatz family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntanglerKind {
    AllToAll,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: Family,
    pub layers: usize,
    pub qubits: usize,
    pub reuploading: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entangler: Option<EntanglerKind>,
}

impl AnsatzSpec {
    /// Spec with the family's own entangler.
    pub fn new(family: Family, layers: usize, qubits: usize, reuploading: bool) -> Self {
        Self {
            family,
            layers,
            qubits,
            reuploading,
            entangler: family.entangler(),
        }
    }

    pub fn single_qubit(layers: usize, reuploading: bool) -> Self {
        Self::new(Family::SingleQubit, layers, 1, reuploading)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(QtlError::invalid("ansatz needs at least one layer"));
        }
        if self.entangler != self.family.entangler() {
            return Err(QtlError::invalid(format!(
                "family {} requires entangler {:?}, got {:?}",
                self.family,
                self.family.entangler(),
                self.entangler
            )));
        }
        match self.family {
            Family::SingleQubit if self.qubits != 1 => Err(QtlError::invalid(format!(
                "single-qubit family needs qubits = 1, got {}",
                self.qubits
            ))),
            _ if self.qubits == 0 || self.qubits > MAX_QUBITS => Err(QtlError::invalid(
                format!("qubits must be in 1..={MAX_QUBITS}, got {}", self.qubits),
            )),
            _ => Ok(()),
        }
    }

    /// Length of the feature vector the circuit consumes.
    pub fn feature_len(&self) -> usize {
        match self.family {
            Family::SingleQubit => 3,
            _ => self.qubits,
        }
    }

    pub fn free_param_count(&self) -> usize {
        let per_gate = self.family.free_slots().iter().filter(|s| **s).count();
        self.layers * self.qubits * per_gate
    }
}

/// Controlled-X pairs `(control, target)` of the entangler in layer `layer` (1-based).
pub fn entangler_block(
    kind: EntanglerKind,
    qubits: usize,
    layer: usize,
) -> Result<Vec<(usize, usize)>> {
    if qubits < 2 {
        return Err(QtlError::invalid(format!(
            "entangler needs at least 2 qubits, got {qubits}"
        )));
    }
    if layer == 0 {
        return Err(QtlError::invalid("layers are numbered from 1"));
    }
    Ok(match kind {
        EntanglerKind::AllToAll => (0..qubits)
            .flat_map(|a| (a + 1..qubits).map(move |b| (a, b)))
            .collect(),
        EntanglerKind::Ring => {
            let range = ring_range(qubits, layer);
            (0..qubits).map(|j| (j, (j + range) % qubits)).collect()
        }
    })
}

/// Control-target offset of the ring entangler in a given layer.
pub fn ring_range(qubits: usize, layer: usize) -> usize {
    (layer - 1) % (qubits - 1) + 1
}

/// Trainable angles, shape `(layers, qubits, 3)` with slots `(theta, gamma, phi)`.
///
/// Slots the family does not train are stored as structural zeros and are
/// skipped by the free-parameter indexing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTensor<T> {
    layers: usize,
    qubits: usize,
    mask: [bool; 3],
    values: Vec<T>,
}

impl<T: Real> ParamTensor<T> {
    pub fn zeros(spec: &AnsatzSpec) -> Self {
        Self {
            layers: spec.layers,
            qubits: spec.qubits,
            mask: spec.family.free_slots(),
            values: vec![T::zero(); spec.layers * spec.qubits * 3],
        }
    }

    /// Builds a tensor from free-parameter values in layer, qubit, slot order.
    pub fn from_free(spec: &AnsatzSpec, free: &[T]) -> Result<Self> {
        let mut out = Self::zeros(spec);
        out.set_free(free)?;
        Ok(out)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.layers, self.qubits, 3)
    }

    pub fn get(&self, layer: usize, qubit: usize, slot: usize) -> T {
        self.values[self.flat(layer, qubit, slot)]
    }

    /// Full tensor including structural zeros.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn free_count(&self) -> usize {
        self.values.len() / 3 * self.mask.iter().filter(|m| **m).count()
    }

    pub fn free_values(&self) -> Vec<T> {
        self.free_slots().map(|i| self.values[i]).collect()
    }

    pub fn set_free(&mut self, free: &[T]) -> Result<()> {
        if free.len() != self.free_count() {
            return Err(QtlError::invalid(format!(
                "expected {} free parameters, got {}",
                self.free_count(),
                free.len()
            )));
        }
        let slots: Vec<usize> = self.free_slots().collect();
        for (slot, v) in slots.into_iter().zip(free) {
            self.values[slot] = *v;
        }
        Ok(())
    }

    pub fn matches(&self, spec: &AnsatzSpec) -> bool {
        self.layers == spec.layers
            && self.qubits == spec.qubits
            && self.mask == spec.family.free_slots()
    }

    fn flat(&self, layer: usize, qubit: usize, slot: usize) -> usize {
        (layer * self.qubits + qubit) * 3 + slot
    }

    fn free_slots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(move |i| self.mask[i % 3])
    }
}

/// One step of a compiled circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    /// `U(features[slot])` on `qubit`.
    Feature { slot: usize, qubit: usize },
    /// `V(theta, gamma, phi)` on `qubit`; each entry is a free-parameter index
    /// or `None` for a structural zero.
    Param {
        params: [Option<usize>; 3],
        qubit: usize,
    },
    /// Controlled-X.
    Entangle { control: usize, target: usize },
}

/// Instruction list compiled from an [`AnsatzSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProgram {
    spec: AnsatzSpec,
    instructions: Vec<Instruction>,
    free_param_count: usize,
}

/// A single angle offset used for shift-rule and finite-difference evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shift<T> {
    None,
    /// Offset free parameter `index`.
    Param { index: usize, delta: T },
    /// Offset the angle of the feature gate at instruction `instruction` only.
    FeatureGate { instruction: usize, delta: T },
}

impl CircuitProgram {
    pub fn build(spec: &AnsatzSpec) -> Result<Self> {
        spec.validate()?;
        let free_slots = spec.family.free_slots();
        let mut instructions = Vec::new();
        let mut next_free = 0usize;
        for layer in 1..=spec.layers {
            if spec.reuploading || layer == 1 {
                push_feature_map(spec, &mut instructions);
            }
            for qubit in 0..spec.qubits {
                let mut params = [None; 3];
                for (slot, free) in free_slots.iter().enumerate() {
                    if *free {
                        params[slot] = Some(next_free);
                        next_free += 1;
                    }
                }
                instructions.push(Instruction::Param { params, qubit });
            }
            if let (Some(kind), true) = (spec.entangler, spec.qubits >= 2) {
                for (control, target) in entangler_block(kind, spec.qubits, layer)? {
                    instructions.push(Instruction::Entangle { control, target });
                }
            }
        }
        debug_assert_eq!(next_free, spec.free_param_count());
        Ok(Self {
            spec: *spec,
            instructions,
            free_param_count: next_free,
        })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn qubit_count(&self) -> usize {
        self.spec.qubits
    }

    pub fn feature_len(&self) -> usize {
        self.spec.feature_len()
    }

    pub fn free_param_count(&self) -> usize {
        self.free_param_count
    }

    /// Runs the circuit on `|0...0>` and returns `<Z_q>` for every qubit.
    pub fn forward<T: Real>(&self, params: &ParamTensor<T>, features: &[T]) -> Result<Vec<T>> {
        if !params.matches(&self.spec) {
            return Err(QtlError::invalid(format!(
                "parameter tensor shape {:?} does not match ansatz {:?}",
                params.shape(),
                self.spec
            )));
        }
        self.expectations(&params.free_values(), features, Shift::None)
    }

    /// Same as [`forward`](Self::forward) but starting from basis state `initial`.
    pub fn forward_from<T: Real>(
        &self,
        params: &ParamTensor<T>,
        features: &[T],
        initial: usize,
    ) -> Result<Vec<T>> {
        if !params.matches(&self.spec) {
            return Err(QtlError::invalid("parameter tensor does not match ansatz"));
        }
        let state = self.run_from(initial, &params.free_values(), features, Shift::None)?;
        measure_all(&state)
    }

    /// Per-qubit expectations from free-parameter values, optionally shifted.
    pub fn expectations<T: Real>(&self, free: &[T], features: &[T], shift: Shift<T>) -> Result<Vec<T>> {
        let state = self.run_from(0, free, features, shift)?;
        measure_all(&state)
    }

    /// Final statevector starting from basis state `initial`.
    pub fn run_from<T: Real>(
        &self,
        initial: usize,
        free: &[T],
        features: &[T],
        shift: Shift<T>,
    ) -> Result<StateVector<T>> {
        self.check_inputs(free, features)?;
        let mut state = StateVector::basis(self.spec.qubits, initial)?;
        for (pos, ins) in self.instructions.iter().enumerate() {
            match *ins {
                Instruction::Feature { slot, qubit } => {
                    let mut angle = features[slot];
                    if let Shift::FeatureGate { instruction, delta } = shift {
                        if instruction == pos {
                            angle += delta;
                        }
                    }
                    state.apply_single(&gate_u(angle)?, qubit)?;
                }
                Instruction::Param { params, qubit } => {
                    let angle = |slot: usize| -> T {
                        match params[slot] {
                            None => T::zero(),
                            Some(i) => match shift {
                                Shift::Param { index, delta } if index == i => free[i] + delta,
                                _ => free[i],
                            },
                        }
                    };
                    state.apply_single(&gate_v(angle(0), angle(1), angle(2))?, qubit)?;
                }
                Instruction::Entangle { control, target } => state.apply_cnot(control, target)?,
            }
        }
        Ok(state)
    }

    /// Positions of the feature gates in the instruction list.
    pub fn feature_gate_positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.instructions
            .iter()
            .enumerate()
            .filter_map(|(pos, ins)| match ins {
                Instruction::Feature { slot, .. } => Some((pos, *slot)),
                _ => None,
            })
    }

    fn check_inputs<T: Real>(&self, free: &[T], features: &[T]) -> Result<()> {
        if free.len() != self.free_param_count {
            return Err(QtlError::invalid(format!(
                "expected {} free parameters, got {}",
                self.free_param_count,
                free.len()
            )));
        }
        if features.len() != self.feature_len() {
            return Err(QtlError::invalid(format!(
                "expected {} features, got {}",
                self.feature_len(),
                features.len()
            )));
        }
        Ok(())
    }
}

fn push_feature_map(spec: &AnsatzSpec, out: &mut Vec<Instruction>) {
    match spec.family {
        Family::SingleQubit => {
            out.extend((0..3).map(|slot| Instruction::Feature { slot, qubit: 0 }));
        }
        _ => out.extend((0..spec.qubits).map(|q| Instruction::Feature { slot: q, qubit: q })),
    }
}

fn measure_all<T: Real>(state: &StateVector<T>) -> Result<Vec<T>> {
    (0..state.qubit_count()).map(|q| state.expect_z(q)).collect()
}
