//! Analytic gradients by the parameter-shift rule, a central-difference
//! oracle, and the chain rule through the classical head.
//!
//! Every angle in the circuit enters through a factor `exp(-i a G)` whose
//! generator has eigenvalues `+1, -1` (no half angles), so
//! `df/da = f(a + pi/4) - f(a - pi/4)` exactly.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;

use crate::ansatz::{CircuitProgram, ParamTensor, Shift};
use crate::data::Sample;
use crate::error::{QtlError, Result};
use crate::hybrid::{HeadActivation, HybridModel, LOG_PROB_FLOOR};
use crate::scalar::Real;

/// Shift applied on each side of an angle.
pub const SHIFT: f64 = FRAC_PI_4;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Derivatives with respect to the free parameters, in free-parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector<T>(pub Vec<T>);

impl<T: Real> GradientVector<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> T {
        self.0.iter().map(|g| *g * *g).sum::<T>().sqrt()
    }
}

fn check_observable(program: &CircuitProgram, observable: usize) -> Result<()> {
    if observable >= program.qubit_count() {
        return Err(QtlError::invalid(format!(
            "observable qubit {observable} out of range for {} qubits",
            program.qubit_count()
        )));
    }
    Ok(())
}

/// `d<Z_observable>/d theta_p` for every free parameter `p`.
pub fn shift_rule_grad<T: Real>(
    program: &CircuitProgram,
    params: &ParamTensor<T>,
    features: &[T],
    observable: usize,
) -> Result<GradientVector<T>> {
    check_observable(program, observable)?;
    let jac = param_jacobian(program, &params.free_values(), features)?;
    Ok(GradientVector(jac.into_iter().map(|row| row[observable]).collect()))
}

/// Central differences `(f(p + h) - f(p - h)) / 2h`.
pub fn finite_diff_grad<T: Real>(
    program: &CircuitProgram,
    params: &ParamTensor<T>,
    features: &[T],
    observable: usize,
    h: f64,
) -> Result<GradientVector<T>> {
    check_observable(program, observable)?;
    if !(1e-7..=1e-3).contains(&h) {
        return Err(QtlError::invalid(format!("step {h} outside [1e-7, 1e-3]")));
    }
    let free = params.free_values();
    let step = T::lit(h);
    (0..free.len())
        .map(|index| {
            let up = program.expectations(&free, features, Shift::Param { index, delta: step })?;
            let down = program.expectations(&free, features, Shift::Param { index, delta: -step })?;
            Ok((up[observable] - down[observable]) / (step + step))
        })
        .collect::<Result<Vec<T>>>()
        .map(GradientVector)
}

/// `J[p][q] = d<Z_q>/d theta_p`, one shifted pair of runs per parameter.
pub fn param_jacobian<T: Real>(
    program: &CircuitProgram,
    free: &[T],
    features: &[T],
) -> Result<Vec<Vec<T>>> {
    let s = T::lit(SHIFT);
    (0..free.len())
        .map(|index| {
            let up = program.expectations(free, features, Shift::Param { index, delta: s })?;
            let down = program.expectations(free, features, Shift::Param { index, delta: -s })?;
            Ok(up.iter().zip(&down).map(|(a, b)| *a - *b).collect())
        })
        .collect()
}

/// `J[k][q] = d<Z_q>/d x_k` for feature slot `k`, summed over every gate that
/// uploads that slot.
pub fn feature_jacobian<T: Real>(
    program: &CircuitProgram,
    free: &[T],
    features: &[T],
) -> Result<Vec<Vec<T>>> {
    let s = T::lit(SHIFT);
    let q = program.qubit_count();
    let mut jac = vec![vec![T::zero(); q]; program.feature_len()];
    for (instruction, slot) in program.feature_gate_positions() {
        let up = program.expectations(free, features, Shift::FeatureGate { instruction, delta: s })?;
        let down =
            program.expectations(free, features, Shift::FeatureGate { instruction, delta: -s })?;
        for j in 0..q {
            jac[slot][j] += up[j] - down[j];
        }
    }
    Ok(jac)
}

/// Probabilities and `d log p_y / d theta` for every class at free values `free`.
#[derive(Debug, Clone)]
pub struct ScoreVectors<T> {
    pub probabilities: Vec<T>,
    /// One row of length `free_param_count` per class.
    pub scores: Vec<Vec<T>>,
    /// Classes whose probability fell below the log floor.
    pub floored: usize,
}

pub fn score_vectors<T: Real>(
    model: &HybridModel<T>,
    free: &[T],
    features: &[T],
) -> Result<ScoreVectors<T>> {
    let trace = model.trace_with(free, features)?;
    let jac = param_jacobian(&model.program, free, &trace.angles)?;
    let (dz, floored) = model
        .head
        .log_prob_grad_z(&trace.probabilities);
    let scores = dz
        .iter()
        .map(|row| jac.iter().map(|jp| dot(jp, row)).collect())
        .collect();
    Ok(ScoreVectors {
        probabilities: trace.probabilities,
        scores,
        floored,
    })
}

/// Gradient of the mean cross-entropy over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradient<T> {
    pub loss: T,
    pub quantum: Vec<T>,
    pub head_weights: Vec<T>,
    pub head_biases: Vec<T>,
    pub adapter_weights: Vec<T>,
    pub adapter_biases: Vec<T>,
}

impl<T: Real> ModelGradient<T> {
    fn zeros_like(model: &HybridModel<T>) -> Self {
        let (aw, ab) = model
            .adapter
            .as_ref()
            .map_or((0, 0), |a| (a.weights.len(), a.biases.len()));
        Self {
            loss: T::zero(),
            quantum: vec![T::zero(); model.free_param_count()],
            head_weights: vec![T::zero(); model.head.weights.len()],
            head_biases: vec![T::zero(); model.head.biases.len()],
            adapter_weights: vec![T::zero(); aw],
            adapter_biases: vec![T::zero(); ab],
        }
    }

    fn groups_mut(&mut self) -> [&mut Vec<T>; 5] {
        [
            &mut self.quantum,
            &mut self.head_weights,
            &mut self.head_biases,
            &mut self.adapter_weights,
            &mut self.adapter_biases,
        ]
    }

    fn add_assign(&mut self, other: &Self) {
        self.loss += other.loss;
        let mut other = other.clone();
        for (dst, src) in self.groups_mut().into_iter().zip(other.groups_mut()) {
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d += *s;
            }
        }
    }

    fn scale(&mut self, factor: T) {
        self.loss *= factor;
        for group in self.groups_mut() {
            for v in group.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn quantum_norm(&self) -> T {
        self.quantum.iter().map(|g| *g * *g).sum::<T>().sqrt()
    }

    pub fn has_non_finite(&self) -> bool {
        let mut c = self.clone();
        c.groups_mut().iter().any(|g| g.iter().any(|v| !v.is_finite()))
    }
}

fn sample_grad<T: Real>(model: &HybridModel<T>, free: &[T], sample: &Sample<T>) -> Result<ModelGradient<T>> {
    let trace = model.trace_with(free, &sample.features)?;
    let y = sample.label;
    if y >= model.class_count() {
        return Err(QtlError::Validation(format!(
            "label {y} out of range for {} classes",
            model.class_count()
        )));
    }
    let mut g = ModelGradient::zeros_like(model);
    let p = &trace.probabilities;
    let floor = T::lit(LOG_PROB_FLOOR);
    g.loss = -p[y].max(floor).ln();

    // dL/dz
    let dz: Vec<T> = match model.head.activation {
        HeadActivation::Softmax => {
            let delta: Vec<T> = p
                .iter()
                .enumerate()
                .map(|(c, pc)| if c == y { *pc - T::one() } else { *pc })
                .collect();
            let zin = &trace.expectations;
            for c in 0..model.head.classes {
                for j in 0..model.head.inputs {
                    g.head_weights[c * model.head.inputs + j] = delta[c] * zin[j];
                }
                g.head_biases[c] = delta[c];
            }
            (0..model.head.inputs)
                .map(|j| {
                    (0..model.head.classes)
                        .map(|c| model.head.weight(c, j) * delta[c])
                        .sum()
                })
                .collect()
        }
        HeadActivation::BinaryExpectation => {
            let (rows, _) = model.head.log_prob_grad_z(p);
            rows[y].iter().map(|v| -*v).collect()
        }
    };

    if dz.iter().all(|v| v.is_zero()) {
        return Ok(g);
    }

    let jac = param_jacobian(&model.program, free, &trace.angles)?;
    g.quantum = jac.iter().map(|row| dot(row, &dz)).collect();

    if let (Some(adapter), Some(pre)) = (&model.adapter, &trace.pre_activation) {
        let fj = feature_jacobian(&model.program, free, &trace.angles)?;
        for o in 0..adapter.outputs {
            if pre[o] <= T::zero() {
                continue;
            }
            let dangle = dot(&fj[o], &dz);
            g.adapter_biases[o] = dangle;
            for i in 0..adapter.inputs {
                g.adapter_weights[o * adapter.inputs + i] = dangle * trace.input[i];
            }
        }
    }
    Ok(g)
}

/// Mean cross-entropy gradient over `batch` for every trainable group.
///
/// Per-sample gradients run in parallel and are summed in batch order.
pub fn model_grad<T: Real>(model: &HybridModel<T>, batch: &[&Sample<T>]) -> Result<ModelGradient<T>> {
    if batch.is_empty() {
        return Err(QtlError::invalid("gradient of an empty batch"));
    }
    let free = model.params.free_values();
    let parts = batch
        .par_iter()
        .map(|s| sample_grad(model, &free, s))
        .collect::<Result<Vec<_>>>()?;
    let mut total = ModelGradient::zeros_like(model);
    for part in &parts {
        total.add_assign(part);
    }
    total.scale(T::one() / T::from_usize_lossy(batch.len()));
    Ok(total)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{AnsatzSpec, Family};
    use crate::hybrid::{init_model, ClassicalHead};
    use std::f64::consts::PI;

    /// Single qubit, no features, only the rotation slot non-zero: <Z> = cos(2 phi).
    fn rotation_only(phi: f64) -> (CircuitProgram, ParamTensor<f64>) {
        let spec = AnsatzSpec::single_qubit(1, false);
        let program = CircuitProgram::build(&spec).unwrap();
        let params = ParamTensor::from_free(&spec, &[0.0, 0.0, phi]).unwrap();
        (program, params)
    }

    #[test]
    fn closed_form_rotation_derivative() {
        let (p, t) = rotation_only(0.0);
        let g = shift_rule_grad(&p, &t, &[0.0; 3], 0).unwrap();
        assert!(g.0[2].abs() < 1e-15);

        let (p, t) = rotation_only(PI / 8.0);
        let g = shift_rule_grad(&p, &t, &[0.0; 3], 0).unwrap();
        assert!((g.0[2] + 2f64.sqrt()).abs() < 1e-12, "{}", g.0[2]);
    }

    #[test]
    fn phase_gates_on_zero_state_have_no_gradient() {
        let (p, t) = rotation_only(0.0);
        let g = shift_rule_grad(&p, &t, &[0.0; 3], 0).unwrap();
        assert_eq!(g.0[0], 0.0);
        assert_eq!(g.0[1], 0.0);
    }

    #[test]
    fn phase_next_to_measurement_has_zero_gradient() {
        // phases act after the rotation and right before measurement
        let (p, t) = rotation_only(0.4);
        let g = shift_rule_grad(&p, &t, &[0.3, 0.2, 0.1], 0).unwrap();
        assert!(g.0[0].abs() < 1e-15 && g.0[1].abs() < 1e-15);
    }

    #[test]
    fn step_bounds_and_observable_range() {
        let (p, t) = rotation_only(0.1);
        assert!(finite_diff_grad(&p, &t, &[0.0; 3], 0, 1e-2).is_err());
        assert!(finite_diff_grad(&p, &t, &[0.0; 3], 0, 1e-9).is_err());
        assert!(shift_rule_grad(&p, &t, &[0.0; 3], 1).is_err());
    }

    #[test]
    fn shift_matches_finite_difference() {
        let spec = AnsatzSpec::new(Family::StrongEntangling, 3, 3, false);
        let program = CircuitProgram::build(&spec).unwrap();
        let free: Vec<f64> = (0..program.free_param_count()).map(|i| (i as f64 * 0.731).sin() * 3.0).collect();
        let params = ParamTensor::from_free(&spec, &free).unwrap();
        let x = [0.4, 2.2, 1.3];
        for obs in 0..3 {
            let a = shift_rule_grad(&program, &params, &x, obs).unwrap();
            let b = finite_diff_grad(&program, &params, &x, obs, DEFAULT_FD_STEP).unwrap();
            for (u, v) in a.0.iter().zip(&b.0) {
                assert!((u - v).abs() <= 1e-6 * u.abs().max(1e-3), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn zero_head_kills_quantum_gradient() {
        let spec = AnsatzSpec::new(Family::StrongEntangling, 2, 3, false);
        let mut m: HybridModel<f64> = init_model(&spec, 2, 3).unwrap();
        m.head = ClassicalHead::zeros(2, 3);
        let s = Sample {
            features: vec![0.3, 0.2, 0.1],
            label: 1,
        };
        let g = model_grad(&m, &[&s]).unwrap();
        assert!(g.quantum.iter().all(|v| *v == 0.0));
        // uniform prediction: bias gradient = p - onehot
        assert_eq!(g.head_biases, vec![0.5, -0.5]);
    }

    #[test]
    fn empty_batch_rejected() {
        let spec = AnsatzSpec::new(Family::StrongEntangling, 1, 3, false);
        let m: HybridModel<f64> = init_model(&spec, 2, 3).unwrap();
        assert!(model_grad(&m, &[]).is_err());
    }
}
