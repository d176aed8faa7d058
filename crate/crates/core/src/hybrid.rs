//! Classic-quantum-classic classifier: optional angle scaler and dense
//! adapter, the variational circuit, and a softmax head over the per-qubit
//! `<Z>` readouts.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, CircuitProgram, ParamTensor, Shift};
use crate::data::{split, AngleScaler, Dataset, SplitSpec, ENCODING_MAX_ANGLE};
use crate::error::{QtlError, Result};
use crate::grad::{model_grad, ModelGradient};
use crate::scalar::Real;

/// Probabilities below this are floored before taking logarithms.
pub const LOG_PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadActivation {
    /// `softmax(W z + b)`.
    Softmax,
    /// Two classes read straight off qubit 0: `p = ((1 + z0)/2, (1 - z0)/2)`.
    /// Has no trainable parameters.
    BinaryExpectation,
}

/// Dense output layer, weights stored row-major `classes x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalHead<T> {
    pub classes: usize,
    pub inputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
    pub activation: HeadActivation,
}

impl<T: Real> ClassicalHead<T> {
    pub fn zeros(classes: usize, inputs: usize) -> Self {
        Self {
            classes,
            inputs,
            weights: vec![T::zero(); classes * inputs],
            biases: vec![T::zero(); classes],
            activation: HeadActivation::Softmax,
        }
    }

    pub fn binary_expectation(inputs: usize) -> Self {
        Self {
            classes: 2,
            inputs,
            weights: Vec::new(),
            biases: Vec::new(),
            activation: HeadActivation::BinaryExpectation,
        }
    }

    pub fn weight(&self, class: usize, input: usize) -> T {
        self.weights[class * self.inputs + input]
    }

    pub fn logits(&self, z: &[T]) -> Vec<T> {
        (0..self.classes)
            .map(|c| {
                let row = &self.weights[c * self.inputs..(c + 1) * self.inputs];
                self.biases[c] + row.iter().zip(z).map(|(w, x)| *w * *x).sum::<T>()
            })
            .collect()
    }

    pub fn probabilities(&self, z: &[T]) -> Vec<T> {
        match self.activation {
            HeadActivation::Softmax => softmax(&self.logits(z)),
            HeadActivation::BinaryExpectation => {
                let half = T::lit(0.5);
                let p0 = ((T::one() + z[0]) * half).max(T::zero()).min(T::one());
                vec![p0, T::one() - p0]
            }
        }
    }

    /// `d log p_y / d z` for every class `y`, with `p` floored at [`LOG_PROB_FLOOR`].
    /// Returns one row of length `inputs` per class and the floored-term count.
    pub fn log_prob_grad_z(&self, probs: &[T]) -> (Vec<Vec<T>>, usize) {
        match self.activation {
            HeadActivation::Softmax => {
                // d log p_y / d z = W^T (e_y - p)
                let rows = (0..self.classes)
                    .map(|y| {
                        (0..self.inputs)
                            .map(|j| {
                                let mut g = self.weight(y, j);
                                for (c, p) in probs.iter().enumerate() {
                                    g -= *p * self.weight(c, j);
                                }
                                g
                            })
                            .collect()
                    })
                    .collect();
                (rows, 0)
            }
            HeadActivation::BinaryExpectation => {
                let floor = T::lit(LOG_PROB_FLOOR);
                let half = T::lit(0.5);
                let mut floored = 0;
                let mut row = |p: T, sign: T| {
                    let mut r = vec![T::zero(); self.inputs];
                    if p < floor {
                        floored += 1;
                    } else {
                        r[0] = sign * half / p;
                    }
                    r
                };
                let rows = vec![row(probs[0], T::one()), row(probs[1], -T::one())];
                (rows, floored)
            }
        }
    }

    pub fn trainable_len(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|l| (*l - m).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Trainable `relu(A x + b)` map from incoming features to circuit angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adapter<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Real> Adapter<T> {
    pub fn init(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| T::lit(rng.random_range(-bound..bound)))
                .collect(),
            // Start in the active region of the rectifier, mid-way through the angle range.
            biases: vec![T::lit(PI / 2.0); outputs],
        }
    }

    pub fn pre_activation(&self, x: &[T]) -> Vec<T> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.biases[o] + row.iter().zip(x).map(|(w, v)| *w * *v).sum::<T>()
            })
            .collect()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.pre_activation(x)
            .into_iter()
            .map(|v| v.max(T::zero()))
            .collect()
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub input: Vec<T>,
    pub pre_activation: Option<Vec<T>>,
    pub angles: Vec<T>,
    pub expectations: Vec<T>,
    pub probabilities: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel<T> {
    pub spec: AnsatzSpec,
    pub program: CircuitProgram,
    pub params: ParamTensor<T>,
    pub head: ClassicalHead<T>,
    pub adapter: Option<Adapter<T>>,
    pub scaler: Option<AngleScaler<T>>,
}

impl<T: Real> HybridModel<T> {
    pub fn new(spec: AnsatzSpec, params: ParamTensor<T>, head: ClassicalHead<T>) -> Result<Self> {
        let program = CircuitProgram::build(&spec)?;
        if !params.matches(&spec) {
            return Err(QtlError::invalid("parameter tensor does not match ansatz"));
        }
        if head.inputs != spec.qubits {
            return Err(QtlError::invalid(format!(
                "head expects {} inputs but the circuit has {} qubits",
                head.inputs, spec.qubits
            )));
        }
        Ok(Self {
            spec,
            program,
            params,
            head,
            adapter: None,
            scaler: None,
        })
    }

    pub fn class_count(&self) -> usize {
        self.head.classes
    }

    /// Width of the raw feature vectors this model accepts.
    pub fn input_dim(&self) -> usize {
        match (&self.adapter, &self.scaler) {
            (Some(a), _) => a.inputs,
            (None, Some(s)) => s.dim(),
            (None, None) => self.spec.feature_len(),
        }
    }

    pub fn free_param_count(&self) -> usize {
        self.program.free_param_count()
    }

    /// Scaled (and adapted) input before it reaches the circuit.
    pub fn encode(&self, features: &[T]) -> Result<(Vec<T>, Option<Vec<T>>, Vec<T>)> {
        if features.len() != self.input_dim() {
            return Err(QtlError::invalid(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                features.len()
            )));
        }
        let input = match &self.scaler {
            Some(s) => s.apply(features),
            None => features.to_vec(),
        };
        let (pre, angles) = match &self.adapter {
            Some(a) => {
                let pre = a.pre_activation(&input);
                let angles = pre.iter().map(|v| v.max(T::zero())).collect();
                (Some(pre), angles)
            }
            None => (None, input.clone()),
        };
        Ok((input, pre, angles))
    }

    pub fn trace_with(&self, free: &[T], features: &[T]) -> Result<ForwardTrace<T>> {
        let (input, pre_activation, angles) = self.encode(features)?;
        let expectations = self.program.expectations(free, &angles, Shift::None)?;
        let probabilities = self.head.probabilities(&expectations);
        Ok(ForwardTrace {
            input,
            pre_activation,
            angles,
            expectations,
            probabilities,
        })
    }

    pub fn trace(&self, features: &[T]) -> Result<ForwardTrace<T>> {
        self.trace_with(&self.params.free_values(), features)
    }

    /// Class probabilities for one raw feature vector.
    pub fn probabilities(&self, features: &[T]) -> Result<Vec<T>> {
        Ok(self.trace(features)?.probabilities)
    }

    /// Most probable class, lowest index on ties.
    pub fn predict(&self, features: &[T]) -> Result<(usize, Vec<T>)> {
        let probs = self.probabilities(features)?;
        Ok((argmax(&probs), probs))
    }
}

/// Index of the largest entry; the first one wins ties.
pub fn argmax<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Fresh model: circuit angles uniform in `[0, 2 pi)`, head weights uniform in
/// `[-0.1, 0.1]`, zero biases.
pub fn init_model<T: Real>(spec: &AnsatzSpec, classes: usize, seed: u64) -> Result<HybridModel<T>> {
    if classes < 2 {
        return Err(QtlError::invalid("need at least two classes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free: Vec<T> = (0..spec.free_param_count())
        .map(|_| T::lit(rng.random_range(0.0..2.0 * PI)))
        .collect();
    let params = ParamTensor::from_free(spec, &free)?;
    let mut head = ClassicalHead::zeros(classes, spec.qubits);
    for w in head.weights.iter_mut() {
        *w = T::lit(rng.random_range(-0.1..=0.1));
    }
    HybridModel::new(*spec, params, head)
}

/// Adds a dense adapter so `input_dim`-wide features can drive the circuit.
pub fn attach_adapter<T: Real>(model: &mut HybridModel<T>, input_dim: usize, seed: u64) {
    // Separate stream from init_model so attaching never perturbs the circuit init.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xada9_7e55);
    model.adapter = Some(Adapter::init(input_dim, model.spec.feature_len(), &mut rng));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// Circuit, head and adapter are all updated.
    Joint,
    /// Only circuit angles move.
    QuantumOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub head_learning_rate: f64,
    pub optimizer: Optimizer,
    pub mode: TrainMode,
    pub seed: u64,
    pub train_fraction: f64,
    /// Fit an angle scaler onto `[0, ENCODING_MAX_ANGLE]` on the training split.
    pub rescale: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 64,
            learning_rate: 0.05,
            head_learning_rate: 0.01,
            optimizer: Optimizer::Adam,
            mode: TrainMode::Joint,
            seed: 0,
            train_fraction: 0.8,
            rescale: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, train_rows: usize) -> Result<()> {
        if self.epochs == 0 {
            return Err(QtlError::invalid("epochs must be at least 1"));
        }
        if self.batch_size == 0 || self.batch_size > train_rows {
            return Err(QtlError::invalid(format!(
                "batch size {} must be in 1..={train_rows}",
                self.batch_size
            )));
        }
        for (name, lr) in [
            ("learning rate", self.learning_rate),
            ("head learning rate", self.head_learning_rate),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(QtlError::invalid(format!("{name} must be positive, got {lr}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class_f1: Vec<f64>,
    pub loss_history: Vec<f64>,
}

/// Accuracy and one-vs-rest F1 over `dataset`.
pub fn evaluate<T: Real>(model: &HybridModel<T>, dataset: &Dataset<T>) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(QtlError::invalid("cannot evaluate on an empty dataset"));
    }
    if dataset.class_count() != model.class_count() {
        return Err(QtlError::Validation(format!(
            "model has {} classes, dataset has {}",
            model.class_count(),
            dataset.class_count()
        )));
    }
    let predicted = dataset
        .rows()
        .par_iter()
        .map(|r| model.predict(&r.features).map(|(l, _)| l))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<usize> = dataset.labels().collect();
    Ok(score(&truth, &predicted, model.class_count()))
}

/// Accuracy and per-class F1 from label lists. F1 is 0 for a class that is
/// neither present nor predicted.
pub fn score(truth: &[usize], predicted: &[usize], classes: usize) -> Metrics {
    let correct = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    let per_class_f1 = (0..classes)
        .map(|c| {
            let tp = truth.iter().zip(predicted).filter(|(t, p)| **t == c && **p == c).count();
            let fp = truth.iter().zip(predicted).filter(|(t, p)| **t != c && **p == c).count();
            let fn_ = truth.iter().zip(predicted).filter(|(t, p)| **t == c && **p != c).count();
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                (2 * tp) as f64 / denom as f64
            }
        })
        .collect();
    Metrics {
        accuracy: correct as f64 / truth.len() as f64,
        per_class_f1,
        loss_history: Vec::new(),
    }
}

/// Mean cross-entropy of the model over `dataset`.
pub fn mean_loss<T: Real>(model: &HybridModel<T>, dataset: &Dataset<T>) -> Result<T> {
    let floor = T::lit(LOG_PROB_FLOOR);
    let mut total = T::zero();
    for r in dataset.rows() {
        let p = model.probabilities(&r.features)?;
        total -= p[r.label].max(floor).ln();
    }
    Ok(total / T::from_usize_lossy(dataset.len()))
}

struct AdamState<T> {
    m: Vec<T>,
    v: Vec<T>,
    step: i32,
}

impl<T: Real> AdamState<T> {
    fn new(len: usize) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            step: 0,
        }
    }
}

/// Flat view of every trainable group with its learning rate.
struct Optim<T> {
    kind: Optimizer,
    states: Vec<AdamState<T>>,
}

impl<T: Real> Optim<T> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(kind: Optimizer, sizes: &[usize]) -> Self {
        Self {
            kind,
            states: sizes.iter().map(|n| AdamState::new(*n)).collect(),
        }
    }

    fn update(&mut self, group: usize, values: &mut [T], grad: &[T], lr: f64) {
        let lr = T::lit(lr);
        match self.kind {
            Optimizer::Sgd => {
                for (v, g) in values.iter_mut().zip(grad) {
                    *v -= lr * *g;
                }
            }
            Optimizer::Adam => {
                let s = &mut self.states[group];
                s.step += 1;
                let (b1, b2) = (T::lit(Self::BETA1), T::lit(Self::BETA2));
                let c1 = T::one() - b1.powi(s.step);
                let c2 = T::one() - b2.powi(s.step);
                for i in 0..values.len() {
                    s.m[i] = b1 * s.m[i] + (T::one() - b1) * grad[i];
                    s.v[i] = b2 * s.v[i] + (T::one() - b2) * grad[i] * grad[i];
                    let mhat = s.m[i] / c1;
                    let vhat = s.v[i] / c2;
                    values[i] -= lr * mhat / (vhat.sqrt() + T::lit(Self::EPS));
                }
            }
        }
    }
}

/// Mini-batch training on `train_set` as given (no splitting, no rescaling).
/// Returns the per-epoch mean training loss.
pub fn train_on<T: Real>(
    model: &mut HybridModel<T>,
    train_set: &Dataset<T>,
    config: &TrainConfig,
) -> Result<Vec<f64>> {
    config.validate(train_set.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let adapter_len = model.adapter.as_ref().map_or(0, |a| a.weights.len() + a.biases.len());
    let mut optim = Optim::new(
        config.optimizer,
        &[model.free_param_count(), model.head.trainable_len(), adapter_len],
    );
    let mut free = model.params.free_values();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let rows: Vec<_> = batch.iter().map(|&i| &train_set.rows()[i]).collect();
            let g: ModelGradient<T> = model_grad(model, &rows)?;
            let loss = g.loss.as_f64();
            if !loss.is_finite() || g.has_non_finite() {
                return Err(QtlError::Numerical(format!(
                    "non-finite loss or gradient at epoch {} (learning rate {:e}, head learning rate {:e}); \
                     try a smaller learning rate",
                    epoch + 1,
                    config.learning_rate,
                    config.head_learning_rate
                )));
            }
            epoch_loss += loss * rows.len() as f64;

            optim.update(0, &mut free, &g.quantum, config.learning_rate);
            model.params.set_free(&free)?;
            if config.mode == TrainMode::Joint {
                let mut head_vals: Vec<T> =
                    model.head.weights.iter().chain(&model.head.biases).copied().collect();
                let head_grad: Vec<T> = g.head_weights.iter().chain(&g.head_biases).copied().collect();
                optim.update(1, &mut head_vals, &head_grad, config.head_learning_rate);
                let nw = model.head.weights.len();
                model.head.weights.copy_from_slice(&head_vals[..nw]);
                model.head.biases.copy_from_slice(&head_vals[nw..]);
                if let Some(adapter) = model.adapter.as_mut() {
                    let mut vals: Vec<T> = adapter.weights.iter().chain(&adapter.biases).copied().collect();
                    let grad: Vec<T> = g.adapter_weights.iter().chain(&g.adapter_biases).copied().collect();
                    optim.update(2, &mut vals, &grad, config.head_learning_rate);
                    let nw = adapter.weights.len();
                    adapter.weights.copy_from_slice(&vals[..nw]);
                    adapter.biases.copy_from_slice(&vals[nw..]);
                }
            }
        }
        history.push(epoch_loss / train_set.len() as f64);
    }
    Ok(history)
}

/// Outcome of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: HybridModel<T>,
    /// Metrics on the held-out split, with the training loss history.
    pub metrics: Metrics,
    pub train_metrics: Metrics,
    pub train_set: Dataset<T>,
    pub test_set: Dataset<T>,
}

/// Stratified split by `config.train_fraction`, optional rescaling fitted on the
/// training part, mini-batch training, evaluation on the held-out part.
pub fn train<T: Real>(
    model: HybridModel<T>,
    dataset: &Dataset<T>,
    config: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    let present = dataset.class_counts().iter().filter(|c| **c > 0).count();
    if present < model.class_count() {
        return Err(QtlError::Validation(format!(
            "dataset has {present} labelled classes, model expects {}",
            model.class_count()
        )));
    }
    let spec = SplitSpec::from_fraction(dataset.len(), config.train_fraction, config.seed)?;
    let (train_set, test_set) = split(dataset, &spec)?;
    let mut model = model;
    if config.rescale {
        model.scaler = Some(AngleScaler::fit(&train_set, T::zero(), T::lit(ENCODING_MAX_ANGLE))?);
    }
    let history = train_on(&mut model, &train_set, config)?;
    let mut metrics = evaluate(&model, &test_set)?;
    metrics.loss_history = history.clone();
    let mut train_metrics = evaluate(&model, &train_set)?;
    train_metrics.loss_history = history;
    Ok(TrainOutcome {
        model,
        metrics,
        train_metrics,
        train_set,
        test_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::Family;

    #[test]
    fn init_is_deterministic_and_shaped() {
        let spec = AnsatzSpec::new(Family::StrongEntangling, 3, 3, false);
        let a: HybridModel<f64> = init_model(&spec, 3, 9).unwrap();
        let b: HybridModel<f64> = init_model(&spec, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.head.weights.len(), 9);
        assert!(a.head.weights.iter().all(|w| w.abs() <= 0.1));
        assert!(a.head.biases.iter().all(|b| *b == 0.0));
        assert!(a
            .params
            .free_values()
            .iter()
            .all(|v| (0.0..2.0 * PI).contains(v)));
    }

    #[test]
    fn real_amplitude_zeros_survive_init() {
        let spec = AnsatzSpec::new(Family::RealAmplitudes, 3, 3, false);
        let m: HybridModel<f64> = init_model(&spec, 2, 1).unwrap();
        for l in 0..3 {
            for q in 0..3 {
                assert_eq!(m.params.get(l, q, 0), 0.0);
                assert_eq!(m.params.get(l, q, 1), 0.0);
            }
        }
    }

    #[test]
    fn zero_head_predicts_uniform_and_class_zero() {
        let spec = AnsatzSpec::new(Family::StrongEntangling, 2, 3, false);
        let mut m: HybridModel<f64> = init_model(&spec, 3, 4).unwrap();
        m.head = ClassicalHead::zeros(3, 3);
        let (label, probs) = m.predict(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(label, 0);
        for p in probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn binary_expectation_head() {
        let spec = AnsatzSpec::single_qubit(1, false);
        let m = HybridModel::new(
            spec,
            ParamTensor::<f64>::zeros(&spec),
            ClassicalHead::binary_expectation(1),
        )
        .unwrap();
        let (label, probs) = m.predict(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(label, 0);
        assert_eq!(probs, vec![1.0, 0.0]);
    }

    #[test]
    fn softmax_shift_invariance() {
        let logits = [0.3, -1.2, 2.5];
        let shifted: Vec<f64> = logits.iter().map(|l| l + 7.0).collect();
        assert_eq!(argmax(&softmax(&logits)), argmax(&softmax(&shifted)));
    }

    #[test]
    fn scoring() {
        let perfect = score(&[0, 1, 1, 0], &[0, 1, 1, 0], 2);
        assert_eq!(perfect.accuracy, 1.0);
        assert_eq!(perfect.per_class_f1, vec![1.0, 1.0]);
        let constant = score(&[0, 1, 0, 1], &[0, 0, 0, 0], 2);
        assert_eq!(constant.accuracy, 0.5);
        // truth 0 0 0 1 1 2, predicted 0 1 0 1 2 2
        // class 0: tp 2 fp 0 fn 1 -> 4/5; class 1: tp 1 fp 1 fn 1 -> 2/4;
        // class 2: tp 1 fp 1 fn 0 -> 2/3
        let m = score(&[0, 0, 0, 1, 1, 2], &[0, 1, 0, 1, 2, 2], 3);
        assert!((m.accuracy - 4.0 / 6.0).abs() < 1e-15);
        assert!((m.per_class_f1[0] - 0.8).abs() < 1e-15);
        assert!((m.per_class_f1[1] - 0.5).abs() < 1e-15);
        assert!((m.per_class_f1[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(cfg.validate(10).is_err());
        let cfg = TrainConfig {
            batch_size: 11,
            ..Default::default()
        };
        assert!(cfg.validate(10).is_err());
    }

    #[test]
    fn evaluate_rejects_empty() {
        let spec = AnsatzSpec::new(Family::StrongEntangling, 1, 3, false);
        let m: HybridModel<f64> = init_model(&spec, 2, 0).unwrap();
        let empty = Dataset::new(vec![], 2, 3).unwrap();
        assert!(evaluate(&m, &empty).is_err());
    }
}
