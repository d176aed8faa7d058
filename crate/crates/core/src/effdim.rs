//! Fisher information of the hybrid classifier with respect to its circuit
//! angles, trace normalization over an epsilon-ball, and the Monte Carlo local
//! effective dimension
//!
//! ```text
//! d_{n,lambda} = 2 log( mean_{theta in B_eps} sqrt(det(I + k Fbar(theta))) ) / log k,
//! k = lambda n / (2 pi log n),  Fbar = d F / mean(Tr F).
//! ```
//!
//! Logarithms are natural. Head and adapter weights are held fixed and do
//! not count toward `d`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParamTensor};
use crate::data::Dataset;
use crate::error::{QtlError, Result};
use crate::grad::score_vectors;
use crate::hybrid::{HybridModel, LOG_PROB_FLOOR};
use crate::linalg::symmetric_eigenvalues;
use crate::scalar::Real;

/// Floor applied to each eigenvalue of `I + k Fbar` before taking its log.
pub const LOGDET_FLOOR: f64 = 1e-300;

/// Dense symmetric `d x d` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix<T> {
    d: usize,
    entries: Vec<T>,
}

impl<T: Real> FisherMatrix<T> {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            entries: vec![T::zero(); d * d],
        }
    }

    pub fn from_entries(d: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != d * d {
            return Err(QtlError::invalid(format!(
                "{} entries do not form a {d} x {d} matrix",
                entries.len()
            )));
        }
        Ok(Self { d, entries })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.entries[r * self.d + c]
    }

    pub fn trace(&self) -> T {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            d: self.d,
            entries: self.entries.iter().map(|v| *v * factor).collect(),
        }
    }

    /// Largest `|F_ij - F_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.d {
            for c in r + 1..self.d {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<T> {
        symmetric_eigenvalues(&self.entries, self.d)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    fn add_outer(&mut self, weight: T, v: &[T]) {
        for r in 0..self.d {
            let wr = weight * v[r];
            for c in 0..self.d {
                self.entries[r * self.d + c] += wr * v[c];
            }
        }
    }
}

/// Empirical Fisher plus the number of `(x, y)` terms skipped because
/// `p(y|x)` fell below the log floor.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherEstimate<T> {
    pub matrix: FisherMatrix<T>,
    pub floored_terms: usize,
}

/// Class probabilities of the model for one raw feature vector.
pub fn model_probabilities<T: Real>(model: &HybridModel<T>, features: &[T]) -> Result<Vec<T>> {
    model.probabilities(features)
}

/// `F = (1/|D|) sum_x sum_y p(y|x) s_y s_y^T` with `s_y = d log p(y|x) / d theta`
/// over the free circuit angles.
pub fn empirical_fisher<T: Real>(
    model: &HybridModel<T>,
    params: &ParamTensor<T>,
    dataset: &Dataset<T>,
) -> Result<FisherEstimate<T>> {
    if !params.matches(&model.spec) {
        return Err(QtlError::invalid("parameter tensor does not match the model ansatz"));
    }
    fisher_at(model, &params.free_values(), dataset)
}

fn fisher_at<T: Real>(model: &HybridModel<T>, free: &[T], dataset: &Dataset<T>) -> Result<FisherEstimate<T>> {
    if dataset.is_empty() {
        return Err(QtlError::invalid("Fisher information needs a nonempty dataset"));
    }
    let floor = T::lit(LOG_PROB_FLOOR);
    let mut matrix = FisherMatrix::zeros(free.len());
    let mut floored_terms = 0;
    for row in dataset.rows() {
        let sv = score_vectors(model, free, &row.features)?;
        floored_terms += sv.floored;
        for (p, s) in sv.probabilities.iter().zip(&sv.scores) {
            if *p < floor {
                floored_terms += 1;
                continue;
            }
            matrix.add_outer(*p, s);
        }
    }
    let inv = T::one() / T::from_usize_lossy(dataset.len());
    Ok(FisherEstimate {
        matrix: matrix.scaled(inv),
        floored_terms,
    })
}

/// Rescales every sample by `d / mean(Tr F)` so the mean trace becomes `d`.
pub fn normalize_fisher<T: Real>(fishers: &[FisherMatrix<T>], d: usize) -> Result<Vec<FisherMatrix<T>>> {
    if fishers.is_empty() {
        return Err(QtlError::invalid("normalization needs at least one Fisher sample"));
    }
    let mean_trace =
        fishers.iter().map(FisherMatrix::trace).sum::<T>() / T::from_usize_lossy(fishers.len());
    if !(mean_trace > T::zero()) {
        return Err(QtlError::DegenerateModel(
            "every Fisher sample has zero trace".into(),
        ));
    }
    let factor = T::from_usize_lossy(d) / mean_trace;
    Ok(fishers.iter().map(|f| f.scaled(factor)).collect())
}

/// `m` points uniform in the Euclidean ball of radius `epsilon` around the
/// free parameters of `theta_star`.
pub fn sample_epsilon_ball<T: Real>(
    theta_star: &ParamTensor<T>,
    epsilon: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<ParamTensor<T>>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(QtlError::invalid(format!("ball radius must be positive, got {epsilon}")));
    }
    if m == 0 {
        return Err(QtlError::invalid("need at least one ball sample"));
    }
    let centre: Vec<f64> = theta_star.free_values().iter().map(|v| v.as_f64()).collect();
    let d = centre.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let mut out = theta_star.clone();
            if d == 0 {
                return Ok(out);
            }
            let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let u: f64 = rng.random();
            let radius = epsilon * u.powf(1.0 / d as f64);
            let point: Vec<T> = centre
                .iter()
                .zip(&dir)
                .map(|(c, g)| T::lit(c + radius * g / norm))
                .collect();
            out.set_free(&point)?;
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffDimConfig {
    pub n: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Default ball radius as a multiple of `1/sqrt(n)`.
pub const DEFAULT_EPSILON_SCALE: f64 = 1.05;
pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_LAMBDA: f64 = 1.0;

impl EffDimConfig {
    pub fn new(n: usize, lambda: f64, epsilon: f64, samples: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            lambda,
            epsilon,
            samples,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `lambda = 1`, `epsilon = 1.05 / sqrt(n)`, 256 samples.
    pub fn with_defaults(n: usize, seed: u64) -> Result<Self> {
        Self::new(
            n,
            DEFAULT_LAMBDA,
            DEFAULT_EPSILON_SCALE / (n as f64).sqrt(),
            DEFAULT_SAMPLES,
            seed,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(QtlError::Config(format!("n must be at least 8, got {}", self.n)));
        }
        let n = self.n as f64;
        let lambda_min = 2.0 * PI * n.ln() / n;
        if !(self.lambda > lambda_min && self.lambda <= 1.0) {
            return Err(QtlError::Config(format!(
                "lambda {} outside ({lambda_min}, 1] for n = {}",
                self.lambda, self.n
            )));
        }
        if !(self.epsilon > 1.0 / n.sqrt() && self.epsilon.is_finite()) {
            return Err(QtlError::Config(format!(
                "epsilon {} must exceed 1/sqrt(n) = {}",
                self.epsilon,
                1.0 / n.sqrt()
            )));
        }
        if self.samples < 16 {
            return Err(QtlError::Config(format!(
                "need at least 16 Monte Carlo samples, got {}",
                self.samples
            )));
        }
        if self.k() <= 1.0 {
            return Err(QtlError::Config(format!("k = {} must exceed 1", self.k())));
        }
        Ok(())
    }

    /// `lambda n / (2 pi log n)`.
    pub fn k(&self) -> f64 {
        let n = self.n as f64;
        self.lambda * n / (2.0 * PI * n.ln())
    }
}

/// How the centre of the ball was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaMode {
    /// One trained parameter set reused at every `n`.
    Fixed,
    /// The model was retrained for this grid point.
    Retrained,
}

impl ThetaMode {
    pub fn name(self) -> &'static str {
        match self {
            ThetaMode::Fixed => "fixed",
            ThetaMode::Retrained => "retrained",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffDimReport {
    pub spec: AnsatzSpec,
    pub config: EffDimConfig,
    pub d: usize,
    pub k: f64,
    pub effective_dimension: f64,
    /// `effective_dimension / d`.
    pub normalized: f64,
    /// `0.5 * logdet(I + k Fbar)` per ball sample.
    pub half_logdets: Vec<f64>,
    pub degenerate: bool,
    pub floored_terms: usize,
    pub theta_mode: ThetaMode,
}

impl EffDimReport {
    pub const CSV_HEADER: &'static str =
        "family,layers,qubits,reupload,n,lambda,epsilon,M,seed,d,effdim,normalized,theta_mode,degenerate";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.spec.family,
            self.spec.layers,
            self.spec.qubits,
            self.spec.reuploading,
            self.config.n,
            self.config.lambda,
            self.config.epsilon,
            self.config.samples,
            self.config.seed,
            self.d,
            self.effective_dimension,
            self.normalized,
            self.theta_mode.name(),
            self.degenerate
        )
    }
}

/// `0.5 * sum_i log(1 + k max(mu_i, 0))` over the eigenvalues `mu_i` of `fbar`.
pub fn half_logdet<T: Real>(fbar: &FisherMatrix<T>, k: f64) -> f64 {
    fbar.eigenvalues()
        .into_iter()
        .map(|mu| (1.0 + k * mu.as_f64().max(0.0)).max(LOGDET_FLOOR).ln())
        .sum::<f64>()
        * 0.5
}

/// `2 log(mean exp(h_i)) / log k` with a max-shifted log-sum-exp.
pub fn effective_dimension_from_half_logdets(half_logdets: &[f64], k: f64) -> f64 {
    let m = half_logdets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = half_logdets.iter().map(|h| (h - m).exp()).sum::<f64>() / half_logdets.len() as f64;
    2.0 * (m + mean.ln()) / k.ln()
}

/// Monte Carlo local effective dimension of `model` around `theta_star`.
pub fn local_effective_dimension<T: Real>(
    model: &HybridModel<T>,
    theta_star: &ParamTensor<T>,
    dataset: &Dataset<T>,
    config: &EffDimConfig,
) -> Result<EffDimReport> {
    config.validate()?;
    if !theta_star.matches(&model.spec) {
        return Err(QtlError::invalid("theta* does not match the model ansatz"));
    }
    let d = model.free_param_count();
    let k = config.k();
    let mut report = EffDimReport {
        spec: model.spec,
        config: *config,
        d,
        k,
        effective_dimension: 0.0,
        normalized: 0.0,
        half_logdets: Vec::new(),
        degenerate: false,
        floored_terms: 0,
        theta_mode: ThetaMode::Fixed,
    };
    if d == 0 {
        report.degenerate = true;
        return Ok(report);
    }

    let points = sample_epsilon_ball(theta_star, config.epsilon, config.samples, config.seed)?;
    let estimates = points
        .par_iter()
        .map(|p| fisher_at(model, &p.free_values(), dataset))
        .collect::<Result<Vec<_>>>()?;
    report.floored_terms = estimates.iter().map(|e| e.floored_terms).sum();
    let fishers: Vec<FisherMatrix<T>> = estimates.into_iter().map(|e| e.matrix).collect();

    let normalized = match normalize_fisher(&fishers, d) {
        Ok(n) => n,
        Err(QtlError::DegenerateModel(_)) => {
            report.degenerate = true;
            report.half_logdets = vec![0.0; fishers.len()];
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.half_logdets = normalized.par_iter().map(|f| half_logdet(f, k)).collect();
    report.effective_dimension = effective_dimension_from_half_logdets(&report.half_logdets, k);
    report.normalized = report.effective_dimension / d as f64;
    if !report.effective_dimension.is_finite() {
        return Err(QtlError::Numerical(format!(
            "effective dimension is not finite ({})",
            report.effective_dimension
        )));
    }
    Ok(report)
}
