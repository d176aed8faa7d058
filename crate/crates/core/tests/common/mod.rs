//! Independent dense-matrix reference for the circuit families and shared helpers.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use qtl_core::{AnsatzSpec, Family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<C>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|r| (0..m).map(|c| (0..inner).map(|k| a[r][k] * b[k][c]).sum()).collect())
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac, br, bc) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![C::new(0.0, 0.0); ac * bc]; ar * br];
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `e^{i x} [[cos x, -sin x], [sin x, cos x]]`.
pub fn u_matrix(x: f64) -> Matrix {
    let g = C::from_polar(1.0, x);
    vec![
        vec![g * x.cos(), g * -x.sin()],
        vec![g * x.sin(), g * x.cos()],
    ]
}

/// `diag(e^{i t}, e^{-i t}) diag(e^{i g}, e^{-i g}) [[cos p, -sin p], [sin p, cos p]]`.
pub fn v_matrix(theta: f64, gamma: f64, phi: f64) -> Matrix {
    let a = C::from_polar(1.0, theta + gamma);
    let b = C::from_polar(1.0, -(theta + gamma));
    vec![
        vec![a * phi.cos(), a * -phi.sin()],
        vec![b * phi.sin(), b * phi.cos()],
    ]
}

/// Full-register operator for a one-qubit gate; qubit 0 is the least significant bit.
pub fn embed(gate: &Matrix, target: usize, qubits: usize) -> Matrix {
    let mut out = vec![vec![C::new(1.0, 0.0)]];
    for q in (0..qubits).rev() {
        let factor = if q == target { gate.clone() } else { identity(2) };
        out = kron(&out, &factor);
    }
    out
}

pub fn cnot_matrix(control: usize, target: usize, qubits: usize) -> Matrix {
    let n = 1 << qubits;
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        let j = if i >> control & 1 == 1 { i ^ (1 << target) } else { i };
        out[j][i] = C::new(1.0, 0.0);
    }
    out
}

/// Whole-circuit unitary built as a matrix chain, plus the resulting state from `|0...0>`.
pub fn oracle_unitary(spec: &AnsatzSpec, free: &[f64], features: &[f64]) -> Matrix {
    let q = spec.qubits;
    let mut total = identity(1 << q);
    let mut push = |m: Matrix| total = matmul(&m, &total);
    let mut next = 0;
    for layer in 1..=spec.layers {
        if layer == 1 || spec.reuploading {
            match spec.family {
                Family::SingleQubit => {
                    for x in features.iter().take(3) {
                        push(embed(&u_matrix(*x), 0, 1));
                    }
                }
                _ => {
                    for (j, x) in features.iter().enumerate() {
                        push(embed(&u_matrix(*x), j, q));
                    }
                }
            }
        }
        for j in 0..q {
            let (t, g, p) = match spec.family {
                Family::RealAmplitudes => {
                    next += 1;
                    (0.0, 0.0, free[next - 1])
                }
                _ => {
                    next += 3;
                    (free[next - 3], free[next - 2], free[next - 1])
                }
            };
            push(embed(&v_matrix(t, g, p), j, q));
        }
        if q >= 2 {
            match spec.family {
                Family::RealAmplitudes => {
                    for a in 0..q {
                        for b in a + 1..q {
                            push(cnot_matrix(a, b, q));
                        }
                    }
                }
                Family::StrongEntangling => {
                    let r = (layer - 1) % (q - 1) + 1;
                    for j in 0..q {
                        push(cnot_matrix(j, (j + r) % q, q));
                    }
                }
                Family::SingleQubit => {}
            }
        }
    }
    total
}

pub fn oracle_expectations(spec: &AnsatzSpec, free: &[f64], features: &[f64]) -> Vec<f64> {
    let u = oracle_unitary(spec, free, features);
    let probs: Vec<f64> = u.iter().map(|row| row[0].norm_sqr()).collect();
    (0..spec.qubits)
        .map(|j| {
            probs
                .iter()
                .enumerate()
                .map(|(i, p)| if i >> j & 1 == 0 { *p } else { -*p })
                .sum()
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_angles(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

/// Every `(family, N, q)` combination with `N, q <= 3` the families allow.
pub fn small_specs(reuploading: bool) -> Vec<AnsatzSpec> {
    let mut out = Vec::new();
    for layers in 1..=3 {
        for qubits in 1..=3 {
            out.push(AnsatzSpec::new(Family::RealAmplitudes, layers, qubits, reuploading));
            out.push(AnsatzSpec::new(Family::StrongEntangling, layers, qubits, reuploading));
        }
        out.push(AnsatzSpec::single_qubit(layers, reuploading));
    }
    out
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
