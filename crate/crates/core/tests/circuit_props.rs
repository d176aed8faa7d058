mod common;

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use qtl_core::ansatz::Shift;
use qtl_core::statevec::{gate_u, gate_v, Gate2x2, StateVector};
use qtl_core::{AnsatzSpec, CircuitProgram, Family, ParamTensor};

use common::*;

fn angle() -> impl Strategy<Value = f64> {
    -4.0 * PI..4.0 * PI
}

fn random_state(seed: u64, qubits: usize) -> StateVector<f64> {
    let mut r = rng(seed);
    let raw: Vec<C> = (0..1 << qubits)
        .map(|_| C::new(rng_f(&mut r), rng_f(&mut r)))
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn rng_f(r: &mut impl rand::Rng) -> f64 {
    r.random_range(-1.0..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trainable_gate_is_unitary(t in angle(), g in angle(), p in angle()) {
        let v = gate_v(t, g, p).unwrap();
        prop_assert!(v.unitarity_defect() < 1e-12);
        let u = gate_u(p).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), q in 1usize..=6, t in angle(), g in angle(), p in angle(), target in 0usize..6, control in 0usize..6) {
        let mut s = random_state(seed, q);
        s.apply_single(&gate_v(t, g, p).unwrap(), target % q).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        if q >= 2 && control % q != target % q {
            s.apply_cnot(control % q, target % q).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_application_matches_embedded_matrix(seed in any::<u64>(), q in 1usize..=4, t in angle(), g in angle(), p in angle(), target in 0usize..4) {
        let target = target % q;
        let mut s = random_state(seed, q);
        let before: Vec<C> = s.amplitudes().to_vec();
        s.apply_single(&gate_v(t, g, p).unwrap(), target).unwrap();
        let m = embed(&v_matrix(t, g, p), target, q);
        for (r, row) in m.iter().enumerate() {
            let expected: C = row.iter().zip(&before).map(|(a, b)| a * b).sum();
            prop_assert!((expected - s.amplitudes()[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn application_is_linear(seed in any::<u64>(), q in 1usize..=4, t in angle(), g in angle(), p in angle(), ar in -2.0..2.0f64, ai in -2.0..2.0f64) {
        // G(a x + y) = a G x + G y, checked on raw amplitude vectors.
        let x = random_state(seed, q);
        let y = random_state(seed.wrapping_add(1), q);
        let a = C::new(ar, ai);
        let gate = gate_v(t, g, p).unwrap();
        let apply = |v: Vec<C>| -> Vec<C> {
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut s = StateVector::from_amplitudes(v.iter().map(|z| z / n).collect()).unwrap();
            s.apply_single(&gate, 0).unwrap();
            s.amplitudes().iter().map(|z| z * n).collect()
        };
        let combined: Vec<C> = x.amplitudes().iter().zip(y.amplitudes()).map(|(u, v)| a * u + v).collect();
        let lhs = apply(combined);
        let gx = apply(x.amplitudes().to_vec());
        let gy = apply(y.amplitudes().to_vec());
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (a * gx[i] + gy[i])).norm() < 1e-11);
        }
    }

    #[test]
    fn global_phase_leaves_expectations(seed in any::<u64>(), q in 1usize..=4, phase in angle()) {
        let s = random_state(seed, q);
        let shifted = StateVector::from_amplitudes(
            s.amplitudes().iter().map(|a| a * C::from_polar(1.0, phase)).collect(),
        ).unwrap();
        for j in 0..q {
            prop_assert!((s.expect_z(j).unwrap() - shifted.expect_z(j).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn trainable_gate_is_periodic(t in angle(), g in angle(), p in angle()) {
        // Each angle enters through e^{+-i a} or cos/sin, so 2 pi is a full period.
        let a = gate_v(t, g, p).unwrap();
        for b in [gate_v(t + 2.0 * PI, g, p), gate_v(t, g + 2.0 * PI, p), gate_v(t, g, p + 2.0 * PI)] {
            let b = b.unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((a.entries[r][c] - b.entries[r][c]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn expectations_are_bounded(seed in any::<u64>(), layers in 1usize..=4, qubits in 1usize..=4, se in any::<bool>(), reup in any::<bool>()) {
        let family = if se { Family::StrongEntangling } else { Family::RealAmplitudes };
        let spec = AnsatzSpec::new(family, layers, qubits, reup);
        let program = CircuitProgram::build(&spec).unwrap();
        let mut r = rng(seed);
        let free = random_angles(&mut r, spec.free_param_count());
        let features = random_angles(&mut r, spec.feature_len());
        for z in program.expectations(&free, &features, Shift::None).unwrap() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&z));
        }
    }
}

#[test]
fn forward_matches_dense_oracle() {
    let mut r = rng(11);
    for reuploading in [false, true] {
        for spec in small_specs(reuploading) {
            let program = CircuitProgram::build(&spec).unwrap();
            for _ in 0..20 {
                let free = random_angles(&mut r, spec.free_param_count());
                let features = random_angles(&mut r, spec.feature_len());
                let params = ParamTensor::from_free(&spec, &free).unwrap();
                let ours = program.forward(&params, &features).unwrap();
                let reference = oracle_expectations(&spec, &free, &features);
                for (a, b) in ours.iter().zip(&reference) {
                    assert!((a - b).abs() < 1e-10, "{spec:?}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn final_state_matches_oracle_column() {
    let mut r = rng(12);
    let spec = AnsatzSpec::new(Family::StrongEntangling, 3, 3, true);
    let program = CircuitProgram::build(&spec).unwrap();
    let free = random_angles(&mut r, spec.free_param_count());
    let features = random_angles(&mut r, 3);
    let state = program.run_from(0, &free, &features, Shift::None).unwrap();
    let u = oracle_unitary(&spec, &free, &features);
    for (i, a) in state.amplitudes().iter().enumerate() {
        assert!((a - u[i][0]).norm() < 1e-10);
    }
}

#[test]
fn free_parameter_counts() {
    assert_eq!(AnsatzSpec::new(Family::RealAmplitudes, 3, 3, false).free_param_count(), 9);
    assert_eq!(AnsatzSpec::new(Family::StrongEntangling, 3, 3, false).free_param_count(), 27);
    assert_eq!(AnsatzSpec::single_qubit(2, true).free_param_count(), 6);
}

#[test]
fn single_precision_tracks_double() {
    let spec = AnsatzSpec::new(Family::StrongEntangling, 2, 3, false);
    let program = CircuitProgram::build(&spec).unwrap();
    let mut r = rng(3);
    let free = random_angles(&mut r, spec.free_param_count());
    let features = random_angles(&mut r, 3);
    let d = program.expectations(&free, &features, Shift::None).unwrap();
    let free32: Vec<f32> = free.iter().map(|v| *v as f32).collect();
    let feat32: Vec<f32> = features.iter().map(|v| *v as f32).collect();
    let s = program.expectations(&free32, &feat32, Shift::None).unwrap();
    for (a, b) in d.iter().zip(&s) {
        assert!((a - *b as f64).abs() < 1e-5);
    }
}

#[test]
fn gate_identity_helpers() {
    let id = Gate2x2::<f64>::identity();
    assert_eq!(id.unitarity_defect(), 0.0);
    let v = gate_v(0.3, -0.2, 1.1).unwrap();
    assert!(v.mul(&v.dagger()).unitarity_defect() < 1e-12);
}
