//! Dense statevector simulation for small registers.
//!
//! Qubit 0 is the least-significant bit of the basis index, so for two qubits
//! the amplitude order is `|q1 q0> = |00>, |01>, |10>, |11>`.

use num_complex::Complex;

use crate::error::{QtlError, Result};
use crate::scalar::Real;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 6;

/// Amplitudes of a `q`-qubit register, `2^q` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
    qubit_count: usize,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Result<Self> {
        Self::basis(qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(qubits)?;
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(QtlError::invalid(format!(
                "basis index {index} out of range for {qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            amplitudes,
            qubit_count: qubits,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two; no normalization
    /// is applied.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QtlError::invalid(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let qubits = len.trailing_zeros() as usize;
        check_qubit_count(qubits)?;
        Ok(Self {
            amplitudes,
            qubit_count: qubits,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    /// Sum of squared amplitude magnitudes.
    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` to `target`, identity elsewhere.
    pub fn apply_single(&mut self, gate: &Gate2x2<T>, target: usize) -> Result<()> {
        self.check_target(target)?;
        let stride = 1usize << target;
        let [[m00, m01], [m10, m11]] = gate.entries;
        // Walk blocks of 2*stride; the lower half has the target bit clear.
        for block in (0..self.amplitudes.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let j = i | stride;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = m00 * a + m01 * b;
                self.amplitudes[j] = m10 * a + m11 * b;
            }
        }
        Ok(())
    }

    /// Controlled-X: flips `target` on every basis state whose `control` bit is 1.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_target(control)?;
        self.check_target(target)?;
        if control == target {
            return Err(QtlError::invalid(format!(
                "controlled-X needs distinct qubits, got control = target = {control}"
            )));
        }
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// `<psi| Z_target |psi>`.
    pub fn expect_z(&self, target: usize) -> Result<T> {
        self.check_target(target)?;
        let mask = 1usize << target;
        let mut acc = T::zero();
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i & mask == 0 {
                acc += a.norm_sqr();
            } else {
                acc -= a.norm_sqr();
            }
        }
        Ok(acc)
    }

    /// Expectation of `observable`.
    pub fn expect(&self, observable: Observable) -> Result<T> {
        match observable {
            Observable::PauliZ(target) => self.expect_z(target),
        }
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.qubit_count {
            return Err(QtlError::invalid(format!(
                "qubit {target} out of range for a {}-qubit register",
                self.qubit_count
            )));
        }
        Ok(())
    }
}

fn check_qubit_count(qubits: usize) -> Result<()> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(QtlError::invalid(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {qubits}"
        )));
    }
    Ok(())
}

/// Per-qubit projective observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `|0><0| - |1><1|` on the given qubit.
    PauliZ(usize),
}

/// A single-qubit gate, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate2x2<T> {
    pub entries: [[Complex<T>; 2]; 2],
}

impl<T: Real> Gate2x2<T> {
    pub fn new(entries: [[Complex<T>; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn identity() -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self::new([[o, z], [z, o]])
    }

    /// Real rotation `[[cos a, -sin a], [sin a, cos a]]`.
    pub fn rotation(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let z = T::zero();
        Self::new([
            [Complex::new(c, z), Complex::new(-s, z)],
            [Complex::new(s, z), Complex::new(c, z)],
        ])
    }

    /// `diag(e^{ia}, e^{-ia})`.
    pub fn phase(angle: T) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self::new([
            [Complex::from_polar(T::one(), angle), zero],
            [zero, Complex::from_polar(T::one(), -angle)],
        ])
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        let mut out = self.entries;
        for cell in out.iter_mut().flatten() {
            *cell = *cell * factor;
        }
        Self::new(out)
    }

    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        Self::new([
            [e[0][0].conj(), e[1][0].conj()],
            [e[0][1].conj(), e[1][1].conj()],
        ])
    }

    /// `max |G^dagger G - I|` over entries.
    pub fn unitarity_defect(&self) -> T {
        let p = self.dagger().mul(self);
        let id = Self::identity();
        p.entries
            .iter()
            .flatten()
            .zip(id.entries.iter().flatten())
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }
}

/// Feature-encoding gate `e^{i phi} [[cos phi, -sin phi], [sin phi, cos phi]]`.
///
/// The global phase is kept; it never reaches an expectation value.
pub fn gate_u<T: Real>(phi: T) -> Result<Gate2x2<T>> {
    check_finite(&[phi])?;
    Ok(Gate2x2::rotation(phi).scale(Complex::from_polar(T::one(), phi)))
}

/// Trainable gate `phase(theta) * phase(gamma) * rotation(phi)`.
pub fn gate_v<T: Real>(theta: T, gamma: T, phi: T) -> Result<Gate2x2<T>> {
    check_finite(&[theta, gamma, phi])?;
    Ok(Gate2x2::phase(theta)
        .mul(&Gate2x2::phase(gamma))
        .mul(&Gate2x2::rotation(phi)))
}

fn check_finite<T: Real>(angles: &[T]) -> Result<()> {
    if let Some(a) = angles.iter().find(|a| !a.is_finite()) {
        return Err(QtlError::invalid(format!("non-finite angle {a}")));
    }
    Ok(())
}
