//! Dense statevector simulation of small qubit registers.
//!
//! Indexing is little-endian: qubit q corresponds to bit q of the basis
//! index, so |q1 q0⟩ = |10⟩ is basis index 2.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on register size; 2^20 amplitudes is already 16 MiB.
const MAX_QUBITS: usize = 20;

/// 2^n complex amplitudes of an n-qubit register.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

/// Single-qubit or singly-controlled two-level gate.
#[derive(Debug, Clone)]
pub enum Gate {
    Single {
        target: usize,
        matrix: [[Complex64; 2]; 2],
    },
    Controlled {
        control: usize,
        target: usize,
        matrix: [[Complex64; 2]; 2],
    },
}

impl Gate {
    /// Rotation about the y axis: exp(-i θ Y / 2). Real-valued matrix
    /// [[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]].
    pub fn ry(target: usize, theta: f64) -> Gate {
        let (s, c) = (theta / 2.0).sin_cos();
        Gate::Single {
            target,
            matrix: [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::Controlled {
            control,
            target,
            matrix: [
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ],
        }
    }
}

impl StateVector {
    /// |0…0⟩ on n qubits.
    pub fn zero_state(num_qubits: usize) -> Self {
        assert!(
            num_qubits >= 1 && num_qubits <= MAX_QUBITS,
            "register size {num_qubits} outside 1..={MAX_QUBITS}"
        );
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector {
            amplitudes,
            num_qubits,
        }
    }

    /// Computational basis state |index⟩.
    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        let mut state = StateVector::zero_state(num_qubits);
        assert!(index < state.amplitudes.len(), "basis index out of range");
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        state
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Single { target, matrix } => {
                self.check_qubit(*target)?;
                self.apply_two_level(*target, matrix, None);
            }
            Gate::Controlled {
                control,
                target,
                matrix,
            } => {
                self.check_qubit(*control)?;
                self.check_qubit(*target)?;
                if control == target {
                    return Err(Error::InvalidArgument(
                        "control and target must differ".into(),
                    ));
                }
                self.apply_two_level(*target, matrix, Some(*control));
            }
        }
        debug_assert!(
            (self.norm_sqr() - 1.0).abs() < 1e-12,
            "gate application broke normalization"
        );
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::InvalidArgument(format!(
                "qubit {q} out of range for a {}-qubit register",
                self.num_qubits
            )));
        }
        Ok(())
    }

    fn apply_two_level(
        &mut self,
        target: usize,
        m: &[[Complex64; 2]; 2],
        control: Option<usize>,
    ) {
        let t_bit = 1usize << target;
        let n = self.amplitudes.len();
        for idx in 0..n {
            if idx & t_bit != 0 {
                continue;
            }
            if let Some(c) = control {
                if idx & (1 << c) == 0 {
                    continue;
                }
            }
            let pair = idx | t_bit;
            let a0 = self.amplitudes[idx];
            let a1 = self.amplitudes[pair];
            self.amplitudes[idx] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[pair] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Expectation value ⟨Z_qubit⟩ ∈ [-1, 1].
    pub fn expect_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let mut value = 0.0;
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let sign = if idx & bit == 0 { 1.0 } else { -1.0 };
            value += sign * amp.norm_sqr();
        }
        Ok(value)
    }

    /// ⟨Z_q⟩ for every qubit of the register.
    pub fn z_expectations(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.num_qubits];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
            for (q, v) in values.iter_mut().enumerate() {
                if idx & (1 << q) == 0 {
                    *v += p;
                } else {
                    *v -= p;
                }
            }
        }
        values
    }
}
