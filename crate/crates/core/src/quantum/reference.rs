//! Brute-force dense-matrix reference for small registers.
//!
//! Builds the full 2^n × 2^n unitary of a gate list by Kronecker products
//! and applies it by plain matrix arithmetic. Deliberately independent of
//! the statevector kernel so the two paths can check each other.

use num_complex::Complex64;

use super::statevector::Gate;

pub type DenseMatrix = Vec<Vec<Complex64>>;

fn zero(n: usize) -> DenseMatrix {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

pub fn identity(n: usize) -> DenseMatrix {
    let mut m = zero(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.len();
    let mut out = zero(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &DenseMatrix) -> DenseMatrix {
    let n = a.len();
    let mut out = zero(n);
    for i in 0..n {
        for j in 0..n {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn apply_to_vector(a: &DenseMatrix, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
        .collect()
}

/// Full 2^n × 2^n matrix of a single- or controlled-qubit gate. Index bit q
/// is qubit q, matching the statevector convention.
pub fn gate_matrix(gate: &Gate, num_qubits: usize) -> DenseMatrix {
    let dim = 1 << num_qubits;
    let mut out = zero(dim);
    match gate {
        Gate::Single { target, matrix } => {
            let t = 1usize << target;
            for col in 0..dim {
                let bit = usize::from(col & t != 0);
                for row_bit in 0..2 {
                    let row = (col & !t) | (row_bit * t);
                    out[row][col] += matrix[row_bit][bit];
                }
            }
        }
        Gate::Controlled {
            control,
            target,
            matrix,
        } => {
            let c = 1usize << control;
            let t = 1usize << target;
            for col in 0..dim {
                if col & c == 0 {
                    out[col][col] += Complex64::new(1.0, 0.0);
                } else {
                    let bit = usize::from(col & t != 0);
                    for row_bit in 0..2 {
                        let row = (col & !t) | (row_bit * t);
                        out[row][col] += matrix[row_bit][bit];
                    }
                }
            }
        }
    }
    out
}

/// Product of a gate list as one dense unitary (gates applied left to right
/// in circuit order).
pub fn circuit_unitary(gates: &[Gate], num_qubits: usize) -> DenseMatrix {
    let mut u = identity(1 << num_qubits);
    for gate in gates {
        u = matmul(&gate_matrix(gate, num_qubits), &u);
    }
    u
}

/// ⟨Z_q⟩ of a dense amplitude vector.
pub fn z_expectation(amplitudes: &[Complex64], qubit: usize) -> f64 {
    let bit = 1usize << qubit;
    amplitudes
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            let sign = if idx & bit == 0 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::statevector::StateVector;

    fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for (ra, rb) in a.iter().zip(b) {
            for (x, y) in ra.iter().zip(rb) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }

    #[test]
    fn gate_matrices_are_unitary() {
        for n in 1..=3usize {
            let mut gates = vec![Gate::ry(0, 0.83), Gate::ry(n - 1, -2.4)];
            if n >= 2 {
                gates.push(Gate::cnot(0, n - 1));
            }
            for gate in &gates {
                let u = gate_matrix(gate, n);
                let product = matmul(&dagger(&u), &u);
                assert!(max_abs_diff(&product, &identity(1 << n)) < 1e-12);
            }
        }
    }

    #[test]
    fn dense_product_matches_statevector_kernel() {
        let gates = [
            Gate::ry(0, 0.4),
            Gate::ry(1, -1.1),
            Gate::cnot(0, 1),
            Gate::ry(2, 2.2),
            Gate::cnot(2, 0),
        ];
        let mut state = StateVector::zero_state(3);
        for g in &gates {
            state.apply(g).unwrap();
        }

        let u = circuit_unitary(&gates, 3);
        let mut e0 = vec![Complex64::new(0.0, 0.0); 8];
        e0[0] = Complex64::new(1.0, 0.0);
        let dense = apply_to_vector(&u, &e0);

        for (a, b) in state.amplitudes().iter().zip(&dense) {
            assert!((a - b).norm() < 1e-12);
        }
        for q in 0..3 {
            assert!(
                (state.expect_z(q).unwrap() - z_expectation(&dense, q)).abs() < 1e-12
            );
        }
    }
}
