//! Variational circuit model: angle encoding, layered trainable rotations
//! with an entangling ring, Pauli-Z readout, and fixed random linear
//! adapters that match the register to the problem dimension.
//!
//! Only the rotation angles train. Gradients with respect to the angles use
//! the parameter-shift rule, which is exact for rotations generated by
//! Pauli operators; the encoder and decoder receive no gradient at all.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::approximator::{Approximator, ApproximatorInput};
use crate::error::{Error, Result};
use crate::rng::{CounterRng, Stream};

use super::statevector::{Gate, StateVector};

/// Standard deviation of the initial angles.
const ANGLE_INIT_SCALE: f64 = 0.1;

/// Apply the angle encoding RY(π·tanh(f_q)) for each feature onto the given
/// register (normally |0…0⟩). The tanh squash keeps every angle inside
/// (-π, π) so the encoding cannot wrap.
pub fn encode(state: &mut StateVector, features: &[f64]) -> Result<()> {
    if features.len() != state.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{} features for a {}-qubit register",
            features.len(),
            state.num_qubits()
        )));
    }
    for (q, &f) in features.iter().enumerate() {
        state.apply(&Gate::ry(q, PI * f.tanh()))?;
    }
    Ok(())
}

/// Apply `layers` rounds of per-qubit RY rotations followed by the CNOT
/// entangling ring. The ring is the chain q → q+1 closed with a wrap-around
/// edge only when it adds a new pair (n > 2); a single qubit has no
/// entangler at all.
pub fn apply_ansatz(state: &mut StateVector, thetas: &[f64], layers: usize) -> Result<()> {
    let n = state.num_qubits();
    if thetas.len() != layers * n {
        return Err(Error::DimensionMismatch(format!(
            "{} angles for {layers} layers on {n} qubits",
            thetas.len()
        )));
    }
    for layer in 0..layers {
        for q in 0..n {
            state.apply(&Gate::ry(q, thetas[layer * n + q]))?;
        }
        for q in 0..n.saturating_sub(1) {
            state.apply(&Gate::cnot(q, q + 1))?;
        }
        if n > 2 {
            state.apply(&Gate::cnot(n - 1, 0))?;
        }
    }
    Ok(())
}

/// Variational circuit with frozen linear adapters.
///
/// Forward pass: features = E·[t; x] → angle encoding → ansatz → ⟨Z_q⟩ per
/// qubit → z = D·m. E is [n_qubits × (d+1)], D is [d × n_qubits], both drawn
/// once from `adapter_seed` and never updated; reloading a checkpoint
/// restores them bit for bit.
#[derive(Debug, Clone)]
pub struct VqcModel {
    num_qubits: usize,
    num_layers: usize,
    state_dim: usize,
    thetas: Vec<f64>,
    encoder: Vec<f64>,
    decoder: Vec<f64>,
    adapter_seed: u64,
    angle_seed: u64,
}

/// Forward record: the register right after encoding. Shifted-angle replays
/// for the parameter-shift rule restart the ansatz from here.
pub struct VqcTrace {
    encoded: StateVector,
}

impl VqcModel {
    pub fn new(
        state_dim: usize,
        num_qubits: usize,
        num_layers: usize,
        angle_seed: u64,
        adapter_seed: u64,
    ) -> Result<Self> {
        if state_dim == 0 || num_qubits == 0 || num_layers == 0 {
            return Err(Error::InvalidArgument(
                "state dimension, qubit count and layer count must be positive".into(),
            ));
        }

        let angle_rng = CounterRng::new(angle_seed, Stream::AngleInit);
        let thetas: Vec<f64> = (0..num_layers * num_qubits)
            .map(|i| {
                let layer = (i / num_qubits) as u64;
                let qubit = (i % num_qubits) as u64;
                ANGLE_INIT_SCALE * angle_rng.normal(layer, qubit, 0)
            })
            .collect();

        let adapter_rng = CounterRng::new(adapter_seed, Stream::AdapterInit);
        let in_dim = state_dim + 1;
        let enc_scale = 1.0 / (in_dim as f64).sqrt();
        let encoder: Vec<f64> = (0..num_qubits * in_dim)
            .map(|i| {
                let row = (i / in_dim) as u64;
                let col = (i % in_dim) as u64;
                enc_scale * adapter_rng.normal(0, row, col)
            })
            .collect();
        // decoder variance 1/(n_qubits · d) keeps ‖z‖ of order ‖m‖/√n
        // independent of the problem dimension; with variance 1/n_qubits the
        // expansion to R^d would inflate ‖z‖² by a factor d, and a quadratic
        // driver then swamps the value recursion with drift
        let dec_scale = 1.0 / ((num_qubits * state_dim) as f64).sqrt();
        let decoder: Vec<f64> = (0..state_dim * num_qubits)
            .map(|i| {
                let row = (i / num_qubits) as u64;
                let col = (i % num_qubits) as u64;
                dec_scale * adapter_rng.normal(1, row, col)
            })
            .collect();

        Ok(VqcModel {
            num_qubits,
            num_layers,
            state_dim,
            thetas,
            encoder,
            decoder,
            adapter_seed,
            angle_seed,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn encoder(&self) -> &[f64] {
        &self.encoder
    }

    pub fn decoder(&self) -> &[f64] {
        &self.decoder
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn adapter_seed(&self) -> u64 {
        self.adapter_seed
    }

    pub fn angle_seed(&self) -> u64 {
        self.angle_seed
    }

    /// Rebuild a model from persisted tensors (checkpoint loading).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        state_dim: usize,
        num_qubits: usize,
        num_layers: usize,
        thetas: Vec<f64>,
        encoder: Vec<f64>,
        decoder: Vec<f64>,
        angle_seed: u64,
        adapter_seed: u64,
    ) -> Result<Self> {
        if thetas.len() != num_layers * num_qubits
            || encoder.len() != num_qubits * (state_dim + 1)
            || decoder.len() != state_dim * num_qubits
        {
            return Err(Error::DimensionMismatch(
                "persisted tensors do not match the declared circuit shape".into(),
            ));
        }
        Ok(VqcModel {
            num_qubits,
            num_layers,
            state_dim,
            thetas,
            encoder,
            decoder,
            adapter_seed,
            angle_seed,
        })
    }

    /// E·[t; x] — the compressed feature vector fed to the encoding.
    fn encoder_features(&self, input: &ApproximatorInput) -> Vec<f64> {
        assert_eq!(input.state.len(), self.state_dim, "state dimension");
        let in_dim = self.state_dim + 1;
        let mut features = vec![0.0; self.num_qubits];
        for (q, f) in features.iter_mut().enumerate() {
            let row = &self.encoder[q * in_dim..(q + 1) * in_dim];
            let mut acc = row[0] * input.time_feature;
            for (w, x) in row[1..].iter().zip(input.state) {
                acc += w * x;
            }
            *f = acc;
        }
        features
    }

    fn encoded_state(&self, input: &ApproximatorInput) -> StateVector {
        let features = self.encoder_features(input);
        let mut state = StateVector::zero_state(self.num_qubits);
        encode(&mut state, &features).expect("feature count matches register");
        state
    }

    /// Measured ⟨Z⟩ vector after running the ansatz with the given angles
    /// from an already-encoded register.
    fn measure_with_angles(&self, encoded: &StateVector, thetas: &[f64]) -> Vec<f64> {
        let mut state = encoded.clone();
        apply_ansatz(&mut state, thetas, self.num_layers).expect("angle count matches shape");
        state.z_expectations()
    }

    fn decode(&self, measured: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim];
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.decoder[i * self.num_qubits..(i + 1) * self.num_qubits];
            *o = row.iter().zip(measured).map(|(d, m)| d * m).sum();
        }
        out
    }
}

impl Approximator for VqcModel {
    type Trace = VqcTrace;

    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn output_dim(&self) -> usize {
        self.state_dim
    }

    /// Only the rotation angles; the frozen adapters are not parameters.
    fn param_count(&self) -> usize {
        self.thetas.len()
    }

    fn params(&self) -> &[f64] {
        &self.thetas
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.thetas
    }

    fn forward(&self, input: &ApproximatorInput) -> Vec<f64> {
        let encoded = self.encoded_state(input);
        let measured = self.measure_with_angles(&encoded, &self.thetas);
        self.decode(&measured)
    }

    fn forward_traced(&self, input: &ApproximatorInput) -> (Vec<f64>, VqcTrace) {
        let encoded = self.encoded_state(input);
        let measured = self.measure_with_angles(&encoded, &self.thetas);
        (self.decode(&measured), VqcTrace { encoded })
    }

    /// Parameter-shift gradient:
    /// ∂⟨Z⟩/∂θ_i = (⟨Z⟩(θ_i + π/2) − ⟨Z⟩(θ_i − π/2)) / 2, chained through
    /// the decoder and the upstream gradient.
    fn backward(&self, trace: &VqcTrace, upstream: &[f64], grad: &mut [f64]) {
        assert_eq!(upstream.len(), self.state_dim, "upstream length");
        assert_eq!(grad.len(), self.thetas.len(), "gradient buffer length");

        // w = Dᵀ · upstream
        let mut w = vec![0.0; self.num_qubits];
        for (i, &u) in upstream.iter().enumerate() {
            let row = &self.decoder[i * self.num_qubits..(i + 1) * self.num_qubits];
            for (wq, d) in w.iter_mut().zip(row) {
                *wq += d * u;
            }
        }

        let mut shifted = self.thetas.clone();
        for i in 0..self.thetas.len() {
            shifted[i] = self.thetas[i] + FRAC_PI_2;
            let plus = self.measure_with_angles(&trace.encoded, &shifted);
            shifted[i] = self.thetas[i] - FRAC_PI_2;
            let minus = self.measure_with_angles(&trace.encoded, &shifted);
            shifted[i] = self.thetas[i];

            let mut acc = 0.0;
            for q in 0..self.num_qubits {
                acc += w[q] * (plus[q] - minus[q]) / 2.0;
            }
            grad[i] += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input<'a>(t: f64, state: &'a [f64]) -> ApproximatorInput<'a> {
        ApproximatorInput {
            time_feature: t,
            state,
        }
    }

    #[test]
    fn zero_features_leave_register_untouched() {
        let mut state = StateVector::zero_state(3);
        encode(&mut state, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(state.z_expectations(), vec![1.0, 1.0, 1.0]);
        assert!((state.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_qubit_encoding_expectation() {
        // ⟨Z⟩ after RY(π tanh f) on |0⟩ is cos(π tanh f).
        for &f in &[-2.0, 0.5, 3.0] {
            let mut state = StateVector::zero_state(1);
            encode(&mut state, &[f]).unwrap();
            let expected = (PI * f.tanh()).cos();
            assert!(
                (state.expect_z(0).unwrap() - expected).abs() < 1e-12,
                "feature {f}"
            );
        }
    }

    #[test]
    fn mirrored_features_mirror_amplitudes() {
        let features = [0.3, -1.2];
        let mut plus = StateVector::zero_state(2);
        let mut minus = StateVector::zero_state(2);
        encode(&mut plus, &features).unwrap();
        encode(&mut minus, &[-features[0], -features[1]]).unwrap();
        // ⟨Z⟩ agrees; amplitudes flip sign on each qubit in the |1⟩ branch
        for q in 0..2 {
            assert!(
                (plus.expect_z(q).unwrap() - minus.expect_z(q).unwrap()).abs() < 1e-12
            );
        }
        for idx in 0..4usize {
            let parity = (-1.0f64).powi(idx.count_ones() as i32);
            let a = plus.amplitudes()[idx];
            let b = minus.amplitudes()[idx];
            assert!((a.re - parity * b.re).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_ansatz_fixes_reference_state() {
        let mut state = StateVector::zero_state(3);
        apply_ansatz(&mut state, &[0.0; 6], 2).unwrap();
        assert!((state.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_qubit_ansatz_rotation() {
        let mut state = StateVector::zero_state(1);
        apply_ansatz(&mut state, &[FRAC_PI_2], 1).unwrap();
        assert!(state.expect_z(0).unwrap().abs() < 1e-12);
    }

    /// Two qubits, one layer, angles (π, 0): the rotation flips qubit 0 and
    /// the single entangling CNOT then flips qubit 1, landing on |11⟩ with
    /// ⟨Z⟩ = -1 on both qubits.
    #[test]
    fn two_qubit_ansatz_hand_calculation() {
        let mut state = StateVector::zero_state(2);
        apply_ansatz(&mut state, &[PI, 0.0], 1).unwrap();
        assert!((state.expect_z(0).unwrap() + 1.0).abs() < 1e-12);
        assert!((state.expect_z(1).unwrap() + 1.0).abs() < 1e-12);
        assert!((state.amplitudes()[3].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ansatz_rejects_wrong_angle_count() {
        let mut state = StateVector::zero_state(2);
        assert!(apply_ansatz(&mut state, &[0.0; 3], 2).is_err());
    }

    #[test]
    fn zero_decoder_gives_zero_output() {
        let mut model = VqcModel::new(3, 2, 2, 1, 2).unwrap();
        model.decoder.fill(0.0);
        let out = model.forward(&input(0.5, &[1.0, -2.0, 0.3]));
        assert_eq!(out, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_encoder_and_angles_decode_ones() {
        let mut model = VqcModel::new(2, 2, 1, 1, 2).unwrap();
        model.encoder.fill(0.0);
        model.thetas.fill(0.0);
        let out = model.forward(&input(0.7, &[5.0, -3.0]));
        // measurement gives (1, 1); output is the decoder row sums
        for (i, &o) in out.iter().enumerate() {
            let expected: f64 = model.decoder[i * 2..(i + 1) * 2].iter().sum();
            assert!((o - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_single_rotation_is_negative_sine() {
        // With a zero encoder the network output is ⟨Z⟩(θ) = cos θ through a
        // unit decoder, so the angle gradient is -sin θ.
        let mut model = VqcModel::new(1, 1, 1, 3, 4).unwrap();
        model.encoder.fill(0.0);
        model.decoder[0] = 1.0;

        for &(theta, expected) in &[(0.0, 0.0), (FRAC_PI_2, -1.0)] {
            model.thetas[0] = theta;
            let (_, trace) = model.forward_traced(&input(0.0, &[0.0]));
            let mut grad = vec![0.0];
            model.backward(&trace, &[1.0], &mut grad);
            assert!(
                (grad[0] - expected).abs() < 1e-12,
                "θ={theta}: grad {}",
                grad[0]
            );
        }
    }

    #[test]
    fn parameter_shift_matches_finite_differences() {
        for &(n, layers, seed) in &[(1usize, 1usize, 11u64), (2, 2, 12), (3, 2, 13)] {
            let d = 4;
            let mut model = VqcModel::new(d, n, layers, seed, seed + 100).unwrap();
            let state: Vec<f64> = (0..d).map(|i| 0.3 * i as f64 - 0.5).collect();
            let inp = input(0.4, &state);
            let upstream: Vec<f64> = (0..d).map(|i| 1.0 - 0.2 * i as f64).collect();

            let (_, trace) = model.forward_traced(&inp);
            let mut grad = vec![0.0; model.param_count()];
            model.backward(&trace, &upstream, &mut grad);

            let h = 1e-5;
            for k in 0..model.param_count() {
                let orig = model.thetas[k];
                model.thetas[k] = orig + h;
                let up: f64 = model
                    .forward(&inp)
                    .iter()
                    .zip(&upstream)
                    .map(|(o, u)| o * u)
                    .sum();
                model.thetas[k] = orig - h;
                let down: f64 = model
                    .forward(&inp)
                    .iter()
                    .zip(&upstream)
                    .map(|(o, u)| o * u)
                    .sum();
                model.thetas[k] = orig;
                let fd = (up - down) / (2.0 * h);
                assert!(
                    (grad[k] - fd).abs() < 1e-6,
                    "n={n} L={layers} param {k}: shift {} fd {fd}",
                    grad[k]
                );
            }
        }
    }

    #[test]
    fn adapters_are_not_trainable_parameters() {
        let model = VqcModel::new(10, 4, 2, 5, 6).unwrap();
        assert_eq!(model.param_count(), 8);
        assert_eq!(model.params().len(), 8);
        // gradient buffer sized for the angles only
        let (_, trace) = model.forward_traced(&input(0.1, &vec![0.2; 10]));
        let mut grad = vec![0.0; 8];
        model.backward(&trace, &vec![1.0; 10], &mut grad);
    }

    #[test]
    fn forward_is_bitwise_stable() {
        let model = VqcModel::new(4, 3, 2, 8, 9).unwrap();
        let state = [0.4, -1.0, 2.2, 0.0];
        let inp = input(0.25, &state);
        let a = model.forward(&inp);
        let b = model.forward(&inp);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn same_seeds_rebuild_identical_adapters() {
        let a = VqcModel::new(6, 3, 2, 1, 42).unwrap();
        let b = VqcModel::new(6, 3, 2, 9, 42).unwrap();
        assert_eq!(a.encoder(), b.encoder());
        assert_eq!(a.decoder(), b.decoder());
        assert_ne!(a.thetas(), b.thetas());
    }
}
