use num_complex::Complex;
use num_traits::Float;
use rand::Rng;

/// A dense register of `qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector<T> {
    qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Float> Statevector<T> {
    /// `|0...0>`.
    pub fn zero(qubits: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Self { qubits, amps }
    }

    /// Uniform superposition, prepared by a Hadamard on every qubit.
    pub fn uniform(qubits: usize) -> Self {
        let mut s = Self::zero(qubits);
        s.hadamard_all();
        s
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn hadamard(&mut self, qubit: usize) {
        let h = T::one() / (T::one() + T::one()).sqrt();
        let bit = 1 << qubit;
        for a in 0..self.amps.len() {
            if a & bit == 0 {
                let (x, y) = (self.amps[a], self.amps[a | bit]);
                self.amps[a] = (x + y).scale(h);
                self.amps[a | bit] = (x - y).scale(h);
            }
        }
    }

    pub fn hadamard_all(&mut self) {
        for q in 0..self.qubits {
            self.hadamard(q);
        }
    }

    /// Phase oracle: negates the amplitude of every basis state `x` with
    /// `marked(x)`.
    pub fn phase_flip(&mut self, mut marked: impl FnMut(usize) -> bool) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            if marked(x) {
                *a = -*a;
            }
        }
    }

    /// Inversion about the mean, `2|s><s| - I`.
    pub fn diffuse(&mut self) {
        let len = T::from(self.amps.len()).unwrap();
        let sum = self
            .amps
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, a| acc + a);
        let twice_mean = sum.scale((T::one() + T::one()) / len);
        for a in &mut self.amps {
            *a = twice_mean - *a;
        }
    }

    /// The same reflection built from gates: `H^n (2|0><0| - I) H^n`.
    pub fn diffuse_with_gates(&mut self) {
        self.hadamard_all();
        self.phase_flip(|x| x != 0);
        self.hadamard_all();
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn probability(&self, x: usize) -> T {
        self.amps[x].norm_sqr()
    }

    /// Samples a basis state.
    pub fn measure<R: Rng>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        for (x, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr().to_f64().unwrap();
            if r < acc {
                return x;
            }
        }
        // Rounding left a sliver of mass unassigned.
        self.amps.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_state_is_flat_and_normalized() {
        let s = Statevector::<f64>::uniform(4);
        assert_eq!(s.dim(), 16);
        for x in 0..16 {
            assert!((s.probability(x) - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_inversion_matches_gate_construction() {
        let mut a = Statevector::<f64>::uniform(5);
        a.phase_flip(|x| x == 3 || x == 17);
        let mut b = a.clone();
        a.diffuse();
        b.diffuse_with_gates();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_survives_long_gate_sequences() {
        let mut s = Statevector::<f64>::uniform(8);
        for r in 0..200 {
            s.phase_flip(|x| x % 7 == r % 7);
            s.diffuse();
            s.hadamard(r % 8);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn f32_register() {
        let mut s = Statevector::<f32>::uniform(2);
        s.phase_flip(|x| x == 1);
        s.diffuse();
        assert!((s.probability(1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn measurement_follows_probabilities() {
        let mut s = Statevector::<f64>::zero(3);
        s.hadamard(0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ones = (0..4000).filter(|_| s.measure(&mut rng) == 1).count();
        assert!((ones as f64 / 4000.0 - 0.5).abs() < 0.05);
        assert!((0..100).all(|_| s.measure(&mut rng) < 2));
    }
}
