//! Dense statevector simulator with the handful of primitives both ansätze
//! need.
//!
//! Basis index `i` encodes the bitstring `x` with `x_u = (i >> u) & 1`, so
//! qubit `u` is vertex `u`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default memory cap on simulated qubits.
pub const MAX_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Diagonal of a target Hamiltonian in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalObjective {
    values: Vec<f64>,
}

impl DiagonalObjective {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Constraint-free encoding: `h(x) = -|x|`.
    pub fn qaoa_plus(n: usize) -> Self {
        Self {
            values: (0..1usize << n).map(|i| -f64::from(i.count_ones())).collect(),
        }
    }

    /// Penalty encoding: `h(x) = -|x| + lambda * (edges inside x)`.
    pub fn penalty(g: &Graph, lambda: f64) -> Self {
        let edges = g.edges();
        let values = (0..1usize << g.n())
            .map(|i| {
                let bad = edges
                    .iter()
                    .filter(|&&(u, v)| i >> u & 1 == 1 && i >> v & 1 == 1)
                    .count();
                -f64::from(i.count_ones()) + lambda * bad as f64
            })
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, MAX_QUBITS)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        if n > cap {
            return Err(Error::Capacity {
                what: "qubits",
                got: n,
                limit: cap,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// `|+>^n`.
    pub fn uniform(n: usize) -> Result<Self> {
        let mut s = Self::new(n)?;
        let a = Complex64::new((s.dim() as f64).sqrt().recip(), 0.0);
        s.amplitudes.fill(a);
        Ok(s)
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::Argument(format!(
                "{dim} amplitudes is not a power of two"
            )));
        }
        let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numeric("cannot normalize a zero state".into()));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::new(n)?;
        if index >= s.dim() {
            return Err(Error::Argument(format!("basis index {index} out of range")));
        }
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn check_diag(&self, diag: &DiagonalObjective) -> Result<()> {
        if diag.len() != self.dim() {
            return Err(Error::Argument(format!(
                "diagonal has {} entries, state has {}",
                diag.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `a[x] <- exp(-i * gamma * h(x)) * a[x]`.
    pub fn apply_phase_separator(&mut self, diag: &DiagonalObjective, gamma: f64) -> Result<()> {
        self.check_diag(diag)?;
        for (a, &h) in self.amplitudes.iter_mut().zip(diag.values()) {
            *a *= Complex64::from_polar(1.0, -gamma * h);
        }
        Ok(())
    }

    /// Phase separator for `h(x) = -|x|`, using one phase per Hamming weight.
    pub fn apply_weight_phase(&mut self, gamma: f64) {
        let phases: Vec<Complex64> = (0..=self.n_qubits)
            .map(|w| Complex64::from_polar(1.0, gamma * w as f64))
            .collect();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= phases[i.count_ones() as usize];
        }
    }

    /// Neighborhood-controlled rotation on qubit `u`: every amplitude pair
    /// differing only in bit `u` whose neighbor bits are all zero is rotated
    /// by `[[cos b, -i sin b], [-i sin b, cos b]]`; all other pairs are left
    /// untouched.
    pub fn apply_partial_mixer(&mut self, u: usize, neighbors: &[usize], beta: f64) -> Result<()> {
        if u >= self.n_qubits {
            return Err(Error::Argument(format!("qubit {u} out of range")));
        }
        let mut control = 0usize;
        for &v in neighbors {
            if v >= self.n_qubits || v == u {
                return Err(Error::Argument(format!("invalid control qubit {v} for target {u}")));
            }
            control |= 1 << v;
        }
        self.apply_partial_mixer_mask(u, control, beta);
        Ok(())
    }

    /// Mask form of [`Self::apply_partial_mixer`]; `control` must not contain bit `u`.
    pub fn apply_partial_mixer_mask(&mut self, u: usize, control: usize, beta: f64) {
        debug_assert_eq!(control >> u & 1, 0);
        let (s, c) = beta.sin_cos();
        let bit = 1usize << u;
        let skip = control | bit;
        let dim = self.dim();
        let amps = &mut self.amplitudes;
        let mut i = 0usize;
        while i < dim {
            if i & skip == 0 {
                let a0 = amps[i];
                let a1 = amps[i | bit];
                // -i sin(b) * a = (s * a.im, -s * a.re)
                amps[i] = Complex64::new(c * a0.re + s * a1.im, c * a0.im - s * a1.re);
                amps[i | bit] = Complex64::new(c * a1.re + s * a0.im, c * a1.im - s * a0.re);
            }
            i += 1;
        }
    }

    /// `exp(-i beta H_B)` with `H_B = -sum_u X_u`, i.e. `exp(+i beta X)` on
    /// every qubit.
    pub fn apply_transverse_mixer(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        for u in 0..self.n_qubits {
            let bit = 1usize << u;
            for i in (0..self.dim()).filter(|i| i & bit == 0) {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                // +i sin(b) * a = (-s * a.im, s * a.re)
                self.amplitudes[i] = Complex64::new(c * a0.re - s * a1.im, c * a0.im + s * a1.re);
                self.amplitudes[i | bit] =
                    Complex64::new(c * a1.re - s * a0.im, c * a1.im + s * a0.re);
            }
        }
    }

    /// `F = -<psi|H_C|psi>`.
    pub fn expectation_f(&self, diag: &DiagonalObjective) -> Result<f64> {
        self.check_diag(diag)?;
        Ok(-self
            .amplitudes
            .iter()
            .zip(diag.values())
            .map(|(a, h)| a.norm_sqr() * h)
            .sum::<f64>())
    }

    /// Expected Hamming weight, which is `F` for `h(x) = -|x|`.
    pub fn expected_weight(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * f64::from(i.count_ones()))
            .sum()
    }

    /// Most probable basis index; the lowest index wins exact ties.
    pub fn argmax_index(&self) -> usize {
        let mut best = 0;
        let mut best_p = f64::NEG_INFINITY;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > best_p {
                best = i;
                best_p = p;
            }
        }
        best
    }

    /// Multinomial measurement histogram keyed by basis index.
    pub fn sample<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<BTreeMap<usize, usize>> {
        if shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        let dist = WeightedIndex::new(self.probabilities())
            .map_err(|e| Error::Numeric(format!("invalid probabilities: {e}")))?;
        let mut hist = BTreeMap::new();
        for _ in 0..shots {
            *hist.entry(dist.sample(rng)).or_insert(0) += 1;
        }
        Ok(hist)
    }

    /// Debug dump: `index re im` per line.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(w, "{i} {:.17e} {:.17e}", a.re, a.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn new_state_is_all_zeros() {
        let s = StateVector::new(1).unwrap();
        assert_eq!(s.amplitudes(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(StateVector::new(2).unwrap().dim(), 4);
        let big = StateVector::new(14).unwrap();
        assert_eq!(big.dim(), 16384);
        assert_eq!(big.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(matches!(StateVector::new(25), Err(Error::Capacity { .. })));
    }

    #[test]
    fn phase_separator_cases() {
        let diag = DiagonalObjective::qaoa_plus(2);
        let mut s = StateVector::uniform(2).unwrap();
        let before = s.clone();
        s.apply_phase_separator(&diag, 0.0).unwrap();
        assert_eq!(s, before);

        let mut b = StateVector::basis(2, 3).unwrap();
        b.apply_phase_separator(&diag, 1.234).unwrap();
        assert!((b.probabilities()[3] - 1.0).abs() < 1e-15);

        // gamma = pi: exp(i pi |x|) = (-1)^|x|
        s.apply_phase_separator(&diag, PI).unwrap();
        let a = s.amplitudes();
        assert!(close(a[0], Complex64::new(0.5, 0.0)));
        assert!(close(a[1], Complex64::new(-0.5, 0.0)));
        assert!(close(a[2], Complex64::new(-0.5, 0.0)));
        assert!(close(a[3], Complex64::new(0.5, 0.0)));

        let wrong = DiagonalObjective::qaoa_plus(3);
        assert!(s.apply_phase_separator(&wrong, 0.1).is_err());
    }

    #[test]
    fn weight_phase_matches_generic_phase() {
        let diag = DiagonalObjective::qaoa_plus(3);
        let mut a = StateVector::uniform(3).unwrap();
        a.apply_transverse_mixer(0.3);
        let mut b = a.clone();
        a.apply_phase_separator(&diag, 0.77).unwrap();
        b.apply_weight_phase(0.77);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!(close(*x, *y));
        }
    }

    #[test]
    fn partial_mixer_cases() {
        let mut s = StateVector::new(3).unwrap();
        s.apply_partial_mixer(1, &[0, 2], FRAC_PI_2).unwrap();
        assert!(close(s.amplitudes()[0b010], Complex64::new(0.0, -1.0)));
        assert!(s.amplitudes()[0].norm() < 1e-15);

        // neighbor 0 is set: identity
        let mut b = StateVector::basis(3, 0b001).unwrap();
        let before = b.clone();
        b.apply_partial_mixer(1, &[0, 2], 0.9).unwrap();
        assert_eq!(b, before);

        let mut z = StateVector::uniform(3).unwrap();
        let before = z.clone();
        z.apply_partial_mixer(2, &[0], 0.0).unwrap();
        assert_eq!(z, before);

        assert!(z.apply_partial_mixer(3, &[], 0.1).is_err());
        assert!(z.apply_partial_mixer(0, &[0], 0.1).is_err());
        assert!(z.apply_partial_mixer(0, &[5], 0.1).is_err());
    }

    #[test]
    fn partial_mixer_inverse() {
        let mut s = StateVector::uniform(4).unwrap();
        s.apply_transverse_mixer(0.37);
        let before = s.clone();
        s.apply_partial_mixer(2, &[1, 3], 0.61).unwrap();
        s.apply_partial_mixer(2, &[1, 3], -0.61).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn transverse_mixer_cases() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_transverse_mixer(0.0);
        assert_eq!(s, StateVector::new(1).unwrap());

        s.apply_transverse_mixer(FRAC_PI_2);
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, 1.0)));

        let mut h = StateVector::new(1).unwrap();
        h.apply_transverse_mixer(FRAC_PI_4);
        let p = h.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_examples() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (3, 4)]).unwrap();
        let diag = DiagonalObjective::qaoa_plus(g.n());
        assert_eq!(StateVector::new(5).unwrap().expectation_f(&diag).unwrap(), 0.0);
        let s = StateVector::basis(5, 0b01110).unwrap();
        assert!((s.expectation_f(&diag).unwrap() - 3.0).abs() < 1e-15);

        let third = Complex64::new((1.0f64 / 3.0).sqrt(), 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let k2 = StateVector::from_amplitudes(vec![third, third, third, zero]).unwrap();
        let f = k2.expectation_f(&DiagonalObjective::qaoa_plus(2)).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
        assert!((k2.expected_weight() - f).abs() < 1e-12);
    }

    #[test]
    fn sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = StateVector::basis(3, 5).unwrap();
        assert_eq!(b.sample(200, &mut rng).unwrap(), BTreeMap::from([(5, 200)]));
        let z = StateVector::new(3).unwrap();
        assert_eq!(z.sample(10, &mut rng).unwrap(), BTreeMap::from([(0, 10)]));
        assert!(z.sample(0, &mut rng).is_err());

        let shots = 100_000;
        let u = StateVector::uniform(1).unwrap();
        let h = u.sample(shots, &mut rng).unwrap();
        let sigma = (shots as f64 * 0.25).sqrt();
        let zeros = *h.get(&0).unwrap_or(&0) as f64;
        assert!((zeros - shots as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn dump_format() {
        let mut out = Vec::new();
        StateVector::new(1).unwrap().dump(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("0 1.0"));
    }
}
