//! Dense statevector over `n` qubits.
//!
//! Qubit 0 is the most significant bit of a basis index, so for a register
//! `x = x_1 x_2 ... x_n` the basis index is `x_1 2^{n-1} + ... + x_n`. Every
//! other module inherits this ordering.
//!
//! Gates mutate in place. Elementwise kernels fan out over rayon once the
//! vector is large enough; every amplitude is still produced by exactly the
//! same floating point expression as in the sequential path, so results are
//! bit-identical. Reductions (norms, inner products, sampling) stay
//! sequential for the same reason.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Index of a computational basis state, most-significant-qubit first.
pub type BasisIndex = usize;

/// Below this many amplitudes the kernels run sequentially.
const PARALLEL_THRESHOLD: usize = 1 << 15;
/// Minimum amount of work handed to one rayon task.
const PARALLEL_GRAIN: usize = 1 << 12;

/// Largest register this crate will allocate (2^30 amplitudes = 16 GiB).
pub const MAX_QUBITS: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn new_basis_state(num_qubits: usize, index: BasisIndex) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// The uniform superposition `|s⟩ = H^{⊗n}|0…0⟩`.
    pub fn uniform(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            num_qubits,
            amplitudes: vec![amp; dim],
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two >= 2; the
    /// vector is taken as is, without normalization.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_qubit_count(num_qubits)?;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, index: BasisIndex) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn probability(&self, index: BasisIndex) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Bit weight of `qubit` inside a basis index.
    pub fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::SameQubit(a));
        }
        Ok(())
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(())
    }

    /// Hadamard on one qubit: `(a, b) -> ((a+b)/√2, (a-b)/√2)`.
    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = self.bit_mask(qubit);
        for_each_pair(&mut self.amplitudes, stride, |a, b| {
            let (x, y) = (*a, *b);
            *a = (x + y) * FRAC_1_SQRT_2;
            *b = (x - y) * FRAC_1_SQRT_2;
        });
        Ok(())
    }

    /// Hadamard on every qubit.
    pub fn apply_hadamard_all(&mut self) {
        for q in 0..self.num_qubits {
            self.apply_hadamard(q).expect("qubit in range");
        }
    }

    /// Multiplies every amplitude whose `control` and `target` bits are both
    /// set by `e^{i angle}`.
    pub fn apply_controlled_phase(&mut self, control: usize, target: usize, angle: f64) -> Result<()> {
        self.check_pair(control, target)?;
        let mask = self.bit_mask(control) | self.bit_mask(target);
        let phase = Complex64::from_polar(1.0, angle);
        for_each_indexed(&mut self.amplitudes, |i, a| {
            if i & mask == mask {
                *a *= phase;
            }
        });
        Ok(())
    }

    /// Negates the amplitude of every listed basis state. Indices are taken
    /// as a set: each must appear once.
    pub fn apply_phase_flip_set(&mut self, marked: &[BasisIndex]) -> Result<()> {
        let dim = self.dim();
        if let Some(&index) = marked.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        for &i in marked {
            self.amplitudes[i] = -self.amplitudes[i];
        }
        Ok(())
    }

    /// Negates every amplitude except the one at index 0.
    pub fn apply_phase_flip_nonzero(&mut self) {
        for_each_indexed(&mut self.amplitudes, |i, a| {
            if i != 0 {
                *a = -*a;
            }
        });
    }

    /// Exchanges qubits `a` and `b`.
    pub fn swap_qubits(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        let (ma, mb) = (self.bit_mask(a), self.bit_mask(b));
        for i in 0..self.dim() {
            if i & ma != 0 && i & mb == 0 {
                self.amplitudes.swap(i, i ^ ma ^ mb);
            }
        }
        Ok(())
    }

    /// Multiplies each amplitude by a real factor depending on its index.
    /// Used for diagonal, possibly non-unitary, filters.
    pub fn scale_by<F>(&mut self, factor: F)
    where
        F: Fn(BasisIndex) -> f64 + Sync,
    {
        for_each_indexed(&mut self.amplitudes, |i, a| *a *= factor(i));
    }

    /// Rescales to unit norm and returns the squared norm before rescaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm_sqr = self.norm_sqr();
        if norm_sqr < POST_SELECTION_FLOOR {
            return Err(Error::PostSelectionImpossible {
                probability: norm_sqr,
            });
        }
        let scale = 1.0 / norm_sqr.sqrt();
        for_each_indexed(&mut self.amplitudes, |_, a| *a *= scale);
        Ok(norm_sqr)
    }

    /// Projects onto the basis states selected by `keep`. Returns the branch
    /// probability and the renormalized conditional state.
    pub fn project<F>(&self, keep: F) -> Result<(f64, StateVector)>
    where
        F: Fn(BasisIndex) -> bool,
    {
        let mut kept = self.clone();
        for (i, a) in kept.amplitudes.iter_mut().enumerate() {
            if !keep(i) {
                *a = ZERO;
            }
        }
        let probability = kept.normalize()?;
        Ok((probability, kept))
    }

    /// `⟨self|other⟩ = Σ conj(self_i) other_i`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Draws one computational-basis outcome with a ChaCha8 stream seeded
    /// from `rng_seed`.
    pub fn measure_sample(&self, rng_seed: u64) -> BasisIndex {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        self.sample_with(&mut rng)
    }

    /// Draws one outcome from `|a_i|²` by inverse-CDF on a single uniform.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> BasisIndex {
        let u: f64 = rng.gen::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                acc += p;
                last_nonzero = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_nonzero
    }
}

/// Branch probabilities below this are treated as impossible post-selections.
pub const POST_SELECTION_FLOOR: f64 = 1e-15;

fn check_qubit_count(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Domain(format!(
            "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Applies `f` to every amplitude pair `(i, i + stride)` with bit `stride`
/// clear in `i`.
fn for_each_pair<F>(amps: &mut [Complex64], stride: usize, f: F)
where
    F: Fn(&mut Complex64, &mut Complex64) + Sync + Send,
{
    let block = stride * 2;
    if amps.len() < PARALLEL_THRESHOLD {
        for chunk in amps.chunks_mut(block) {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.iter_mut().zip(hi).for_each(|(a, b)| f(a, b));
        }
    } else if stride >= PARALLEL_GRAIN {
        amps.par_chunks_mut(block).for_each(|chunk| {
            let (lo, hi) = chunk.split_at_mut(stride);
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .with_min_len(PARALLEL_GRAIN)
                .for_each(|(a, b)| f(a, b));
        });
    } else {
        amps.par_chunks_mut(block)
            .with_min_len(PARALLEL_GRAIN / block)
            .for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(stride);
                lo.iter_mut().zip(hi).for_each(|(a, b)| f(a, b));
            });
    }
}

fn for_each_indexed<F>(amps: &mut [Complex64], f: F)
where
    F: Fn(usize, &mut Complex64) + Sync + Send,
{
    if amps.len() < PARALLEL_THRESHOLD {
        amps.iter_mut().enumerate().for_each(|(i, a)| f(i, a));
    } else {
        amps.par_iter_mut()
            .enumerate()
            .with_min_len(PARALLEL_GRAIN)
            .for_each(|(i, a)| f(i, a));
    }
}
