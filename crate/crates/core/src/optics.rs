//! Linear-optics layout of the QFT: the phase-shifter schedule obtained from
//! the product form of the transform, the composed single-photon transfer
//! matrix, and beamsplitter counts.
//!
//! A photon in one of `N = 2^n` paths encodes `|x⟩`. A layer of 50/50
//! beamsplitters pairing paths that differ in one bit acts as a Hadamard on
//! that qubit (the splitter picks up `-1` on the vertical pass), and phase
//! shifters on individual paths implement the controlled phases.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register for which dense transfer matrices are built.
pub const MAX_DENSE_QUBITS: usize = 6;

/// `exp(2πi k_ℓ x_j 2^{-m})` with `m ≥ 2`: a phase shifter of stage `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseEntry {
    /// Output bit `k_ℓ` the factor belongs to, `1..=n` (1 is the MSB).
    pub stage: usize,
    /// Inner index, `2..=stage`.
    pub inner: usize,
    /// `2π / 2^inner`, radians.
    pub phase: f64,
    /// Input bit `x_{n+m-ℓ}` that switches the factor on (1 is the MSB).
    pub x_bit: usize,
}

/// `(-1)^{k_ℓ x_{n-ℓ+1}}`: the `m = 1` factor, realized by the splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignTerm {
    pub stage: usize,
    pub x_bit: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSchedule {
    pub n: usize,
    pub entries: Vec<PhaseEntry>,
    pub sign_terms: Vec<SignTerm>,
}

fn bit(value: usize, position: usize, n: usize) -> usize {
    // position counts from 1 at the most significant of n bits
    (value >> (n - position)) & 1
}

/// Every factor of `e^{2πixk/N} = ∏_ℓ ∏_{m=1}^{ℓ} exp(2πi k_ℓ x_{n+m-ℓ} 2^{-m})`.
pub fn qft_phase_schedule(n: usize) -> Result<PhaseSchedule> {
    if n == 0 {
        return Err(Error::Domain("register needs at least one qubit".into()));
    }
    if n >= usize::BITS as usize {
        return Err(Error::Domain(format!("{n} qubits exceed the index width")));
    }
    let mut entries = Vec::new();
    let mut sign_terms = Vec::new();
    for stage in 1..=n {
        sign_terms.push(SignTerm {
            stage,
            x_bit: n - stage + 1,
        });
        for inner in 2..=stage {
            entries.push(PhaseEntry {
                stage,
                inner,
                phase: 2.0 * PI / (1u64 << inner) as f64,
                x_bit: n + inner - stage,
            });
        }
    }
    Ok(PhaseSchedule { n, entries, sign_terms })
}

impl PhaseSchedule {
    pub fn entries_for_stage(&self, stage: usize) -> impl Iterator<Item = &PhaseEntry> {
        self.entries.iter().filter(move |e| e.stage == stage)
    }

    /// Path phase of stage `stage` for input `x`: the sum of the shifters the
    /// photon passes through, reduced to `[0, 2π)`.
    pub fn path_phase(&self, stage: usize, x: usize) -> f64 {
        let total: f64 = self
            .entries_for_stage(stage)
            .filter(|e| bit(x, e.x_bit, self.n) == 1)
            .map(|e| e.phase)
            .sum();
        total.rem_euclid(2.0 * PI)
    }

    /// Distinct nonzero combined path phases over all stages, ascending.
    pub fn shifter_phases(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for stage in 1..=self.n {
            for x in 0..(1usize << self.n) {
                let phase = self.path_phase(stage, x);
                if phase > 1e-12 && !out.iter().any(|p| (p - phase).abs() < 1e-12) {
                    out.push(phase);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Product of every schedule factor for input `x` and output `k`.
    pub fn factor(&self, x: usize, k: usize) -> Complex64 {
        let n = self.n;
        let mut sign = 1.0;
        for t in &self.sign_terms {
            if bit(k, t.stage, n) & bit(x, t.x_bit, n) == 1 {
                sign = -sign;
            }
        }
        let phase: f64 = self
            .entries
            .iter()
            .filter(|e| bit(k, e.stage, n) & bit(x, e.x_bit, n) == 1)
            .map(|e| e.phase)
            .sum();
        Complex64::from_polar(sign, phase)
    }

    /// Plain-text table: one line per factor, phases in units of π.
    pub fn to_table(&self) -> String {
        let mut out = String::from("stage\tinner\tx_bit\tphase_over_pi\n");
        for stage in 1..=self.n {
            for t in self.sign_terms.iter().filter(|t| t.stage == stage) {
                let _ = writeln!(out, "{}\t1\t{}\t1", t.stage, t.x_bit);
            }
            for e in self.entries_for_stage(stage) {
                let _ = writeln!(out, "{}\t{}\t{}\t{}", e.stage, e.inner, e.x_bit, e.phase / PI);
            }
        }
        out
    }
}

/// Dense transfer matrix of the optical network and its component counts.
#[derive(Clone, Debug)]
pub struct OpticalNetwork {
    pub n: usize,
    pub matrix: DMatrix<Complex64>,
    pub beamsplitters: usize,
    pub phase_shifters: usize,
}

fn beamsplitter_layer(n: usize, qubit: usize) -> (DMatrix<Complex64>, usize) {
    let dim = 1usize << n;
    let mask = 1usize << (n - 1 - qubit);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut m = DMatrix::zeros(dim, dim);
    let mut count = 0;
    for i in (0..dim).filter(|i| i & mask == 0) {
        let j = i | mask;
        m[(i, i)] = h;
        m[(i, j)] = h;
        m[(j, i)] = h;
        // vertical traversal
        m[(j, j)] = -h;
        count += 1;
    }
    (m, count)
}

/// Bit-reversal of path labels; the mirrors that present inputs in the
/// order the network expects.
pub fn input_reordering(n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut p = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let r = i.reverse_bits() >> (usize::BITS as usize - n);
        p[(r, i)] = Complex64::new(1.0, 0.0);
    }
    p
}

/// Builds the network for an `n`-qubit register.
///
/// Stage `ℓ = n, …, 1` is a splitter layer followed by the stage's phase
/// shifters. The result `W` satisfies `W = H^{⊗n}` without shifters and
/// `W · P = QFT` with them, `P` being [`input_reordering`].
pub fn compose_optical_qft(n: usize, with_phases: bool) -> Result<OpticalNetwork> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Domain(format!(
            "dense optical verification limited to {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    let schedule = qft_phase_schedule(n)?;
    let dim = 1usize << n;
    // Built for the bit-reversed labelling; conjugated by P at the end.
    let mut network = DMatrix::<Complex64>::identity(dim, dim);
    let mut beamsplitters = 0;
    let mut phase_shifters = 0;
    for stage in (1..=n).rev() {
        let target = n - stage;
        let (layer, count) = beamsplitter_layer(n, target);
        network = layer * network;
        beamsplitters += count;
        if with_phases && schedule.entries_for_stage(stage).next().is_some() {
            // After the splitter, qubit `target` carries k_ℓ; later qubits
            // still carry x bits.
            let mut diag = DMatrix::<Complex64>::identity(dim, dim);
            for i in 0..dim {
                if bit(i, target + 1, n) == 1 {
                    let phase = schedule.path_phase(stage, i);
                    if phase != 0.0 {
                        diag[(i, i)] = Complex64::from_polar(1.0, phase);
                        phase_shifters += 1;
                    }
                }
            }
            network = diag * network;
        }
    }
    let p = input_reordering(n);
    Ok(OpticalNetwork {
        n,
        matrix: &p * network * &p,
        beamsplitters,
        phase_shifters,
    })
}

/// `F[k][x] = e^{2πixk/N} / √N`.
pub fn exact_qft_matrix(n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let norm = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |k, x| {
        Complex64::from_polar(norm, 2.0 * PI * ((x * k) % dim) as f64 / dim as f64)
    })
}

pub fn hadamard_all_matrix(n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let norm = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(sign * norm, 0.0)
    })
}

/// Largest elementwise deviation of `a` from `b` once the best global phase
/// is removed.
pub fn deviation_up_to_global_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// Deviations of the composed network from the exact QFT (with the input
/// reordering) and from `H^{⊗n}` (without shifters).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpticsCheck {
    pub n: usize,
    pub qft_deviation: f64,
    pub hadamard_deviation: f64,
    pub unitarity_deviation: f64,
}

pub fn verify_optical_qft(n: usize) -> Result<OpticsCheck> {
    let with = compose_optical_qft(n, true)?;
    let without = compose_optical_qft(n, false)?;
    let dim = 1usize << n;
    let gram = with.matrix.adjoint() * &with.matrix;
    let identity = DMatrix::<Complex64>::identity(dim, dim);
    Ok(OpticsCheck {
        n,
        qft_deviation: deviation_up_to_global_phase(&(&with.matrix * input_reordering(n)), &exact_qft_matrix(n)),
        hadamard_deviation: deviation_up_to_global_phase(&without.matrix, &hadamard_all_matrix(n)),
        unitarity_deviation: (gram - identity).iter().map(|z| z.norm()).fold(0.0, f64::max),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResourceCounts {
    /// Splitters in the tree that spreads one photon over `2^n` paths.
    pub preparation_splitters: usize,
    /// Splitters in the QFT network.
    pub qft_splitters: usize,
}

pub fn resource_counts(n_preparation: usize, n_qft: usize) -> Result<ResourceCounts> {
    if n_preparation == 0 || n_qft == 0 {
        return Err(Error::Domain("qubit counts must be at least 1".into()));
    }
    if n_preparation >= usize::BITS as usize || n_qft >= usize::BITS as usize {
        return Err(Error::Domain("qubit count exceeds the index width".into()));
    }
    Ok(ResourceCounts {
        preparation_splitters: (1usize << n_preparation) - 1,
        qft_splitters: n_qft << (n_qft - 1),
    })
}

/// Runs a photon through a binary tree of 50/50 splitters with `n` levels.
/// Returns the number of splitters and the output amplitudes.
pub fn splitter_tree(n: usize) -> (usize, Vec<f64>) {
    let mut amplitudes = vec![1.0];
    let mut splitters = 0;
    for _ in 0..n {
        amplitudes = amplitudes
            .iter()
            .flat_map(|&a| {
                let half = a * std::f64::consts::FRAC_1_SQRT_2;
                [half, half]
            })
            .collect();
        splitters += amplitudes.len() / 2;
    }
    (splitters, amplitudes)
}
