//! Quantum subroutines of the recognition algorithm, expressed as in-place
//! statevector transformations.
//!
//! The two ancilla qubits (photon reflected, filter passed) are never stored.
//! Their measurements are folded in as analytic post-selection: each step
//! returns the success probability together with the renormalized
//! conditional state.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::image::BinaryImage;
use crate::state::{BasisIndex, StateVector, POST_SELECTION_FLOOR};

/// Point state of `image`: amplitude `1/√M` on every point, zero elsewhere.
///
/// Returns `(p_reflect, state)` where `p_reflect = M / (N_x N_y)` is the
/// probability that the probe photon is reflected.
pub fn prepare_point_state(image: &BinaryImage) -> Result<(f64, StateVector)> {
    let points = image.point_indices();
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    let m = points.len();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); image.pixel_count()];
    let amp = Complex64::new(1.0 / (m as f64).sqrt(), 0.0);
    for i in points {
        amplitudes[i] = amp;
    }
    let state = StateVector::from_amplitudes(amplitudes)?;
    Ok((m as f64 / image.pixel_count() as f64, state))
}

/// Same preparation done the long way: Hadamards on `|0…0⟩`, then
/// post-selection on the characteristic function. Agrees with
/// [`prepare_point_state`] up to rounding.
pub fn prepare_point_state_by_projection(image: &BinaryImage) -> Result<(f64, StateVector)> {
    let mut s = StateVector::new_basis_state(image.num_qubits(), 0)?;
    s.apply_hadamard_all();
    s.project(|i| image.is_point_at(i)).map_err(|e| match e {
        Error::PostSelectionImpossible { .. } => Error::NoPoints,
        other => other,
    })
}

fn check_register(state: &StateVector, register: &Range<usize>) -> Result<()> {
    if register.is_empty() {
        return Err(Error::Domain("empty qubit register".into()));
    }
    if register.end > state.num_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: register.end - 1,
            num_qubits: state.num_qubits(),
        });
    }
    Ok(())
}

/// Quantum Fourier transform on a contiguous register,
/// `|x⟩ -> N^{-1/2} Σ_k e^{2πixk/N}|k⟩`, built from Hadamards, controlled
/// phases and a final bit reversal.
pub fn qft(state: &mut StateVector, register: Range<usize>) -> Result<()> {
    check_register(state, &register)?;
    let qubits: Vec<usize> = register.collect();
    let n = qubits.len();
    for j in 0..n {
        state.apply_hadamard(qubits[j])?;
        for k in j + 1..n {
            let angle = 2.0 * PI / (1u64 << (k - j + 1)) as f64;
            state.apply_controlled_phase(qubits[k], qubits[j], angle)?;
        }
    }
    for j in 0..n / 2 {
        state.swap_qubits(qubits[j], qubits[n - 1 - j])?;
    }
    Ok(())
}

/// Exact inverse of [`qft`]: the same gates reversed with negated phases.
pub fn iqft(state: &mut StateVector, register: Range<usize>) -> Result<()> {
    check_register(state, &register)?;
    let qubits: Vec<usize> = register.collect();
    let n = qubits.len();
    for j in 0..n / 2 {
        state.swap_qubits(qubits[j], qubits[n - 1 - j])?;
    }
    for j in (0..n).rev() {
        for k in (j + 1..n).rev() {
            let angle = -2.0 * PI / (1u64 << (k - j + 1)) as f64;
            state.apply_controlled_phase(qubits[k], qubits[j], angle)?;
        }
        state.apply_hadamard(qubits[j])?;
    }
    Ok(())
}

fn check_split(state: &StateVector, n_x: usize, n_y: usize) -> Result<()> {
    if n_x == 0 || n_y == 0 || state.num_qubits() != n_x + n_y {
        return Err(Error::DimensionMismatch {
            expected: n_x + n_y,
            found: state.num_qubits(),
        });
    }
    Ok(())
}

/// Independent QFTs on the x-register (qubits `0..n_x`) and the y-register.
pub fn qft_2d(state: &mut StateVector, n_x: usize, n_y: usize) -> Result<()> {
    check_split(state, n_x, n_y)?;
    qft(state, 0..n_x)?;
    qft(state, n_x..n_x + n_y)
}

pub fn iqft_2d(state: &mut StateVector, n_x: usize, n_y: usize) -> Result<()> {
    check_split(state, n_x, n_y)?;
    iqft(state, 0..n_x)?;
    iqft(state, n_x..n_x + n_y)
}

/// How a register value `k ∈ [0, N)` is read as a spatial frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Aliasing {
    /// `k` for `k <= N/2`, otherwise `k - N`, as in a classical FFT layout.
    #[default]
    Signed,
    /// The raw register value.
    Unsigned,
}

/// Signed (or raw) frequency of register value `k` in a register of size `n`.
pub fn signed_frequency(k: usize, n: usize, aliasing: Aliasing) -> f64 {
    match aliasing {
        Aliasing::Signed if k > n / 2 => k as f64 - n as f64,
        _ => k as f64,
    }
}

/// Shape of the filter angle `ϑ(k_x, k_y)`.
#[derive(Clone)]
pub enum FilterProfile {
    /// `ϑ = 0` inside the cutoff disc, `π/2` outside.
    SharpCutoff,
    /// The same angle for every frequency.
    Constant(f64),
    /// Arbitrary angle of the (aliased) frequency pair, in `[0, π/2]`.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for FilterProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SharpCutoff => f.write_str("SharpCutoff"),
            Self::Constant(t) => f.debug_tuple("Constant").field(t).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Noise-filter configuration. Each k-space amplitude is multiplied by
/// `cos ϑ(k_x, k_y)`.
#[derive(Clone, Debug)]
pub struct FilterSpec {
    pub profile: FilterProfile,
    /// Cutoff radius in cycles per image.
    pub k_max: f64,
    /// Also drop the `k_x = k_y = 0` component.
    pub remove_dc: bool,
    pub aliasing: Aliasing,
}

impl FilterSpec {
    /// Sharp low-pass at `k_max` with DC removal and signed aliasing.
    pub fn sharp_cutoff(k_max: f64) -> Self {
        Self {
            profile: FilterProfile::SharpCutoff,
            k_max,
            remove_dc: true,
            aliasing: Aliasing::Signed,
        }
    }

    pub fn constant(theta: f64) -> Self {
        Self {
            profile: FilterProfile::Constant(theta),
            k_max: f64::INFINITY,
            remove_dc: false,
            aliasing: Aliasing::Signed,
        }
    }

    pub fn keep_dc(mut self, keep: bool) -> Self {
        self.remove_dc = !keep;
        self
    }

    pub fn with_aliasing(mut self, aliasing: Aliasing) -> Self {
        self.aliasing = aliasing;
        self
    }

    /// `ϑ` for the register values `(k_x, k_y)` of an `size_x × size_y` grid.
    pub fn theta(&self, k_x: usize, k_y: usize, size_x: usize, size_y: usize) -> f64 {
        let fx = signed_frequency(k_x, size_x, self.aliasing);
        let fy = signed_frequency(k_y, size_y, self.aliasing);
        match &self.profile {
            FilterProfile::SharpCutoff => sharp_cutoff_theta(self)(fx, fy),
            FilterProfile::Constant(t) => *t,
            FilterProfile::Custom(f) => f(fx, fy),
        }
    }
}

/// The sharp cutoff as a function of signed frequencies: `0` when
/// `0 < ρ < k_max` (or `ρ = 0` with DC kept), `π/2` otherwise.
pub fn sharp_cutoff_theta(spec: &FilterSpec) -> impl Fn(f64, f64) -> f64 {
    let (k_max, remove_dc) = (spec.k_max, spec.remove_dc);
    move |fx, fy| {
        let rho = fx.hypot(fy);
        let inside = rho < k_max && (rho > 0.0 || !remove_dc);
        if inside {
            0.0
        } else {
            FRAC_PI_2
        }
    }
}

/// `cos ϑ`, exact at the two endpoints so sharp cutoffs are true projections.
fn pass_amplitude(theta: f64) -> f64 {
    if theta == 0.0 {
        1.0
    } else if theta == FRAC_PI_2 {
        0.0
    } else {
        theta.cos()
    }
}

/// Applies the filter operator to a k-space state and post-selects the
/// ancilla on `|1⟩`. Returns `(p_pass, filtered)`.
pub fn noise_filter(
    state: &StateVector,
    spec: &FilterSpec,
    n_x: usize,
    n_y: usize,
) -> Result<(f64, StateVector)> {
    check_split(state, n_x, n_y)?;
    let (size_x, size_y) = (1usize << n_x, 1usize << n_y);
    // Tabulate once; the closure runs per amplitude.
    let table: Vec<f64> = (0..size_x * size_y)
        .map(|i| pass_amplitude(spec.theta(i / size_y, i % size_y, size_x, size_y)))
        .collect();
    let mut filtered = state.clone();
    filtered.scale_by(|i| table[i]);
    let p_pass = filtered.norm_sqr();
    if p_pass < POST_SELECTION_FLOOR {
        return Err(Error::PostSelectionImpossible {
            probability: p_pass,
        });
    }
    filtered.normalize()?;
    Ok((p_pass, filtered))
}

/// Phase oracle marking the points of a template.
#[derive(Clone, Debug, PartialEq)]
pub struct GroverOracle {
    num_qubits: usize,
    marked: Vec<BasisIndex>,
}

impl GroverOracle {
    pub fn marked(&self) -> &[BasisIndex] {
        &self.marked
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: state.num_qubits(),
            });
        }
        state.apply_phase_flip_set(&self.marked)
    }
}

/// Oracle flipping the sign of every template point.
pub fn grover_oracle(template: &BinaryImage) -> Result<GroverOracle> {
    let marked = template.point_indices();
    if marked.is_empty() {
        return Err(Error::NoPoints);
    }
    Ok(GroverOracle {
        num_qubits: template.num_qubits(),
        marked,
    })
}

/// Reflection about the uniform state, `2|s⟩⟨s| - 1`, as
/// `H^{⊗n} · (-1 on every state but |0⟩) · H^{⊗n}`.
pub fn diffusion(state: &mut StateVector) {
    state.apply_hadamard_all();
    state.apply_phase_flip_nonzero();
    state.apply_hadamard_all();
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Oracle, then diffusion: rotates `|s⟩` towards the marked states.
    Forward,
    /// Diffusion, then oracle: the exact inverse of `Forward`.
    Inverse,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Self::Forward => Self::Inverse,
            Self::Inverse => Self::Forward,
        }
    }
}

/// One Grover iteration with respect to `oracle`.
pub fn grover_step(state: &mut StateVector, oracle: &GroverOracle, direction: Direction) -> Result<()> {
    match direction {
        Direction::Forward => {
            oracle.apply(state)?;
            diffusion(state);
        }
        Direction::Inverse => {
            diffusion(state);
            oracle.apply(state)?;
        }
    }
    Ok(())
}

/// `R = ⌈(π/4) √(N_total / M_tp)⌉`.
pub fn iteration_count(n_total: usize, m_tp: usize) -> Result<usize> {
    if m_tp == 0 {
        return Err(Error::NoPoints);
    }
    if m_tp > n_total {
        return Err(Error::Domain(format!(
            "template has {m_tp} points but only {n_total} pixels"
        )));
    }
    Ok((PI / 4.0 * (n_total as f64 / m_tp as f64).sqrt()).ceil() as usize)
}
