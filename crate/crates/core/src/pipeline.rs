//! End-to-end recognition runs, the second-hypothesis extension and noise
//! sweeps.
//!
//! A run prepares the point state of the image, optionally low-pass filters
//! it in k-space, rotates it with `R` Grover iterations of the template,
//! applies Hadamards everywhere and asks whether the register is `|0…0⟩`.
//! All probabilities are exact; the sampled mode additionally draws the
//! outcome a single photon would produce.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{
    grover_oracle, grover_step, iqft_2d, iteration_count, noise_filter, prepare_point_state, qft_2d,
    Direction, FilterSpec, GroverOracle,
};
use crate::error::{Error, Result};
use crate::image::{invert_pixels, BinaryImage};
use crate::state::{StateVector, POST_SELECTION_FLOOR};

/// Direction of the template rotation that takes the image state back onto
/// the uniform axis.
///
/// With `R = ⌈(π/4)√(N/M)⌉` the forward iteration lands within half a
/// rotation step of `±|s⟩`, while the reverse rotation can overshoot by up to
/// one and a half steps (for `M = N/4` it ends at overlap 1/4 instead of 1).
pub const RECOGNITION_DIRECTION: Direction = Direction::Forward;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Exact,
    /// Also draw the single-photon outcome from a ChaCha8 stream.
    Sampled { seed: u64 },
}

#[derive(Clone, Debug, Default)]
pub struct MatchOptions {
    /// `None` skips the Fourier filter entirely.
    pub filter: Option<FilterSpec>,
    pub mode: Mode,
}

impl MatchOptions {
    pub fn unfiltered() -> Self {
        Self::default()
    }

    pub fn filtered(spec: FilterSpec) -> Self {
        Self {
            filter: Some(spec),
            mode: Mode::Exact,
        }
    }
}

/// What a single photon run reports in sampled mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampledResult {
    /// First ancilla read `|0⟩`.
    Absorbed,
    /// Second ancilla read `|0⟩`.
    FilterRejected,
    Accepted,
    Rejected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sample {
    pub result: SampledResult,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct MatchOutcome {
    /// Probability that the probe photon is reflected.
    pub p_reflect: f64,
    /// Probability that the filter ancilla reads `|1⟩`; 1 without filter.
    pub p_filter: f64,
    /// Probability, given both ancillas succeeded, that every data qubit
    /// reads zero.
    pub p_accept: f64,
    /// Grover iterations applied.
    pub iterations: usize,
    /// State just before the final measurement.
    pub final_state: StateVector,
    /// Conditional state after a rejection; `None` if rejection is impossible.
    pub post_reject_state: Option<StateVector>,
    pub sample: Option<Sample>,
}

impl MatchOutcome {
    /// Rejection probability, summed directly over the nonzero indices.
    pub fn p_reject(&self) -> f64 {
        self.final_state.amplitudes()[1..]
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Unconditional leaf probabilities `[absorbed, filter rejected,
    /// accepted, rejected]`; they sum to one.
    pub fn branch_probabilities(&self) -> [f64; 4] {
        let survived = self.p_reflect * self.p_filter;
        [
            1.0 - self.p_reflect,
            self.p_reflect * (1.0 - self.p_filter),
            survived * self.p_accept,
            survived * self.p_reject(),
        ]
    }
}

fn check_shapes(image: &BinaryImage, template: &BinaryImage) -> Result<()> {
    if image.width() != template.width() || image.height() != template.height() {
        return Err(Error::DimensionMismatch {
            expected: template.pixel_count(),
            found: image.pixel_count(),
        });
    }
    Ok(())
}

fn rotate(state: &mut StateVector, oracle: &GroverOracle, direction: Direction, steps: usize) -> Result<()> {
    for _ in 0..steps {
        grover_step(state, oracle, direction)?;
    }
    Ok(())
}

/// Prepares, optionally filters, and returns `(p_reflect, p_filter, state)`
/// in position space, ready for the Grover rotation.
pub fn prepare_filtered_state(
    image: &BinaryImage,
    filter: Option<&FilterSpec>,
) -> Result<(f64, f64, StateVector)> {
    let (p_reflect, mut state) = prepare_point_state(image)?;
    let Some(spec) = filter else {
        return Ok((p_reflect, 1.0, state));
    };
    let (n_x, n_y) = (image.n_x(), image.n_y());
    qft_2d(&mut state, n_x, n_y)?;
    let (p_filter, mut filtered) = noise_filter(&state, spec, n_x, n_y)?;
    iqft_2d(&mut filtered, n_x, n_y)?;
    Ok((p_reflect, p_filter, filtered))
}

/// Decides whether `image` matches `template`.
pub fn run_match(image: &BinaryImage, template: &BinaryImage, options: &MatchOptions) -> Result<MatchOutcome> {
    check_shapes(image, template)?;
    let oracle = grover_oracle(template)?;
    let iterations = iteration_count(template.pixel_count(), template.point_count())?;

    let (p_reflect, p_filter, mut state) = prepare_filtered_state(image, options.filter.as_ref())?;
    rotate(&mut state, &oracle, RECOGNITION_DIRECTION, iterations)?;
    state.apply_hadamard_all();

    let p_accept = state.probability(0) / state.norm_sqr();
    let post_reject_state = match state.project(|i| i != 0) {
        Ok((_, s)) => Some(s),
        Err(Error::PostSelectionImpossible { .. }) => None,
        Err(e) => return Err(e),
    };

    let sample = match options.mode {
        Mode::Exact => None,
        Mode::Sampled { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let result = if rng.gen::<f64>() >= p_reflect {
                SampledResult::Absorbed
            } else if rng.gen::<f64>() >= p_filter {
                SampledResult::FilterRejected
            } else if state.sample_with(&mut rng) == 0 {
                SampledResult::Accepted
            } else {
                SampledResult::Rejected
            };
            Some(Sample { result, seed })
        }
    };

    Ok(MatchOutcome {
        p_reflect,
        p_filter,
        p_accept,
        iterations,
        final_state: state,
        post_reject_state,
        sample,
    })
}

/// `|Σ f f'|² / (M M')`: the acceptance probability a perfect rotation
/// would give.
pub fn overlap_probability(image: &BinaryImage, template: &BinaryImage) -> Result<f64> {
    check_shapes(image, template)?;
    let (m_im, m_tp) = (image.point_count(), template.point_count());
    if m_im == 0 || m_tp == 0 {
        return Err(Error::NoPoints);
    }
    let common = image
        .points()
        .into_iter()
        .filter(|&(x, y)| template.get(x, y))
        .count();
    Ok((common * common) as f64 / (m_im as f64 * m_tp as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    AcceptedFirst,
    AcceptedSecond,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct SecondTryOutcome {
    /// Acceptance probability of the second template, given the first was
    /// rejected.
    pub p_accept_second: f64,
    /// Unconditional probabilities of the three outcomes (given both
    /// ancillas succeeded); they sum to one.
    pub p_accepted_first: f64,
    pub p_accepted_second: f64,
    pub p_inconclusive: f64,
    pub final_state: StateVector,
    /// Drawn outcome when the first run was sampled and the photon survived.
    pub classification: Option<Classification>,
}

/// After rejecting `template_a`, undoes its rotation and tests `template_b`
/// on the same photon.
pub fn run_second_hypothesis(
    outcome: &MatchOutcome,
    template_a: &BinaryImage,
    template_b: &BinaryImage,
) -> Result<SecondTryOutcome> {
    let Some(rejected) = &outcome.post_reject_state else {
        return Err(Error::Domain(
            "first hypothesis cannot be rejected: rejection branch has zero probability".into(),
        ));
    };
    check_shapes(template_a, template_b)?;
    if rejected.num_qubits() != template_a.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: template_a.num_qubits(),
            found: rejected.num_qubits(),
        });
    }
    let oracle_a = grover_oracle(template_a)?;
    let oracle_b = grover_oracle(template_b)?;
    let r_a = iteration_count(template_a.pixel_count(), template_a.point_count())?;
    let r_b = iteration_count(template_b.pixel_count(), template_b.point_count())?;

    let mut state = rejected.clone();
    state.apply_hadamard_all();
    rotate(&mut state, &oracle_a, RECOGNITION_DIRECTION.reversed(), r_a)?;
    rotate(&mut state, &oracle_b, RECOGNITION_DIRECTION, r_b)?;
    state.apply_hadamard_all();

    let p_accept_second = state.probability(0) / state.norm_sqr();
    let p_reject_first = 1.0 - outcome.p_accept;

    let classification = match outcome.sample.map(|s| (s.result, s.seed)) {
        Some((SampledResult::Accepted, _)) => Some(Classification::AcceptedFirst),
        Some((SampledResult::Rejected, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            Some(if state.sample_with(&mut rng) == 0 {
                Classification::AcceptedSecond
            } else {
                Classification::Inconclusive
            })
        }
        _ => None,
    };

    Ok(SecondTryOutcome {
        p_accept_second,
        p_accepted_first: outcome.p_accept,
        p_accepted_second: p_reject_first * p_accept_second,
        p_inconclusive: p_reject_first * (1.0 - p_accept_second),
        final_state: state,
        classification,
    })
}

/// Which of the two letters an image or template is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::A, Label::B];

    pub fn other(self) -> Self {
        match self {
            Self::A => Self::B,
            Self::B => Self::A,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
        }
    }
}

/// Borrowed A/B pair.
#[derive(Clone, Copy, Debug)]
pub struct Pair<'a> {
    pub a: &'a BinaryImage,
    pub b: &'a BinaryImage,
}

impl<'a> Pair<'a> {
    pub fn new(a: &'a BinaryImage, b: &'a BinaryImage) -> Self {
        Self { a, b }
    }

    pub fn get(&self, label: Label) -> &'a BinaryImage {
        match label {
            Label::A => self.a,
            Label::B => self.b,
        }
    }
}

/// One `(noise level, image, template, filtered)` cell of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub noise_level: f64,
    pub image: Label,
    pub template: Label,
    pub filtered: bool,
    pub p_accept_mean: f64,
    /// Standard error of the mean over trials (0 for a single trial).
    pub p_accept_stderr: f64,
    /// Acceptance of the other template after rejecting this one:
    /// `Σ (1-p) p₂ / Σ (1-p)` over trials, 0 when no rejection is possible.
    pub second_try_accept_mean: f64,
    /// Mean unconditional probability that neither template is accepted.
    pub inconclusive_mean: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Mean squared overlaps `|⟨template|noisy image⟩|²` of the prepared states.
#[derive(Clone, Debug, PartialEq)]
pub struct FidelityRow {
    pub noise_level: f64,
    pub image: Label,
    pub fidelity_a: f64,
    pub fidelity_b: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub fidelities: Vec<FidelityRow>,
    /// `⟨A|B⟩` of the unperturbed template states.
    pub template_overlap: f64,
}

impl SweepTable {
    pub fn row(&self, noise_level: f64, image: Label, template: Label, filtered: bool) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.noise_level == noise_level && r.image == image && r.template == template && r.filtered == filtered
        })
    }

    pub fn fidelity(&self, noise_level: f64, image: Label) -> Option<&FidelityRow> {
        self.fidelities
            .iter()
            .find(|r| r.noise_level == noise_level && r.image == image)
    }

    /// Appends another sweep's rows, e.g. filtered after unfiltered.
    pub fn extend(&mut self, other: SweepTable) {
        self.rows.extend(other.rows);
        for f in other.fidelities {
            if self.fidelity(f.noise_level, f.image).is_none() {
                self.fidelities.push(f);
            }
        }
        self.template_overlap = other.template_overlap;
    }

    /// Filter settings present, in order of first appearance.
    pub fn filter_settings(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.filtered) {
                out.push(r.filtered);
            }
        }
        out
    }

    pub fn noise_levels(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.noise_level) {
                out.push(r.noise_level);
            }
        }
        out
    }
}

/// Welford accumulator; exact zero variance for identical samples.
#[derive(Clone, Copy, Debug, Default)]
struct Running {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct CellResult {
    p_accept: f64,
    p_second: f64,
}

#[derive(Clone, Debug)]
struct TrialResult {
    // indexed [image][template]
    cells: [[CellResult; 2]; 2],
    // indexed [image][template]
    fidelity: [[f64; 2]; 2],
}

fn run_trial(
    images: Pair<'_>,
    templates: Pair<'_>,
    template_states: &[StateVector; 2],
    noise_level: f64,
    seed: u64,
    options: &MatchOptions,
) -> Result<TrialResult> {
    let mut cells = [[CellResult {
        p_accept: 0.0,
        p_second: 0.0,
    }; 2]; 2];
    let mut fidelity = [[0.0; 2]; 2];
    for (ii, image_label) in Label::BOTH.into_iter().enumerate() {
        let noisy = invert_pixels(images.get(image_label), noise_level, seed)?;
        let (_, input) = prepare_point_state(&noisy)?;
        for (ti, t) in template_states.iter().enumerate() {
            fidelity[ii][ti] = t.inner_product(&input)?.norm_sqr();
        }
        for (ti, template_label) in Label::BOTH.into_iter().enumerate() {
            let template = templates.get(template_label);
            let outcome = run_match(&noisy, template, options)?;
            let p_second = if 1.0 - outcome.p_accept < POST_SELECTION_FLOOR || outcome.post_reject_state.is_none() {
                0.0
            } else {
                run_second_hypothesis(&outcome, template, templates.get(template_label.other()))?.p_accept_second
            };
            cells[ii][ti] = CellResult {
                p_accept: outcome.p_accept,
                p_second,
            };
        }
    }
    Ok(TrialResult { cells, fidelity })
}

/// Averages exact acceptance probabilities over noisy realizations of both
/// images against both templates.
///
/// Trial `t` at every noise level inverts pixels with seed `base_seed + t`,
/// so both images share each noise mask. Cells run in parallel; the
/// reduction is sequential in trial order, so the table does not depend on
/// scheduling. The sweep always runs in exact mode.
pub fn sweep_noise(
    images: Pair<'_>,
    templates: Pair<'_>,
    noise_levels: &[f64],
    trials: usize,
    base_seed: u64,
    options: &MatchOptions,
) -> Result<SweepTable> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    for &p in noise_levels {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
    }
    check_shapes(images.a, templates.a)?;
    check_shapes(images.b, templates.a)?;
    check_shapes(templates.b, templates.a)?;
    let template_states = [prepare_point_state(templates.a)?.1, prepare_point_state(templates.b)?.1];
    let template_overlap = template_states[0].inner_product(&template_states[1])?.norm();
    let exact = MatchOptions {
        filter: options.filter.clone(),
        mode: Mode::Exact,
    };

    let jobs: Vec<(usize, usize)> = (0..noise_levels.len())
        .flat_map(|l| (0..trials).map(move |t| (l, t)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(l, t)| {
            run_trial(
                images,
                templates,
                &template_states,
                noise_levels[l],
                base_seed.wrapping_add(t as u64),
                &exact,
            )
        })
        .collect::<Result<_>>()?;

    let filtered = options.filter.is_some();
    let mut table = SweepTable {
        template_overlap,
        ..SweepTable::default()
    };
    for (l, &noise_level) in noise_levels.iter().enumerate() {
        let level = &results[l * trials..(l + 1) * trials];
        for (ii, image) in Label::BOTH.into_iter().enumerate() {
            for (ti, template) in Label::BOTH.into_iter().enumerate() {
                let mut accept = Running::default();
                let mut inconclusive = Running::default();
                let (mut rejected_mass, mut second_mass) = (0.0, 0.0);
                for trial in level {
                    let c = trial.cells[ii][ti];
                    accept.push(c.p_accept);
                    inconclusive.push((1.0 - c.p_accept) * (1.0 - c.p_second));
                    rejected_mass += 1.0 - c.p_accept;
                    second_mass += (1.0 - c.p_accept) * c.p_second;
                }
                table.rows.push(SweepRow {
                    noise_level,
                    image,
                    template,
                    filtered,
                    p_accept_mean: accept.mean,
                    p_accept_stderr: accept.stderr(),
                    second_try_accept_mean: if rejected_mass > 0.0 {
                        second_mass / rejected_mass
                    } else {
                        0.0
                    },
                    inconclusive_mean: inconclusive.mean,
                    trials,
                    seed: base_seed,
                });
            }
            let mut fa = Running::default();
            let mut fb = Running::default();
            for trial in level {
                fa.push(trial.fidelity[ii][0]);
                fb.push(trial.fidelity[ii][1]);
            }
            table.fidelities.push(FidelityRow {
                noise_level,
                image,
                fidelity_a: fa.mean,
                fidelity_b: fb.mean,
            });
        }
    }
    Ok(table)
}
