//! Two-state discrimination: Helstrom bound, the optimal projective
//! measurement from the sign of `Λ = p_A ρ_A - p_B ρ_B`, naive single
//! projector baselines, and the algorithm-versus-bound report.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::image::BinaryImage;
use crate::pipeline::{Label, SweepTable};
use crate::state::StateVector;

const PRIOR_TOLERANCE: f64 = 1e-12;

/// Below this norm of the component of `B` orthogonal to `A` the two states
/// are treated as identical up to phase.
const DEGENERATE_TOLERANCE: f64 = 1e-12;

fn check_priors(p_a: f64, p_b: f64) -> Result<()> {
    for p in [p_a, p_b] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
    }
    if (p_a + p_b - 1.0).abs() > PRIOR_TOLERANCE {
        return Err(Error::Domain(format!("priors {p_a} and {p_b} do not sum to 1")));
    }
    Ok(())
}

/// `⟨A|B⟩` of the point states: `|A ∩ B| / √(M_A M_B)`.
pub fn overlap_amplitude(image_a: &BinaryImage, image_b: &BinaryImage) -> Result<f64> {
    image_a.same_shape(image_b)?;
    let (m_a, m_b) = (image_a.point_count(), image_b.point_count());
    if m_a == 0 || m_b == 0 {
        return Err(Error::NoPoints);
    }
    let common = image_a
        .points()
        .into_iter()
        .filter(|&(x, y)| image_b.get(x, y))
        .count();
    Ok(common as f64 / (m_a as f64 * m_b as f64).sqrt())
}

/// `½ (1 - √(1 - 4 p_A p_B |⟨A|B⟩|²))`.
pub fn helstrom_error(p_a: f64, p_b: f64, overlap: f64) -> Result<f64> {
    check_priors(p_a, p_b)?;
    if !overlap.is_finite() || overlap < 0.0 {
        return Err(Error::Domain(format!("overlap {overlap} is not a non-negative magnitude")));
    }
    let radicand = 1.0 - 4.0 * p_a * p_b * overlap * overlap;
    if radicand < -1e-12 {
        return Err(Error::Domain(format!("Helstrom radicand {radicand} is negative")));
    }
    Ok(0.5 * (1.0 - radicand.max(0.0).sqrt()))
}

/// Minimum error of a measurement guessing between pure states `a` and `b`.
///
/// Builds `Λ` in the orthonormal basis `{|A⟩, |B⊥⟩}` of the span, takes the
/// projector onto its positive eigenvector as the "A" outcome and evaluates
/// the resulting error directly. Returns `min(p_A, p_B)` when the states
/// coincide up to phase.
pub fn optimal_two_state_error(a: &StateVector, b: &StateVector, p_a: f64, p_b: f64) -> Result<f64> {
    check_priors(p_a, p_b)?;
    // Coordinates of B in the Gram–Schmidt basis: B = c |A⟩ + s |B⊥⟩.
    let c = a.inner_product(b)?;
    let s = (b.norm_sqr() - c.norm_sqr()).max(0.0).sqrt();
    if s < DEGENERATE_TOLERANCE {
        return Ok(p_a.min(p_b));
    }
    let s = Complex64::new(s, 0.0);

    // Λ = p_A |A⟩⟨A| - p_B |B⟩⟨B| restricted to the span.
    let l11 = p_a - p_b * c.norm_sqr();
    let l22 = -p_b * s.norm_sqr();
    let l12 = -p_b * c * s.conj();
    let mean = 0.5 * (l11 + l22);
    let radius = (0.25 * (l11 - l22).powi(2) + l12.norm_sqr()).sqrt();
    let lambda_plus = mean + radius;
    if lambda_plus <= 0.0 {
        // No positive part: always answer B.
        return Ok(p_a);
    }
    let (v1, v2) = if l12.norm() > 0.0 {
        let v = [l12, Complex64::new(lambda_plus - l11, 0.0)];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        (v[0] / n, v[1] / n)
    } else if l11 >= l22 {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    };
    // ⟨v|A⟩ = conj(v1); ⟨v|B⟩ = conj(v1) c + conj(v2) s.
    let va = v1.conj().norm_sqr();
    let vb = (v1.conj() * c + v2.conj() * s).norm_sqr();
    Ok(p_a * (1.0 - va) + p_b * vb)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projector {
    A,
    B,
}

/// Error of measuring only `|A⟩⟨A|` (or `|B⟩⟨B|`) and answering that state
/// exactly when the outcome is 1.
///
/// Inputs are given as fidelities `|⟨ideal|input⟩|²` with the projected
/// state: `f_a` for the A input, `f_b` for the B input.
pub fn naive_projector_error_from_fidelities(
    p_a: f64,
    p_b: f64,
    projector: Projector,
    f_a: f64,
    f_b: f64,
) -> Result<f64> {
    check_priors(p_a, p_b)?;
    Ok(match projector {
        Projector::A => p_a * (1.0 - f_a) + p_b * f_b,
        Projector::B => p_b * (1.0 - f_b) + p_a * f_a,
    })
}

/// Naive projector error for explicit (possibly perturbed) input states.
pub fn naive_projector_error(
    ideal_a: &StateVector,
    ideal_b: &StateVector,
    input_a: &StateVector,
    input_b: &StateVector,
    p_a: f64,
    p_b: f64,
    projector: Projector,
) -> Result<f64> {
    let ideal = match projector {
        Projector::A => ideal_a,
        Projector::B => ideal_b,
    };
    let f_a = ideal.inner_product(input_a)?.norm_sqr();
    let f_b = ideal.inner_product(input_b)?.norm_sqr();
    naive_projector_error_from_fidelities(p_a, p_b, projector, f_a, f_b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminationReport {
    pub noise_level: f64,
    pub filtered: bool,
    pub p_a: f64,
    pub p_b: f64,
    /// Helstrom bound of the unperturbed template states.
    pub helstrom_bound: f64,
    /// Single-shot error when template A is tested and acceptance means "A".
    pub algorithm_error: f64,
    pub naive_projector_error_a: f64,
    pub naive_projector_error_b: f64,
    /// Error of the two-stage test: only outright wrong acceptances count.
    pub extended_error: f64,
    pub p_inconclusive: f64,
}

/// One report per `(filter setting, noise level)` of `sweep`.
///
/// The algorithm always tests template A first. With `acc(X|A)` the mean
/// acceptance of image `X` against template A and `inc(X|A)` the mean
/// probability that both templates are rejected:
///
/// * `algorithm_error = p_A (1 - acc(A|A)) + p_B acc(B|A)`
/// * `extended_error  = p_A (1 - acc(A|A) - inc(A|A)) + p_B acc(B|A)`
/// * `p_inconclusive  = p_A inc(A|A) + p_B inc(B|A)`
pub fn build_report(sweep: &SweepTable, p_a: f64, p_b: f64) -> Result<Vec<DiscriminationReport>> {
    check_priors(p_a, p_b)?;
    let helstrom_bound = helstrom_error(p_a, p_b, sweep.template_overlap.min(1.0))?;
    let mut out = Vec::new();
    for filtered in sweep.filter_settings() {
        for noise_level in sweep.noise_levels() {
            let row = |image: Label| {
                sweep
                    .row(noise_level, image, Label::A, filtered)
                    .ok_or_else(|| {
                        Error::Domain(format!(
                            "sweep lacks image {} against template A at noise {noise_level} (filtered={filtered})",
                            image.as_str()
                        ))
                    })
            };
            let fidelity = |image: Label| {
                sweep.fidelity(noise_level, image).ok_or_else(|| {
                    Error::Domain(format!(
                        "sweep lacks fidelities for image {} at noise {noise_level}",
                        image.as_str()
                    ))
                })
            };
            let (aa, ba) = (row(Label::A)?, row(Label::B)?);
            if sweep.row(noise_level, Label::A, Label::B, filtered).is_none()
                || sweep.row(noise_level, Label::B, Label::B, filtered).is_none()
            {
                return Err(Error::Domain(format!(
                    "sweep lacks template B rows at noise {noise_level} (filtered={filtered})"
                )));
            }
            let (fa, fb) = (fidelity(Label::A)?, fidelity(Label::B)?);
            let wrong_second_a = (1.0 - aa.p_accept_mean - aa.inconclusive_mean).max(0.0);
            out.push(DiscriminationReport {
                noise_level,
                filtered,
                p_a,
                p_b,
                helstrom_bound,
                algorithm_error: p_a * (1.0 - aa.p_accept_mean) + p_b * ba.p_accept_mean,
                naive_projector_error_a: naive_projector_error_from_fidelities(
                    p_a,
                    p_b,
                    Projector::A,
                    fa.fidelity_a,
                    fb.fidelity_a,
                )?,
                naive_projector_error_b: naive_projector_error_from_fidelities(
                    p_a,
                    p_b,
                    Projector::B,
                    fa.fidelity_b,
                    fb.fidelity_b,
                )?,
                extended_error: p_a * wrong_second_a + p_b * ba.p_accept_mean,
                p_inconclusive: p_a * aa.inconclusive_mean + p_b * ba.inconclusive_mean,
            });
        }
    }
    Ok(out)
}
