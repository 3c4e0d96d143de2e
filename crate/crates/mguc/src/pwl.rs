//! Chord (secant) linearization of convex quadratics.
//!
//! The max over the chords of a convex function over-approximates it, with
//! equality at the breakpoints. Used to turn the quadratic fuel and emission
//! curves into epigraph cuts, so linearized costs and any emission cap are
//! conservative: a feasible linearized schedule never understates emissions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Chord count per quadratic curve per hour. Breakpoints are uniform over
/// the output range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PwlConfig {
    pub segments: usize,
}

impl PwlConfig {
    pub fn new(segments: usize) -> Result<Self, PwlError> {
        if segments == 0 {
            return Err(PwlError::NoSegments);
        }
        Ok(Self { segments })
    }
}

impl Default for PwlConfig {
    fn default() -> Self {
        Self { segments: 8 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PwlError {
    #[error("at least one chord segment is required")]
    NoSegments,
    #[error("curve is not convex: quadratic coefficient {0} is negative")]
    NotConvex(f64),
    #[error("empty interval: lower bound {lo} exceeds upper bound {hi}")]
    EmptyInterval { lo: f64, hi: f64 },
}

/// One linear cut `slope·p + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chord<T> {
    pub slope: T,
    pub intercept: T,
}

impl<T: Scalar> Chord<T> {
    pub fn at(&self, p: T) -> T {
        self.slope * p + self.intercept
    }
}

/// Secant cuts of `φ(p) = quad·p² + lin·p` over `[p_lo, p_hi]` with
/// `segments` uniform breakpoints.
///
/// For convex φ the pointwise max of the returned chords dominates φ on the
/// interval, matches it at every breakpoint, and overshoots by at most
/// `quad·Δ²/4` with `Δ = (p_hi − p_lo)/segments`.
pub fn chord_cuts<T: Scalar>(
    quad: T,
    lin: T,
    p_lo: T,
    p_hi: T,
    segments: usize,
) -> Result<Vec<Chord<T>>, PwlError> {
    if segments == 0 {
        return Err(PwlError::NoSegments);
    }
    if quad < T::zero() {
        return Err(PwlError::NotConvex(quad.to_f64_lossy()));
    }
    if p_lo > p_hi {
        return Err(PwlError::EmptyInterval {
            lo: p_lo.to_f64_lossy(),
            hi: p_hi.to_f64_lossy(),
        });
    }
    let k = T::from_usize(segments).expect("segment count fits in scalar");
    let width = (p_hi - p_lo) / k;
    let mut cuts = Vec::with_capacity(segments);
    for seg in 0..segments {
        let left = p_lo + width * T::from_usize(seg).unwrap();
        let right = if seg + 1 == segments {
            p_hi
        } else {
            p_lo + width * T::from_usize(seg + 1).unwrap()
        };
        // Chord through (left, φ(left)) and (right, φ(right)):
        // slope = quad·(left+right) + lin, intercept = −quad·left·right.
        cuts.push(Chord {
            slope: quad * (left + right) + lin,
            intercept: -quad * left * right,
        });
    }
    Ok(cuts)
}

/// Pointwise max of the cuts at `p` (the linearized curve value).
pub fn pwl_value<T: Scalar>(cuts: &[Chord<T>], p: T) -> T {
    cuts.iter()
        .map(|c| c.at(p))
        .fold(T::neg_infinity(), T::max)
}

/// Worst-case over-approximation error of one uniform chord segment.
pub fn max_chord_error<T: Scalar>(quad: T, p_lo: T, p_hi: T, segments: usize) -> T {
    let k = T::from_usize(segments).expect("segment count fits in scalar");
    let delta = (p_hi - p_lo) / k;
    quad * delta * delta / T::c(4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn breakpoints_are_exact() {
        // φ(p) = p² on [0, 10] with two chords through (0,0),(5,25),(10,100)
        let cuts = chord_cuts(1.0, 0.0, 0.0, 10.0, 2).unwrap();
        assert_eq!(cuts.len(), 2);
        assert_relative_eq!(pwl_value(&cuts, 0.0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(pwl_value(&cuts, 5.0), 25.0, epsilon = 1e-12);
        assert_relative_eq!(pwl_value(&cuts, 10.0), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn midpoint_error_matches_formula() {
        let cuts = chord_cuts(1.0, 0.0, 0.0, 10.0, 2).unwrap();
        // PWL(2.5) = 12.5 vs φ(2.5) = 6.25: error 6.25 = quad·Δ²/4, Δ = 5
        assert_relative_eq!(pwl_value(&cuts, 2.5), 12.5, epsilon = 1e-12);
        assert_relative_eq!(
            pwl_value(&cuts, 2.5) - 6.25,
            max_chord_error(1.0, 0.0, 10.0, 2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn affine_curve_gives_identical_chords() {
        let cuts = chord_cuts(0.0, 2.0, -3.0, 7.0, 3).unwrap();
        assert_eq!(cuts.len(), 3);
        for c in &cuts {
            assert_relative_eq!(c.slope, 2.0, epsilon = 1e-12);
            assert_relative_eq!(c.intercept, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_concave_and_empty_intervals() {
        assert_eq!(
            chord_cuts(-1.0, 0.0, 0.0, 1.0, 2).unwrap_err(),
            PwlError::NotConvex(-1.0)
        );
        assert!(matches!(
            chord_cuts(1.0, 0.0, 2.0, 1.0, 2).unwrap_err(),
            PwlError::EmptyInterval { .. }
        ));
        assert_eq!(chord_cuts(1.0, 0.0, 0.0, 1.0, 0).unwrap_err(), PwlError::NoSegments);
    }

    #[test]
    fn degenerate_interval_is_exact() {
        let cuts = chord_cuts(2.0, 1.0, 5.0, 5.0, 4).unwrap();
        assert_relative_eq!(pwl_value(&cuts, 5.0), 2.0 * 25.0 + 5.0, epsilon = 1e-12);
    }

    #[test]
    fn overapproximates_with_bounded_error_on_a_grid() {
        let (quad, lin, lo, hi) = (1.2e-3, 0.208, 5.0, 50.0);
        for &segments in &[1usize, 2, 8, 64] {
            let cuts = chord_cuts(quad, lin, lo, hi, segments).unwrap();
            let bound = max_chord_error(quad, lo, hi, segments);
            for step in 0..=1000 {
                let p = lo + (hi - lo) * (step as f64) / 1000.0;
                let exact = quad * p * p + lin * p;
                let approx = pwl_value(&cuts, p);
                assert!(approx >= exact - 1e-9, "under-approximation at p={p}");
                assert!(
                    approx - exact <= bound + 1e-9,
                    "error bound exceeded at p={p}: {} > {bound}",
                    approx - exact
                );
            }
        }
    }
}
