//! Heuristic growth check on the coefficients of a truncated series.
//!
//! A truncation says nothing definite about convergence; the verdict only
//! reports whether the visible coefficients grow at most geometrically.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::coeff::rational_string;
use crate::series::TruncatedSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthVerdict {
    ConsistentWithConvergence,
    DivergentLooking,
    TooShort,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeMagnitude {
    pub degree: u32,
    /// Largest `|c|²` among the coefficients of this degree, exact.
    pub max_abs_sqr: String,
    pub ln_max_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceDiagnostic {
    pub heuristic: bool,
    pub per_degree: Vec<DegreeMagnitude>,
    /// `exp` of the least-squares slope of `ln max|c_k|` against `k`.
    pub fitted_ratio: Option<f64>,
    pub verdict: GrowthVerdict,
    pub cap: u32,
}

const MIN_DEGREES: usize = 4;

pub fn convergence_diagnostic(s: &TruncatedSeries) -> ConvergenceDiagnostic {
    let mut best: Vec<(u32, BigRational, f64)> = Vec::new();
    for (m, c) in s.terms() {
        let d = m.degree();
        let sq = c.norm_sqr();
        let ln = c.ln_abs();
        match best.last_mut() {
            Some(last) if last.0 == d => {
                if sq > last.1 {
                    *last = (d, sq, ln);
                }
            }
            _ => best.push((d, sq, ln)),
        }
    }
    let per_degree: Vec<DegreeMagnitude> = best
        .iter()
        .map(|(d, sq, ln)| DegreeMagnitude {
            degree: *d,
            max_abs_sqr: rational_string(sq),
            ln_max_abs: *ln,
        })
        .collect();
    let points: Vec<(f64, f64)> = best.iter().map(|(d, _, ln)| (*d as f64, *ln)).collect();
    let fitted_ratio = slope(&points).map(f64::exp);

    let top = best.last().map(|b| b.0);
    let finite = match top {
        None => true,
        Some(t) => s.is_polynomial() || t + 2 <= s.cap(),
    };
    let verdict = if finite {
        GrowthVerdict::ConsistentWithConvergence
    } else if points.len() < MIN_DEGREES {
        GrowthVerdict::TooShort
    } else if accelerating(&points) {
        GrowthVerdict::DivergentLooking
    } else {
        GrowthVerdict::ConsistentWithConvergence
    };
    ConvergenceDiagnostic {
        heuristic: true,
        per_degree,
        fitted_ratio,
        verdict,
        cap: s.cap(),
    }
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Super-geometric growth: the per-degree log ratio in the upper half of
/// the visible range exceeds the lower half by more than `ln 2`.
fn accelerating(points: &[(f64, f64)]) -> bool {
    let ratios: Vec<f64> = points
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let half = ratios.len() / 2;
    if half == 0 {
        return false;
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    mean(&ratios[ratios.len() - half..]) - mean(&ratios[..half]) > std::f64::consts::LN_2
}

/// Largest `|c|²` over all coefficients, as an exact rational string.
pub fn max_abs_sqr(series: &[TruncatedSeries]) -> String {
    let mut best = BigRational::zero();
    for s in series {
        for (_, c) in s.terms() {
            let sq = c.norm_sqr();
            if sq > best {
                best = sq;
            }
        }
    }
    rational_string(&best)
}
