//! Least-squares cubic B-spline smile in raw strike.
//!
//! The spline benchmark fits implied vols over strike with a clamped cubic
//! B-spline carrying a single interior knot placed at the quoted strike
//! closest to the forward (the nearest strictly interior strike when the
//! closest one sits on the boundary of the strike range). With boundary
//! knots of multiplicity four at the first and last strike, the basis has
//!
//! ```text
//!     n = degree + interior + 1 = 3 + 1 + 1 = 5
//! ```
//!
//! coefficients — the same parameter budget as the other smile models. The
//! coefficients solve the unweighted linear least-squares problem over the
//! quotes; evaluation uses the Cox-de Boor recursion, and queries outside the
//! strike range extrapolate flat at the boundary value.
//!
//! # References
//! - de Boor, C. (1978), "A Practical Guide to Splines".
//! - Piegl, L., Tiller, W. (1997), "The NURBS Book" (basis-function
//!   algorithms A2.1/A2.2).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VolfitError};

/// Spline degree (cubic).
pub const DEGREE: usize = 3;

/// Number of B-spline coefficients with one interior knot.
pub const N_COEFFS: usize = DEGREE + 2;

/// Minimum quote count for a five-coefficient least-squares fit.
pub const MIN_STRIKES: usize = 6;

/// A fitted clamped cubic B-spline over raw strike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineModel {
    /// Full clamped knot vector `[K_min x4, K_interior, K_max x4]`.
    knots: Vec<f64>,
    /// B-spline coefficients, one per basis function.
    coeffs: Vec<f64>,
}

impl SplineModel {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The single interior knot (the strike the fit pivots on).
    pub fn interior_knot(&self) -> f64 {
        self.knots[DEGREE + 1]
    }

    /// Spline value at `strike`; constant beyond the fitted strike range.
    pub fn vol(&self, strike: f64) -> f64 {
        let lo = self.knots[DEGREE];
        let hi = self.knots[self.knots.len() - 1 - DEGREE];
        let x = strike.clamp(lo, hi);
        let span = find_span(&self.knots, x);
        let basis = basis_funs(&self.knots, span, x);
        let mut value = 0.0;
        for (j, b) in basis.iter().enumerate() {
            value += b * self.coeffs[span - DEGREE + j];
        }
        value
    }
}

/// Index `s` with `knots[s] <= x < knots[s+1]`, clamped to the valid basis
/// range (the last span is treated as closed on the right).
fn find_span(knots: &[f64], x: f64) -> usize {
    let n = knots.len() - DEGREE - 1; // number of basis functions
    if x >= knots[n] {
        return n - 1;
    }
    if x <= knots[DEGREE] {
        return DEGREE;
    }
    let mut lo = DEGREE;
    let mut hi = n;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// The `DEGREE + 1` non-zero basis functions `N_{span-DEGREE..=span}` at `x`
/// (The NURBS Book, algorithm A2.2).
fn basis_funs(knots: &[f64], span: usize, x: f64) -> [f64; DEGREE + 1] {
    let mut n = [0.0; DEGREE + 1];
    let mut left = [0.0; DEGREE + 1];
    let mut right = [0.0; DEGREE + 1];
    n[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Fits the spline to `(strike, iv)` quotes with equal weights.
///
/// Strikes must be strictly increasing with at least [`MIN_STRIKES`] entries;
/// the interior knot is the strike nearest `forward`, pushed to the nearest
/// strictly interior strike when the closest quote is the first or last one.
/// A rank-deficient design (quotes clustered so some basis function is never
/// observed) is rejected rather than silently regularised.
pub fn fit_spline(strikes: &[f64], ivs: &[f64], forward: f64) -> Result<SplineModel> {
    if strikes.len() != ivs.len() {
        return Err(VolfitError::invalid(format!(
            "strike and iv lengths differ: {} vs {}",
            strikes.len(),
            ivs.len()
        )));
    }
    if strikes.len() < MIN_STRIKES {
        return Err(VolfitError::invalid(format!(
            "spline fit needs at least {MIN_STRIKES} strikes, got {}",
            strikes.len()
        )));
    }
    if !(forward.is_finite() && forward > 0.0) {
        return Err(VolfitError::invalid(format!(
            "forward must be finite and positive, got {forward}"
        )));
    }
    for w in strikes.windows(2) {
        // NaN strikes pass this comparison but are rejected just below.
        if w[1] <= w[0] {
            return Err(VolfitError::invalid(format!(
                "strikes must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if strikes.iter().chain(ivs.iter()).any(|v| !v.is_finite()) || strikes[0] <= 0.0 {
        return Err(VolfitError::invalid(
            "strikes and ivs must be finite with positive strikes".to_string(),
        ));
    }

    // Interior knot: quoted strike nearest the forward, forced strictly
    // inside the range so the knot vector stays valid.
    let nearest = strikes
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (a.1 - forward).abs();
            let db = (b.1 - forward).abs();
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    let interior_idx = nearest.clamp(1, strikes.len() - 2);
    let interior = strikes[interior_idx];

    let (lo, hi) = (strikes[0], strikes[strikes.len() - 1]);
    let mut knots = Vec::with_capacity(N_COEFFS + DEGREE + 1);
    knots.extend(std::iter::repeat_n(lo, DEGREE + 1));
    knots.push(interior);
    knots.extend(std::iter::repeat_n(hi, DEGREE + 1));

    let mut design = DMatrix::zeros(strikes.len(), N_COEFFS);
    for (row, &x) in strikes.iter().enumerate() {
        let span = find_span(&knots, x);
        let basis = basis_funs(&knots, span, x);
        for (j, b) in basis.iter().enumerate() {
            design[(row, span - DEGREE + j)] = *b;
        }
    }
    let rhs = DVector::from_column_slice(ivs);
    let svd = design.svd(true, true);
    let max_sv = svd.singular_values.max();
    let rank_eps = 1e-10 * max_sv;
    if svd.singular_values.iter().filter(|&&s| s > rank_eps).count() < N_COEFFS {
        return Err(VolfitError::invalid(
            "degenerate spline design: too few distinct strikes per knot span".to_string(),
        ));
    }
    let coeffs = svd
        .solve(&rhs, rank_eps)
        .map_err(|e| VolfitError::invalid(format!("spline least-squares solve failed: {e}")))?;

    Ok(SplineModel {
        knots,
        coeffs: coeffs.iter().copied().collect(),
    })
}
