//! Euclidean projection of a spectrum onto `{σ ∈ [0,1]^d : Σσ = k}`,
//! optionally with at most `K` nonzero entries.
//!
//! Callers pass only the `r` explicitly stored eigenvalues; the remaining
//! `d − r` coordinates are implicit zeros. When the shift is positive those
//! implicit coordinates take the value `clip(S, 0, 1)` and the projected
//! matrix gains rank.

use ndarray::{Array1, ArrayView1};

use crate::{Error, Result};

const SUM_TOL: f64 = 1e-9;

/// Projected spectrum plus the shift that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// Projected values of the explicit coordinates, in input order.
    pub eigvals: Array1<f64>,
    /// The shift `S` with `σᵢ = clip(σ'ᵢ + S, 0, 1)` on the support.
    pub shift: f64,
    /// Value taken by each activated implicit coordinate.
    pub fill_value: f64,
    /// Number of implicit coordinates holding `fill_value`.
    pub fill_count: usize,
}

impl ProjectionResult {
    /// Sum over all `d` coordinates.
    pub fn total(&self) -> f64 {
        self.eigvals.sum() + self.fill_value * self.fill_count as f64
    }

    /// Number of nonzero coordinates, implicit ones included.
    pub fn nnz(&self) -> usize {
        let explicit = self.eigvals.iter().filter(|&&v| v > 0.0).count();
        explicit + if self.fill_value > 0.0 { self.fill_count } else { 0 }
    }

    /// Full length-`d` spectrum: explicit entries followed by implicit ones.
    pub fn dense(&self, dim: usize) -> Array1<f64> {
        let mut out = Array1::zeros(dim);
        let r = self.eigvals.len();
        out.slice_mut(ndarray::s![..r]).assign(&self.eigvals);
        for v in out.iter_mut().skip(r).take(self.fill_count) {
            *v = self.fill_value;
        }
        out
    }
}

/// Shift-and-clip projection of `eigvals` (padded with zeros to `dim`) onto
/// the Fantope spectrum set with trace `k`.
pub fn project_fantope(eigvals: ArrayView1<f64>, k: usize, dim: usize) -> Result<ProjectionResult> {
    check_args(eigvals, k, dim)?;
    let values: Vec<f64> = eigvals.to_vec();
    let implicit = dim - values.len();
    let shift = solve_shift(&values, implicit, k as f64);
    Ok(ProjectionResult {
        eigvals: eigvals.mapv(|v| clip(v + shift)),
        shift,
        fill_value: clip(shift),
        fill_count: implicit,
    })
}

/// Projection with at most `cap` nonzero coordinates.
///
/// The support is the `cap` largest coordinates (explicit entries win ties
/// against implicit zeros, earlier entries win ties among themselves); the
/// result is the shift-and-clip projection restricted to that support.
pub fn project_capped_fantope(eigvals: ArrayView1<f64>, k: usize, cap: usize, dim: usize) -> Result<ProjectionResult> {
    check_args(eigvals, k, dim)?;
    if cap < k {
        return Err(Error::Infeasible(format!(
            "rank cap {cap} is below the target trace {k}"
        )));
    }
    let r = eigvals.len();
    if cap >= dim {
        return project_fantope(eigvals, k, dim);
    }

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| eigvals[b].total_cmp(&eigvals[a]));
    let nonneg = order.iter().take_while(|&&i| eigvals[i] >= 0.0).count();
    let implicit = dim - r;

    // Support in priority order: nonnegative explicit, implicit zeros,
    // negative explicit.
    let mut support = Vec::with_capacity(cap);
    support.extend(order.iter().take(nonneg.min(cap)).copied());
    let fill_count = implicit.min(cap - support.len());
    let rest = cap - support.len() - fill_count;
    support.extend(order.iter().skip(nonneg).take(rest).copied());

    let values: Vec<f64> = support.iter().map(|&i| eigvals[i]).collect();
    let shift = solve_shift(&values, fill_count, k as f64);
    let mut out = Array1::zeros(r);
    for &i in &support {
        out[i] = clip(eigvals[i] + shift);
    }
    Ok(ProjectionResult {
        eigvals: out,
        shift,
        fill_value: if fill_count > 0 { clip(shift) } else { 0.0 },
        fill_count,
    })
}

fn check_args(eigvals: ArrayView1<f64>, k: usize, dim: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("target trace k must be at least 1"));
    }
    if k > dim {
        return Err(Error::Infeasible(format!("k = {k} exceeds dimension {dim}")));
    }
    if eigvals.len() > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: eigvals.len(),
        });
    }
    if eigvals.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("spectrum contains non-finite values"));
    }
    Ok(())
}

fn clip(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `g(S) = Σ clip(vᵢ + S) + implicit·clip(S)`.
fn clipped_sum(values: &[f64], implicit: usize, shift: f64) -> f64 {
    values.iter().map(|v| clip(v + shift)).sum::<f64>() + implicit as f64 * clip(shift)
}

/// Smallest `S` with `g(S) = target`, for `0 < target ≤ values.len() + implicit`.
///
/// `g` is piecewise linear and nondecreasing with breakpoints at `−vᵢ` and
/// `1 − vᵢ`; a sorted sweep over the breakpoints finds the crossing segment
/// exactly. Bisection takes over if rounding leaves the sweep off target.
fn solve_shift(values: &[f64], implicit: usize, target: f64) -> f64 {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * values.len() + 2);
    for &v in values {
        events.push((-v, 1.0));
        events.push((1.0 - v, -1.0));
    }
    if implicit > 0 {
        events.push((0.0, implicit as f64));
        events.push((1.0, -(implicit as f64)));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut shift = f64::NAN;
    let mut g = 0.0;
    let mut slope = 0.0;
    let mut prev = events[0].0;
    for &(pos, delta) in &events {
        let next = g + slope * (pos - prev);
        if next >= target && slope > 0.0 {
            shift = prev + (target - g) / slope;
            break;
        }
        g = next;
        slope += delta;
        prev = pos;
    }

    let tol = SUM_TOL * 0.1;
    if shift.is_finite() && (clipped_sum(values, implicit, shift) - target).abs() <= tol {
        return shift;
    }
    bisect_shift(values, implicit, target)
}

fn bisect_shift(values: &[f64], implicit: usize, target: f64) -> f64 {
    let vmax = values.iter().copied().fold(0.0_f64, f64::max);
    let vmin = values.iter().copied().fold(0.0_f64, f64::min);
    let mut lo = -vmax;
    let mut hi = 1.0 - vmin;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if clipped_sum(values, implicit, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn close(a: &Array1<f64>, b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn feasible_spectrum_is_fixed() {
        let p = project_fantope(array![0.5, 0.5].view(), 1, 2).unwrap();
        assert_eq!(p.shift, 0.0);
        assert!(close(&p.eigvals, &[0.5, 0.5], 0.0));
    }

    #[test]
    fn clipping_forces_unique_point() {
        let p = project_fantope(array![2.0, 0.0].view(), 1, 2).unwrap();
        assert!(close(&p.eigvals, &[1.0, 0.0], 1e-15));
        assert!((p.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_shift_case() {
        let p = project_fantope(array![0.9, 0.7, 0.2].view(), 2, 3).unwrap();
        assert!((p.shift - 1.0 / 15.0).abs() < 1e-14);
        let expected = [0.9 + 1.0 / 15.0, 0.7 + 1.0 / 15.0, 0.2 + 1.0 / 15.0];
        assert!(close(&p.eigvals, &expected, 1e-14));
    }

    #[test]
    fn implicit_zeros_take_positive_shift() {
        // One explicit entry, three implicit: S = 1/3 fills the rest.
        let p = project_fantope(array![0.0].view(), 1, 3).unwrap();
        assert!((p.fill_value - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(p.fill_count, 2);
        assert!((p.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_equal_dim_saturates() {
        let p = project_fantope(array![0.3, 5.0].view(), 3, 3).unwrap();
        assert!(close(&p.dense(3), &[1.0, 1.0, 1.0], 1e-12));
    }

    #[test]
    fn invalid_k() {
        assert!(matches!(
            project_fantope(array![1.0].view(), 3, 2),
            Err(Error::Infeasible(_))
        ));
        assert!(project_fantope(array![1.0].view(), 0, 2).is_err());
    }

    #[test]
    fn capped_restricts_support() {
        let p = project_capped_fantope(array![0.6, 0.5, 0.4].view(), 1, 2, 3).unwrap();
        assert!((p.shift + 0.05).abs() < 1e-14);
        assert!(close(&p.eigvals, &[0.55, 0.45, 0.0], 1e-14));
    }

    #[test]
    fn capped_single_support() {
        let p = project_capped_fantope(array![2.0, 1.5, 0.3].view(), 1, 1, 3).unwrap();
        assert!(close(&p.eigvals, &[1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn inactive_cap_matches_uncapped() {
        let v = array![0.9, 0.4, 0.1];
        let a = project_capped_fantope(v.view(), 2, 5, 5).unwrap();
        let b = project_fantope(v.view(), 2, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cap_below_k_is_infeasible() {
        assert!(matches!(
            project_capped_fantope(array![1.0, 1.0].view(), 2, 1, 3),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn capped_activates_limited_implicit_coordinates() {
        // Rank-1 input, K = 3 in dimension 6: two implicit coordinates join.
        let p = project_capped_fantope(array![2.0].view(), 2, 3, 6).unwrap();
        assert_eq!(p.fill_count, 2);
        assert!(p.nnz() <= 3);
        assert!((p.total() - 2.0).abs() < 1e-12);
        assert!(close(&p.dense(6), &[1.0, 0.5, 0.5, 0.0, 0.0, 0.0], 1e-12));
    }
}
