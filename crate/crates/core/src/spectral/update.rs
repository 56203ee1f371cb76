//! Rank-one update of a factored symmetric matrix.
//!
//! Writing `x = U·w + ρ·q` with `q ⟂ span(U)`,
//!
//! ```text
//! U·diag(σ)·Uᵀ + η·x·xᵀ = [U q] · (diag(σ, 0) + z·zᵀ) · [U q]ᵀ,   z = √η·[w; ρ]
//! ```
//!
//! so the update reduces to eigendecomposing the small core
//! `diag(σ, 0) + z·zᵀ` and rotating the extended basis. The core is solved
//! through its secular equation after deflating negligible `z` components
//! and (near-)repeated diagonal entries; eigenvectors use the Gu–Eisenstat
//! recomputed `ẑ`, which keeps them orthogonal to working precision. The
//! core costs `O(r²)` and the basis rotation `O(d·r²)`.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};

use super::{check_dim, norm, EigState, RANK_TOL, RESIDUAL_TOL};
use crate::{Error, Result};

const MAX_SECULAR_ITERS: usize = 200;

/// `diag(diag) + z·zᵀ`, the small symmetric matrix whose eigendecomposition
/// drives a rank-one update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateCore {
    pub diag: Array1<f64>,
    pub z: Array1<f64>,
}

impl UpdateCore {
    pub fn new(diag: Array1<f64>, z: Array1<f64>) -> Result<Self> {
        check_dim(diag.len(), z.len())?;
        Ok(UpdateCore { diag, z })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Dense form of the core.
    pub fn matrix(&self) -> Array2<f64> {
        let zc = self.z.view().insert_axis(Axis(1));
        let mut m = zc.dot(&zc.t());
        for (i, d) in self.diag.iter().enumerate() {
            m[[i, i]] += d;
        }
        m
    }

    /// Eigenvalues (non-increasing) and eigenvectors (columns).
    pub fn eigen(&self) -> (Array1<f64>, Array2<f64>) {
        diag_plus_rank_one_eigen(self.diag.view(), self.z.view())
    }
}

/// Returns the factored form of `M + η·x·xᵀ` where `M` is `state`.
///
/// The rank grows by at most one: only when the residual of `x` against the
/// current basis exceeds `RESIDUAL_TOL·‖x‖`. Eigenvalues at or below
/// [`RANK_TOL`] are dropped from the result.
pub fn rank_one_update(state: &EigState, x: ArrayView1<f64>, eta: f64) -> Result<EigState> {
    Ok(rank_one_update_unpruned(state, x, eta)?.prune(RANK_TOL))
}

/// [`rank_one_update`] without dropping small eigenvalues.
pub(crate) fn rank_one_update_unpruned(state: &EigState, x: ArrayView1<f64>, eta: f64) -> Result<EigState> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::invalid(format!(
            "step size must be finite and nonnegative, got {eta}"
        )));
    }
    let d = state.dim();
    check_dim(d, x.len())?;
    let xnorm = norm(x);
    if eta == 0.0 || xnorm == 0.0 {
        return Ok(state.clone());
    }
    let r = state.rank();
    let u = &state.basis;

    // Classical Gram-Schmidt, twice.
    let mut w = u.t().dot(&x);
    let mut residual = &x - &u.dot(&w);
    let w2 = u.t().dot(&residual);
    residual -= &u.dot(&w2);
    w += &w2;
    let rho = norm(residual.view());

    let extend = r < d && rho > RESIDUAL_TOL * xnorm;
    let m = r + usize::from(extend);
    let scale = eta.sqrt();
    let mut diag = Array1::zeros(m);
    diag.slice_mut(s![..r]).assign(&state.eigvals);
    let mut z = Array1::zeros(m);
    z.slice_mut(s![..r]).assign(&(&w * scale));
    if extend {
        z[r] = rho * scale;
    }

    let (vals, vecs) = diag_plus_rank_one_eigen(diag.view(), z.view());

    let basis = if extend {
        // [U q]·V = U·V_top + q·v_bottomᵀ
        let mut rotated = u.dot(&vecs.slice(s![..r, ..]));
        let q = residual / rho;
        let bottom = vecs.row(r);
        for (mut col, &b) in rotated.columns_mut().into_iter().zip(bottom.iter()) {
            col.scaled_add(b, &q);
        }
        rotated
    } else {
        u.dot(&vecs)
    };
    Ok(EigState { basis, eigvals: vals })
}

/// Eigendecomposition of `diag(d) + z·zᵀ`, eigenvalues non-increasing.
pub(crate) fn diag_plus_rank_one_eigen(d: ArrayView1<f64>, z: ArrayView1<f64>) -> (Array1<f64>, Array2<f64>) {
    let m = d.len();
    let mut perm: Vec<usize> = (0..m).collect();
    perm.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut ds: Vec<f64> = perm.iter().map(|&i| d[i]).collect();
    let mut zs: Vec<f64> = perm.iter().map(|&i| z[i]).collect();

    let znorm2: f64 = zs.iter().map(|v| v * v).sum();
    let dmax = ds.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let tol = 8.0 * f64::EPSILON * dmax.max(znorm2);
    let znorm = znorm2.sqrt();

    // Eigenvectors in sorted coordinates; deflation rotations act on columns.
    let mut g = Array2::<f64>::eye(m);
    let mut vals = vec![0.0; m];
    let mut deflated = vec![false; m];
    let mut active: Vec<usize> = Vec::with_capacity(m);
    let mut rotations: Vec<(usize, usize, f64, f64)> = Vec::new();
    for i in 0..m {
        if zs[i].abs() * znorm <= tol {
            deflated[i] = true;
            vals[i] = ds[i];
            zs[i] = 0.0;
            continue;
        }
        if let Some(&p) = active.last() {
            let t = zs[p].hypot(zs[i]);
            let c = zs[i] / t;
            let sn = zs[p] / t;
            if (c * sn * (ds[i] - ds[p])).abs() <= tol {
                // Rotate z_p into z_i so that p decouples.
                let (dp, di) = (ds[p], ds[i]);
                ds[p] = c * c * dp + sn * sn * di;
                ds[i] = sn * sn * dp + c * c * di;
                zs[p] = 0.0;
                zs[i] = t;
                for k in 0..m {
                    let gp = g[[k, p]];
                    let gi = g[[k, i]];
                    g[[k, p]] = c * gp - sn * gi;
                    g[[k, i]] = sn * gp + c * gi;
                }
                active.pop();
                rotations.push((p, i, c, sn));
                deflated[p] = true;
                vals[p] = ds[p];
            }
        }
        active.push(i);
    }

    let mut vecs_sorted = Array2::zeros((m, m));
    for i in (0..m).filter(|&i| deflated[i]) {
        vecs_sorted.column_mut(i).assign(&g.column(i));
    }
    if !active.is_empty() {
        let dd: Vec<f64> = active.iter().map(|&i| ds[i]).collect();
        let zz: Vec<f64> = active.iter().map(|&i| zs[i]).collect();
        let roots = secular_roots(&dd, &zz);
        let zhat = gu_eisenstat_z(&dd, &zz, &roots);
        let n = dd.len();
        for (j, root) in roots.iter().enumerate() {
            let slot = active[j];
            vals[slot] = dd[root.origin] + root.tau;
            let mut v: Vec<f64> = (0..n)
                .map(|k| zhat[k] / ((dd[k] - dd[root.origin]) - root.tau))
                .collect();
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= vn);
            // The column is G·y with y holding v on the active slots and G
            // the product of the deflation rotations, applied right to left.
            let mut col = vecs_sorted.column_mut(slot);
            for (k, &vk) in v.iter().enumerate() {
                col[active[k]] = vk;
            }
            for &(p, i, c, sn) in rotations.iter().rev() {
                let (yp, yi) = (col[p], col[i]);
                col[p] = c * yp + sn * yi;
                col[i] = c * yi - sn * yp;
            }
        }
    }

    // Back to input coordinates, then order by decreasing eigenvalue.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut out_vals = Array1::zeros(m);
    let mut out_vecs = Array2::zeros((m, m));
    for (dst, &src) in order.iter().enumerate() {
        out_vals[dst] = vals[src];
        for (row, &orig) in perm.iter().enumerate() {
            out_vecs[[orig, dst]] = vecs_sorted[[row, src]];
        }
    }
    (out_vals, out_vecs)
}

/// Root `λ = dd[origin] + tau`, stored relative to its nearest pole.
#[derive(Debug, Clone, Copy)]
struct SecularRoot {
    origin: usize,
    tau: f64,
}

/// Roots of `f(λ) = 1 + Σ zₖ²/(dₖ − λ)` for strictly increasing `dd` and
/// nonzero `zz`. Root `j` lies in `(d_j, d_{j+1})`, the last one in
/// `(d_{n−1}, d_{n−1} + ‖z‖²]`.
fn secular_roots(dd: &[f64], zz: &[f64]) -> Vec<SecularRoot> {
    let n = dd.len();
    let z2: Vec<f64> = zz.iter().map(|v| v * v).collect();
    let znorm2: f64 = z2.iter().sum();
    (0..n).map(|j| secular_root(dd, &z2, znorm2, j)).collect()
}

fn secular_root(dd: &[f64], z2: &[f64], znorm2: f64, j: usize) -> SecularRoot {
    let n = dd.len();
    let last = j + 1 == n;

    let (origin, mut lo, mut hi) = if last {
        (j, 0.0, znorm2)
    } else {
        let half = 0.5 * (dd[j + 1] - dd[j]);
        let (f, _, _, _, _) = secular_terms(dd, z2, j, j, half);
        if f >= 0.0 {
            (j, 0.0, half)
        } else {
            (j + 1, -half, 0.0)
        }
    };

    let mut tau = 0.5 * (lo + hi);
    for _ in 0..MAX_SECULAR_ITERS {
        let (f, psi, dpsi, phi, dphi) = secular_terms(dd, z2, origin, j, tau);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let bound = 4.0 * n as f64 * f64::EPSILON * (1.0 + psi.abs() + phi.abs());
        if f.abs() <= bound || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }

        // Fixed-weight rational model: the two poles bracketing the root are
        // kept exact, everything else is matched by value and slope.
        let delta_lo = (dd[j] - dd[origin]) - tau;
        let step = if last {
            let s = delta_lo * delta_lo * dpsi;
            let c = f - delta_lo * dpsi;
            if c > 0.0 {
                Some(delta_lo + s / c)
            } else {
                None
            }
        } else {
            let delta_hi = (dd[j + 1] - dd[origin]) - tau;
            let s_lo = delta_lo * delta_lo * dpsi;
            let s_hi = delta_hi * delta_hi * dphi;
            let c = f - delta_lo * dpsi - delta_hi * dphi;
            let b = c * (delta_lo + delta_hi) + s_lo + s_hi;
            let cc = c * delta_lo * delta_hi + s_lo * delta_hi + s_hi * delta_lo;
            quadratic_root_in(c, b, cc, delta_lo, delta_hi)
        };
        let candidate = step.map(|eta| tau + eta);
        tau = match candidate {
            Some(t) if t > lo && t < hi && t.is_finite() => t,
            _ => 0.5 * (lo + hi),
        };
    }
    SecularRoot { origin, tau }
}

/// Returns `(f, ψ, ψ', φ, φ')` where `ψ` sums poles `k ≤ split` and `φ`
/// the rest, evaluated at `λ = dd[origin] + tau`.
fn secular_terms(dd: &[f64], z2: &[f64], origin: usize, split: usize, tau: f64) -> (f64, f64, f64, f64, f64) {
    let accumulate = |range: std::ops::Range<usize>| {
        let (mut sum, mut dsum) = (0.0, 0.0);
        for k in range {
            let inv = 1.0 / ((dd[k] - dd[origin]) - tau);
            let term = z2[k] * inv;
            sum += term;
            dsum += term * inv;
        }
        (sum, dsum)
    };
    let (psi, dpsi) = accumulate(0..split + 1);
    let (phi, dphi) = accumulate(split + 1..dd.len());
    (1.0 + psi + phi, psi, dpsi, phi, dphi)
}

/// Root of `a·η² − b·η + c = 0` strictly between `lo` and `hi`.
fn quadratic_root_in(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Option<f64> {
    let inside = |x: f64| x > lo && x < hi;
    if a.abs() <= f64::EPSILON * (b.abs() + c.abs()) {
        return (b != 0.0).then(|| c / b).filter(|&x| inside(x));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable pair of roots.
    let q = 0.5 * (b + b.signum() * sq);
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { r1 };
    [r1, r2].into_iter().find(|&x| inside(x))
}

/// Recomputes `z` from the computed roots so that the eigenvectors
/// `ẑₖ/(dₖ − λⱼ)` are numerically orthogonal.
fn gu_eisenstat_z(dd: &[f64], zz: &[f64], roots: &[SecularRoot]) -> Vec<f64> {
    let n = dd.len();
    let gap = |i: usize, k: usize| (dd[roots[i].origin] - dd[k]) + roots[i].tau; // λᵢ − dₖ
    (0..n)
        .map(|k| {
            let mut prod = gap(k, k);
            for i in 0..n {
                if i != k {
                    prod *= gap(i, k) / (dd[i] - dd[k]);
                }
            }
            prod.abs().sqrt().copysign(zz[k])
        })
        .collect()
}
