//! Searches for a unitary inside `S = span{E_i}`.
//!
//! When the `E_i` form a commuting normal family, `Σ c_i E_i = Σ_j ℓ_j(c) P_j`
//! and a unitary exists iff some `y` in the range of `ℓ` has all `|y_j|` equal.
//! The ratio `min_j |y_j| / max_j |y_j|` is scale invariant, so it is bounded
//! by branch and bound over the surface of the unit cube in `R^{2ρ}` (with the
//! global phase fixed); every point there has `‖y‖ ≥ 1`, which keeps the
//! denominator away from zero.
//!
//! Otherwise a compass search maximizes `σ_min(M) / (‖M‖_HS / √n)`, which
//! equals 1 exactly on multiples of unitaries. That path is only a heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::blocksvd::joint_clusters;
use crate::generate::{complex_gaussian, rng_from_seed};
use crate::matcore::{c64, range_basis, singular_values, CMatrix, Tolerances, C64};

/// Stop refining once the bound is within this of the best point found.
const GAP: f64 = 1e-2;
/// Cube-cell evaluations allowed per unit of budget.
const EVALS_PER_BUDGET: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalBound {
    /// Certified upper bound on the achievable ratio.
    pub upper: f64,
    /// Best ratio attained at an evaluated point.
    pub best: f64,
    /// Number of joint eigenspaces `m` and range dimension `ρ`.
    pub forms: usize,
    pub rank: usize,
    pub evaluations: usize,
    /// A common kernel of all `E_i` makes the span singular outright.
    pub common_kernel: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best: f64,
    pub coefficients: Vec<C64>,
    pub restarts: usize,
    pub evaluations: usize,
}

struct Forms {
    /// `m × ρ`, orthonormal columns spanning the range of `ℓ`.
    basis: CMatrix,
    lipschitz: Vec<f64>,
}

impl Forms {
    fn eval(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let (m, rho) = self.basis.shape();
        let mut mags = Vec::with_capacity(m);
        for j in 0..m {
            let mut y = c64(0.0, 0.0);
            for t in 0..rho {
                y += self.basis[(j, t)] * c64(x[2 * t], x[2 * t + 1]);
            }
            mags.push(y.norm());
        }
        let (lo, hi) = mags
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        (mags, ratio)
    }
}

struct Cell {
    center: Vec<f64>,
    half: Vec<f64>,
    upper: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

fn cell_bounds(forms: &Forms, center: &[f64], half: &[f64], floor: f64) -> (f64, f64) {
    let (mags, ratio) = forms.eval(center);
    let delta = half.iter().map(|h| h * h).sum::<f64>().sqrt();
    let num = mags
        .iter()
        .zip(&forms.lipschitz)
        .map(|(y, l)| y + l * delta)
        .fold(f64::INFINITY, f64::min);
    let den = mags
        .iter()
        .zip(&forms.lipschitz)
        .map(|(y, l)| y - l * delta)
        .fold(floor, f64::max);
    ((num / den).min(1.0), ratio)
}

/// Path (a). `None` when the family is not commuting and normal.
pub fn diagonal_bound(kraus: &[CMatrix], tol: &Tolerances, budget: usize) -> Option<DiagonalBound> {
    let clusters = joint_clusters(kraus, tol, 0x6d69_7865).ok()?;
    let scale = kraus
        .iter()
        .map(crate::matcore::max_abs)
        .fold(0.0, f64::max);
    let m = clusters.len();
    let common_kernel = clusters
        .iter()
        .any(|c| c.values.iter().all(|v| v.norm() <= tol.eq_scaled(scale)));
    if common_kernel {
        return Some(DiagonalBound {
            upper: 0.0,
            best: 0.0,
            forms: m,
            rank: 0,
            evaluations: 0,
            common_kernel,
        });
    }
    let l = CMatrix::from_fn(m, kraus.len(), |j, i| clusters[j].values[i]);
    let basis = range_basis(&l, tol);
    let rho = basis.ncols();
    let lipschitz = (0..m)
        .map(|j| {
            basis
                .row(j)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let forms = Forms { basis, lipschitz };
    let floor = 1.0 / (m as f64).sqrt();
    let dim = 2 * rho;
    let cap = budget.max(1) * EVALS_PER_BUDGET;

    let mut heap = BinaryHeap::new();
    let mut best: f64 = 0.0;
    let mut evaluations = 0;
    // the ratio is invariant under a global phase, so Im z_0 = 0 is pinned
    for a in (0..dim).filter(|&a| a != 1) {
        for sign in [-1.0, 1.0] {
            let mut center = vec![0.0; dim];
            center[a] = sign;
            let mut half = vec![1.0; dim];
            half[a] = 0.0;
            half[1] = 0.0;
            let (upper, ratio) = cell_bounds(&forms, &center, &half, floor);
            evaluations += 1;
            best = best.max(ratio);
            heap.push(Cell {
                center,
                half,
                upper,
            });
        }
    }
    let target = 1.0 - 10.0 * tol.eq_tol;
    while let Some(top) = heap.pop() {
        if top.upper - best <= GAP || evaluations >= cap || best >= target {
            heap.push(top);
            break;
        }
        let split = (0..dim)
            .max_by(|&a, &b| top.half[a].total_cmp(&top.half[b]))
            .unwrap_or(0);
        let h = top.half[split] / 2.0;
        for sign in [-1.0, 1.0] {
            let mut center = top.center.clone();
            center[split] += sign * h;
            let mut half = top.half.clone();
            half[split] = h;
            let (upper, ratio) = cell_bounds(&forms, &center, &half, floor);
            evaluations += 1;
            best = best.max(ratio);
            heap.push(Cell {
                center,
                half,
                upper,
            });
        }
    }
    let upper = heap.peek().map_or(best, |c| c.upper).max(best);
    Some(DiagonalBound {
        upper,
        best,
        forms: m,
        rank: rho,
        evaluations,
        common_kernel,
    })
}

/// `σ_min(M) / (‖M‖_HS / √n)`; 1 exactly when `M` is a nonzero multiple of a unitary.
pub fn unitarity_ratio(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    let rms = (s.iter().map(|v| v * v).sum::<f64>() / s.len().max(1) as f64).sqrt();
    if rms == 0.0 {
        return 0.0;
    }
    s.last().copied().unwrap_or(0.0) / rms
}

fn combination(kraus: &[CMatrix], x: &[f64]) -> CMatrix {
    let n = kraus[0].nrows();
    kraus
        .iter()
        .enumerate()
        .fold(CMatrix::zeros(n, n), |acc, (i, e)| {
            acc + e * c64(x[2 * i], x[2 * i + 1])
        })
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Path (b): multi-start compass search. Starts from each `E_i` alone and from
/// `restarts` Gaussian points; stops as soon as `stop_at` is reached.
pub fn search_unitary(kraus: &[CMatrix], restarts: usize, seed: u64, stop_at: f64) -> SearchResult {
    let dim = 2 * kraus.len();
    let mut rng = rng_from_seed(seed);
    let mut starts: Vec<Vec<f64>> = (0..kraus.len())
        .map(|i| {
            let mut x = vec![0.0; dim];
            x[2 * i] = 1.0;
            x
        })
        .collect();
    for _ in 0..restarts {
        let mut x: Vec<f64> = (0..kraus.len())
            .flat_map(|_| {
                let z = complex_gaussian(&mut rng);
                [z.re, z.im]
            })
            .collect();
        normalize(&mut x);
        starts.push(x);
    }

    let mut best = (0.0, vec![0.0; dim]);
    let mut evaluations = 0;
    let total = starts.len();
    for mut x in starts {
        let mut fx = unitarity_ratio(&combination(kraus, &x));
        evaluations += 1;
        let mut step = 0.5;
        while step > 1e-6 && fx < stop_at {
            let mut moved = false;
            // randomized coordinate order avoids a bias toward the first axes
            let offset = rng.gen_range(0..dim);
            for p in 0..dim {
                let a = (p + offset) % dim;
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[a] += sign * step;
                    normalize(&mut y);
                    let fy = unitarity_ratio(&combination(kraus, &y));
                    evaluations += 1;
                    if fy > fx {
                        x = y;
                        fx = fy;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                step /= 2.0;
            }
        }
        if fx > best.0 {
            best = (fx, x);
        }
        if best.0 >= stop_at {
            break;
        }
    }
    let coefficients = best.1.chunks(2).map(|p| c64(p[0], p[1])).collect();
    SearchResult {
        best: best.0,
        coefficients,
        restarts: total,
        evaluations,
    }
}
