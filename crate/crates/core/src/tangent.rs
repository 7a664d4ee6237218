//! Enveloping tangent space of the unital class and dimensions of the
//! block-diagonal varieties, analytic and numeric.
//!
//! All dimensions are real. Complex matrices enter real linear systems with
//! interleaved `(Re, Im)` coordinates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::blocksvd::compute_block_svd;
use crate::error::{Error, Result};
use crate::generate::{ginibre, haar_unitary_with, rng_from_seed};
use crate::matcore::{
    c64, hs_inner, numeric_rank_real, spectral_decomp, tensor, unitarity_defect, BipartiteOperator,
    BipartiteShape, CMatrix, Tolerances, C64, I, ONE,
};

/// Spectrum of a unitary as clustered `(eigenvalue, multiplicity)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumProfile {
    pub pairs: Vec<(C64, usize)>,
}

impl SpectrumProfile {
    pub fn of_unitary(u: &CMatrix, tol: &Tolerances) -> Result<Self> {
        let d = unitarity_defect(u)?;
        if d > tol.eq_tol {
            return Err(Error::NotUnitary(d));
        }
        let pairs = spectral_decomp(u, tol)?
            .into_iter()
            .map(|t| (t.value, t.multiplicity))
            .collect();
        Ok(SpectrumProfile { pairs })
    }

    pub fn sum_squared_multiplicities(&self) -> usize {
        self.pairs.iter().map(|(_, d)| d * d).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.pairs.iter().all(|&(_, d)| d == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub analytic: usize,
    pub numeric: usize,
    pub agree: bool,
    pub params: serde_json::Value,
}

impl DimensionReport {
    pub fn new(analytic: usize, numeric: usize, params: serde_json::Value) -> Self {
        DimensionReport {
            analytic,
            numeric,
            agree: analytic == numeric,
            params,
        }
    }
}

/// `Σ_{i,j} Σ_x d_x²` over the clustered spectra of `U_i U_j*`.
pub fn enveloping_dim_analytic(blocks: &[CMatrix], tol: &Tolerances) -> Result<usize> {
    let mut total = 0;
    for ui in blocks {
        for uj in blocks {
            total += SpectrumProfile::of_unitary(&(ui * uj.adjoint()), tol)?
                .sum_squared_multiplicities();
        }
    }
    Ok(total)
}

/// Every `U_i U_j*` with `i ≠ j` has a simple spectrum.
pub fn is_generic_position(blocks: &[CMatrix], tol: &Tolerances) -> Result<bool> {
    for (i, ui) in blocks.iter().enumerate() {
        for (j, uj) in blocks.iter().enumerate() {
            if i != j && !SpectrumProfile::of_unitary(&(ui * uj.adjoint()), tol)?.is_simple() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The `k` coefficient unitaries of a block-diagonal unitary, one per rank of
/// each isometry, recovered from its block SVD.
pub fn coefficient_blocks(u: &BipartiteOperator, tol: &Tolerances) -> Result<Vec<CMatrix>> {
    let d = compute_block_svd(u, tol)?;
    let mut out = Vec::with_capacity(u.k());
    for t in &d.terms {
        let rank = crate::matcore::numeric_rank(&t.isom, tol);
        out.extend(std::iter::repeat(t.coeff.clone()).take(rank));
    }
    if out.len() != u.k() {
        return Err(Error::InternalInconsistency(format!(
            "isometry ranks sum to {}, expected {}",
            out.len(),
            u.k()
        )));
    }
    Ok(out)
}

fn push_complex(col: &mut Vec<f64>, m: &CMatrix) {
    for z in m.iter() {
        col.push(z.re);
        col.push(z.im);
    }
}

/// Real matrix whose columns are the images of the real basis of `M_d(C)`.
fn real_jacobian<F: Fn(&CMatrix) -> Vec<CMatrix>>(d: usize, map: F) -> DMatrix<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(2 * d * d);
    for p in 0..d {
        for q in 0..d {
            for unit in [ONE, I] {
                let mut a = CMatrix::zeros(d, d);
                a[(p, q)] = unit;
                let mut col = Vec::new();
                for m in map(&a) {
                    push_complex(&mut col, &m);
                }
                cols.push(col);
            }
        }
    }
    let rows = cols[0].len();
    DMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r])
}

/// Real dimension of `{A : UA* + AU* = 0, U^Γ(A^Γ)* + A^Γ(U^Γ)* = 0}`.
pub fn enveloping_dim_numeric(u: &BipartiteOperator, tol: &Tolerances) -> Result<usize> {
    let d = unitarity_defect(u.mat())?;
    if d > tol.eq_tol {
        return Err(Error::NotUnitary(d));
    }
    let ug = u.partial_transpose_b();
    let dg = unitarity_defect(ug.mat())?;
    if dg > tol.eq_tol {
        return Err(Error::NotUnitalMember(dg));
    }
    let shape = u.shape();
    let dim = shape.dim();
    let (um, ugm) = (u.mat(), ug.mat());
    let jac = real_jacobian(dim, |a| {
        let ag = crate::matcore::partial_transpose_b_raw(a, shape);
        vec![
            um * a.adjoint() + a * um.adjoint(),
            ugm * ag.adjoint() + &ag * ugm.adjoint(),
        ]
    });
    Ok(2 * dim * dim - numeric_rank_real(&jac, tol))
}

/// Analytic and numeric enveloping dimension at a block-diagonal unitary.
pub fn enveloping_report(u: &BipartiteOperator, tol: &Tolerances) -> Result<DimensionReport> {
    let numeric = enveloping_dim_numeric(u, tol)?;
    let blocks = coefficient_blocks(u, tol)?;
    let analytic = enveloping_dim_analytic(&blocks, tol)?;
    let generic = is_generic_position(&blocks, tol)?;
    Ok(DimensionReport::new(
        analytic,
        numeric,
        serde_json::json!({
            "mode": "enveloping",
            "n": u.n(),
            "k": u.k(),
            "generic_position": generic,
        }),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaValue {
    pub value: usize,
    pub conjecture: bool,
}

/// Closed-form dimensions with their special cases.
pub fn variety_dim_formulas(
    n: usize,
    k: usize,
) -> Result<std::collections::BTreeMap<String, FormulaValue>> {
    BipartiteShape::new(n, k)?;
    let exact = |value| FormulaValue {
        value,
        conjecture: false,
    };
    let block_a = if n == 1 {
        k * k
    } else {
        k * (n * n + 2 * k - 2)
    };
    let inter = if n.min(k) == 1 {
        (n * k) * (n * k)
    } else {
        2 * n * n + 2 * k * k + n * k - 2 * n - 2 * k
    };
    let mut out = std::collections::BTreeMap::new();
    out.insert("dim_U_block_diag_A".to_string(), exact(block_a));
    out.insert("dim_intersection".to_string(), exact(inter));
    out.insert(
        "dim_M_block_diag_A".to_string(),
        exact(2 * k * (n * n + k - 1)),
    );
    out.insert(
        "conjectured_dim_U_unital".to_string(),
        FormulaValue {
            value: k * n * n + n * k * k - n * k,
            conjecture: true,
        },
    );
    Ok(out)
}

/// A point of the parametrization `φ((A_i), E, F) = Σ A_i ⊗ e_i f_i*`.
struct MPoint {
    a: Vec<CMatrix>,
    e: CMatrix,
    f: CMatrix,
}

impl MPoint {
    fn phi(&self) -> CMatrix {
        let (n, k) = (self.a[0].nrows(), self.e.nrows());
        let mut out = CMatrix::zeros(n * k, n * k);
        for (i, ai) in self.a.iter().enumerate() {
            out += tensor(ai, &(self.e.column(i) * self.f.column(i).adjoint()));
        }
        out
    }
}

/// Real basis of the anti-Hermitian `k × k` matrices (`k²` elements).
fn anti_hermitian_basis(k: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(k * k);
    for p in 0..k {
        let mut h = CMatrix::zeros(k, k);
        h[(p, p)] = I;
        out.push(h);
        for q in p + 1..k {
            let mut re = CMatrix::zeros(k, k);
            re[(p, q)] = ONE;
            re[(q, p)] = -ONE;
            out.push(re);
            let mut im = CMatrix::zeros(k, k);
            im[(p, q)] = I;
            im[(q, p)] = I;
            out.push(im);
        }
    }
    out
}

/// Cayley curve `(I − tH/2)^{-1}(I + tH/2)`, unitary with derivative `H` at 0.
fn cayley(h: &CMatrix, t: f64) -> CMatrix {
    let k = h.nrows();
    let id = CMatrix::identity(k, k);
    let half = h * c64(t / 2.0, 0.0);
    (&id - &half)
        .try_inverse()
        .expect("anti-Hermitian shift is invertible")
        * (&id + half)
}

/// Tangent directions of all `2kn² + 2k²` real parameters, either exactly or
/// by central differences with step `h`.
fn mblockdiag_columns(p: &MPoint, step: Option<f64>) -> Vec<CMatrix> {
    let (n, k) = (p.a[0].nrows(), p.e.nrows());
    let mut cols = Vec::new();
    // A_i directions: the map is linear in A_i, so both modes agree exactly
    for i in 0..k {
        let ef = p.e.column(i) * p.f.column(i).adjoint();
        for r in 0..n {
            for c in 0..n {
                for unit in [ONE, I] {
                    let mut da = CMatrix::zeros(n, n);
                    da[(r, c)] = unit;
                    cols.push(tensor(&da, &ef));
                }
            }
        }
    }
    for h in anti_hermitian_basis(k) {
        for side in 0..2 {
            let col = match step {
                None => {
                    let (de, df) = if side == 0 {
                        (&p.e * &h, CMatrix::zeros(k, k))
                    } else {
                        (CMatrix::zeros(k, k), &p.f * &h)
                    };
                    let mut out = CMatrix::zeros(n * k, n * k);
                    for (i, ai) in p.a.iter().enumerate() {
                        let d = de.column(i) * p.f.column(i).adjoint()
                            + p.e.column(i) * df.column(i).adjoint();
                        out += tensor(ai, &d);
                    }
                    out
                }
                Some(s) => {
                    let moved = |t: f64| {
                        let g = cayley(&h, t);
                        let (e, f) = if side == 0 {
                            (&p.e * &g, p.f.clone())
                        } else {
                            (p.e.clone(), &p.f * &g)
                        };
                        MPoint {
                            a: p.a.clone(),
                            e,
                            f,
                        }
                        .phi()
                    };
                    (moved(s) - moved(-s)) * c64(0.5 / s, 0.0)
                }
            };
            cols.push(col);
        }
    }
    cols
}

fn columns_to_real(cols: &[CMatrix]) -> DMatrix<f64> {
    let flat: Vec<Vec<f64>> = cols
        .iter()
        .map(|m| {
            let mut v = Vec::new();
            push_complex(&mut v, m);
            v
        })
        .collect();
    DMatrix::from_fn(flat[0].len(), flat.len(), |r, c| flat[c][r])
}

fn random_mpoint(n: usize, k: usize, seed: u64) -> MPoint {
    let mut rng = rng_from_seed(seed);
    let a = (0..k).map(|_| ginibre(&mut rng, n, n)).collect();
    let e = haar_unitary_with(&mut rng, k);
    let f = haar_unitary_with(&mut rng, k);
    MPoint { a, e, f }
}

/// Relative singular value cutoff for the finite-difference Jacobian, whose
/// entries carry `O(step²)` truncation and `O(ε/step)` rounding error.
pub const FD_RANK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MblockdiagRanks {
    pub exact: usize,
    pub finite_difference: usize,
    pub parameters: usize,
}

/// Jacobian rank of `φ` at a seeded random point, from the exact differential
/// and from central differences with step `1e-6`.
pub fn mblockdiag_ranks(
    n: usize,
    k: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<MblockdiagRanks> {
    BipartiteShape::new(n, k)?;
    let p = random_mpoint(n, k, seed);
    let exact_cols = mblockdiag_columns(&p, None);
    let exact = numeric_rank_real(&columns_to_real(&exact_cols), tol);
    let fd = columns_to_real(&mblockdiag_columns(&p, Some(1e-6)));
    let sv = fd.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let finite_difference = sv.iter().filter(|&&s| s > FD_RANK_TOL * smax).count();
    Ok(MblockdiagRanks {
        exact,
        finite_difference,
        parameters: exact_cols.len(),
    })
}

pub fn mblockdiag_dim_numeric(n: usize, k: usize, seed: u64, tol: &Tolerances) -> Result<usize> {
    Ok(mblockdiag_ranks(n, k, seed, tol)?.exact)
}

pub fn mblockdiag_report(
    n: usize,
    k: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<DimensionReport> {
    let r = mblockdiag_ranks(n, k, seed, tol)?;
    let analytic = variety_dim_formulas(n, k)?["dim_M_block_diag_A"].value;
    Ok(DimensionReport::new(
        analytic,
        r.exact,
        serde_json::json!({
            "mode": "mblockdiag",
            "n": n,
            "k": k,
            "seed": seed,
            "finite_difference": r.finite_difference,
            "parameters": r.parameters,
        }),
    ))
}

/// Unused by the algorithms; handy when checking that a direction is tangent.
pub fn tangent_residual(u: &CMatrix, a: &CMatrix) -> f64 {
    let t = u * a.adjoint() + a * u.adjoint();
    hs_inner(&t, &t).re.sqrt()
}
