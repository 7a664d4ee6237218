//! Dense complex linear algebra and the bipartite primitives the rest of the
//! crate is built on.
//!
//! Index convention: on `C^n ⊗ C^k` the basis vector `e_i ⊗ f_s` has flat
//! index `i·k + s`, so the `(s, t)` entry of block `(i, j)` of a bipartite
//! matrix is `X[i·k + s, j·k + t]`. This is the ordering produced by
//! [`tensor`] (Kronecker product).

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Dense complex matrix. All operators, states and projections live here.
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };
pub const I: C64 = Complex { re: 0.0, im: 1.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Numerical tolerances shared by every test in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Entrywise (max-norm) comparison tolerance.
    pub eq_tol: f64,
    /// Two eigenvalues belong to the same cluster iff they are this close.
    pub spec_tol: f64,
    /// Relative singular value cutoff, in units of `max(rows, cols)·σ_max·ε`.
    pub rank_tol_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eq_tol: 1e-9,
            spec_tol: 1e-7,
            rank_tol_factor: 100.0,
        }
    }
}

impl Tolerances {
    pub fn new(eq_tol: f64, spec_tol: f64, rank_tol_factor: f64) -> Result<Self> {
        if !(eq_tol >= 0.0 && spec_tol >= 0.0 && rank_tol_factor >= 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be nonnegative".into(),
            ));
        }
        Ok(Tolerances {
            eq_tol,
            spec_tol,
            rank_tol_factor,
        })
    }

    /// `eq_tol` scaled by a magnitude, never below `eq_tol` itself.
    pub(crate) fn eq_scaled(&self, magnitude: f64) -> f64 {
        self.eq_tol * magnitude.max(1.0)
    }
}

/// Dimensions `(n, k)` of `H_A ⊗ H_B = C^n ⊗ C^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BipartiteShape {
    pub n: usize,
    pub k: usize,
}

impl BipartiteShape {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "shape ({n}, {k}) must have n, k ≥ 1"
            )));
        }
        Ok(BipartiteShape { n, k })
    }

    pub fn dim(&self) -> usize {
        self.n * self.k
    }

    pub fn swapped(&self) -> Self {
        BipartiteShape {
            n: self.k,
            k: self.n,
        }
    }
}

/// An `nk × nk` matrix together with the tensor split it is read in.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteOperator {
    shape: BipartiteShape,
    mat: CMatrix,
}

impl BipartiteOperator {
    pub fn new(shape: BipartiteShape, mat: CMatrix) -> Result<Self> {
        let d = shape.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Dimension(format!(
                "{}×{} matrix cannot carry shape ({}, {})",
                mat.nrows(),
                mat.ncols(),
                shape.n,
                shape.k
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix has non-finite entries".into()));
        }
        Ok(BipartiteOperator { shape, mat })
    }

    pub fn from_dims(n: usize, k: usize, mat: CMatrix) -> Result<Self> {
        Self::new(BipartiteShape::new(n, k)?, mat)
    }

    pub fn shape(&self) -> BipartiteShape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn k(&self) -> usize {
        self.shape.k
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    /// The `k × k` block `(i, j)`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let k = self.shape.k;
        self.mat.view((i * k, j * k), (k, k)).into_owned()
    }

    pub fn partial_trace_b(&self) -> CMatrix {
        partial_trace_b_raw(&self.mat, self.shape)
    }

    pub fn partial_transpose_b(&self) -> BipartiteOperator {
        BipartiteOperator {
            shape: self.shape,
            mat: partial_transpose_b_raw(&self.mat, self.shape),
        }
    }

    /// The same operator read on `C^k ⊗ C^n`.
    pub fn swap_factors(&self) -> BipartiteOperator {
        let BipartiteShape { n, k } = self.shape;
        let d = n * k;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..n {
            for s in 0..k {
                for j in 0..n {
                    for t in 0..k {
                        out[(s * n + i, t * n + j)] = self.mat[(i * k + s, j * k + t)];
                    }
                }
            }
        }
        BipartiteOperator {
            shape: self.shape.swapped(),
            mat: out,
        }
    }

    /// Realignment to an `n² × k²` matrix: `R[(i,j),(s,t)] = X[(i,s),(j,t)]`.
    pub fn realign(&self) -> CMatrix {
        let BipartiteShape { n, k } = self.shape;
        let mut r = CMatrix::zeros(n * n, k * k);
        for i in 0..n {
            for j in 0..n {
                for s in 0..k {
                    for t in 0..k {
                        r[(i * n + j, s * k + t)] = self.mat[(i * k + s, j * k + t)];
                    }
                }
            }
        }
        r
    }

    pub fn adjoint(&self) -> BipartiteOperator {
        BipartiteOperator {
            shape: self.shape,
            mat: self.mat.adjoint(),
        }
    }

    /// Operator product; shapes must agree.
    pub fn compose(&self, other: &BipartiteOperator) -> Result<BipartiteOperator> {
        if self.shape != other.shape {
            return Err(Error::Dimension(
                "cannot compose operators of different shapes".into(),
            ));
        }
        Ok(BipartiteOperator {
            shape: self.shape,
            mat: &self.mat * &other.mat,
        })
    }
}

/// Largest entry modulus.
pub fn max_abs(x: &CMatrix) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `‖a − b‖_max`; `∞` when the dimensions differ.
pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `e_i e_j*` in dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Column vector `e_i` in `C^d`.
pub fn basis_vector(d: usize, i: usize) -> CMatrix {
    let mut v = CMatrix::zeros(d, 1);
    v[(i, 0)] = ONE;
    v
}

/// Kronecker product; block `(i, j)` of the result is `a[i][j]·b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn partial_trace_b(x: &BipartiteOperator) -> CMatrix {
    x.partial_trace_b()
}

/// `Tr_A`, the complementary partial trace, `k × k`.
pub fn partial_trace_a(x: &BipartiteOperator) -> CMatrix {
    partial_trace_a_raw(x.mat(), x.shape())
}

pub fn partial_transpose_b(x: &BipartiteOperator) -> BipartiteOperator {
    x.partial_transpose_b()
}

pub(crate) fn partial_trace_b_raw(x: &CMatrix, shape: BipartiteShape) -> CMatrix {
    let BipartiteShape { n, k } = shape;
    CMatrix::from_fn(n, n, |i, j| (0..k).map(|s| x[(i * k + s, j * k + s)]).sum())
}

pub(crate) fn partial_trace_a_raw(x: &CMatrix, shape: BipartiteShape) -> CMatrix {
    let BipartiteShape { n, k } = shape;
    CMatrix::from_fn(k, k, |s, t| (0..n).map(|i| x[(i * k + s, i * k + t)]).sum())
}

pub(crate) fn partial_transpose_b_raw(x: &CMatrix, shape: BipartiteShape) -> CMatrix {
    let BipartiteShape { n, k } = shape;
    let d = n * k;
    CMatrix::from_fn(d, d, |r, c| {
        let (i, s) = (r / k, r % k);
        let (j, t) = (c / k, c % k);
        x[(i * k + t, j * k + s)]
    })
}

/// Swap operator `F_n (x ⊗ y) = y ⊗ x` on `C^n ⊗ C^n`.
pub fn flip(n: usize) -> CMatrix {
    let d = n * n;
    let mut f = CMatrix::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            f[(j * n + i, i * n + j)] = ONE;
        }
    }
    f
}

fn require_square(x: &CMatrix, what: &str) -> Result<()> {
    if x.nrows() != x.ncols() {
        return Err(Error::Dimension(format!(
            "{what}: {}×{} is not square",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

/// `max(‖XX* − I‖_max, ‖X*X − I‖_max)`.
pub fn unitarity_defect(x: &CMatrix) -> Result<f64> {
    require_square(x, "unitarity test")?;
    let id = CMatrix::identity(x.nrows(), x.ncols());
    let xa = x.adjoint();
    Ok(max_diff(&(x * &xa), &id).max(max_diff(&(&xa * x), &id)))
}

pub fn is_unitary(x: &CMatrix, tol: &Tolerances) -> Result<bool> {
    Ok(unitarity_defect(x)? <= tol.eq_tol)
}

pub fn hermiticity_defect(x: &CMatrix) -> f64 {
    max_diff(x, &x.adjoint())
}

pub fn normality_defect(x: &CMatrix) -> f64 {
    let xa = x.adjoint();
    max_diff(&(x * &xa), &(&xa * x))
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `x`.
pub fn hermitian_eigen(x: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (x + x.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(x.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(x: &CMatrix) -> f64 {
    if x.nrows() == 0 {
        return 0.0;
    }
    hermitian_eigen(x).0[0]
}

pub fn is_psd(x: &CMatrix, tol: &Tolerances) -> Result<bool> {
    require_square(x, "PSD test")?;
    if hermiticity_defect(x) > tol.eq_tol {
        return Ok(false);
    }
    Ok(min_hermitian_eigenvalue(x) >= -tol.eq_tol)
}

/// One cluster of a spectral decomposition.
#[derive(Clone, Debug)]
pub struct SpectralTerm {
    pub value: C64,
    pub multiplicity: usize,
    pub projector: CMatrix,
}

/// Single-linkage clustering with threshold `tol`; clusters are returned in
/// lexicographic `(Re, Im)` order of their means.
pub fn cluster_values(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let m = values.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for a in 0..m {
        for b in a + 1..m {
            if (values[a] - values[b]).norm() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of_group: Vec<usize> = Vec::new();
    for i in 0..m {
        let r = find(&mut parent, i);
        match root_of_group.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(i),
            None => {
                root_of_group.push(r);
                groups.push(vec![i]);
            }
        }
    }
    let mean = |g: &Vec<usize>| g.iter().map(|&i| values[i]).sum::<C64>() / g.len() as f64;
    groups.sort_by(|a, b| {
        let (ma, mb) = (mean(a), mean(b));
        ma.re.total_cmp(&mb.re).then(ma.im.total_cmp(&mb.im))
    });
    groups
}

/// Orthonormal eigenbasis of a normal matrix: `(eigenvalues, Q)` with
/// `x ≈ Q diag(λ) Q*`. Hermitian input takes the symmetric solver; anything
/// else goes through the complex Schur form, which is diagonal for normal
/// matrices.
pub fn normal_eigen(x: &CMatrix, tol: &Tolerances) -> Result<(Vec<C64>, CMatrix)> {
    require_square(x, "spectral decomposition")?;
    let scale = max_abs(x);
    let defect = normality_defect(x);
    if defect > tol.eq_scaled(scale * scale) {
        return Err(Error::NotNormal(defect));
    }
    if hermiticity_defect(x) <= tol.eq_scaled(scale) {
        let (vals, vecs) = hermitian_eigen(x);
        return Ok((vals.into_iter().map(|v| c64(v, 0.0)).collect(), vecs));
    }
    let schur = nalgebra::Schur::try_new(x.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::NotNormal(f64::NAN))?;
    let (q, t) = schur.unpack();
    Ok(((0..t.nrows()).map(|i| t[(i, i)]).collect(), q))
}

/// Spectral decomposition `x = Σ λ_i P_i` of a normal matrix with clustered
/// eigenvalues.
pub fn spectral_decomp(x: &CMatrix, tol: &Tolerances) -> Result<Vec<SpectralTerm>> {
    let (vals, q) = normal_eigen(x, tol)?;
    Ok(cluster_values(&vals, tol.spec_tol)
        .into_iter()
        .map(|g| {
            let cols = CMatrix::from_fn(q.nrows(), g.len(), |r, c| q[(r, g[c])]);
            SpectralTerm {
                value: g.iter().map(|&i| vals[i]).sum::<C64>() / g.len() as f64,
                multiplicity: g.len(),
                projector: &cols * cols.adjoint(),
            }
        })
        .collect())
}

/// Singular values in nonincreasing order; `min(rows, cols)` of them.
pub fn singular_values(x: &CMatrix) -> Vec<f64> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = x
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank cutoff `rank_tol_factor · max(rows, cols) · σ_max · ε`.
pub fn rank_cutoff(sv_max: f64, rows: usize, cols: usize, tol: &Tolerances) -> f64 {
    tol.rank_tol_factor * rows.max(cols) as f64 * sv_max * f64::EPSILON
}

pub fn rank_from_singular_values(sv: &[f64], rows: usize, cols: usize, tol: &Tolerances) -> usize {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let cut = rank_cutoff(smax, rows, cols, tol);
    sv.iter().filter(|&&s| s > cut).count()
}

pub fn numeric_rank(x: &CMatrix, tol: &Tolerances) -> usize {
    rank_from_singular_values(&singular_values(x), x.nrows(), x.ncols(), tol)
}

/// Numeric rank of a real matrix, same cutoff rule.
pub fn numeric_rank_real(x: &DMatrix<f64>, tol: &Tolerances) -> usize {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0;
    }
    let sv: Vec<f64> = x
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    rank_from_singular_values(&sv, x.nrows(), x.ncols(), tol)
}

/// One term `w · a ⊗ b` of an operator-Schmidt decomposition.
#[derive(Clone, Debug)]
pub struct SchmidtTerm {
    pub weight: f64,
    pub a: CMatrix,
    pub b: CMatrix,
}

/// `x = Σ w_i a_i ⊗ b_i` with Hilbert–Schmidt orthonormal `a_i`, `b_i` and
/// nonincreasing weights, from the SVD of the realignment. Terms below the
/// default rank cutoff are dropped.
pub fn operator_schmidt(x: &BipartiteOperator) -> Vec<SchmidtTerm> {
    operator_schmidt_with(x, &Tolerances::default())
}

pub fn operator_schmidt_with(x: &BipartiteOperator, tol: &Tolerances) -> Vec<SchmidtTerm> {
    let BipartiteShape { n, k } = x.shape();
    let r = x.realign();
    let svd = r.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = rank_from_singular_values(&sv, r.nrows(), r.ncols(), tol);
    order
        .into_iter()
        .take(rank)
        .map(|idx| SchmidtTerm {
            weight: svd.singular_values[idx],
            a: CMatrix::from_fn(n, n, |i, j| u[(i * n + j, idx)]),
            // R = Σ w u v*, and v* is the row of v_t
            b: CMatrix::from_fn(k, k, |s, t| vt[(idx, s * k + t)]),
        })
        .collect()
}

/// Unimodular phase of the largest-modulus entry, scanning row-major; entries
/// within a relative `1e-6` of the maximum count as ties and the first wins.
pub fn leading_phase(x: &CMatrix) -> C64 {
    let m = max_abs(x);
    if m == 0.0 {
        return ONE;
    }
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let z = x[(i, j)];
            if z.norm() >= m * (1.0 - 1e-6) {
                return z / z.norm();
            }
        }
    }
    ONE
}

/// Orthonormality defect `‖B*B − I‖_max` of the columns of `b`.
pub fn orthonormality_defect(b: &CMatrix) -> f64 {
    max_diff(&(b.adjoint() * b), &CMatrix::identity(b.ncols(), b.ncols()))
}

/// Orthonormal basis of the column space of `x` (rank by the default cutoff).
pub fn range_basis(x: &CMatrix, tol: &Tolerances) -> CMatrix {
    let svd = x.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let r = rank_from_singular_values(&sv, x.nrows(), x.ncols(), tol);
    CMatrix::from_fn(x.nrows(), r, |row, c| u[(row, order[c])])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_fn(
            v.len(),
            v.len(),
            |i, j| if i == j { c64(v[i], 0.0) } else { ZERO },
        )
    }

    fn pseudo_random(r: usize, c: usize, salt: u64) -> CMatrix {
        // cheap deterministic filler, independent of the generate module
        let mut s = salt
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        CMatrix::from_fn(r, c, |_, _| {
            let mut next = || {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            c64(next(), next())
        })
    }

    #[test]
    fn identity_tensor_identity() {
        let out = tensor(&CMatrix::identity(2, 2), &CMatrix::identity(3, 3));
        assert_eq!(out, CMatrix::identity(6, 6));
    }

    #[test]
    fn projector_tensor_places_block() {
        let x = pseudo_random(2, 2, 3);
        let out = tensor(&matrix_unit(2, 0, 0), &x);
        assert_eq!(out.view((0, 0), (2, 2)).into_owned(), x);
        for r in 0..4 {
            for c in 0..4 {
                if r >= 2 || c >= 2 {
                    assert_eq!(out[(r, c)], ZERO);
                }
            }
        }
    }

    #[test]
    fn tensor_matches_quadruple_loop() {
        let (a, b) = (pseudo_random(3, 2, 1), pseudo_random(2, 4, 2));
        let out = tensor(&a, &b);
        assert_eq!(out.shape(), (6, 8));
        for i in 0..3 {
            for j in 0..2 {
                for s in 0..2 {
                    for t in 0..4 {
                        assert_eq!(out[(i * 2 + s, j * 4 + t)], a[(i, j)] * b[(s, t)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let (a, b) = (pseudo_random(2, 2, 4), pseudo_random(3, 3, 5));
        let x = BipartiteOperator::from_dims(2, 3, tensor(&a, &b)).unwrap();
        assert!(max_diff(&x.partial_trace_b(), &(&a * trace(&b))) < 1e-14);

        let id = BipartiteOperator::from_dims(3, 4, CMatrix::identity(12, 12)).unwrap();
        assert!(
            max_diff(
                &id.partial_trace_b(),
                &(CMatrix::identity(3, 3) * c64(4.0, 0.0))
            ) < 1e-15
        );

        let f = BipartiteOperator::from_dims(2, 2, flip(2)).unwrap();
        assert_eq!(f.partial_trace_b(), CMatrix::identity(2, 2));
        assert!(max_diff(&partial_trace_a(&x), &(&b * trace(&a))) < 1e-14);
    }

    #[test]
    fn partial_transpose_examples() {
        let (a, b) = (pseudo_random(2, 2, 6), pseudo_random(3, 3, 7));
        let x = BipartiteOperator::from_dims(2, 3, tensor(&a, &b)).unwrap();
        assert!(max_diff(x.partial_transpose_b().mat(), &tensor(&a, &b.transpose())) < 1e-15);

        let y = BipartiteOperator::from_dims(3, 2, pseudo_random(6, 6, 8)).unwrap();
        assert_eq!(y.partial_transpose_b().partial_transpose_b(), y);

        // F_2^Γ is the unnormalized maximally entangled matrix Σ e_ie_j* ⊗ e_ie_j*
        let f = BipartiteOperator::from_dims(2, 2, flip(2)).unwrap();
        let mut omega = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                omega += tensor(&matrix_unit(2, i, j), &matrix_unit(2, i, j));
            }
        }
        assert_eq!(f.partial_transpose_b().into_mat(), omega);
    }

    #[test]
    fn flip_examples() {
        assert_eq!(flip(1), CMatrix::identity(1, 1));
        let v = tensor(&basis_vector(2, 0), &basis_vector(2, 1));
        assert_eq!(
            flip(2) * v,
            tensor(&basis_vector(2, 1), &basis_vector(2, 0))
        );
        let (a, b) = (pseudo_random(3, 3, 9), pseudo_random(3, 3, 10));
        let f = flip(3);
        assert!(max_diff(&(&f * tensor(&a, &b) * &f), &tensor(&b, &a)) < 1e-14);
        assert_eq!(&f * &f, CMatrix::identity(9, 9));
        assert_eq!(f.transpose(), f);
    }

    #[test]
    fn unitary_and_psd_basics() {
        let tol = Tolerances::default();
        assert!(is_unitary(&CMatrix::identity(5, 5), &tol).unwrap());
        assert!(!is_unitary(&diag(&[1.0, 2.0]), &tol).unwrap());
        assert!(is_unitary(&CMatrix::zeros(2, 3), &tol).is_err());

        assert!(is_psd(&CMatrix::identity(3, 3), &tol).unwrap());
        assert!(!is_psd(&diag(&[1.0, -0.5]), &tol).unwrap());
        let g = pseudo_random(4, 2, 11);
        assert!(is_psd(&(&g * g.adjoint()), &tol).unwrap());
        assert!(is_psd(&CMatrix::zeros(2, 1), &tol).is_err());
    }

    #[test]
    fn spectral_decomp_examples() {
        let tol = Tolerances::default();
        let terms = spectral_decomp(&CMatrix::identity(3, 3), &tol).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].value - ONE).norm() < 1e-12);
        assert!(max_diff(&terms[0].projector, &CMatrix::identity(3, 3)) < 1e-12);

        let terms = spectral_decomp(&diag(&[1.0, -1.0, -1.0]), &tol).unwrap();
        assert_eq!(terms.len(), 2);
        assert!((terms[0].value + ONE).norm() < 1e-12);
        assert!(max_diff(&terms[0].projector, &diag(&[0.0, 1.0, 1.0])) < 1e-12);
        assert!((terms[1].value - ONE).norm() < 1e-12);
        assert!(max_diff(&terms[1].projector, &diag(&[1.0, 0.0, 0.0])) < 1e-12);
    }

    #[test]
    fn spectral_decomp_rejects_non_normal() {
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = ONE;
        assert!(matches!(
            spectral_decomp(&x, &Tolerances::default()),
            Err(Error::NotNormal(_))
        ));
    }

    #[test]
    fn singular_values_and_rank() {
        let tol = Tolerances::default();
        assert_eq!(singular_values(&CMatrix::identity(4, 4)), vec![1.0; 4]);
        let u = pseudo_random(4, 1, 12);
        let v = pseudo_random(4, 1, 13);
        let (u, v) = (&u / c64(u.norm(), 0.0), &v / c64(v.norm(), 0.0));
        let sv = singular_values(&(&u * v.adjoint()));
        assert!((sv[0] - 1.0).abs() < 1e-14);
        assert!(sv[1..].iter().all(|&s| s < 1e-14));

        assert_eq!(numeric_rank(&CMatrix::zeros(3, 3), &tol), 0);
        assert_eq!(numeric_rank(&CMatrix::identity(5, 5), &tol), 5);
        let noise = pseudo_random(4, 4, 14) * c64(1e-14, 0.0);
        assert_eq!(numeric_rank(&(&u * v.adjoint() + noise), &tol), 1);
    }

    #[test]
    fn operator_schmidt_examples() {
        let v = crate::generate::haar_unitary(2, 1);
        let w = crate::generate::haar_unitary(3, 2);
        let x = BipartiteOperator::from_dims(2, 3, tensor(&v, &w)).unwrap();
        let terms = operator_schmidt(&x);
        assert_eq!(terms.len(), 1);
        assert!((terms[0].weight - 6f64.sqrt()).abs() < 1e-12);

        let f = BipartiteOperator::from_dims(2, 2, flip(2)).unwrap();
        let terms = operator_schmidt(&f);
        assert_eq!(terms.len(), 4);
        assert!(terms.iter().all(|t| (t.weight - 1.0).abs() < 1e-12));
    }
}
