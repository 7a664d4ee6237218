//! Block-diagonal SVD `X = Σ X_i ⊗ R_i` with partial isometries `R_i` whose
//! initial and final projections are mutually orthogonal.
//!
//! Existence is decided through the block families `{X_α X_β*}` and
//! `{X_α* X_β}`: a decomposition exists iff both consist of commuting normal
//! matrices. The decomposition is then read off their joint eigenprojectors.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::generate::{complex_gaussian, rng_from_seed};
use crate::matcore::{
    c64, hermitian_eigen, hs_inner, hs_norm, leading_phase, matrix_unit, max_abs, max_diff,
    orthonormality_defect, tensor, trace, BipartiteOperator, BipartiteShape, CMatrix, Tolerances,
    C64,
};

/// Seed of the random Hermitian combinations used when none is supplied.
pub const DEFAULT_SEED: u64 = 0x00b1_0c5d;

/// Cap on the number of recorded family violations.
pub const MAX_VIOLATIONS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockTerm {
    pub coeff: CMatrix,
    pub isom: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSVD {
    pub shape: BipartiteShape,
    pub terms: Vec<BlockTerm>,
}

impl BlockSVD {
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.shape.dim();
        self.terms.iter().fold(CMatrix::zeros(d, d), |acc, t| {
            acc + tensor(&t.coeff, &t.isom)
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest violation of the partial-isometry and mutual-orthogonality
    /// conditions on the `R_i`.
    pub fn isometry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, ta) in self.terms.iter().enumerate() {
            let r = &ta.isom;
            let init = r.adjoint() * r;
            let fin = r * r.adjoint();
            worst = worst.max(max_diff(&(&init * &init), &init));
            worst = worst.max(max_diff(&(&fin * &fin), &fin));
            for tb in &self.terms[..a] {
                worst = worst.max(max_abs(&(r.adjoint() * &tb.isom)));
                worst = worst.max(max_abs(&(r * tb.isom.adjoint())));
            }
        }
        worst
    }
}

/// `X = Σ_α E_α ⊗ X_α` for a Hilbert–Schmidt orthonormal basis `{E_α}`.
#[derive(Clone, Debug)]
pub struct BlockBasisExpansion {
    pub basis: Vec<CMatrix>,
    pub blocks: Vec<CMatrix>,
}

impl BlockBasisExpansion {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.basis.first().map_or(0, |e| e.nrows());
        let k = self.blocks.first().map_or(0, |b| b.nrows());
        self.basis
            .iter()
            .zip(&self.blocks)
            .fold(CMatrix::zeros(n * k, n * k), |acc, (e, b)| {
                acc + tensor(e, b)
            })
    }
}

/// Matrix units `e_ie_j*` in row-major order of `(i, j)`.
pub fn matrix_unit_basis(n: usize) -> Vec<CMatrix> {
    (0..n * n).map(|a| matrix_unit(n, a / n, a % n)).collect()
}

/// `X_α = [Tr ⊗ id](X · (E_α* ⊗ I_k))`; with the default matrix-unit basis
/// `X_{(i,j)}` is block `(i, j)` of `X`.
pub fn expand(
    x: &BipartiteOperator,
    basis: Option<&[CMatrix]>,
    tol: &Tolerances,
) -> Result<BlockBasisExpansion> {
    let BipartiteShape { n, k } = x.shape();
    let Some(basis) = basis else {
        let blocks = (0..n * n).map(|a| x.block(a / n, a % n)).collect();
        return Ok(BlockBasisExpansion {
            basis: matrix_unit_basis(n),
            blocks,
        });
    };
    if basis.len() != n * n || basis.iter().any(|e| e.shape() != (n, n)) {
        return Err(Error::Dimension(format!(
            "basis must consist of {} matrices of size {n}×{n}",
            n * n
        )));
    }
    let gram = CMatrix::from_fn(n * n, n * n, |a, b| hs_inner(&basis[a], &basis[b]));
    let defect = max_diff(&gram, &CMatrix::identity(n * n, n * n));
    if defect > tol.eq_tol * n as f64 {
        return Err(Error::NonOrthonormalBasis(defect));
    }
    let blocks = basis
        .iter()
        .map(|e| {
            // [Tr ⊗ id](X (E* ⊗ I)) summed block by block
            let mut out = CMatrix::zeros(k, k);
            for i in 0..n {
                for j in 0..n {
                    let w = e[(i, j)].conj();
                    if w != c64(0.0, 0.0) {
                        out += x.block(i, j) * w;
                    }
                }
            }
            out
        })
        .collect();
    Ok(BlockBasisExpansion {
        basis: basis.to_vec(),
        blocks,
    })
}

/// Which of the two block families a violation was found in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `{X_α X_β*}`
    Left,
    /// `{X_α* X_β}`
    Right,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Left => "X_a X_b*",
            Family::Right => "X_a* X_b",
        }
    }
}

/// Two members of one family that fail to commute: `[M_{αβ}, M_{γδ}]`.
/// A non-normal member `M_{αβ}` shows up as the pair `(αβ, βα)`, since the
/// family is closed under adjoints. Indices are row-major flat basis indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorWitness {
    pub family: Family,
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub norm: f64,
}

impl CommutatorWitness {
    /// `((α, β), (γ, δ))` with each index split into `(i, j)`.
    pub fn split(&self, n: usize) -> [(usize, usize); 4] {
        let s = |a: usize| (a / n, a % n);
        [
            s(self.first.0),
            s(self.first.1),
            s(self.second.0),
            s(self.second.1),
        ]
    }

    /// Human label, 1-based: e.g. `X11 X22* vs X12 X22*`.
    pub fn describe(&self, n: usize) -> String {
        let [a, b, c, d] = self.split(n);
        let name = |p: (usize, usize)| format!("X{}{}", p.0 + 1, p.1 + 1);
        let member = |x: (usize, usize), y: (usize, usize)| match self.family {
            Family::Left => format!("{} {}*", name(x), name(y)),
            Family::Right => format!("{}* {}", name(x), name(y)),
        };
        format!(
            "{} vs {} (‖[·,·]‖ = {:.3e})",
            member(a, b),
            member(c, d),
            self.norm
        )
    }
}

impl fmt::Display for CommutatorWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} {:?} vs {:?}: {:.3e}",
            self.family, self.first, self.second, self.norm
        )
    }
}

#[derive(Clone, Debug)]
pub struct BlockSvdCheck {
    pub holds: bool,
    /// Smallest violating tuple, in the order family, `(α, β)`, `(γ, δ)`.
    pub witness: Option<CommutatorWitness>,
    /// Up to [`MAX_VIOLATIONS`] violations in scan order.
    pub violations: Vec<CommutatorWitness>,
}

fn family_member(blocks: &[CMatrix], fam: Family, a: usize, b: usize) -> CMatrix {
    match fam {
        Family::Left => &blocks[a] * blocks[b].adjoint(),
        Family::Right => blocks[a].adjoint() * &blocks[b],
    }
}

/// Half of each family (`α ≤ β`); the rest are adjoints.
fn half_family(blocks: &[CMatrix], fam: Family) -> Vec<CMatrix> {
    let m = blocks.len();
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for a in 0..m {
        for b in a..m {
            out.push(family_member(blocks, fam, a, b));
        }
    }
    out
}

fn blocks_scale(blocks: &[CMatrix]) -> f64 {
    blocks.iter().map(max_abs).fold(0.0, f64::max)
}

/// Exhaustive scan of both families for commutator violations.
fn scan_families(blocks: &[CMatrix], tol: &Tolerances) -> Vec<CommutatorWitness> {
    let m = blocks.len();
    let s = blocks_scale(blocks);
    let thresh = tol.eq_scaled(s.powi(4));
    let mut out = Vec::new();
    for fam in [Family::Left, Family::Right] {
        let members: Vec<CMatrix> = (0..m * m)
            .map(|p| family_member(blocks, fam, p / m, p % m))
            .collect();
        for p in 0..m * m {
            for q in p + 1..m * m {
                let c = &members[p] * &members[q] - &members[q] * &members[p];
                let norm = max_abs(&c);
                if norm > thresh {
                    out.push(CommutatorWitness {
                        family: fam,
                        first: (p / m, p % m),
                        second: (q / m, q % m),
                        norm,
                    });
                    if out.len() >= MAX_VIOLATIONS {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// Existence test on a list of blocks `X_α` (any orthonormal basis).
pub fn check_blocks(blocks: &[CMatrix], tol: &Tolerances) -> BlockSvdCheck {
    let fast = [Family::Left, Family::Right]
        .iter()
        .all(|&fam| joint_clusters(&half_family(blocks, fam), tol, DEFAULT_SEED).is_ok());
    if fast {
        return BlockSvdCheck {
            holds: true,
            witness: None,
            violations: Vec::new(),
        };
    }
    let violations = scan_families(blocks, tol);
    BlockSvdCheck {
        holds: violations.is_empty(),
        witness: violations.first().cloned(),
        violations,
    }
}

/// Decide whether `x` has a block-diagonal SVD with respect to the B factor.
pub fn has_block_svd(x: &BipartiteOperator, tol: &Tolerances) -> BlockSvdCheck {
    let exp = expand(x, None, tol).expect("matrix units are orthonormal");
    check_blocks(&exp.blocks, tol)
}

/// Same test on the blocks of a custom orthonormal basis.
pub fn has_block_svd_in_basis(
    x: &BipartiteOperator,
    basis: &[CMatrix],
    tol: &Tolerances,
) -> Result<BlockSvdCheck> {
    Ok(check_blocks(&expand(x, Some(basis), tol)?.blocks, tol))
}

/// A joint eigenspace: orthonormal columns plus each member's eigenvalue on it.
#[derive(Clone, Debug)]
pub(crate) struct JointCluster {
    pub basis: CMatrix,
    pub values: Vec<C64>,
}

impl JointCluster {
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

fn random_hermitian_combination<R: Rng>(family: &[CMatrix], rng: &mut R) -> CMatrix {
    let d = family[0].nrows();
    let mut h = CMatrix::zeros(d, d);
    for m in family {
        let c = complex_gaussian(rng);
        let ma = m.adjoint();
        h += (m + &ma) * c64(c.re, 0.0) + (m - &ma) * c64(0.0, c.im);
    }
    (&h + h.adjoint()) * c64(0.5, 0.0)
}

fn restricted_scalar(m: &CMatrix, q: &CMatrix) -> (C64, f64) {
    let r = q.adjoint() * m * q;
    let d = r.nrows();
    let c = trace(&r) / d as f64;
    (c, max_diff(&r, &(CMatrix::identity(d, d) * c)))
}

fn lex_cmp(a: &[C64], b: &[C64], eps: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x.re - y.re).abs() > eps {
            return x.re.total_cmp(&y.re);
        }
        if (x.im - y.im).abs() > eps {
            return x.im.total_cmp(&y.im);
        }
    }
    Ordering::Equal
}

/// Finest joint eigenspace resolution of a commuting normal family, by random
/// Hermitian combinations with cluster refinement. Verifies every member is
/// reproduced by its eigenvalues before returning.
pub(crate) fn joint_clusters(
    family: &[CMatrix],
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<JointCluster>> {
    let Some(first) = family.first() else {
        return Err(Error::Dimension("empty family".into()));
    };
    let d = first.nrows();
    if family.iter().any(|m| m.shape() != (d, d)) {
        return Err(Error::Dimension(
            "family members must be square of equal size".into(),
        ));
    }
    let scale = family.iter().map(max_abs).fold(0.0, f64::max);
    let eq = tol.eq_scaled(scale);
    let mut rng = rng_from_seed(seed);

    let mut done: Vec<CMatrix> = Vec::new();
    let mut pending = vec![CMatrix::identity(d, d)];
    let mut stalls = 0;
    while let Some(q) = pending.pop() {
        let worst = family
            .iter()
            .map(|m| restricted_scalar(m, &q).1)
            .fold(0.0, f64::max);
        if worst <= eq {
            done.push(q);
            continue;
        }
        let restricted: Vec<CMatrix> = family.iter().map(|m| q.adjoint() * m * &q).collect();
        let h = random_hermitian_combination(&restricted, &mut rng);
        let (vals, vecs) = hermitian_eigen(&h);
        let hscale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cvals: Vec<C64> = vals.iter().map(|&v| c64(v, 0.0)).collect();
        let groups = crate::matcore::cluster_values(&cvals, tol.spec_tol * hscale.max(1.0));
        if groups.len() == 1 {
            stalls += 1;
            if stalls > 8 {
                return Err(Error::NotCommutingFamily(worst));
            }
            pending.push(q);
            continue;
        }
        for g in groups {
            let sub = CMatrix::from_fn(vecs.nrows(), g.len(), |r, c| vecs[(r, g[c])]);
            pending.push(&q * sub);
        }
    }

    let mut clusters: Vec<JointCluster> = done
        .into_iter()
        .map(|q| {
            let values = family.iter().map(|m| restricted_scalar(m, &q).0).collect();
            JointCluster { basis: q, values }
        })
        .collect();

    // each member must equal Σ c_i P_i, which rules out missed off-diagonal parts
    for (f, m) in family.iter().enumerate() {
        let rebuilt = clusters.iter().fold(CMatrix::zeros(d, d), |acc, c| {
            acc + c.projector() * c.values[f]
        });
        let defect = max_diff(&rebuilt, m);
        if defect > eq * 10.0 {
            return Err(Error::NotCommutingFamily(defect));
        }
    }
    let eps = tol.spec_tol * scale.max(1.0);
    clusters.sort_by(|a, b| lex_cmp(&a.values, &b.values, eps));
    Ok(clusters)
}

/// Finest common eigenprojectors `{P_i}` of a commuting normal family, with
/// `Σ P_i = I`, ordered lexicographically by the tuple of member eigenvalues.
pub fn joint_diagonalize(family: &[CMatrix], tol: &Tolerances) -> Result<Vec<CMatrix>> {
    Ok(joint_clusters(family, tol, DEFAULT_SEED)?
        .iter()
        .map(JointCluster::projector)
        .collect())
}

fn nonzero_clusters(family: &[CMatrix], tol: &Tolerances, seed: u64) -> Result<Vec<JointCluster>> {
    let scale = family.iter().map(max_abs).fold(0.0, f64::max);
    let eq = tol.eq_scaled(scale);
    Ok(joint_clusters(family, tol, seed)?
        .into_iter()
        .filter(|c| c.values.iter().any(|v| v.norm() > eq))
        .collect())
}

pub fn compute_block_svd(x: &BipartiteOperator, tol: &Tolerances) -> Result<BlockSVD> {
    compute_block_svd_seeded(x, tol, DEFAULT_SEED)
}

/// Construct the block-diagonal SVD. `seed` drives the random combinations
/// used for joint diagonalization and isometry extraction; the result is
/// independent of it up to `∼` and term order.
pub fn compute_block_svd_seeded(
    x: &BipartiteOperator,
    tol: &Tolerances,
    seed: u64,
) -> Result<BlockSVD> {
    let BipartiteShape { n, k } = x.shape();
    let exp = expand(x, None, tol)?;
    let blocks = &exp.blocks;
    let check = check_blocks(blocks, tol);
    if !check.holds {
        let w = check.witness.map(|w| w.describe(n)).unwrap_or_default();
        return Err(Error::NotBlockDiagonal(w));
    }
    let scale = max_abs(x.mat()).max(1.0);
    let eq = tol.eq_scaled(scale);

    let left = nonzero_clusters(&half_family(blocks, Family::Left), tol, seed)
        .map_err(|e| Error::NotBlockDiagonal(e.to_string()))?;
    let right = nonzero_clusters(
        &half_family(blocks, Family::Right),
        tol,
        seed.wrapping_add(1),
    )
    .map_err(|e| Error::NotBlockDiagonal(e.to_string()))?;
    if left.len() != right.len() {
        return Err(Error::PairingAmbiguity(format!(
            "{} final projections but {} initial projections",
            left.len(),
            right.len()
        )));
    }

    // pair P_i with the Q_j carrying the weight Σ_α ‖P_i X_α Q_j‖²
    let weights: Vec<Vec<f64>> = left
        .iter()
        .map(|p| {
            let pp = p.projector();
            right
                .iter()
                .map(|q| {
                    let qq = q.projector();
                    blocks
                        .iter()
                        .map(|xa| hs_norm(&(&pp * xa * &qq)).powi(2))
                        .sum()
                })
                .collect()
        })
        .collect();
    let total: f64 = weights.iter().flatten().sum();
    let negligible = eq * eq * (n * n) as f64 + total * tol.spec_tol;
    let mut partner = vec![usize::MAX; left.len()];
    let mut taken = vec![false; right.len()];
    for (i, row) in weights.iter().enumerate() {
        let hits: Vec<usize> = (0..row.len()).filter(|&j| row[j] > negligible).collect();
        if hits.len() != 1 || taken[hits[0]] {
            return Err(Error::PairingAmbiguity(format!(
                "final projection {i} overlaps initial projections {hits:?}"
            )));
        }
        let j = hits[0];
        if left[i].basis.ncols() != right[j].basis.ncols() {
            return Err(Error::PairingAmbiguity(format!(
                "paired projections {i} ↔ {j} have ranks {} and {}",
                left[i].basis.ncols(),
                right[j].basis.ncols()
            )));
        }
        taken[j] = true;
        partner[i] = j;
    }

    let mut rng = rng_from_seed(seed.wrapping_add(2));
    let mut terms = Vec::with_capacity(left.len());
    for (i, p) in left.iter().enumerate() {
        let (pp, qq) = (p.projector(), right[partner[i]].projector());
        let d = p.basis.ncols() as f64;
        let combo = blocks.iter().fold(CMatrix::zeros(k, k), |acc, xa| {
            acc + xa * complex_gaussian(&mut rng)
        });
        let y = &pp * combo * &qq;
        let ynorm = hs_norm(&y);
        if ynorm <= eq {
            return Err(Error::InternalInconsistency(
                "random combination vanished on a paired block".into(),
            ));
        }
        let isom = y * c64(d.sqrt() / ynorm, 0.0);
        let coeff = CMatrix::from_fn(n, n, |a, b| {
            trace(&(isom.adjoint() * &blocks[a * n + b])) / d
        });
        if hs_norm(&coeff) > eq {
            terms.push(BlockTerm { coeff, isom });
        }
    }

    let out = merge_equivalent(
        BlockSVD {
            shape: x.shape(),
            terms,
        },
        tol,
    );
    let residual = max_diff(&out.reconstruct(), x.mat());
    if residual > 10.0 * eq {
        return Err(Error::Reconstruction(residual));
    }
    Ok(out)
}

/// `X_i ∼ X_j` when they differ by a unimodular factor.
pub fn phase_equivalent(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Option<C64> {
    let (na, nb) = (hs_norm(a), hs_norm(b));
    let scale = na.max(nb).max(1.0);
    if (na - nb).abs() > tol.spec_tol * scale || na == 0.0 {
        return None;
    }
    let mu = hs_inner(a, b) / (na * na);
    if (mu.norm() - 1.0).abs() > tol.spec_tol || max_diff(&(a * mu), b) > tol.spec_tol * scale {
        return None;
    }
    Some(mu / mu.norm())
}

/// Merge terms whose coefficients are phase-equivalent: `X ⊗ R + μX ⊗ R'`
/// becomes `X ⊗ (R + μR')`.
pub fn merge_equivalent(d: BlockSVD, tol: &Tolerances) -> BlockSVD {
    let mut merged: Vec<BlockTerm> = Vec::new();
    'outer: for t in d.terms {
        for m in merged.iter_mut() {
            if let Some(mu) = phase_equivalent(&m.coeff, &t.coeff, tol) {
                m.isom += &t.isom * mu;
                continue 'outer;
            }
        }
        merged.push(t);
    }
    BlockSVD {
        shape: d.shape,
        terms: merged,
    }
}

fn entry_cmp(a: &CMatrix, b: &CMatrix, eps: f64) -> Ordering {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            if (x.re - y.re).abs() > eps {
                return x.re.total_cmp(&y.re);
            }
            if (x.im - y.im).abs() > eps {
                return x.im.total_cmp(&y.im);
            }
        }
    }
    Ordering::Equal
}

/// Fix the gauge of every term (largest coefficient entry real positive, the
/// phase moved onto the isometry) and sort terms by descending HS norm, then
/// lexicographically by coefficient entries.
pub fn canonicalize(d: &BlockSVD) -> BlockSVD {
    let mut terms: Vec<BlockTerm> = d
        .terms
        .iter()
        .map(|t| {
            let ph = leading_phase(&t.coeff);
            BlockTerm {
                coeff: &t.coeff * ph.conj(),
                isom: &t.isom * ph,
            }
        })
        .collect();
    let eps = 1e-6;
    terms.sort_by(|a, b| {
        let (na, nb) = (hs_norm(&a.coeff), hs_norm(&b.coeff));
        if (na - nb).abs() > eps * na.max(nb).max(1.0) {
            nb.total_cmp(&na)
        } else {
            entry_cmp(&a.coeff, &b.coeff, eps)
        }
    });
    BlockSVD {
        shape: d.shape,
        terms,
    }
}

/// Largest entrywise difference between two block SVDs with the same number
/// of terms; `∞` otherwise.
pub fn block_svd_distance(a: &BlockSVD, b: &BlockSVD) -> f64 {
    if a.shape != b.shape || a.terms.len() != b.terms.len() {
        return f64::INFINITY;
    }
    a.terms
        .iter()
        .zip(&b.terms)
        .map(|(x, y)| max_diff(&x.coeff, &y.coeff).max(max_diff(&x.isom, &y.isom)))
        .fold(0.0, f64::max)
}

/// The unitary case of the uniqueness statement: `Σ R_iR_i* = Σ R_i*R_i = I_k`
/// and every coefficient unitary. Returns the largest defect.
pub fn unitary_form_defect(d: &BlockSVD) -> Result<f64> {
    let k = d.shape.k;
    let id = CMatrix::identity(k, k);
    let fin = d
        .terms
        .iter()
        .fold(CMatrix::zeros(k, k), |a, t| a + &t.isom * t.isom.adjoint());
    let ini = d
        .terms
        .iter()
        .fold(CMatrix::zeros(k, k), |a, t| a + t.isom.adjoint() * &t.isom);
    let mut worst = max_diff(&fin, &id).max(max_diff(&ini, &id));
    for t in &d.terms {
        worst = worst.max(crate::matcore::unitarity_defect(&t.coeff)?);
    }
    Ok(worst)
}

/// Check that `basis` is an orthonormal family of `n×n` matrices (flattened).
pub fn basis_defect(basis: &[CMatrix]) -> f64 {
    let m = basis.len();
    if m == 0 {
        return 0.0;
    }
    let (r, c) = basis[0].shape();
    let flat = CMatrix::from_fn(r * c, m, |p, a| basis[a][(p / c, p % c)]);
    orthonormality_defect(&flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{block_diag_a_sample, haar_unitary, no_block_svd_4x4, product_sample};
    use crate::matcore::is_unitary;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_fn(v.len(), v.len(), |i, j| {
            if i == j {
                c64(v[i], 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
    }

    #[test]
    fn expand_simple_tensor_uses_row_major_blocks() {
        let a = haar_unitary(2, 1);
        let b = haar_unitary(3, 2);
        let x = BipartiteOperator::from_dims(2, 3, tensor(&a, &b)).unwrap();
        let e = expand(&x, None, &tol()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(max_diff(&e.blocks[i * 2 + j], &(&b * a[(i, j)])) < 1e-14);
            }
        }
    }

    #[test]
    fn expand_identity() {
        let x = BipartiteOperator::from_dims(3, 2, CMatrix::identity(6, 6)).unwrap();
        let e = expand(&x, None, &tol()).unwrap();
        for a in 0..9 {
            let want = if a / 3 == a % 3 {
                CMatrix::identity(2, 2)
            } else {
                CMatrix::zeros(2, 2)
            };
            assert_eq!(e.blocks[a], want);
        }
    }

    #[test]
    fn expand_reconstructs_in_random_basis() {
        let x = BipartiteOperator::from_dims(2, 3, haar_unitary(6, 3)).unwrap();
        // an orthonormal HS basis from the columns of a Haar unitary on C^4
        let w = haar_unitary(4, 4);
        let basis: Vec<CMatrix> = (0..4)
            .map(|a| CMatrix::from_fn(2, 2, |i, j| w[(i * 2 + j, a)]))
            .collect();
        let e = expand(&x, Some(&basis), &tol()).unwrap();
        assert!(max_diff(&e.reconstruct(), x.mat()) < 1e-10);
        let bad = vec![CMatrix::identity(2, 2); 4];
        assert!(matches!(
            expand(&x, Some(&bad), &tol()),
            Err(Error::NonOrthonormalBasis(_))
        ));
    }

    #[test]
    fn joint_diagonalize_examples() {
        let t = tol();
        let p = joint_diagonalize(&[CMatrix::identity(3, 3)], &t).unwrap();
        assert_eq!(p.len(), 1);
        assert!(max_diff(&p[0], &CMatrix::identity(3, 3)) < 1e-12);

        let p = joint_diagonalize(&[diag(&[1.0, 1.0, 2.0]), diag(&[3.0, 4.0, 4.0])], &t).unwrap();
        assert_eq!(p.len(), 3);
        for (i, pi) in p.iter().enumerate() {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            assert!(max_diff(pi, &diag(&e)) < 1e-12);
        }

        let mut nil = CMatrix::zeros(2, 2);
        nil[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(
            joint_diagonalize(&[nil], &t),
            Err(Error::NotCommutingFamily(_))
        ));
    }

    #[test]
    fn joint_projectors_match_construction() {
        let t = tol();
        let s = block_diag_a_sample(2, 3, 3, 8).unwrap();
        let exp = expand(&s.op, None, &t).unwrap();
        let fam = half_family(&exp.blocks, Family::Left);
        let p = joint_diagonalize(&fam, &t).unwrap();
        assert_eq!(p.len(), 3);
        for term in 0..3 {
            let r = s.isometry(term);
            let fin = &r * r.adjoint();
            assert!(p.iter().any(|pi| max_diff(pi, &fin) < 1e-8));
        }
    }

    #[test]
    fn fixture_4x4_has_no_block_svd() {
        let x = no_block_svd_4x4();
        let c = has_block_svd(&x, &tol());
        assert!(!c.holds);
        // X11 X22* against X12 X22*, 0-based flat indices (0, 3) and (1, 3)
        assert!(c
            .violations
            .iter()
            .any(|w| w.family == Family::Left && w.first == (0, 3) && w.second == (1, 3)));
        let w = c.witness.unwrap();
        assert!(w.norm > 0.1);
        assert!(matches!(
            compute_block_svd(&x, &tol()),
            Err(Error::NotBlockDiagonal(_))
        ));
    }

    #[test]
    fn product_gives_one_term() {
        let t = tol();
        let s = product_sample(2, 3, 5).unwrap();
        let d = compute_block_svd(&s.op, &t).unwrap();
        assert_eq!(d.len(), 1);
        assert!(phase_equivalent(&d.terms[0].coeff, &s.v, &t).is_some());
        assert!(unitary_form_defect(&d).unwrap() < 1e-9);
    }

    #[test]
    fn two_term_recovery() {
        let t = tol();
        let s = block_diag_a_sample(2, 2, 2, 6).unwrap();
        let d = compute_block_svd(&s.op, &t).unwrap();
        assert_eq!(d.len(), 2);
        for c in &s.coeffs {
            assert!(d
                .terms
                .iter()
                .any(|term| phase_equivalent(&term.coeff, c, &t).is_some()));
        }
        assert!(d.isometry_defect() < 1e-9);
        for term in &d.terms {
            assert!(is_unitary(&term.coeff, &t).unwrap());
        }
    }

    #[test]
    fn haar_unitary_is_rejected() {
        let x = BipartiteOperator::from_dims(2, 3, haar_unitary(6, 17)).unwrap();
        let c = has_block_svd(&x, &tol());
        assert!(!c.holds);
        assert!(c.witness.is_some());
    }

    #[test]
    fn canonical_forms_agree_across_seeds() {
        let t = tol();
        let s = block_diag_a_sample(3, 3, 3, 21).unwrap();
        let a = canonicalize(&compute_block_svd_seeded(&s.op, &t, 1).unwrap());
        let b = canonicalize(&compute_block_svd_seeded(&s.op, &t, 2).unwrap());
        assert!(block_svd_distance(&a, &b) < 1e-8);
    }

    #[test]
    fn canonicalize_moves_phase_and_sorts() {
        let v = haar_unitary(2, 3);
        let r = CMatrix::identity(2, 2);
        let i = c64(0.0, 1.0);
        let d = BlockSVD {
            shape: BipartiteShape::new(2, 2).unwrap(),
            terms: vec![BlockTerm {
                coeff: &v * i,
                isom: &r * -i,
            }],
        };
        let c = canonicalize(&d);
        let lead = leading_phase(&c.terms[0].coeff);
        assert!((lead - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(max_diff(&c.reconstruct(), &d.reconstruct()) < 1e-12);

        let w = haar_unitary(2, 4);
        let e0 = matrix_unit(2, 0, 0);
        let e1 = matrix_unit(2, 1, 1);
        let fwd = BlockSVD {
            shape: d.shape,
            terms: vec![
                BlockTerm {
                    coeff: v.clone(),
                    isom: e0.clone(),
                },
                BlockTerm {
                    coeff: w.clone(),
                    isom: e1.clone(),
                },
            ],
        };
        let rev = BlockSVD {
            shape: d.shape,
            terms: fwd.terms.iter().rev().cloned().collect(),
        };
        assert!(block_svd_distance(&canonicalize(&fwd), &canonicalize(&rev)) < 1e-15);
    }

    #[test]
    fn merge_joins_phase_equivalent_terms() {
        let t = tol();
        let v = haar_unitary(2, 9);
        let mu = c64(0.6, 0.8);
        let d = BlockSVD {
            shape: BipartiteShape::new(2, 2).unwrap(),
            terms: vec![
                BlockTerm {
                    coeff: v.clone(),
                    isom: matrix_unit(2, 0, 0),
                },
                BlockTerm {
                    coeff: &v * mu,
                    isom: matrix_unit(2, 1, 1),
                },
            ],
        };
        let m = merge_equivalent(d.clone(), &t);
        assert_eq!(m.len(), 1);
        assert!(max_diff(&m.reconstruct(), &d.reconstruct()) < 1e-12);
    }
}
