//! Seeded constructors for every operator class, plus the fixed example
//! matrices used as golden fixtures.
//!
//! Randomness comes from ChaCha20 (`rand_chacha` 0.3, `seed_from_u64`);
//! Gaussians are drawn with Box–Muller from its `f64` uniform stream, so a
//! seed reproduces the same matrices on any platform up to libm rounding.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::matcore::{
    c64, flip, hs_inner, tensor, BipartiteOperator, BipartiteShape, CMatrix, Tolerances, C64, I,
    ONE, ZERO,
};

pub type Rng64 = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, `E|z|² = 1`, via Box–Muller.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    // 1 - u keeps the log argument in (0, 1]
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = (-u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    c64(r * theta.cos(), r * theta.sin())
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let theta = std::f64::consts::TAU * rng.gen::<f64>();
    c64(theta.cos(), theta.sin())
}

/// Haar unitary: QR of a Ginibre matrix with the phases of `diag(R)` moved
/// into `Q`.
pub fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn haar_unitary(d: usize, seed: u64) -> CMatrix {
    haar_unitary_with(&mut rng_from_seed(seed), d)
}

/// Haar-random unit vector in `C^d` as a `d × 1` matrix.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, 1);
    let norm = g.norm();
    g / c64(norm, 0.0)
}

fn check_dims(n: usize, k: usize) -> Result<BipartiteShape> {
    BipartiteShape::new(n, k)
}

/// `V ⊗ W` with independent Haar factors.
#[derive(Clone, Debug)]
pub struct ProductSample {
    pub op: BipartiteOperator,
    pub v: CMatrix,
    pub w: CMatrix,
}

pub fn product_sample(n: usize, k: usize, seed: u64) -> Result<ProductSample> {
    let shape = check_dims(n, k)?;
    let mut rng = rng_from_seed(seed);
    let v = haar_unitary_with(&mut rng, n);
    let w = haar_unitary_with(&mut rng, k);
    let op = BipartiteOperator::new(shape, tensor(&v, &w))?;
    Ok(ProductSample { op, v, w })
}

pub fn product_unitary(n: usize, k: usize, seed: u64) -> Result<BipartiteOperator> {
    Ok(product_sample(n, k, seed)?.op)
}

/// `U = Σ_i U_{a(i)} ⊗ e_i f_i*` with `p` distinct coefficient unitaries.
#[derive(Clone, Debug)]
pub struct BlockDiagSample {
    pub op: BipartiteOperator,
    /// The `p` pairwise non-equivalent coefficient unitaries.
    pub coeffs: Vec<CMatrix>,
    /// `assignment[i]` is the coefficient used for the basis pair `(e_i, f_i)`.
    pub assignment: Vec<usize>,
    /// Columns are `e_i`.
    pub e: CMatrix,
    /// Columns are `f_i`.
    pub f: CMatrix,
}

impl BlockDiagSample {
    /// Coefficient unitary for each of the `k` basis pairs.
    pub fn blocks(&self) -> Vec<CMatrix> {
        self.assignment
            .iter()
            .map(|&a| self.coeffs[a].clone())
            .collect()
    }

    pub fn isometry(&self, term: usize) -> CMatrix {
        let k = self.e.nrows();
        let mut r = CMatrix::zeros(k, k);
        for (i, &a) in self.assignment.iter().enumerate() {
            if a == term {
                r += self.e.column(i) * self.f.column(i).adjoint();
            }
        }
        r
    }
}

pub fn block_diag_a_sample(n: usize, k: usize, p: usize, seed: u64) -> Result<BlockDiagSample> {
    let shape = check_dims(n, k)?;
    if p == 0 || p > k {
        return Err(Error::InvalidParameter(format!(
            "p = {p} must satisfy 1 ≤ p ≤ k = {k}"
        )));
    }
    if n == 1 && p > 1 {
        return Err(Error::InvalidParameter(
            "for n = 1 all coefficients are phase-equivalent, so p must be 1".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let spec_tol = Tolerances::default().spec_tol;
    let mut coeffs: Vec<CMatrix> = Vec::with_capacity(p);
    while coeffs.len() < p {
        let cand = haar_unitary_with(&mut rng, n);
        let distinct = coeffs
            .iter()
            .all(|u| hs_inner(u, &cand).norm() < n as f64 - spec_tol);
        if distinct {
            coeffs.push(cand);
        }
    }
    let assignment: Vec<usize> = (0..k)
        .map(|i| if i < p { i } else { rng.gen_range(0..p) })
        .collect();
    let e = haar_unitary_with(&mut rng, k);
    let f = haar_unitary_with(&mut rng, k);
    let mut mat = CMatrix::zeros(n * k, n * k);
    for (i, &a) in assignment.iter().enumerate() {
        let ef = e.column(i) * f.column(i).adjoint();
        mat += tensor(&coeffs[a], &ef);
    }
    let op = BipartiteOperator::new(shape, mat)?;
    Ok(BlockDiagSample {
        op,
        coeffs,
        assignment,
        e,
        f,
    })
}

pub fn block_diag_a(n: usize, k: usize, p: usize, seed: u64) -> Result<BipartiteOperator> {
    Ok(block_diag_a_sample(n, k, p, seed)?.op)
}

/// `U = Σ_i e_i f_i* ⊗ U_{a(i)}` with `U_j ∈ U_k`, `1 ≤ p ≤ n`. The returned
/// sample describes the factor-swapped (A-side) operator.
pub fn block_diag_b_sample(n: usize, k: usize, p: usize, seed: u64) -> Result<BlockDiagSample> {
    let mut s = block_diag_a_sample(k, n, p, seed)?;
    s.op = s.op.swap_factors();
    Ok(s)
}

pub fn block_diag_b(n: usize, k: usize, p: usize, seed: u64) -> Result<BipartiteOperator> {
    Ok(block_diag_b_sample(n, k, p, seed)?.op)
}

/// `(I_n ⊗ V)(F_n ⊗ I_r)(I_n ⊗ W)` on `C^n ⊗ C^{nr}`.
#[derive(Clone, Debug)]
pub struct ConstSample {
    pub op: BipartiteOperator,
    pub v: CMatrix,
    pub w: CMatrix,
    pub r: usize,
}

pub fn const_sample(n: usize, r: usize, seed: u64) -> Result<ConstSample> {
    let shape = check_dims(n, n * r)?;
    if r == 0 {
        return Err(Error::InvalidParameter("r must be ≥ 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let v = haar_unitary_with(&mut rng, n * r);
    let w = haar_unitary_with(&mut rng, n * r);
    let id_n = CMatrix::identity(n, n);
    let middle = tensor(&flip(n), &CMatrix::identity(r, r));
    let mat = tensor(&id_n, &v) * middle * tensor(&id_n, &w);
    Ok(ConstSample {
        op: BipartiteOperator::new(shape, mat)?,
        v,
        w,
        r,
    })
}

pub fn const_unitary(n: usize, r: usize, seed: u64) -> Result<BipartiteOperator> {
    Ok(const_sample(n, r, seed)?.op)
}

/// Orthogonal projection onto `Ran(U^Γ)` for `U = (I_n ⊗ V)(F_n ⊗ I_r)`
/// with `V` Haar on `C^{nr}`, as an operator on `C^n ⊗ C^{nr}`.
pub fn p_v(n: usize, r: usize, seed: u64) -> Result<BipartiteOperator> {
    let u = const_sample(n, r, seed)?;
    let id_n = CMatrix::identity(n, n);
    let mat = tensor(&id_n, &u.v) * tensor(&flip(n), &CMatrix::identity(r, r));
    let ug = BipartiteOperator::new(u.op.shape(), mat)?.partial_transpose_b();
    let b = crate::matcore::range_basis(ug.mat(), &Tolerances::default());
    BipartiteOperator::new(u.op.shape(), &b * b.adjoint())
}

/// Unitary Fourier matrix `ω^{ij}/√d`.
pub fn fourier_matrix(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |i, j| {
        let ang = std::f64::consts::TAU * ((i * j) % d) as f64 / d as f64;
        c64(s * ang.cos(), s * ang.sin())
    })
}

/// `F_d · diag(phases) · F_d*`.
pub fn circulant_from_phases(phases: &[C64]) -> CMatrix {
    let d = phases.len();
    let f = fourier_matrix(d);
    let diag = CMatrix::from_fn(d, d, |i, j| if i == j { phases[i] } else { ZERO });
    &f * diag * f.adjoint()
}

pub fn circulant_unitary(d: usize, seed: u64) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be ≥ 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let phases: Vec<C64> = (0..d).map(|_| random_phase(&mut rng)).collect();
    Ok(circulant_from_phases(&phases))
}

/// `U = Σ_{ij} λ_ij e_i f_i* ⊗ g_j h_j*`, a member of both block classes.
#[derive(Clone, Debug)]
pub struct BothBlockSample {
    pub op: BipartiteOperator,
    /// `n × k`, unimodular entries.
    pub lambda: CMatrix,
    pub e: CMatrix,
    pub f: CMatrix,
    pub g: CMatrix,
    pub h: CMatrix,
}

pub fn both_block_sample(n: usize, k: usize, seed: u64) -> Result<BothBlockSample> {
    let shape = check_dims(n, k)?;
    let mut rng = rng_from_seed(seed);
    let e = haar_unitary_with(&mut rng, n);
    let f = haar_unitary_with(&mut rng, n);
    let g = haar_unitary_with(&mut rng, k);
    let h = haar_unitary_with(&mut rng, k);
    let lambda = CMatrix::from_fn(n, k, |_, _| random_phase(&mut rng));
    let mut mat = CMatrix::zeros(n * k, n * k);
    for i in 0..n {
        let ef = e.column(i) * f.column(i).adjoint();
        for j in 0..k {
            let gh = g.column(j) * h.column(j).adjoint();
            mat += tensor(&ef, &gh) * lambda[(i, j)];
        }
    }
    Ok(BothBlockSample {
        op: BipartiteOperator::new(shape, mat)?,
        lambda,
        e,
        f,
        g,
        h,
    })
}

pub fn both_block(n: usize, k: usize, seed: u64) -> Result<BipartiteOperator> {
    Ok(both_block_sample(n, k, seed)?.op)
}

/// Shape `(4, 2)`: `Σ_i e_ie_i* ⊗ M_i` with `M = I, σ_x, H, [[1, i], [−i, −1]]/√2`.
/// Its environment Kraus span at `f = e_1` has no unitary element.
pub fn mixed_4x2() -> BipartiteOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = [
        CMatrix::identity(2, 2),
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ONE, ONE, -ONE]) * c64(s, 0.0),
        CMatrix::from_row_slice(2, 2, &[ONE, I, -I, -ONE]) * c64(s, 0.0),
    ];
    let mut mat = CMatrix::zeros(8, 8);
    for (i, mi) in m.iter().enumerate() {
        mat += tensor(&crate::matcore::matrix_unit(4, i, i), mi);
    }
    BipartiteOperator::from_dims(4, 2, mat).expect("fixed dimensions")
}

/// `e_1e_1* ⊗ I + e_2e_2* ⊗ V + e_3e_3* ⊗ W` on `C^3 ⊗ C^k`.
pub fn b_not_a_from(v: &CMatrix, w: &CMatrix) -> Result<BipartiteOperator> {
    let k = v.nrows();
    if v.shape() != (k, k) || w.shape() != (k, k) {
        return Err(Error::Dimension(
            "V and W must be square of the same size".into(),
        ));
    }
    let blocks = [CMatrix::identity(k, k), v.clone(), w.clone()];
    let mut mat = CMatrix::zeros(3 * k, 3 * k);
    for (i, b) in blocks.iter().enumerate() {
        mat += tensor(&crate::matcore::matrix_unit(3, i, i), b);
    }
    BipartiteOperator::from_dims(3, k, mat)
}

/// Seeded variant: Haar `V, W ∈ U_k`, resampled until `‖VW − WV‖_max > 0.1`.
pub fn b_not_a_n3(k: usize, seed: u64) -> Result<BipartiteOperator> {
    if k < 2 {
        return Err(Error::InvalidParameter(
            "k must be ≥ 2 for non-commuting V, W".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    loop {
        let v = haar_unitary_with(&mut rng, k);
        let w = haar_unitary_with(&mut rng, k);
        if crate::matcore::max_abs(&crate::matcore::commutator(&v, &w)) > 0.1 {
            return b_not_a_from(&v, &w);
        }
    }
}

/// Frozen `(V, W)` pair for golden tests; `haar_unitary(2, 31)` and
/// `haar_unitary(2, 32)` at the time they were committed.
pub fn frozen_vw() -> (CMatrix, CMatrix) {
    let v = CMatrix::from_row_slice(
        2,
        2,
        &[
            c64(-0.155_751_773_233_947_68, 0.546_813_970_536_200_29),
            c64(0.441_499_696_017_105_15, -0.694_128_147_518_684_68),
            c64(-0.785_035_680_153_059_36, -0.245_875_675_184_716_37),
            c64(-0.471_635_975_734_964_13, -0.317_527_384_065_708_35),
        ],
    );
    let w = CMatrix::from_row_slice(
        2,
        2,
        &[
            c64(0.031_011_018_828_789_29, 0.887_536_295_685_208_64),
            c64(-0.230_041_941_055_491_89, -0.397_992_896_805_961_73),
            c64(0.103_944_515_006_716_23, -0.447_786_978_766_240_85),
            c64(-0.229_228_814_541_451_69, -0.857_983_980_055_188_17),
        ],
    );
    (v, w)
}

pub fn b_not_a_n3_frozen() -> BipartiteOperator {
    let (v, w) = frozen_vw();
    b_not_a_from(&v, &w).expect("fixed dimensions")
}

/// The 4×4 matrix `[[1,0,0,1],[0,2,1,0],[0,1,1,0],[1,0,0,1]]` on `C^2 ⊗ C^2`,
/// whose diagonal block families commute but whose cross families do not.
pub fn no_block_svd_4x4() -> BipartiteOperator {
    let r = |v: f64| c64(v, 0.0);
    #[rustfmt::skip]
    let entries = [
        r(1.0), r(0.0), r(0.0), r(1.0),
        r(0.0), r(2.0), r(1.0), r(0.0),
        r(0.0), r(1.0), r(1.0), r(0.0),
        r(1.0), r(0.0), r(0.0), r(1.0),
    ];
    BipartiteOperator::from_dims(2, 2, CMatrix::from_row_slice(4, 4, &entries)).expect("fixed")
}

/// `block_diag_a(n, n, n, seed) · F_n`; its channels are entanglement breaking.
pub fn eb_example(n: usize, seed: u64) -> Result<BipartiteOperator> {
    let b = block_diag_a(n, n, n, seed)?;
    let f = BipartiteOperator::from_dims(n, n, flip(n))?;
    b.compose(&f)
}

/// Named fixtures: `mixed_4x2`, `b_not_a_n3` (frozen pair), `no_block_svd_4x4`,
/// `eb_example` (n = 2).
pub fn named_counterexamples(seed: u64) -> BTreeMap<&'static str, BipartiteOperator> {
    let mut m = BTreeMap::new();
    m.insert("mixed_4x2", mixed_4x2());
    m.insert("b_not_a_n3", b_not_a_n3_frozen());
    m.insert("no_block_svd_4x4", no_block_svd_4x4());
    m.insert("eb_example", eb_example(2, seed).expect("n = 2 is valid"));
    m
}

pub fn counterexample(name: &str, seed: u64) -> Result<BipartiteOperator> {
    named_counterexamples(seed)
        .remove(name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown counterexample `{name}`")))
}

/// `G G* / Tr(G G*)` with `G` a `k × rank` Ginibre matrix.
pub fn random_density(k: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut rng_from_seed(seed), k, rank)
}

pub fn random_density_with<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    rank: usize,
) -> Result<DensityMatrix> {
    if k == 0 || rank == 0 || rank > k {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} must satisfy 1 ≤ rank ≤ k = {k}"
        )));
    }
    let g = ginibre(rng, k, rank);
    let gg = &g * g.adjoint();
    let tr = crate::matcore::trace(&gg).re;
    DensityMatrix::new(gg / c64(tr, 0.0), &Tolerances::default())
}
