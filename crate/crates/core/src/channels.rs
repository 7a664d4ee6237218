//! Stinespring channels `L(X) = Tr_B(U (X ⊗ β) U*)`, their Choi matrices and
//! environment Kraus operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    basis_vector, c64, hermiticity_defect, is_psd, matrix_unit, max_abs, max_diff,
    min_hermitian_eigenvalue, orthonormality_defect, partial_trace_b_raw, partial_transpose_b_raw,
    tensor, trace, BipartiteOperator, BipartiteShape, CMatrix, Tolerances, I, ONE,
};

/// Three-valued answer used wherever a test may be inconclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl Answer {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unknown => "unknown",
        }
    }
}

/// Positive semidefinite, unit trace, Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix, tol: &Tolerances) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "{}×{} is not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let h = hermiticity_defect(&mat);
        if h > tol.eq_tol {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (defect {h:.3e})"
            )));
        }
        let tr = trace(&mat);
        if (tr - ONE).norm() > tol.eq_tol * mat.nrows() as f64 {
            return Err(Error::InvalidDensity(format!("trace {tr} ≠ 1")));
        }
        if !is_psd(&mat, tol)? {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:.3e}",
                min_hermitian_eigenvalue(&mat)
            )));
        }
        Ok(DensityMatrix { mat })
    }

    /// `f f*` for a unit vector `f` given as a column.
    pub fn pure(f: &CMatrix, tol: &Tolerances) -> Result<Self> {
        if f.ncols() != 1 {
            return Err(Error::Dimension(
                "pure state expects a column vector".into(),
            ));
        }
        let norm = f.norm();
        if (norm - 1.0).abs() > tol.eq_tol {
            return Err(Error::NonUnitVector(norm));
        }
        Ok(DensityMatrix {
            mat: f * f.adjoint(),
        })
    }

    pub fn maximally_mixed(k: usize) -> Self {
        DensityMatrix {
            mat: CMatrix::identity(k, k) / c64(k as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }
}

/// `Tr_B(U (X ⊗ β) U*)` for arbitrary `β`; bilinear in `(X, β)`.
pub fn stinespring_map(u: &BipartiteOperator, beta: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    let BipartiteShape { n, k } = u.shape();
    if x.shape() != (n, n) || beta.shape() != (k, k) {
        return Err(Error::Dimension(format!(
            "input {:?} and environment {:?} do not fit shape ({n}, {k})",
            x.shape(),
            beta.shape()
        )));
    }
    let m = u.mat() * tensor(x, beta) * u.mat().adjoint();
    Ok(partial_trace_b_raw(&m, u.shape()))
}

#[derive(Clone, Debug)]
pub struct StinespringChannel {
    u: BipartiteOperator,
    beta: DensityMatrix,
}

impl StinespringChannel {
    pub fn new(u: BipartiteOperator, beta: DensityMatrix, tol: &Tolerances) -> Result<Self> {
        if beta.dim() != u.k() {
            return Err(Error::Dimension(format!(
                "environment state has dimension {}, expected {}",
                beta.dim(),
                u.k()
            )));
        }
        let d = crate::matcore::unitarity_defect(u.mat())?;
        if d > tol.eq_tol {
            return Err(Error::NotUnitary(d));
        }
        Ok(StinespringChannel { u, beta })
    }

    pub fn unitary(&self) -> &BipartiteOperator {
        &self.u
    }

    pub fn beta(&self) -> &DensityMatrix {
        &self.beta
    }

    pub fn n(&self) -> usize {
        self.u.n()
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        stinespring_map(&self.u, self.beta.mat(), x)
    }

    pub fn choi(&self) -> ChoiMatrix {
        choi_of(&self.u, self.beta.mat())
    }
}

pub fn apply(ch: &StinespringChannel, x: &CMatrix) -> Result<CMatrix> {
    ch.apply(x)
}

/// `C = Σ_ij e_ie_j* ⊗ L(e_ie_j*)`, input factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    pub n: usize,
    pub mat: CMatrix,
}

impl ChoiMatrix {
    pub fn partial_transpose(&self) -> CMatrix {
        partial_transpose_b_raw(
            &self.mat,
            BipartiteShape {
                n: self.n,
                k: self.n,
            },
        )
    }
}

pub fn choi(ch: &StinespringChannel) -> ChoiMatrix {
    ch.choi()
}

fn choi_of(u: &BipartiteOperator, beta: &CMatrix) -> ChoiMatrix {
    let n = u.n();
    let mut c = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let eij = matrix_unit(n, i, j);
            let out = stinespring_map(u, beta, &eij).expect("shapes fixed by construction");
            c += tensor(&eij, &out);
        }
    }
    ChoiMatrix { n, mat: c }
}

/// Kraus family `E_i = (I ⊗ b_i*) U (I ⊗ f)` of the channel with `β = ff*`.
#[derive(Clone, Debug)]
pub struct KrausFamily {
    pub ops: Vec<CMatrix>,
}

impl KrausFamily {
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let n = x.nrows();
        self.ops
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, e| acc + e * x * e.adjoint())
    }

    /// `‖Σ E_i* E_i − I‖_max`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.ops.first().map_or(0, |e| e.nrows());
        let s = self
            .ops
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, e| acc + e.adjoint() * e);
        max_diff(&s, &CMatrix::identity(n, n))
    }
}

/// `E_i = (I ⊗ b_i*) U (I ⊗ f)`; `basis` defaults to the standard basis of `C^k`.
pub fn kraus_from_env_vector(
    u: &BipartiteOperator,
    f: &CMatrix,
    basis: Option<&CMatrix>,
    tol: &Tolerances,
) -> Result<KrausFamily> {
    let BipartiteShape { n, k } = u.shape();
    if f.shape() != (k, 1) {
        return Err(Error::Dimension(format!(
            "environment vector must be {k}×1"
        )));
    }
    let norm = f.norm();
    if (norm - 1.0).abs() > tol.eq_tol {
        return Err(Error::NonUnitVector(norm));
    }
    let id = CMatrix::identity(k, k);
    let b = basis.unwrap_or(&id);
    if b.shape() != (k, k) {
        return Err(Error::Dimension(format!("basis must be {k}×{k}")));
    }
    let defect = orthonormality_defect(b);
    if defect > tol.eq_tol {
        return Err(Error::NonOrthonormalBasis(defect));
    }
    let id_n = CMatrix::identity(n, n);
    let right = u.mat() * tensor(&id_n, f);
    let ops = (0..k)
        .map(|i| {
            let bi = CMatrix::from_fn(1, k, |_, c| b[(c, i)].conj());
            tensor(&id_n, &bi) * &right
        })
        .collect();
    Ok(KrausFamily { ops })
}

/// `k²` densities spanning the Hermitian `k × k` matrices:
/// `e_ae_a*`, and for `a < b` the projections onto `(e_a + e_b)/√2` and
/// `(e_a + i e_b)/√2`.
pub fn spanning_densities(k: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(k * k);
    for a in 0..k {
        out.push(matrix_unit(k, a, a));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..k {
        for b in a + 1..k {
            for ph in [ONE, I] {
                let v = (basis_vector(k, a) + basis_vector(k, b) * ph) * c64(s, 0.0);
                out.push(&v * v.adjoint());
            }
        }
    }
    out
}

/// `L(I) = I` for the given channel.
pub fn is_unital_for(ch: &StinespringChannel, tol: &Tolerances) -> Result<bool> {
    let n = ch.n();
    let out = ch.apply(&CMatrix::identity(n, n))?;
    Ok(max_diff(&out, &CMatrix::identity(n, n)) <= tol.eq_scaled(n as f64))
}

/// Smallest eigenvalue of the partially transposed Choi matrix.
pub fn ppt_min_eigenvalue(ch: &StinespringChannel) -> f64 {
    min_hermitian_eigenvalue(&ch.choi().partial_transpose())
}

pub fn is_ppt_channel(ch: &StinespringChannel, tol: &Tolerances) -> Result<bool> {
    let c = ch.choi();
    Ok(min_hermitian_eigenvalue(&c.partial_transpose()) >= -tol.eq_scaled(max_abs(&c.mat)))
}

/// Entanglement breaking test. For `n = 2` this is exactly the PPT criterion;
/// for larger `n` a PPT failure still certifies `No`, otherwise `Unknown`.
pub fn is_eb_channel_qubit(ch: &StinespringChannel, tol: &Tolerances) -> Result<Answer> {
    let ppt = is_ppt_channel(ch, tol)?;
    Ok(match (ppt, ch.n()) {
        (false, _) => Answer::No,
        (true, 1 | 2) => Answer::Yes,
        (true, _) => Answer::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{eb_example, haar_unitary, random_density};
    use crate::matcore::{flip, is_unitary};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn density_validation() {
        let t = tol();
        assert!(DensityMatrix::new(CMatrix::identity(2, 2) / c64(2.0, 0.0), &t).is_ok());
        assert!(matches!(
            DensityMatrix::new(CMatrix::identity(2, 2), &t),
            Err(Error::InvalidDensity(_))
        ));
        let neg =
            CMatrix::from_row_slice(2, 2, &[c64(1.5, 0.0), ONE * 0.0, ONE * 0.0, c64(-0.5, 0.0)]);
        assert!(DensityMatrix::new(neg, &t).is_err());
        assert!(matches!(
            DensityMatrix::pure(&(basis_vector(3, 0) * c64(2.0, 0.0)), &t),
            Err(Error::NonUnitVector(_))
        ));
    }

    #[test]
    fn identity_unitary_gives_identity_channel() {
        let t = tol();
        let u = BipartiteOperator::from_dims(2, 3, CMatrix::identity(6, 6)).unwrap();
        let beta = random_density(3, 2, 1).unwrap();
        let ch = StinespringChannel::new(u, beta, &t).unwrap();
        let x = haar_unitary(2, 3);
        assert!(max_diff(&ch.apply(&x).unwrap(), &x) < 1e-12);
    }

    #[test]
    fn product_unitary_is_conjugation() {
        let t = tol();
        let v = haar_unitary(2, 5);
        let w = haar_unitary(3, 6);
        let u = BipartiteOperator::from_dims(2, 3, tensor(&v, &w)).unwrap();
        let ch = StinespringChannel::new(u, random_density(3, 3, 7).unwrap(), &t).unwrap();
        let x = random_density(2, 2, 8).unwrap().mat().clone();
        assert!(max_diff(&ch.apply(&x).unwrap(), &(&v * &x * v.adjoint())) < 1e-12);
    }

    #[test]
    fn flip_channel_replaces_state() {
        let t = tol();
        let u = BipartiteOperator::from_dims(2, 2, flip(2)).unwrap();
        let beta = random_density(2, 2, 9).unwrap();
        let ch = StinespringChannel::new(u, beta.clone(), &t).unwrap();
        let x = random_density(2, 1, 10).unwrap().mat().clone();
        assert!(max_diff(&ch.apply(&x).unwrap(), beta.mat()) < 1e-12);
        // and for a traceless input the output vanishes
        let z = matrix_unit(2, 0, 1);
        assert!(max_abs(&ch.apply(&z).unwrap()) < 1e-12);
    }

    #[test]
    fn channel_rejects_mismatches() {
        let t = tol();
        let u = BipartiteOperator::from_dims(2, 3, CMatrix::identity(6, 6)).unwrap();
        assert!(matches!(
            StinespringChannel::new(u.clone(), DensityMatrix::maximally_mixed(2), &t),
            Err(Error::Dimension(_))
        ));
        let bad =
            BipartiteOperator::from_dims(2, 3, CMatrix::identity(6, 6) * c64(2.0, 0.0)).unwrap();
        assert!(matches!(
            StinespringChannel::new(bad, DensityMatrix::maximally_mixed(3), &t),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn kraus_agrees_with_stinespring() {
        let t = tol();
        let u = BipartiteOperator::from_dims(2, 3, haar_unitary(6, 11)).unwrap();
        let f = crate::generate::random_unit_vector(&mut crate::generate::rng_from_seed(12), 3);
        let b = haar_unitary(3, 13);
        let fam = kraus_from_env_vector(&u, &f, Some(&b), &t).unwrap();
        assert!(fam.completeness_defect() < 1e-12);
        let ch = StinespringChannel::new(u, DensityMatrix::pure(&f, &t).unwrap(), &t).unwrap();
        let x = random_density(2, 2, 14).unwrap().mat().clone();
        assert!(max_diff(&fam.apply(&x), &ch.apply(&x).unwrap()) < 1e-12);
    }

    #[test]
    fn kraus_rejects_bad_inputs() {
        let t = tol();
        let u = BipartiteOperator::from_dims(2, 2, CMatrix::identity(4, 4)).unwrap();
        let f = basis_vector(2, 0) * c64(1.1, 0.0);
        assert!(matches!(
            kraus_from_env_vector(&u, &f, None, &t),
            Err(Error::NonUnitVector(_))
        ));
        let b = CMatrix::identity(2, 2) * c64(2.0, 0.0);
        assert!(matches!(
            kraus_from_env_vector(&u, &basis_vector(2, 0), Some(&b), &t),
            Err(Error::NonOrthonormalBasis(_))
        ));
    }

    #[test]
    fn choi_of_identity_channel() {
        let t = tol();
        let u = BipartiteOperator::from_dims(2, 2, CMatrix::identity(4, 4)).unwrap();
        let ch = StinespringChannel::new(u, DensityMatrix::maximally_mixed(2), &t).unwrap();
        let c = ch.choi();
        let mut omega = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                omega += tensor(&matrix_unit(2, i, j), &matrix_unit(2, i, j));
            }
        }
        assert!(max_diff(&c.mat, &omega) < 1e-14);
        assert!(!is_ppt_channel(&ch, &t).unwrap());
        assert_eq!(is_eb_channel_qubit(&ch, &t).unwrap(), Answer::No);
    }

    #[test]
    fn eb_example_channels_are_ppt() {
        let t = tol();
        let u = eb_example(2, 3).unwrap();
        assert!(is_unitary(u.mat(), &t).unwrap());
        for seed in 0..5 {
            let beta = random_density(2, 2, 100 + seed).unwrap();
            let ch = StinespringChannel::new(u.clone(), beta, &t).unwrap();
            assert_eq!(is_eb_channel_qubit(&ch, &t).unwrap(), Answer::Yes);
        }
    }

    #[test]
    fn spanning_set_has_full_real_span() {
        for k in 1..=4 {
            let s = spanning_densities(k);
            assert_eq!(s.len(), k * k);
            let rows = CMatrix::from_fn(k * k, k * k, |r, c| s[r][(c / k, c % k)]);
            assert_eq!(crate::matcore::numeric_rank(&rows, &tol()), k * k);
        }
    }
}
