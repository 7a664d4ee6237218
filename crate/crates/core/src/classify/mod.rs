//! Membership tests for the unitary classes, assembled into a [`ClassReport`].
//!
//! Every verdict is three-valued. `Yes` and `No` always carry a witness that
//! the caller can replay; verdicts that come from a search rather than a
//! proof are flagged `heuristic`.

pub mod mixed;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::blocksvd::{
    canonicalize, compute_block_svd, has_block_svd, BlockSVD, CommutatorWitness,
};
use crate::channels::{
    is_ppt_channel, kraus_from_env_vector, spanning_densities, stinespring_map, Answer,
    DensityMatrix, StinespringChannel,
};
use crate::error::{Error, Result};
use crate::generate::{random_unit_vector, rng_from_seed};
use crate::json::{serde_cmatrix, serde_cmatrix_vec};
use crate::matcore::{
    basis_vector, c64, flip, hs_inner, leading_phase, matrix_unit, max_abs, max_diff,
    min_hermitian_eigenvalue, operator_schmidt_with, tensor, unitarity_defect, BipartiteOperator,
    CMatrix, Tolerances,
};

pub use mixed::{diagonal_bound, search_unitary, unitarity_ratio, DiagonalBound, SearchResult};

/// Class names, in report order.
pub const CLASS_NAMES: [&str; 13] = [
    "aut",
    "single",
    "const",
    "unital",
    "block_diag_A",
    "block_diag_B",
    "block_diag_AB",
    "cppt",
    "mixed_necessary",
    "prob_lin",
    "eb_qubit",
    "mixed",
    "mixed_b",
];

/// Margin below 1 that the heuristic search must stay under to report `No`.
pub const HEURISTIC_MARGIN: f64 = 0.3;

/// Default search budget for the mixed-unitary test.
pub const DEFAULT_BUDGET: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    /// `U = V ⊗ W`, `V`'s largest entry real positive.
    Product {
        #[serde(with = "serde_cmatrix")]
        v: CMatrix,
        #[serde(with = "serde_cmatrix")]
        w: CMatrix,
    },
    SchmidtRank {
        rank: usize,
        weights: Vec<f64>,
    },
    /// `k` is not a multiple of `n`.
    DimensionObstruction {
        n: usize,
        k: usize,
    },
    /// `σ(β_m)` for each spanning environment state.
    ConstantOutputs {
        #[serde(with = "serde_cmatrix_vec")]
        outputs: Vec<CMatrix>,
    },
    /// `L_β(E_ab)` deviates from the constant-channel pattern.
    ConstViolation {
        input: (usize, usize),
        beta_index: usize,
        deviation: f64,
    },
    UnitalDefect {
        defect: f64,
    },
    BlockSvd {
        side: Side,
        decomposition: BlockSVD,
    },
    Commutator {
        side: Side,
        family: String,
        first: (usize, usize),
        second: (usize, usize),
        norm: f64,
        description: String,
    },
    /// `U = Σ λ_ij e_if_i* ⊗ g_jh_j*`, bases as columns.
    BothBlock {
        #[serde(with = "serde_cmatrix")]
        lambda: CMatrix,
        #[serde(with = "serde_cmatrix")]
        e: CMatrix,
        #[serde(with = "serde_cmatrix")]
        f: CMatrix,
        #[serde(with = "serde_cmatrix")]
        g: CMatrix,
        #[serde(with = "serde_cmatrix")]
        h: CMatrix,
    },
    MinEigenvalue {
        value: f64,
    },
    /// Certified bound on `max min_j|ℓ_j| / max_j|ℓ_j|` over the span.
    MixedDiagonal {
        #[serde(with = "serde_cmatrix")]
        f: CMatrix,
        upper: f64,
        best: f64,
        forms: usize,
        rank: usize,
        evaluations: usize,
        common_kernel: bool,
    },
    /// Best `σ_min / rms σ` found by the compass search.
    MixedSearch {
        #[serde(with = "serde_cmatrix")]
        f: CMatrix,
        best: f64,
        restarts: usize,
        evaluations: usize,
    },
    NonPptEnvironment {
        #[serde(with = "serde_cmatrix")]
        beta: CMatrix,
        min_eigenvalue: f64,
    },
    Implied {
        from: String,
        reason: String,
    },
    Note {
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: Answer,
    pub heuristic: bool,
    pub witness: Witness,
}

impl Verdict {
    pub fn yes(witness: Witness) -> Self {
        Verdict {
            value: Answer::Yes,
            heuristic: false,
            witness,
        }
    }

    pub fn no(witness: Witness) -> Self {
        Verdict {
            value: Answer::No,
            heuristic: false,
            witness,
        }
    }

    pub fn unknown(witness: Witness) -> Self {
        Verdict {
            value: Answer::Unknown,
            heuristic: false,
            witness,
        }
    }

    pub fn is_yes(&self) -> bool {
        self.value == Answer::Yes
    }

    pub fn is_no(&self) -> bool {
        self.value == Answer::No
    }

    fn implied(&self, from: &str, reason: &str) -> Self {
        Verdict {
            value: self.value,
            heuristic: self.heuristic,
            witness: Witness::Implied {
                from: from.into(),
                reason: reason.into(),
            },
        }
    }
}

fn implied(value: Answer, from: &str, reason: &str) -> Verdict {
    Verdict {
        value,
        heuristic: false,
        witness: Witness::Implied {
            from: from.into(),
            reason: reason.into(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub n: usize,
    pub k: usize,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl ClassReport {
    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.get(name)
    }

    pub fn value(&self, name: &str) -> Answer {
        self.verdicts.get(name).map_or(Answer::Unknown, |v| v.value)
    }
}

pub fn require_unitary(u: &BipartiteOperator, tol: &Tolerances) -> Result<()> {
    let d = unitarity_defect(u.mat())?;
    if d > tol.eq_tol {
        return Err(Error::NotUnitary(d));
    }
    Ok(())
}

/// Operator-Schmidt rank one. The same verdict answers `single`.
pub fn is_aut(u: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    require_unitary(u, tol)?;
    let terms = operator_schmidt_with(u, tol);
    if terms.len() != 1 {
        return Ok(Verdict::no(Witness::SchmidtRank {
            rank: terms.len(),
            weights: terms.iter().map(|t| t.weight).collect(),
        }));
    }
    let t = &terms[0];
    let n = u.n() as f64;
    let v = &t.a * c64(n.sqrt(), 0.0);
    let w = &t.b * c64(t.weight / n.sqrt(), 0.0);
    let ph = leading_phase(&v);
    Ok(Verdict::yes(Witness::Product {
        v: v * ph.conj(),
        w: w * ph,
    }))
}

/// Output of the channel is independent of the input state, for every
/// environment state. Checked exactly on spanning sets of both.
pub fn is_const(u: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    require_unitary(u, tol)?;
    let (n, k) = (u.n(), u.k());
    if k % n != 0 {
        return Ok(Verdict::no(Witness::DimensionObstruction { n, k }));
    }
    let thresh = tol.eq_scaled(k as f64);
    let mut outputs = Vec::new();
    for (m, beta) in spanning_densities(k).iter().enumerate() {
        let sigma = stinespring_map(u, beta, &matrix_unit(n, 0, 0))?;
        for a in 0..n {
            for b in 0..n {
                let out = stinespring_map(u, beta, &matrix_unit(n, a, b))?;
                let deviation = if a == b {
                    max_diff(&out, &sigma)
                } else {
                    max_abs(&out)
                };
                if deviation > thresh {
                    return Ok(Verdict::no(Witness::ConstViolation {
                        input: (a, b),
                        beta_index: m,
                        deviation,
                    }));
                }
            }
        }
        outputs.push(sigma);
    }
    Ok(Verdict::yes(Witness::ConstantOutputs { outputs }))
}

/// `U^Γ` unitary.
pub fn is_unital_member(u: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    require_unitary(u, tol)?;
    let defect = unitarity_defect(u.partial_transpose_b().mat())?;
    let w = Witness::UnitalDefect { defect };
    Ok(if defect <= tol.eq_scaled(1.0) {
        Verdict::yes(w)
    } else {
        Verdict::no(w)
    })
}

fn commutator_witness(side: Side, w: &CommutatorWitness, n: usize) -> Witness {
    Witness::Commutator {
        side,
        family: w.family.as_str().into(),
        first: w.first,
        second: w.second,
        norm: w.norm,
        description: w.describe(n),
    }
}

fn block_verdict(x: &BipartiteOperator, side: Side, tol: &Tolerances) -> Verdict {
    let check = has_block_svd(x, tol);
    if !check.holds {
        let w = check.witness.expect("a failing check carries a witness");
        return Verdict::no(commutator_witness(side, &w, x.n()));
    }
    match compute_block_svd(x, tol) {
        Ok(d) => Verdict::yes(Witness::BlockSvd {
            side,
            decomposition: canonicalize(&d),
        }),
        Err(e) => Verdict::unknown(Witness::Note {
            message: format!("construction failed: {e}"),
        }),
    }
}

/// `U = Σ U_i ⊗ R_i`; witness is the canonical decomposition.
pub fn is_block_diag_a(u: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    require_unitary(u, tol)?;
    Ok(block_verdict(u, Side::A, tol))
}

/// `U = Σ Q_i ⊗ W_i`; the test runs on the factor-swapped operator, so the
/// witness decomposition lives on `C^k ⊗ C^n`.
pub fn is_block_diag_b(u: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    require_unitary(u, tol)?;
    Ok(block_verdict(&u.swap_factors(), Side::B, tol))
}

/// Columns `u_a` and `v_a` of the rank-one parts `R = Σ u_a v_a*`.
fn rank_one_parts(r: &CMatrix) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let svd = r.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (a, s) in svd.singular_values.iter().enumerate() {
        if *s > 0.5 {
            left.push(CMatrix::from_fn(r.nrows(), 1, |i, _| u[(i, a)]));
            right.push(CMatrix::from_fn(r.ncols(), 1, |i, _| vt[(a, i)].conj()));
        }
    }
    (left, right)
}

fn side_decomposition(v: &Verdict) -> Option<&BlockSVD> {
    match &v.witness {
        Witness::BlockSvd { decomposition, .. } => Some(decomposition),
        _ => None,
    }
}

/// Membership in both block classes, with the `λ` matrix witness.
pub fn decompose_ab(u: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    let a = is_block_diag_a(u, tol)?;
    let b = is_block_diag_b(u, tol)?;
    Ok(combine_ab(u, &a, &b, tol))
}

fn combine_ab(u: &BipartiteOperator, a: &Verdict, b: &Verdict, tol: &Tolerances) -> Verdict {
    if a.is_no() {
        return a.implied("block_diag_A", "not block-diagonal on the A side");
    }
    if b.is_no() {
        return b.implied("block_diag_B", "not block-diagonal on the B side");
    }
    let (Some(da), Some(db)) = (side_decomposition(a), side_decomposition(b)) else {
        return Verdict::unknown(Witness::Note {
            message: "a side decomposition is missing".into(),
        });
    };
    let (n, k) = (u.n(), u.k());
    // B side: U = Σ Q_i ⊗ W_i with Q_i the isometries of the swapped decomposition
    let (mut e, mut f) = (Vec::new(), Vec::new());
    for t in &db.terms {
        let (l, r) = rank_one_parts(&t.isom);
        e.extend(l);
        f.extend(r);
    }
    let (mut g, mut h) = (Vec::new(), Vec::new());
    for t in &da.terms {
        let (l, r) = rank_one_parts(&t.isom);
        g.extend(l);
        h.extend(r);
    }
    if e.len() != n || g.len() != k {
        return Verdict::unknown(Witness::Note {
            message: format!(
                "isometry ranks sum to ({}, {}), expected ({n}, {k})",
                e.len(),
                g.len()
            ),
        });
    }
    let pieces: Vec<Vec<CMatrix>> = (0..n)
        .map(|i| {
            let ef = &e[i] * f[i].adjoint();
            (0..k)
                .map(|j| tensor(&ef, &(&g[j] * h[j].adjoint())))
                .collect()
        })
        .collect();
    let lambda = CMatrix::from_fn(n, k, |i, j| hs_inner(&pieces[i][j], u.mat()));
    let rebuilt = (0..n).fold(CMatrix::zeros(n * k, n * k), |acc, i| {
        (0..k).fold(acc, |acc, j| acc + &pieces[i][j] * lambda[(i, j)])
    });
    let residual = max_diff(&rebuilt, u.mat());
    if residual > 10.0 * tol.eq_scaled(1.0) {
        return Verdict::unknown(Witness::Note {
            message: format!("rank-one reconstruction residual {residual:.3e}"),
        });
    }
    let cols = |v: &[CMatrix], d: usize| CMatrix::from_fn(d, v.len(), |r, c| v[c][(r, 0)]);
    Verdict::yes(Witness::BothBlock {
        lambda,
        e: cols(&e, n),
        f: cols(&f, n),
        g: cols(&g, k),
        h: cols(&h, k),
    })
}

/// `(I_n ⊗ U^Γ)(F_n ⊗ I_k)(I_n ⊗ U^Γ)*`.
pub fn cppt_matrix(u: &BipartiteOperator) -> CMatrix {
    let (n, k) = (u.n(), u.k());
    let left = tensor(&CMatrix::identity(n, n), u.partial_transpose_b().mat());
    let middle = tensor(&flip(n), &CMatrix::identity(k, k));
    &left * middle * left.adjoint()
}

fn psd_threshold(m: &CMatrix, tol: &Tolerances) -> f64 {
    tol.eq_scaled(max_abs(m)) * m.nrows() as f64
}

pub fn is_cppt(u: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    require_unitary(u, tol)?;
    let m = cppt_matrix(u);
    let value = min_hermitian_eigenvalue(&m);
    let w = Witness::MinEigenvalue { value };
    Ok(if value >= -psd_threshold(&m, tol) {
        Verdict::yes(w)
    } else {
        Verdict::no(w)
    })
}

/// `(I_n ⊗ P)(F_n ⊗ I_k)(I_n ⊗ P) ≥ 0` for an orthogonal projection `P`.
pub fn cppt_projection_check(p: &BipartiteOperator, tol: &Tolerances) -> Result<Verdict> {
    let pm = p.mat();
    let defect = max_diff(&(pm * pm), pm).max(max_diff(pm, &pm.adjoint()));
    if defect > tol.eq_scaled(1.0) {
        return Err(Error::NotAProjection(defect));
    }
    let (n, k) = (p.n(), p.k());
    let left = tensor(&CMatrix::identity(n, n), pm);
    let m = &left * tensor(&flip(n), &CMatrix::identity(k, k)) * &left;
    let value = min_hermitian_eigenvalue(&m);
    let w = Witness::MinEigenvalue { value };
    Ok(if value >= -psd_threshold(&m, tol) {
        Verdict::yes(w)
    } else {
        Verdict::no(w)
    })
}

/// Necessary condition for mixed-unitary channels at one environment vector:
/// `No` when `span{(I ⊗ e_i*) U (I ⊗ f)}` provably contains no unitary.
pub fn mixed_necessary(
    u: &BipartiteOperator,
    f: &CMatrix,
    tol: &Tolerances,
    budget: usize,
) -> Result<Verdict> {
    require_unitary(u, tol)?;
    let fam = kraus_from_env_vector(u, f, None, tol)?;
    Ok(mixed_at(&fam.ops, f, tol, budget, 0x6d6e, true))
}

fn mixed_at(
    kraus: &[CMatrix],
    f: &CMatrix,
    tol: &Tolerances,
    budget: usize,
    seed: u64,
    allow_search: bool,
) -> Verdict {
    if let Some(b) = diagonal_bound(kraus, tol, budget) {
        let certified = b.upper < 1.0 - 10.0 * tol.eq_tol;
        let w = Witness::MixedDiagonal {
            f: f.clone(),
            upper: b.upper,
            best: b.best,
            forms: b.forms,
            rank: b.rank,
            evaluations: b.evaluations,
            common_kernel: b.common_kernel,
        };
        return if certified {
            Verdict::no(w)
        } else {
            Verdict::unknown(w)
        };
    }
    if !allow_search {
        return Verdict::unknown(Witness::Note {
            message: "search skipped".into(),
        });
    }
    let r = search_unitary(kraus, budget, seed, 1.0 - HEURISTIC_MARGIN);
    let w = Witness::MixedSearch {
        f: f.clone(),
        best: r.best,
        restarts: r.restarts,
        evaluations: r.evaluations,
    };
    if r.best < 1.0 - HEURISTIC_MARGIN {
        Verdict {
            value: Answer::No,
            heuristic: true,
            witness: w,
        }
    } else {
        Verdict::unknown(w)
    }
}

/// Environment vectors tried by the sweep: the canonical basis, then
/// `budget` Haar-random unit vectors.
pub fn sweep_vectors(k: usize, budget: usize, seed: u64) -> Vec<CMatrix> {
    let mut rng = rng_from_seed(seed);
    (0..k)
        .map(|i| basis_vector(k, i))
        .chain((0..budget).map(|_| random_unit_vector(&mut rng, k)))
        .collect()
}

/// Runs [`mixed_necessary`] over [`sweep_vectors`]; one certified exclusion
/// suffices. Heuristic exclusions are kept only if nothing certified is found.
pub fn mixed_necessary_sweep(
    u: &BipartiteOperator,
    tol: &Tolerances,
    budget: usize,
    seed: u64,
) -> Result<Verdict> {
    require_unitary(u, tol)?;
    let mut heuristic: Option<Verdict> = None;
    let mut last: Option<Verdict> = None;
    for (idx, f) in sweep_vectors(u.k(), budget, seed).iter().enumerate() {
        let fam = kraus_from_env_vector(u, f, None, tol)?;
        let v = mixed_at(
            &fam.ops,
            f,
            tol,
            budget,
            seed ^ idx as u64,
            heuristic.is_none(),
        );
        if v.is_no() && !v.heuristic {
            return Ok(v);
        }
        if v.is_no() {
            heuristic = Some(v);
        } else if !matches!(v.witness, Witness::Note { .. }) {
            last = Some(v);
        }
    }
    Ok(heuristic.or(last).unwrap_or_else(|| {
        Verdict::unknown(Witness::Note {
            message: "no environment vector excluded".into(),
        })
    }))
}

/// Class-level entanglement-breaking verdict: `No` from a spanning
/// environment state with a non-PPT Choi matrix, `Yes` for qubits when the
/// CPPT test holds, `Unknown` otherwise.
fn eb_verdict(u: &BipartiteOperator, cppt: &Verdict, tol: &Tolerances) -> Result<Verdict> {
    let n = u.n();
    if n == 1 {
        return Ok(implied(
            Answer::Yes,
            "shape",
            "every channel on 1×1 matrices is entanglement breaking",
        ));
    }
    for beta in spanning_densities(u.k()) {
        let ch = StinespringChannel::new(u.clone(), DensityMatrix::new(beta.clone(), tol)?, tol)?;
        if !is_ppt_channel(&ch, tol)? {
            let min_eigenvalue = min_hermitian_eigenvalue(&ch.choi().partial_transpose());
            return Ok(Verdict::no(Witness::NonPptEnvironment {
                beta,
                min_eigenvalue,
            }));
        }
    }
    if n == 2 && cppt.is_yes() {
        return Ok(cppt.implied("cppt", "PPT for every environment state, exact for qubits"));
    }
    Ok(Verdict::unknown(Witness::Note {
        message: "all spanning environment states give PPT channels".into(),
    }))
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub budget: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            budget: DEFAULT_BUDGET,
            seed: 0x7573,
        }
    }
}

pub fn classify_all(u: &BipartiteOperator, tol: &Tolerances) -> Result<ClassReport> {
    classify_all_with(u, tol, &ClassifyOptions::default())
}

/// Runs every test, derives the implied verdicts, and checks the report for
/// consistency with the known inclusions.
pub fn classify_all_with(
    u: &BipartiteOperator,
    tol: &Tolerances,
    opts: &ClassifyOptions,
) -> Result<ClassReport> {
    let report = classify_unchecked(u, tol, opts)?;
    check_consistency(&report)?;
    Ok(report)
}

/// [`classify_all_with`] without the final consistency check, for callers
/// that tabulate violations instead of failing on them.
pub fn classify_unchecked(
    u: &BipartiteOperator,
    tol: &Tolerances,
    opts: &ClassifyOptions,
) -> Result<ClassReport> {
    require_unitary(u, tol)?;
    let (n, k) = (u.n(), u.k());
    let mut v: BTreeMap<String, Verdict> = BTreeMap::new();

    let aut = is_aut(u, tol)?;
    v.insert(
        "single".into(),
        aut.implied("aut", "single-β classes coincide with products"),
    );
    v.insert("aut".into(), aut);
    let unital = is_unital_member(u, tol)?;
    let a = is_block_diag_a(u, tol)?;
    let b = is_block_diag_b(u, tol)?;
    v.insert("block_diag_AB".into(), combine_ab(u, &a, &b, tol));
    v.insert(
        "prob_lin".into(),
        a.implied("block_diag_A", "the two classes are equal"),
    );
    v.insert("const".into(), is_const(u, tol)?);
    let cppt = is_cppt(u, tol)?;
    v.insert("eb_qubit".into(), eb_verdict(u, &cppt, tol)?);
    v.insert("cppt".into(), cppt);

    let necessary = if a.is_yes() {
        implied(
            Answer::Unknown,
            "block_diag_A",
            "the span contains a coefficient unitary",
        )
    } else {
        mixed_necessary_sweep(u, tol, opts.budget, opts.seed)?
    };

    let mixed = if n == 2 {
        unital.implied("unital", "unital qubit channels are mixed unitary")
    } else if a.is_yes() {
        implied(Answer::Yes, "block_diag_A", "inclusion in the mixed class")
    } else if unital.is_no() {
        implied(Answer::No, "unital", "mixed unitary channels are unital")
    } else if necessary.is_no() {
        necessary.implied("mixed_necessary", "span of Kraus operators has no unitary")
    } else {
        Verdict::unknown(Witness::Note {
            message: "no certificate either way".into(),
        })
    };
    let mixed_b = if k == 2 {
        unital.implied("unital", "unital qubit channels are mixed unitary (B side)")
    } else if b.is_yes() {
        implied(
            Answer::Yes,
            "block_diag_B",
            "inclusion in the mixed class (B side)",
        )
    } else if unital.is_no() {
        implied(Answer::No, "unital", "mixed unitary channels are unital")
    } else {
        Verdict::unknown(Witness::Note {
            message: "no certificate either way".into(),
        })
    };
    v.insert("mixed_necessary".into(), necessary);
    v.insert("mixed".into(), mixed);
    v.insert("mixed_b".into(), mixed_b);
    v.insert("unital".into(), unital);
    v.insert("block_diag_A".into(), a);
    v.insert("block_diag_B".into(), b);

    Ok(ClassReport { n, k, verdicts: v })
}

/// Implications every report must satisfy, one message per broken rule.
pub fn consistency_violations(r: &ClassReport) -> Vec<String> {
    use Answer::{No, Yes};
    let val = |s: &str| r.value(s);
    let mut out = Vec::new();
    let mut rule = |ok: bool, msg: &str| {
        if !ok {
            out.push(msg.to_string());
        }
    };
    let implies = |p: bool, q: bool| !p || q;
    rule(val("aut") == val("single"), "aut and single disagree");
    rule(
        implies(val("aut") == Yes, val("block_diag_A") == Yes),
        "aut ⇒ block_diag_A",
    );
    rule(
        implies(val("aut") == Yes, val("block_diag_B") == Yes),
        "aut ⇒ block_diag_B",
    );
    rule(
        implies(val("block_diag_A") == Yes, val("unital") == Yes),
        "block_diag_A ⇒ unital",
    );
    rule(
        implies(val("block_diag_B") == Yes, val("unital") == Yes),
        "block_diag_B ⇒ unital",
    );
    rule(
        val("prob_lin") == val("block_diag_A"),
        "prob_lin = block_diag_A",
    );
    rule(
        implies(
            val("block_diag_AB") == Yes,
            val("block_diag_A") == Yes && val("block_diag_B") == Yes,
        ),
        "block_diag_AB ⇒ both sides",
    );
    rule(
        implies(
            val("block_diag_A") == Yes && val("block_diag_B") == Yes,
            val("block_diag_AB") == Yes,
        ),
        "both sides ⇒ block_diag_AB",
    );
    if r.n >= 2 {
        rule(
            implies(val("cppt") == Yes, val("unital") == No),
            "cppt ⇒ not unital",
        );
        rule(
            implies(val("aut") == Yes, val("cppt") == No),
            "aut ⇒ not cppt",
        );
    }
    rule(
        implies(val("const") == Yes, val("cppt") == Yes),
        "const ⇒ cppt",
    );
    rule(
        implies(val("eb_qubit") == No, val("cppt") == No),
        "not eb ⇒ not cppt",
    );
    rule(
        implies(val("mixed_necessary") == No, val("block_diag_A") == No),
        "excluded span ⇒ not block_diag_A",
    );
    rule(
        implies(val("mixed_necessary") == No, val("mixed") != Yes),
        "excluded span ⇒ not mixed",
    );
    rule(
        implies(val("mixed") == Yes, val("unital") == Yes),
        "mixed ⇒ unital",
    );
    rule(
        implies(val("block_diag_A") == Yes, val("mixed") == Yes),
        "block_diag_A ⇒ mixed",
    );
    if r.n == 2 {
        rule(
            val("block_diag_A") == val("unital"),
            "n = 2: block_diag_A = unital",
        );
        rule(val("mixed") == val("unital"), "n = 2: mixed = unital");
        rule(
            implies(val("block_diag_B") == Yes, val("block_diag_A") == Yes),
            "n = 2: B ⇒ A",
        );
    }
    if r.k == 2 {
        rule(
            val("block_diag_B") == val("unital"),
            "k = 2: block_diag_B = unital",
        );
        rule(val("mixed_b") == val("unital"), "k = 2: mixed_b = unital");
    }
    if r.n == 2 && r.k == 2 {
        rule(
            val("block_diag_A") == val("block_diag_B"),
            "n = k = 2: A = B",
        );
    }
    if r.n == 1 || r.k == 1 {
        rule(val("aut") == Yes, "degenerate shape ⇒ product");
    }
    out
}

pub fn check_consistency(r: &ClassReport) -> Result<()> {
    match consistency_violations(r).into_iter().next() {
        None => Ok(()),
        Some(msg) => Err(Error::InternalInconsistency(msg)),
    }
}
