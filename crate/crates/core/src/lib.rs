//! Bipartite unitaries on `C^n ⊗ C^k`, the quantum channels they induce
//! through `ρ ↦ Tr_B(U(ρ ⊗ β)U*)`, and membership tests for the classes of
//! unitaries whose channels share a property for every environment state.
//!
//! The flat index of `e_i ⊗ f_s` is `i·k + s` throughout, so the `(i, j)`
//! block of an operator is the `k × k` matrix `X[i·k + s, j·k + t]`.

pub mod blocksvd;
pub mod channels;
pub mod classify;
pub mod error;
pub mod generate;
pub mod json;
pub mod matcore;
pub mod study;
pub mod tangent;

pub use blocksvd::{
    canonicalize, compute_block_svd, has_block_svd, BlockSVD, BlockSvdCheck, BlockTerm,
    CommutatorWitness, Family,
};
pub use channels::{Answer, ChoiMatrix, DensityMatrix, KrausFamily, StinespringChannel};
pub use classify::{
    classify_all, classify_all_with, ClassReport, ClassifyOptions, Side, Verdict, Witness,
};
pub use error::{Error, Result};
pub use matcore::{c64, BipartiteOperator, BipartiteShape, CMatrix, Tolerances, C64};
pub use study::{run_study, Generator, StudySpec, StudySummary};
pub use tangent::{DimensionReport, FormulaValue};
