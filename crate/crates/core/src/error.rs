use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not normal (‖XX* − X*X‖ = {0:.3e})")]
    NotNormal(f64),

    #[error("operator is not unitary (‖UU* − I‖ = {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not a member of the unital class (‖UΓ(UΓ)* − I‖ = {0:.3e})")]
    NotUnitalMember(f64),

    #[error("operator has no block-diagonal SVD: {0}")]
    NotBlockDiagonal(String),

    #[error("eigenprojector pairing is ambiguous: {0}")]
    PairingAmbiguity(String),

    #[error("family is not made of commuting normal matrices (defect {0:.3e})")]
    NotCommutingFamily(f64),

    #[error("matrix is not an orthogonal projection (defect {0:.3e})")]
    NotAProjection(f64),

    #[error("vector is not of unit norm (‖f‖ = {0})")]
    NonUnitVector(f64),

    #[error("basis is not orthonormal (defect {0:.3e})")]
    NonOrthonormalBasis(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reconstruction failed: residual {0:.3e}")]
    Reconstruction(f64),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
