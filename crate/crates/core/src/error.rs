use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point is not inside the unit ball (|z|^2 = {norm_sq})")]
    OutsideBall { norm_sq: f64 },
    #[error("point is not in the Siegel domain (Im z_n - |z'|^2 = {defect})")]
    OutsideSiegelDomain { defect: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not in SU(n,1) (defect {defect:e})")]
    NotInGroup { defect: f64 },
    #[error("fractional-linear denominator vanishes (|w^t z + d| = {modulus:e})")]
    SingularDenominator { modulus: f64 },
    #[error("Cayley transform pole: 1 + z_n = 0")]
    CayleyPole,
    #[error("automorphy factor left its branch domain (rho = {re} + {im}i)")]
    BranchCut { re: f64, im: f64 },
    #[error("covering element violates the determinant constraint (defect {defect:e})")]
    CoveringConstraint { defect: f64 },
    #[error("invalid subgroup family: {0}")]
    InvalidFamily(String),
    #[error("weight must exceed n (n = {n}, lambda = {lambda})")]
    InvalidWeight { n: usize, lambda: f64 },
    #[error("unsupported configuration: {0}")]
    Config(String),
    #[error("sampled function does not decay at the grid boundary (max |f| = {boundary:e})")]
    TailTruncation { boundary: f64 },
    #[error("frequency lies outside the support of the kernel transform")]
    OutOfSupport,
    #[error("kernel transform is negative ({value:e}); positivity violated")]
    PositivityViolation { value: f64 },
    #[error("symbol is not invariant under the subgroup (defect {defect:e})")]
    InvarianceViolation { defect: f64 },
    #[error("symbol is not torus-invariant")]
    NotTorusInvariant,
}

pub type Result<T> = std::result::Result<T, Error>;
