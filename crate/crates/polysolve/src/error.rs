//! Error type shared by every stage of the solver.

use thiserror::Error;

/// Errors produced while building matrices, recovering the quotient algebra,
/// or extracting roots.
#[derive(Debug, Error)]
pub enum Error {
    /// The zero polynomial has no degree; it cannot take part in a square system.
    #[error("the zero polynomial has no degree (generator {index})")]
    ZeroPolynomial { index: usize },

    /// The system is not square for the requested mode.
    #[error("system is not square: {polys} polynomials for {expected} expected by the mode")]
    NotSquare { polys: usize, expected: usize },

    /// A generator is not homogeneous (projective mode) or not multihomogeneous
    /// of a consistent multidegree (multihomogeneous mode).
    #[error("generator {index} is not homogeneous for the requested mode: {detail}")]
    NotHomogeneous { index: usize, detail: String },

    /// Laurent exponents were passed to a mode that requires ordinary polynomials.
    #[error("generator {index} has negative exponents; only toric mode accepts Laurent polynomials")]
    NegativeExponent { index: usize },

    /// Evaluation of a Laurent polynomial at a point with a zero coordinate.
    #[error("cannot evaluate a Laurent polynomial at a point with a zero coordinate")]
    LaurentAtZero,

    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The singular-value profile of the Macaulay matrix does not show the
    /// expected rank drop: the system is too far from generic for the
    /// theoretical root count to be trusted.
    #[error(
        "genericity violation: singular-value gap {gap:.3e} below {required:.3e} \
         (expected corank {expected_corank} at row count {rows})"
    )]
    GenericityViolation {
        gap: f64,
        required: f64,
        expected_corank: usize,
        rows: usize,
    },

    /// The null space restricted to the multiplication-stable subspace W has
    /// rank below delta, so no invertible delta-column submatrix exists and a
    /// basis of the quotient cannot be selected.
    #[error("surjectivity failure: restricted null space has rank {rank}, need {delta}")]
    SurjectivityFailure { rank: usize, delta: usize },

    /// The surjectivity (regularity) condition failed for every attempted
    /// generic form h: the map N_h never reached full rank.
    #[error("regularity failure: rank of N_h stayed below {delta} after {attempts} draws of h (last gap {gap:.3e})")]
    RegularityFailure {
        delta: usize,
        attempts: usize,
        gap: f64,
    },

    /// A matrix pencil (A, B) was singular: A and B share a null vector, so the
    /// generalized eigenvalues are not defined.
    #[error("degenerate pencil: alpha and beta both vanish for eigenvalue {index}")]
    DegeneratePencil { index: usize },

    /// Matrices handed to the simultaneous Schur step do not commute within
    /// tolerance, so they cannot share a triangularizing transformation.
    #[error(
        "matrices {i} and {j} do not commute: relative commutator norm {value:.3e} \
         exceeds {tol:.3e}"
    )]
    CommutatorViolation { i: usize, j: usize, value: f64, tol: f64 },

    /// Shifted lattice-point support came out empty, so no matrix can be built.
    #[error("empty support after shift for generator block {index}; retry with a different shift")]
    EmptySupport { index: usize },

    /// The matrix to be built exceeds the configured size cap.
    #[error("resource limit: matrix of {rows} x {cols} exceeds the cap of {cap} entries")]
    ResourceLimit { rows: usize, cols: usize, cap: usize },

    /// A LAPACK routine reported a failure (info != 0).
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    /// Two independent computations of the same quantity disagreed.
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
