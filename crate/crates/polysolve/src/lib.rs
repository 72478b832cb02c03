//! Numerical solver for square systems of polynomial equations.
//!
//! The pipeline has four stages: build a Macaulay-type resultant matrix for
//! the system, compute its left null space by SVD, pick a well-conditioned
//! monomial basis of the quotient algebra by column-pivoted QR, and read the
//! roots off the joint eigenvalues of the resulting multiplication matrices
//! (one shared Schur decomposition). Four matrix flavors cover affine dense,
//! toric (Newton-polytope supported), homogeneous, and multihomogeneous
//! systems.

pub mod error;
pub mod linalg;
pub mod macaulay;
pub mod poly;
pub mod polytope;
pub mod quotient;
pub mod roots;
pub mod solve;

pub use error::{Error, Result};
pub use poly::{Polynomial, PolynomialSystem, Term};
pub use solve::{solve, SolveConfig, SolveReport};

/// Selects which of the four constructions the pipeline runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Dense matrix over all monomials up to the Macaulay degree; roots in
    /// complex affine space.
    Affine,
    /// Support-driven matrix over shifted Newton-polytope lattice points;
    /// roots in the complex torus (no zero coordinates).
    Toric,
    /// Homogeneous matrix in one block of projective coordinates; roots in
    /// projective space, including roots at infinity.
    Projective,
    /// One homogeneous block per factor of a product of projective spaces.
    Multihom,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Affine => "affine",
            Mode::Toric => "toric",
            Mode::Projective => "projective",
            Mode::Multihom => "multihom",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "affine" => Ok(Mode::Affine),
            "toric" => Ok(Mode::Toric),
            "projective" => Ok(Mode::Projective),
            "multihom" => Ok(Mode::Multihom),
            other => Err(Error::InvalidInput(format!("unknown mode '{other}'"))),
        }
    }
}
