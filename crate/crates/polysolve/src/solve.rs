//! One-call solving: pick a mode, build the quotient data, extract the
//! roots, attach residuals, and collect diagnostics in a single report.
//!
//! Affine and toric systems pass through unchanged. The graded modes take
//! the same affine square system and homogenize it internally: projective
//! mode adds one leading coordinate, multihomogeneous mode adds one leading
//! coordinate per declared block. Roots then come back in those homogeneous
//! coordinates, scaled to largest modulus one per block, so solutions at
//! infinity appear as roots whose leading coordinate vanishes.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::poly::{block_ranges, Polynomial, PolynomialSystem};
use crate::quotient::{
    build_affine, build_multihom, build_projective, build_toric, QuotientConfig,
};
use crate::roots::{
    attach_residuals, extract_roots_with, ExtractConfig, RootSet, DEFAULT_TOL_COMMUTE,
};
use crate::Mode;

/// Residual above which a toric root is suspected of lying off the torus.
pub const OFF_TORUS_RESIDUAL: f64 = 1e-6;

/// Everything the solver needs besides the system itself.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub mode: Mode,
    /// Affine variables per projective factor, required in multihom mode:
    /// blocks [1, 1] solve a two-variable system on P^1 x P^1.
    pub blocks: Option<Vec<usize>>,
    /// Build-stage knobs; `quotient.seed` drives every random choice.
    pub quotient: QuotientConfig,
    /// Relative commutator tolerance for the shared Schur step.
    pub tol_commute: f64,
    /// Eigenvalue clustering width; None derives it from the data.
    pub tol_cluster: Option<f64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: Mode::Affine,
            blocks: None,
            quotient: QuotientConfig::default(),
            tol_commute: DEFAULT_TOL_COMMUTE,
            tol_cluster: None,
        }
    }
}

impl SolveConfig {
    pub fn for_mode(mode: Mode) -> Self {
        SolveConfig { mode, ..SolveConfig::default() }
    }
}

/// Roots plus the diagnostics of the run that produced them.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub roots: RootSet,
    /// Theoretical root count; the multiplicities in `roots` sum to it.
    pub delta: usize,
    /// Singular-value gap at the null-space cut.
    pub gap: f64,
    /// Condition number of the basis change Nstar.
    pub cond_nstar: f64,
    /// Rows and columns of the Macaulay matrix.
    pub matrix_shape: (usize, usize),
    /// Total wall-clock seconds across all stages.
    pub t_total: f64,
}

/// Solves the square system in the configured mode and returns all isolated
/// roots with residuals attached. Residuals are measured against the system
/// actually solved: the input itself in the corner modes, its homogenized
/// form in the graded modes.
pub fn solve(system: &PolynomialSystem, cfg: &SolveConfig) -> Result<SolveReport> {
    let started = Instant::now();
    let (rep, graded) = match cfg.mode {
        Mode::Affine => (build_affine(system, &cfg.quotient)?, None),
        Mode::Toric => (build_toric(system, &cfg.quotient)?, None),
        Mode::Projective => {
            let hsys = homogenized(system)?;
            (build_projective(&hsys, &cfg.quotient)?, Some(hsys))
        }
        Mode::Multihom => {
            let blocks = cfg.blocks.as_deref().ok_or_else(|| {
                Error::InvalidInput(
                    "multihomogeneous mode needs the affine block sizes".into(),
                )
            })?;
            let (msys, sizes) = multihomogenized(system, blocks)?;
            (build_multihom(&msys, &sizes, &cfg.quotient)?, Some(msys))
        }
    };
    let extract = ExtractConfig {
        seed: cfg.quotient.seed,
        tol_commute: cfg.tol_commute,
        tol_cluster: cfg.tol_cluster,
    };
    let mut roots = extract_roots_with(&rep, &extract)?;
    attach_residuals(&mut roots, graded.as_ref().unwrap_or(system));
    if cfg.mode == Mode::Toric {
        flag_off_torus(&mut roots);
    }
    Ok(SolveReport {
        delta: rep.delta,
        gap: rep.gap,
        cond_nstar: rep.cond_nstar,
        matrix_shape: rep.matrix_shape,
        t_total: started.elapsed().as_secs_f64(),
        roots,
    })
}

/// Homogenizes each polynomial to its own total degree, adding one shared
/// leading coordinate. The result is the system the projective mode solves.
pub fn homogenized(system: &PolynomialSystem) -> Result<PolynomialSystem> {
    check_nonnegative(system)?;
    let polys = system
        .polys
        .iter()
        .map(|p| p.homogenize(p.total_degree().unwrap_or(0)))
        .collect();
    PolynomialSystem::homogeneous(polys)
}

/// Homogenizes each polynomial per block to its own block degrees, adding one
/// leading coordinate per block. Returns the system the multihomogeneous mode
/// solves together with the homogeneous block sizes.
pub fn multihomogenized(
    system: &PolynomialSystem,
    affine_blocks: &[usize],
) -> Result<(PolynomialSystem, Vec<usize>)> {
    if affine_blocks.is_empty() || affine_blocks.contains(&0) {
        return Err(Error::InvalidInput(
            "every block needs at least one affine variable".into(),
        ));
    }
    let total: usize = affine_blocks.iter().sum();
    if total != system.nvars {
        return Err(Error::InvalidInput(format!(
            "blocks cover {total} variables, the system has {}",
            system.nvars
        )));
    }
    check_nonnegative(system)?;
    let ranges = block_ranges(affine_blocks);
    let polys: Vec<Polynomial> = system
        .polys
        .iter()
        .map(|p| {
            let target: Vec<i32> = ranges
                .iter()
                .map(|r| p.degree_in_block(r.clone()).unwrap_or(0))
                .collect();
            p.multihomogenize(affine_blocks, &target)
        })
        .collect();
    let sizes: Vec<usize> = affine_blocks.iter().map(|&b| b + 1).collect();
    let validated = PolynomialSystem::multihomogeneous(&sizes, polys)?;
    Ok((validated, sizes))
}

/// Homogenization would silently absorb negative exponents into the new
/// coordinate, so reject them up front; only the toric mode takes Laurent
/// input.
fn check_nonnegative(system: &PolynomialSystem) -> Result<()> {
    for (i, p) in system.polys.iter().enumerate() {
        if p.terms().iter().any(|t| t.exps.iter().any(|&e| e < 0)) {
            return Err(Error::NegativeExponent { index: i });
        }
    }
    Ok(())
}

/// Adds a warning when toric roots fail their residual check. The torus
/// count only sees solutions with all coordinates nonzero; large residuals
/// usually mean the system also has solutions off the torus.
fn flag_off_torus(set: &mut RootSet) {
    let bad = set
        .roots
        .iter()
        .filter(|r| r.residual.is_nan() || r.residual > OFF_TORUS_RESIDUAL)
        .count();
    if bad > 0 {
        set.warnings.push(format!(
            "{bad} of {} roots exceed the residual bound {OFF_TORUS_RESIDUAL:.0e}; the \
             system may have solutions with zero coordinates, which the toric mode cannot \
             represent",
            set.roots.len()
        ));
    }
}
