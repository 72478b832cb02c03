//! Quotient-algebra recovery from a Macaulay matrix: the left null space N,
//! its restriction to the multiplication-stable monomials, a basis choice by
//! column-pivoted QR, and the commuting multiplication matrices
//! m_i = Nstar^{-1} N_i whose eigenvalues carry the root coordinates.
//!
//! The corner modes (affine, toric) multiply basis monomials by each variable
//! directly. The graded modes (projective, multihomogeneous) first contract N
//! with products of generic linear forms h so that the operators represent
//! multiplication by x_i/h; their eigenvalue ratios are projective
//! coordinates and do not depend on the choice of h or of the null-space
//! basis.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, col_piv_qr, complex_normal, lu_solve, singular_values, svd_left, unit_complex, CMat,
};
use crate::macaulay::{
    dense_macaulay, homogeneous_macaulay, multihom_macaulay, toric_macaulay, MacaulayMatrix,
    MonomialIndex, DEFAULT_MAX_ENTRIES,
};
use crate::poly::{block_ranges, Polynomial, PolynomialSystem};
use crate::polytope::{bkk_bound, multihom_bezout};
use crate::Mode;

/// Default RNG seed for the generic choices (h forms, toric shift,
/// block-diagonal preconditioner). Fixed so that repeated runs agree.
pub const DEFAULT_SEED: u64 = 7;

/// Minimum acceptable ratio between the smallest kept and largest dropped
/// singular value when splitting off the null space.
pub const DEFAULT_GAP_MIN: f64 = 1e3;

/// Condition-number threshold on Nstar above which a warning is recorded.
pub const COND_WARN: f64 = 1e12;

/// Relative annihilation tolerance: the recovered null space is expected to
/// send the matrix columns below this multiple of the matrix norm.
pub const DEFAULT_TOL_NULL: f64 = 1e-10;

/// Gap threshold for the regularity diagnostic: the degree is declared
/// regular when sigma_delta / sigma_1 of N_h exceeds this.
pub const REGULARITY_TOL: f64 = 1e-8;

/// Relative threshold on pivoted-QR diagonal entries when counting the
/// numerical rank of the restricted null space.
const QR_RANK_TOL: f64 = 1e-14;

/// Magnitude of the random negative shift used to pin down the toric row
/// support; small enough that the shifted polytopes keep their lattice
/// points.
const TORIC_SHIFT_SCALE: f64 = 1e-3;

/// How many fresh draws of the generic data (h forms, toric shift) are tried
/// before giving up.
pub const DEFAULT_MAX_H_ATTEMPTS: usize = 3;

/// First shift vector `build_toric` tries for this seed. Exposed so a matrix
/// dump can reproduce the exact toric matrix the solver starts from.
pub fn toric_shift(nvars: usize, seed: u64) -> Vec<f64> {
    draw_toric_shift(&mut ChaCha8Rng::seed_from_u64(seed), nvars)
}

fn draw_toric_shift<R: Rng>(rng: &mut R, nvars: usize) -> Vec<f64> {
    (0..nvars)
        .map(|_| -TORIC_SHIFT_SCALE * (1.0 - rng.random::<f64>()))
        .collect()
}

/// Orthonormal basis of the left null space of a Macaulay matrix, stored as
/// the rows of `matrix` (delta x m, columns indexed like the matrix rows).
#[derive(Clone, Debug)]
pub struct NullSpaceMap {
    /// delta x m matrix with orthonormal rows annihilating the Macaulay
    /// matrix columns.
    pub matrix: CMat,
    /// Expected corank, fixed from the theoretical root count.
    pub delta: usize,
    /// Ratio sigma_{m-delta} / sigma_{m-delta+1}; large means the rank drop
    /// is clearly visible.
    pub gap: f64,
    /// Measured relative residual of N * M on random probe vectors, an upper
    /// bound witness for how well the rows annihilate the columns.
    pub annihilation: f64,
}

/// Computes the left null space of `mac` with the corank fixed to `delta`
/// from the theoretical root count, instead of guessing the rank from a
/// tolerance. The singular-value gap at the cut must reach `gap_min`,
/// otherwise the system is reported as too far from generic.
pub fn null_space(mac: &MacaulayMatrix, delta: usize, gap_min: f64) -> Result<NullSpaceMap> {
    if delta == 0 {
        return Err(Error::InvalidInput("expected corank must be at least one".into()));
    }
    let m = mac.rows.len();
    let violation = |gap: f64| Error::GenericityViolation {
        gap,
        required: gap_min,
        expected_corank: delta,
        rows: m,
    };
    if delta > m {
        return Err(violation(0.0));
    }
    let rank = m - delta;
    let (sigma, u) = svd_left(&mac.entries)?;
    if rank > sigma.len() {
        // rank(M) <= min(rows, cols) < rows - delta: the null space is
        // forcibly bigger than delta.
        return Err(violation(0.0));
    }
    let gap = if rank == 0 {
        f64::INFINITY
    } else {
        let kept = sigma[rank - 1];
        let dropped = if rank < sigma.len() { sigma[rank] } else { 0.0 };
        if dropped > 0.0 {
            kept / dropped
        } else if kept > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    };
    if gap < gap_min {
        return Err(violation(gap));
    }
    let tail: Vec<usize> = (rank..m).collect();
    let matrix = u.select_cols(&tail).dagger();
    let annihilation = annihilation_probe(&matrix, &mac.entries);
    Ok(NullSpaceMap { matrix, delta, gap, annihilation })
}

/// Estimates ||N * M|| / ||M|| by applying both factors to a few random unit
/// vectors. A full product would dominate the runtime on large matrices; two
/// probes are enough to flag a null space that fails to annihilate.
fn annihilation_probe(null: &CMat, matrix: &CMat) -> f64 {
    let mnorm = matrix.frob();
    if mnorm == 0.0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x616e6e);
    let mut worst = 0.0f64;
    for _ in 0..2 {
        let v = CMat::from_fn(matrix.ncols(), 1, |_, _| complex_normal(&mut rng));
        let reached = null.mul(&matrix.mul(&v)).frob();
        worst = worst.max(reached / (mnorm * v.frob()));
    }
    worst
}

/// Row positions of the monomials that stay inside the row support after
/// multiplication by every variable: degree < rho in affine mode, and the
/// set {alpha : alpha + e_i in S for all i} in toric mode.
pub fn stable_positions(mac: &MacaulayMatrix) -> Result<Vec<usize>> {
    match mac.mode {
        Mode::Affine => {
            let rho = mac.rho[0];
            Ok((0..mac.rows.len())
                .filter(|&p| mac.rows.monomial(p).iter().sum::<i32>() < rho)
                .collect())
        }
        Mode::Toric => {
            let nvars = mac.rows.nvars();
            Ok((0..mac.rows.len())
                .filter(|&p| {
                    let alpha = mac.rows.monomial(p);
                    (0..nvars).all(|i| {
                        let mut shifted = alpha.to_vec();
                        shifted[i] += 1;
                        mac.rows.position(&shifted).is_some()
                    })
                })
                .collect())
        }
        Mode::Projective | Mode::Multihom => Err(Error::InvalidInput(
            "graded modes take basis candidates from a lower degree, not from a stable subset; \
             use build_projective or build_multihom"
                .into(),
        )),
    }
}

/// Restricts the null-space map to the multiplication-stable columns.
/// Returns the restricted matrix and the row positions of its columns.
pub fn restrict_to_w(null: &NullSpaceMap, mac: &MacaulayMatrix) -> Result<(CMat, Vec<usize>)> {
    if null.matrix.ncols() != mac.rows.len() {
        return Err(Error::InvalidInput(format!(
            "null-space map has {} columns but the matrix has {} rows",
            null.matrix.ncols(),
            mac.rows.len()
        )));
    }
    let positions = stable_positions(mac)?;
    if positions.is_empty() {
        return Err(Error::SurjectivityFailure { rank: 0, delta: null.delta });
    }
    Ok((null.matrix.select_cols(&positions), positions))
}

/// Basis chosen from the columns of a restricted null-space map.
#[derive(Clone, Debug)]
pub struct SelectedBasis {
    /// Column positions of the chosen basis, ascending.
    pub positions: Vec<usize>,
    /// The chosen delta x delta submatrix.
    pub nstar: CMat,
    /// Spectral condition number of `nstar`.
    pub cond: f64,
    /// Ratio of the delta-th to the first pivoted-QR diagonal entry; small
    /// values mean the basis is close to rank-deficient.
    pub rank_gap: f64,
}

/// Chooses `delta` columns of `n_w` by column-pivoted QR so that the
/// resulting submatrix is well conditioned.
pub fn select_basis(n_w: &CMat, delta: usize) -> Result<SelectedBasis> {
    if delta == 0 {
        return Err(Error::InvalidInput("cannot select an empty basis".into()));
    }
    if n_w.nrows() != delta {
        return Err(Error::InvalidInput(format!(
            "restricted null space has {} rows but the expected root count is {delta}",
            n_w.nrows()
        )));
    }
    if n_w.ncols() == 0 {
        return Err(Error::SurjectivityFailure { rank: 0, delta });
    }
    let (pivots, rdiag) = col_piv_qr(n_w)?;
    let top = rdiag.first().copied().unwrap_or(0.0);
    let rank = rdiag.iter().filter(|&&r| r > top * QR_RANK_TOL).count();
    if rank < delta {
        return Err(Error::SurjectivityFailure { rank, delta });
    }
    let rank_gap = rdiag[delta - 1] / top;
    let mut positions: Vec<usize> = pivots[..delta].to_vec();
    positions.sort_unstable();
    let nstar = n_w.select_cols(&positions);
    let (_, cond) = rank_and_cond(&nstar)?;
    Ok(SelectedBasis { positions, nstar, cond, rank_gap })
}

/// Row positions of x_var * b for every basis monomial b. The products must
/// lie in the row support; a miss means the basis was not taken from the
/// stable set.
pub fn multiply_positions(
    rows: &MonomialIndex,
    basis: &[Vec<i32>],
    var: usize,
) -> Result<Vec<usize>> {
    basis
        .iter()
        .map(|mono| {
            let mut shifted = mono.clone();
            shifted[var] += 1;
            rows.position(&shifted).ok_or_else(|| {
                Error::Inconsistency(format!(
                    "product of basis monomial {mono:?} with variable {var} has no row"
                ))
            })
        })
        .collect()
}

/// Generic-choice knobs shared by the four quotient builders. The forcing
/// fields pin data that is otherwise drawn from the seeded RNG; they exist
/// so that known reference values can be reproduced exactly.
#[derive(Clone, Debug)]
pub struct QuotientConfig {
    /// Seed for every random choice (h forms, toric shift, preconditioner).
    pub seed: u64,
    /// Minimum singular-value gap accepted by `null_space`.
    pub gap_min: f64,
    /// Relative annihilation residual above which a warning is recorded.
    pub tol_null: f64,
    /// Condition-number bound on Nstar above which a warning is recorded.
    pub cond_warn: f64,
    /// Entry cap forwarded to the matrix builders.
    pub max_entries: usize,
    /// Number of draws of the generic data before giving up.
    pub max_h_attempts: usize,
    /// Pinned linear forms for the graded modes: one coefficient list per
    /// block (a single list in projective mode).
    pub forced_h: Option<Vec<Vec<Complex64>>>,
    /// Pinned basis monomials instead of the pivoted-QR choice.
    pub forced_basis: Option<Vec<Vec<i32>>>,
    /// Pinned toric row-support shift instead of the seeded one.
    pub shift: Option<Vec<f64>>,
    /// Whether the multihomogeneous builder applies the random block-diagonal
    /// change of coordinates that moves all roots into the torus.
    pub precondition: bool,
}

impl Default for QuotientConfig {
    fn default() -> Self {
        QuotientConfig {
            seed: DEFAULT_SEED,
            gap_min: DEFAULT_GAP_MIN,
            tol_null: DEFAULT_TOL_NULL,
            cond_warn: COND_WARN,
            max_entries: DEFAULT_MAX_ENTRIES,
            max_h_attempts: DEFAULT_MAX_H_ATTEMPTS,
            forced_h: None,
            forced_basis: None,
            shift: None,
            precondition: true,
        }
    }
}

/// Wall-clock seconds spent in each pipeline stage. The builders fill the
/// first three; root extraction fills the last.
#[derive(Clone, Copy, Debug, Default)]
pub struct Timings {
    /// Macaulay matrix construction, including any preconditioning.
    pub t_matrix: f64,
    /// Null-space computation by singular value decomposition.
    pub t_null: f64,
    /// Basis selection and assembly of the multiplication matrices.
    pub t_basis: f64,
    /// Shared Schur decomposition, clustering, and coordinate assembly.
    pub t_schur: f64,
}

/// The recovered quotient-algebra data: a basis, the change-of-basis matrix
/// Nstar, one numerator slice N_i per variable, and the multiplication
/// matrices m_i = Nstar^{-1} N_i.
///
/// In the corner modes m_i represents multiplication by x_i; in the graded
/// modes it represents x_i/h (projective) or x_ij/h_i (multihomogeneous), so
/// only eigenvalue ratios within a block are coordinates.
#[derive(Clone, Debug)]
pub struct QuotientRep {
    pub mode: Mode,
    /// Number of roots counted with multiplicity.
    pub delta: usize,
    /// Basis monomials, one exponent vector per basis element.
    pub basis: Vec<Vec<i32>>,
    /// Invertible delta x delta restriction of the (contracted) null space.
    pub nstar: CMat,
    /// Numerator slices, one per variable in flat variable order.
    pub n_slices: Vec<CMat>,
    /// Commuting multiplication matrices, aligned with `n_slices`.
    pub mult: Vec<CMat>,
    /// Spectral condition number of `nstar`.
    pub cond_nstar: f64,
    /// Singular-value gap reported by `null_space`.
    pub gap: f64,
    /// Non-fatal diagnostics collected during the build.
    pub warnings: Vec<String>,
    /// Block-diagonal change of coordinates applied before building, if any;
    /// roots of the preconditioned system map back as z = precondition * z'.
    pub precondition: Option<CMat>,
    /// Projective block sizes in the graded modes (a single block covering
    /// all variables in projective mode), None in the corner modes.
    pub block_sizes: Option<Vec<usize>>,
    /// Rows and columns of the Macaulay matrix the build went through.
    pub matrix_shape: (usize, usize),
    /// Stage timings; `t_schur` stays zero until root extraction.
    pub timings: Timings,
}

/// Builds the quotient data for a square affine system through the dense
/// Macaulay matrix. The root count is the Bezout number, the product of the
/// total degrees.
pub fn build_affine(system: &PolynomialSystem, cfg: &QuotientConfig) -> Result<QuotientRep> {
    let started = Instant::now();
    let mac = dense_macaulay(system, cfg.max_entries)?;
    let t_matrix = started.elapsed().as_secs_f64();
    let delta = product_count(&system.degrees())?;
    let mut rep = corner_quotient(&mac, delta, cfg)?;
    rep.timings.t_matrix = t_matrix;
    Ok(rep)
}

/// Builds the quotient data for a square system through the toric Macaulay
/// matrix. The root count is the BKK bound, the mixed volume of the Newton
/// polytopes.
pub fn build_toric(system: &PolynomialSystem, cfg: &QuotientConfig) -> Result<QuotientRep> {
    let count = bkk_bound(system)?;
    if count == 0 {
        return Err(Error::InvalidInput(
            "mixed volume of the Newton polytopes is zero; there are no isolated torus roots"
                .into(),
        ));
    }
    let delta = usize::try_from(count)
        .map_err(|_| Error::InvalidInput("theoretical root count overflows".into()))?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut attempt = 0;
    let mac = loop {
        let v: Vec<f64> = match &cfg.shift {
            Some(s) => s.clone(),
            None => draw_toric_shift(&mut rng, system.nvars),
        };
        match toric_macaulay(system, &v, cfg.max_entries) {
            Ok(mac) => break mac,
            Err(Error::EmptySupport { .. })
                if cfg.shift.is_none() && attempt + 1 < cfg.max_h_attempts =>
            {
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let t_matrix = started.elapsed().as_secs_f64();
    let mut rep = corner_quotient(&mac, delta, cfg)?;
    rep.timings.t_matrix = t_matrix;
    Ok(rep)
}

/// Builds the quotient data for a homogeneous system (one more variable than
/// equations) at degree rho. The multiplication matrices represent x_i/h for
/// a generic linear form h; their joint eigenvalue tuples are the projective
/// coordinates of the roots.
pub fn build_projective(system: &PolynomialSystem, cfg: &QuotientConfig) -> Result<QuotientRep> {
    let started = Instant::now();
    let mac = homogeneous_macaulay(system, cfg.max_entries)?;
    let t_matrix = started.elapsed().as_secs_f64();
    let degrees: Vec<i32> =
        system.polys.iter().map(|p| p.total_degree().unwrap_or(0)).collect();
    let delta = product_count(&degrees)?;
    let null_started = Instant::now();
    let null = null_space(&mac, delta, cfg.gap_min)?;
    let t_null = null_started.elapsed().as_secs_f64();
    let basis_started = Instant::now();
    let nvars = mac.rows.nvars();
    let rho = mac.rho[0];
    let bsub = MonomialIndex::deg_exact(nvars, rho - 1);
    let slices: Vec<CMat> = (0..nvars)
        .map(|i| {
            let cols = multiply_positions(&mac.rows, bsub.monomials(), i)?;
            Ok(null.matrix.select_cols(&cols))
        })
        .collect::<Result<_>>()?;
    if let Some(hs) = &cfg.forced_h {
        if hs.len() != 1 || hs[0].len() != nvars {
            return Err(Error::InvalidInput(format!(
                "forced h must be a single linear form with {nvars} coefficients"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pinned = cfg.forced_h.is_some() || cfg.forced_basis.is_some();
    let mut attempt = 0;
    let (positions, nstar, cond) = loop {
        let h: Vec<Complex64> = match &cfg.forced_h {
            Some(hs) => hs[0].clone(),
            None => (0..nvars).map(|_| unit_complex(&mut rng)).collect(),
        };
        let n_h = combine_slices(&slices, &h);
        match pick_basis(&n_h, delta, cfg.forced_basis.as_deref(), bsub.monomials()) {
            Ok(chosen) => break chosen,
            Err(Error::SurjectivityFailure { .. }) if !pinned => {
                attempt += 1;
                if attempt >= cfg.max_h_attempts {
                    return Err(Error::RegularityFailure {
                        delta,
                        attempts: attempt,
                        gap: rank_gap(&n_h, delta)?,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    };
    let n_slices: Vec<CMat> = slices.iter().map(|s| s.select_cols(&positions)).collect();
    let mult = n_slices.iter().map(|ni| lu_solve(&nstar, ni)).collect::<Result<Vec<_>>>()?;
    let basis = positions.iter().map(|&p| bsub.monomial(p).to_vec()).collect();
    Ok(QuotientRep {
        mode: Mode::Projective,
        delta,
        basis,
        nstar,
        n_slices,
        mult,
        cond_nstar: cond,
        gap: null.gap,
        warnings: build_warnings(cond, null.annihilation, cfg),
        precondition: None,
        block_sizes: Some(vec![nvars]),
        matrix_shape: (mac.entries.nrows(), mac.entries.ncols()),
        timings: Timings {
            t_matrix,
            t_null,
            t_basis: basis_started.elapsed().as_secs_f64(),
            t_schur: 0.0,
        },
    })
}

/// Builds the quotient data for a multihomogeneous system on a product of
/// projective spaces. The multiplication matrices represent x_ij/h_i for
/// generic per-block linear forms h_i. By default a random block-diagonal
/// change of coordinates is applied first so that no root has a zero
/// coordinate; the matrix is returned in `precondition` for mapping roots
/// back.
pub fn build_multihom(
    system: &PolynomialSystem,
    block_sizes: &[usize],
    cfg: &QuotientConfig,
) -> Result<QuotientRep> {
    let validated = PolynomialSystem::multihomogeneous(block_sizes, system.polys.clone())?;
    let ranges = block_ranges(block_sizes);
    let k = block_sizes.len();
    let nvars = validated.nvars;
    let degrees = validated
        .polys
        .iter()
        .map(|p| p.multidegree(&ranges))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Inconsistency("validated system lost its multidegrees".into()))?;
    let dims: Vec<usize> = block_sizes.iter().map(|&s| s - 1).collect();
    let count = multihom_bezout(&dims, &degrees)?;
    if count == 0 {
        return Err(Error::InvalidInput(
            "the block-degree root count is zero; there are no isolated roots".into(),
        ));
    }
    let delta = usize::try_from(count)
        .map_err(|_| Error::InvalidInput("theoretical root count overflows".into()))?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let precondition = if cfg.precondition {
        let mut w = CMat::zeros(nvars, nvars);
        for range in &ranges {
            for a in range.clone() {
                for b in range.clone() {
                    w[(a, b)] = complex_normal(&mut rng);
                }
            }
        }
        Some(w)
    } else {
        None
    };
    let work = match &precondition {
        Some(w) => PolynomialSystem::multihomogeneous(
            block_sizes,
            validated.polys.iter().map(|p| p.apply_linear(w)).collect(),
        )?,
        None => validated,
    };
    let mac = multihom_macaulay(&work, block_sizes, cfg.max_entries)?;
    let t_matrix = started.elapsed().as_secs_f64();
    let null_started = Instant::now();
    let null = null_space(&mac, delta, cfg.gap_min)?;
    let t_null = null_started.elapsed().as_secs_f64();
    let basis_started = Instant::now();
    let rho_sub: Vec<i32> = mac.rho.iter().map(|&r| r - 1).collect();
    let bsub = MonomialIndex::multideg_exact(block_sizes, &rho_sub);
    if let Some(hs) = &cfg.forced_h {
        if hs.len() != k || hs.iter().zip(block_sizes).any(|(h, &s)| h.len() != s) {
            return Err(Error::InvalidInput(
                "forced h must provide one linear form per block, with one coefficient per \
                 block variable"
                    .into(),
            ));
        }
    }
    let pinned = cfg.forced_h.is_some() || cfg.forced_basis.is_some();
    let mut attempt = 0;
    let (hpolys, positions, nstar, cond) = loop {
        let coeff_sets: Vec<Vec<Complex64>> = match &cfg.forced_h {
            Some(hs) => hs.clone(),
            None => block_sizes
                .iter()
                .map(|&s| (0..s).map(|_| unit_complex(&mut rng)).collect())
                .collect(),
        };
        let hpolys: Vec<Polynomial> = coeff_sets
            .iter()
            .zip(&ranges)
            .map(|(coeffs, range)| linear_form(nvars, range.clone(), coeffs))
            .collect();
        let hprod = hpolys
            .iter()
            .fold(Polynomial::constant(nvars, c64(1.0, 0.0)), |acc, h| acc.mul(h));
        let kmat = k_matrix(&mac.rows, bsub.monomials(), &hprod)?;
        let n_h = null.matrix.mul(&kmat);
        match pick_basis(&n_h, delta, cfg.forced_basis.as_deref(), bsub.monomials()) {
            Ok((positions, nstar, cond)) => break (hpolys, positions, nstar, cond),
            Err(Error::SurjectivityFailure { .. }) if !pinned => {
                attempt += 1;
                if attempt >= cfg.max_h_attempts {
                    return Err(Error::RegularityFailure {
                        delta,
                        attempts: attempt,
                        gap: rank_gap(&n_h, delta)?,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    };
    let basis: Vec<Vec<i32>> =
        positions.iter().map(|&p| bsub.monomial(p).to_vec()).collect();
    let mut n_slices = Vec::with_capacity(nvars);
    let mut mult = Vec::with_capacity(nvars);
    for (i, range) in ranges.iter().enumerate() {
        let rest = hpolys
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != i)
            .fold(Polynomial::constant(nvars, c64(1.0, 0.0)), |acc, (_, h)| acc.mul(h));
        for v in range.clone() {
            let mut exps = vec![0; nvars];
            exps[v] = 1;
            let factor = rest.mul_monomial(c64(1.0, 0.0), &exps);
            let kij = k_matrix(&mac.rows, &basis, &factor)?;
            let nij = null.matrix.mul(&kij);
            mult.push(lu_solve(&nstar, &nij)?);
            n_slices.push(nij);
        }
    }
    Ok(QuotientRep {
        mode: Mode::Multihom,
        delta,
        basis,
        nstar,
        n_slices,
        mult,
        cond_nstar: cond,
        gap: null.gap,
        warnings: build_warnings(cond, null.annihilation, cfg),
        precondition,
        block_sizes: Some(block_sizes.to_vec()),
        matrix_shape: (mac.entries.nrows(), mac.entries.ncols()),
        timings: Timings {
            t_matrix,
            t_null,
            t_basis: basis_started.elapsed().as_secs_f64(),
            t_schur: 0.0,
        },
    })
}

/// Diagnostic for graded null spaces: whether contracting `n` with a seeded
/// generic linear form keeps full rank at the degree below, i.e. whether the
/// construction degree of `index` is high enough to recover the quotient.
/// Returns the verdict together with the ratio sigma_delta / sigma_1 of N_h.
pub fn regularity_check(n: &CMat, index: &MonomialIndex, seed: u64) -> (bool, f64) {
    let delta = n.nrows();
    if delta == 0 || index.is_empty() || index.len() != n.ncols() {
        return (false, 0.0);
    }
    let nvars = index.nvars();
    let degree: i32 = index.monomial(0).iter().sum();
    if degree < 1 {
        return (false, 0.0);
    }
    let bsub = MonomialIndex::deg_exact(nvars, degree - 1);
    let mut slices = Vec::with_capacity(nvars);
    for i in 0..nvars {
        match multiply_positions(index, bsub.monomials(), i) {
            Ok(cols) => slices.push(n.select_cols(&cols)),
            Err(_) => return (false, 0.0),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<Complex64> = (0..nvars).map(|_| unit_complex(&mut rng)).collect();
    let n_h = combine_slices(&slices, &h);
    let gap = match singular_values(&n_h) {
        Ok(sv) if sv.len() >= delta && sv[0] > 0.0 => sv[delta - 1] / sv[0],
        _ => 0.0,
    };
    (gap > REGULARITY_TOL, gap)
}

/// Shared tail of the affine and toric builders: restrict to the stable
/// monomials, choose the basis, and form the per-variable operators.
fn corner_quotient(mac: &MacaulayMatrix, delta: usize, cfg: &QuotientConfig) -> Result<QuotientRep> {
    let null_started = Instant::now();
    let null = null_space(mac, delta, cfg.gap_min)?;
    let t_null = null_started.elapsed().as_secs_f64();
    let basis_started = Instant::now();
    let (n_w, w_positions) = restrict_to_w(&null, mac)?;
    let w_monomials: Vec<Vec<i32>> =
        w_positions.iter().map(|&p| mac.rows.monomial(p).to_vec()).collect();
    let (w_picked, nstar, cond) =
        pick_basis(&n_w, delta, cfg.forced_basis.as_deref(), &w_monomials)?;
    let basis: Vec<Vec<i32>> = w_picked.iter().map(|&p| w_monomials[p].clone()).collect();
    let nvars = mac.rows.nvars();
    let mut n_slices = Vec::with_capacity(nvars);
    let mut mult = Vec::with_capacity(nvars);
    for var in 0..nvars {
        let cols = multiply_positions(&mac.rows, &basis, var)?;
        let ni = null.matrix.select_cols(&cols);
        mult.push(lu_solve(&nstar, &ni)?);
        n_slices.push(ni);
    }
    Ok(QuotientRep {
        mode: mac.mode,
        delta,
        basis,
        nstar,
        n_slices,
        mult,
        cond_nstar: cond,
        gap: null.gap,
        warnings: build_warnings(cond, null.annihilation, cfg),
        precondition: None,
        block_sizes: None,
        matrix_shape: (mac.entries.nrows(), mac.entries.ncols()),
        timings: Timings {
            t_matrix: 0.0,
            t_null,
            t_basis: basis_started.elapsed().as_secs_f64(),
            t_schur: 0.0,
        },
    })
}

/// Resolves the basis columns of a candidate matrix: either the caller's
/// pinned monomials or the pivoted-QR choice. Returns positions into the
/// candidate list, the delta x delta submatrix, and its condition number.
fn pick_basis(
    n_cand: &CMat,
    delta: usize,
    forced: Option<&[Vec<i32>]>,
    cand_monomials: &[Vec<i32>],
) -> Result<(Vec<usize>, CMat, f64)> {
    match forced {
        Some(monomials) => {
            if monomials.len() != delta {
                return Err(Error::InvalidInput(format!(
                    "forced basis has {} monomials, expected {delta}",
                    monomials.len()
                )));
            }
            let mut positions = Vec::with_capacity(delta);
            for mono in monomials {
                let p = cand_monomials.iter().position(|c| c == mono).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "forced basis monomial {mono:?} is not among the candidate basis \
                         monomials"
                    ))
                })?;
                positions.push(p);
            }
            let nstar = n_cand.select_cols(&positions);
            let (rank, cond) = rank_and_cond(&nstar)?;
            if rank < delta {
                return Err(Error::SurjectivityFailure { rank, delta });
            }
            Ok((positions, nstar, cond))
        }
        None => {
            let chosen = select_basis(n_cand, delta)?;
            Ok((chosen.positions, chosen.nstar, chosen.cond))
        }
    }
}

/// Numerical rank (relative threshold) and condition number of a square
/// matrix, from one singular value decomposition.
fn rank_and_cond(a: &CMat) -> Result<(usize, f64)> {
    let sv = singular_values(a)?;
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > top * QR_RANK_TOL).count();
    let cond = match sv.last() {
        Some(&low) if low > 0.0 => top / low,
        _ => f64::INFINITY,
    };
    Ok((rank, cond))
}

/// Ratio sigma_delta / sigma_1 of a candidate matrix, or zero when the rank
/// cannot reach delta at all.
fn rank_gap(n_h: &CMat, delta: usize) -> Result<f64> {
    let sv = singular_values(n_h)?;
    if delta == 0 || sv.len() < delta || sv[0] <= 0.0 {
        return Ok(0.0);
    }
    Ok(sv[delta - 1] / sv[0])
}

/// Linear combination sum_i h_i * slices[i].
fn combine_slices(slices: &[CMat], h: &[Complex64]) -> CMat {
    let mut acc = CMat::zeros(slices[0].nrows(), slices[0].ncols());
    for (slice, &coeff) in slices.iter().zip(h) {
        acc = acc.add(&slice.scale(coeff));
    }
    acc
}

/// Linear form with the given coefficients on a contiguous variable range.
fn linear_form(
    nvars: usize,
    range: std::ops::Range<usize>,
    coeffs: &[Complex64],
) -> Polynomial {
    let mut form = Polynomial::zero(nvars);
    for (&coeff, var) in coeffs.iter().zip(range) {
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        form = form.add(&Polynomial::monomial(nvars, coeff, exps));
    }
    form
}

/// Matrix whose j-th column is the row-space coefficient vector of
/// factor * basis[j].
fn k_matrix(rows: &MonomialIndex, basis: &[Vec<i32>], factor: &Polynomial) -> Result<CMat> {
    let mut k = CMat::zeros(rows.len(), basis.len());
    for (j, mono) in basis.iter().enumerate() {
        let product = factor.mul_monomial(c64(1.0, 0.0), mono);
        for term in product.terms() {
            let r = rows.position(&term.exps).ok_or_else(|| {
                Error::Inconsistency(format!(
                    "product monomial {:?} is missing from the row support",
                    term.exps
                ))
            })?;
            k[(r, j)] = term.coeff;
        }
    }
    Ok(k)
}

/// Product of the total degrees, guarded against overflow.
fn product_count(degrees: &[i32]) -> Result<usize> {
    let mut acc: u128 = 1;
    for &d in degrees {
        acc = acc.saturating_mul(d.max(0) as u128);
    }
    usize::try_from(acc)
        .map_err(|_| Error::InvalidInput("theoretical root count overflows".into()))
}

/// Non-fatal diagnostics shared by the builders: an ill-conditioned basis
/// change and a null space whose annihilation residual misses the tolerance.
fn build_warnings(cond: f64, annihilation: f64, cfg: &QuotientConfig) -> Vec<String> {
    let mut warnings = Vec::new();
    if cond > cfg.cond_warn {
        warnings.push(format!(
            "basis change is ill-conditioned (cond(Nstar) = {cond:.3e}); \
             root accuracy may degrade"
        ));
    }
    if annihilation > cfg.tol_null {
        warnings.push(format!(
            "null space annihilates the matrix only to {annihilation:.3e} relative, \
             above the tolerance {:.3e}",
            cfg.tol_null
        ));
    }
    warnings
}
