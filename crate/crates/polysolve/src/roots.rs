//! Root extraction from commuting multiplication matrices. One unitary
//! transformation, computed from the Schur form of a random combination,
//! triangularizes every operator at once, so the j-th diagonal entries of
//! the triangular factors assemble into the coordinate tuple of the j-th
//! root. Nearby diagonal entries of the combined factor are clustered and
//! reordered to sit adjacently; cluster sizes are the root multiplicities.
//! Generalized eigenvalue pencils expose coordinate ratios, with vanishing
//! denominators reported as an explicit infinity class.

use std::ops::Range;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{generalized_eigenvalues, schur, schur_move, unit_complex, CMat};
use crate::poly::{block_ranges, PolynomialSystem};
use crate::quotient::{QuotientRep, Timings, DEFAULT_SEED};
use crate::Mode;

/// Relative commutator tolerance for matrices entering the shared Schur
/// step; violating it means no common triangularization exists.
pub const DEFAULT_TOL_COMMUTE: f64 = 1e-8;

/// Multiplier for the default clustering width on the combined diagonal.
pub const DEFAULT_CLUSTER_SCALE: f64 = 1e-6;

/// Relative growth of the factorization residual tolerated while reordering
/// the Schur form; beyond this the reordering is abandoned.
const REORDER_TOL: f64 = 1e-10;

/// A generalized eigenvalue counts as infinite when its denominator is this
/// small relative to the pair.
const PENCIL_INFINITY_TOL: f64 = 1e-8;

/// Both pencil components below this (relative to the matrices) means the
/// pencil is singular.
const PENCIL_DEGENERATE_TOL: f64 = 1e-12;

/// Shared Schur data for a family of commuting matrices: one unitary `z`
/// with `mstar = z tstar z^H` for the combination `mstar = sum h_i m_i`,
/// and `triangulars[i] = z^H m_i z` for every input.
#[derive(Clone, Debug)]
pub struct SimultaneousSchur {
    /// Common unitary transformation; its columns are the shared Schur basis.
    pub z: CMat,
    /// Upper triangular factor of the combined operator.
    pub tstar: CMat,
    /// Near-triangular factors of the individual operators, in input order.
    pub triangulars: Vec<CMat>,
    /// Coefficients of the random combination, drawn from the seed.
    pub coefficients: Vec<Complex64>,
}

impl SimultaneousSchur {
    /// Worst relative strict-lower-triangular mass over the individual
    /// factors; small values confirm the joint triangularization.
    pub fn triangularity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.triangulars {
            let scale = t.frob().max(1e-300);
            let mut lower: f64 = 0.0;
            for j in 0..t.ncols() {
                for i in j + 1..t.nrows() {
                    lower += t[(i, j)].norm_sqr();
                }
            }
            worst = worst.max(lower.sqrt() / scale);
        }
        worst
    }
}

/// Triangularizes a family of commuting square matrices with one unitary
/// transformation: the Schur basis of a random combination of the inputs.
/// Rejects inputs whose pairwise commutators exceed `tol_commute` relative
/// to the product of their norms.
pub fn simultaneous_schur(
    mats: &[CMat],
    seed: u64,
    tol_commute: f64,
) -> Result<SimultaneousSchur> {
    if mats.is_empty() {
        return Err(Error::InvalidInput("no matrices to triangularize".into()));
    }
    let n = mats[0].nrows();
    for (i, m) in mats.iter().enumerate() {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "matrix {i} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let commutator = mats[i].mul(&mats[j]).sub(&mats[j].mul(&mats[i])).frob();
            let scale = (mats[i].frob() * mats[j].frob()).max(1.0);
            let value = commutator / scale;
            if value > tol_commute {
                return Err(Error::CommutatorViolation { i, j, value, tol: tol_commute });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // The quotient builders draw their generic linear forms from the same
    // seed. Keep this combination on a separate stream: reusing the very
    // coefficients of a graded build's h would make the combined operator
    // the identity (sum h_i x_i / h = 1) and merge all roots.
    rng.set_stream(1);
    let coefficients: Vec<Complex64> = mats.iter().map(|_| unit_complex(&mut rng)).collect();
    let mut mstar = CMat::zeros(n, n);
    for (m, &h) in mats.iter().zip(&coefficients) {
        mstar = mstar.add(&m.scale(h));
    }
    let (z, tstar) = schur(&mstar)?;
    let triangulars = mats.iter().map(|m| z.h_mul(m).mul(&z)).collect();
    Ok(SimultaneousSchur { z, tstar, triangulars, coefficients })
}

/// Shared Schur data with the diagonal grouped: positions belonging to the
/// same root sit in contiguous ranges.
#[derive(Clone, Debug)]
pub struct ClusteredSchur {
    /// Updated unitary transformation after reordering.
    pub z: CMat,
    /// Reordered triangular factor of the combined operator.
    pub tstar: CMat,
    /// Reordered individual factors.
    pub triangulars: Vec<CMat>,
    /// One contiguous diagonal range per distinct root.
    pub clusters: Vec<Range<usize>>,
    /// Set when reordering was abandoned and the input factorization is
    /// returned unchanged with every position its own cluster.
    pub warning: Option<String>,
}

/// Default clustering width: relative to the largest entry of the combined
/// triangular factor.
pub fn default_cluster_tol(tstar: &CMat) -> f64 {
    DEFAULT_CLUSTER_SCALE * (1.0 + tstar.max_abs())
}

/// Groups diagonal entries of the combined factor by single linkage at
/// width `tol_cluster` and reorders the factorization so every group is
/// contiguous. If the reordering degrades the factorization it is abandoned
/// and the input comes back with singleton clusters and a warning.
pub fn cluster_reorder(shared: &SimultaneousSchur, tol_cluster: f64) -> ClusteredSchur {
    let n = shared.tstar.nrows();
    let diag: Vec<Complex64> = (0..n).map(|i| shared.tstar[(i, i)]).collect();
    // Single linkage: indices chain together whenever some pair is within
    // the width.
    let mut cluster_of: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (diag[i] - diag[j]).norm() <= tol_cluster {
                let (a, b) = (find(&mut cluster_of, i), find(&mut cluster_of, j));
                if a != b {
                    cluster_of[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let ids: Vec<usize> = (0..n).map(|i| find(&mut cluster_of, i)).collect();
    // Clusters keep the order in which their first member appears.
    let mut order: Vec<usize> = Vec::new();
    for &id in &ids {
        if !order.contains(&id) {
            order.push(id);
        }
    }
    let singletons = order.len() == n;
    if singletons {
        return ClusteredSchur {
            z: shared.z.clone(),
            tstar: shared.tstar.clone(),
            triangulars: shared.triangulars.clone(),
            clusters: (0..n).map(|i| i..i + 1).collect(),
            warning: None,
        };
    }
    let mut t = shared.tstar.clone();
    let mut q = CMat::identity(n);
    let mut current = ids.clone();
    let mut target = 0usize;
    let mut clusters = Vec::with_capacity(order.len());
    let mut moved_ok = true;
    'outer: for &id in &order {
        let start = target;
        loop {
            let found = (target..n).find(|&p| current[p] == id);
            let Some(p) = found else { break };
            if p != target {
                if schur_move(&mut t, &mut q, p, target).is_err() {
                    moved_ok = false;
                    break 'outer;
                }
                let moved = current.remove(p);
                current.insert(target, moved);
            }
            target += 1;
        }
        clusters.push(start..target);
    }
    // The moves must not have damaged the factorization: the accumulated
    // rotation still has to reproduce the original combined factor.
    let stable = moved_ok && {
        let recon = q.mul(&t).mul_h(&q);
        recon.sub(&shared.tstar).frob() <= REORDER_TOL * shared.tstar.frob().max(1.0)
    };
    if !stable {
        return ClusteredSchur {
            z: shared.z.clone(),
            tstar: shared.tstar.clone(),
            triangulars: shared.triangulars.clone(),
            clusters: (0..n).map(|i| i..i + 1).collect(),
            warning: Some(
                "cluster reordering of the Schur form was numerically unstable; \
                 reporting unclustered simple roots"
                    .into(),
            ),
        };
    }
    let z = shared.z.mul(&q);
    let triangulars = shared.triangulars.iter().map(|ti| q.h_mul(ti).mul(&q)).collect();
    ClusteredSchur { z, tstar: t, triangulars, clusters, warning: None }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    let mut walk = i;
    while parent[walk] != root {
        let next = parent[walk];
        parent[walk] = root;
        walk = next;
    }
    root
}

/// One generalized eigenvalue of a pencil (A, B): either the finite ratio
/// or an explicit infinity for a vanishing denominator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PencilValue {
    Finite(Complex64),
    Infinite,
}

/// Generalized eigenvalues of A v = lambda B v with infinite eigenvalues
/// reported as their own class. A position where numerator and denominator
/// both vanish means the pencil is singular.
pub fn pencil_eigenvalues(a: &CMat, b: &CMat) -> Result<Vec<PencilValue>> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(Error::InvalidInput(format!(
            "pencil needs two square matrices of equal size, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let pairs = generalized_eigenvalues(a, b)?;
    let floor_a = PENCIL_DEGENERATE_TOL * a.frob().max(1.0);
    let floor_b = PENCIL_DEGENERATE_TOL * b.frob().max(1.0);
    pairs
        .iter()
        .enumerate()
        .map(|(index, &(alpha, beta))| {
            if alpha.norm() <= floor_a && beta.norm() <= floor_b {
                Err(Error::DegeneratePencil { index })
            } else if beta.norm() <= PENCIL_INFINITY_TOL * (alpha.norm() + beta.norm()) {
                Ok(PencilValue::Infinite)
            } else {
                Ok(PencilValue::Finite(alpha / beta))
            }
        })
        .collect()
}

/// One computed root.
#[derive(Clone, Debug)]
pub struct Root {
    /// Affine coordinate values in the corner modes; per-block projective
    /// coordinates scaled so the largest modulus in each block is one in
    /// the graded modes.
    pub coordinates: Vec<Complex64>,
    /// Cluster size: number of Schur positions merged into this root.
    pub multiplicity: usize,
    /// Backward-error residual; NaN until `attach_residuals` supplies the
    /// system to evaluate against.
    pub residual: f64,
    /// Largest spread of the merged diagonal values across all operators;
    /// zero for simple roots.
    pub cluster_diameter: f64,
}

/// All roots of one solve, with the data needed to reproduce the run.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub mode: Mode,
    /// Seed used for the random combination in the shared Schur step.
    pub seed: u64,
    /// Root count with multiplicity; the multiplicities sum to it.
    pub delta: usize,
    /// Projective block sizes in the graded modes, None otherwise.
    pub block_sizes: Option<Vec<usize>>,
    pub timings: Timings,
    pub warnings: Vec<String>,
}

/// Knobs for root extraction.
#[derive(Clone, Copy, Debug)]
pub struct ExtractConfig {
    /// Seed for the random combination of the multiplication matrices.
    pub seed: u64,
    /// Relative commutator tolerance checked before the shared Schur step.
    pub tol_commute: f64,
    /// Absolute clustering width; None derives it from the combined factor.
    pub tol_cluster: Option<f64>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            seed: DEFAULT_SEED,
            tol_commute: DEFAULT_TOL_COMMUTE,
            tol_cluster: None,
        }
    }
}

/// Extracts the root set from recovered quotient data with default
/// tolerances.
pub fn extract_roots(qrep: &QuotientRep, seed: u64) -> Result<RootSet> {
    extract_roots_with(qrep, &ExtractConfig { seed, ..ExtractConfig::default() })
}

/// Extracts the root set from recovered quotient data.
///
/// Every coordinate is read from one shared Schur transformation, so the
/// j-th diagonal entries of all factors belong to the same root. In the
/// graded modes the diagonal values are x_i/h ratios: each assembled tuple
/// is a valid set of projective coordinates and is scaled so its largest
/// modulus per block is one. A preconditioning change of coordinates, if
/// present, is undone before scaling.
pub fn extract_roots_with(qrep: &QuotientRep, cfg: &ExtractConfig) -> Result<RootSet> {
    let started = Instant::now();
    let shared = simultaneous_schur(&qrep.mult, cfg.seed, cfg.tol_commute)?;
    let tol_cluster = cfg.tol_cluster.unwrap_or_else(|| default_cluster_tol(&shared.tstar));
    let clustered = cluster_reorder(&shared, tol_cluster);
    let mut warnings = qrep.warnings.clone();
    if let Some(w) = &clustered.warning {
        warnings.push(w.clone());
    }
    let nvars = qrep.mult.len();
    let mut roots = Vec::with_capacity(clustered.clusters.len());
    for range in &clustered.clusters {
        let mut raw = Vec::with_capacity(nvars);
        let mut diameter: f64 = 0.0;
        for t in &clustered.triangulars {
            let values: Vec<Complex64> = range.clone().map(|p| t[(p, p)]).collect();
            let mean = values.iter().sum::<Complex64>() / values.len() as f64;
            for a in &values {
                for b in &values {
                    diameter = diameter.max((a - b).norm());
                }
            }
            raw.push(mean);
        }
        let coordinates = assemble_coordinates(qrep, raw, &mut warnings);
        roots.push(Root {
            coordinates,
            multiplicity: range.len(),
            residual: f64::NAN,
            cluster_diameter: diameter,
        });
    }
    let mut timings = qrep.timings;
    timings.t_schur = started.elapsed().as_secs_f64();
    Ok(RootSet {
        roots,
        mode: qrep.mode,
        seed: cfg.seed,
        delta: qrep.delta,
        block_sizes: qrep.block_sizes.clone(),
        timings,
        warnings,
    })
}

/// Turns one tuple of diagonal values into final root coordinates: identity
/// for the corner modes; undo preconditioning and scale each block to max
/// modulus one for the graded modes.
fn assemble_coordinates(
    qrep: &QuotientRep,
    raw: Vec<Complex64>,
    warnings: &mut Vec<String>,
) -> Vec<Complex64> {
    match qrep.mode {
        Mode::Affine | Mode::Toric => raw,
        Mode::Projective | Mode::Multihom => {
            let sizes = qrep
                .block_sizes
                .clone()
                .unwrap_or_else(|| vec![raw.len()]);
            let mut coords = match &qrep.precondition {
                Some(w) => {
                    let mut mapped = vec![Complex64::new(0.0, 0.0); raw.len()];
                    for (j, slot) in mapped.iter_mut().enumerate() {
                        for (l, &value) in raw.iter().enumerate() {
                            *slot += w[(j, l)] * value;
                        }
                    }
                    mapped
                }
                None => raw,
            };
            for range in block_ranges(&sizes) {
                let block = &mut coords[range];
                let top = block
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                let pivot = block[top];
                if pivot.norm() > 0.0 {
                    for value in block.iter_mut() {
                        *value /= pivot;
                    }
                } else {
                    warnings.push(
                        "a root has an all-zero projective block and was left unscaled".into(),
                    );
                }
            }
            coords
        }
    }
}

/// Backward-error residual of a root against the system it solves:
/// max_i |f_i(z)| / sum_alpha |c_alpha| |z|^alpha, evaluated at the stored
/// coordinates (the normalized projective ones in the graded modes).
pub fn residual(system: &PolynomialSystem, root: &Root) -> f64 {
    system.relative_residual(&root.coordinates)
}

/// Fills every root's residual field by evaluating `system` at its
/// coordinates. For preconditioned builds the coordinates have already been
/// mapped back, so `system` is the original input system.
pub fn attach_residuals(set: &mut RootSet, system: &PolynomialSystem) {
    for root in &mut set.roots {
        root.residual = residual(system, root);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, complex_normal};
    use crate::poly::{Polynomial, Term};
    use crate::quotient::{build_affine, build_multihom, build_projective, QuotientConfig};

    fn p(nvars: usize, terms: &[(f64, &[i32])]) -> Polynomial {
        Polynomial::new(
            nvars,
            terms
                .iter()
                .map(|&(c, e)| Term { coeff: c64(c, 0.0), exps: e.to_vec() })
                .collect(),
        )
    }

    fn quadric_pair() -> PolynomialSystem {
        let f1 = p(
            2,
            &[
                (7.0, &[0, 0]),
                (3.0, &[1, 0]),
                (-6.0, &[0, 1]),
                (-4.0, &[2, 0]),
                (2.0, &[1, 1]),
                (5.0, &[0, 2]),
            ],
        );
        let f2 = p(
            2,
            &[
                (-1.0, &[0, 0]),
                (-3.0, &[1, 0]),
                (14.0, &[0, 1]),
                (-2.0, &[2, 0]),
                (2.0, &[1, 1]),
                (-3.0, &[0, 2]),
            ],
        );
        PolynomialSystem::new(vec![f1, f2]).unwrap()
    }

    const QUADRIC_ROOTS: [[f64; 2]; 4] = [[-2.0, 3.0], [3.0, 2.0], [2.0, 1.0], [-1.0, 0.0]];

    fn line_conic_homogeneous() -> PolynomialSystem {
        let f1 = p(
            3,
            &[
                (2.0, &[0, 2, 0]),
                (5.0, &[0, 1, 1]),
                (3.0, &[0, 0, 2]),
                (3.0, &[1, 1, 0]),
                (-2.0, &[2, 0, 0]),
            ],
        );
        let f2 = p(3, &[(-2.0, &[1, 0, 0]), (1.0, &[0, 1, 0]), (1.0, &[0, 0, 1])]);
        PolynomialSystem::homogeneous(vec![f1, f2]).unwrap()
    }

    fn bilinear_pair_homogeneous() -> PolynomialSystem {
        let f1 = p(
            4,
            &[
                (2.0, &[1, 0, 1, 0]),
                (-1.0, &[0, 1, 1, 0]),
                (2.0, &[1, 0, 0, 1]),
                (2.0, &[0, 1, 0, 1]),
            ],
        );
        let f2 = p(
            4,
            &[
                (4.0, &[1, 0, 1, 0]),
                (-2.0, &[0, 1, 1, 0]),
                (1.0, &[1, 0, 0, 1]),
                (4.0, &[0, 1, 0, 1]),
            ],
        );
        PolynomialSystem::multihomogeneous(&[2, 2], vec![f1, f2]).unwrap()
    }

    fn diag(values: &[f64]) -> CMat {
        let n = values.len();
        CMat::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) })
    }

    /// Greedy nearest matching between two equally sized point sets; returns
    /// the largest matched distance.
    fn match_distance(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
        assert_eq!(a.len(), b.len());
        let mut taken = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for u in a {
            let mut best = f64::INFINITY;
            let mut best_j = usize::MAX;
            for (j, v) in b.iter().enumerate() {
                if taken[j] {
                    continue;
                }
                let d = u
                    .iter()
                    .zip(v)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0f64, f64::max);
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
            taken[best_j] = true;
            worst = worst.max(best);
        }
        worst
    }

    /// Compares two tuples of projective coordinates per block, scaling both
    /// by the reference block's largest-modulus coordinate.
    fn projective_distance(
        found: &[Complex64],
        reference: &[f64],
        sizes: &[usize],
    ) -> f64 {
        let mut worst: f64 = 0.0;
        for range in block_ranges(sizes) {
            let anchor = range
                .clone()
                .max_by(|&a, &b| reference[a].abs().total_cmp(&reference[b].abs()))
                .unwrap();
            let fa = found[anchor];
            let ra = reference[anchor];
            assert!(fa.norm() > 1e-12, "anchor coordinate vanished");
            for k in range {
                let d = (found[k] / fa - c64(reference[k] / ra, 0.0)).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    #[test]
    fn simultaneous_schur_reads_back_diagonal_matrices_exactly() {
        let m1 = diag(&[2.0, 5.0]);
        let m2 = diag(&[7.0, 1.0]);
        let shared = simultaneous_schur(&[m1.clone(), m2.clone()], 5, DEFAULT_TOL_COMMUTE)
            .unwrap();
        // Unitary to working precision.
        let gram = shared.z.h_mul(&shared.z);
        assert!(gram.max_abs_diff(&CMat::identity(2)) <= 1e-12);
        // The combined factor reproduces the combined operator.
        let mstar = m1.scale(shared.coefficients[0]).add(&m2.scale(shared.coefficients[1]));
        let recon = shared.z.mul(&shared.tstar).mul_h(&shared.z);
        assert!(recon.sub(&mstar).frob() <= 1e-12 * mstar.frob());
        assert!(shared.triangularity() <= 1e-12);
        // Positions stay matched: the tuples (2,7) and (5,1) appear.
        let pairs: Vec<(f64, f64)> = (0..2)
            .map(|i| (shared.triangulars[0][(i, i)].re, shared.triangulars[1][(i, i)].re))
            .collect();
        let mut sorted = pairs.clone();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        assert!((sorted[0].0 - 2.0).abs() <= 1e-12 && (sorted[0].1 - 7.0).abs() <= 1e-12);
        assert!((sorted[1].0 - 5.0).abs() <= 1e-12 && (sorted[1].1 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn simultaneous_schur_diagonals_follow_a_functional_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = CMat::from_fn(5, 5, |_, _| complex_normal(&mut rng));
        // q(A) = A^2 + I commutes with A; the diagonals must satisfy
        // q(lambda) at matched positions.
        let q_of_a = a.mul(&a).add(&CMat::identity(5));
        let shared =
            simultaneous_schur(&[a.clone(), q_of_a], 9, DEFAULT_TOL_COMMUTE).unwrap();
        assert!(shared.triangularity() <= 1e-10);
        for i in 0..5 {
            let lambda = shared.triangulars[0][(i, i)];
            let value = shared.triangulars[1][(i, i)];
            assert!((value - (lambda * lambda + 1.0)).norm() <= 1e-8);
        }
    }

    #[test]
    fn simultaneous_schur_rejects_noncommuting_matrices() {
        let up = CMat::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let down = CMat::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        match simultaneous_schur(&[up, down], 1, DEFAULT_TOL_COMMUTE) {
            Err(Error::CommutatorViolation { i, j, value, .. }) => {
                assert_eq!((i, j), (0, 1));
                assert!(value > DEFAULT_TOL_COMMUTE);
            }
            other => panic!("expected a commutator violation, got {other:?}"),
        }
    }

    #[test]
    fn example_matrices_share_one_triangularization() {
        let rep = build_affine(&quadric_pair(), &QuotientConfig::default()).unwrap();
        let shared = simultaneous_schur(&rep.mult, DEFAULT_SEED, DEFAULT_TOL_COMMUTE).unwrap();
        assert!(shared.triangularity() <= 1e-8);
        let mut x2: Vec<f64> = (0..4).map(|i| shared.triangulars[1][(i, i)].re).collect();
        x2.sort_by(f64::total_cmp);
        for (value, expected) in x2.iter().zip([0.0, 1.0, 2.0, 3.0]) {
            assert!((value - expected).abs() <= 1e-8);
        }
    }

    #[test]
    fn cluster_reorder_groups_close_diagonal_values() {
        let t = diag(&[1.0, 2.0, 1.0 + 1e-12]);
        let shared = SimultaneousSchur {
            z: CMat::identity(3),
            tstar: t.clone(),
            triangulars: vec![t],
            coefficients: vec![c64(1.0, 0.0)],
        };
        let clustered = cluster_reorder(&shared, 1e-8);
        assert!(clustered.warning.is_none());
        assert_eq!(clustered.clusters.len(), 2);
        assert_eq!(clustered.clusters[0], 0..2);
        assert_eq!(clustered.clusters[1], 2..3);
        // The two merged positions now carry the two near-one values.
        for i in 0..2 {
            assert!((clustered.tstar[(i, i)].re - 1.0).abs() <= 1e-9);
        }
        assert!((clustered.tstar[(2, 2)].re - 2.0).abs() <= 1e-12);
        // The reordering is a genuine similarity: with z = identity on input,
        // the updated factorization must still reproduce the original matrix.
        let recon = clustered.z.mul(&clustered.tstar).mul_h(&clustered.z);
        assert!(recon.sub(&shared.tstar).frob() <= 1e-12);
    }

    #[test]
    fn cluster_reorder_keeps_distinct_diagonals_in_place() {
        let t = diag(&[3.0, 1.0, 2.0]);
        let shared = SimultaneousSchur {
            z: CMat::identity(3),
            tstar: t.clone(),
            triangulars: vec![t.clone()],
            coefficients: vec![c64(1.0, 0.0)],
        };
        let clustered = cluster_reorder(&shared, 1e-8);
        assert_eq!(clustered.clusters.len(), 3);
        assert_eq!(clustered.z.max_abs_diff(&shared.z), 0.0);
        assert_eq!(clustered.tstar.max_abs_diff(&t), 0.0);
    }

    #[test]
    fn pencil_eigenvalues_of_a_scaled_pencil_are_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = CMat::from_fn(3, 3, |_, _| complex_normal(&mut rng));
        let a = b.scale(c64(2.0, 0.0));
        let values = pencil_eigenvalues(&a, &b).unwrap();
        assert_eq!(values.len(), 3);
        for value in values {
            match value {
                PencilValue::Finite(v) => assert!((v - 2.0).norm() <= 1e-12),
                PencilValue::Infinite => panic!("unexpected infinite eigenvalue"),
            }
        }
    }

    #[test]
    fn pencil_eigenvalues_report_a_shared_null_vector_as_degenerate() {
        let a = CMat::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let b = CMat::from_real_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]);
        match pencil_eigenvalues(&a, &b) {
            Err(Error::DegeneratePencil { .. }) => {}
            other => panic!("expected a degenerate pencil, got {other:?}"),
        }
    }

    #[test]
    fn pencil_eigenvalues_match_the_projective_reference() {
        let rep = build_projective(&line_conic_homogeneous(), &QuotientConfig::default())
            .unwrap();
        let values = pencil_eigenvalues(&rep.n_slices[1], &rep.n_slices[0]).unwrap();
        let mut finite = Vec::new();
        let mut infinite = 0;
        for value in values {
            match value {
                PencilValue::Finite(v) => finite.push(v),
                PencilValue::Infinite => infinite += 1,
            }
        }
        assert_eq!(infinite, 1);
        assert_eq!(finite.len(), 1);
        assert!((finite[0] - c64(-10.0, 0.0)).norm() <= 1e-9);
    }

    #[test]
    fn extract_roots_recovers_the_affine_reference_roots() {
        let system = quadric_pair();
        let rep = build_affine(&system, &QuotientConfig::default()).unwrap();
        let mut set = extract_roots(&rep, DEFAULT_SEED).unwrap();
        assert_eq!(set.mode, Mode::Affine);
        assert_eq!(set.delta, 4);
        assert_eq!(set.roots.len(), 4);
        assert!(set.block_sizes.is_none());
        assert_eq!(set.roots.iter().map(|r| r.multiplicity).sum::<usize>(), 4);
        let found: Vec<Vec<Complex64>> =
            set.roots.iter().map(|r| r.coordinates.clone()).collect();
        let reference: Vec<Vec<Complex64>> = QUADRIC_ROOTS
            .iter()
            .map(|z| vec![c64(z[0], 0.0), c64(z[1], 0.0)])
            .collect();
        assert!(match_distance(&found, &reference) <= 1e-8);
        attach_residuals(&mut set, &system);
        for root in &set.roots {
            assert!(root.residual <= 1e-12, "residual {}", root.residual);
            assert!(root.cluster_diameter <= 1e-8);
        }
        // The build and extraction stages all recorded wall time.
        assert!(set.timings.t_matrix > 0.0);
        assert!(set.timings.t_null > 0.0);
        assert!(set.timings.t_basis > 0.0);
        assert!(set.timings.t_schur > 0.0);
    }

    #[test]
    fn extract_roots_attaches_multiplicity_two_to_a_double_root() {
        // (x - 1)^2 and y - x intersect only at (1, 1), with multiplicity 2.
        let f1 = p(2, &[(1.0, &[2, 0]), (-2.0, &[1, 0]), (1.0, &[0, 0])]);
        let f2 = p(2, &[(1.0, &[0, 1]), (-1.0, &[1, 0])]);
        let system = PolynomialSystem::new(vec![f1, f2]).unwrap();
        let rep = build_affine(&system, &QuotientConfig::default()).unwrap();
        let mut set = extract_roots(&rep, DEFAULT_SEED).unwrap();
        assert_eq!(set.delta, 2);
        assert_eq!(set.roots.len(), 1);
        let root = &set.roots[0];
        assert_eq!(root.multiplicity, 2);
        assert!((root.coordinates[0] - 1.0).norm() <= 1e-6);
        assert!((root.coordinates[1] - 1.0).norm() <= 1e-6);
        attach_residuals(&mut set, &system);
        assert!(set.roots[0].residual <= 1e-6);
    }

    #[test]
    fn extract_roots_normalizes_projective_blocks() {
        let system = line_conic_homogeneous();
        let rep = build_projective(&system, &QuotientConfig::default()).unwrap();
        let mut set = extract_roots(&rep, DEFAULT_SEED).unwrap();
        assert_eq!(set.mode, Mode::Projective);
        assert_eq!(set.block_sizes, Some(vec![3]));
        assert_eq!(set.roots.len(), 2);
        for root in &set.roots {
            let max_modulus = root
                .coordinates
                .iter()
                .map(|c| c.norm())
                .fold(0.0f64, f64::max);
            assert!((max_modulus - 1.0).abs() <= 1e-12);
        }
        // Match each computed root to its reference by scale-free distance.
        let references: [[f64; 3]; 2] = [[0.0, 1.0, -1.0], [1.0, -10.0, 12.0]];
        for reference in &references {
            let best = set
                .roots
                .iter()
                .map(|r| projective_distance(&r.coordinates, reference, &[3]))
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-9, "reference {reference:?} missed: {best}");
        }
        attach_residuals(&mut set, &system);
        for root in &set.roots {
            assert!(root.residual <= 1e-10, "residual {}", root.residual);
        }
    }

    #[test]
    fn extract_roots_maps_multihom_roots_back_through_the_preconditioner() {
        let system = bilinear_pair_homogeneous();
        let references: [[f64; 4]; 2] = [[1.0, 2.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.5]];
        // Once with pinned generic data, once with the default random
        // preconditioning; both must land on the same projective roots.
        let one = c64(1.0, 0.0);
        let pinned = QuotientConfig {
            precondition: false,
            forced_h: Some(vec![vec![one, one], vec![one, one]]),
            forced_basis: Some(vec![vec![0, 2, 0, 2], vec![1, 1, 2, 0]]),
            ..QuotientConfig::default()
        };
        for cfg in [pinned, QuotientConfig::default()] {
            let rep = build_multihom(&system, &[2, 2], &cfg).unwrap();
            let mut set = extract_roots(&rep, DEFAULT_SEED).unwrap();
            assert_eq!(set.mode, Mode::Multihom);
            assert_eq!(set.block_sizes, Some(vec![2, 2]));
            assert_eq!(set.roots.len(), 2);
            for reference in &references {
                let best = set
                    .roots
                    .iter()
                    .map(|r| projective_distance(&r.coordinates, reference, &[2, 2]))
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= 1e-8, "reference {reference:?} missed: {best}");
            }
            attach_residuals(&mut set, &system);
            for root in &set.roots {
                assert!(root.residual <= 1e-10, "residual {}", root.residual);
            }
        }
    }

    #[test]
    fn extract_roots_is_seed_invariant_up_to_root_matching() {
        let rep = build_affine(&quadric_pair(), &QuotientConfig::default()).unwrap();
        let set_a = extract_roots(&rep, 1).unwrap();
        let set_b = extract_roots(&rep, 2).unwrap();
        let a: Vec<Vec<Complex64>> =
            set_a.roots.iter().map(|r| r.coordinates.clone()).collect();
        let b: Vec<Vec<Complex64>> =
            set_b.roots.iter().map(|r| r.coordinates.clone()).collect();
        assert!(match_distance(&a, &b) <= 1e-8);
    }

    #[test]
    fn residual_matches_hand_computed_values() {
        let system = quadric_pair();
        let exact = Root {
            coordinates: vec![c64(-2.0, 0.0), c64(3.0, 0.0)],
            multiplicity: 1,
            residual: f64::NAN,
            cluster_diameter: 0.0,
        };
        assert!(residual(&system, &exact) <= 1e-15);
        // f = x + 1 at the origin: numerator 1, scale 1.
        let affine_line = PolynomialSystem::new(vec![p(1, &[(1.0, &[1]), (1.0, &[0])])])
            .unwrap();
        let origin = Root {
            coordinates: vec![c64(0.0, 0.0)],
            multiplicity: 1,
            residual: f64::NAN,
            cluster_diameter: 0.0,
        };
        assert!((residual(&affine_line, &origin) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn random_dense_roots_have_small_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        let polys: Vec<Polynomial> = (0..2)
            .map(|_| {
                let terms = crate::macaulay::MonomialIndex::deg_at_most(2, 3)
                    .monomials()
                    .iter()
                    .map(|e| Term { coeff: complex_normal(&mut rng), exps: e.clone() })
                    .collect();
                Polynomial::new(2, terms)
            })
            .collect();
        let system = PolynomialSystem::new(polys).unwrap();
        let rep = build_affine(&system, &QuotientConfig::default()).unwrap();
        let mut set = extract_roots(&rep, DEFAULT_SEED).unwrap();
        assert_eq!(set.roots.len(), 9);
        attach_residuals(&mut set, &system);
        for root in &set.roots {
            assert!(root.residual <= 1e-8, "residual {}", root.residual);
        }
    }
}
