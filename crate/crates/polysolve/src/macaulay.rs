//! The four resultant-style matrix constructions. Each builder lays out a
//! complex matrix whose rows are indexed by the monomials of a finite space V
//! and whose columns hold the coefficient vectors of shifted generators
//! x^beta * f_i; the left null space of that matrix is what the quotient
//! stage consumes.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMat};
use crate::poly::{cmp_monomials, PolynomialSystem};
use crate::polytope::{newton_polytope, LatticePolytope};
use crate::Mode;

/// Entry-count cap applied when the caller has no tighter budget.
pub const DEFAULT_MAX_ENTRIES: usize = 150_000_000;

/// An ordered monomial basis of the row space V with constant-time reverse
/// lookup from exponent vector to row position.
#[derive(Clone, Debug)]
pub struct MonomialIndex {
    nvars: usize,
    monomials: Vec<Vec<i32>>,
    positions: HashMap<Vec<i32>, usize>,
}

impl MonomialIndex {
    fn from_list(nvars: usize, monomials: Vec<Vec<i32>>) -> MonomialIndex {
        let positions = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        MonomialIndex { nvars, monomials, positions }
    }

    /// All monomials in `nvars` variables of total degree at most `rho`, in
    /// the canonical monomial order.
    pub fn deg_at_most(nvars: usize, rho: i32) -> MonomialIndex {
        let mut list = Vec::new();
        let mut cur = Vec::with_capacity(nvars);
        fill_degrees(nvars, rho, false, &mut cur, &mut list);
        list.sort_by(|a, b| cmp_monomials(a, b));
        Self::from_list(nvars, list)
    }

    /// All monomials of total degree exactly `rho`, in the canonical order.
    pub fn deg_exact(nvars: usize, rho: i32) -> MonomialIndex {
        let mut list = Vec::new();
        let mut cur = Vec::with_capacity(nvars);
        fill_degrees(nvars, rho, true, &mut cur, &mut list);
        list.sort_by(|a, b| cmp_monomials(a, b));
        Self::from_list(nvars, list)
    }

    /// All monomials whose degree within block k is exactly `rho[k]`, where
    /// the blocks are consecutive variable runs of the given sizes. Ordered
    /// with the last block outermost (slowest varying) and descending
    /// lexicographic within each block; for a single block this coincides
    /// with `deg_exact`.
    pub fn multideg_exact(block_sizes: &[usize], rho: &[i32]) -> MonomialIndex {
        assert_eq!(block_sizes.len(), rho.len());
        let nvars: usize = block_sizes.iter().sum();
        let per_block: Vec<Vec<Vec<i32>>> = block_sizes
            .iter()
            .zip(rho.iter())
            .map(|(&s, &r)| compositions_desc(s, r))
            .collect();
        if per_block.iter().any(|b| b.is_empty()) {
            return Self::from_list(nvars, Vec::new());
        }
        let mut list = Vec::new();
        let mut picks = vec![0usize; per_block.len()];
        'outer: loop {
            let mut mono = Vec::with_capacity(nvars);
            for (block, &p) in per_block.iter().zip(&picks) {
                mono.extend_from_slice(&block[p]);
            }
            list.push(mono);
            for k in 0..picks.len() {
                picks[k] += 1;
                if picks[k] < per_block[k].len() {
                    continue 'outer;
                }
                picks[k] = 0;
            }
            break;
        }
        Self::from_list(nvars, list)
    }

    /// Index over an explicit lattice-point set (toric rows), sorted into the
    /// canonical order. Duplicates collapse; coordinates must fit in i32.
    pub fn from_points(points: &[Vec<i64>]) -> Result<MonomialIndex> {
        let nvars = points.first().map_or(0, |p| p.len());
        let mut list = Vec::with_capacity(points.len());
        for p in points {
            list.push(point_to_exps(p)?);
        }
        list.sort_by(|a, b| cmp_monomials(a, b));
        list.dedup();
        Ok(Self::from_list(nvars, list))
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn monomial(&self, i: usize) -> &[i32] {
        &self.monomials[i]
    }

    pub fn monomials(&self) -> &[Vec<i32>] {
        &self.monomials
    }

    pub fn position(&self, exps: &[i32]) -> Option<usize> {
        self.positions.get(exps).copied()
    }
}

fn fill_degrees(nvars: usize, left: i32, exact: bool, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
    if cur.len() == nvars {
        if !exact || left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for e in 0..=left {
        cur.push(e);
        fill_degrees(nvars, left - e, exact, cur, out);
        cur.pop();
    }
}

/// Compositions of `total` into `parts` nonnegative parts, in descending
/// lexicographic order. Empty when `total` is negative.
fn compositions_desc(parts: usize, total: i32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    if total < 0 {
        return out;
    }
    let mut cur = Vec::with_capacity(parts);
    desc_rec(parts, total, &mut cur, &mut out);
    out
}

fn desc_rec(parts: usize, left: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
    if cur.len() + 1 == parts {
        cur.push(left);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for e in (0..=left).rev() {
        cur.push(e);
        desc_rec(parts, left - e, cur, out);
        cur.pop();
    }
}

fn point_to_exps(p: &[i64]) -> Result<Vec<i32>> {
    p.iter()
        .map(|&c| {
            i32::try_from(c).map_err(|_| {
                Error::InvalidInput(format!("lattice coordinate {c} does not fit an exponent"))
            })
        })
        .collect()
}

/// Identifies one column: the generator f_i and the monomial multiplier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnLabel {
    pub generator: usize,
    pub multiplier: Vec<i32>,
}

/// A resultant-style matrix. Column j of `entries` holds the coefficient
/// vector of x^columns[j].multiplier * f_{columns[j].generator}, expressed in
/// the row monomials of `rows`.
#[derive(Clone, Debug)]
pub struct MacaulayMatrix {
    pub entries: CMat,
    pub rows: MonomialIndex,
    pub columns: Vec<ColumnLabel>,
    pub mode: Mode,
    /// Construction degree, one entry per block; empty in toric mode, which
    /// has no degree.
    pub rho: Vec<i32>,
    /// Lattice shift used by the toric construction.
    pub shift: Option<Vec<f64>>,
}

fn fill_matrix(
    system: &PolynomialSystem,
    rows: MonomialIndex,
    columns: Vec<ColumnLabel>,
    mode: Mode,
    rho: Vec<i32>,
    shift: Option<Vec<f64>>,
    max_entries: usize,
) -> Result<MacaulayMatrix> {
    let (m, c) = (rows.len(), columns.len());
    if m.saturating_mul(c) > max_entries {
        return Err(Error::ResourceLimit { rows: m, cols: c, cap: max_entries });
    }
    let mut entries = CMat::zeros(m, c);
    for (j, label) in columns.iter().enumerate() {
        let product = system.polys[label.generator].mul_monomial(c64(1.0, 0.0), &label.multiplier);
        for term in product.terms() {
            let r = rows.position(&term.exps).ok_or_else(|| {
                Error::Inconsistency(format!(
                    "column (generator {}, multiplier {:?}) reaches the monomial {:?}, \
                     which has no row",
                    label.generator, label.multiplier, term.exps
                ))
            })?;
            entries[(r, j)] = term.coeff;
        }
    }
    Ok(MacaulayMatrix { entries, rows, columns, mode, rho, shift })
}

/// Total degrees of an affine system, rejecting Laurent exponents, zero
/// polynomials, and nonzero constants (which preclude any root).
fn checked_degrees(system: &PolynomialSystem) -> Result<Vec<i32>> {
    let mut out = Vec::with_capacity(system.polys.len());
    for (i, p) in system.polys.iter().enumerate() {
        if p.terms().iter().any(|t| t.exps.iter().any(|&e| e < 0)) {
            return Err(Error::NegativeExponent { index: i });
        }
        let d = p.total_degree().ok_or(Error::ZeroPolynomial { index: i })?;
        if d == 0 {
            return Err(Error::InvalidInput(format!(
                "generator {i} is a nonzero constant; the system has no roots"
            )));
        }
        out.push(d);
    }
    Ok(out)
}

/// Dense affine construction. Rows: all monomials of degree at most
/// rho = sum(d_i) - n + 1. Columns: x^beta f_i with deg(beta) <= rho - d_i,
/// generator-major, multipliers in the canonical monomial order.
pub fn dense_macaulay(system: &PolynomialSystem, max_entries: usize) -> Result<MacaulayMatrix> {
    let n = system.nvars;
    if system.polys.len() != n {
        return Err(Error::NotSquare { polys: system.polys.len(), expected: n });
    }
    let degrees = checked_degrees(system)?;
    let rho = degrees.iter().sum::<i32>() - n as i32 + 1;
    let rows = MonomialIndex::deg_at_most(n, rho);
    let mut columns = Vec::new();
    for (i, &d) in degrees.iter().enumerate() {
        for beta in MonomialIndex::deg_at_most(n, rho - d).monomials() {
            columns.push(ColumnLabel { generator: i, multiplier: beta.clone() });
        }
    }
    fill_matrix(system, rows, columns, Mode::Affine, vec![rho], None, max_entries)
}

fn homogeneous_degrees(system: &PolynomialSystem) -> Result<Vec<i32>> {
    if system.polys.len() + 1 != system.nvars {
        return Err(Error::NotSquare {
            polys: system.polys.len(),
            expected: system.nvars.saturating_sub(1),
        });
    }
    let mut out = Vec::with_capacity(system.polys.len());
    for (i, p) in system.polys.iter().enumerate() {
        if p.terms().iter().any(|t| t.exps.iter().any(|&e| e < 0)) {
            return Err(Error::NegativeExponent { index: i });
        }
        if !p.is_homogeneous() {
            return Err(Error::NotHomogeneous {
                index: i,
                detail: "terms have unequal total degrees".into(),
            });
        }
        let d = p.total_degree().ok_or(Error::ZeroPolynomial { index: i })?;
        if d == 0 {
            return Err(Error::InvalidInput(format!(
                "generator {i} is a nonzero constant; the system has no roots"
            )));
        }
        out.push(d);
    }
    Ok(out)
}

fn homogeneous_at(
    system: &PolynomialSystem,
    degrees: &[i32],
    rho: i32,
    max_entries: usize,
) -> Result<MacaulayMatrix> {
    let rows = MonomialIndex::deg_exact(system.nvars, rho);
    let mut columns = Vec::new();
    for (i, &d) in degrees.iter().enumerate() {
        for beta in MonomialIndex::deg_exact(system.nvars, rho - d).monomials() {
            columns.push(ColumnLabel { generator: i, multiplier: beta.clone() });
        }
    }
    fill_matrix(system, rows, columns, Mode::Projective, vec![rho], None, max_entries)
}

/// Homogeneous construction for n generators in n+1 coordinates. Rows: all
/// monomials of exact degree rho = sum(d_i) - (n - 1). Columns: x^beta f_i
/// with deg(beta) = rho - d_i.
pub fn homogeneous_macaulay(system: &PolynomialSystem, max_entries: usize) -> Result<MacaulayMatrix> {
    let degrees = homogeneous_degrees(system)?;
    let n = system.polys.len() as i32;
    let rho = degrees.iter().sum::<i32>() - (n - 1);
    homogeneous_at(system, &degrees, rho, max_entries)
}

/// Homogeneous construction at an explicit degree `rho`, which must be at
/// least the largest generator degree.
pub fn homogeneous_macaulay_at(
    system: &PolynomialSystem,
    rho: i32,
    max_entries: usize,
) -> Result<MacaulayMatrix> {
    let degrees = homogeneous_degrees(system)?;
    if let Some(&dmax) = degrees.iter().max() {
        if rho < dmax {
            return Err(Error::InvalidInput(format!(
                "construction degree {rho} is below the largest generator degree {dmax}"
            )));
        }
    }
    homogeneous_at(system, &degrees, rho, max_entries)
}

/// Multihomogeneous construction on a product of projective spaces. Rows: all
/// monomials of block multidegree exactly rho = 1 + sum(d_i), where the
/// all-ones vector accounts for one generic linear form per block closing the
/// construction. Columns: x^beta f_i with multideg(beta) = rho - d_i.
pub fn multihom_macaulay(
    system: &PolynomialSystem,
    block_sizes: &[usize],
    max_entries: usize,
) -> Result<MacaulayMatrix> {
    let multidegrees = multihom_degrees(system, block_sizes)?;
    let mut rho = vec![1i32; block_sizes.len()];
    for d in &multidegrees {
        for (r, dk) in rho.iter_mut().zip(d) {
            *r += dk;
        }
    }
    let rows = MonomialIndex::multideg_exact(block_sizes, &rho);
    let mut columns = Vec::new();
    for (i, d) in multidegrees.iter().enumerate() {
        let target: Vec<i32> = rho.iter().zip(d).map(|(r, dk)| r - dk).collect();
        for beta in MonomialIndex::multideg_exact(block_sizes, &target).monomials() {
            columns.push(ColumnLabel { generator: i, multiplier: beta.clone() });
        }
    }
    fill_matrix(system, rows, columns, Mode::Multihom, rho, None, max_entries)
}

fn multihom_degrees(system: &PolynomialSystem, block_sizes: &[usize]) -> Result<Vec<Vec<i32>>> {
    if block_sizes.is_empty() || block_sizes.iter().any(|&s| s < 2) {
        return Err(Error::InvalidInput(
            "every block needs at least 2 homogeneous coordinates".into(),
        ));
    }
    let nvars: usize = block_sizes.iter().sum();
    if nvars != system.nvars {
        return Err(Error::InvalidInput(format!(
            "blocks cover {nvars} variables but the system has {}",
            system.nvars
        )));
    }
    let expected = nvars - block_sizes.len();
    if system.polys.len() != expected {
        return Err(Error::NotSquare { polys: system.polys.len(), expected });
    }
    let ranges = crate::poly::block_ranges(block_sizes);
    let mut out = Vec::with_capacity(system.polys.len());
    for (i, p) in system.polys.iter().enumerate() {
        if p.terms().iter().any(|t| t.exps.iter().any(|&e| e < 0)) {
            return Err(Error::NegativeExponent { index: i });
        }
        let d = p.multidegree(&ranges).ok_or_else(|| Error::NotHomogeneous {
            index: i,
            detail: "no consistent multidegree across the declared blocks".into(),
        })?;
        if d.iter().all(|&dk| dk == 0) {
            return Err(Error::InvalidInput(format!(
                "generator {i} is a nonzero constant; the system has no roots"
            )));
        }
        out.push(d);
    }
    Ok(out)
}

/// Toric construction. Rows: lattice points of Delta_n + P_1 + ... + P_n
/// shifted by `v`, where P_i is the Newton polytope of f_i and the unit
/// simplex Delta_n stands in for a generic linear polynomial whose multiples
/// are never materialized. Columns for f_i: x^beta f_i over the lattice
/// points beta of the shifted sum with P_i left out.
pub fn toric_macaulay(
    system: &PolynomialSystem,
    v: &[f64],
    max_entries: usize,
) -> Result<MacaulayMatrix> {
    let n = system.nvars;
    if system.polys.len() != n {
        return Err(Error::NotSquare { polys: system.polys.len(), expected: n });
    }
    if v.len() != n {
        return Err(Error::InvalidInput(format!(
            "shift has {} coordinates, expected {n}",
            v.len()
        )));
    }
    let supports: Vec<LatticePolytope> = system
        .polys
        .iter()
        .map(newton_polytope)
        .collect::<Result<_>>()?;
    let simplex = LatticePolytope::simplex(n, 1);
    let mut total = simplex.clone();
    for p in &supports {
        total = total.minkowski_sum(p)?;
    }
    let row_points = total.lattice_points(v);
    if row_points.is_empty() {
        return Err(Error::EmptySupport { index: 0 });
    }
    let rows = MonomialIndex::from_points(&row_points)?;
    let mut columns = Vec::new();
    for i in 0..n {
        let mut partial = simplex.clone();
        for (j, p) in supports.iter().enumerate() {
            if j != i {
                partial = partial.minkowski_sum(p)?;
            }
        }
        let points = partial.lattice_points(v);
        if points.is_empty() {
            return Err(Error::EmptySupport { index: i });
        }
        let mut multipliers = Vec::with_capacity(points.len());
        for pt in &points {
            multipliers.push(point_to_exps(pt)?);
        }
        multipliers.sort_by(|a, b| cmp_monomials(a, b));
        for beta in multipliers {
            columns.push(ColumnLabel { generator: i, multiplier: beta });
        }
    }
    fill_matrix(system, rows, columns, Mode::Toric, Vec::new(), Some(v.to_vec()), max_entries)
}
