//! Exact convex hulls over the integers.
//!
//! The hull is found by gift wrapping: rotate a supporting hyperplane around
//! the affine hull of its current contact set until the contact set spans a
//! facet, then walk facet-to-facet across ridges. All predicates are big
//! integer comparisons, so repeated points, collinear points, and polytopes
//! that do not span the ambient space are handled exactly. Each facet's own
//! hull is computed recursively, which yields the ridges, the vertex set, and
//! a boundary triangulation used for volumes.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub(crate) type BVec = Vec<BigInt>;

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn diff(a: &[BigInt], b: &[BigInt]) -> BVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut x = a.abs();
    let mut y = b.abs();
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    x
}

fn primitive(mut v: BVec) -> BVec {
    let mut g = BigInt::zero();
    for e in &v {
        g = gcd(&g, e);
    }
    if g > BigInt::one() {
        for e in &mut v {
            *e = &*e / &g;
        }
    }
    v
}

/// Fraction-free row echelon reduction. Returns the rank, the pivot columns,
/// and the reduced rows. Exact over the integers.
fn echelon(mut m: Vec<BVec>, width: usize) -> (usize, Vec<usize>, Vec<BVec>) {
    let mut piv_cols = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0usize;
    for c in 0..width {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        for i in r + 1..m.len() {
            for j in c + 1..width {
                m[i][j] = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        piv_cols.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (piv_cols.len(), piv_cols, m)
}

/// Exact determinant by fraction-free elimination.
fn det(mut m: Vec<BVec>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return BigInt::zero();
        };
        if pr != c {
            m.swap(c, pr);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                m[i][j] = (&m[c][c] * &m[i][j] - &m[i][c] * &m[c][j]) / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[c][c].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Integer basis of { x : <row, x> = 0 for every row }, each vector primitive.
fn kernel_basis(rows: &[BVec], width: usize) -> Vec<BVec> {
    let (rank, piv, ech) = echelon(rows.to_vec(), width);
    let piv_set: HashSet<usize> = piv.iter().copied().collect();
    let a_sub: Vec<BVec> = (0..rank)
        .map(|i| piv.iter().map(|&c| ech[i][c].clone()).collect())
        .collect();
    let d = det(a_sub.clone());
    let mut basis = Vec::new();
    for free in (0..width).filter(|c| !piv_set.contains(c)) {
        let b: BVec = (0..rank).map(|i| ech[i][free].clone()).collect();
        let mut x = vec![BigInt::zero(); width];
        for k in 0..rank {
            let mut mk = a_sub.clone();
            for (i, row) in mk.iter_mut().enumerate() {
                row[k] = -b[i].clone();
            }
            x[piv[k]] = det(mk);
        }
        x[free] = d.clone();
        basis.push(primitive(x));
    }
    basis
}

/// One facet of a hull: `<normal, x> <= offset` for every point, with
/// equality exactly on `support` (sorted point indices).
#[derive(Clone)]
pub(crate) struct Facet {
    pub normal: BVec,
    pub offset: BigInt,
    pub support: Vec<usize>,
}

#[derive(Clone)]
pub(crate) struct HullData {
    /// Dimension of the affine hull of the points.
    pub affine_dim: usize,
    /// Facet inequalities in ambient coordinates.
    pub facets: Vec<Facet>,
    /// Affine-hull equations `<a, x> = b`; empty for full-dimensional hulls.
    pub equalities: Vec<(BVec, BigInt)>,
    /// Sorted indices of the points that are vertices of the hull.
    pub vertices: Vec<usize>,
    /// Simplices of dimension `affine_dim` (index tuples of size
    /// `affine_dim + 1`) tiling the hull.
    pub triangulation: Vec<Vec<usize>>,
}

/// Convex hull of distinct integer points. Works in any dimension and for
/// point sets whose hull is lower-dimensional.
pub(crate) fn convex_hull(points: &[BVec]) -> HullData {
    assert!(!points.is_empty(), "hull of an empty point set");
    let ambient = points[0].len();
    let diffs: Vec<BVec> = points[1..].iter().map(|p| diff(p, &points[0])).collect();
    let (rank, piv_cols, _) = echelon(diffs.clone(), ambient);
    let equalities: Vec<(BVec, BigInt)> = kernel_basis(&diffs, ambient)
        .into_iter()
        .map(|a| {
            let b = dot(&a, &points[0]);
            (a, b)
        })
        .collect();
    if rank == 0 {
        return HullData {
            affine_dim: 0,
            facets: Vec::new(),
            equalities,
            vertices: vec![0],
            triangulation: vec![vec![0]],
        };
    }
    let working: Vec<BVec> = if rank == ambient {
        points.to_vec()
    } else {
        points
            .iter()
            .map(|p| piv_cols.iter().map(|&c| p[c].clone()).collect())
            .collect()
    };
    let (facets_w, vertices, triangulation) = fulldim_hull(&working, rank);
    let facets = facets_w
        .into_iter()
        .map(|f| {
            if rank == ambient {
                f
            } else {
                let mut normal = vec![BigInt::zero(); ambient];
                for (k, &c) in piv_cols.iter().enumerate() {
                    normal[c] = f.normal[k].clone();
                }
                Facet { normal, offset: f.offset, support: f.support }
            }
        })
        .collect();
    HullData { affine_dim: rank, facets, equalities, vertices, triangulation }
}

/// Hull of points that span dimension `r` in r-dimensional working space.
fn fulldim_hull(pts: &[BVec], r: usize) -> (Vec<Facet>, Vec<usize>, Vec<Vec<usize>>) {
    if r == 1 {
        let mut imin = 0usize;
        let mut imax = 0usize;
        for (i, p) in pts.iter().enumerate() {
            if p[0] < pts[imin][0] {
                imin = i;
            }
            if p[0] > pts[imax][0] {
                imax = i;
            }
        }
        let facets = vec![
            Facet { normal: vec![BigInt::one()], offset: pts[imax][0].clone(), support: vec![imax] },
            Facet {
                normal: vec![-BigInt::one()],
                offset: -pts[imin][0].clone(),
                support: vec![imin],
            },
        ];
        let mut vertices = vec![imin, imax];
        vertices.sort_unstable();
        return (facets, vertices, vec![vec![imin, imax]]);
    }

    let first = initial_facet(pts, r);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(first.support.clone());
    let mut queue = vec![first];
    let mut facets: Vec<Facet> = Vec::new();
    let mut verts: BTreeSet<usize> = BTreeSet::new();
    let mut tris: Vec<Vec<usize>> = Vec::new();
    let anchor = 0usize;
    while let Some(f) = queue.pop() {
        let fpts: Vec<BVec> = f.support.iter().map(|&i| pts[i].clone()).collect();
        let sub = convex_hull(&fpts);
        debug_assert_eq!(sub.affine_dim, r - 1, "facet support must span a hyperplane");
        for &v in &sub.vertices {
            verts.insert(f.support[v]);
        }
        if !f.support.contains(&anchor) {
            for s in &sub.triangulation {
                let mut simplex: Vec<usize> = s.iter().map(|&k| f.support[k]).collect();
                simplex.push(anchor);
                tris.push(simplex);
            }
        }
        for ridge in &sub.facets {
            let ridge_global: Vec<usize> =
                ridge.support.iter().map(|&k| f.support[k]).collect();
            let nb = pivot_facet(pts, r, &f, &ridge_global);
            if seen.insert(nb.support.clone()) {
                queue.push(nb);
            }
        }
        facets.push(f);
    }
    (facets, verts.into_iter().collect(), tris)
}

/// Offset and contact set of the supporting hyperplane with normal `a`.
fn support_of(pts: &[BVec], a: &[BigInt]) -> (BigInt, Vec<usize>) {
    let vals: Vec<BigInt> = pts.iter().map(|p| dot(a, p)).collect();
    let b = vals.iter().max().expect("nonempty").clone();
    let support = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == b)
        .map(|(i, _)| i)
        .collect();
    (b, support)
}

/// Rotate the supporting hyperplane (a, b) toward direction `u` (which must
/// vanish on the contact set to keep) until it first touches another point.
/// Returns the new primitive normal and offset.
fn rotate(pts: &[BVec], a: &[BigInt], b: &BigInt, u: &[BigInt], f0: &[BigInt]) -> (BVec, BigInt) {
    let mut best: Option<(BigInt, BigInt)> = None;
    for q in pts {
        let d = b - dot(a, q);
        if d.is_zero() {
            continue;
        }
        debug_assert!(d.is_positive(), "hyperplane must support the point set");
        let tau = dot(u, &diff(q, f0));
        let better = match &best {
            None => true,
            Some((bt, bd)) => &tau * bd > bt * &d,
        };
        if better {
            best = Some((tau, d));
        }
    }
    let (tau, d) = best.expect("full-dimensional sets have points off any hyperplane");
    let na: BVec = a
        .iter()
        .zip(u)
        .map(|(ai, ui)| &tau * ai + &d * ui)
        .collect();
    let na = primitive(na);
    let nb = dot(&na, f0);
    (na, nb)
}

/// Grow an arbitrary supporting hyperplane into a facet by repeated rotation
/// around the affine hull of its contact set.
fn initial_facet(pts: &[BVec], r: usize) -> Facet {
    let mut a: BVec = vec![BigInt::zero(); r];
    a[0] = -BigInt::one();
    let (mut b, mut support) = support_of(pts, &a);
    loop {
        let base = support[0];
        let mut rows: Vec<BVec> = support[1..]
            .iter()
            .map(|&i| diff(&pts[i], &pts[base]))
            .collect();
        let (srank, _, _) = echelon(rows.clone(), r);
        if srank == r - 1 {
            return Facet { normal: a, offset: b, support };
        }
        rows.push(a.clone());
        let u = kernel_basis(&rows, r)
            .into_iter()
            .next()
            .expect("contact set below facet dimension leaves rotation freedom");
        let (na, nb) = rotate(pts, &a, &b, &u, &pts[base]);
        a = na;
        b = nb;
        let (b2, s2) = support_of(pts, &a);
        debug_assert_eq!(b2, b);
        debug_assert!(s2.len() > support.len(), "rotation must grow the contact set");
        support = s2;
    }
}

/// Cross a ridge of facet `f` to the unique adjacent facet.
fn pivot_facet(pts: &[BVec], r: usize, f: &Facet, ridge: &[usize]) -> Facet {
    let r0 = ridge[0];
    let mut rows: Vec<BVec> = ridge[1..]
        .iter()
        .map(|&i| diff(&pts[i], &pts[r0]))
        .collect();
    rows.push(f.normal.clone());
    let mut u = kernel_basis(&rows, r)
        .into_iter()
        .next()
        .expect("ridge leaves exactly one rotation direction");
    // point the rotation away from the current facet: its points off the
    // ridge must drop below the moving hyperplane
    let ridge_set: HashSet<usize> = ridge.iter().copied().collect();
    let witness = f
        .support
        .iter()
        .copied()
        .find(|i| !ridge_set.contains(i))
        .expect("a ridge is a proper face of its facet");
    let tw = dot(&u, &diff(&pts[witness], &pts[r0]));
    debug_assert!(!tw.is_zero(), "witness must leave the ridge hyperplane");
    if tw.is_positive() {
        for e in &mut u {
            *e = -&*e;
        }
    }
    let (na, nb) = rotate(pts, &f.normal, &f.offset, &u, &pts[r0]);
    let (b2, support) = support_of(pts, &na);
    debug_assert_eq!(b2, nb);
    Facet { normal: na, offset: nb, support }
}

/// Normalized volume (affine_dim! times the Euclidean volume) of the hull,
/// summed over the star triangulation. Zero when the hull does not span the
/// ambient space.
pub(crate) fn normalized_volume(points: &[BVec], hull: &HullData) -> BigInt {
    let ambient = points[0].len();
    if hull.affine_dim < ambient {
        return BigInt::zero();
    }
    let mut total = BigInt::zero();
    for simplex in &hull.triangulation {
        let base = &points[simplex[0]];
        let edges: Vec<BVec> = simplex[1..]
            .iter()
            .map(|&i| diff(&points[i], base))
            .collect();
        total += det(edges).abs();
    }
    total
}
