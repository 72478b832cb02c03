//! Newton polytopes, Minkowski sums, lattice-point enumeration, volumes, and
//! mixed volumes.
//!
//! Everything geometric is exact: hulls and facet inequalities come from
//! integer predicates (see the `hull` submodule), volumes are normalized
//! integers, and the mixed volume is an integer obtained without rounding.
//! The inclusion-exclusion route is exponential in the dimension; that is
//! fine for the intended range n <= 5.

mod hull;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{Polynomial, PolynomialSystem};
use hull::{convex_hull, BVec, HullData};

/// Convex polytope with integer vertices, stored hull-reduced.
#[derive(Clone)]
pub struct LatticePolytope {
    ambient: usize,
    /// Exact vertex set, lexicographically sorted.
    vertices: Vec<Vec<i64>>,
    big_vertices: Vec<BVec>,
    hull: HullData,
}

fn to_big(p: &[i64]) -> BVec {
    p.iter().map(|&x| BigInt::from(x)).collect()
}

fn factorial(n: usize) -> BigInt {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= BigInt::from(k);
    }
    f
}

impl LatticePolytope {
    /// Hull of an arbitrary finite point set (duplicates and interior points
    /// are discarded).
    pub fn from_points(points: Vec<Vec<i64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("polytope needs at least one point".into()));
        }
        let ambient = points[0].len();
        if ambient == 0 || points.iter().any(|p| p.len() != ambient) {
            return Err(Error::InvalidInput(
                "polytope points must share a positive dimension".into(),
            ));
        }
        let mut points = points;
        points.sort_unstable();
        points.dedup();
        let bpts: Vec<BVec> = points.iter().map(|p| to_big(p)).collect();
        let first = convex_hull(&bpts);
        // keep only the vertices, then rebuild so every stored index refers
        // to the canonical lexicographic vertex list
        let vertices: Vec<Vec<i64>> = first.vertices.iter().map(|&i| points[i].clone()).collect();
        let big_vertices: Vec<BVec> = vertices.iter().map(|p| to_big(p)).collect();
        let hull = convex_hull(&big_vertices);
        Ok(LatticePolytope { ambient, vertices, big_vertices, hull })
    }

    /// The dilated standard simplex d*conv{0, e_1, ..., e_n}.
    pub fn simplex(n: usize, d: i64) -> Self {
        let mut pts = vec![vec![0i64; n]];
        for j in 0..n {
            let mut p = vec![0i64; n];
            p[j] = d;
            pts.push(p);
        }
        LatticePolytope::from_points(pts).expect("simplex vertices are valid")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Dimension of the affine hull (ambient dimension when full-dimensional).
    pub fn affine_dim(&self) -> usize {
        self.hull.affine_dim
    }

    /// Exact vertex set, lexicographically sorted.
    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn num_facets(&self) -> usize {
        self.hull.facets.len()
    }

    pub fn minkowski_sum(&self, other: &LatticePolytope) -> Result<LatticePolytope> {
        if self.ambient != other.ambient {
            return Err(Error::InvalidInput(format!(
                "Minkowski sum of polytopes in dimensions {} and {}",
                self.ambient, other.ambient
            )));
        }
        let mut sums = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for v in &self.vertices {
            for w in &other.vertices {
                sums.push(v.iter().zip(w).map(|(a, b)| a + b).collect());
            }
        }
        LatticePolytope::from_points(sums)
    }

    /// The dilate k*P (k >= 0).
    pub fn dilate(&self, k: i64) -> LatticePolytope {
        assert!(k >= 0, "dilation factor must be nonnegative");
        let pts = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|&x| x * k).collect())
            .collect();
        LatticePolytope::from_points(pts).expect("dilate of a valid polytope")
    }

    /// n! times the Euclidean volume, an exact integer (zero when the
    /// polytope does not span the ambient space).
    pub fn normalized_volume(&self) -> BigInt {
        hull::normalized_volume(&self.big_vertices, &self.hull)
    }

    /// Euclidean volume.
    pub fn volume(&self) -> f64 {
        let nv = self.normalized_volume().to_f64().expect("volume fits in f64");
        nv / factorial(self.ambient).to_f64().expect("factorial fits in f64")
    }

    /// Membership in the polytope within `tol` on every facet inequality and
    /// affine-hull equation.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        assert_eq!(x.len(), self.ambient);
        let dot_f = |a: &[BigInt]| -> f64 {
            a.iter()
                .zip(x)
                .map(|(ai, xi)| ai.to_f64().expect("normal fits in f64") * xi)
                .sum()
        };
        for (a, b) in &self.hull.equalities {
            if (dot_f(a) - b.to_f64().unwrap()).abs() > tol {
                return false;
            }
        }
        for f in &self.hull.facets {
            if dot_f(&f.normal) > f.offset.to_f64().unwrap() + tol {
                return false;
            }
        }
        true
    }

    /// All integer points of P + v, sorted lexicographically. Membership is
    /// decided on the half-space description with tolerance 1e-9.
    pub fn lattice_points(&self, shift: &[f64]) -> Vec<Vec<i64>> {
        assert_eq!(shift.len(), self.ambient);
        const TOL: f64 = 1e-9;
        let mut lo = vec![i64::MAX; self.ambient];
        let mut hi = vec![i64::MIN; self.ambient];
        for v in &self.vertices {
            for j in 0..self.ambient {
                let c = v[j] as f64 + shift[j];
                lo[j] = lo[j].min((c - TOL).ceil() as i64);
                hi[j] = hi[j].max((c + TOL).floor() as i64);
            }
        }
        let mut out = Vec::new();
        let mut x = lo.clone();
        'grid: loop {
            let moved: Vec<f64> = x.iter().zip(shift).map(|(&xi, s)| xi as f64 - s).collect();
            if self.contains(&moved, TOL) {
                out.push(x.clone());
            }
            for j in (0..self.ambient).rev() {
                if x[j] < hi[j] {
                    x[j] += 1;
                    x[j + 1..self.ambient].copy_from_slice(&lo[j + 1..self.ambient]);
                    continue 'grid;
                }
            }
            break;
        }
        out.sort_unstable();
        out
    }

}

/// Convex hull of a polynomial's exponent vectors.
pub fn newton_polytope(p: &Polynomial) -> Result<LatticePolytope> {
    if p.is_zero() {
        return Err(Error::InvalidInput(
            "the zero polynomial has no Newton polytope".into(),
        ));
    }
    LatticePolytope::from_points(p.support())
}

/// Mixed volume by inclusion-exclusion over Minkowski sums, normalized so
/// that MV(d_1*S, ..., d_n*S) = prod d_i for the standard simplex S.
pub fn mixed_volume(ps: &[LatticePolytope]) -> Result<u64> {
    let n = ps.len();
    if n == 0 {
        return Err(Error::InvalidInput("mixed volume of zero polytopes".into()));
    }
    for p in ps {
        if p.ambient_dim() != n {
            return Err(Error::InvalidInput(format!(
                "mixed volume needs {n} polytopes in dimension {n}, found ambient {}",
                p.ambient_dim()
            )));
        }
    }
    let mut acc = BigInt::zero();
    for mask in 1u32..(1u32 << n) {
        let mut sum: Option<LatticePolytope> = None;
        for (i, p) in ps.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum = Some(match sum {
                    None => LatticePolytope::from_points(p.vertices.clone())?,
                    Some(s) => s.minkowski_sum(p)?,
                });
            }
        }
        let w = sum.expect("mask nonzero").normalized_volume();
        if (n as u32 - mask.count_ones()) % 2 == 1 {
            acc -= w;
        } else {
            acc += w;
        }
    }
    let f = factorial(n);
    if (&acc % &f) != BigInt::zero() || acc.is_negative() {
        return Err(Error::Inconsistency(format!(
            "inclusion-exclusion sum {acc} is not a nonnegative multiple of {n}!"
        )));
    }
    (acc / f)
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("mixed volume exceeds u64".into()))
}

/// Exact rational scalar used by the interpolation route.
#[derive(Clone, Debug)]
struct Frac {
    num: BigInt,
    den: BigInt,
}

impl Frac {
    fn new(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero());
        let (mut num, mut den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = big_gcd(&num, &den);
        if g > BigInt::one() {
            num /= &g;
            den /= &g;
        }
        Frac { num, den }
    }

    fn from_int(v: BigInt) -> Self {
        Frac { num: v, den: BigInt::one() }
    }

    fn add(&self, other: &Frac) -> Frac {
        Frac::new(&self.num * &other.den + &other.num * &self.den, &self.den * &other.den)
    }

    fn mul(&self, other: &Frac) -> Frac {
        Frac::new(&self.num * &other.num, &self.den * &other.den)
    }
}

fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut x = a.abs();
    let mut y = b.abs();
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    x
}

/// Weights w_j such that the coefficient of x^1 in the degree-<=n polynomial
/// through (j, f(j)) for j = 0..=n equals sum_j w_j f(j).
fn lagrange_linear_weights(n: usize) -> Vec<Frac> {
    (0..=n)
        .map(|j| {
            let mut coeffs: Vec<BigInt> = vec![BigInt::one()];
            let mut den = BigInt::one();
            for k in 0..=n {
                if k == j {
                    continue;
                }
                let mut nc = vec![BigInt::zero(); coeffs.len() + 1];
                for (i, c) in coeffs.iter().enumerate() {
                    nc[i + 1] += c;
                    nc[i] -= c * BigInt::from(k);
                }
                coeffs = nc;
                den *= BigInt::from(j as i64 - k as i64);
            }
            Frac::new(coeffs[1].clone(), den)
        })
        .collect()
}

/// Mixed volume found a second way: tabulate Vol(sum lambda_i P_i) on the
/// integer grid {0..n}^n and extract the coefficient of lambda_1*...*lambda_n
/// by exact Lagrange interpolation, one variable at a time.
pub fn mixed_volume_interpolated(ps: &[LatticePolytope]) -> Result<u64> {
    let n = ps.len();
    if n == 0 {
        return Err(Error::InvalidInput("mixed volume of zero polytopes".into()));
    }
    for p in ps {
        if p.ambient_dim() != n {
            return Err(Error::InvalidInput(format!(
                "mixed volume needs {n} polytopes in dimension {n}, found ambient {}",
                p.ambient_dim()
            )));
        }
    }
    let side = n + 1;
    let total = side.pow(n as u32);
    // grid of n! * Vol(sum lambda_i P_i), lambda decoded with the last
    // polytope's coordinate fastest
    let mut table: Vec<Frac> = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut lambda = vec![0i64; n];
        for k in (0..n).rev() {
            lambda[k] = (rest % side) as i64;
            rest /= side;
        }
        let mut sum = LatticePolytope::from_points(vec![vec![0i64; n]])?;
        for (i, p) in ps.iter().enumerate() {
            if lambda[i] > 0 {
                sum = sum.minkowski_sum(&p.dilate(lambda[i]))?;
            }
        }
        table.push(Frac::from_int(sum.normalized_volume()));
    }
    let w = lagrange_linear_weights(n);
    for _ in 0..n {
        table = table
            .chunks(side)
            .map(|chunk| {
                let mut acc = Frac::from_int(BigInt::zero());
                for (j, v) in chunk.iter().enumerate() {
                    acc = acc.add(&w[j].mul(v));
                }
                acc
            })
            .collect();
    }
    assert_eq!(table.len(), 1);
    let coeff = table.pop().expect("one value left");
    // the tabulated function carried a factor n!, and the coefficient of the
    // mixed monomial carries another: coeff = n! * MV with MV the normalized
    // mixed volume
    let f = factorial(n);
    if coeff.den != BigInt::one() || (&coeff.num % &f) != BigInt::zero() || coeff.num.is_negative()
    {
        return Err(Error::Inconsistency(format!(
            "interpolated mixed-volume coefficient {}/{} is not a nonnegative multiple of {n}!",
            coeff.num, coeff.den
        )));
    }
    (coeff.num / f)
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("mixed volume exceeds u64".into()))
}

/// Run both mixed-volume routes and insist they agree.
pub fn mixed_volume_checked(ps: &[LatticePolytope]) -> Result<u64> {
    let a = mixed_volume(ps)?;
    let b = mixed_volume_interpolated(ps)?;
    if a != b {
        return Err(Error::Inconsistency(format!(
            "mixed volume disagreement: inclusion-exclusion {a} vs interpolation {b}"
        )));
    }
    Ok(a)
}

/// BKK root count: mixed volume of the system's Newton polytopes.
pub fn bkk_bound(sys: &PolynomialSystem) -> Result<u64> {
    let ps = sys
        .polys
        .iter()
        .map(newton_polytope)
        .collect::<Result<Vec<_>>>()?;
    mixed_volume(&ps)
}

/// Root count for a multihomogeneous system: the coefficient of
/// z_1^{b_1}...z_k^{b_k} in prod_i (d_{i1} z_1 + ... + d_{ik} z_k), where
/// b_k are the block dimensions and d_i the multidegrees.
pub fn multihom_bezout(block_dims: &[usize], degrees: &[Vec<i32>]) -> Result<u64> {
    let k = block_dims.len();
    let n: usize = block_dims.iter().sum();
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("no blocks given".into()));
    }
    if degrees.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} degree vectors (sum of block dimensions), found {}",
            degrees.len()
        )));
    }
    for (i, d) in degrees.iter().enumerate() {
        if d.len() != k {
            return Err(Error::InvalidInput(format!(
                "degree vector {i} has {} entries for {k} blocks",
                d.len()
            )));
        }
        if d.iter().any(|&x| x < 0) {
            return Err(Error::InvalidInput(format!("degree vector {i} has a negative entry")));
        }
    }
    // truncated product: exponents above the block dimension never fall back
    let shape: Vec<usize> = block_dims.iter().map(|&m| m + 1).collect();
    let mut strides = vec![1usize; k];
    for a in (0..k.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let total: usize = shape.iter().product();
    let mut acc = vec![0u128; total];
    acc[0] = 1;
    for d in degrees {
        let mut next = vec![0u128; total];
        for (idx, &c) in acc.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut rest = idx;
            for axis in 0..k {
                let e = rest / strides[axis];
                rest %= strides[axis];
                if e < block_dims[axis] && d[axis] > 0 {
                    next[idx + strides[axis]] += c * d[axis] as u128;
                }
            }
        }
        acc = next;
    }
    let target: usize = (0..k).map(|a| block_dims[a] * strides[a]).sum();
    u64::try_from(acc[target])
        .map_err(|_| Error::InvalidInput("multihomogeneous count exceeds u64".into()))
}
