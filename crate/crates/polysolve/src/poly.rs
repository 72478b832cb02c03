//! Multivariate polynomials with complex coefficients and integer (possibly
//! negative) exponents, plus the degree and homogenization operations the
//! matrix builders rely on.
//!
//! Terms are kept sorted in the canonical monomial order used throughout the
//! crate: total degree ascending, ties broken by descending lexicographic
//! comparison of exponent vectors (first variable major).

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Canonical monomial order: total degree ascending, then descending lex on
/// the exponent vector.
pub fn cmp_monomials(a: &[i32], b: &[i32]) -> Ordering {
    let da: i32 = a.iter().sum();
    let db: i32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

/// Consecutive variable ranges for blocks of the given sizes: sizes [2, 3]
/// give the ranges 0..2 and 2..5.
pub fn block_ranges(block_sizes: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::with_capacity(block_sizes.len());
    let mut start = 0;
    for &s in block_sizes {
        out.push(start..start + s);
        start += s;
    }
    out
}

/// One coefficient-monomial pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub exps: Vec<i32>,
}

/// Polynomial in `nvars` variables, terms sorted and combined.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: Vec<Term>) -> Self {
        let mut terms = terms;
        for t in &terms {
            assert_eq!(t.exps.len(), nvars, "term arity mismatch");
        }
        terms.sort_by(|s, t| cmp_monomials(&s.exps, &t.exps));
        let mut combined: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match combined.last_mut() {
                Some(last) if last.exps == t.exps => last.coeff += t.coeff,
                _ => combined.push(t),
            }
        }
        combined.retain(|t| t.coeff != Complex64::ZERO);
        Polynomial { nvars, terms: combined }
    }

    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        Polynomial::new(nvars, vec![Term { coeff: c, exps: vec![0; nvars] }])
    }

    pub fn monomial(nvars: usize, coeff: Complex64, exps: Vec<i32>) -> Self {
        Polynomial::new(nvars, vec![Term { coeff, exps }])
    }

    /// The variable `x_j` as a polynomial.
    pub fn variable(nvars: usize, j: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[j] = 1;
        Polynomial::monomial(nvars, Complex64::ONE, exps)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial with the given exponents (zero if absent).
    pub fn coeff_of(&self, exps: &[i32]) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.exps == exps)
            .map_or(Complex64::ZERO, |t| t.coeff)
    }

    /// Exponent vectors of all terms, as lattice points.
    pub fn support(&self) -> Vec<Vec<i64>> {
        self.terms
            .iter()
            .map(|t| t.exps.iter().map(|&e| e as i64).collect())
            .collect()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<i32> {
        self.terms.iter().map(|t| t.exps.iter().sum()).max()
    }

    /// Largest total degree within one variable block; `None` for zero.
    pub fn degree_in_block(&self, block: std::ops::Range<usize>) -> Option<i32> {
        self.terms
            .iter()
            .map(|t| t.exps[block.clone()].iter().sum())
            .max()
    }

    /// True when every term has the same total degree.
    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some(t0) => {
                let d: i32 = t0.exps.iter().sum();
                self.terms.iter().all(|t| t.exps.iter().sum::<i32>() == d)
            }
        }
    }

    /// The shared per-block degree vector if every term has one; `None`
    /// otherwise. `block_ranges` must partition the variables.
    pub fn multidegree(&self, block_ranges: &[std::ops::Range<usize>]) -> Option<Vec<i32>> {
        let deg_of = |t: &Term| -> Vec<i32> {
            block_ranges
                .iter()
                .map(|r| t.exps[r.clone()].iter().sum())
                .collect()
        };
        let first = self.terms.first()?;
        let d = deg_of(first);
        if self.terms.iter().all(|t| deg_of(t) == d) {
            Some(d)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(-Complex64::ONE)
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial::new(
            self.nvars,
            self.terms
                .iter()
                .map(|t| Term { coeff: t.coeff * s, exps: t.exps.clone() })
                .collect(),
        )
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial::new(self.nvars, terms)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for t in &other.terms {
                let exps = s.exps.iter().zip(&t.exps).map(|(a, b)| a + b).collect();
                terms.push(Term { coeff: s.coeff * t.coeff, exps });
            }
        }
        Polynomial::new(self.nvars, terms)
    }

    /// Multiply by a single monomial without going through `mul`.
    pub fn mul_monomial(&self, coeff: Complex64, exps: &[i32]) -> Polynomial {
        assert_eq!(exps.len(), self.nvars);
        Polynomial::new(
            self.nvars,
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * coeff,
                    exps: t.exps.iter().zip(exps).map(|(a, b)| a + b).collect(),
                })
                .collect(),
        )
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, Complex64::ONE);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Evaluate at a point. Negative exponents are fine away from zero;
    /// hitting a zero coordinate with one is an error.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        assert_eq!(z.len(), self.nvars);
        let mut acc = Complex64::ZERO;
        for t in &self.terms {
            let mut m = t.coeff;
            for (zj, &e) in z.iter().zip(&t.exps) {
                if e == 0 {
                    continue;
                }
                if e < 0 && *zj == Complex64::ZERO {
                    return Err(Error::LaurentAtZero);
                }
                m *= zj.powi(e);
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Sum of |coefficient| * prod |z_j|^e_j over all terms. Used as the
    /// scale factor when turning |f(z)| into a relative residual.
    pub fn abs_eval(&self, z: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut m = t.coeff.norm();
            for (zj, &e) in z.iter().zip(&t.exps) {
                if e != 0 {
                    m *= zj.norm().powi(e);
                }
            }
            acc += m;
        }
        acc
    }

    /// Homogenize to degree `d` with a fresh variable inserted at index 0:
    /// each term `c x^a` becomes `c x0^(d-|a|) x^a`.
    pub fn homogenize(&self, d: i32) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let deg: i32 = t.exps.iter().sum();
                assert!(deg <= d, "term degree exceeds homogenization degree");
                let mut exps = Vec::with_capacity(self.nvars + 1);
                exps.push(d - deg);
                exps.extend_from_slice(&t.exps);
                Term { coeff: t.coeff, exps }
            })
            .collect();
        Polynomial::new(self.nvars + 1, terms)
    }

    /// Substitute 1 for variable `j` and remove it.
    pub fn dehomogenize(&self, j: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut exps = t.exps.clone();
                exps.remove(j);
                Term { coeff: t.coeff, exps }
            })
            .collect();
        Polynomial::new(self.nvars - 1, terms)
    }

    /// Per-block homogenization. `affine_blocks` gives the number of affine
    /// variables in each block; the result has one extra variable per block,
    /// inserted at the front of its block, raising every term to the
    /// per-block degrees `target`.
    pub fn multihomogenize(&self, affine_blocks: &[usize], target: &[i32]) -> Polynomial {
        assert_eq!(affine_blocks.iter().sum::<usize>(), self.nvars);
        assert_eq!(affine_blocks.len(), target.len());
        let new_nvars = self.nvars + affine_blocks.len();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut exps = Vec::with_capacity(new_nvars);
                let mut off = 0;
                for (k, &nk) in affine_blocks.iter().enumerate() {
                    let blk = &t.exps[off..off + nk];
                    let deg: i32 = blk.iter().sum();
                    assert!(deg <= target[k], "block degree exceeds target");
                    exps.push(target[k] - deg);
                    exps.extend_from_slice(blk);
                    off += nk;
                }
                Term { coeff: t.coeff, exps }
            })
            .collect();
        Polynomial::new(new_nvars, terms)
    }

    /// Linear change of variables `x_j -> sum_l t[(j, l)] x_l`. Requires
    /// nonnegative exponents.
    pub fn apply_linear(&self, t: &crate::linalg::CMat) -> Polynomial {
        assert_eq!(t.nrows(), self.nvars);
        assert_eq!(t.ncols(), self.nvars);
        let images: Vec<Polynomial> = (0..self.nvars)
            .map(|j| {
                let terms = (0..self.nvars)
                    .map(|l| {
                        let mut exps = vec![0; self.nvars];
                        exps[l] = 1;
                        Term { coeff: t[(j, l)], exps }
                    })
                    .collect();
                Polynomial::new(self.nvars, terms)
            })
            .collect();
        let mut acc = Polynomial::zero(self.nvars);
        for term in &self.terms {
            let mut m = Polynomial::constant(self.nvars, term.coeff);
            for (j, &e) in term.exps.iter().enumerate() {
                assert!(e >= 0, "change of variables needs nonnegative exponents");
                m = m.mul(&images[j].pow(e as u32));
            }
            acc = acc.add(&m);
        }
        acc
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if t.coeff.im == 0.0 {
                write!(f, "{}", t.coeff.re)?;
            } else {
                write!(f, "({}{:+}i)", t.coeff.re, t.coeff.im)?;
            }
            for (j, &e) in t.exps.iter().enumerate() {
                if e == 1 {
                    write!(f, "*x{j}")?;
                } else if e != 0 {
                    write!(f, "*x{j}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// A square system: as many polynomials as variables.
#[derive(Clone, Debug)]
pub struct PolynomialSystem {
    pub nvars: usize,
    pub polys: Vec<Polynomial>,
}

impl PolynomialSystem {
    pub fn new(polys: Vec<Polynomial>) -> Result<Self> {
        let nvars = polys.first().map_or(0, |p| p.nvars());
        if polys.is_empty() || polys.len() != nvars {
            return Err(Error::NotSquare { polys: polys.len(), expected: nvars });
        }
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != nvars {
                return Err(Error::InvalidInput(format!(
                    "polynomial {i} has {} variables, expected {nvars}",
                    p.nvars()
                )));
            }
            if p.is_zero() {
                return Err(Error::ZeroPolynomial { index: i });
            }
        }
        Ok(PolynomialSystem { nvars, polys })
    }

    /// Validates a projective system: n homogeneous polynomials in the n+1
    /// homogeneous coordinates of projective n-space.
    pub fn homogeneous(polys: Vec<Polynomial>) -> Result<Self> {
        let nvars = polys.first().map_or(0, |p| p.nvars());
        if polys.is_empty() || polys.len() + 1 != nvars {
            return Err(Error::NotSquare {
                polys: polys.len(),
                expected: nvars.saturating_sub(1),
            });
        }
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != nvars {
                return Err(Error::InvalidInput(format!(
                    "polynomial {i} has {} variables, expected {nvars}",
                    p.nvars()
                )));
            }
            if p.is_zero() {
                return Err(Error::ZeroPolynomial { index: i });
            }
            if p.terms.iter().any(|t| t.exps.iter().any(|&e| e < 0)) {
                return Err(Error::NegativeExponent { index: i });
            }
            if !p.is_homogeneous() {
                return Err(Error::NotHomogeneous {
                    index: i,
                    detail: "terms have unequal total degrees".into(),
                });
            }
        }
        Ok(PolynomialSystem { nvars, polys })
    }

    /// Validates a multiprojective system on a product of projective spaces.
    /// `block_sizes[k]` is the number of homogeneous coordinates of factor k
    /// (so at least 2); variables are grouped consecutively by block. A square
    /// system has sum(block_sizes[k] - 1) polynomials, each with a consistent
    /// multidegree across every block.
    pub fn multihomogeneous(block_sizes: &[usize], polys: Vec<Polynomial>) -> Result<Self> {
        if block_sizes.is_empty() || block_sizes.iter().any(|&s| s < 2) {
            return Err(Error::InvalidInput(
                "every block needs at least 2 homogeneous coordinates".into(),
            ));
        }
        let nvars: usize = block_sizes.iter().sum();
        let expected = nvars - block_sizes.len();
        if polys.len() != expected {
            return Err(Error::NotSquare { polys: polys.len(), expected });
        }
        let ranges = block_ranges(block_sizes);
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != nvars {
                return Err(Error::InvalidInput(format!(
                    "polynomial {i} has {} variables, expected {nvars}",
                    p.nvars()
                )));
            }
            if p.is_zero() {
                return Err(Error::ZeroPolynomial { index: i });
            }
            if p.terms.iter().any(|t| t.exps.iter().any(|&e| e < 0)) {
                return Err(Error::NegativeExponent { index: i });
            }
            if p.multidegree(&ranges).is_none() {
                return Err(Error::NotHomogeneous {
                    index: i,
                    detail: "no consistent multidegree across the declared blocks".into(),
                });
            }
        }
        Ok(PolynomialSystem { nvars, polys })
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Total degrees of all members.
    pub fn degrees(&self) -> Vec<i32> {
        self.polys
            .iter()
            .map(|p| p.total_degree().expect("validated nonzero"))
            .collect()
    }

    /// Largest |f_i(z)| over the system, scaled per polynomial by the sum of
    /// |coefficient| * |monomial| at `z`.
    pub fn relative_residual(&self, z: &[Complex64]) -> f64 {
        let mut worst: f64 = 0.0;
        for p in &self.polys {
            let num = match p.evaluate(z) {
                Ok(v) => v.norm(),
                Err(_) => f64::INFINITY,
            };
            let den = p.abs_eval(z);
            let r = if den > 0.0 {
                num / den
            } else if num == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(r);
        }
        worst
    }
}
