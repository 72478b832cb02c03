//! Dense complex matrices in column-major layout and the LAPACK kernels the
//! solver needs: multiplication, SVD, column-pivoted QR, LU solves, Schur
//! decomposition with reordering, and generalized eigenvalues.
//!
//! Matrices are stored column-major so they can be handed to LAPACK without
//! copies. The FFI block declares only the routines actually used; everything
//! links against the system OpenBLAS, which bundles LAPACK.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shorthand constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix, column-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CMat {
            nrows,
            ncols,
            data: vec![Complex64::ZERO; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(nrows, ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from row slices; handy in tests where matrices are written out row by row.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        CMat::from_fn(nrows, ncols, |i, j| rows[i][j])
    }

    /// Build from real row slices.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        CMat::from_fn(nrows, ncols, |i, j| c64(rows[i][j], 0.0))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Column `j` as a contiguous slice.
    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// New matrix made of the listed columns, in the listed order.
    pub fn select_cols(&self, cols: &[usize]) -> CMat {
        let mut out = CMat::zeros(self.nrows, cols.len());
        for (k, &j) in cols.iter().enumerate() {
            let src = self.col(j).to_vec();
            out.data[k * self.nrows..(k + 1) * self.nrows].copy_from_slice(&src);
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        out
    }

    /// `self * other` through zgemm.
    pub fn mul(&self, other: &CMat) -> CMat {
        zgemm_nn(self, other)
    }

    /// `self^H * other` through zgemm.
    pub fn h_mul(&self, other: &CMat) -> CMat {
        zgemm(b'C', b'N', self, other)
    }

    /// `self * other^H` through zgemm.
    pub fn mul_h(&self, other: &CMat) -> CMat {
        zgemm(b'N', b'C', self, other)
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise distance to another matrix.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[j * self.nrows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[j * self.nrows + i]
    }
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.ncols.min(12) {
                let v = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// LAPACK / BLAS routines used by the solver. OpenBLAS bundles both. The
// trailing-length arguments for Fortran character parameters are omitted;
// every routine here only inspects the first byte (via lsame), which is the
// same convention the lapack-sys crate relies on.
#[link(name = "openblas")]
extern "C" {
    fn zgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const Complex64,
        a: *const Complex64,
        lda: *const i32,
        b: *const Complex64,
        ldb: *const i32,
        beta: *const Complex64,
        c: *mut Complex64,
        ldc: *const i32,
    );
    fn zgesvd_(
        jobu: *const u8,
        jobvt: *const u8,
        m: *const i32,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        s: *mut f64,
        u: *mut Complex64,
        ldu: *const i32,
        vt: *mut Complex64,
        ldvt: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgeqp3_(
        m: *const i32,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        jpvt: *mut i32,
        tau: *mut Complex64,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn zgetrf_(
        m: *const i32,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        info: *mut i32,
    );
    fn zgetrs_(
        trans: *const u8,
        n: *const i32,
        nrhs: *const i32,
        a: *const Complex64,
        lda: *const i32,
        ipiv: *const i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn zgees_(
        jobvs: *const u8,
        sort: *const u8,
        select: *const core::ffi::c_void,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        sdim: *mut i32,
        w: *mut Complex64,
        vs: *mut Complex64,
        ldvs: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        bwork: *mut i32,
        info: *mut i32,
    );
    fn ztrexc_(
        compq: *const u8,
        n: *const i32,
        t: *mut Complex64,
        ldt: *const i32,
        q: *mut Complex64,
        ldq: *const i32,
        ifst: *const i32,
        ilst: *const i32,
        info: *mut i32,
    );
    fn zggev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        b: *mut Complex64,
        ldb: *const i32,
        alpha: *mut Complex64,
        beta: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

fn dim_i32(n: usize, what: &str) -> i32 {
    i32::try_from(n).unwrap_or_else(|_| panic!("{what} = {n} exceeds LAPACK's 32-bit index range"))
}

fn zgemm(transa: u8, transb: u8, a: &CMat, b: &CMat) -> CMat {
    let (am, ak) = if transa == b'N' {
        (a.nrows, a.ncols)
    } else {
        (a.ncols, a.nrows)
    };
    let (bk, bn) = if transb == b'N' {
        (b.nrows, b.ncols)
    } else {
        (b.ncols, b.nrows)
    };
    assert_eq!(ak, bk, "zgemm inner dimension mismatch");
    let mut out = CMat::zeros(am, bn);
    if am == 0 || bn == 0 || ak == 0 {
        return out;
    }
    let (m, n, k) = (dim_i32(am, "m"), dim_i32(bn, "n"), dim_i32(ak, "k"));
    let lda = dim_i32(a.nrows.max(1), "lda");
    let ldb = dim_i32(b.nrows.max(1), "ldb");
    let ldc = dim_i32(am.max(1), "ldc");
    let one = Complex64::ONE;
    let zero = Complex64::ZERO;
    unsafe {
        zgemm_(
            &transa, &transb, &m, &n, &k, &one, a.data.as_ptr(), &lda, b.data.as_ptr(), &ldb,
            &zero, out.data.as_mut_ptr(), &ldc,
        );
    }
    out
}

fn zgemm_nn(a: &CMat, b: &CMat) -> CMat {
    zgemm(b'N', b'N', a, b)
}

fn lapack_err(routine: &'static str, info: i32) -> Error {
    Error::Lapack { routine, info }
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    svd_impl(a, false).map(|(s, _)| s)
}

/// Singular values (descending) and the full m-by-m matrix of left singular
/// vectors of `a`.
pub fn svd_left(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let (s, u) = svd_impl(a, true)?;
    Ok((s, u.expect("u requested")))
}

fn svd_impl(a: &CMat, want_u: bool) -> Result<(Vec<f64>, Option<CMat>)> {
    let (m, n) = (a.nrows, a.ncols);
    let mn = m.min(n);
    if mn == 0 {
        return Ok((
            Vec::new(),
            want_u.then(|| {
                let mut u = CMat::identity(m);
                u.ncols = m;
                u
            }),
        ));
    }
    let mut work_a = a.clone();
    let mut s = vec![0.0f64; mn];
    let mut u = if want_u { CMat::zeros(m, m) } else { CMat::zeros(1, 1) };
    let jobu = if want_u { b'A' } else { b'N' };
    let jobvt = b'N';
    let (mi, ni) = (dim_i32(m, "m"), dim_i32(n, "n"));
    let lda = dim_i32(m.max(1), "lda");
    let ldu = dim_i32(if want_u { m.max(1) } else { 1 }, "ldu");
    let ldvt = 1i32;
    let mut rwork = vec![0.0f64; 5 * mn];
    let mut info = 0i32;
    // workspace query
    let mut wk = [Complex64::ZERO];
    let lwork_query = -1i32;
    unsafe {
        zgesvd_(
            &jobu, &jobvt, &mi, &ni, work_a.data.as_mut_ptr(), &lda, s.as_mut_ptr(),
            u.data.as_mut_ptr(), &ldu, std::ptr::null_mut(), &ldvt, wk.as_mut_ptr(), &lwork_query,
            rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgesvd (workspace query)", info));
    }
    let lwork = wk[0].re as i32;
    let mut work = vec![Complex64::ZERO; lwork.max(1) as usize];
    unsafe {
        zgesvd_(
            &jobu, &jobvt, &mi, &ni, work_a.data.as_mut_ptr(), &lda, s.as_mut_ptr(),
            u.data.as_mut_ptr(), &ldu, std::ptr::null_mut(), &ldvt, work.as_mut_ptr(), &lwork,
            rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgesvd", info));
    }
    Ok((s, want_u.then_some(u)))
}

/// Spectral condition number sigma_max / sigma_min; infinity when singular.
pub fn cond2(a: &CMat) -> Result<f64> {
    let s = singular_values(a)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Column-pivoted QR. Returns the pivot order (0-based indices into the
/// columns of `a`, strongest first) and |diag(R)| for rank diagnostics.
pub fn col_piv_qr(a: &CMat) -> Result<(Vec<usize>, Vec<f64>)> {
    let (m, n) = (a.nrows, a.ncols);
    let mn = m.min(n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut work_a = a.clone();
    let mut jpvt = vec![0i32; n];
    let mut tau = vec![Complex64::ZERO; mn.max(1)];
    let (mi, ni) = (dim_i32(m, "m"), dim_i32(n, "n"));
    let lda = dim_i32(m.max(1), "lda");
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let mut wk = [Complex64::ZERO];
    let lwork_query = -1i32;
    unsafe {
        zgeqp3_(
            &mi, &ni, work_a.data.as_mut_ptr(), &lda, jpvt.as_mut_ptr(), tau.as_mut_ptr(),
            wk.as_mut_ptr(), &lwork_query, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgeqp3 (workspace query)", info));
    }
    let lwork = wk[0].re as i32;
    let mut work = vec![Complex64::ZERO; lwork.max(1) as usize];
    unsafe {
        zgeqp3_(
            &mi, &ni, work_a.data.as_mut_ptr(), &lda, jpvt.as_mut_ptr(), tau.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgeqp3", info));
    }
    let pivots: Vec<usize> = jpvt.iter().map(|&p| (p - 1) as usize).collect();
    let rdiag: Vec<f64> = (0..mn).map(|i| work_a[(i, i)].norm()).collect();
    Ok((pivots, rdiag))
}

/// Solve `a * x = b` by LU with partial pivoting. `a` must be square.
pub fn lu_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.nrows;
    assert_eq!(a.ncols, n, "lu_solve needs a square matrix");
    assert_eq!(b.nrows, n, "right-hand side height mismatch");
    if n == 0 {
        return Ok(b.clone());
    }
    let mut lu = a.clone();
    let mut ipiv = vec![0i32; n];
    let ni = dim_i32(n, "n");
    let lda = dim_i32(n.max(1), "lda");
    let mut info = 0i32;
    unsafe {
        zgetrf_(&ni, &ni, lu.data.as_mut_ptr(), &lda, ipiv.as_mut_ptr(), &mut info);
    }
    if info != 0 {
        return Err(lapack_err("zgetrf", info));
    }
    let mut x = b.clone();
    let nrhs = dim_i32(b.ncols, "nrhs");
    let trans = b'N';
    let ldb = dim_i32(n.max(1), "ldb");
    unsafe {
        zgetrs_(
            &trans, &ni, &nrhs, lu.data.as_ptr(), &lda, ipiv.as_ptr(), x.data.as_mut_ptr(), &ldb,
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgetrs", info));
    }
    Ok(x)
}

/// Complex Schur decomposition `a = z t z^H` with `z` unitary and `t` upper
/// triangular. Returns `(z, t)`.
pub fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows;
    assert_eq!(a.ncols, n, "schur needs a square matrix");
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let mut t = a.clone();
    let mut z = CMat::zeros(n, n);
    let mut w = vec![Complex64::ZERO; n];
    let jobvs = b'V';
    let sort = b'N';
    let ni = dim_i32(n, "n");
    let lda = dim_i32(n, "lda");
    let ldvs = dim_i32(n, "ldvs");
    let mut sdim = 0i32;
    let mut rwork = vec![0.0f64; n];
    let mut bwork = vec![0i32; n];
    let mut info = 0i32;
    let mut wk = [Complex64::ZERO];
    let lwork_query = -1i32;
    unsafe {
        zgees_(
            &jobvs, &sort, std::ptr::null(), &ni, t.data.as_mut_ptr(), &lda, &mut sdim,
            w.as_mut_ptr(), z.data.as_mut_ptr(), &ldvs, wk.as_mut_ptr(), &lwork_query,
            rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgees (workspace query)", info));
    }
    let lwork = wk[0].re as i32;
    let mut work = vec![Complex64::ZERO; lwork.max(1) as usize];
    unsafe {
        zgees_(
            &jobvs, &sort, std::ptr::null(), &ni, t.data.as_mut_ptr(), &lda, &mut sdim,
            w.as_mut_ptr(), z.data.as_mut_ptr(), &ldvs, work.as_mut_ptr(), &lwork,
            rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zgees", info));
    }
    Ok((z, t))
}

/// Move diagonal entry `from` of the upper-triangular `t` to position `to`
/// by a unitary similarity, accumulating the transformation into `q`
/// (so `a = q t q^H` stays true). Indices are 0-based.
pub fn schur_move(t: &mut CMat, q: &mut CMat, from: usize, to: usize) -> Result<()> {
    let n = t.nrows;
    assert_eq!(t.ncols, n);
    assert_eq!((q.nrows, q.ncols), (n, n));
    if from == to {
        return Ok(());
    }
    let compq = b'V';
    let ni = dim_i32(n, "n");
    let ldt = dim_i32(n, "ldt");
    let ldq = dim_i32(n, "ldq");
    let ifst = dim_i32(from + 1, "ifst");
    let ilst = dim_i32(to + 1, "ilst");
    let mut info = 0i32;
    unsafe {
        ztrexc_(
            &compq, &ni, t.data.as_mut_ptr(), &ldt, q.data.as_mut_ptr(), &ldq, &ifst, &ilst,
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("ztrexc", info));
    }
    Ok(())
}

/// Generalized eigenvalues of the pencil `a - lambda b` as (alpha, beta)
/// ratio pairs: lambda_j = alpha_j / beta_j, with beta_j = 0 marking an
/// infinite eigenvalue.
pub fn generalized_eigenvalues(a: &CMat, b: &CMat) -> Result<Vec<(Complex64, Complex64)>> {
    let n = a.nrows;
    assert_eq!(a.ncols, n);
    assert_eq!((b.nrows, b.ncols), (n, n));
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut aa = a.clone();
    let mut bb = b.clone();
    let mut alpha = vec![Complex64::ZERO; n];
    let mut beta = vec![Complex64::ZERO; n];
    let jobvl = b'N';
    let jobvr = b'N';
    let ni = dim_i32(n, "n");
    let lda = dim_i32(n, "lda");
    let ldb = dim_i32(n, "ldb");
    let ldv = 1i32;
    let mut rwork = vec![0.0f64; 8 * n];
    let mut info = 0i32;
    let mut wk = [Complex64::ZERO];
    let lwork_query = -1i32;
    unsafe {
        zggev_(
            &jobvl, &jobvr, &ni, aa.data.as_mut_ptr(), &lda, bb.data.as_mut_ptr(), &ldb,
            alpha.as_mut_ptr(), beta.as_mut_ptr(), std::ptr::null_mut(), &ldv,
            std::ptr::null_mut(), &ldv, wk.as_mut_ptr(), &lwork_query, rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zggev (workspace query)", info));
    }
    let lwork = wk[0].re as i32;
    let mut work = vec![Complex64::ZERO; lwork.max(1) as usize];
    unsafe {
        zggev_(
            &jobvl, &jobvr, &ni, aa.data.as_mut_ptr(), &lda, bb.data.as_mut_ptr(), &ldb,
            alpha.as_mut_ptr(), beta.as_mut_ptr(), std::ptr::null_mut(), &ldv,
            std::ptr::null_mut(), &ldv, work.as_mut_ptr(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(lapack_err("zggev", info));
    }
    Ok(alpha.into_iter().zip(beta).collect())
}

/// Draws one standard normal deviate via the Box-Muller transform.
pub fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    // 1 - u lies in (0, 1], keeping the logarithm finite.
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Draws a complex number with independent standard normal real and
/// imaginary parts.
pub fn complex_normal<R: rand::Rng>(rng: &mut R) -> Complex64 {
    c64(standard_normal(rng), standard_normal(rng))
}

/// Draws a complex number of modulus one with uniformly random phase.
pub fn unit_complex<R: rand::Rng>(rng: &mut R) -> Complex64 {
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    c64(theta.cos(), theta.sin())
}
