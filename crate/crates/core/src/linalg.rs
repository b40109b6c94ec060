//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{IsacError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const LN_2: f64 = std::f64::consts::LN_2;

/// Circularly symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, var: f64) -> CVec {
    CVec::from_fn(len, |_, _| complex_gaussian(rng, var))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn real_trace(m: &CMat) -> f64 {
    m.trace().re
}

/// `Re(x^H M x)`.
pub fn quad_form(x: &CVec, m: &CMat) -> f64 {
    x.dotc(&(m * x)).re
}

// Complex Cholesky takes square roots of negative pivots silently, so check the factor.
fn cholesky(m: &CMat, what: &str) -> Result<nalgebra::Cholesky<Complex64, nalgebra::Dyn>> {
    let singular = || IsacError::Singular(format!("{}x{} {what}", m.nrows(), m.ncols()));
    let chol = m.clone().cholesky().ok_or_else(singular)?;
    let valid = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-9 * d.re);
    if valid {
        Ok(chol)
    } else {
        Err(singular())
    }
}

/// Natural-log determinant of a Hermitian positive definite matrix.
pub fn ln_det_hpd(m: &CMat) -> Result<f64> {
    let chol = cholesky(m, "logdet")?;
    Ok(chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|d| 2.0 * d.re.ln())
        .sum())
}

pub fn log2_det_hpd(m: &CMat) -> Result<f64> {
    Ok(ln_det_hpd(m)? / LN_2)
}

pub fn inverse_hpd(m: &CMat) -> Result<CMat> {
    let chol = cholesky(m, "inverse")?;
    Ok(hermitian_part(&chol.inverse()))
}

/// Eigenvalues of a Hermitian matrix, descending, with matching eigenvectors.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, Vec<CVec>) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Clip negative eigenvalues to zero.
pub fn project_psd(m: &CMat) -> CMat {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (lambda, v) in values.iter().zip(&vectors) {
        if *lambda > 0.0 {
            out += (v * v.adjoint()).scale(*lambda);
        }
    }
    hermitian_part(&out)
}

/// Square diagonal block `index` of size `size`.
pub fn diag_block(m: &CMat, index: usize, size: usize) -> CMat {
    m.view((index * size, index * size), (size, size)).into_owned()
}

/// Rows `index*size .. (index+1)*size`.
pub fn row_block(m: &CMat, index: usize, size: usize) -> CMat {
    m.rows(index * size, size).into_owned()
}

pub fn outer(x: &CVec) -> CMat {
    x * x.adjoint()
}

/// Lower Cholesky factor of a Hermitian PSD matrix, tolerating semidefiniteness.
pub fn psd_sqrt_factor(m: &CMat) -> CMat {
    if let Some(chol) = m.clone().cholesky() {
        return chol.unpack();
    }
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (j, (lambda, v)) in values.iter().zip(&vectors).enumerate() {
        let s = lambda.max(0.0).sqrt();
        out.set_column(j, &v.scale(s));
    }
    out
}
