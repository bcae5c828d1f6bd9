//! Thin wrappers over LAPACK/CBLAS for the dense kernels of this crate:
//! symmetric eigendecomposition (`dsyevd`) and Gram products (`dsyrk`,
//! `dgemm`). Everything works on row-major `ndarray` arrays; symmetric
//! inputs make the row/column-major distinction vanish where it matters.

use ndarray::{Array2, ArrayView2};

use crate::{Error, Result};

extern "C" {
    fn openblas_set_num_threads(num_threads: std::os::raw::c_int);
}

pub(crate) fn set_blas_threads(n: usize) {
    let n = n.clamp(1, i32::MAX as usize) as std::os::raw::c_int;
    unsafe { openblas_set_num_threads(n) };
}

/// Copy a square view into a contiguous buffer LAPACK can overwrite.
fn square_buffer(a: &ArrayView2<'_, f64>) -> (usize, Vec<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let mut buf = Vec::with_capacity(n * n);
    buf.extend(a.iter().copied());
    (n, buf)
}

fn syevd(jobz: u8, n: usize, a: &mut [f64], w: &mut [f64]) -> Result<()> {
    let nn = n as i32;
    let mut info = 0i32;
    let (mut lwork, mut liwork) = (-1i32, -1i32);
    let (mut wkopt, mut iwkopt) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::dsyevd_(
            &(jobz as i8),
            &(b'L' as i8),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            &mut wkopt,
            &lwork,
            &mut iwkopt,
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolverFailure { info });
    }
    lwork = wkopt as i32;
    liwork = iwkopt;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &(jobz as i8),
            &(b'L' as i8),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigensolverFailure { info });
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub(crate) fn symmetric_eigenvalues_desc(a: &ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let (n, mut buf) = square_buffer(a);
    let mut w = vec![0.0f64; n];
    syevd(b'N', n, &mut buf, &mut w)?;
    w.reverse(); // LAPACK returns ascending
    Ok(w)
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues sorted descending and the matching eigenvectors as
/// the columns of the second component.
pub(crate) fn symmetric_eigen_desc(a: &ArrayView2<'_, f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (n, mut buf) = square_buffer(a);
    let mut w = vec![0.0f64; n];
    syevd(b'V', n, &mut buf, &mut w)?;
    // buf now holds eigenvectors column-major in ascending eigenvalue order.
    let mut vectors = Array2::<f64>::zeros((n, n));
    for asc in 0..n {
        let desc = n - 1 - asc;
        for i in 0..n {
            vectors[[i, desc]] = buf[asc * n + i];
        }
    }
    w.reverse();
    Ok((w, vectors))
}

/// AᵀA of a row-major matrix via `dsyrk`, mirrored to a full symmetric array.
pub(crate) fn ata(a: &ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, k) = (a.ncols(), a.nrows());
    let a = to_standard(a);
    let mut c = Array2::<f64>::zeros((n, n));
    unsafe {
        cblas_sys::cblas_dsyrk(
            cblas_sys::CBLAS_LAYOUT::CblasRowMajor,
            cblas_sys::CBLAS_UPLO::CblasUpper,
            cblas_sys::CBLAS_TRANSPOSE::CblasTrans,
            n as i32,
            k as i32,
            1.0,
            a.as_ptr(),
            n as i32,
            0.0,
            c.as_mut_ptr(),
            n as i32,
        );
    }
    for i in 1..n {
        for j in 0..i {
            c[[i, j]] = c[[j, i]];
        }
    }
    c
}

/// A·B via `dgemm` on row-major matrices.
pub(crate) fn matmul(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>) -> Array2<f64> {
    let (m, k) = (a.nrows(), a.ncols());
    let n = b.ncols();
    debug_assert_eq!(k, b.nrows());
    let a = to_standard(a);
    let b = to_standard(b);
    let mut c = Array2::<f64>::zeros((m, n));
    unsafe {
        cblas_sys::cblas_dgemm(
            cblas_sys::CBLAS_LAYOUT::CblasRowMajor,
            cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
            cblas_sys::CBLAS_TRANSPOSE::CblasNoTrans,
            m as i32,
            n as i32,
            k as i32,
            1.0,
            a.as_ptr(),
            k as i32,
            b.as_ptr(),
            n as i32,
            0.0,
            c.as_mut_ptr(),
            n as i32,
        );
    }
    c
}

fn to_standard<'a>(a: &'a ArrayView2<'a, f64>) -> std::borrow::Cow<'a, [f64]> {
    match a.as_slice() {
        Some(s) => std::borrow::Cow::Borrowed(s),
        None => std::borrow::Cow::Owned(a.iter().copied().collect()),
    }
}

/// Sum with a fixed pairwise reduction order, independent of thread count.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}
