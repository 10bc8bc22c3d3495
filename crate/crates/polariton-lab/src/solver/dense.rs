//! Dense Hermitian eigendecomposition via LAPACK.
//!
//! This is the brute-force oracle that backs every derived fixture: full
//! spectra through the divide-and-conquer drivers (`dsyevd` for real
//! symmetric matrices, `zheevd` for complex Hermitian ones). Refuses
//! dimensions above the dense limit; iterative solves handle those.

// Link the system OpenBLAS (which carries LAPACK) into the binary.
extern crate openblas_src;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::OperatorMatrix;
use crate::solver::{SolveMethod, SpectrumResult};

/// Default refusal threshold of [`dense_solve`].
pub const DENSE_LIMIT_DEFAULT: usize = 4096;

/// Full spectrum with eigenvectors; ascending eigenvalues.
pub fn dense_solve(h: &OperatorMatrix) -> Result<SpectrumResult> {
    dense_solve_with_limit(h, DENSE_LIMIT_DEFAULT)
}

pub fn dense_solve_with_limit(h: &OperatorMatrix, limit: usize) -> Result<SpectrumResult> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    if n > limit {
        return Err(Error::DenseLimit { dim: n, limit });
    }

    let (eigenvalues, eigenvectors) = if let Some(real) = h.to_dense_real() {
        let (w, v) = eigh_real(real)?;
        (w, v.mapv(|x| C64::new(x, 0.0)))
    } else {
        eigh_complex(h.to_dense())?
    };

    // residuals ‖Hv − λv‖ per pair, computed against the sparse operator
    let mut residuals = Vec::with_capacity(n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let v = eigenvectors.column(k).to_owned();
        let mut hv = h.matvec(v.view());
        hv.iter_mut()
            .zip(v.iter())
            .for_each(|(a, b)| *a -= C64::new(lambda, 0.0) * b);
        residuals.push(hv.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt());
    }

    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
        residuals,
        method: SolveMethod::Dense,
    })
}

/// Eigendecomposition of a dense real symmetric matrix (ascending).
pub fn eigh_real(mut a: Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let slice = a
        .as_slice_mut()
        .expect("dense matrix must be contiguous");

    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let (mut work, mut iwork) = (vec![0.0f64; 1], vec![0i32; 1]);
    unsafe {
        lapack::dsyevd(
            b'V', b'L', n as i32, slice, n as i32, &mut w, &mut work, -1, &mut iwork, -1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    let lwork = work[0] as i32;
    let liwork = iwork[0];
    work.resize(lwork as usize, 0.0);
    iwork.resize(liwork as usize, 0);
    unsafe {
        lapack::dsyevd(
            b'V', b'L', n as i32, slice, n as i32, &mut w, &mut work, lwork, &mut iwork, liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    // LAPACK works column-major; row-major storage means we handed it Aᵀ = A
    // (symmetric), and its output columns are our rows.
    Ok((w, transposed(a)))
}

/// Eigendecomposition of a dense complex Hermitian matrix (ascending).
pub fn eigh_complex(a: Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    // Hand LAPACK the transpose so the column-major view sees our matrix.
    let mut at = Array2::from_shape_fn((n, n), |(i, j)| a[(j, i)]);
    let slice = at
        .as_slice_mut()
        .expect("dense matrix must be contiguous");

    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let (mut work, mut rwork, mut iwork) =
        (vec![C64::new(0.0, 0.0); 1], vec![0.0f64; 1], vec![0i32; 1]);
    unsafe {
        lapack::zheevd(
            b'V', b'L', n as i32, slice, n as i32, &mut w, &mut work, -1, &mut rwork, -1,
            &mut iwork, -1, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheevd", info });
    }
    let lwork = work[0].re as i32;
    let lrwork = rwork[0] as i32;
    let liwork = iwork[0];
    work.resize(lwork as usize, C64::new(0.0, 0.0));
    rwork.resize(lrwork as usize, 0.0);
    iwork.resize(liwork as usize, 0);
    unsafe {
        lapack::zheevd(
            b'V', b'L', n as i32, slice, n as i32, &mut w, &mut work, lwork, &mut rwork, lrwork,
            &mut iwork, liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheevd", info });
    }
    Ok((w, transposed(at)))
}

/// Eigenvalues and eigenvectors of a real symmetric tridiagonal matrix
/// (Lanczos inner solve).
pub fn eigh_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = diag.len();
    assert_eq!(offdiag.len() + 1, n);
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = vec![0.0f64; n * n];
    let mut work = vec![0.0f64; (2 * n).max(1)];
    let mut info = 0i32;
    unsafe {
        lapack::dstev(b'V', n as i32, &mut d, &mut e, &mut z, n as i32, &mut work, &mut info);
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dstev", info });
    }
    // z is column-major n×n: z[i + j n] is component i of eigenvector j
    let vecs = Array2::from_shape_fn((n, n), |(i, j)| z[i + j * n]);
    Ok((d, vecs))
}

fn transposed<T: Copy>(a: Array2<T>) -> Array2<T> {
    let (r, c) = (a.nrows(), a.ncols());
    Array2::from_shape_fn((c, r), |(i, j)| a[(j, i)])
}

/// Orthonormality defect max |V†V − I| of an eigenvector set.
pub fn orthonormality_defect(vecs: &Array2<C64>) -> f64 {
    let k = vecs.ncols();
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in a..k {
            let dot: C64 = vecs
                .column(a)
                .iter()
                .zip(vecs.column(b).iter())
                .map(|(x, y)| x.conj() * y)
                .sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Unit-norm ground-state helper used all over the tests and examples.
pub fn ground_state(spec: &SpectrumResult) -> Result<Array1<C64>> {
    spec.eigenvector(0)
        .ok_or_else(|| Error::InvalidArgument("spectrum carries no eigenvectors".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::OperatorBuilder;

    #[test]
    fn one_by_one_matrix() {
        let h = OperatorMatrix::from_diagonal(&[3.25], "c");
        let spec = dense_solve(&h).unwrap();
        assert_eq!(spec.eigenvalues, vec![3.25]);
        assert!(spec.residuals[0] < 1e-14);
    }

    #[test]
    fn eigenvalue_sum_equals_trace_on_random_hermitian() {
        // deterministic "random" 8×8 Hermitian matrix
        let n = 8;
        let mut b = OperatorBuilder::new(n);
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            b.add_real(i, i, next());
            for j in i + 1..n {
                let v = C64::new(next(), next());
                b.add(i, j, v);
                b.add(j, i, v.conj());
            }
        }
        let h = b.finalize("random Hermitian").unwrap();
        let spec = dense_solve(&h).unwrap();
        let sum: f64 = spec.eigenvalues.iter().sum();
        assert!((sum - h.trace()).abs() < 1e-12, "sum {sum}, trace {}", h.trace());
        let vecs = spec.eigenvectors.as_ref().unwrap();
        assert!(orthonormality_defect(vecs) < 1e-12);
        assert!(spec.residuals.iter().all(|r| *r < 1e-12));
        // ascending
        for w in spec.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn refuses_above_limit() {
        let h = OperatorMatrix::identity(10);
        match dense_solve_with_limit(&h, 5) {
            Err(Error::DenseLimit { dim: 10, limit: 5 }) => {}
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let diag = [1.0, 2.0, 3.0, 4.0];
        let off = [0.5, 0.5, 0.5];
        let (w, _) = eigh_tridiagonal(&diag, &off).unwrap();
        let mut b = OperatorBuilder::new(4);
        for i in 0..4 {
            b.add_real(i, i, diag[i]);
        }
        for i in 0..3 {
            b.add_real(i, i + 1, off[i]);
            b.add_real(i + 1, i, off[i]);
        }
        let spec = dense_solve(&b.finalize("tri").unwrap()).unwrap();
        for (a, b) in w.iter().zip(spec.eigenvalues.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
