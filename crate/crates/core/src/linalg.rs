//! SVD with a fixed ordering and sign convention, backed by faer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Singular value decomposition `m = u * diag(sigma) * vt` with singular
/// values sorted in descending order. Each left singular vector is flipped so
/// that its largest-magnitude entry (first one on ties) is positive; the
/// matching right singular vector is flipped with it.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub vt: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailed("matrix has non-finite entries".into()));
    }
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd {
            u: DMatrix::zeros(r, 0),
            sigma: DVector::zeros(0),
            vt: DMatrix::zeros(0, c),
        });
    }
    let fm = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]);
    let raw = fm.thin_svd().map_err(|e| Error::SvdFailed(format!("{e:?}")))?;
    let (u, s, v) = (raw.U(), raw.S().column_vector(), raw.V());

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));

    let mut su = DMatrix::zeros(r, k);
    let mut svt = DMatrix::zeros(k, c);
    let mut ssig = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        for i in 0..r {
            if u[(i, src)].abs() > u[(pivot, src)].abs() {
                pivot = i;
            }
        }
        let sign = if u[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..r {
            su[(i, dst)] = u[(i, src)] * sign;
        }
        for j in 0..c {
            svt[(dst, j)] = v[(j, src)] * sign;
        }
        ssig[dst] = s[src];
    }
    Ok(Svd {
        u: su,
        sigma: ssig,
        vt: svt,
    })
}

/// Best rank-1 approximation in Frobenius norm, `σ₁ u₁ v₁ᵀ`.
pub fn rank1(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.is_empty() || m.iter().all(|&x| x == 0.0) {
        return Ok(DMatrix::zeros(m.nrows(), m.ncols()));
    }
    let d = svd(m)?;
    Ok(d.u.column(0) * d.vt.row(0) * d.sigma[0])
}

/// Moore-Penrose pseudo-inverse; singular values at or below
/// `rcond * σ_max` are treated as zero.
pub fn pinv(m: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>> {
    let d = svd(m)?;
    let cutoff = d.sigma.iter().cloned().fold(0.0, f64::max) * rcond;
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in d.sigma.iter().enumerate() {
        if s > cutoff {
            out += d.vt.row(k).transpose() * d.u.column(k).transpose() / s;
        }
    }
    Ok(out)
}

pub fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_sign_fixed() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, -3.0, 0.0, 0.0]);
        let d = svd(&m).unwrap();
        assert_eq!(d.sigma.as_slice(), &[3.0, 1.0]);
        for j in 0..2 {
            let col = d.u.column(j);
            let max = col
                .iter()
                .cloned()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(max > 0.0);
        }
        let back = &d.u * DMatrix::from_diagonal(&d.sigma) * &d.vt;
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn rank1_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let r = rank1(&m).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert!((r - want).norm() < 1e-12);
        assert_eq!(rank1(&DMatrix::zeros(3, 3)).unwrap(), DMatrix::<f64>::zeros(3, 3));
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let p = pinv(&m, 1e-12).unwrap();
        assert!((&m * &p * &m - &m).norm() < 1e-12);
        assert!((&p * &m * &p - &p).norm() < 1e-12);
    }

    #[test]
    fn outer_products_reconstruct() {
        // nalgebra 0.35's SVD returned a wrong factorization for this outer
        // product; keep it as a regression case.
        let a = [0.3, -1.2, 0.8, 2.1, -0.4, 0.05, 1.7];
        let b = [-0.9, 0.2, 1.1, -0.6, 0.0, 0.75, -1.3];
        for n in 2..=a.len() {
            let m = DMatrix::from_fn(n, n, |i, j| a[i] * b[j]);
            let d = svd(&m).unwrap();
            let back = &d.u * DMatrix::from_diagonal(&d.sigma) * &d.vt;
            assert!((back - &m).norm() <= 1e-12 * m.norm());
            assert!((d.sigma[0] - m.norm()).abs() <= 1e-12 * m.norm());
        }
    }
}
