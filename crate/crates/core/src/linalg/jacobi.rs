use super::{DenseMatrix, EigenSettings, Eigenpairs, LinalgError, StateVector, C64};

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Eigenvalues are ascending; eigenvector `k` pairs with value `k`.
pub fn hermitian_eig(h: &DenseMatrix, settings: &EigenSettings) -> Result<Eigenpairs, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let n = h.rows();
    if n > settings.dense_max {
        return Err(LinalgError::CapacityExceeded { dim: n, limit: settings.dense_max });
    }
    let asym = h.max_asymmetry();
    if asym > settings.hermitian_tol {
        return Err(LinalgError::NotHermitian { max_asymmetry: asym });
    }
    let mut a = h.clone();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = DenseMatrix::identity(n);
    let norm_f = a.frobenius_norm();
    let target = settings.jacobi_rel_tol * norm_f;

    for sweep in 0..settings.jacobi_max_sweeps {
        if off_diagonal_mass(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a[(p, q)];
                let mag = z.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if sweep > 3 && mag * 1e18 < app.abs().min(aqq.abs()) {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                rotate(&mut a, &mut v, p, q, z, app, aqq);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = order.iter().map(|&i| StateVector::new(v.column(i))).collect();
    Ok(Eigenpairs { values, vectors })
}

fn off_diagonal_mass(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for r in 0..n {
        for (c, v) in a.row(r).iter().enumerate() {
            if c != r {
                s += v.norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Applies `A <- G^dagger A G`, `V <- V G` with G zeroing `A[p][q]`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, z: C64, app: f64, aqq: f64) {
    let n = a.rows();
    let mag = z.norm();
    let phase = z / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + theta.hypot(1.0)) };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * mag, 0.0);
    a[(q, q)] = C64::new(aqq + t * mag, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_by_two_with_complex_coupling() {
        // [[1, 1+i], [1-i, 2]] has eigenvalues (3 +- 3) / 2.
        let h = DenseMatrix::from_rows(vec![vec![c(1.0, 0.0), c(1.0, 1.0)], vec![c(1.0, -1.0), c(2.0, 0.0)]]).unwrap();
        let e = hermitian_eig(&h, &EigenSettings::default()).unwrap();
        assert!((e.values[0] - 0.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_with_asymmetry() {
        let h = DenseMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.5, 0.0), c(0.0, 0.0)]]).unwrap();
        match hermitian_eig(&h, &EigenSettings::default()) {
            Err(LinalgError::NotHermitian { max_asymmetry }) => assert!((max_asymmetry - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn one_by_one_and_zero_matrix() {
        let e = hermitian_eig(&DenseMatrix::from_real_diagonal(&[4.5]), &EigenSettings::default()).unwrap();
        assert_eq!(e.values, vec![4.5]);
        let z = hermitian_eig(&DenseMatrix::zeros(3, 3), &EigenSettings::default()).unwrap();
        assert_eq!(z.values, vec![0.0; 3]);
    }

    #[test]
    fn respects_dense_limit() {
        let settings = EigenSettings { dense_max: 2, ..EigenSettings::default() };
        assert!(matches!(
            hermitian_eig(&DenseMatrix::identity(3), &settings),
            Err(LinalgError::CapacityExceeded { dim: 3, limit: 2 })
        ));
    }
}
