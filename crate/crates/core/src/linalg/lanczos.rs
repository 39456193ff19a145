use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::state::{axpy_sub, inner, norm};
use super::{tridiag, DenseMatrix, EigenSettings, Eigenpairs, LinalgError, SparseHermitian, StateVector, C64};

/// Hermitian operator available only through matrix-vector products.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// Overwrites `y` with `A x`.
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

impl LinearOperator for SparseHermitian {
    fn dim(&self) -> usize {
        SparseHermitian::dim(self)
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.apply_add(x, y);
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.apply_into(x, y);
    }
}

/// The `k` lowest eigenpairs by Lanczos with full reorthogonalisation.
///
/// Pairs are found one at a time; each run works in the orthogonal complement of the
/// pairs already locked, so degenerate clusters are resolved vector by vector. A final
/// Rayleigh-Ritz step on the locked vectors cleans up near-degenerate mixing.
pub fn lanczos_lowest(op: &impl LinearOperator, k: usize, settings: &EigenSettings) -> Result<Eigenpairs, LinalgError> {
    let n = op.dim();
    if k > n {
        return Err(LinalgError::TooManyEigenpairs { requested: k, dim: n });
    }
    let mut locked: Vec<Vec<C64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for idx in 0..k {
        let (val, vec) = lowest_in_complement(op, &locked, settings.lanczos_seed.wrapping_add(idx as u64), settings)?;
        values.push(val);
        locked.push(vec);
    }
    if k > 1 {
        let (vals, vecs) = rayleigh_ritz(op, &locked, settings)?;
        values = vals;
        locked = vecs;
    }
    Ok(Eigenpairs { values, vectors: locked.into_iter().map(StateVector::new).collect() })
}

fn orthogonalize(w: &mut [C64], against: &[Vec<C64>]) {
    for _ in 0..2 {
        for v in against {
            let ov = inner(v, w);
            axpy_sub(w, ov, v);
        }
    }
}

fn lowest_in_complement(
    op: &impl LinearOperator,
    locked: &[Vec<C64>],
    seed: u64,
    settings: &EigenSettings,
) -> Result<(f64, Vec<C64>), LinalgError> {
    let n = op.dim();
    let available = n - locked.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    orthogonalize(&mut v, locked);
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(LinalgError::NoConvergence { iterations: 0, residual: f64::INFINITY });
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<C64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;
    let mut w = vec![C64::new(0.0, 0.0); n];
    let cap = settings.lanczos_max_iter.min(available);
    let mut best_residual = f64::INFINITY;

    for it in 0..cap {
        op.apply(&basis[it], &mut w);
        orthogonalize(&mut w, locked);
        let alpha = inner(&basis[it], &w).re;
        alphas.push(alpha);
        orthogonalize(&mut w, &basis);
        let beta = norm(&w);
        scale = scale.max(alpha.abs()).max(beta);
        let last = it + 1 == cap;
        let breakdown = beta <= 1e-12 * scale.max(1.0);
        if breakdown || last || it % 8 == 7 {
            let ritz = tridiag::eigenvalues(&alphas, &betas);
            let theta = ritz[0];
            scale = scale.max(ritz.iter().fold(0.0f64, |a, r| a.max(r.abs())));
            let y = tridiag::eigenvector(&alphas, &betas, theta);
            let estimate = beta * y[y.len() - 1].abs();
            let tight = 1e-10 * scale.max(1.0);
            if breakdown || estimate <= tight || last {
                let x = combine(&basis, &y);
                let residual = true_residual(op, locked, &x, theta);
                best_residual = best_residual.min(residual);
                let accept = settings.lanczos_residual_tol * scale.max(1.0);
                if residual <= tight || ((breakdown || last) && residual <= accept) {
                    return Ok((theta, x));
                }
                if breakdown || last {
                    break;
                }
            }
        }
        if breakdown {
            break;
        }
        betas.push(beta);
        w.iter_mut().for_each(|x| *x /= beta);
        basis.push(std::mem::replace(&mut w, vec![C64::new(0.0, 0.0); n]));
    }
    Err(LinalgError::NoConvergence { iterations: alphas.len(), residual: best_residual })
}

fn combine(basis: &[Vec<C64>], y: &[f64]) -> Vec<C64> {
    let n = basis[0].len();
    let mut x = vec![C64::new(0.0, 0.0); n];
    for (b, &c) in basis.iter().zip(y) {
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi += bi * c;
        }
    }
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    x
}

fn true_residual(op: &impl LinearOperator, locked: &[Vec<C64>], x: &[C64], theta: f64) -> f64 {
    let mut hx = vec![C64::new(0.0, 0.0); x.len()];
    op.apply(x, &mut hx);
    orthogonalize(&mut hx, locked);
    axpy_sub(&mut hx, C64::new(theta, 0.0), x);
    norm(&hx)
}

fn rayleigh_ritz(
    op: &impl LinearOperator,
    vectors: &[Vec<C64>],
    settings: &EigenSettings,
) -> Result<(Vec<f64>, Vec<Vec<C64>>), LinalgError> {
    let k = vectors.len();
    let n = op.dim();
    let mut images = Vec::with_capacity(k);
    for v in vectors {
        let mut hv = vec![C64::new(0.0, 0.0); n];
        op.apply(v, &mut hv);
        images.push(hv);
    }
    let small = DenseMatrix::from_fn(k, k, |r, c| inner(&vectors[r], &images[c]));
    let sym = DenseMatrix::from_fn(k, k, |r, c| (small[(r, c)] + small[(c, r)].conj()) * 0.5);
    let local = super::hermitian_eig(&sym, settings)?;
    let rotated = local
        .vectors
        .iter()
        .map(|y| {
            let mut x = vec![C64::new(0.0, 0.0); n];
            for (v, &c) in vectors.iter().zip(y.amplitudes()) {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += vi * c;
                }
            }
            x
        })
        .collect();
    Ok((local.values, rotated))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator_with_degenerate_ground() {
        let h = SparseHermitian::from_entries(
            50,
            (0..50).map(|i| (i, i, C64::new(if i < 3 { -1.0 } else { i as f64 }, 0.0))),
        )
        .unwrap();
        let e = lanczos_lowest(&h, 4, &EigenSettings::default()).unwrap();
        for v in &e.values[..3] {
            assert!((v + 1.0).abs() < 1e-9);
        }
        assert!((e.values[3] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn too_many_pairs_is_an_error() {
        let h = SparseHermitian::zeros(2);
        assert!(lanczos_lowest(&h, 3, &EigenSettings::default()).is_err());
    }

    #[test]
    fn iteration_cap_surfaces_as_error() {
        // A long chain needs many iterations; a cap of 3 cannot resolve it.
        let n = 200;
        let h = SparseHermitian::from_entries(n, (0..n - 1).map(|i| (i, i + 1, C64::new(1.0, 0.0)))).unwrap();
        let settings = EigenSettings { lanczos_max_iter: 3, ..EigenSettings::default() };
        assert!(matches!(lanczos_lowest(&h, 1, &settings), Err(LinalgError::NoConvergence { .. })));
    }
}
