//! Small dense kernels used by the solver: dot products, Gram matrices and a
//! blocked Cholesky factorization.
//!
//! Parallel sections only ever write disjoint output tiles and all floating
//! point reductions happen in a fixed sequential order, so results are
//! bit-reproducible for a given input regardless of thread count.

use rayon::prelude::*;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// C (m x n, row-major) = alpha * A (m x k) * B^T (n x k, i.e. B row-major n x k) + beta * C
fn dgemm_abt(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    b: &[f64],
    beta: f64,
    c: &mut [f64],
    ldc: usize,
) {
    debug_assert!(a.len() >= m * k && b.len() >= n * k);
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            1,
            k as isize, // B^T: element (kk, j) = b[j * k + kk]
            beta,
            c.as_mut_ptr(),
            ldc as isize,
            1,
        );
    }
}

/// Gram matrix G = R R^T for row-major R (n x p), returned row-major n x n.
///
/// Tiled over row blocks; tiles are computed in parallel and written to
/// disjoint regions.
pub(crate) fn gram(rows: &[f64], n: usize, p: usize) -> Vec<f64> {
    const TILE: usize = 256;
    let mut g = vec![0.0; n * n];
    let nblocks = n.div_ceil(TILE);
    let mut pairs = Vec::new();
    for bi in 0..nblocks {
        for bj in 0..=bi {
            pairs.push((bi, bj));
        }
    }
    let tiles: Vec<((usize, usize), Vec<f64>)> = pairs
        .into_par_iter()
        .map(|(bi, bj)| {
            let i0 = bi * TILE;
            let j0 = bj * TILE;
            let mi = TILE.min(n - i0);
            let nj = TILE.min(n - j0);
            let mut tile = vec![0.0; mi * nj];
            dgemm_abt(
                mi,
                p,
                nj,
                1.0,
                &rows[i0 * p..(i0 + mi) * p],
                &rows[j0 * p..(j0 + nj) * p],
                0.0,
                &mut tile,
                nj,
            );
            ((i0, j0), tile)
        })
        .collect();
    for ((i0, j0), tile) in tiles {
        let mi = TILE.min(n - i0);
        let nj = TILE.min(n - j0);
        for di in 0..mi {
            for dj in 0..nj {
                let v = tile[di * nj + dj];
                g[(i0 + di) * n + (j0 + dj)] = v;
                g[(j0 + dj) * n + (i0 + di)] = v;
            }
        }
    }
    g
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub(crate) struct Cholesky {
    l: Vec<f64>, // row-major n x n, lower triangle valid
    n: usize,
}

#[derive(Debug)]
pub(crate) struct NotPositiveDefinite;

impl Cholesky {
    /// Blocked right-looking factorization. `a` is row-major n x n and is
    /// consumed as workspace.
    pub(crate) fn factor(mut a: Vec<f64>, n: usize) -> Result<Cholesky, NotPositiveDefinite> {
        const B: usize = 128;
        assert_eq!(a.len(), n * n);
        let mut k = 0;
        while k < n {
            let kb = B.min(n - k);
            // unblocked factor of the diagonal block
            for j in k..k + kb {
                let mut d = a[j * n + j];
                for t in k..j {
                    d -= a[j * n + t] * a[j * n + t];
                }
                if d <= 0.0 || !d.is_finite() {
                    return Err(NotPositiveDefinite);
                }
                let dj = d.sqrt();
                a[j * n + j] = dj;
                for i in (j + 1)..(k + kb) {
                    let mut s = a[i * n + j];
                    for t in k..j {
                        s -= a[i * n + t] * a[j * n + t];
                    }
                    a[i * n + j] = s / dj;
                }
            }
            let rest = k + kb;
            if rest < n {
                // panel solve: rows below the block, L21 = A21 * L11^{-T}
                let (top, bottom) = a.split_at_mut(rest * n);
                let l11 = &top[k * n..];
                bottom
                    .par_chunks_mut(n)
                    .for_each(|row| {
                        for j in k..(k + kb) {
                            let mut s = row[j];
                            for t in k..j {
                                s -= row[t] * l11[(j - k) * n + t];
                            }
                            row[j] = s / l11[(j - k) * n + j];
                        }
                    });
                // trailing update A22 -= L21 L21^T, tiled
                const TILE: usize = 128;
                let nb = (n - rest).div_ceil(TILE);
                let mut pairs = Vec::new();
                for bi in 0..nb {
                    for bj in 0..=bi {
                        pairs.push((bi, bj));
                    }
                }
                let panel: Vec<f64> = (rest..n)
                    .flat_map(|i| a[i * n + k..i * n + k + kb].to_vec())
                    .collect();
                let tiles: Vec<((usize, usize), Vec<f64>)> = pairs
                    .into_par_iter()
                    .map(|(bi, bj)| {
                        let i0 = bi * TILE;
                        let j0 = bj * TILE;
                        let mi = TILE.min(n - rest - i0);
                        let nj = TILE.min(n - rest - j0);
                        let mut tile = vec![0.0; mi * nj];
                        dgemm_abt(
                            mi,
                            kb,
                            nj,
                            1.0,
                            &panel[i0 * kb..(i0 + mi) * kb],
                            &panel[j0 * kb..(j0 + nj) * kb],
                            0.0,
                            &mut tile,
                            nj,
                        );
                        ((i0, j0), tile)
                    })
                    .collect();
                for ((i0, j0), tile) in tiles {
                    let mi = TILE.min(n - rest - i0);
                    let nj = TILE.min(n - rest - j0);
                    for di in 0..mi {
                        let gi = rest + i0 + di;
                        for dj in 0..nj {
                            let gj = rest + j0 + dj;
                            if gj <= gi {
                                a[gi * n + gj] -= tile[di * nj + dj];
                            }
                        }
                    }
                }
            }
            k += kb;
        }
        Ok(Cholesky { l: a, n })
    }

    /// Solve L L^T x = b in place.
    pub(crate) fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.l[i * n + j] * x[j];
            }
            x[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.l[j * n + i] * x[j];
            }
            x[i] = s / self.l[i * n + i];
        }
    }
}
