//! Independent oracles shared by the integration tests. Everything here is
//! built on `num_complex::Complex64` and dense storage so that it shares no
//! code with the library under test.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zsparse::{CooMatrix, Cplx, CsrMatrix};

pub fn to_c64(z: Cplx) -> C64 {
    C64::new(z.re, z.im)
}

pub fn from_c64(z: C64) -> Cplx {
    Cplx::new(z.re, z.im)
}

/// Row-major dense copy of a sparse matrix.
pub fn dense(a: &CsrMatrix) -> Vec<Vec<C64>> {
    let mut d = vec![vec![C64::new(0.0, 0.0); a.n_cols()]; a.n_rows()];
    for (i, row) in d.iter_mut().enumerate() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            row[j] += to_c64(v);
        }
    }
    d
}

pub fn dense_matvec(d: &[Vec<C64>], x: &[Cplx]) -> Vec<C64> {
    d.iter()
        .map(|row| row.iter().zip(x).map(|(a, &b)| a * to_c64(b)).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting. Returns `None` when a pivot
/// is exactly zero. `min_pivot` reports the smallest pivot modulus seen.
pub fn lu_solve(mut a: Vec<Vec<C64>>, b: &[Cplx]) -> Option<(Vec<Cplx>, f64)> {
    let n = a.len();
    let mut x: Vec<C64> = b.iter().map(|&z| to_c64(z)).collect();
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap())
            .unwrap();
        let piv = a[p][k];
        min_pivot = min_pivot.min(piv.norm());
        if piv.norm() == 0.0 {
            return None;
        }
        a.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f.norm() == 0.0 {
                continue;
            }
            let (top, bottom) = a.split_at_mut(i);
            for (dst, &src) in bottom[0][k..].iter_mut().zip(&top[k][k..]) {
                *dst -= f * src;
            }
            let t = x[k];
            x[i] -= f * t;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some((x.into_iter().map(from_c64).collect(), min_pivot))
}

pub fn rel_err(x: &[Cplx], y: &[Cplx]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (*a - *b).abs2()).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|b| b.abs2()).sum::<f64>().sqrt();
    num / den
}

/// Independent `||b - A x|| / ||b||` via the dense oracle.
pub fn dense_relative_residual(a: &CsrMatrix, b: &[Cplx], x: &[Cplx]) -> f64 {
    let ax = dense_matvec(&dense(a), x);
    let num: f64 = ax
        .iter()
        .zip(b)
        .map(|(r, &bi)| (to_c64(bi) - r).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|z| to_c64(*z).norm_sqr()).sum::<f64>().sqrt();
    num / den
}

pub fn rand_cplx(rng: &mut ChaCha8Rng) -> Cplx {
    Cplx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn rand_vec(n: usize, seed: u64) -> Vec<Cplx> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rand_cplx(&mut rng)).collect()
}

/// Random `rows x cols` matrix with roughly `density` of entries nonzero.
pub fn random_sparse(rows: usize, cols: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coo = CooMatrix::new(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen::<f64>() < density {
                coo.push(i, j, rand_cplx(&mut rng));
            }
        }
    }
    coo.to_csr().unwrap()
}

/// Square matrix with `per_row` random columns in each row, for sizes where
/// visiting every dense position would be too slow.
pub fn random_rows(n: usize, per_row: usize, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coo = CooMatrix::square(n);
    for i in 0..n {
        for _ in 0..per_row {
            coo.push(i, rng.gen_range(0..n), rand_cplx(&mut rng));
        }
    }
    coo.to_csr().unwrap()
}

/// Random complex matrix made strictly diagonally dominant by rows: the
/// diagonal modulus exceeds the off-diagonal row sum by a factor of two.
pub fn random_diag_dominant(n: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coo = CooMatrix::square(n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if j != i && rng.gen::<f64>() < density {
                let v = rand_cplx(&mut rng);
                row_sum += v.abs();
                coo.push(i, j, v);
            }
        }
        let phase = Cplx::cis(rng.gen_range(0.0..std::f64::consts::TAU));
        coo.push(i, i, phase.scale(2.0 * row_sum + 1.0));
    }
    coo.to_csr().unwrap()
}

/// The 5x5 example with the golden CSR arrays.
pub fn golden_5x5() -> CsrMatrix {
    let entries: [(usize, usize, f64); 11] = [
        (1, 1, 3.0),
        (1, 2, 14.0),
        (2, 2, 8.0),
        (2, 3, 1.0),
        (3, 1, 2.0),
        (3, 3, 6.0),
        (4, 2, 4.0),
        (4, 4, 2.0),
        (4, 5, -1.0),
        (5, 3, 9.0),
        (5, 5, 7.0),
    ];
    let mut coo = CooMatrix::square(5);
    // pushed in reverse to exercise the sort
    for &(i, j, v) in entries.iter().rev() {
        coo.push(i - 1, j - 1, Cplx::real(v));
    }
    coo.to_csr().unwrap()
}
