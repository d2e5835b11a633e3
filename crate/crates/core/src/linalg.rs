//! Small dense linear algebra: complex determinants and ranks by LU with
//! partial pivoting, and real least squares via normal equations.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn lu_reduce(m: &[Vec<Complex64>]) -> (Vec<Vec<Complex64>>, f64) {
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let n = a.len();
    let mut sign = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap_or(col);
        if piv != col {
            a.swap(piv, col);
            sign = -sign;
        }
        let p = a[col][col];
        if p.norm() == 0.0 {
            continue;
        }
        for r in col + 1..n {
            let f = a[r][col] / p;
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
        }
    }
    (a, sign)
}

pub fn determinant(m: &[Vec<Complex64>]) -> Complex64 {
    let (a, sign) = lu_reduce(m);
    (0..a.len()).fold(Complex64::new(sign, 0.0), |acc, i| acc * a[i][i])
}

/// Numerical rank by Gaussian elimination with full pivoting; entries below
/// `tol · max|m_ij|` count as zero.
pub fn rank(m: &[Vec<Complex64>], tol: f64) -> usize {
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    let mut used = vec![false; cols];
    while r < rows {
        let mut best = (0.0, 0, 0);
        for (i, row) in a.iter().enumerate().skip(r) {
            for (j, z) in row.iter().enumerate() {
                if !used[j] && z.norm() > best.0 {
                    best = (z.norm(), i, j);
                }
            }
        }
        if best.0 <= tol * scale {
            break;
        }
        let (_, pi, pj) = best;
        a.swap(r, pi);
        used[pj] = true;
        let p = a[r][pj];
        for i in r + 1..rows {
            let f = a[i][pj] / p;
            for j in 0..cols {
                let v = a[r][j];
                a[i][j] -= f * v;
            }
        }
        r += 1;
    }
    r
}

/// Least-squares coefficients of `y ≈ X c` for a tall real design matrix.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let p = x.first().map_or(0, Vec::len);
    if x.len() < p || x.len() != y.len() || p == 0 {
        return Err(Error::Invalid("least squares needs at least as many rows as columns".into()));
    }
    let mut ata = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                ata[i][j] += row[i] * row[j];
            }
            ata[i][p] += row[i] * yi;
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| ata[i][col].abs().total_cmp(&ata[j][col].abs())).unwrap_or(col);
        ata.swap(piv, col);
        let d = ata[col][col];
        if d.abs() < 1e-300 {
            return Err(Error::Invalid("singular least squares system".into()));
        }
        for r in 0..p {
            if r != col {
                let f = ata[r][col] / d;
                for c in col..=p {
                    let v = ata[col][c];
                    ata[r][c] -= f * v;
                }
            }
        }
    }
    Ok((0..p).map(|i| ata[i][p] / ata[i][i]).collect())
}
