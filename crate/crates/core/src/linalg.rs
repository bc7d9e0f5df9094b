//! Gaussian elimination and the small set of float-only decompositions
//! (SVD rank, symmetric eigenvalues) the rest of the crate relies on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mat::{dot, Mat};
use crate::scalar::{Mode, Scalar};

/// Relative singular-value cutoff for float rank decisions.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Brings `m` to reduced row echelon form in place and returns the pivot
/// columns. Float pivots below `cutoff · max|m|` count as zero.
pub fn rref<T: Scalar>(m: &mut Mat<T>, cutoff: f64) -> Vec<usize> {
    let (rows, cols) = m.shape();
    let scale = m.max_abs();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, m.get(i, c).magnitude()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let zero = match T::MODE {
            Mode::Exact => m.get(best, c).is_zero(),
            Mode::Float => mag <= cutoff * scale || mag == 0.0,
        };
        if zero {
            if T::MODE == Mode::Float {
                for i in r..rows {
                    m.set(i, c, T::zero());
                }
            }
            continue;
        }
        if best != r {
            for j in 0..cols {
                let a = m.get(r, j).clone();
                let b = m.get(best, j).clone();
                m.set(r, j, b);
                m.set(best, j, a);
            }
        }
        let inv = m.get(r, c).recip();
        for j in 0..cols {
            let v = m.get(r, j).clone() * inv.clone();
            m.set(r, j, v);
        }
        m.set(r, c, T::one());
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = m.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..cols {
                let v = m.get(i, j).clone() - f.clone() * m.get(r, j).clone();
                m.set(i, j, v);
            }
            m.set(i, c, T::zero());
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace<T: Scalar>(m: &Mat<T>, cutoff: f64) -> Vec<Vec<T>> {
    let mut e = m.clone();
    let pivots = rref(&mut e, cutoff);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -e.get(r, f).clone();
            }
            v
        })
        .collect()
}

pub fn rank<T: Scalar>(m: &Mat<T>, cutoff: f64) -> usize {
    match T::MODE {
        Mode::Exact => rref(&mut m.clone(), cutoff).len(),
        Mode::Float => {
            let sv = singular_values(&m.to_f64());
            let max = sv.iter().cloned().fold(0.0, f64::max);
            sv.iter().filter(|&&s| s > cutoff * max && s > 0.0).count()
        }
    }
}

pub fn inverse<T: Scalar>(m: &Mat<T>) -> Result<Mat<T>> {
    if !m.is_square() {
        return Err(Error::Shape("inverse of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut aug = Mat::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m.get(i, j).clone()
        } else if j - n == i {
            T::one()
        } else {
            T::zero()
        }
    });
    let pivots = rref(&mut aug, RANK_CUTOFF);
    if pivots.len() < n || pivots[n - 1] >= n {
        return Err(Error::Singular(format!("{n}x{n} matrix is not invertible")));
    }
    Ok(aug.block(0, n, n, n))
}

/// Solves `a x = b` in the least-squares sense for full-column-rank `a`.
/// Returns the solution and the residual norm `|a x − b|`.
pub fn least_squares<T: Scalar>(a: &Mat<T>, b: &[T]) -> Result<(Vec<T>, f64)> {
    let at = a.transpose();
    let normal = &at * a;
    let inv = inverse(&normal)
        .map_err(|_| Error::Singular("columns are linearly dependent".into()))?;
    let x = inv.apply(&at.apply(b));
    let ax = a.apply(&x);
    let res = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p.clone() - q.clone()).to_f64().powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((x, res))
}

pub fn singular_values(m: &Mat<f64>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let d = DMatrix::from_row_slice(m.rows(), m.cols(), m.data());
    d.singular_values().iter().copied().collect()
}

pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Vec<f64> {
    if m.rows() == 0 {
        return Vec::new();
    }
    let d = DMatrix::from_row_slice(m.rows(), m.cols(), m.data());
    let sym = (&d + d.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Exact positive-definiteness through the signs of the LDLᵀ pivots.
/// Works in both modes; float mode is a plain numeric test.
pub fn is_positive_definite<T: Scalar>(m: &Mat<T>) -> bool {
    let n = m.rows();
    let mut a = m.clone();
    for k in 0..n {
        let p = a.get(k, k).clone();
        if p.signum() <= 0 {
            return false;
        }
        for i in k + 1..n {
            let f = a.get(i, k).clone() / p.clone();
            for j in k..n {
                let v = a.get(i, j).clone() - f.clone() * a.get(k, j).clone();
                a.set(i, j, v);
            }
        }
    }
    true
}

/// Gram–Schmidt of `vectors` with respect to the inner product `g`.
/// Fails in exact mode when a norm leaves Q(√2).
pub fn orthonormalize<T: Scalar>(vectors: &[Vec<T>], g: &Mat<T>) -> Result<Vec<Vec<T>>> {
    let inner = |a: &[T], b: &[T]| dot(a, &g.apply(b));
    let mut out: Vec<Vec<T>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let c = inner(&w, u);
            w = w.iter().zip(u).map(|(a, b)| a.clone() - c.clone() * b.clone()).collect();
        }
        let n2 = inner(&w, &w);
        if n2.signum() <= 0 || n2.to_f64() < 1e-24 {
            return Err(Error::Degenerate("dependent vectors in Gram-Schmidt".into()));
        }
        let n = n2
            .sqrt()
            .ok_or_else(|| Error::NotExact(format!("sqrt of {n2:?}")))?;
        out.push(w.into_iter().map(|a| a / n.clone()).collect());
    }
    Ok(out)
}
