//! Dense row-major matrices over a [`Scalar`] field.

use std::ops::{Add, Mul, Neg, Sub};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Debug)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Mat<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Mat::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Row-major flattening, the single vectorization convention.
    pub fn vectorize(&self) -> Vec<T> {
        self.data.clone()
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat<T> {
        Mat::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != r) {
            return Err(Error::Shape("ragged columns".into()));
        }
        Ok(Mat::from_fn(r, c, |i, j| cols[j][i].clone()))
    }
}

impl Mat<i64> {
    pub fn cast<T: Scalar>(&self) -> Mat<T> {
        self.map(|&v| T::from_i64(v))
    }
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Elementary matrix E_ij.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        Mat::from_fn(n, n, |a, b| if a == i && b == j { T::one() } else { T::zero() })
    }

    pub fn from_vectorized(rows: usize, cols: usize, v: Vec<T>) -> Result<Self> {
        Mat::from_vec(rows, cols, v)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn checked_mul(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out: Mat<T> = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j).clone() + a.clone() * rhs.get(k, j).clone();
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Mat<T>, f: impl Fn(T, T) -> T) -> Result<Mat<T>> {
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        })
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(Scalar::to_f64)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// `{"rows":r,"cols":c,"entries":[[..],..]}`; exact entries are strings.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = (0..self.rows)
            .map(|i| Value::Array(self.row(i).iter().map(Scalar::to_json).collect()))
            .collect();
        json!({ "rows": self.rows, "cols": self.cols, "entries": entries })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Input(format!("matrix JSON: {what}"));
        let rows = v.get("rows").and_then(Value::as_u64).ok_or_else(|| bad("rows"))? as usize;
        let cols = v.get("cols").and_then(Value::as_u64).ok_or_else(|| bad("cols"))? as usize;
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("entries"))?;
        if entries.len() != rows {
            return Err(bad("row count"));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for row in entries {
            let row = row.as_array().ok_or_else(|| bad("row"))?;
            if row.len() != cols {
                return Err(bad("column count"));
            }
            for e in row {
                data.push(T::from_json(e)?);
            }
        }
        Mat::from_vec(rows, cols, data)
    }
}

impl<T: Scalar> Add for &Mat<T> {
    type Output = Mat<T>;
    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        self.checked_add(rhs).expect("matrix add shape mismatch")
    }
}

impl<T: Scalar> Sub for &Mat<T> {
    type Output = Mat<T>;
    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        self.checked_sub(rhs).expect("matrix sub shape mismatch")
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;
    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        self.checked_mul(rhs).expect("matrix mul shape mismatch")
    }
}

impl<T: Scalar> Neg for &Mat<T> {
    type Output = Mat<T>;
    fn neg(self) -> Mat<T> {
        self.map(|v| -v.clone())
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn axpy<T: Scalar>(alpha: &T, x: &[T], y: &[T]) -> Vec<T> {
    x.iter()
        .zip(y)
        .map(|(a, b)| alpha.clone() * a.clone() + b.clone())
        .collect()
}

pub fn norm_f64<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    #[test]
    fn json_exact_uses_rational_strings() {
        let m = Mat::<Exact>::from_rows(vec![
            vec![Exact::from_ratio(1, 2), Exact::zero()],
            vec![Exact::from_i64(-3), Exact::sqrt2()],
        ])
        .unwrap();
        let v = m.to_json();
        assert_eq!(v["entries"][0][0], "1/2");
        assert_eq!(v["entries"][1][0], "-3/1");
        assert_eq!(v["entries"][1][1], "1/1*sqrt2");
        assert_eq!(Mat::<Exact>::from_json(&v).unwrap(), m);
    }

    #[test]
    fn json_float_uses_numbers() {
        let m = Mat::<f64>::identity(2);
        let v = m.to_json();
        assert_eq!(v["entries"][0][0], 1.0);
        assert_eq!(Mat::<f64>::from_json(&v).unwrap(), m);
    }

    #[test]
    fn shape_errors() {
        let a = Mat::<f64>::zeros(2, 3);
        assert!(a.checked_mul(&a).is_err());
        assert!(Mat::<f64>::from_vec(2, 2, vec![1.0]).is_err());
    }
}
