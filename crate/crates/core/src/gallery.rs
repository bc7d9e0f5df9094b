//! Built-in fixtures: horospheres in real hyperbolic space, concentric
//! spheres in punctured Euclidean space, and flat Euclidean space with its
//! motion group.
//!
//! # Hyperbolic space in horospherical coordinates
//!
//! `so(n,1)` is realized as the `(n+1) × (n+1)` matrices
//!
//! ```text
//! ( B     v1  v2 )
//! ( -v2ᵀ  a   0  )      B ∈ so(n−1), v1, v2 ∈ ℝ^{n−1}, a ∈ ℝ,
//! ( -v1ᵀ  0   -a )
//! ```
//!
//! which preserve `⟨(x,p,q),(x,p,q)⟩ = |x|² + 2pq`. The isotropy algebra
//! `v1 = v2, a = 0` fixes `o = (0, −1/√2, 1/√2)` on the sheet
//! `|x|² + 2pq = −1`. The chart
//!
//! ```text
//! (t, y) ↦ (e^{−t} y, −(e^t + e^{−t}|y|²)/√2, e^{−t}/√2)
//! ```
//!
//! pulls the ambient form back to `dt² + e^{−2t}|dy|²` and sends `(0, 0)`
//! to `o`. Differentiating `exp(sX)·P(t, y)` at `s = 0` and pulling back
//! through the chart gives
//!
//! ```text
//! X*^t = a + √2 ⟨v1, y⟩
//! X*^y = B y + a y + v2/√2 − (e^{2t} + |y|²) v1/√2 + √2 ⟨v1, y⟩ y.
//! ```
//!
//! The subgroup with `v1 = 0, a = 0` fixes `q`, so it preserves the leaves
//! `t = const` and acts on `y` by rigid motions.
//!
//! # Punctured Euclidean space
//!
//! `ℝ⁺ × SO(n)` acts by `(s, A)·x = s A x`, written as block matrices
//! `diag(K, a)` with `K ∈ so(n)`. The chart is `x = r u(α)` with latitude
//! angles
//!
//! ```text
//! u_n = sin α_1, u_{n−1} = cos α_1 sin α_2, …,
//! u_2 = cos α_1 ⋯ cos α_{n−2} sin α_{n−1}, u_1 = cos α_1 ⋯ cos α_{n−1},
//! ```
//!
//! so the base point `e_1` sits at `r = 1, α = 0`, away from the poles.
//! Fields are `X* = J⁻¹ (K + a) x` with `J = ∂x/∂(r, α)`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::{so_basis, MatrixLieAlgebra};
use crate::linalg::inverse;
use crate::mat::Mat;
use crate::model::{cos_of, exp_of, sin_of, ChartDomain, ChartedHomSpace};
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// Distance kept from chart singularities.
pub const CHART_MARGIN: f64 = 0.1;

fn unit<T: Scalar>(n: usize, i: usize, j: usize) -> Mat<T> {
    Mat::unit(n, i, j)
}

fn embed_block<T: Scalar>(size: usize, offset: usize, m: &Mat<T>) -> Mat<T> {
    let mut out = Mat::zeros(size, size);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(offset + i, offset + j, m.get(i, j).clone());
        }
    }
    out
}

pub struct Horosphere<T> {
    n: usize,
    name: String,
    algebra: MatrixLieAlgebra<T>,
    domain: ChartDomain,
}

/// Generators of `so(n,1)` in the block pattern above.
pub mod hyperbolic {
    use super::*;

    /// Rotation block `E_ij − E_ji` inside the leading `(n−1) × (n−1)` block.
    pub fn rotations<T: Scalar>(n: usize) -> Vec<Mat<T>> {
        so_basis::<T>(n - 1)
            .iter()
            .map(|b| embed_block(n + 1, 0, b))
            .collect()
    }

    /// `v1 = e_k`.
    pub fn v1<T: Scalar>(n: usize, k: usize) -> Mat<T> {
        &unit(n + 1, k, n - 1) - &unit(n + 1, n, k)
    }

    /// `v2 = e_k`.
    pub fn v2<T: Scalar>(n: usize, k: usize) -> Mat<T> {
        &unit(n + 1, k, n) - &unit(n + 1, n - 1, k)
    }

    /// `diag(0, …, 0, 1, −1)`.
    pub fn dilation<T: Scalar>(n: usize) -> Mat<T> {
        &unit(n + 1, n - 1, n - 1) - &unit(n + 1, n, n)
    }

    /// Isotropy direction `v1 = v2 = e_k`.
    pub fn isotropy_v<T: Scalar>(n: usize, k: usize) -> Mat<T> {
        &v1(n, k) + &v2(n, k)
    }

    /// Transvection `v1 = e_k, v2 = −e_k`.
    pub fn transvection<T: Scalar>(n: usize, k: usize) -> Mat<T> {
        &v1(n, k) - &v2(n, k)
    }

    /// Horosphere translation `v1 = 0, v2 = −e_k`.
    pub fn translation<T: Scalar>(n: usize, k: usize) -> Mat<T> {
        -&v2(n, k)
    }

    pub fn algebra<T: Scalar>(n: usize) -> Vec<Mat<T>> {
        let mut out = rotations(n);
        for k in 0..n - 1 {
            out.push(v1(n, k));
            out.push(v2(n, k));
        }
        out.push(dilation(n));
        out
    }
}

impl<T: Scalar> Horosphere<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Input(format!("horosphere fixture needs n >= 3, got {n}")));
        }
        let algebra = MatrixLieAlgebra::new("so(n,1)", n + 1, &hyperbolic::algebra::<T>(n))?;
        Ok(Horosphere {
            n,
            name: format!("horosphere(n={n})"),
            algebra,
            domain: ChartDomain {
                lower: vec![-2.0; n],
                upper: vec![2.0; n],
            },
        })
    }

    /// `(B, v1, v2, a)` read off a matrix.
    fn parts(&self, x: &Mat<T>) -> (Mat<T>, Vec<T>, Vec<T>, T) {
        let k = self.n - 1;
        let b = x.block(0, 0, k, k);
        let v1 = (0..k).map(|i| x.get(i, k).clone()).collect();
        let v2 = (0..k).map(|i| x.get(i, k + 1).clone()).collect();
        (b, v1, v2, x.get(k, k).clone())
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    crate::mat::dot(a, b)
}

impl<T: Scalar> ChartedHomSpace<T> for Horosphere<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn algebra(&self) -> &MatrixLieAlgebra<T> {
        &self.algebra
    }

    fn base_point(&self) -> Vec<T> {
        vec![T::zero(); self.n]
    }

    fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    fn metric(&self, p: &[T]) -> Result<Mat<T>> {
        self.check_point(p)?;
        let w = exp_of(p[0].clone() * T::from_i64(-2))?;
        Ok(Mat::from_fn(self.n, self.n, |i, j| match (i, j) {
            (0, 0) => T::one(),
            _ if i == j => w.clone(),
            _ => T::zero(),
        }))
    }

    fn metric_derivatives(&self, p: &[T]) -> Result<Vec<Mat<T>>> {
        self.check_point(p)?;
        let w = exp_of(p[0].clone() * T::from_i64(-2))? * T::from_i64(-2);
        let mut out = vec![Mat::zeros(self.n, self.n); self.n];
        out[0] = Mat::from_fn(self.n, self.n, |i, j| {
            if i == j && i > 0 {
                w.clone()
            } else {
                T::zero()
            }
        });
        Ok(out)
    }

    fn field(&self, x: &Mat<T>, p: &[T]) -> Result<Vec<T>> {
        self.check_point(p)?;
        let (b, v1, v2, a) = self.parts(x);
        let y = &p[1..];
        let s2 = T::sqrt2();
        let is2 = s2.clone() * T::from_ratio(1, 2);
        let v1y = dot(&v1, y);
        let yy = dot(y, y);
        let e2t = exp_of(p[0].clone() * T::from_i64(2))?;
        let by = b.apply(y);
        let mut out = Vec::with_capacity(self.n);
        out.push(a.clone() + s2.clone() * v1y.clone());
        for i in 0..self.n - 1 {
            out.push(
                by[i].clone() + a.clone() * y[i].clone() + v2[i].clone() * is2.clone()
                    - (e2t.clone() + yy.clone()) * v1[i].clone() * is2.clone()
                    + s2.clone() * v1y.clone() * y[i].clone(),
            );
        }
        Ok(out)
    }

    fn field_jacobian(&self, x: &Mat<T>, p: &[T]) -> Result<Mat<T>> {
        self.check_point(p)?;
        let (b, v1, _, a) = self.parts(x);
        let y = &p[1..];
        let s2 = T::sqrt2();
        let v1y = dot(&v1, y);
        let e2t = exp_of(p[0].clone() * T::from_i64(2))?;
        Ok(Mat::from_fn(self.n, self.n, |i, j| match (i, j) {
            (0, 0) => T::zero(),
            (0, j) => s2.clone() * v1[j - 1].clone(),
            (i, 0) => -(s2.clone() * e2t.clone() * v1[i - 1].clone()),
            (i, j) => {
                let (i, j) = (i - 1, j - 1);
                let mut v = b.get(i, j).clone() - s2.clone() * v1[i].clone() * y[j].clone()
                    + s2.clone() * y[i].clone() * v1[j].clone();
                if i == j {
                    v = v + a.clone() + s2.clone() * v1y.clone();
                }
                v
            }
        }))
    }

    fn conformal_factor(&self, _: &Mat<T>) -> T {
        T::zero()
    }

    fn constant_curvature(&self) -> Option<f64> {
        Some(-1.0)
    }

    fn embed(&self, p: &[f64]) -> Vec<f64> {
        let (t, y) = (p[0], &p[1..]);
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let mut out: Vec<f64> = y.iter().map(|v| (-t).exp() * v).collect();
        out.push(-(t.exp() + (-t).exp() * yy) / SQRT_2);
        out.push((-t).exp() / SQRT_2);
        out
    }

    fn embed_jacobian(&self, p: &[f64]) -> Mat<f64> {
        let n = self.n;
        let (t, y) = (p[0], &p[1..]);
        let e = (-t).exp();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        Mat::from_fn(n + 1, n, |i, j| {
            if i < n - 1 {
                match j {
                    0 => -e * y[i],
                    j if j - 1 == i => e,
                    _ => 0.0,
                }
            } else if i == n - 1 {
                match j {
                    0 => -(t.exp() - e * yy) / SQRT_2,
                    j => -SQRT_2 * e * y[j - 1],
                }
            } else if j == 0 {
                -e / SQRT_2
            } else {
                0.0
            }
        })
    }

    fn lift(&self, g: &Mat<f64>) -> Mat<f64> {
        g.clone()
    }

    fn unembed(&self, x: &[f64]) -> Vec<f64> {
        let q = x[self.n];
        if q <= 0.0 {
            return vec![f64::NAN; self.n];
        }
        let mut out = vec![-(SQRT_2 * q).ln()];
        out.extend(x[..self.n - 1].iter().map(|v| v / (SQRT_2 * q)));
        out
    }

    fn unembed_jacobian(&self, x: &[f64]) -> Result<Mat<f64>> {
        let n = self.n;
        let q = x[n];
        if q <= 0.0 {
            return Err(Error::OutsideChart(x.to_vec()));
        }
        Ok(Mat::from_fn(n, n + 1, |i, j| {
            if i == 0 {
                if j == n {
                    -1.0 / q
                } else {
                    0.0
                }
            } else if j == i - 1 {
                1.0 / (SQRT_2 * q)
            } else if j == n {
                -x[i - 1] / (SQRT_2 * q * q)
            } else {
                0.0
            }
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Factor {
    One,
    Cos,
    Sin,
}

/// Position `x = r u(α)`, its Jacobian and second derivatives
/// (`second[j]` has columns `∂_j ∂_i x`).
struct SphereChart<S> {
    x: Vec<S>,
    jac: Mat<S>,
    second: Vec<Mat<S>>,
}

fn factor_table(n: usize) -> Vec<Vec<Factor>> {
    (0..n)
        .map(|i| {
            (0..n - 1)
                .map(|k| {
                    if i == 0 {
                        return Factor::Cos;
                    }
                    let a = n - i - 1;
                    match k.cmp(&a) {
                        std::cmp::Ordering::Less => Factor::Cos,
                        std::cmp::Ordering::Equal => Factor::Sin,
                        std::cmp::Ordering::Greater => Factor::One,
                    }
                })
                .collect()
        })
        .collect()
}

fn factor_value<S: Scalar>(f: Factor, order: usize, c: &S, s: &S) -> S {
    match f {
        Factor::One => {
            if order == 0 {
                S::one()
            } else {
                S::zero()
            }
        }
        Factor::Cos => match order % 4 {
            0 => c.clone(),
            1 => -s.clone(),
            2 => -c.clone(),
            _ => s.clone(),
        },
        Factor::Sin => match order % 4 {
            0 => s.clone(),
            1 => c.clone(),
            2 => -s.clone(),
            _ => -c.clone(),
        },
    }
}

fn sphere_chart<S: Scalar>(n: usize, p: &[S]) -> Result<SphereChart<S>> {
    let table = factor_table(n);
    let r = p[0].clone();
    let cs = p[1..].iter().map(cos_of).collect::<Result<Vec<_>>>()?;
    let ss = p[1..].iter().map(sin_of).collect::<Result<Vec<_>>>()?;
    // derivative of u_i with the given per-angle orders
    let du = |i: usize, orders: &[usize]| -> S {
        (0..n - 1).fold(S::one(), |acc, k| {
            acc * factor_value(table[i][k], orders[k], &cs[k], &ss[k])
        })
    };
    let order = |ks: &[usize]| -> Vec<usize> {
        let mut o = vec![0; n - 1];
        for &k in ks {
            o[k] += 1;
        }
        o
    };
    let u: Vec<S> = (0..n).map(|i| du(i, &order(&[]))).collect();
    let x: Vec<S> = u.iter().map(|v| v.clone() * r.clone()).collect();
    // coordinate 0 is r, coordinate k + 1 is α_{k+1}
    let jac = Mat::from_fn(n, n, |i, j| {
        if j == 0 {
            u[i].clone()
        } else {
            r.clone() * du(i, &order(&[j - 1]))
        }
    });
    let second = (0..n)
        .map(|j| {
            Mat::from_fn(n, n, |i, l| match (j, l) {
                (0, 0) => S::zero(),
                (0, l) | (l, 0) if l > 0 => du(i, &order(&[l - 1])),
                (j, l) => r.clone() * du(i, &order(&[j - 1, l - 1])),
            })
        })
        .collect();
    Ok(SphereChart { x, jac, second })
}

pub struct PuncturedEuclidean<T> {
    n: usize,
    name: String,
    algebra: MatrixLieAlgebra<T>,
    domain: ChartDomain,
}

/// Generators of `ℝ ⊕ so(n)` as `(n+1) × (n+1)` block matrices.
pub mod conformal {
    use super::*;

    /// `v = e_k`: the entries `(0, k+1)` and `(k+1, 0)`.
    pub fn v<T: Scalar>(n: usize, k: usize) -> Mat<T> {
        &unit(n + 1, 0, k + 1) - &unit(n + 1, k + 1, 0)
    }

    /// Rotations of the `B` block.
    pub fn rotations<T: Scalar>(n: usize) -> Vec<Mat<T>> {
        so_basis::<T>(n - 1)
            .iter()
            .map(|b| embed_block(n + 1, 1, b))
            .collect()
    }

    /// `diag(0, …, 0, 1)`, the radial dilation.
    pub fn dilation<T: Scalar>(n: usize) -> Mat<T> {
        unit(n + 1, n, n)
    }

    pub fn algebra<T: Scalar>(n: usize) -> Vec<Mat<T>> {
        let mut out = rotations(n);
        out.extend((0..n - 1).map(|k| v(n, k)));
        out.push(dilation(n));
        out
    }
}

impl<T: Scalar> PuncturedEuclidean<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Input(format!(
                "punctured Euclidean fixture needs n >= 3, got {n}"
            )));
        }
        let algebra =
            MatrixLieAlgebra::new("R+ x so(n)", n + 1, &conformal::algebra::<T>(n))?;
        let mut lower = vec![CHART_MARGIN];
        let mut upper = vec![5.0];
        for _ in 0..n - 2 {
            lower.push(-FRAC_PI_2 + CHART_MARGIN);
            upper.push(FRAC_PI_2 - CHART_MARGIN);
        }
        lower.push(-PI + CHART_MARGIN);
        upper.push(PI - CHART_MARGIN);
        Ok(PuncturedEuclidean {
            n,
            name: format!("punctured_euclidean(n={n})"),
            algebra,
            domain: ChartDomain { lower, upper },
        })
    }

    fn linear_part<S: Scalar>(&self, x: &Mat<S>) -> Mat<S> {
        let n = self.n;
        let a = x.get(n, n).clone();
        Mat::from_fn(n, n, |i, j| {
            let v = x.get(i, j).clone();
            if i == j {
                v + a.clone()
            } else {
                v
            }
        })
    }
}

impl<T: Scalar> ChartedHomSpace<T> for PuncturedEuclidean<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn algebra(&self) -> &MatrixLieAlgebra<T> {
        &self.algebra
    }

    fn base_point(&self) -> Vec<T> {
        let mut o = vec![T::zero(); self.n];
        o[0] = T::one();
        o
    }

    fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    fn metric(&self, p: &[T]) -> Result<Mat<T>> {
        self.check_point(p)?;
        let c = sphere_chart(self.n, p)?;
        Ok(&c.jac.transpose() * &c.jac)
    }

    fn metric_derivatives(&self, p: &[T]) -> Result<Vec<Mat<T>>> {
        self.check_point(p)?;
        let c = sphere_chart(self.n, p)?;
        let jt = c.jac.transpose();
        Ok(c.second
            .iter()
            .map(|h| {
                let a = &h.transpose() * &c.jac;
                &a + &(&jt * h)
            })
            .collect())
    }

    fn field(&self, x: &Mat<T>, p: &[T]) -> Result<Vec<T>> {
        self.check_point(p)?;
        let c = sphere_chart(self.n, p)?;
        let ji = inverse(&c.jac)?;
        Ok(ji.apply(&self.linear_part(x).apply(&c.x)))
    }

    fn field_jacobian(&self, x: &Mat<T>, p: &[T]) -> Result<Mat<T>> {
        self.check_point(p)?;
        let n = self.n;
        let c = sphere_chart(n, p)?;
        let ji = inverse(&c.jac)?;
        let l = self.linear_part(x);
        let xs = ji.apply(&l.apply(&c.x));
        let lj = &l * &c.jac;
        let cols: Vec<Vec<T>> = (0..n)
            .map(|j| {
                let hx = c.second[j].apply(&xs);
                let rhs: Vec<T> = (0..n).map(|i| lj.get(i, j).clone() - hx[i].clone()).collect();
                ji.apply(&rhs)
            })
            .collect();
        Mat::from_columns(&cols)
    }

    fn conformal_factor(&self, x: &Mat<T>) -> T {
        x.get(self.n, self.n).clone()
    }

    fn constant_curvature(&self) -> Option<f64> {
        Some(0.0)
    }

    fn embed(&self, p: &[f64]) -> Vec<f64> {
        sphere_chart(self.n, p).map(|c| c.x).unwrap_or_default()
    }

    fn embed_jacobian(&self, p: &[f64]) -> Mat<f64> {
        sphere_chart(self.n, p)
            .map(|c| c.jac)
            .unwrap_or_else(|_| Mat::zeros(self.n, self.n))
    }

    fn lift(&self, g: &Mat<f64>) -> Mat<f64> {
        let n = self.n;
        g.block(0, 0, n, n).scale(g.get(n, n))
    }

    fn unembed(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        let mut out = vec![r];
        for k in 0..n - 2 {
            let rest = u[..n - 1 - k].iter().map(|v| v * v).sum::<f64>().sqrt();
            out.push(u[n - 1 - k].atan2(rest));
        }
        out.push(u[1].atan2(u[0]));
        out
    }

    fn unembed_jacobian(&self, x: &[f64]) -> Result<Mat<f64>> {
        let p = self.unembed(x);
        inverse(&sphere_chart(self.n, &p)?.jac)
    }
}

/// Flat `ℝⁿ` with the motion group `SO(n) ⋉ ℝⁿ` as affine matrices
/// `[[K, b], [0, 0]]`, base point the origin.
pub struct Euclidean<T> {
    n: usize,
    name: String,
    algebra: MatrixLieAlgebra<T>,
    domain: ChartDomain,
}

pub mod affine {
    use super::*;

    pub fn translation<T: Scalar>(n: usize, k: usize) -> Mat<T> {
        unit(n + 1, k, n)
    }

    pub fn rotations<T: Scalar>(n: usize) -> Vec<Mat<T>> {
        so_basis::<T>(n).iter().map(|b| embed_block(n + 1, 0, b)).collect()
    }

    pub fn algebra<T: Scalar>(n: usize) -> Vec<Mat<T>> {
        let mut out = rotations(n);
        out.extend((0..n).map(|k| translation(n, k)));
        out
    }
}

impl<T: Scalar> Euclidean<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("Euclidean fixture needs n >= 2, got {n}")));
        }
        let algebra = MatrixLieAlgebra::new("se(n)", n + 1, &affine::algebra::<T>(n))?;
        Ok(Euclidean {
            n,
            name: format!("euclidean(n={n})"),
            algebra,
            domain: ChartDomain {
                lower: vec![-3.0; n],
                upper: vec![3.0; n],
            },
        })
    }
}

impl<T: Scalar> ChartedHomSpace<T> for Euclidean<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn algebra(&self) -> &MatrixLieAlgebra<T> {
        &self.algebra
    }

    fn base_point(&self) -> Vec<T> {
        vec![T::zero(); self.n]
    }

    fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    fn metric(&self, p: &[T]) -> Result<Mat<T>> {
        self.check_point(p)?;
        Ok(Mat::identity(self.n))
    }

    fn metric_derivatives(&self, p: &[T]) -> Result<Vec<Mat<T>>> {
        self.check_point(p)?;
        Ok(vec![Mat::zeros(self.n, self.n); self.n])
    }

    fn field(&self, x: &Mat<T>, p: &[T]) -> Result<Vec<T>> {
        self.check_point(p)?;
        let n = self.n;
        let k = x.block(0, 0, n, n);
        Ok(k.apply(p)
            .into_iter()
            .enumerate()
            .map(|(i, v)| v + x.get(i, n).clone())
            .collect())
    }

    fn field_jacobian(&self, x: &Mat<T>, p: &[T]) -> Result<Mat<T>> {
        self.check_point(p)?;
        Ok(x.block(0, 0, self.n, self.n))
    }

    fn conformal_factor(&self, _: &Mat<T>) -> T {
        T::zero()
    }

    fn constant_curvature(&self) -> Option<f64> {
        Some(0.0)
    }

    fn embed(&self, p: &[f64]) -> Vec<f64> {
        let mut v = p.to_vec();
        v.push(1.0);
        v
    }

    fn embed_jacobian(&self, _: &[f64]) -> Mat<f64> {
        Mat::from_fn(self.n + 1, self.n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    fn lift(&self, g: &Mat<f64>) -> Mat<f64> {
        g.clone()
    }

    fn unembed(&self, x: &[f64]) -> Vec<f64> {
        x[..self.n].iter().map(|v| v / x[self.n]).collect()
    }

    fn unembed_jacobian(&self, x: &[f64]) -> Result<Mat<f64>> {
        let w = x[self.n];
        Ok(Mat::from_fn(self.n, self.n + 1, |i, j| {
            if i == j {
                1.0 / w
            } else if j == self.n {
                -x[i] / (w * w)
            } else {
                0.0
            }
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flags {
    pub symmetric: bool,
    pub conformal: bool,
    pub principal: bool,
}

/// A model, an orbit subgroup and the expected decomposition.
#[derive(Clone)]
pub struct Fixture<T: Scalar> {
    pub name: String,
    pub n: usize,
    pub model: Arc<dyn ChartedHomSpace<T>>,
    pub g: MatrixLieAlgebra<T>,
    pub h_bar: Subspace<T>,
    pub m_bar: Subspace<T>,
    pub h: Subspace<T>,
    pub m: Subspace<T>,
    pub normal: Subspace<T>,
    pub flags: Flags,
}

pub const FIXTURE_NAMES: [&str; 3] = ["horosphere", "punctured_euclidean", "euclidean"];

pub fn build<T: Scalar>(name: &str, n: usize) -> Result<Fixture<T>> {
    match name {
        "horosphere" => build_horosphere(n),
        "punctured_euclidean" => build_punctured_euclidean(n),
        "euclidean" => build_euclidean_plane(n),
        other => Err(Error::Input(format!(
            "unknown example `{other}` (expected one of {})",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}

fn span<T: Scalar>(n: usize, v: &[Mat<T>]) -> Result<Subspace<T>> {
    Subspace::span(n, n, v)
}

pub fn build_horosphere<T: Scalar>(n: usize) -> Result<Fixture<T>> {
    use hyperbolic::*;
    let model = Horosphere::<T>::new(n)?;
    let size = n + 1;
    let k = n - 1;
    let rot = rotations::<T>(n);
    let mut hb = rot.clone();
    hb.extend((0..k).map(|i| isotropy_v(n, i)));
    let mut mb: Vec<Mat<T>> = (0..k).map(|i| transvection(n, i)).collect();
    mb.push(dilation(n));
    let trans: Vec<Mat<T>> = (0..k).map(|i| translation(n, i)).collect();
    let mut g = rot.clone();
    g.extend(trans.iter().cloned());
    Ok(Fixture {
        name: "horosphere".into(),
        n,
        g: MatrixLieAlgebra::new("so(n-1) x R^(n-1)", size, &g)?,
        model: Arc::new(model),
        h_bar: span(size, &hb)?,
        m_bar: span(size, &mb)?,
        h: span(size, &rot)?,
        m: span(size, &trans)?,
        normal: span(size, &[dilation(n)])?,
        flags: Flags {
            symmetric: true,
            conformal: false,
            principal: true,
        },
    })
}

pub fn build_punctured_euclidean<T: Scalar>(n: usize) -> Result<Fixture<T>> {
    use conformal::*;
    let model = PuncturedEuclidean::<T>::new(n)?;
    let size = n + 1;
    let rot = rotations::<T>(n);
    let vs: Vec<Mat<T>> = (0..n - 1).map(|k| v(n, k)).collect();
    let mut mb = vs.clone();
    mb.push(dilation(n));
    let mut g = rot.clone();
    g.extend(vs.iter().cloned());
    Ok(Fixture {
        name: "punctured_euclidean".into(),
        n,
        g: MatrixLieAlgebra::new("so(n)", size, &g)?,
        model: Arc::new(model),
        h_bar: span(size, &rot)?,
        m_bar: span(size, &mb)?,
        h: span(size, &rot)?,
        m: span(size, &vs)?,
        normal: span(size, &[dilation(n)])?,
        flags: Flags {
            symmetric: false,
            conformal: true,
            principal: true,
        },
    })
}

/// Flat `ℝⁿ` with the orbit of the translations along the first `n − 1`
/// axes: a totally geodesic hyperplane.
pub fn build_euclidean_plane<T: Scalar>(n: usize) -> Result<Fixture<T>> {
    use affine::*;
    let model = Euclidean::<T>::new(n)?;
    let size = n + 1;
    let trans: Vec<Mat<T>> = (0..n - 1).map(|k| translation(n, k)).collect();
    let all_trans: Vec<Mat<T>> = (0..n).map(|k| translation(n, k)).collect();
    Ok(Fixture {
        name: "euclidean".into(),
        n,
        g: MatrixLieAlgebra::new("R^(n-1)", size, &trans)?,
        model: Arc::new(model),
        h_bar: span(size, &rotations::<T>(n))?,
        m_bar: span(size, &all_trans)?,
        h: Subspace::zero(size, size),
        m: span(size, &trans)?,
        normal: span(size, &[translation(n, n - 1)])?,
        flags: Flags {
            symmetric: true,
            conformal: false,
            principal: true,
        },
    })
}
