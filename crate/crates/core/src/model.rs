//! Chart-based models of homogeneous (or conformally homogeneous)
//! Riemannian manifolds, with finite-difference oracles for their closed
//! forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie::{expm_f64, MatrixLieAlgebra};
use crate::linalg::inverse;
use crate::mat::Mat;
use crate::scalar::Scalar;
use crate::subspace::{orth_complement, GramForm, Subspace};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldKind {
    Killing,
    /// `L_X g = 2 λ g`.
    Conformal(f64),
}

/// Coordinate box with the singular loci already cut away.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartDomain {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lower.len()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| x.is_finite() && *x >= *lo && *x <= *hi)
    }

    /// Containment after shrinking every interval by `margin` at both ends.
    pub fn contains_inner(&self, p: &[f64], margin: f64) -> bool {
        p.len() == self.lower.len()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| x.is_finite() && *x >= lo + margin && *x <= hi - margin)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| rng.gen_range(*lo..=*hi))
            .collect()
    }
}

pub fn to_f64_vec<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

pub fn column<T: Scalar>(v: &[T]) -> Mat<T> {
    Mat::from_fn(v.len(), 1, |i, _| v[i].clone())
}

/// `e^v`, failing in exact mode away from zero.
pub fn exp_of<T: Scalar>(v: T) -> Result<T> {
    v.exp().ok_or_else(|| Error::NotExact(format!("exp({v:?})")))
}

pub fn sin_of<T: Scalar>(v: &T) -> Result<T> {
    v.sin().ok_or_else(|| Error::NotExact(format!("sin({v:?})")))
}

pub fn cos_of<T: Scalar>(v: &T) -> Result<T> {
    v.cos().ok_or_else(|| Error::NotExact(format!("cos({v:?})")))
}

/// A manifold `Ḡ/H̄` given in one chart, together with the realization of
/// `ḡ` as fundamental vector fields `X*_p = d/dt exp(tX)·p`.
///
/// The group action is described through an embedding into a vector space
/// on which `Ḡ` acts linearly via [`ChartedHomSpace::lift`].
pub trait ChartedHomSpace<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn algebra(&self) -> &MatrixLieAlgebra<T>;
    fn base_point(&self) -> Vec<T>;
    fn domain(&self) -> &ChartDomain;

    fn metric(&self, p: &[T]) -> Result<Mat<T>>;
    /// `out[k] = ∂_k g`.
    fn metric_derivatives(&self, p: &[T]) -> Result<Vec<Mat<T>>>;
    fn field(&self, x: &Mat<T>, p: &[T]) -> Result<Vec<T>>;
    /// `J[i][j] = ∂_j (X*)^i`.
    fn field_jacobian(&self, x: &Mat<T>, p: &[T]) -> Result<Mat<T>>;
    /// `λ` in `L_{X*} g = 2 λ g`; zero for Killing fields.
    fn conformal_factor(&self, x: &Mat<T>) -> T;
    /// Sectional curvature when it is constant.
    fn constant_curvature(&self) -> Option<f64>;

    fn embed(&self, p: &[f64]) -> Vec<f64>;
    fn embed_jacobian(&self, p: &[f64]) -> Mat<f64>;
    /// Linear representation of a group element on the embedding space.
    fn lift(&self, g: &Mat<f64>) -> Mat<f64>;
    fn unembed(&self, x: &[f64]) -> Vec<f64>;
    fn unembed_jacobian(&self, x: &[f64]) -> Result<Mat<f64>>;

    fn check_point(&self, p: &[T]) -> Result<()> {
        let pf = to_f64_vec(p);
        if p.len() != self.dim() || !self.domain().contains(&pf) {
            return Err(Error::OutsideChart(pf));
        }
        Ok(())
    }

    /// `out[k].get(i, j) = Γ^k_{ij}` from the closed-form metric derivatives.
    fn christoffel(&self, p: &[T]) -> Result<Vec<Mat<T>>> {
        let g = self.metric(p)?;
        let dg = self.metric_derivatives(p)?;
        christoffel_from(&g, &dg)
    }

    fn field_kind(&self, x: &Mat<T>) -> FieldKind {
        let l = self.conformal_factor(x);
        if l.is_zero() {
            FieldKind::Killing
        } else {
            FieldKind::Conformal(l.to_f64())
        }
    }

    /// Matrix of `A ↦ ∇̄_A X*` at `p` in the chart frame.
    fn covariant_derivative(&self, x: &Mat<T>, p: &[T]) -> Result<Mat<T>> {
        let xs = self.field(x, p)?;
        let j = self.field_jacobian(x, p)?;
        let gamma = self.christoffel(p)?;
        Ok(covariant_jacobian(&j, &gamma, &xs))
    }

    fn act(&self, g: &Mat<f64>, p: &[f64]) -> Result<Vec<f64>> {
        let y = self.lift(g).apply(&self.embed(p));
        let q = self.unembed(&y);
        if !q.iter().all(|v| v.is_finite()) {
            return Err(Error::OutsideChart(q));
        }
        Ok(q)
    }

    /// Differential of `p ↦ g·p` in chart coordinates.
    fn act_jacobian(&self, g: &Mat<f64>, p: &[f64]) -> Result<Mat<f64>> {
        let lg = self.lift(g);
        let y = lg.apply(&self.embed(p));
        Ok(&(&self.unembed_jacobian(&y)? * &lg) * &self.embed_jacobian(p))
    }
}

/// `(∇X)^k_j = ∂_j X^k + Γ^k_{ji} X^i`.
pub fn covariant_jacobian<T: Scalar>(j: &Mat<T>, gamma: &[Mat<T>], x: &[T]) -> Mat<T> {
    let n = x.len();
    Mat::from_fn(n, n, |k, c| {
        (0..n).fold(j.get(k, c).clone(), |acc, i| {
            acc + gamma[k].get(c, i).clone() * x[i].clone()
        })
    })
}

/// `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`.
pub fn christoffel_from<T: Scalar>(g: &Mat<T>, dg: &[Mat<T>]) -> Result<Vec<Mat<T>>> {
    let n = g.rows();
    let gi = inverse(g).map_err(|_| Error::Degenerate("metric is singular".into()))?;
    let half = T::from_ratio(1, 2);
    let lowered: Vec<Mat<T>> = (0..n)
        .map(|l| {
            Mat::from_fn(n, n, |i, j| {
                dg[i].get(j, l).clone() + dg[j].get(i, l).clone() - dg[l].get(i, j).clone()
            })
        })
        .collect();
    Ok((0..n)
        .map(|k| {
            Mat::from_fn(n, n, |i, j| {
                (0..n).fold(T::zero(), |acc, l| {
                    acc + gi.get(k, l).clone() * lowered[l].get(i, j).clone()
                }) * half.clone()
            })
        })
        .collect())
}

fn shifted(p: &[f64], k: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[k] += h;
    q
}

/// Christoffel symbols from central differences of the metric alone.
pub fn fd_christoffel<M: ChartedHomSpace<f64> + ?Sized>(
    model: &M,
    p: &[f64],
    h: f64,
) -> Result<Vec<Mat<f64>>> {
    let n = model.dim();
    let dg = (0..n)
        .map(|k| {
            let a = model.metric(&shifted(p, k, h))?;
            let b = model.metric(&shifted(p, k, -h))?;
            Ok((&a - &b).scale(&(0.5 / h)))
        })
        .collect::<Result<Vec<_>>>()?;
    christoffel_from(&model.metric(p)?, &dg)
}

pub fn fd_field_jacobian<M: ChartedHomSpace<f64> + ?Sized>(
    model: &M,
    x: &Mat<f64>,
    p: &[f64],
    h: f64,
) -> Result<Mat<f64>> {
    let n = model.dim();
    let cols = (0..n)
        .map(|k| {
            let a = model.field(x, &shifted(p, k, h))?;
            let b = model.field(x, &shifted(p, k, -h))?;
            Ok(a.iter().zip(&b).map(|(u, v)| (u - v) * 0.5 / h).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Mat::from_columns(&cols)
}

/// `d/dt exp(tX)·p` at `t = 0` by central differences of the group action.
pub fn fd_action_field<M: ChartedHomSpace<f64> + ?Sized>(
    model: &M,
    x: &Mat<f64>,
    p: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let a = model.act(&expm_f64(&x.scale(&h))?, p)?;
    let b = model.act(&expm_f64(&x.scale(&-h))?, p)?;
    Ok(a.iter().zip(&b).map(|(u, v)| (u - v) * 0.5 / h).collect())
}

/// `(L_{X*} g)_{ij} = X^k ∂_k g_{ij} + g_{kj} ∂_i X^k + g_{ik} ∂_j X^k`.
pub fn lie_derivative_metric<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
    p: &[T],
) -> Result<Mat<T>> {
    let n = model.dim();
    let g = model.metric(p)?;
    let dg = model.metric_derivatives(p)?;
    let xs = model.field(x, p)?;
    let j = model.field_jacobian(x, p)?;
    Ok(Mat::from_fn(n, n, |a, b| {
        let mut s = T::zero();
        for k in 0..n {
            s = s
                + xs[k].clone() * dg[k].get(a, b).clone()
                + g.get(k, b).clone() * j.get(k, a).clone()
                + g.get(a, k).clone() * j.get(k, b).clone();
        }
        s
    }))
}

/// Residual of `L_{X*} g = 2 λ g` at `p`.
pub fn conformal_killing_residual<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
    p: &[T],
) -> Result<f64> {
    let lg = lie_derivative_metric(model, x, p)?;
    let two_l = model.conformal_factor(x) * T::from_i64(2);
    let target = model.metric(p)?.scale(&two_l);
    Ok((&lg - &target).max_abs())
}

/// Vector-field bracket `[X*, Y*]^i = X^j ∂_j Y^i − Y^j ∂_j X^i`.
pub fn field_bracket<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
    y: &Mat<T>,
    p: &[T],
) -> Result<Vec<T>> {
    let xs = model.field(x, p)?;
    let ys = model.field(y, p)?;
    let jx = model.field_jacobian(x, p)?;
    let jy = model.field_jacobian(y, p)?;
    let a = jy.apply(&xs);
    let b = jx.apply(&ys);
    Ok(a.into_iter().zip(b).map(|(u, v)| u - v).collect())
}

/// Residual of the left-action rule `[X,Y]* = −[X*, Y*]` at `p`.
pub fn anti_homomorphism_residual<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
    y: &Mat<T>,
    p: &[T],
) -> Result<f64> {
    let lhs = model.field(&crate::lie::bracket(x, y)?, p)?;
    let rhs = field_bracket(model, x, y, p)?;
    Ok(lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a.clone() + b.clone()).magnitude())
        .fold(0.0, f64::max))
}

/// Riemann tensor `r[i][j][k][l] = R^i_{jkl}`, `R(∂_k, ∂_l)∂_j = R^i_{jkl} ∂_i`.
/// Closed form for constant curvature, otherwise differences of the
/// closed-form Christoffel symbols.
pub fn riemann<M: ChartedHomSpace<f64> + ?Sized>(
    model: &M,
    p: &[f64],
) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    let n = model.dim();
    let mut r = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    if let Some(kappa) = model.constant_curvature() {
        let g = model.metric(p)?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let dik = if i == k { 1.0 } else { 0.0 };
                        let dil = if i == l { 1.0 } else { 0.0 };
                        r[i][j][k][l] = kappa * (g.get(l, j) * dik - g.get(k, j) * dil);
                    }
                }
            }
        }
        return Ok(r);
    }
    let gam = model.christoffel(p)?;
    let h = FD_STEP;
    let dgam = (0..n)
        .map(|k| {
            let a = model.christoffel(&shifted(p, k, h))?;
            let b = model.christoffel(&shifted(p, k, -h))?;
            Ok(a.iter()
                .zip(&b)
                .map(|(u, v)| (u - v).scale(&(0.5 / h)))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dgam[k][i].get(l, j) - dgam[l][i].get(k, j);
                    for m in 0..n {
                        v += gam[i].get(k, m) * gam[m].get(l, j)
                            - gam[i].get(l, m) * gam[m].get(k, j);
                    }
                    r[i][j][k][l] = v;
                }
            }
        }
    }
    Ok(r)
}

/// Seeded random points in the chart domain.
pub fn sample_points<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| model.domain().sample(&mut rng)).collect()
}

/// Fundamental fields at `o` of a list of algebra elements, as chart columns.
pub fn evaluate_at_o<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    elems: &[Mat<T>],
) -> Result<Vec<Vec<T>>> {
    let o = model.base_point();
    elems.iter().map(|x| model.field(x, &o)).collect()
}

/// The orbit `M = G·o` seen from `o`.
#[derive(Clone, Debug)]
pub struct OrbitData<T> {
    pub g: MatrixLieAlgebra<T>,
    pub metric: Mat<T>,
    /// `T_oM` as a span of `dim × 1` columns.
    pub tangent: Subspace<T>,
    /// The `ḡ_o`-orthogonal complement of `T_oM`.
    pub normal: Subspace<T>,
}

impl<T: Scalar> OrbitData<T> {
    pub fn new<M: ChartedHomSpace<T> + ?Sized>(model: &M, g: MatrixLieAlgebra<T>) -> Result<Self> {
        let n = model.dim();
        let o = model.base_point();
        let metric = model.metric(&o)?;
        let vectors = evaluate_at_o(model, g.basis())?
            .iter()
            .map(|v| column(v))
            .collect::<Vec<_>>();
        let tangent = Subspace::span(n, 1, &vectors)?;
        let whole = Subspace::span(n, 1, &standard_columns(n))?;
        let form = GramForm::new(standard_columns(n), metric.clone())?;
        let normal = orth_complement(&tangent, &whole, &form)?.space;
        Ok(OrbitData {
            g,
            metric,
            tangent,
            normal,
        })
    }

    pub fn orbit_dim(&self) -> usize {
        self.tangent.dim()
    }

    /// Tangent basis followed by normal basis, as columns of a square matrix.
    pub fn adapted_basis(&self) -> Result<Mat<T>> {
        let cols: Vec<Vec<T>> = self
            .tangent
            .basis()
            .iter()
            .chain(self.normal.basis())
            .map(Mat::vectorize)
            .collect();
        Mat::from_columns(&cols)
    }
}

pub fn standard_columns<T: Scalar>(n: usize) -> Vec<Mat<T>> {
    (0..n)
        .map(|i| Mat::from_fn(n, 1, |r, _| if r == i { T::one() } else { T::zero() }))
        .collect()
}

/// The bijection `m̄ → T_oM̄`, `X ↦ X*_o`, with its inverse.
#[derive(Clone, Debug)]
pub struct Identification<T> {
    pub basis: Vec<Mat<T>>,
    /// Column `i` is `(basis_i)*_o`.
    pub images: Mat<T>,
    pub inverse: Mat<T>,
}

impl<T: Scalar> Identification<T> {
    /// The unique element of the span with `X*_o = u`.
    pub fn preimage(&self, u: &[T]) -> Mat<T> {
        let c = self.inverse.apply(u);
        combine(&self.basis, &c)
    }

    /// `φ*g_o` in the identification basis.
    pub fn pullback_metric(&self, g: &Mat<T>) -> Mat<T> {
        &(&self.images.transpose() * g) * &self.images
    }
}

pub fn combine<T: Scalar>(basis: &[Mat<T>], c: &[T]) -> Mat<T> {
    let (r, k) = basis.first().map_or((0, 0), Mat::shape);
    basis
        .iter()
        .zip(c)
        .fold(Mat::zeros(r, k), |acc, (b, x)| &acc + &b.scale(x))
}

pub fn identify_m_with_tangent<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    m_bar: &Subspace<T>,
) -> Result<Identification<T>> {
    let n = model.dim();
    if m_bar.dim() != n {
        return Err(Error::Singular(format!(
            "complement has dimension {} but the manifold has dimension {n}",
            m_bar.dim()
        )));
    }
    let basis = m_bar.basis().to_vec();
    let cols = evaluate_at_o(model, &basis)?;
    let images = Mat::from_columns(&cols)?;
    let inverse = inverse(&images)
        .map_err(|_| Error::Singular("evaluation at o is not injective on the complement".into()))?;
    Ok(Identification {
        basis,
        images,
        inverse,
    })
}
