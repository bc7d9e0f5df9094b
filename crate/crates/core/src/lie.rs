//! Matrix Lie algebras: brackets, structure constants, invariant forms on
//! so(k) and the matrix exponential.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::inverse;
use crate::mat::Mat;
use crate::scalar::{Mode, Scalar};
use crate::subspace::Subspace;

/// Float tolerance for bracket closure.
pub const CLOSURE_TOL: f64 = 1e-10;
/// Float tolerance for skew-symmetry of Killing-form arguments.
pub const SKEW_TOL: f64 = 1e-9;
/// Number of series terms used by the exact exponential.
pub const EXACT_EXP_TERMS: usize = 20;

pub fn bracket<T: Scalar>(x: &Mat<T>, y: &Mat<T>) -> Result<Mat<T>> {
    if !x.is_square() || x.shape() != y.shape() {
        return Err(Error::Shape(format!(
            "bracket of {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(&(x * y) - &(y * x))
}

/// Relative distance of `x` from `space` (zero iff contained in exact mode).
fn relative_residual<T: Scalar>(space: &Subspace<T>, x: &Mat<T>) -> Result<f64> {
    let r = space.residual(x)?;
    Ok(match T::MODE {
        Mode::Exact => r,
        Mode::Float => r / x.frobenius().max(1.0),
    })
}

#[derive(Clone, Debug)]
pub struct MatrixLieAlgebra<T> {
    name: String,
    n: usize,
    span: Subspace<T>,
    /// `c[i][j][k]` with `[B_i, B_j] = Σ_k c[i][j][k] B_k`.
    structure: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> MatrixLieAlgebra<T> {
    /// Builds the algebra spanned by `generators`, which must already be
    /// closed under the bracket.
    pub fn new(name: &str, n: usize, generators: &[Mat<T>]) -> Result<Self> {
        let span = Subspace::span(n, n, generators)?;
        Self::from_subspace(name, span)
    }

    pub fn from_subspace(name: &str, span: Subspace<T>) -> Result<Self> {
        let (rows, cols) = span.shape();
        if rows != cols {
            return Err(Error::Shape("Lie algebra of non-square matrices".into()));
        }
        let b = span.basis().to_vec();
        let mut structure = Vec::with_capacity(b.len());
        let mut worst: f64 = 0.0;
        for x in &b {
            let mut row = Vec::with_capacity(b.len());
            for y in &b {
                let z = bracket(x, y)?;
                let (c, _) = span.coords_with_residual(&z)?;
                worst = worst.max(relative_residual(&span, &z)?);
                row.push(c);
            }
            structure.push(row);
        }
        let closed = match T::MODE {
            Mode::Exact => worst == 0.0,
            Mode::Float => worst <= CLOSURE_TOL,
        };
        if !closed {
            return Err(Error::Certificate {
                name: format!("bracket closure of {name}"),
                residual: worst,
            });
        }
        Ok(MatrixLieAlgebra {
            name: name.to_string(),
            n: rows,
            span,
            structure,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Matrix size.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn basis(&self) -> &[Mat<T>] {
        self.span.basis()
    }

    pub fn span(&self) -> &Subspace<T> {
        &self.span
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<T>>] {
        &self.structure
    }

    pub fn contains(&self, x: &Mat<T>) -> bool {
        self.span.contains(x)
    }

    /// Largest violation of antisymmetry and the Jacobi identity on the
    /// structure constants.
    pub fn jacobi_residual(&self) -> f64 {
        let c = &self.structure;
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((c[i][j][k].clone() + c[j][i][k].clone()).magnitude());
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let mut s = T::zero();
                        for l in 0..d {
                            s = s + c[i][j][l].clone() * c[l][k][m].clone()
                                + c[j][k][l].clone() * c[l][i][m].clone()
                                + c[k][i][l].clone() * c[l][j][m].clone();
                        }
                        worst = worst.max(s.magnitude());
                    }
                }
            }
        }
        worst
    }

    /// Matrix of `ad_x` in the echelon basis.
    pub fn ad(&self, x: &Mat<T>) -> Result<Mat<T>> {
        let cols = self
            .basis()
            .iter()
            .map(|b| self.span.coords(&bracket(x, b)?))
            .collect::<Result<Vec<_>>>()?;
        if cols.is_empty() {
            return Ok(Mat::zeros(0, 0));
        }
        Mat::from_columns(&cols)
    }

    /// `tr(ad_x ∘ ad_y)`, the Killing form computed by brute force.
    pub fn killing_by_ad(&self, x: &Mat<T>, y: &Mat<T>) -> Result<T> {
        Ok((&self.ad(x)? * &self.ad(y)?).trace())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "basis": self.basis().iter().map(Mat::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let name = v.get("name").and_then(Value::as_str).unwrap_or("algebra");
        let basis = v
            .get("basis")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Input("algebra JSON needs a basis array".into()))?
            .iter()
            .map(Mat::from_json)
            .collect::<Result<Vec<_>>>()?;
        let n = basis.first().map_or(0, Mat::rows);
        MatrixLieAlgebra::new(name, n, &basis)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubalgebraCheck {
    pub closed: bool,
    pub residual: f64,
}

pub fn is_subalgebra<T: Scalar>(
    sub: &Subspace<T>,
    amb: &MatrixLieAlgebra<T>,
) -> Result<SubalgebraCheck> {
    if !amb.span().contains_subspace(sub) {
        return Err(Error::NotContained("subalgebra candidate".into()));
    }
    let mut worst: f64 = 0.0;
    for x in sub.basis() {
        for y in sub.basis() {
            worst = worst.max(relative_residual(sub, &bracket(x, y)?)?);
        }
    }
    let closed = match T::MODE {
        Mode::Exact => worst == 0.0,
        Mode::Float => worst <= CLOSURE_TOL,
    };
    Ok(SubalgebraCheck {
        closed,
        residual: worst,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdInvariance {
    /// Worst relative residual of `[x, y]` from `m`, `x ∈ h`, `y ∈ m`.
    pub bracket_residual: f64,
    /// Worst relative residual of `Ad(exp(t x)) y` from `m`.
    pub conjugation_residual: f64,
    /// Series truncation bound of the exact conjugations (0 in float mode).
    pub series_remainder: f64,
}

impl AdInvariance {
    pub fn invariant(&self, tol: f64) -> bool {
        self.bracket_residual <= tol && self.conjugation_residual <= tol.max(1e-8)
    }
}

/// Sample parameters for conjugation tests.
pub const CONJUGATION_TIMES: [(i64, i64); 4] = [(1, 1), (-1, 1), (1, 2), (-1, 2)];

/// Deterministic sample elements of `h`: the basis itself, followed by
/// generic combinations.
pub fn sample_elements<T: Scalar>(h: &Subspace<T>, count: usize) -> Vec<Mat<T>> {
    let d = h.dim();
    if d == 0 {
        return Vec::new();
    }
    (0..count)
        .map(|s| {
            if s < d {
                h.basis()[s].clone()
            } else {
                let c: Vec<T> = (0..d)
                    .map(|i| {
                        let sign = if (i + s) % 2 == 0 { 1 } else { -1 };
                        T::from_ratio(sign * (i as i64 + 1), (s + 1) as i64)
                    })
                    .collect();
                h.combine(&c)
            }
        })
        .collect()
}

/// Tests `[h, m] ⊆ m` on basis pairs and `Ad(exp(t X)) m ⊆ m` for
/// `group_samples` elements `X ∈ h` and `t ∈ {±1, ±1/2}`.
pub fn ad_invariance_check<T: Scalar>(
    h: &Subspace<T>,
    m: &Subspace<T>,
    alg: &MatrixLieAlgebra<T>,
    group_samples: usize,
) -> Result<AdInvariance> {
    if !alg.span().contains_subspace(h) || !alg.span().contains_subspace(m) {
        return Err(Error::NotContained("invariance test subspace".into()));
    }
    let mut bracket_residual: f64 = 0.0;
    for x in h.basis() {
        for y in m.basis() {
            bracket_residual = bracket_residual.max(relative_residual(m, &bracket(x, y)?)?);
        }
    }
    let mut conjugation_residual: f64 = 0.0;
    let mut series_remainder: f64 = 0.0;
    for x in sample_elements(h, group_samples) {
        for &(p, q) in &CONJUGATION_TIMES {
            let tx = x.scale(&T::from_ratio(p, q));
            for y in m.basis() {
                let (z, rem) = conjugate_exp(&tx, y)?;
                series_remainder = series_remainder.max(rem);
                conjugation_residual = conjugation_residual.max(relative_residual(m, &z)?);
            }
        }
    }
    Ok(AdInvariance {
        bracket_residual,
        conjugation_residual,
        series_remainder,
    })
}

/// `Ad(exp x) y`. Float mode conjugates by the Padé exponential; exact mode
/// sums `Σ ad_x^k y / k!`, which stays inside any `ad_x`-invariant subspace,
/// and reports the truncation bound.
pub fn conjugate_exp<T: Scalar>(x: &Mat<T>, y: &Mat<T>) -> Result<(Mat<T>, f64)> {
    match T::MODE {
        Mode::Float => {
            let xf = x.to_f64();
            let g = expm_f64(&xf)?;
            let gi = expm_f64(&(-&xf))?;
            let z = &(&g * &y.to_f64()) * &gi;
            Ok((from_f64_mat(&z)?, 0.0))
        }
        Mode::Exact => {
            let mut term = y.clone();
            let mut sum = y.clone();
            for k in 1..EXACT_EXP_TERMS {
                term = bracket(x, &term)?.scale(&T::from_ratio(1, k as i64));
                sum = &sum + &term;
            }
            let a = 2.0 * x.frobenius();
            Ok((sum, series_tail(a, EXACT_EXP_TERMS) * y.frobenius()))
        }
    }
}

/// Bound on `Σ_{k≥N} a^k / k!`.
fn series_tail(a: f64, n: usize) -> f64 {
    let mut t = 1.0;
    for k in 1..=n {
        t *= a / k as f64;
    }
    t * a.exp()
}

fn from_f64_mat<T: Scalar>(m: &Mat<f64>) -> Result<Mat<T>> {
    let data = m
        .data()
        .iter()
        .map(|&v| T::from_f64(v).ok_or_else(|| Error::NotExact(format!("{v}"))))
        .collect::<Result<Vec<_>>>()?;
    Mat::from_vec(m.rows(), m.cols(), data)
}

/// Matrix exponential. Float mode uses Padé scaling-and-squaring; exact
/// mode a truncated series whose remainder bound (Frobenius norm) is
/// returned alongside.
pub fn expm<T: Scalar>(x: &Mat<T>) -> Result<(Mat<T>, f64)> {
    if !x.is_square() {
        return Err(Error::Shape("exponential of a non-square matrix".into()));
    }
    match T::MODE {
        Mode::Float => Ok((from_f64_mat(&expm_f64(&x.to_f64())?)?, 0.0)),
        Mode::Exact => {
            let n = x.rows();
            let mut term = Mat::identity(n);
            let mut sum = Mat::identity(n);
            for k in 1..EXACT_EXP_TERMS {
                term = (&term * x).scale(&T::from_ratio(1, k as i64));
                sum = &sum + &term;
            }
            Ok((sum, series_tail(x.frobenius(), EXACT_EXP_TERMS)))
        }
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &Mat<f64>) -> f64 {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Degree-13 Padé approximant with scaling and squaring.
pub fn expm_f64(a: &Mat<f64>) -> Result<Mat<f64>> {
    if !a.is_square() {
        return Err(Error::Shape("exponential of a non-square matrix".into()));
    }
    if a.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite matrix in exponential".into()));
    }
    let n = a.rows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(&0.5f64.powi(s));
    let id = Mat::<f64>::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Mat<f64> {
        let mut m = &(&a6.scale(&c6) + &a4.scale(&c4)) + &a2.scale(&c2);
        if c0 != 0.0 {
            m = &m + &id.scale(&c0);
        }
        m
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = &inverse(&q)? * &p;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Whether the degenerate fallback replaces the Killing form on so(k).
pub fn killing_degenerate(k: usize) -> bool {
    k <= 2
}

/// Scale `c` with `B(A, B) = c · tr(AB)` on so(k): `k − 2` for `k ≥ 3`, and
/// the plain trace form for `k ≤ 2`, where the Killing form vanishes.
pub fn killing_scale(k: usize) -> i64 {
    if killing_degenerate(k) {
        1
    } else {
        k as i64 - 2
    }
}

pub fn skew_residual<T: Scalar>(a: &Mat<T>) -> f64 {
    (a + &a.transpose()).max_abs()
}

fn check_skew<T: Scalar>(a: &Mat<T>) -> Result<()> {
    let r = skew_residual(a);
    let bad = match T::MODE {
        Mode::Exact => r != 0.0,
        Mode::Float => r > SKEW_TOL * a.max_abs().max(1.0),
    };
    if bad {
        return Err(Error::NotSkew(r));
    }
    Ok(())
}

/// Cartan–Killing form of so(k) on skew `k × k` matrices.
pub fn killing_form_so<T: Scalar>(k: usize, a: &Mat<T>, b: &Mat<T>) -> Result<T> {
    if a.shape() != (k, k) || b.shape() != (k, k) {
        return Err(Error::Shape(format!("so({k}) form on {:?}", a.shape())));
    }
    check_skew(a)?;
    check_skew(b)?;
    Ok(T::from_i64(killing_scale(k)) * (a * b).trace())
}

pub fn trace_form<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> T {
    (a * b).trace()
}

/// Standard basis `E_ij − E_ji` (i < j) of so(k).
pub fn so_basis<T: Scalar>(k: usize) -> Vec<Mat<T>> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            out.push(&Mat::unit(k, i, j) - &Mat::unit(k, j, i));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn skew(n: usize, i: usize, j: usize) -> Mat<Exact> {
        &Mat::unit(n, i, j) - &Mat::unit(n, j, i)
    }

    #[test]
    fn bracket_examples() {
        let x = skew(3, 0, 1);
        assert!(bracket(&x, &x).unwrap().is_zero());
        assert_eq!(bracket(&skew(3, 0, 1), &skew(3, 1, 2)).unwrap(), skew(3, 0, 2));
        assert!(bracket(&x, &Mat::zeros(2, 2)).is_err());
    }

    #[test]
    fn so3_structure() {
        let so3 = MatrixLieAlgebra::new("so(3)", 3, &so_basis::<Exact>(3)).unwrap();
        assert_eq!(so3.dim(), 3);
        assert_eq!(so3.jacobi_residual(), 0.0);
        let a = skew(3, 0, 1);
        assert_eq!(killing_form_so(3, &a, &a).unwrap(), Exact::from_i64(-2));
        assert_eq!(so3.killing_by_ad(&a, &a).unwrap(), Exact::from_i64(-2));
        let b = skew(4, 2, 3);
        assert!(killing_form_so(4, &skew(4, 0, 1), &b).unwrap().is_zero());
        assert!(killing_form_so(3, &Mat::identity(3), &a).is_err());
    }

    #[test]
    fn non_closed_span_rejected() {
        let gens = vec![Mat::<Exact>::unit(2, 0, 1), Mat::unit(2, 1, 0)];
        assert!(MatrixLieAlgebra::new("bad", 2, &gens).is_err());
    }

    #[test]
    fn expm_of_rotation() {
        let t = 0.7f64;
        let x = Mat::from_rows(vec![vec![0.0, -t], vec![t, 0.0]]).unwrap();
        let r = expm_f64(&x).unwrap();
        assert!((r.get(0, 0) - t.cos()).abs() < 1e-14);
        assert!((r.get(1, 0) - t.sin()).abs() < 1e-14);
        let big = x.scale(&40.0);
        let rb = expm_f64(&big).unwrap();
        assert!((rb.get(0, 0) - (40.0 * t).cos()).abs() < 1e-11);
    }

    #[test]
    fn exact_series_remainder_is_small() {
        let x = skew(3, 0, 1);
        let (e, rem) = expm(&x).unwrap();
        assert!(rem < 1e-14);
        assert!((e.to_f64().get(0, 0) - 1f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_span_is_invariant() {
        let d = Subspace::span(
            2,
            2,
            &[Mat::<Exact>::unit(2, 0, 0), Mat::unit(2, 1, 1)],
        )
        .unwrap();
        let alg = MatrixLieAlgebra::from_subspace("diag", d.clone()).unwrap();
        assert!(is_subalgebra(&d, &alg).unwrap().closed);
        let r = ad_invariance_check(&d, &d, &alg, 3).unwrap();
        assert_eq!(r.bracket_residual, 0.0);
        assert_eq!(r.conjugation_residual, 0.0);
    }
}
