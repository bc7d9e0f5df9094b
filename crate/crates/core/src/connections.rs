//! The Levi-Civita connection `∇̄`, the canonical connection `∇̃` of
//! `(ḡ, m̄)`, the orbit connection `D` of `(g, m)`, their difference tensors,
//! parallel transport and the parallelism residuals.
//!
//! Connections act on chart vector fields as `∇_u V = dV(u) + ω(u) V`.
//! For an invariant connection with horizontal space `m_p = Ad_g m` at
//! `p = g·o`, prescribing `∇_u B* = −[X^u, B]*_p` on a frame of fundamental
//! fields gives `ω(u) = M_u N⁻¹` with `N = [B_i*_p]` and
//! `M_u = [−[X^u, B_i]*_p − (∂B_i*)(u)]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::decomposition::DecompositionResult;
use crate::error::{Error, Result};
use crate::lie::{bracket, expm_f64};
use crate::linalg::{inverse, least_squares, rank, RANK_CUTOFF};
use crate::mat::Mat;
use crate::model::{combine, riemann, ChartedHomSpace, OrbitData};
use crate::ode::{dopri5, rk4_step, OdeTolerances};
use crate::scalar::{Mode, Scalar};
use crate::subspace::Subspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    LeviCivita,
    CanonicalAmbient,
    OrbitD,
}

fn solve_preimage<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    p: &[T],
    u: &[T],
    basis: &[Mat<T>],
) -> Result<Mat<T>> {
    let first = basis
        .first()
        .ok_or_else(|| Error::Input("empty subspace has no preimages".into()))?;
    let cols = basis
        .iter()
        .map(|x| model.field(x, p))
        .collect::<Result<Vec<_>>>()?;
    let a = Mat::from_columns(&cols)?;
    if rank(&a, RANK_CUTOFF) < basis.len() {
        return Err(Error::Singular(
            "evaluation is not injective on the subspace".into(),
        ));
    }
    let (c, res) = least_squares(&a, u)?;
    let scale = 1.0 + u.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
    let ok = match T::MODE {
        Mode::Exact => res == 0.0,
        Mode::Float => res <= 1e-9 * scale,
    };
    if !ok {
        return Err(Error::NotContained(format!(
            "tangent vector (residual {res:e})"
        )));
    }
    let (r, k) = first.shape();
    let x = combine(basis, &c);
    debug_assert_eq!(x.shape(), (r, k));
    Ok(x)
}

/// The unique `X ∈ sub` with `X*_o = u`.
pub fn preimage_in<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    u: &[T],
    sub: &Subspace<T>,
) -> Result<Mat<T>> {
    solve_preimage(model, &model.base_point(), u, sub.basis())
}

fn neg_bracket_field<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
    b: &Mat<T>,
    p: &[T],
) -> Result<Vec<T>> {
    Ok(model
        .field(&bracket(x, b)?, p)?
        .into_iter()
        .map(|v| -v)
        .collect())
}

/// `(∇̃_u B*)_o = −[X^u_m̄, B]*_o`.
pub fn nabla_tilde<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    m_bar: &Subspace<T>,
    u: &[T],
    b: &Mat<T>,
) -> Result<Vec<T>> {
    let x = preimage_in(model, u, m_bar)?;
    neg_bracket_field(model, &x, b, &model.base_point())
}

/// `(D_u B*)_o = −[X^u_m, B]*_o` for `u ∈ T_oM`.
pub fn connection_d<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    m: &Subspace<T>,
    u: &[T],
    b: &Mat<T>,
) -> Result<Vec<T>> {
    let x = preimage_in(model, u, m)
        .map_err(|e| Error::NotContained(format!("direction tangent to the orbit: {e}")))?;
    neg_bracket_field(model, &x, b, &model.base_point())
}

/// `ω(u)` at `p` for the invariant connection with horizontal space
/// spanned by `sub`; the fields of `frame` must span `T_pM̄`.
pub fn invariant_connection_matrix<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    p: &[T],
    sub: &[Mat<T>],
    frame: &[Mat<T>],
    u: &[T],
) -> Result<Mat<T>> {
    let x = solve_preimage(model, p, u, sub)?;
    let mut ncols = Vec::with_capacity(frame.len());
    let mut mcols = Vec::with_capacity(frame.len());
    for b in frame {
        ncols.push(model.field(b, p)?);
        let ju = model.field_jacobian(b, p)?.apply(u);
        let nb = neg_bracket_field(model, &x, b, p)?;
        mcols.push(nb.into_iter().zip(ju).map(|(a, c)| a - c).collect());
    }
    let n = inverse(&Mat::from_columns(&ncols)?)
        .map_err(|_| Error::Singular("frame fields do not span the tangent space".into()))?;
    Ok(&Mat::from_columns(&mcols)? * &n)
}

/// `ω(u)^k_i = Γ^k_{ji} u^j`.
pub fn levi_civita_matrix<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    p: &[T],
    u: &[T],
) -> Result<Mat<T>> {
    let gamma = model.christoffel(p)?;
    let n = u.len();
    Ok(Mat::from_fn(n, n, |k, i| {
        (0..n).fold(T::zero(), |acc, j| {
            acc + gamma[k].get(j, i).clone() * u[j].clone()
        })
    }))
}

/// Connection matrix at `o`.
pub fn connection_matrix_at_o<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    kind: ConnectionKind,
    m_bar: &Subspace<T>,
    m: &Subspace<T>,
    u: &[T],
) -> Result<Mat<T>> {
    let o = model.base_point();
    match kind {
        ConnectionKind::LeviCivita => levi_civita_matrix(model, &o, u),
        ConnectionKind::CanonicalAmbient => {
            invariant_connection_matrix(model, &o, m_bar.basis(), m_bar.basis(), u)
        }
        ConnectionKind::OrbitD => invariant_connection_matrix(model, &o, m.basis(), m_bar.basis(), u),
    }
}

/// `Γ_u = ∇̃_u − D_u` at `o`.
#[derive(Clone, Debug)]
pub struct GammaTensor<T> {
    pub u: Vec<T>,
    /// `W(u) = X^u_m − X^u_m̄`.
    pub generator: Mat<T>,
    /// `Γ_u` from `B*_o ↦ [W(u), B]*_o`.
    pub matrix: Mat<T>,
    /// `ω̃(u) − ω^D(u)`.
    pub difference: Mat<T>,
    pub generator_in_h_perp: bool,
}

impl<T: Scalar> GammaTensor<T> {
    /// Largest entry of the disagreement between the two formulas.
    pub fn agreement(&self) -> f64 {
        (&self.matrix - &self.difference).max_abs()
    }
}

pub fn gamma_tensor<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    decomp: &DecompositionResult<T>,
    u: &[T],
) -> Result<GammaTensor<T>> {
    let o = model.base_point();
    let xm = preimage_in(model, u, &decomp.m)?;
    let xmb = preimage_in(model, u, &decomp.m_bar)?;
    let w = &xm - &xmb;
    let frame = decomp.m_bar.basis();
    let mut ncols = Vec::with_capacity(frame.len());
    let mut wcols = Vec::with_capacity(frame.len());
    for b in frame {
        ncols.push(model.field(b, &o)?);
        wcols.push(model.field(&bracket(&w, b)?, &o)?);
    }
    let matrix = &Mat::from_columns(&wcols)? * &inverse(&Mat::from_columns(&ncols)?)?;
    let difference = &invariant_connection_matrix(model, &o, frame, frame, u)?
        - &invariant_connection_matrix(model, &o, decomp.m.basis(), frame, u)?;
    Ok(GammaTensor {
        u: u.to_vec(),
        generator_in_h_perp: decomp.h_perp_in_h_bar.contains(&w),
        generator: w,
        matrix,
        difference,
    })
}

/// `S_u(B*_o)` and `S̄_u(B*_o)` at `o`.
#[derive(Clone, Debug)]
pub struct SValues<T> {
    pub s: Vec<T>,
    pub s_bar: Vec<T>,
}

/// `S = ∇̄ − D` and `S̄ = ∇̄ − ∇̃` on `B*` in direction `u ∈ T_oM`.
pub fn levi_civita_d_s_tensor<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    decomp: &DecompositionResult<T>,
    u: &[T],
    b: &Mat<T>,
) -> Result<SValues<T>> {
    let o = model.base_point();
    let lc = model.covariant_derivative(b, &o)?.apply(u);
    let d = connection_d(model, &decomp.m, u, b)?;
    let t = nabla_tilde(model, &decomp.m_bar, u, b)?;
    let sub = |a: &[T], c: &[T]| -> Vec<T> {
        a.iter().zip(c).map(|(x, y)| x.clone() - y.clone()).collect()
    };
    Ok(SValues {
        s: sub(&lc, &d),
        s_bar: sub(&lc, &t),
    })
}

/// Largest `|ω̃(u) − ω^D(u)|` over a basis of `T_oM`.
pub fn tangent_disagreement<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    orbit: &OrbitData<T>,
    m_bar: &Subspace<T>,
    m: &Subspace<T>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in orbit.tangent.basis() {
        let u = t.vectorize();
        let a = connection_matrix_at_o(model, ConnectionKind::CanonicalAmbient, m_bar, m, &u)?;
        let b = connection_matrix_at_o(model, ConnectionKind::OrbitD, m_bar, m, &u)?;
        worst = worst.max((&a - &b).max_abs());
    }
    Ok(worst)
}

/// A (1,2)-tensor along the orbit, `u ↦ S_u`, given at `p = g·o`.
pub trait StructureTensor: Sync {
    fn at(&self, model: &dyn ChartedHomSpace<f64>, g: &Mat<f64>, p: &[f64], u: &[f64])
        -> Result<Mat<f64>>;
}

/// `S_u = Σ_k u^k A_k` with constant chart matrices.
#[derive(Clone, Debug)]
pub struct ConstantStructure(pub Vec<Mat<f64>>);

impl StructureTensor for ConstantStructure {
    fn at(&self, _: &dyn ChartedHomSpace<f64>, _: &Mat<f64>, p: &[f64], u: &[f64]) -> Result<Mat<f64>> {
        let n = p.len();
        if self.0.len() != n || self.0.iter().any(|a| a.shape() != (n, n)) {
            return Err(Error::Shape("structure tensor components".into()));
        }
        Ok(self
            .0
            .iter()
            .zip(u)
            .fold(Mat::zeros(n, n), |acc, (a, c)| &acc + &a.scale(c)))
    }
}

/// `S = ∇̄ − D` from a decomposition.
#[derive(Clone, Debug)]
pub struct PipelineStructure {
    pub m: Vec<Mat<f64>>,
    pub m_bar: Vec<Mat<f64>>,
}

impl StructureTensor for PipelineStructure {
    fn at(&self, model: &dyn ChartedHomSpace<f64>, g: &Mat<f64>, p: &[f64], u: &[f64]) -> Result<Mat<f64>> {
        let d = Connection::Invariant {
            kind: ConnectionKind::OrbitD,
            sub: self.m.clone(),
            frame: self.m_bar.clone(),
        };
        Ok(&levi_civita_matrix(model, p, u)? - &d.matrix(model, g, p, u)?)
    }
}

/// A connection along the orbit in floating point.
pub enum Connection<'a> {
    LeviCivita,
    Invariant {
        kind: ConnectionKind,
        sub: Vec<Mat<f64>>,
        frame: Vec<Mat<f64>>,
    },
    /// `∇̄ − S`.
    Structure(&'a dyn StructureTensor),
}

pub fn conjugate(g: &Mat<f64>, g_inv: &Mat<f64>, x: &Mat<f64>) -> Mat<f64> {
    &(g * x) * g_inv
}

impl Connection<'_> {
    pub fn canonical(m_bar: &Subspace<f64>) -> Self {
        Connection::Invariant {
            kind: ConnectionKind::CanonicalAmbient,
            sub: m_bar.basis().to_vec(),
            frame: m_bar.basis().to_vec(),
        }
    }

    pub fn orbit(m: &[Mat<f64>], m_bar: &Subspace<f64>) -> Self {
        Connection::Invariant {
            kind: ConnectionKind::OrbitD,
            sub: m.to_vec(),
            frame: m_bar.basis().to_vec(),
        }
    }

    /// `ω(u)` at `p = g·o`.
    pub fn matrix(
        &self,
        model: &dyn ChartedHomSpace<f64>,
        g: &Mat<f64>,
        p: &[f64],
        u: &[f64],
    ) -> Result<Mat<f64>> {
        match self {
            Connection::LeviCivita => levi_civita_matrix(model, p, u),
            Connection::Invariant { sub, frame, .. } => {
                let gi = inverse(g)?;
                let sub: Vec<_> = sub.iter().map(|x| conjugate(g, &gi, x)).collect();
                let frame: Vec<_> = frame.iter().map(|x| conjugate(g, &gi, x)).collect();
                invariant_connection_matrix(model, p, &sub, &frame, u)
            }
            Connection::Structure(s) => {
                Ok(&levi_civita_matrix(model, p, u)? - &s.at(model, g, p, u)?)
            }
        }
    }
}

/// `c(t) = g_k exp((t − t_k) X_k)·o` on `K` equal pieces of `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Curve {
    pub generators: Vec<Mat<f64>>,
    starts: Vec<Mat<f64>>,
}

impl Curve {
    pub fn new(generators: Vec<Mat<f64>>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::Input("curve needs at least one piece".into()))?;
        let len = 1.0 / generators.len() as f64;
        let mut starts = vec![Mat::identity(first.rows())];
        for x in &generators[..generators.len() - 1] {
            let last = starts.last().expect("nonempty");
            starts.push(last * &expm_f64(&x.scale(&len))?);
        }
        Ok(Curve { generators, starts })
    }

    pub fn ray(x: Mat<f64>) -> Result<Self> {
        Curve::new(vec![x])
    }

    pub fn pieces(&self) -> usize {
        self.generators.len()
    }

    pub fn piece_length(&self) -> f64 {
        1.0 / self.pieces() as f64
    }

    /// Group element at local parameter `s` of piece `k`.
    pub fn group(&self, k: usize, s: f64) -> Result<Mat<f64>> {
        Ok(&self.starts[k] * &expm_f64(&self.generators[k].scale(&s))?)
    }

    /// Point, group element and velocity at local parameter `s` of piece `k`.
    pub fn state(
        &self,
        model: &dyn ChartedHomSpace<f64>,
        k: usize,
        s: f64,
    ) -> Result<(Mat<f64>, Vec<f64>, Vec<f64>)> {
        let g = self.group(k, s)?;
        let p = model.act(&g, &model.base_point())?;
        model.check_point(&p)?;
        let gen = conjugate(&self.starts[k], &inverse(&self.starts[k])?, &self.generators[k]);
        let v = model.field(&gen, &p)?;
        Ok((g, p, v))
    }
}

fn transport_rhs(
    model: &dyn ChartedHomSpace<f64>,
    conn: &Connection,
    curve: &Curve,
    k: usize,
    s: f64,
    y: &[f64],
) -> Result<Vec<f64>> {
    let (g, p, v) = curve.state(model, k, s)?;
    let n = p.len();
    let w = conn.matrix(model, &g, &p, &v)?;
    let e = Mat::from_vec(n, y.len() / n, y.to_vec())?;
    Ok((&w * &e).scale(&-1.0).into_data())
}

/// Transports the columns of `frame` within piece `k` from `s0` to `s1`.
pub fn transport_in_piece(
    model: &dyn ChartedHomSpace<f64>,
    conn: &Connection,
    curve: &Curve,
    k: usize,
    s0: f64,
    s1: f64,
    frame: &Mat<f64>,
    tol: OdeTolerances,
) -> Result<Mat<f64>> {
    let (y, _) = dopri5(
        |s, y| transport_rhs(model, conn, curve, k, s, y),
        s0,
        s1,
        frame.data(),
        tol,
    )?;
    Mat::from_vec(frame.rows(), frame.cols(), y)
}

/// Transport of the columns of `frame` from `c(0)` to `c(t1)`.
pub fn parallel_transport(
    model: &dyn ChartedHomSpace<f64>,
    conn: &Connection,
    curve: &Curve,
    frame: &Mat<f64>,
    t1: f64,
    tol: OdeTolerances,
) -> Result<Mat<f64>> {
    let len = curve.piece_length();
    let mut e = frame.clone();
    for k in 0..curve.pieces() {
        let start = k as f64 * len;
        if t1 <= start {
            break;
        }
        let s1 = (t1 - start).min(len);
        e = transport_in_piece(model, conn, curve, k, 0.0, s1, &e, tol)?;
    }
    Ok(e)
}

/// `max |τ(v) − (L_exp X)_* v|` over a basis, relative to the pushforward.
pub fn transport_vs_pushforward(
    model: &dyn ChartedHomSpace<f64>,
    conn: &Connection,
    x: &Mat<f64>,
    tol: OdeTolerances,
) -> Result<f64> {
    let n = model.dim();
    let curve = Curve::ray(x.clone())?;
    let e = parallel_transport(model, conn, &curve, &Mat::identity(n), 1.0, tol)?;
    let push = model.act_jacobian(&expm_f64(x)?, &model.base_point())?;
    Ok((&e - &push).max_abs() / push.max_abs().max(1.0))
}

#[derive(Clone, Copy, Debug)]
pub struct ConnectionOptions {
    pub seed: u64,
    pub rays: usize,
    pub piecewise: usize,
    pub pieces: usize,
    /// Initial length of a random generator, in basis coefficients.
    pub scale: f64,
    pub fd_step: f64,
    pub ode: OdeTolerances,
    pub tol_parallel: f64,
    pub tol_lemma: f64,
    pub tol_transport: f64,
    pub tol_metric: f64,
}

impl Default for ConnectionOptions {
    fn default() -> Self {
        ConnectionOptions {
            seed: 0,
            rays: 6,
            piecewise: 4,
            pieces: 3,
            scale: 0.8,
            fd_step: 1e-4,
            ode: OdeTolerances::default(),
            tol_parallel: 1e-6,
            tol_lemma: 1e-8,
            tol_transport: 1e-7,
            tol_metric: 1e-7,
        }
    }
}

/// Which side of the gate a value must fall on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// `value ≤ tolerance`.
    Upper,
    /// `value > tolerance`.
    Lower,
}

/// One gated residual.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Check::with_bound(name, value, tolerance, Bound::Upper)
    }

    /// Passes when the value exceeds the threshold.
    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Check::with_bound(name, value, threshold, Bound::Lower)
    }

    pub fn with_bound(name: &str, value: f64, tolerance: f64, bound: Bound) -> Self {
        let passed = value.is_finite()
            && match bound {
                Bound::Upper => value <= tolerance,
                Bound::Lower => value > tolerance,
            };
        Check {
            name: name.to_string(),
            value,
            tolerance,
            bound,
            passed,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectionReport {
    pub checks: Vec<Check>,
    pub curves: usize,
    pub seed: u64,
    pub coverage: String,
}

impl ConnectionReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "checks": self.checks,
            "curves": self.curves,
            "seed": self.seed,
            "coverage": self.coverage,
        })
    }
}

const COVERAGE: &str = "sampled curves through o; the pushforward property is certified only along them";

fn random_element(rng: &mut ChaCha8Rng, basis: &[Mat<f64>], len: f64) -> Mat<f64> {
    let c: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    combine(basis, &c.iter().map(|v| v * len / norm).collect::<Vec<_>>())
}

/// Inner margin kept between sampled curves and the chart boundary.
pub const CURVE_MARGIN: f64 = 0.05;

fn curve_stays_in_chart(model: &dyn ChartedHomSpace<f64>, curve: &Curve) -> bool {
    let len = curve.piece_length();
    (0..curve.pieces()).all(|k| {
        (0..=32).all(|i| {
            curve
                .state(model, k, len * i as f64 / 32.0)
                .is_ok_and(|(_, p, _)| model.domain().contains_inner(&p, CURVE_MARGIN))
        })
    })
}

/// Seeded rays `exp(tX)·o` and piecewise concatenations with generators in
/// the span of `basis`.
pub fn curve_family(
    model: &dyn ChartedHomSpace<f64>,
    basis: &[Mat<f64>],
    opts: &ConnectionOptions,
) -> Result<Vec<Curve>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    let shapes = std::iter::repeat(1)
        .take(opts.rays)
        .chain(std::iter::repeat(opts.pieces).take(opts.piecewise));
    for pieces in shapes {
        let mut len = opts.scale;
        loop {
            let gens: Vec<Mat<f64>> = (0..pieces)
                .map(|_| random_element(&mut rng, basis, len * pieces as f64))
                .collect();
            let curve = Curve::new(gens)?;
            if curve_stays_in_chart(model, &curve) {
                out.push(curve);
                break;
            }
            len *= 0.5;
            if len < 1e-3 {
                return Err(Error::OutsideChart(model.base_point()));
            }
        }
    }
    Ok(out)
}

/// Orthonormal frame at `o` with the tangent space of the orbit first.
fn adapted_frame_f64(orbit: &OrbitData<f64>) -> Result<Mat<f64>> {
    crate::kostant::adapted_frame(orbit)
}

fn g_norm(g: &Mat<f64>, v: &[f64]) -> f64 {
    crate::mat::dot(v, &g.apply(v)).max(0.0).sqrt()
}

/// `(v − proj_T v, proj_T v)` with respect to `g`.
fn split(t: &Mat<f64>, g: &Mat<f64>, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let tg = &t.transpose() * g;
    let c = inverse(&(&tg * t))?.apply(&tg.apply(v));
    let proj = t.apply(&c);
    Ok((v.iter().zip(&proj).map(|(a, b)| a - b).collect(), proj))
}

/// Relative normal part of tangent columns and tangent part of normal
/// columns of `e` at `p = g·o`.
fn subbundle_residual(
    model: &dyn ChartedHomSpace<f64>,
    orbit: &OrbitData<f64>,
    g: &Mat<f64>,
    p: &[f64],
    e: &Mat<f64>,
) -> Result<f64> {
    let m = orbit.orbit_dim();
    let t0 = Mat::from_columns(
        &orbit.tangent.basis().iter().map(Mat::vectorize).collect::<Vec<_>>(),
    )?;
    let t = &model.act_jacobian(g, &model.base_point())? * &t0;
    let metric = model.metric(p)?;
    let mut worst: f64 = 0.0;
    for j in 0..e.cols() {
        let v = e.column(j);
        let (normal, tangent) = split(&t, &metric, &v)?;
        let off = if j < m { normal } else { tangent };
        worst = worst.max(g_norm(&metric, &off) / g_norm(&metric, &v).max(1e-300));
    }
    Ok(worst)
}

/// `|D_u Y*|_normal` at `p = g·o` over `u` in the tangent frame and `Y ∈ g`.
fn pointwise_tangency(
    model: &dyn ChartedHomSpace<f64>,
    orbit: &OrbitData<f64>,
    conn: &Connection,
    g: &Mat<f64>,
    p: &[f64],
) -> Result<f64> {
    let t0 = Mat::from_columns(
        &orbit.tangent.basis().iter().map(Mat::vectorize).collect::<Vec<_>>(),
    )?;
    let t = &model.act_jacobian(g, &model.base_point())? * &t0;
    let metric = model.metric(p)?;
    let gi = inverse(g)?;
    let mut worst: f64 = 0.0;
    for a in 0..t.cols() {
        let u = t.column(a);
        let w = conn.matrix(model, g, p, &u)?;
        for y in orbit.g.basis() {
            let y = conjugate(g, &gi, y);
            let yv = model.field(&y, p)?;
            let dy: Vec<f64> = model
                .field_jacobian(&y, p)?
                .apply(&u)
                .iter()
                .zip(w.apply(&yv))
                .map(|(a, b)| a + b)
                .collect();
            let (normal, _) = split(&t, &metric, &dy)?;
            let scale = g_norm(&metric, &u) * g_norm(&metric, &yv).max(1.0);
            worst = worst.max(g_norm(&metric, &normal) / scale.max(1e-300));
        }
    }
    Ok(worst)
}

/// `|∂_u g − ω(u)ᵀ g − g ω(u)|` at `p`.
fn metricity_residual(
    model: &dyn ChartedHomSpace<f64>,
    conn: &Connection,
    g: &Mat<f64>,
    p: &[f64],
    dirs: &Mat<f64>,
) -> Result<f64> {
    let metric = model.metric(p)?;
    let dg = model.metric_derivatives(p)?;
    let mut worst: f64 = 0.0;
    for a in 0..dirs.cols() {
        let u = dirs.column(a);
        let du = dg
            .iter()
            .zip(&u)
            .fold(Mat::zeros(p.len(), p.len()), |acc, (d, c)| &acc + &d.scale(c));
        let w = conn.matrix(model, g, p, &u)?;
        let r = &(&du - &(&w.transpose() * &metric)) - &(&metric * &w);
        worst = worst.max(r.max_abs() / metric.max_abs().max(1.0));
    }
    Ok(worst)
}

/// Components `(E⁻¹ A(E_b) E)` for the first `slots` columns `E_b`.
fn frame_components(
    tensor: &dyn Fn(&[f64]) -> Result<Mat<f64>>,
    e: &Mat<f64>,
    slots: usize,
) -> Result<Vec<f64>> {
    let ei = inverse(e)?;
    let mut out = Vec::new();
    for b in 0..slots {
        let a = tensor(&e.column(b))?;
        out.extend((&(&ei * &a) * e).into_data());
    }
    Ok(out)
}

fn richardson(f: &dyn Fn(f64) -> Result<Vec<f64>>, h: f64) -> Result<Vec<f64>> {
    let d = |h: f64| -> Result<Vec<f64>> {
        let a = f(h)?;
        let b = f(-h)?;
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect())
    };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Tensors along the orbit, `(g, p, u) ↦ A_u`, whose `D`-derivatives are
/// sampled.
type Tensor<'a> = Box<dyn Fn(&Mat<f64>, &[f64], &[f64]) -> Result<Mat<f64>> + 'a>;

struct CurveResiduals {
    subbundle: f64,
    pointwise: f64,
    metricity: f64,
    metric_drift: f64,
    derivatives: Vec<Vec<f64>>,
    /// `D(A₀ − A₁)` for the first two tensors.
    lemma: f64,
}

/// Walks `curve`, transporting an adapted frame by `conn` and sampling the
/// derivatives of `tensors` along it.
fn walk_curve(
    model: &dyn ChartedHomSpace<f64>,
    orbit: &OrbitData<f64>,
    conn: &Connection,
    curve: &Curve,
    tensors: &[Tensor],
    opts: &ConnectionOptions,
) -> Result<CurveResiduals> {
    let m = orbit.orbit_dim();
    let e0 = adapted_frame_f64(orbit)?;
    let gram0 = &(&e0.transpose() * &orbit.metric) * &e0;
    let len = curve.piece_length();
    let mut e = e0.clone();
    let mut res = CurveResiduals {
        subbundle: 0.0,
        pointwise: 0.0,
        metricity: 0.0,
        metric_drift: 0.0,
        derivatives: vec![Vec::new(); tensors.len()],
        lemma: 0.0,
    };
    for k in 0..curve.pieces() {
        let mut s_prev = 0.0;
        for frac in [1.0 / 3.0, 2.0 / 3.0, 1.0] {
            let s = len * frac;
            e = transport_in_piece(model, conn, curve, k, s_prev, s, &e, opts.ode)?;
            s_prev = s;
            let (g, p, _) = curve.state(model, k, s)?;
            res.subbundle = res.subbundle.max(subbundle_residual(model, orbit, &g, &p, &e)?);
            let gram = &(&e.transpose() * &model.metric(&p)?) * &e;
            res.metric_drift = res.metric_drift.max((&gram - &gram0).max_abs());
            if frac == 1.0 {
                continue;
            }
            res.pointwise = res.pointwise.max(pointwise_tangency(model, orbit, conn, &g, &p)?);
            let tangent = e.block(0, 0, e.rows(), m);
            res.metricity = res
                .metricity
                .max(metricity_residual(model, conn, &g, &p, &tangent)?);
            let frames = |h: f64| -> Result<(Mat<f64>, Vec<f64>, Mat<f64>)> {
                let y = rk4_step(
                    |t, y| transport_rhs(model, conn, curve, k, t, y),
                    s,
                    e.data(),
                    h,
                )?;
                let (g, p, _) = curve.state(model, k, s + h)?;
                Ok((g, p, Mat::from_vec(e.rows(), e.cols(), y)?))
            };
            let mut cache = Vec::new();
            for h in [opts.fd_step, -opts.fd_step, opts.fd_step / 2.0, -opts.fd_step / 2.0] {
                cache.push((h, frames(h)?));
            }
            for (ti, tensor) in tensors.iter().enumerate() {
                let comp = |h: f64| -> Result<Vec<f64>> {
                    let (_, (g, p, eh)) = cache
                        .iter()
                        .find(|(x, _)| *x == h)
                        .expect("cached step");
                    frame_components(&|u: &[f64]| tensor(g, p, u), eh, m)
                };
                res.derivatives[ti].push(max_abs(&richardson(&comp, opts.fd_step)?));
            }
            if tensors.len() >= 2 {
                let comp = |h: f64| -> Result<Vec<f64>> {
                    let (_, (g, p, eh)) = cache
                        .iter()
                        .find(|(x, _)| *x == h)
                        .expect("cached step");
                    let a = frame_components(&|u: &[f64]| tensors[0](g, p, u), eh, m)?;
                    let b = frame_components(&|u: &[f64]| tensors[1](g, p, u), eh, m)?;
                    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
                };
                res.lemma = res.lemma.max(max_abs(&richardson(&comp, opts.fd_step)?));
            }
        }
    }
    Ok(res)
}

fn worst(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(*b))
}

/// Residuals of the reductive extrinsic homogeneity criterion along the
/// seeded curve family: `TM` is `D`-parallel, `DΓ = 0`, and
/// `DΓ − DS = −DS̄ = 0`.
pub fn verify_extrinsic_homogeneity(
    model: &dyn ChartedHomSpace<f64>,
    orbit: &OrbitData<f64>,
    decomp: &DecompositionResult<f64>,
    opts: &ConnectionOptions,
) -> Result<ConnectionReport> {
    let m_bar = &decomp.m_bar;
    let d = Connection::orbit(decomp.m.basis(), m_bar);
    let tilde = Connection::canonical(m_bar);
    let gamma: Tensor = Box::new(|g, p, u| {
        Ok(&tilde.matrix(model, g, p, u)? - &d.matrix(model, g, p, u)?)
    });
    let s: Tensor = Box::new(|g, p, u| {
        Ok(&levi_civita_matrix(model, p, u)? - &d.matrix(model, g, p, u)?)
    });
    let s_bar: Tensor = Box::new(|g, p, u| {
        Ok(&levi_civita_matrix(model, p, u)? - &tilde.matrix(model, g, p, u)?)
    });
    let tensors = [gamma, s, s_bar];
    let curves = curve_family(model, decomp.m.basis(), opts)?;
    let mut agg = CurveResiduals {
        subbundle: 0.0,
        pointwise: pointwise_tangency(
            model,
            orbit,
            &d,
            &Mat::identity(model.algebra().n()),
            &model.base_point(),
        )?,
        metricity: 0.0,
        metric_drift: 0.0,
        derivatives: vec![Vec::new(); 3],
        lemma: 0.0,
    };
    for curve in &curves {
        let r = walk_curve(model, orbit, &d, curve, &tensors, opts)?;
        agg.subbundle = agg.subbundle.max(r.subbundle);
        agg.pointwise = agg.pointwise.max(r.pointwise);
        agg.metricity = agg.metricity.max(r.metricity);
        agg.metric_drift = agg.metric_drift.max(r.metric_drift);
        agg.lemma = agg.lemma.max(r.lemma);
        for (a, b) in agg.derivatives.iter_mut().zip(r.derivatives) {
            a.extend(b);
        }
    }
    let mut transport: f64 = 0.0;
    for curve in curves.iter().filter(|c| c.pieces() == 1) {
        transport = transport.max(transport_vs_pushforward(model, &d, &curve.generators[0], opts.ode)?);
    }
    let checks = vec![
        Check::new("tm_parallel", agg.subbundle.max(agg.pointwise), opts.tol_parallel),
        Check::new("d_gamma", worst(&agg.derivatives[0]), opts.tol_parallel),
        Check::new("d_s", worst(&agg.derivatives[1]), opts.tol_parallel),
        Check::new("d_s_bar", worst(&agg.derivatives[2]), opts.tol_lemma),
        Check::new("lemma_equivalence", agg.lemma, opts.tol_lemma),
        Check::new("transport_pushforward", transport, opts.tol_transport),
        Check::new("metricity", agg.metricity.max(agg.metric_drift), opts.tol_metric),
    ];
    Ok(ConnectionReport {
        checks,
        curves: curves.len(),
        seed: opts.seed,
        coverage: COVERAGE.into(),
    })
}

/// `m` with its first basis vector replaced by `M₁ + Z`, `Z ∈ h̄` generic.
pub fn corrupt_m(decomp: &DecompositionResult<f64>) -> Result<Subspace<f64>> {
    let hb = decomp.h_bar.basis();
    let z = combine(
        hb,
        &(0..hb.len()).map(|k| 1.0 / (k + 1) as f64).collect::<Vec<_>>(),
    );
    let mut basis = decomp.m.basis().to_vec();
    let first = basis
        .first_mut()
        .ok_or_else(|| Error::Input("m is zero".into()))?;
    *first = &*first + &z;
    let (r, c) = decomp.m.shape();
    Subspace::span(r, c, &basis)
}

/// Metricity of `∇̄ − S`, `D`-parallelism of `TM` and of `S`.
pub fn verify_homogeneous_structure(
    model: &dyn ChartedHomSpace<f64>,
    orbit: &OrbitData<f64>,
    tensor: &dyn StructureTensor,
    opts: &ConnectionOptions,
) -> Result<ConnectionReport> {
    let d = Connection::Structure(tensor);
    let s: Tensor = Box::new(|g, p, u| tensor.at(model, g, p, u));
    let o = model.base_point();
    let id = Mat::identity(model.algebra().n());
    let tangent = Mat::from_columns(
        &orbit.tangent.basis().iter().map(Mat::vectorize).collect::<Vec<_>>(),
    )?;
    let metricity_o = metricity_residual(model, &d, &id, &o, &tangent)?;
    let pointwise = pointwise_tangency(model, orbit, &d, &id, &o)?;
    let mut checks = vec![Check::new("metricity", metricity_o, opts.tol_metric)];
    if metricity_o > opts.tol_metric {
        checks.push(Check::new("tm_parallel", pointwise, opts.tol_parallel));
        return Ok(ConnectionReport {
            checks,
            curves: 0,
            seed: opts.seed,
            coverage: "stopped after the metricity check at o".into(),
        });
    }
    let gens = generators_off_isotropy(model, orbit)?;
    let curves = curve_family(model, &gens, opts)?;
    let (mut sub, mut pw, mut met, mut ds) = (0.0f64, pointwise, metricity_o, 0.0f64);
    for curve in &curves {
        let r = walk_curve(model, orbit, &d, curve, std::slice::from_ref(&s), opts)?;
        sub = sub.max(r.subbundle);
        pw = pw.max(r.pointwise);
        met = met.max(r.metricity).max(r.metric_drift);
        ds = ds.max(worst(&r.derivatives[0]));
    }
    checks[0] = Check::new("metricity", met, opts.tol_metric);
    checks.push(Check::new("tm_parallel", sub.max(pw), opts.tol_parallel));
    checks.push(Check::new("d_s", ds, opts.tol_parallel));
    Ok(ConnectionReport {
        checks,
        curves: curves.len(),
        seed: opts.seed,
        coverage: COVERAGE.into(),
    })
}

/// A complement of the isotropy inside `g` used to generate curves.
fn generators_off_isotropy(
    model: &dyn ChartedHomSpace<f64>,
    orbit: &OrbitData<f64>,
) -> Result<Vec<Mat<f64>>> {
    let h = crate::decomposition::isotropy_algebra(model, orbit.g.span())?;
    let mut out: Vec<Mat<f64>> = Vec::new();
    let mut acc = h;
    for x in orbit.g.basis() {
        if !acc.contains(x) {
            acc = acc.sum(&Subspace::span(x.rows(), x.cols(), std::slice::from_ref(x))?)?;
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// `∇̃S̄`, `∇̃R̄`, `∇̃ḡ` at `o` from frames pushed forward along
/// `exp(tX)·o`, `X ∈ m̄`. Requires `m̄` to act by isometries.
pub fn ambient_canonical_residuals(
    model: &dyn ChartedHomSpace<f64>,
    m_bar: &Subspace<f64>,
    opts: &ConnectionOptions,
) -> Result<Vec<Check>> {
    if let Some(x) = m_bar
        .basis()
        .iter()
        .find(|x| model.field_kind(x) != crate::model::FieldKind::Killing)
    {
        return Err(Error::Conformal(format!(
            "complement element with factor {}",
            model.conformal_factor(x)
        )));
    }
    let n = model.dim();
    let o = model.base_point();
    let e0 = crate::kostant::chart_orthonormal_frame(&model.metric(&o)?)?;
    let tilde = Connection::canonical(m_bar);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let (mut rs, mut rr, mut rg) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..opts.rays {
        let x = random_element(&mut rng, m_bar.basis(), opts.scale);
        let at = |t: f64| -> Result<(Mat<f64>, Vec<f64>, Mat<f64>)> {
            let g = expm_f64(&x.scale(&t))?;
            let p = model.act(&g, &o)?;
            let e = &model.act_jacobian(&g, &o)? * &e0;
            Ok((g, p, e))
        };
        let s_comp = |t: f64| -> Result<Vec<f64>> {
            let (g, p, e) = at(t)?;
            frame_components(
                &|u: &[f64]| {
                    Ok(&levi_civita_matrix(model, &p, u)? - &tilde.matrix(model, &g, &p, u)?)
                },
                &e,
                n,
            )
        };
        let r_comp = |t: f64| -> Result<Vec<f64>> {
            let (_, p, e) = at(t)?;
            let r = riemann(model, &p)?;
            let ei = inverse(&e)?;
            let mut out = Vec::with_capacity(n * n * n * n);
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let mut v = 0.0;
                            for i in 0..n {
                                for j in 0..n {
                                    for k in 0..n {
                                        for l in 0..n {
                                            v += ei.get(d, i)
                                                * r[i][j][k][l]
                                                * e.get(j, c)
                                                * e.get(k, a)
                                                * e.get(l, b);
                                        }
                                    }
                                }
                            }
                            out.push(v);
                        }
                    }
                }
            }
            Ok(out)
        };
        let g_comp = |t: f64| -> Result<Vec<f64>> {
            let (_, p, e) = at(t)?;
            Ok((&(&e.transpose() * &model.metric(&p)?) * &e).into_data())
        };
        rs = rs.max(max_abs(&richardson(&s_comp, opts.fd_step)?));
        rr = rr.max(max_abs(&richardson(&r_comp, opts.fd_step)?));
        rg = rg.max(max_abs(&richardson(&g_comp, opts.fd_step)?));
    }
    Ok(vec![
        Check::new("nabla_tilde_s_bar", rs, opts.tol_parallel),
        Check::new("nabla_tilde_r_bar", rr, opts.tol_parallel),
        Check::new("nabla_tilde_metric", rg, opts.tol_parallel),
    ])
}
