//! Kostant operators `K̄_X = ∇̄X*` at the base point and the bilinear forms
//! built from them.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::killing_scale;
use crate::linalg::{inverse, orthonormalize};
use crate::mat::Mat;
use crate::model::{identify_m_with_tangent, ChartedHomSpace, FieldKind, OrbitData};
use crate::scalar::{Mode, Scalar};
use crate::subspace::{GramForm, Subspace};

/// Float tolerance for skew-symmetry of Kostant operators.
pub const KOSTANT_SKEW_TOL: f64 = 1e-7;

/// Which multiple of `tr(AB)` plays the role of the invariant form on
/// `so(k)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormNormalization {
    /// `tr(AB)` on every `so(k)`.
    #[default]
    Trace,
    /// `(k − 2) tr(AB)`, with the trace form for `k ≤ 2`.
    Killing,
}

impl FormNormalization {
    pub fn scale<T: Scalar>(self, k: usize) -> T {
        match self {
            FormNormalization::Trace => T::one(),
            FormNormalization::Killing => T::from_i64(killing_scale(k)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KostantOperator<T> {
    pub element: Mat<T>,
    /// Matrix of `A ↦ ∇̄_A X*` in the chart frame at `o`.
    pub chart: Mat<T>,
    /// `ḡ_o` in the chart frame.
    pub metric: Mat<T>,
    /// `max |Kᵀ G + G K|`.
    pub skew_residual: f64,
}

impl<T: Scalar> KostantOperator<T> {
    /// Matrix in the frame whose columns are `frame`.
    pub fn in_frame(&self, frame: &Mat<T>) -> Result<Mat<T>> {
        Ok(&(&inverse(frame)? * &self.chart) * frame)
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        self.chart.apply(v)
    }
}

fn require_killing<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
) -> Result<()> {
    match model.field_kind(x) {
        FieldKind::Killing => Ok(()),
        FieldKind::Conformal(l) => Err(Error::Conformal(format!(
            "element with conformal factor {l} in {}",
            model.name()
        ))),
    }
}

pub fn kostant<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
) -> Result<KostantOperator<T>> {
    require_killing(model, x)?;
    let o = model.base_point();
    let chart = model.covariant_derivative(x, &o)?;
    let metric = model.metric(&o)?;
    let skew_residual = (&(&chart.transpose() * &metric) + &(&metric * &chart)).max_abs();
    Ok(KostantOperator {
        element: x.clone(),
        chart,
        metric,
        skew_residual,
    })
}

/// `ḡ_o`-orthonormal frame from Gram–Schmidt on the given columns, in order.
pub fn orthonormal_frame<T: Scalar>(columns: &[Vec<T>], metric: &Mat<T>) -> Result<Mat<T>> {
    Mat::from_columns(&orthonormalize(columns, metric)?)
}

/// Gram–Schmidt on the chart basis.
pub fn chart_orthonormal_frame<T: Scalar>(metric: &Mat<T>) -> Result<Mat<T>> {
    let n = metric.rows();
    let cols: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    orthonormal_frame(&cols, metric)
}

/// `K̄_X` in an adapted orthonormal frame (tangent vectors first).
#[derive(Clone, Debug)]
pub struct KostantBlocks<T> {
    /// `K_X` on `T_oM`.
    pub tangent: Mat<T>,
    /// Lower-left block `u ↦ II(X*_o, u)`.
    pub second_fundamental: Mat<T>,
    pub upper_right: Mat<T>,
    pub normal: Mat<T>,
    pub frame: Mat<T>,
}

impl<T: Scalar> KostantBlocks<T> {
    pub fn reassemble(&self) -> Mat<T> {
        let m = self.tangent.rows();
        let k = self.normal.rows();
        Mat::from_fn(m + k, m + k, |i, j| match (i < m, j < m) {
            (true, true) => self.tangent.get(i, j).clone(),
            (true, false) => self.upper_right.get(i, j - m).clone(),
            (false, true) => self.second_fundamental.get(i - m, j).clone(),
            (false, false) => self.normal.get(i - m, j - m).clone(),
        })
    }

    /// Largest entry outside the tangent block.
    pub fn off_tangent_magnitude(&self) -> f64 {
        self.second_fundamental
            .max_abs()
            .max(self.upper_right.max_abs())
            .max(self.normal.max_abs())
    }
}

pub fn adapted_frame<T: Scalar>(orbit: &OrbitData<T>) -> Result<Mat<T>> {
    let cols: Vec<Vec<T>> = orbit
        .tangent
        .basis()
        .iter()
        .chain(orbit.normal.basis())
        .map(Mat::vectorize)
        .collect();
    orthonormal_frame(&cols, &orbit.metric)
}

pub fn kostant_blocks<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    orbit: &OrbitData<T>,
    x: &Mat<T>,
) -> Result<KostantBlocks<T>> {
    if !orbit.g.contains(x) {
        return Err(Error::NotContained("orbit algebra element".into()));
    }
    let frame = adapted_frame(orbit)
        .map_err(|e| Error::Degenerate(format!("adapted frame at o: {e}")))?;
    let full = kostant(model, x)?.in_frame(&frame)?;
    let m = orbit.orbit_dim();
    let k = full.rows() - m;
    Ok(KostantBlocks {
        tangent: full.block(0, 0, m, m),
        second_fundamental: full.block(m, 0, k, m),
        upper_right: full.block(0, m, m, k),
        normal: full.block(m, m, k, k),
        frame,
    })
}

/// Tangent block `K_X` in the (not necessarily orthonormal) basis of
/// `T_oM`; similar to the orthonormal-frame block, so traces agree.
pub fn tangent_block<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    orbit: &OrbitData<T>,
    x: &Mat<T>,
) -> Result<Mat<T>> {
    let t = Mat::from_columns(
        &orbit
            .tangent
            .basis()
            .iter()
            .map(Mat::vectorize)
            .collect::<Vec<_>>(),
    )?;
    let g = &orbit.metric;
    let tg = &t.transpose() * g;
    let gram = &tg * &t;
    let k = kostant(model, x)?;
    Ok(&(&inverse(&gram)? * &tg) * &(&k.chart * &t))
}

/// Gram matrix of `φ̄(X, Y) = −B(K̄_X, K̄_Y)` on `elems`.
pub fn phi_bar_gram<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    elems: &[Mat<T>],
    norm: FormNormalization,
) -> Result<Mat<T>> {
    let ks = elems
        .iter()
        .map(|x| kostant(model, x).map(|k| k.chart))
        .collect::<Result<Vec<_>>>()?;
    Ok(neg_trace_gram(&ks, norm.scale::<T>(model.dim())))
}

fn neg_trace_gram<T: Scalar>(ops: &[Mat<T>], scale: T) -> Mat<T> {
    let n = ops.len();
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = -((&ops[i] * &ops[j]).trace() * scale.clone());
            g.set(i, j, v.clone());
            g.set(j, i, v);
        }
    }
    g
}

pub fn phi_bar<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    x: &Mat<T>,
    y: &Mat<T>,
    norm: FormNormalization,
) -> Result<T> {
    let g = phi_bar_gram(model, &[x.clone(), y.clone()], norm)?;
    Ok(g.get(0, 1).clone())
}

/// Gram matrix of `φ(X, Y) = −B(K_X, K_Y)` on `elems ⊂ g`, with `B` on
/// `so(T_oM)`.
pub fn phi_orbit_gram<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    orbit: &OrbitData<T>,
    elems: &[Mat<T>],
    norm: FormNormalization,
) -> Result<Mat<T>> {
    let ks = elems
        .iter()
        .map(|x| {
            if !orbit.g.contains(x) {
                return Err(Error::NotContained("orbit algebra element".into()));
            }
            tangent_block(model, orbit, x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(neg_trace_gram(&ks, norm.scale::<T>(orbit.orbit_dim())))
}

pub fn phi_orbit<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    orbit: &OrbitData<T>,
    x: &Mat<T>,
    y: &Mat<T>,
    norm: FormNormalization,
) -> Result<T> {
    let g = phi_orbit_gram(model, orbit, &[x.clone(), y.clone()], norm)?;
    Ok(g.get(0, 1).clone())
}

/// `ψ = φ̄|h̄×h̄ + φ*g_o|m̄×m̄`, with `h̄ ⟂ m̄`, on the basis `h̄ ∪ m̄`.
pub fn psi_form<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    h_bar: &Subspace<T>,
    m_bar: &Subspace<T>,
    norm: FormNormalization,
) -> Result<GramForm<T>> {
    let id = identify_m_with_tangent(model, m_bar)?;
    let o = model.base_point();
    let pulled = id.pullback_metric(&model.metric(&o)?);
    let hg = phi_bar_gram(model, h_bar.basis(), norm)?;
    let a = h_bar.dim();
    let b = m_bar.dim();
    let gram = Mat::from_fn(a + b, a + b, |i, j| match (i < a, j < a) {
        (true, true) => hg.get(i, j).clone(),
        (false, false) => pulled.get(i - a, j - a).clone(),
        _ => T::zero(),
    });
    let basis: Vec<Mat<T>> = h_bar.basis().iter().chain(m_bar.basis()).cloned().collect();
    GramForm::new(basis, gram)
}

/// Memo of Gram matrices keyed by a caller-chosen label.
#[derive(Debug, Default)]
pub struct GramCache<T> {
    entries: Mutex<HashMap<String, Mat<T>>>,
}

impl<T: Scalar> GramCache<T> {
    pub fn new() -> Self {
        GramCache {
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn get_or_compute(
        &self,
        key: &str,
        compute: impl FnOnce() -> Result<Mat<T>>,
    ) -> Result<Mat<T>> {
        if let Some(g) = self.entries.lock().expect("cache lock").get(key) {
            return Ok(g.clone());
        }
        let g = compute()?;
        self.entries
            .lock()
            .expect("cache lock")
            .insert(key.to_string(), g.clone());
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Whether a skew residual passes in the scalar's mode.
pub fn skew_ok<T: Scalar>(residual: f64) -> bool {
    match T::MODE {
        Mode::Exact => residual == 0.0,
        Mode::Float => residual < KOSTANT_SKEW_TOL,
    }
}
