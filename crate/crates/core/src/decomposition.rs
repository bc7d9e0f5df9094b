//! Isotropy extraction, the ambient complement `m̄ = h̄^⊥`, the induced orbit
//! decomposition `g = h ⊕ m` and the normal complement `n`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kostant::{kostant_blocks, phi_bar_gram, phi_orbit_gram, psi_form, FormNormalization};
use crate::lie::{ad_invariance_check, AdInvariance, MatrixLieAlgebra};
use crate::linalg::{is_positive_definite, nullspace, symmetric_eigenvalues, RANK_CUTOFF};
use crate::mat::Mat;
use crate::model::{column, evaluate_at_o, ChartedHomSpace, FieldKind, OrbitData};
use crate::scalar::{Mode, Scalar};
use crate::subspace::{orth_complement, GramForm, Subspace};

/// Sampled group elements per conjugation test.
pub const GROUP_SAMPLES: usize = 4;
/// Float gate for invariance and span residuals.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Kernel of `X ↦ X*_o` on `sub`.
pub fn isotropy_algebra<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    sub: &Subspace<T>,
) -> Result<Subspace<T>> {
    let (r, c) = sub.shape();
    if sub.dim() == 0 {
        return Ok(Subspace::zero(r, c));
    }
    let cols = evaluate_at_o(model, sub.basis())?;
    let eval = Mat::from_columns(&cols)?;
    let kernel = nullspace(&eval, RANK_CUTOFF);
    let vectors: Vec<Mat<T>> = kernel.iter().map(|k| sub.combine(k)).collect();
    Subspace::span(r, c, &vectors)
}

fn all_killing<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(model: &M, elems: &[Mat<T>]) -> bool {
    elems.iter().all(|x| model.field_kind(x) == FieldKind::Killing)
}

/// Smallest eigenvalue of a Gram block, in floating point.
pub fn min_eigenvalue<T: Scalar>(gram: &Mat<T>) -> f64 {
    symmetric_eigenvalues(&gram.to_f64())
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

#[derive(Clone, Debug)]
pub struct AmbientComplement<T> {
    pub m_bar: Subspace<T>,
    pub phi_bar: GramForm<T>,
    pub h_bar_min_eigenvalue: f64,
    pub invariance: AdInvariance,
}

/// `m̄ = h̄^⊥` with respect to `φ̄`, certified `Ad(H̄)`-invariant.
pub fn ambient_reductive_complement<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    h_bar: &Subspace<T>,
    norm: FormNormalization,
) -> Result<AmbientComplement<T>> {
    let alg = model.algebra();
    if !all_killing(model, alg.basis()) {
        return Err(Error::Conformal(
            "the ambient algebra has conformal directions; supply m-bar explicitly".into(),
        ));
    }
    let gram = phi_bar_gram(model, alg.basis(), norm)?;
    let form = GramForm::new(alg.basis().to_vec(), gram)?;
    let hg = form.restrict(h_bar.basis())?;
    if h_bar.dim() > 0 && !is_positive_definite(&hg) {
        return Err(Error::Degenerate("phi-bar is not definite on h-bar".into()));
    }
    let comp = orth_complement(h_bar, alg.span(), &form)?;
    if !comp.nondegenerate {
        return Err(Error::Degenerate("phi-bar is degenerate on h-bar".into()));
    }
    let invariance = ad_invariance_check(h_bar, &comp.space, alg, GROUP_SAMPLES)?;
    Ok(AmbientComplement {
        m_bar: comp.space,
        phi_bar: form,
        h_bar_min_eigenvalue: min_eigenvalue(&hg),
        invariance,
    })
}

/// Pass/fail gate for residuals in the scalar's mode.
pub fn gate<T: Scalar>(residual: f64, tol: f64) -> bool {
    match T::MODE {
        Mode::Exact => residual == 0.0,
        Mode::Float => residual <= tol,
    }
}

#[derive(Clone, Debug)]
pub struct Certificates {
    /// `(h̄, m̄)`.
    pub ambient: AdInvariance,
    /// `(h, m)`.
    pub orbit: AdInvariance,
    /// `(h, n)`.
    pub normal: AdInvariance,
    /// `(h̄, m + n)`; expected to fail in general.
    pub ambient_split: AdInvariance,
    pub h_bar_min_eigenvalue: f64,
    pub h_min_eigenvalue: f64,
    pub g_direct: bool,
    pub ambient_direct: bool,
    pub three_way_direct: bool,
    /// `{X*_o : X ∈ n}` against `(T_oM)^⊥`.
    pub normal_match_residual: f64,
    /// `h^⊥ = h^{⊥_h̄} + m̄` when `m̄` is `φ̄`-orthogonal to `h̄`; `None`
    /// when `φ̄` is not available on all of `ḡ`.
    pub proof_identity: Option<bool>,
    /// `m` equals `{X ∈ g : φ̄(X, h) = 0}` computed directly.
    pub m_direct: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct DecompositionResult<T> {
    pub h_bar: Subspace<T>,
    pub m_bar: Subspace<T>,
    pub h: Subspace<T>,
    pub m: Subspace<T>,
    pub n: Subspace<T>,
    /// `h^{⊥_h̄}`, the orthogonal of `h` inside `h̄`.
    pub h_perp_in_h_bar: Subspace<T>,
    pub psi: GramForm<T>,
    pub certificates: Certificates,
}

impl<T: Scalar> DecompositionResult<T> {
    /// All gated certificates pass.
    pub fn passes(&self, tol: f64) -> bool {
        let c = &self.certificates;
        let inv = |a: &AdInvariance| match T::MODE {
            Mode::Exact => a.bracket_residual == 0.0 && a.conjugation_residual == 0.0,
            Mode::Float => a.invariant(tol),
        };
        inv(&c.ambient)
            && inv(&c.orbit)
            && inv(&c.normal)
            && c.g_direct
            && c.ambient_direct
            && c.three_way_direct
            && c.h_bar_min_eigenvalue > 0.0
            && gate::<T>(c.normal_match_residual, tol)
            && c.proof_identity != Some(false)
            && c.m_direct != Some(false)
    }

    pub fn to_json(&self) -> Value {
        let basis = |s: &Subspace<T>| s.basis().iter().map(Mat::to_json).collect::<Vec<_>>();
        let c = &self.certificates;
        let inv = |a: &AdInvariance| {
            json!({
                "bracket_residual": a.bracket_residual,
                "conjugation_residual": a.conjugation_residual,
                "series_remainder": a.series_remainder,
            })
        };
        json!({
            "h_bar": basis(&self.h_bar),
            "m_bar": basis(&self.m_bar),
            "h": basis(&self.h),
            "m": basis(&self.m),
            "n": basis(&self.n),
            "h_perp_in_h_bar": basis(&self.h_perp_in_h_bar),
            "psi": self.psi.gram().to_json(),
            "certificates": {
                "ad_invariance": {
                    "h_bar_m_bar": inv(&c.ambient),
                    "h_m": inv(&c.orbit),
                    "h_n": inv(&c.normal),
                    "h_bar_m_plus_n": inv(&c.ambient_split),
                },
                "invariance_level": "Lie-algebra level only",
                "h_bar_min_eigenvalue": c.h_bar_min_eigenvalue,
                "h_min_eigenvalue": c.h_min_eigenvalue,
                "g_direct": c.g_direct,
                "ambient_direct": c.ambient_direct,
                "three_way_direct": c.three_way_direct,
                "normal_match_residual": c.normal_match_residual,
                "proof_identity": c.proof_identity,
                "m_direct": c.m_direct,
            }
        })
    }
}

/// `g = h ⊕ m` with `m = (h^{⊥_h̄} + m̄) ∩ g`, plus `n = (h̄ + m)^{⊥_ψ}` and
/// all certificates.
pub fn induced_orbit_decomposition<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    orbit: &OrbitData<T>,
    h_bar: &Subspace<T>,
    m_bar: &Subspace<T>,
    norm: FormNormalization,
) -> Result<DecompositionResult<T>> {
    let alg = model.algebra();
    let g = orbit.g.span();
    let h = isotropy_algebra(model, g)?;
    if !h_bar.contains_subspace(&h) {
        return Err(Error::Certificate {
            name: "isotropy of g inside h-bar".into(),
            residual: 1.0,
        });
    }
    let hb_form = GramForm::new(h_bar.basis().to_vec(), phi_bar_gram(model, h_bar.basis(), norm)?)?;
    let h_bar_min_eigenvalue = min_eigenvalue(hb_form.gram());
    let h_perp = orth_complement(&h, h_bar, &hb_form)?;
    if !h_perp.nondegenerate {
        return Err(Error::Degenerate("phi-bar is degenerate on h".into()));
    }
    let h_perp_in_h_bar = h_perp.space;
    let h_perp_full = h_perp_in_h_bar.sum(m_bar)?;
    let m = h_perp_full.intersect(g)?;
    let h_min_eigenvalue = min_eigenvalue(&hb_form.restrict(h.basis())?);

    let (proof_identity, m_direct) = if all_killing(model, alg.basis()) {
        let full = GramForm::new(alg.basis().to_vec(), phi_bar_gram(model, alg.basis(), norm)?)?;
        let direct = orth_complement(&h, alg.span(), &full)?.space;
        let canonical = m_bar
            .basis()
            .iter()
            .all(|x| h_bar.basis().iter().all(|y| full.eval(x, y).map_or(false, |v| v.negligible(1e-9, 1.0))));
        let identity = canonical.then(|| direct.same_span(&h_perp_full));
        (identity, canonical.then(|| direct.intersect(g).map_or(false, |d| d.same_span(&m))))
    } else {
        (None, None)
    };

    let psi = psi_form(model, h_bar, m_bar, norm)?;
    let hm = h_bar.sum(&m)?;
    let n = orth_complement(&hm, alg.span(), &psi)?.space;

    let normal_images: Vec<Mat<T>> = evaluate_at_o(model, n.basis())?
        .iter()
        .map(|v| column(v))
        .collect();
    let normal_span = Subspace::span(model.dim(), 1, &normal_images)?;
    let normal_match_residual = span_mismatch(&normal_span, &orbit.normal)?;

    let certificates = Certificates {
        ambient: ad_invariance_check(h_bar, m_bar, alg, GROUP_SAMPLES)?,
        orbit: ad_invariance_check(&h, &m, alg, GROUP_SAMPLES)?,
        normal: ad_invariance_check(&h, &n, alg, GROUP_SAMPLES)?,
        ambient_split: ad_invariance_check(h_bar, &m.sum(&n)?, alg, GROUP_SAMPLES)?,
        h_bar_min_eigenvalue,
        h_min_eigenvalue,
        g_direct: h.dim() + m.dim() == g.dim() && Subspace::is_direct(&[&h, &m]),
        ambient_direct: h_bar.dim() + m_bar.dim() == alg.dim()
            && Subspace::is_direct(&[h_bar, m_bar]),
        three_way_direct: h_bar.dim() + m.dim() + n.dim() == alg.dim()
            && Subspace::is_direct(&[h_bar, &m, &n]),
        normal_match_residual,
        proof_identity,
        m_direct,
    };
    Ok(DecompositionResult {
        h_bar: h_bar.clone(),
        m_bar: m_bar.clone(),
        h,
        m,
        n,
        h_perp_in_h_bar,
        psi,
        certificates,
    })
}

/// Zero iff the spans coincide: dimension mismatch counts as 1, otherwise
/// the worst containment residual in both directions.
pub fn span_mismatch<T: Scalar>(a: &Subspace<T>, b: &Subspace<T>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Ok(1.0);
    }
    let mut worst: f64 = 0.0;
    for x in a.basis() {
        worst = worst.max(b.residual(x)?);
    }
    for x in b.basis() {
        worst = worst.max(a.residual(x)?);
    }
    Ok(worst)
}

/// `n = (h̄ + m)^{⊥_ψ}`.
pub fn normal_complement<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    h_bar: &Subspace<T>,
    m_bar: &Subspace<T>,
    m: &Subspace<T>,
    norm: FormNormalization,
) -> Result<Subspace<T>> {
    let psi = psi_form(model, h_bar, m_bar, norm)?;
    Ok(orth_complement(&h_bar.sum(m)?, model.algebra().span(), &psi)?.space)
}

#[derive(Clone, Debug)]
pub struct PrincipalReport {
    /// Largest entry outside the tangent block of `K̄_X`, `X ∈ h`.
    pub slice_residual: f64,
    pub slice_trivial: bool,
    /// `max |φ(X, Y) − φ̄(X, Y)|`, `X ∈ h`, `Y ∈ g`.
    pub prin_residual: f64,
    /// Same comparison with the `(k − 2)`-scaled Killing forms.
    pub killing_residual: f64,
    /// `h^{⊥_φ} ∩ g = m`.
    pub h_perp_phi_is_m: bool,
    pub normalization: FormNormalization,
}

impl PrincipalReport {
    pub fn to_json(&self) -> Value {
        json!({
            "slice_residual": self.slice_residual,
            "slice_trivial": self.slice_trivial,
            "prin_residual": self.prin_residual,
            "killing_normalization_residual": self.killing_residual,
            "h_perp_phi_is_m": self.h_perp_phi_is_m,
            "normalization": self.normalization,
        })
    }
}

fn cross_residual<T: Scalar>(a: &Mat<T>, b: &Mat<T>, rows: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..rows {
        for j in 0..a.cols() {
            worst = worst.max((a.get(i, j).clone() - b.get(i, j).clone()).magnitude());
        }
    }
    worst
}

/// Slice-representation triviality and `φ = φ̄` on `h × g`.
pub fn principal_orbit_report<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    orbit: &OrbitData<T>,
    decomp: &DecompositionResult<T>,
    norm: FormNormalization,
) -> Result<PrincipalReport> {
    let mut slice_residual: f64 = 0.0;
    for x in decomp.h.basis() {
        slice_residual = slice_residual.max(kostant_blocks(model, orbit, x)?.off_tangent_magnitude());
    }
    let slice_trivial = gate::<T>(slice_residual, 1e-9);
    // basis of g with h first
    let mut elems: Vec<Mat<T>> = decomp.h.basis().to_vec();
    elems.extend(decomp.m.basis().iter().cloned());
    let k = decomp.h.dim();
    let bar = phi_bar_gram(model, &elems, norm)?;
    let orb = phi_orbit_gram(model, orbit, &elems, norm)?;
    let prin_residual = cross_residual(&orb, &bar, k);
    let killing_residual = cross_residual(
        &phi_orbit_gram(model, orbit, &elems, FormNormalization::Killing)?,
        &phi_bar_gram(model, &elems, FormNormalization::Killing)?,
        k,
    );
    let (r, c) = decomp.h.shape();
    let g_span = Subspace::span(r, c, &elems)?;
    let form = GramForm::new(elems, orb)?;
    let h_perp_phi = orth_complement(&decomp.h, &g_span, &form)?.space;
    Ok(PrincipalReport {
        slice_residual,
        slice_trivial,
        prin_residual,
        killing_residual,
        h_perp_phi_is_m: h_perp_phi.same_span(&decomp.m),
        normalization: norm,
    })
}

/// Convenience: `h̄` of a model.
pub fn ambient_isotropy<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
) -> Result<Subspace<T>> {
    isotropy_algebra(model, model.algebra().span())
}

/// `m̄` from `φ̄` when available, otherwise the supplied fallback.
pub fn choose_m_bar<T: Scalar, M: ChartedHomSpace<T> + ?Sized>(
    model: &M,
    h_bar: &Subspace<T>,
    fallback: Option<&Subspace<T>>,
    norm: FormNormalization,
) -> Result<Subspace<T>> {
    match fallback {
        Some(m) => Ok(m.clone()),
        None => Ok(ambient_reductive_complement(model, h_bar, norm)?.m_bar),
    }
}

/// The subgroup algebra as a standalone Lie algebra.
pub fn orbit_algebra<T: Scalar>(name: &str, span: Subspace<T>) -> Result<MatrixLieAlgebra<T>> {
    MatrixLieAlgebra::from_subspace(name, span)
}
