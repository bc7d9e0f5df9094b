//! Acceptance criteria 1–12, one line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use reductive::connections::{
    ambient_canonical_residuals, corrupt_m, curve_family, transport_vs_pushforward,
    verify_extrinsic_homogeneity, Connection, ConnectionOptions,
};
use reductive::decomposition::{
    induced_orbit_decomposition, min_eigenvalue, principal_orbit_report, DecompositionResult,
};
use reductive::gallery::{self, Fixture};
use reductive::kostant::{chart_orthonormal_frame, kostant, phi_bar_gram, FormNormalization};
use reductive::lie::bracket;
use reductive::model::{fd_christoffel, fd_field_jacobian, sample_points, FieldKind, FD_STEP};
use reductive::report::{run_verify, RunConfig};
use reductive::{Exact, Mat, Mode, OrbitData, Scalar, Subspace};

const NS: [usize; 3] = [3, 4, 5];
const EXACT_RUNTIME: Duration = Duration::from_secs(5);
const DEFINITE_MARGIN: f64 = 1e-6;
const SKEW_TOL: f64 = 1e-7;
const FRAME_TOL: f64 = 1e-8;
const ISOTROPY_TOL: f64 = 1e-7;
const TRANSPORT_TOL: f64 = 1e-7;
const PARALLEL_TOL: f64 = 1e-6;
const LEMMA_TOL: f64 = 1e-8;
const NEGATIVE_MIN: f64 = 1e-2;
const AMBIENT_TOL: f64 = 1e-6;
const PRIN_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;
const ORACLE_POINTS: usize = 20;
const SUITE_BUDGET: Duration = Duration::from_secs(180);

type Outcome = Result<String, String>;

struct Setup<T: Scalar> {
    f: Fixture<T>,
    orbit: OrbitData<T>,
    d: DecompositionResult<T>,
}

fn setup<T: Scalar>(name: &str, n: usize) -> Setup<T> {
    let f = gallery::build::<T>(name, n).expect("fixture");
    let orbit = OrbitData::new(f.model.as_ref(), f.g.clone()).expect("orbit");
    let d = induced_orbit_decomposition(
        f.model.as_ref(),
        &orbit,
        &f.h_bar,
        &f.m_bar,
        FormNormalization::Trace,
    )
    .expect("decomposition");
    Setup { f, orbit, d }
}

fn all_float() -> Vec<Setup<f64>> {
    NS.iter()
        .flat_map(|&n| gallery::FIXTURE_NAMES.iter().map(move |name| setup::<f64>(name, n)))
        .collect()
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn entry(size: usize, pairs: &[(usize, usize, i64)]) -> Mat<Exact> {
    let mut m = Mat::zeros(size, size);
    for &(i, j, v) in pairs {
        m.set(i, j, Exact::from_i64(v));
    }
    m
}

/// The displayed horosphere `m`: `B ∈ so(n−1)` in the leading block, `v`
/// in the `(p, x)` row and `−v` in the `(x, q)` column.
fn horosphere_display_m(n: usize) -> Vec<Mat<Exact>> {
    let size = n + 1;
    let (p, q) = (n - 1, n);
    let mut out = Vec::new();
    for i in 0..n - 1 {
        for j in i + 1..n - 1 {
            out.push(entry(size, &[(i, j, 1), (j, i, -1)]));
        }
    }
    for k in 0..n - 1 {
        out.push(entry(size, &[(p, k, 1), (k, q, -1)]));
    }
    out
}

fn c1() -> Outcome {
    let mut lines = Vec::new();
    for n in NS {
        let t = Instant::now();
        let s = setup::<Exact>("horosphere", n);
        let dt = t.elapsed();
        let size = n + 1;
        let g_span = Subspace::span(size, size, &horosphere_display_m(n)).unwrap();
        let m_display = g_span.intersect(&s.d.h.sum(&s.d.m).unwrap()).unwrap();
        let m_ok = s.d.m.same_span(&s.f.m) && m_display.same_span(&g_span);
        let h_part = Subspace::span(size, size, &horosphere_display_m(n)[..(n - 1) * (n - 2) / 2]).unwrap();
        let trans = Subspace::span(size, size, &horosphere_display_m(n)[(n - 1) * (n - 2) / 2..]).unwrap();
        let m_exact = s.d.m.same_span(&trans) && s.d.h.same_span(&h_part);
        let diag = entry(size, &[(n - 1, n - 1, 1), (n, n, -1)]);
        let n_ok = s.d.n.same_span(&Subspace::span(size, size, &[diag]).unwrap());
        if !(m_ok && m_exact && n_ok && dt < EXACT_RUNTIME) {
            return Err(format!("n={n}: m {m_exact}, n {n_ok}, {dt:.2?}"));
        }
        lines.push(format!("n={n} {:.2?}", dt));
    }
    Ok(format!("m and n span-equal to the displays ({})", lines.join(", ")))
}

fn c2() -> Outcome {
    for n in NS {
        let s = setup::<Exact>("punctured_euclidean", n);
        let size = n + 1;
        let vs: Vec<Mat<Exact>> = (0..n - 1).map(|k| entry(size, &[(0, k + 1, 1), (k + 1, 0, -1)])).collect();
        let m_ok = s.d.m.same_span(&Subspace::span(size, size, &vs).unwrap());
        let n_ok = s
            .d
            .n
            .same_span(&Subspace::span(size, size, &[entry(size, &[(n, n, 1)])]).unwrap());
        if !(m_ok && n_ok) {
            return Err(format!("n={n}: m {m_ok}, n {n_ok}"));
        }
    }
    Ok("m = v-block space, n = R diag(0_n, 1) for n = 3, 4, 5".into())
}

fn c3() -> Outcome {
    let mut worst = f64::INFINITY;
    for s in all_float() {
        let g = phi_bar_gram(s.f.model.as_ref(), s.f.h_bar.basis(), FormNormalization::Trace).unwrap();
        worst = worst.min(min_eigenvalue(&g));
    }
    ensure(worst > DEFINITE_MARGIN, format!("min eigenvalue of phi-bar on h-bar {worst:.3e} > {DEFINITE_MARGIN:e}"))
}

fn c4() -> Outcome {
    let (mut skew, mut frame): (f64, f64) = (0.0, 0.0);
    for s in all_float() {
        let m = s.f.model.as_ref();
        let e = chart_orthonormal_frame(&m.metric(&m.base_point()).unwrap()).unwrap();
        let iso: Vec<Mat<f64>> = m
            .algebra()
            .basis()
            .iter()
            .filter(|x| m.field_kind(x) == FieldKind::Killing)
            .cloned()
            .collect();
        let ks: Vec<_> = iso.iter().map(|x| kostant(m, x).unwrap()).collect();
        let on: Vec<Mat<f64>> = ks.iter().map(|k| k.in_frame(&e).unwrap()).collect();
        for (k, o) in ks.iter().zip(&on) {
            skew = skew.max(k.skew_residual);
            frame = frame.max((&o.transpose() + o).max_abs());
        }
        for i in 0..ks.len() {
            for j in 0..ks.len() {
                let a = (&ks[i].chart * &ks[j].chart).trace();
                let b = (&on[i] * &on[j]).trace();
                frame = frame.max((a - b).abs());
            }
        }
    }
    ensure(
        skew < SKEW_TOL && frame < FRAME_TOL,
        format!("max |KᵀG + GK| {skew:.3e} < {SKEW_TOL:e}; frame dependence {frame:.3e} < {FRAME_TOL:e}"),
    )
}

fn c5() -> Outcome {
    let (mut ours, mut literal): (f64, f64) = (0.0, 0.0);
    for s in all_float() {
        let m = s.f.model.as_ref();
        let o = m.base_point();
        for x in s.f.h_bar.basis() {
            let k = kostant(m, x).unwrap();
            for y in m.algebra().basis() {
                let lhs = k.apply(&m.field(y, &o).unwrap());
                let xy = m.field(&bracket(x, y).unwrap(), &o).unwrap();
                for (a, b) in lhs.iter().zip(&xy) {
                    ours = ours.max((a - b).abs());
                    literal = literal.max((a + b).abs());
                }
            }
        }
    }
    ensure(
        ours < ISOTROPY_TOL,
        format!(
            "|K_X(Y*_o) − [X,Y]*_o| {ours:.3e} < {ISOTROPY_TOL:e} (left-action convention; literal [Y,X] form residual {literal:.3e})"
        ),
    )
}

fn c6() -> Outcome {
    let mut split = f64::INFINITY;
    for n in NS {
        for name in gallery::FIXTURE_NAMES {
            let s = setup::<Exact>(name, n);
            let c = &s.d.certificates;
            if c.orbit.bracket_residual != 0.0 || c.normal.bracket_residual != 0.0 {
                return Err(format!("{name} n={n}: [h,m] or [h,n] not contained"));
            }
            if name == "horosphere" {
                split = split.min(c.ambient_split.bracket_residual);
            }
        }
    }
    ensure(
        split > 0.0,
        format!("[h,m] ⊆ m, [h,n] ⊆ n exactly; (m+n) not h-bar-invariant on the horosphere (residual {split:.3e})"),
    )
}

fn c7() -> Outcome {
    let opts = ConnectionOptions::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for s in all_float() {
        let m = s.f.model.as_ref();
        let conn = Connection::orbit(s.d.m.basis(), &s.d.m_bar);
        for c in curve_family(m, s.d.m.basis(), &opts).unwrap().iter().filter(|c| c.pieces() == 1) {
            worst = worst.max(transport_vs_pushforward(m, &conn, &c.generators[0], opts.ode).unwrap());
            count += 1;
        }
    }
    ensure(
        worst < TRANSPORT_TOL && count == 6 * 9,
        format!("{count} rays, max |τ − (L_exp X)_*| {worst:.3e} < {TRANSPORT_TOL:e}"),
    )
}

fn c8() -> Outcome {
    let opts = ConnectionOptions::default();
    let (mut tm, mut dg, mut lemma) = (0.0f64, 0.0f64, 0.0f64);
    let mut negative = f64::INFINITY;
    let mut skipped = Vec::new();
    for s in all_float() {
        let m = s.f.model.as_ref();
        let r = verify_extrinsic_homogeneity(m, &s.orbit, &s.d, &opts).unwrap();
        tm = tm.max(r.get("tm_parallel").unwrap().value);
        dg = dg.max(r.get("d_gamma").unwrap().value);
        lemma = lemma.max(r.get("lemma_equivalence").unwrap().value);
        if s.d.h_perp_in_h_bar.dim() == 0 {
            skipped.push(format!("{} n={}", s.f.name, s.f.n));
            continue;
        }
        let mut bad = s.d.clone();
        bad.m = corrupt_m(&s.d).unwrap();
        let r = verify_extrinsic_homogeneity(m, &s.orbit, &bad, &opts).unwrap();
        negative = negative.min(r.get("tm_parallel").unwrap().value);
    }
    ensure(
        tm < PARALLEL_TOL && dg < PARALLEL_TOL && lemma < LEMMA_TOL && negative > NEGATIVE_MIN,
        format!(
            "TM-parallel {tm:.3e}, DΓ {dg:.3e} < {PARALLEL_TOL:e}; |DΓ − DS| {lemma:.3e} < {LEMMA_TOL:e}; corrupted m {negative:.3e} > {NEGATIVE_MIN:e} (no corruption leaves g for: {})",
            skipped.join(", ")
        ),
    )
}

fn c9() -> Outcome {
    let opts = ConnectionOptions::default();
    let mut worst: f64 = 0.0;
    for n in NS {
        let s = setup::<f64>("horosphere", n);
        for c in ambient_canonical_residuals(s.f.model.as_ref(), &s.f.m_bar, &opts).unwrap() {
            worst = worst.max(c.value);
        }
    }
    ensure(worst < AMBIENT_TOL, format!("max of |∇̃S̄|, |∇̃R̄|, |∇̃ḡ| on RH(n) {worst:.3e} < {AMBIENT_TOL:e}"))
}

fn c10() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in NS {
        for name in gallery::FIXTURE_NAMES {
            let s = setup::<Exact>(name, n);
            let r = principal_orbit_report(s.f.model.as_ref(), &s.orbit, &s.d, FormNormalization::Trace).unwrap();
            if !r.h_perp_phi_is_m || !r.slice_trivial {
                return Err(format!("{name} n={n}: h^perp_phi ∩ g = m is {}", r.h_perp_phi_is_m));
            }
            worst = worst.max(r.prin_residual);
        }
    }
    ensure(
        worst < PRIN_TOL,
        format!("max |φ − φ̄| on h × g {worst:.3e} < {PRIN_TOL:e}; h^⊥φ ∩ g = m exactly"),
    )
}

fn c11() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in all_float() {
        let m = s.f.model.as_ref();
        for p in sample_points(m, ORACLE_POINTS, 2024) {
            let exact = m.christoffel(&p).unwrap();
            let fd = fd_christoffel(m, &p, FD_STEP).unwrap();
            for (a, b) in exact.iter().zip(&fd) {
                worst = worst.max((a - b).max_abs() / a.max_abs().max(1.0));
            }
            for x in m.algebra().basis() {
                let j = m.field_jacobian(x, &p).unwrap();
                let fd = fd_field_jacobian(m, x, &p, FD_STEP).unwrap();
                worst = worst.max((&j - &fd).max_abs() / j.max_abs().max(1.0));
            }
        }
    }
    ensure(
        worst < ORACLE_TOL,
        format!("closed form vs differences at {ORACLE_POINTS} points per fixture {worst:.3e} < {ORACLE_TOL:e}"),
    )
}

fn c12() -> Outcome {
    let t = Instant::now();
    for n in NS {
        for name in gallery::FIXTURE_NAMES {
            for mode in [Mode::Exact, Mode::Float] {
                let cfg = RunConfig {
                    example: Some(name.to_string()),
                    n,
                    mode,
                    ..Default::default()
                };
                let r = run_verify(&cfg).map_err(|e| format!("{name} n={n} {mode}: {e}"))?;
                if !r.passed {
                    return Err(format!("{name} n={n} {mode}: failed checks"));
                }
            }
        }
    }
    let dt = t.elapsed();
    ensure(
        dt < SUITE_BUDGET,
        format!("all fixtures, both modes, full verify in {dt:.2?} < {SUITE_BUDGET:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("horosphere decomposition (exact)", c1),
        ("punctured Euclidean decomposition (exact)", c2),
        ("definiteness on h-bar", c3),
        ("Kostant skewness", c4),
        ("isotropy identity", c5),
        ("reductivity certificates", c6),
        ("transport equals pushforward", c7),
        ("extrinsic homogeneity residuals", c8),
        ("ambient canonical parallelism", c9),
        ("principal-orbit forms", c10),
        ("oracle agreement", c11),
        ("full pipeline runtime", c12),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, msg) = match outcome {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag} {name}: {msg} [{:.2?}]", i + 1, t.elapsed());
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
