use reductive::decomposition::{
    ambient_reductive_complement, induced_orbit_decomposition, principal_orbit_report,
    INVARIANCE_TOL,
};
use reductive::gallery::{self, hyperbolic};
use reductive::kostant::{kostant, phi_bar, FormNormalization};
use reductive::model::{column, OrbitData};
use reductive::{Exact, Scalar};

#[test]
fn horosphere_rotation_norm_is_two() {
    let f = gallery::build::<Exact>("horosphere", 3).unwrap();
    let x = f.h.basis()[0].clone();
    let v = phi_bar(f.model.as_ref(), &x, &x, FormNormalization::Trace).unwrap();
    assert_eq!(v, Exact::from_i64(2));
    let _ = hyperbolic::dilation::<Exact>(3);
}

#[test]
fn isotropy_acts_by_bracket() {
    for name in ["horosphere", "punctured_euclidean"] {
        let f = gallery::build::<Exact>(name, 4).unwrap();
        let m = f.model.as_ref();
        let o = m.base_point();
        for x in f.h_bar.basis() {
            let k = kostant(m, x).unwrap();
            assert!(k.skew_residual == 0.0);
            for y in m.algebra().basis() {
                let lhs = k.apply(&m.field(y, &o).unwrap());
                let br = reductive::lie::bracket(x, y).unwrap();
                let rhs = m.field(&br, &o).unwrap();
                assert_eq!(column(&lhs), column(&rhs), "{name}");
            }
        }
    }
}

fn check<T: Scalar>(name: &str, n: usize) {
    let f = gallery::build::<T>(name, n).unwrap();
    let m = f.model.as_ref();
    let orbit = OrbitData::new(m, f.g.clone()).unwrap();
    let norm = FormNormalization::Trace;
    if f.flags.symmetric || !f.flags.conformal {
        let amb = ambient_reductive_complement(m, &f.h_bar, norm).unwrap();
        assert!(amb.m_bar.same_span(&f.m_bar), "{name} m_bar");
    }
    let d = induced_orbit_decomposition(m, &orbit, &f.h_bar, &f.m_bar, norm).unwrap();
    assert!(d.passes(INVARIANCE_TOL), "{name} {n}: {:?}", d.certificates);
    assert!(d.h.same_span(&f.h), "{name} h");
    assert!(d.m.same_span(&f.m), "{name} m");
    if f.flags.principal {
        let r = principal_orbit_report(m, &orbit, &d, norm).unwrap();
        assert!(r.slice_trivial && r.h_perp_phi_is_m, "{name} {r:?}");
    }
}

#[test]
fn gallery_decompositions_certify() {
    for n in [3, 4, 5] {
        for name in gallery::FIXTURE_NAMES {
            check::<Exact>(name, n);
            check::<f64>(name, n);
        }
    }
}
