use reductive::gallery::{self, hyperbolic, Fixture};
use reductive::model::{
    anti_homomorphism_residual, conformal_killing_residual, fd_action_field, fd_christoffel,
    fd_field_jacobian, identify_m_with_tangent, sample_points, FieldKind, FD_STEP,
};
use reductive::{Exact, Mat, Scalar};

const POINTS: usize = 20;

fn float_fixtures() -> Vec<Fixture<f64>> {
    let mut out = Vec::new();
    for n in [3, 4, 5] {
        for name in gallery::FIXTURE_NAMES {
            out.push(gallery::build::<f64>(name, n).unwrap());
        }
    }
    out
}

fn rel(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    (a - b).max_abs() / b.max_abs().max(1.0)
}

#[test]
fn closed_form_christoffels_match_differences() {
    for f in float_fixtures() {
        let m = f.model.as_ref();
        for p in sample_points(m, POINTS, 11) {
            let exact = m.christoffel(&p).unwrap();
            let fd = fd_christoffel(m, &p, FD_STEP).unwrap();
            for (a, b) in exact.iter().zip(&fd) {
                assert!(rel(b, a) < 1e-6, "{} at {p:?}", m.name());
            }
        }
    }
}

#[test]
fn field_jacobians_match_differences() {
    for f in float_fixtures() {
        let m = f.model.as_ref();
        for p in sample_points(m, POINTS, 12) {
            for x in m.algebra().basis() {
                let j = m.field_jacobian(x, &p).unwrap();
                let fd = fd_field_jacobian(m, x, &p, FD_STEP).unwrap();
                assert!(rel(&fd, &j) < 1e-6, "{} at {p:?}", m.name());
            }
        }
    }
}

#[test]
fn fields_are_derivatives_of_the_action() {
    for f in float_fixtures() {
        let m = f.model.as_ref();
        for p in sample_points(m, 5, 13) {
            for x in m.algebra().basis() {
                let a = m.field(x, &p).unwrap();
                let b = fd_action_field(m, x, &p, 1e-6).unwrap();
                let err = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
                assert!(err < 1e-6, "{} at {p:?}: {a:?} vs {b:?}", m.name());
            }
        }
    }
}

#[test]
fn killing_and_conformal_equations() {
    for f in float_fixtures() {
        let m = f.model.as_ref();
        for p in sample_points(m, POINTS, 14) {
            for x in m.algebra().basis() {
                let r = conformal_killing_residual(m, x, &p).unwrap();
                assert!(r < 1e-7 * m.metric(&p).unwrap().max_abs().max(1.0), "{} {r}", m.name());
            }
        }
    }
    let pe = gallery::build::<f64>("punctured_euclidean", 4).unwrap();
    let a = gallery::conformal::dilation::<f64>(4);
    assert_eq!(pe.model.field_kind(&a), FieldKind::Conformal(1.0));
}

#[test]
fn left_action_bracket_sign() {
    for f in float_fixtures() {
        let m = f.model.as_ref();
        let basis = m.algebra().basis();
        for p in sample_points(m, 3, 15) {
            for x in basis {
                for y in basis {
                    assert!(anti_homomorphism_residual(m, x, y, &p).unwrap() < 1e-7);
                }
            }
        }
    }
}

#[test]
fn isotropy_fields_vanish_at_o_exactly() {
    for name in ["horosphere", "punctured_euclidean"] {
        for n in [3, 4, 5] {
            let f = gallery::build::<Exact>(name, n).unwrap();
            let o = f.model.base_point();
            for x in f.h_bar.basis() {
                assert!(f.model.field(x, &o).unwrap().iter().all(Scalar::is_zero));
            }
        }
    }
}

#[test]
fn horosphere_dilation_is_the_t_direction() {
    let f = gallery::build::<Exact>("horosphere", 3).unwrap();
    let o = f.model.base_point();
    let v = f.model.field(&hyperbolic::dilation(3), &o).unwrap();
    assert_eq!(v, vec![Exact::one(), Exact::zero(), Exact::zero()]);
    let id = identify_m_with_tangent(f.model.as_ref(), &f.m_bar).unwrap();
    let g = id.pullback_metric(&f.model.metric(&o).unwrap());
    assert!(reductive::linalg::is_positive_definite(&g));
}

#[test]
fn outside_chart_is_rejected() {
    let f = gallery::build::<f64>("punctured_euclidean", 3).unwrap();
    assert!(f.model.metric(&[0.01, 0.0, 0.0]).is_err());
}
