use proptest::prelude::*;

use reductive::connections::{parallel_transport, Connection, Curve};
use reductive::gallery::{self, hyperbolic};
use reductive::kostant::{phi_bar_gram, FormNormalization};
use reductive::lie::{bracket, killing_form_so, so_basis};
use reductive::model::combine;
use reductive::subspace::orth_complement;
use reductive::{ChartedHomSpace, GramForm, Mat, Subspace};

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

fn sym_pd(n: usize, raw: &[f64]) -> Mat<f64> {
    let a = Mat::from_fn(n, n, |i, j| raw[i * n + j]);
    &(&a.transpose() * &a) + &Mat::identity(n).scale(&0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projections_onto_a_direct_sum_add_up(c in coeffs(10)) {
        let f = gallery::build::<f64>("horosphere", 4).unwrap();
        let x = combine(f.model.algebra().basis(), &c);
        let a = Subspace::project(&x, &f.h_bar, &f.m_bar).unwrap();
        let b = Subspace::project(&x, &f.m_bar, &f.h_bar).unwrap();
        prop_assert!((&(&a + &b) - &x).max_abs() < 1e-10);
        prop_assert!(f.h_bar.contains(&a) && f.m_bar.contains(&b));
    }

    #[test]
    fn complement_dimensions_add_up(raw in coeffs(36), k in 0usize..6, mix in coeffs(36)) {
        let n = 6;
        let basis: Vec<Mat<f64>> = (0..n)
            .map(|i| Mat::from_fn(n, 1, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect();
        let whole = Subspace::span(n, 1, &basis).unwrap();
        let vectors: Vec<Mat<f64>> = (0..k)
            .map(|i| Mat::from_fn(n, 1, |r, _| mix[i * n + r]))
            .collect();
        let sub = Subspace::span(n, 1, &vectors).unwrap();
        let form = GramForm::new(basis, sym_pd(n, &raw)).unwrap();
        let comp = orth_complement(&sub, &whole, &form).unwrap();
        prop_assert!(comp.nondegenerate);
        prop_assert_eq!(comp.space.dim() + sub.dim(), n);
        for x in sub.basis() {
            for y in comp.space.basis() {
                prop_assert!(form.eval(x, y).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jacobi_identity(a in coeffs(10), b in coeffs(10), c in coeffs(10)) {
        let basis = hyperbolic::algebra::<f64>(4);
        let (x, y, z) = (combine(&basis, &a), combine(&basis, &b), combine(&basis, &c));
        let br = |p: &Mat<f64>, q: &Mat<f64>| bracket(p, q).unwrap();
        let s = &(&br(&x, &br(&y, &z)) + &br(&y, &br(&z, &x))) + &br(&z, &br(&x, &y));
        prop_assert!(s.max_abs() < 1e-12);
    }

    #[test]
    fn killing_form_is_ad_invariant(a in coeffs(10), b in coeffs(10), c in coeffs(10)) {
        let basis = so_basis::<f64>(5);
        let (x, y, z) = (combine(&basis, &a), combine(&basis, &b), combine(&basis, &c));
        let l = killing_form_so(5, &bracket(&z, &x).unwrap(), &y).unwrap();
        let r = killing_form_so(5, &x, &bracket(&z, &y).unwrap()).unwrap();
        prop_assert!((l + r).abs() < 1e-12);
    }

    #[test]
    fn phi_bar_is_isotropy_invariant(a in coeffs(10), b in coeffs(10), c in coeffs(6)) {
        let f = gallery::build::<f64>("horosphere", 4).unwrap();
        let m = f.model.as_ref();
        let basis = m.algebra().basis();
        let (x, y) = (combine(basis, &a), combine(basis, &b));
        let z = combine(f.h_bar.basis(), &c);
        let elems = [bracket(&z, &x).unwrap(), y.clone(), x.clone(), bracket(&z, &y).unwrap()];
        let g = phi_bar_gram(m, &elems, FormNormalization::Trace).unwrap();
        prop_assert!((g.get(0, 1) + g.get(2, 3)).abs() < 1e-9);
    }

    #[test]
    fn levi_civita_transport_is_linear_and_isometric(a in coeffs(3), v in coeffs(3), w in coeffs(3)) {
        let f = gallery::build::<f64>("horosphere", 3).unwrap();
        let m: &dyn ChartedHomSpace<f64> = f.model.as_ref();
        let x = combine(f.m.basis(), &a.iter().take(2).map(|t| t * 0.7).collect::<Vec<_>>());
        let curve = Curve::ray(x).unwrap();
        let frame = Mat::from_columns(&[v.clone(), w.clone()]).unwrap();
        let out = parallel_transport(m, &Connection::LeviCivita, &curve, &frame, 1.0, Default::default()).unwrap();
        let sum: Vec<f64> = v.iter().zip(&w).map(|(p, q)| p + q).collect();
        let one = Mat::from_columns(&[sum]).unwrap();
        let out_sum = parallel_transport(m, &Connection::LeviCivita, &curve, &one, 1.0, Default::default()).unwrap();
        for r in 0..3 {
            prop_assert!((out.get(r, 0) + out.get(r, 1) - out_sum.get(r, 0)).abs() < 1e-8);
        }
        let (_, p, _) = curve.state(m, 0, 1.0).unwrap();
        let g0 = &(&frame.transpose() * &m.metric(&m.base_point()).unwrap()) * &frame;
        let g1 = &(&out.transpose() * &m.metric(&p).unwrap()) * &out;
        prop_assert!((&g1 - &g0).max_abs() < 1e-8);
    }
}
