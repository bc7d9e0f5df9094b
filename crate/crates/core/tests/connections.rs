use reductive::connections::{
    ambient_canonical_residuals, connection_d, corrupt_m, curve_family, gamma_tensor,
    levi_civita_d_s_tensor, parallel_transport, preimage_in, tangent_disagreement,
    transport_vs_pushforward, verify_homogeneous_structure, verify_extrinsic_homogeneity, Connection,
    ConnectionOptions, ConstantStructure, Curve, PipelineStructure,
};
use reductive::decomposition::{induced_orbit_decomposition, DecompositionResult};
use reductive::gallery::{self, hyperbolic, Fixture};
use reductive::kostant::FormNormalization;
use reductive::model::OrbitData;
use reductive::{Exact, Mat, Scalar};

fn setup<T: Scalar>(name: &str, n: usize) -> (Fixture<T>, OrbitData<T>, DecompositionResult<T>) {
    let f = gallery::build::<T>(name, n).unwrap();
    let orbit = OrbitData::new(f.model.as_ref(), f.g.clone()).unwrap();
    let d = induced_orbit_decomposition(
        f.model.as_ref(),
        &orbit,
        &f.h_bar,
        &f.m_bar,
        FormNormalization::Trace,
    )
    .unwrap();
    (f, orbit, d)
}

#[test]
fn gamma_two_ways_exact() {
    for n in [3, 4, 5] {
        for name in gallery::FIXTURE_NAMES {
            let (f, orbit, d) = setup::<Exact>(name, n);
            for t in orbit.tangent.basis() {
                let g = gamma_tensor(f.model.as_ref(), &d, &t.vectorize()).unwrap();
                assert_eq!(g.agreement(), 0.0, "{name} {n}");
                assert!(g.generator_in_h_perp, "{name} {n}");
            }
        }
    }
}

fn float_fixtures() -> Vec<(Fixture<f64>, OrbitData<f64>, DecompositionResult<f64>)> {
    let mut out = Vec::new();
    for n in [3, 4] {
        for name in gallery::FIXTURE_NAMES {
            out.push(setup::<f64>(name, n));
        }
    }
    out
}

#[test]
fn preimage_round_trip_and_zero() {
    let (f, _, d) = setup::<Exact>("horosphere", 4);
    let m = f.model.as_ref();
    let o = m.base_point();
    let zero = vec![Exact::zero(); 4];
    assert!(preimage_in(m, &zero, &d.m_bar).unwrap().is_zero());
    for x in d.m_bar.basis() {
        let u = m.field(x, &o).unwrap();
        let back = preimage_in(m, &u, &d.m_bar).unwrap();
        assert_eq!(m.field(&back, &o).unwrap(), u);
    }
    // a normal direction has no preimage in m
    let u = m.field(&hyperbolic::dilation(4), &o).unwrap();
    assert!(preimage_in(m, &u, &d.m).is_err());
}

#[test]
fn canonical_and_orbit_connections_agree_iff_m_inside_m_bar() {
    for n in [3, 4] {
        for name in gallery::FIXTURE_NAMES {
            let (f, orbit, d) = setup::<Exact>(name, n);
            let gap = tangent_disagreement(f.model.as_ref(), &orbit, &d.m_bar, &d.m).unwrap();
            assert_eq!(gap == 0.0, d.m_bar.contains_subspace(&d.m), "{name} {n}");
        }
    }
    // both cases occur
    let (_, _, h) = setup::<Exact>("horosphere", 3);
    let (_, _, e) = setup::<Exact>("euclidean", 3);
    assert!(!h.m_bar.contains_subspace(&h.m));
    assert!(e.m_bar.contains_subspace(&e.m));
}

#[test]
fn symmetric_canonical_connection_is_levi_civita_at_o() {
    for n in [3, 4, 5] {
        let (f, orbit, d) = setup::<Exact>("horosphere", n);
        let m = f.model.as_ref();
        for t in orbit.tangent.basis() {
            for b in d.m_bar.basis() {
                let sv = levi_civita_d_s_tensor(m, &d, &t.vectorize(), b).unwrap();
                assert!(sv.s_bar.iter().all(Scalar::is_zero));
            }
        }
    }
}

#[test]
fn horosphere_d_kills_translation_fields() {
    let (f, orbit, d) = setup::<Exact>("horosphere", 4);
    let m = f.model.as_ref();
    for t in orbit.tangent.basis() {
        for k in 0..3 {
            let b = hyperbolic::translation::<Exact>(4, k);
            let v = connection_d(m, &d.m, &t.vectorize(), &b).unwrap();
            assert!(v.iter().all(Scalar::is_zero));
        }
    }
}

#[test]
fn transport_matches_pushforward() {
    let opts = ConnectionOptions::default();
    for (f, _, d) in float_fixtures() {
        let m = f.model.as_ref();
        let conn = Connection::orbit(d.m.basis(), &d.m_bar);
        for curve in curve_family(m, d.m.basis(), &opts).unwrap().iter().take(6) {
            let r = transport_vs_pushforward(m, &conn, &curve.generators[0], opts.ode).unwrap();
            assert!(r < 1e-7, "{} {r}", f.name);
        }
    }
}

#[test]
fn constant_curve_transport_is_identity() {
    let (f, _, d) = setup::<f64>("horosphere", 3);
    let m = f.model.as_ref();
    let h = d.h.basis()[0].clone();
    let conn = Connection::orbit(d.m.basis(), &d.m_bar);
    let curve = Curve::ray(h).unwrap();
    let v = parallel_transport(m, &conn, &curve, &Mat::identity(3), 1.0, Default::default());
    assert!((&v.unwrap() - &Mat::identity(3)).max_abs() < 1e-12);
}

#[test]
fn levi_civita_transport_preserves_norms() {
    let opts = ConnectionOptions::default();
    for (f, orbit, d) in float_fixtures() {
        let m = f.model.as_ref();
        for curve in curve_family(m, d.m.basis(), &opts).unwrap() {
            let e0 = Mat::identity(m.dim());
            let e = parallel_transport(m, &Connection::LeviCivita, &curve, &e0, 1.0, opts.ode).unwrap();
            let (_, p, _) = curve.state(m, curve.pieces() - 1, curve.piece_length()).unwrap();
            let g1 = &(&e.transpose() * &m.metric(&p).unwrap()) * &e;
            assert!((&g1 - &orbit.metric).max_abs() < 1e-8, "{}", f.name);
        }
    }
}

#[test]
fn extrinsic_residuals_on_gallery() {
    let opts = ConnectionOptions {
        seed: 3,
        ..Default::default()
    };
    for (f, orbit, d) in float_fixtures() {
        let r = verify_extrinsic_homogeneity(f.model.as_ref(), &orbit, &d, &opts).unwrap();
        assert!(r.passed(), "{} {:?}", f.name, r.checks);
        assert_eq!(r.curves, 10);
    }
}

#[test]
fn corrupted_complement_breaks_tangency() {
    let opts = ConnectionOptions::default();
    for name in ["horosphere", "euclidean"] {
        let (f, orbit, d) = setup::<f64>(name, 4);
        let mut bad = d.clone();
        bad.m = corrupt_m(&d).unwrap();
        let r = verify_extrinsic_homogeneity(f.model.as_ref(), &orbit, &bad, &opts).unwrap();
        assert!(r.get("tm_parallel").unwrap().value > 1e-2, "{name}");
    }
}

#[test]
fn ambient_canonical_connection_parallelism() {
    let opts = ConnectionOptions::default();
    for n in [3, 4, 5] {
        for name in ["horosphere", "euclidean"] {
            let (f, _, _) = setup::<f64>(name, n);
            let checks = ambient_canonical_residuals(f.model.as_ref(), &f.m_bar, &opts).unwrap();
            assert!(checks.iter().all(|c| c.passed), "{name} {checks:?}");
        }
    }
    let (f, _, _) = setup::<f64>("punctured_euclidean", 3);
    assert!(ambient_canonical_residuals(f.model.as_ref(), &f.m_bar, &opts).is_err());
}

#[test]
fn homogeneous_structures() {
    let opts = ConnectionOptions::default();
    let (f, orbit, d) = setup::<f64>("horosphere", 3);
    let s = PipelineStructure {
        m: d.m.basis().to_vec(),
        m_bar: d.m_bar.basis().to_vec(),
    };
    let r = verify_homogeneous_structure(f.model.as_ref(), &orbit, &s, &opts).unwrap();
    assert!(r.passed(), "{:?}", r.checks);

    let (e, eorbit, _) = setup::<f64>("euclidean", 3);
    let zero = ConstantStructure(vec![Mat::zeros(3, 3); 3]);
    let r = verify_homogeneous_structure(e.model.as_ref(), &eorbit, &zero, &opts).unwrap();
    assert!(r.passed(), "{:?}", r.checks);

    let a = Mat::from_fn(3, 3, |i, j| (1 + i * 3 + j) as f64 / 7.0);
    let bad = ConstantStructure(vec![a.clone(), a.scale(&-0.5), a.transpose()]);
    let r = verify_homogeneous_structure(e.model.as_ref(), &eorbit, &bad, &opts).unwrap();
    assert!(!r.get("metricity").unwrap().passed);
}
