use ternary_stab::control::ControlFunction;
use ternary_stab::hyers::{extract_map, IterationSettings};
use ternary_stab::scenario::{
    catalogue, make_trif_noise_hom, matrix_units_span, protected_z_samples, CatalogueOptions, ExactHom,
    DEFAULT_N_LIST,
};
use ternary_stab::verify::{exactness_check, factorization_check, verify_conclusions, VerifyConfig};
use ternary_stab::{Shape, TernaryMap, TrifParams};

#[test]
fn catalogue_scenarios_extract_and_verify() {
    let settings = IterationSettings::default();
    for (d, l) in [(3, 2), (4, 2), (4, 3), (5, 2), (6, 3)] {
        let p = TrifParams::new(d, l).unwrap();
        let shapes = [Shape::new(2, 2).unwrap(), Shape::new(2, 3).unwrap()];
        let opts = CatalogueOptions::scaled_for(&p, &settings);
        for m in catalogue::<f64>(&p, &shapes, 7, &opts).unwrap() {
            let id = &m.descriptor().id;
            let t = extract_map(&m, &p, &settings, Some(m.control())).unwrap();
            let dist = t.max_entry_distance(&m.expected_representation()).unwrap();
            assert!(dist <= 1e-8, "{id}: {dist}");
            let cfg = VerifyConfig {
                samples: 200,
                seed: 3,
                ..VerifyConfig::default()
            };
            let v = verify_conclusions(&t, &m, m.control(), &p, m.scalar_domain(), &cfg).unwrap();
            assert!(v.passed, "{id}: {v:?}");
        }
    }
}

#[test]
fn spanning_set_scenario_factorises() {
    let p = TrifParams::new(3, 2).unwrap();
    let s = Shape::new(2, 2).unwrap();
    let h = ExactHom::<f64>::random(s, Shape::new(3, 3).unwrap(), 1).unwrap();
    let span = matrix_units_span::<f64>(s);
    let m = make_trif_noise_hom(&h, &p, &span, 0.5, 2).unwrap();
    let zs = protected_z_samples(&p, &span, &DEFAULT_N_LIST, 16, 3).unwrap();
    let v = factorization_check(
        &m,
        &p,
        Some(m.control()),
        &span,
        &zs,
        &[1, 2, 3],
        &IterationSettings::default(),
        1e-9,
    )
    .unwrap();
    assert!(v.passed, "{v:?}");
    assert!(v.multiplicativity_residual <= 1e-8);
}

#[test]
fn spanning_set_must_consist_of_tripotents() {
    let p = TrifParams::new(3, 2).unwrap();
    let s = Shape::new(2, 2).unwrap();
    let h = ExactHom::<f64>::identity(s);
    let bad = vec![ternary_stab::Element::identity(2).unwrap().scale_real(2.0)];
    assert!(matches!(
        make_trif_noise_hom(&h, &p, &bad, 0.5, 1),
        Err(ternary_stab::Error::Precondition(_))
    ));
    let ok = matrix_units_span::<f64>(s);
    let m = make_trif_noise_hom(&h, &p, &ok, 0.5, 1).unwrap();
    let r = factorization_check(&m, &p, None, &bad, &[], &[1], &IterationSettings::default(), 1e-9);
    assert!(matches!(r, Err(ternary_stab::Error::Precondition(_))));
}

#[test]
fn exactness_separates_homomorphisms_from_affine_maps() {
    let p = TrifParams::new(4, 3).unwrap();
    let s = Shape::new(3, 2).unwrap();
    let h = ExactHom::<f64>::random(s, Shape::new(3, 3).unwrap(), 5).unwrap();
    let cf = ControlFunction::pnorm(1.0, 0.5);
    let v = exactness_check(&h, &cf, &p, 100, 16, 1, 1e-9).unwrap();
    assert!(v.passed, "{v:?}");
    let c = ternary_stab::ternary::random_element::<f64>(Shape::new(3, 3).unwrap(), 1.0, 9);
    let cn = c.norm();
    let shifted = ternary_stab::FnMap::new(s, Shape::new(3, 3).unwrap(), move |x| &h.apply(x) + &c);
    let v = exactness_check(&shifted, &cf, &p, 100, 16, 1, 1e-9).unwrap();
    assert!(!v.premises_hold && v.conclusions.is_none());
    let q = p.q_real::<f64>();
    assert!((v.premises[0].max_residual - (q - 1.0) * cn).abs() <= 1e-12 * q * cn.max(1.0));
}
