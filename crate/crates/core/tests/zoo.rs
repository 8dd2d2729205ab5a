use finsler_core::classify::{classify, Verdict, DEFAULT_TOL};
use finsler_core::sample::SamplePlan;
use finsler_core::zoo::{self, ZooParams, IDS};

#[test]
fn zoo_entries_classify_as_annotated() {
    for id in IDS {
        let entry = zoo::entry(id).unwrap();
        let r = classify(&zoo::make_default(id).unwrap(), &SamplePlan::default(), DEFAULT_TOL).unwrap();
        for (class, holds) in &entry.expected {
            let want = if *holds { Verdict::Holds } else { Verdict::Fails };
            assert_eq!(r.class(class), Some(want), "{id}: {class}");
        }
        assert!(!r.inconsistent(), "{id}");
    }
}

#[test]
fn fubini_study_in_three_dimensions_is_complex_berwald() {
    let p = ZooParams {
        dim: Some(3),
        ..Default::default()
    };
    let spec = zoo::make("hermitian_kahler_potential", &p).unwrap();
    let plan = SamplePlan {
        z_count: 2,
        eta_count: 3,
        ..Default::default()
    };
    let r = classify(&spec, &plan, DEFAULT_TOL).unwrap();
    assert_eq!(r.class("complex_berwald"), Some(Verdict::Holds));
    assert!(!r.inconsistent());
}

#[test]
fn antonelli_shimada_with_other_sigma_stays_generalized_berwald() {
    let p = ZooParams {
        sigma: Some("z1*conj(z1) - 0.3*z2*conj(z2) + 0.1*(z1*conj(z2) + z2*conj(z1))".into()),
        ..Default::default()
    };
    let spec = zoo::make("antonelli_shimada", &p).unwrap();
    let r = classify(&spec, &SamplePlan::default(), DEFAULT_TOL).unwrap();
    assert_eq!(r.class("generalized_berwald"), Some(Verdict::Holds));
    assert_eq!(r.class("landsberg"), Some(Verdict::Fails));
    assert!(!r.inconsistent());
}
