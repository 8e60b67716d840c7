use proptest::prelude::*;
use tfokp::instances::{
    batch_count, gen_gadget, gen_x_nondecreasing, ingest, synth_trace, write_instance,
    GadgetParams, GeneratorKind, GeneratorSpec, TraceConfig,
};
use tfokp::{validate_instance, Instance};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn each_batch_extends_the_previous_instance(
        m in 1u32..30, n in 1u32..20, k in 0u32..19, upper in 1.5..100.0f64
    ) {
        let k = k % n;
        let delta = (upper - 1.0) / n as f64;
        let x = 1.0 + k as f64 * delta;
        let a = gen_x_nondecreasing(x, m, n, 1.0, upper).unwrap();
        let b = gen_x_nondecreasing((x + delta).min(upper), m, n, 1.0, upper).unwrap();
        prop_assert_eq!(batch_count(x, n, 1.0, upper), k as usize + 1);
        prop_assert_eq!(&b.items[..a.len()], &a.items[..]);
        prop_assert_eq!(b.len(), a.len() + m as usize);
        prop_assert!(validate_instance(&a).is_empty());
        let ds = b.densities();
        prop_assert!(ds.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn traces_are_valid_and_pure(seed in any::<u64>(), mu in 1.0..60.0f64, n in 1usize..300) {
        let cfg = TraceConfig::new(n, mu, seed);
        let a = synth_trace(&cfg).unwrap();
        prop_assert_eq!(&a, &synth_trace(&cfg).unwrap());
        prop_assert!(validate_instance(&a).is_empty());
        prop_assert_eq!(a.len(), n);
        prop_assert!((a.ratio() - 50.0 * mu).abs() < 1e-9 * mu);
    }
}

#[test]
fn gadgets_validate() {
    let mut p = GadgetParams::new(1.0, 5.0, 100);
    p.small_weight = Some(0.001);
    for name in ["two_density", "duplicated_suffix", "small_then_large"] {
        let inst = gen_gadget(name, &p).unwrap();
        assert!(validate_instance(&inst).is_empty(), "{name}");
        assert_eq!(inst, gen_gadget(name, &p).unwrap());
    }
}

#[test]
fn file_round_trip_through_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/trace.csv");
    let inst = synth_trace(&TraceConfig::new(500, 25.0, 8)).unwrap();
    write_instance(&inst, &path).unwrap();
    let back: Instance<f64> = ingest(&path).unwrap();
    assert_eq!(back, inst);
    let spec = GeneratorSpec::unbounded(GeneratorKind::FromFile { path: path.clone() });
    assert_eq!(spec.generate().unwrap(), inst);
    let wrong = GeneratorSpec::new(GeneratorKind::FromFile { path }, 1.0, 7.0);
    assert!(wrong.generate().is_err());
}

#[test]
fn f32_instances_work() {
    let inst = gen_x_nondecreasing(3.0f32, 10, 4, 1.0, 5.0).unwrap();
    assert!(validate_instance(&inst).is_empty());
    let t = tfokp::run(&tfokp::PolicySpec::Zcl, &inst).unwrap();
    assert!(t.final_utilization <= 1.0);
}
