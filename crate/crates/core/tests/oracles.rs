mod common;

use common::{brute_force, random_instance};
use tfokp::instances::gen_x_nondecreasing;
use tfokp::oracles::{apx_greedy, compute_dstar, opt_dp, oracle_star};
use tfokp::seeds::rng;
use tfokp::{run, Instance, PolicySpec};

fn epsilon(inst: &Instance<f64>) -> f64 {
    inst.max_weight()
}

#[test]
fn dp_matches_exhaustive_search() {
    let mut r = rng(20_240_601);
    for case in 0..1000 {
        let inst = random_instance(&mut r, 20);
        let dp = opt_dp(&inst).unwrap();
        let bf = brute_force(&inst);
        assert!(
            (dp.value - bf).abs() <= 1e-9 * bf.max(1.0),
            "case {case}: dp {} vs brute {bf}",
            dp.value
        );
        assert!(dp.used_units(&inst) <= inst.capacity_units());
        let sum: f64 = dp.chosen.iter().map(|&j| inst.items[j].value).sum();
        assert!((sum - dp.value).abs() <= 1e-12 * sum.max(1.0));
    }
}

#[test]
fn greedy_and_oracle_star_bounds() {
    let mut r = rng(77);
    for case in 0..1000 {
        let inst = random_instance(&mut r, 20);
        let eps = epsilon(&inst);
        let opt = opt_dp(&inst).unwrap().value;
        let apx = apx_greedy(&inst);
        let star = oracle_star(&inst).unwrap();
        assert!(apx.used_units(&inst) <= inst.capacity_units());
        assert!(apx.value <= opt * (1.0 + 1e-12), "case {case}");
        assert!(apx.value >= (1.0 - eps) * opt - 1e-12, "case {case}: apx {} opt {opt}", apx.value);
        assert!(star.value <= opt * (1.0 + 1e-12), "case {case}");
        assert!(
            apx.value <= 2.0 / (1.0 - eps) * star.value + 1e-12,
            "case {case}: apx {} star {}",
            apx.value,
            star.value
        );
    }
}

#[test]
fn greedy_fills_when_it_stops() {
    let mut r = rng(5);
    for _ in 0..500 {
        let inst = random_instance(&mut r, 30);
        let apx = apx_greedy(&inst);
        let total: u64 = (0..inst.len()).map(|j| inst.units(j)).sum();
        if total > inst.capacity_units() {
            let fill = apx.used_units(&inst) as f64 / inst.capacity_units() as f64;
            assert!(fill >= 1.0 - epsilon(&inst) - 1e-12);
        }
    }
}

#[test]
fn opt_on_batched_family_is_x() {
    for &x in &[1.0f64, 2.0, 3.5, 5.0] {
        let m = 25;
        let inst = gen_x_nondecreasing(x, m, 8, 1.0, 5.0).unwrap();
        let opt = opt_dp(&inst).unwrap().value;
        assert!((opt - x).abs() <= x / m as f64, "x={x}: {opt}");
    }
}

#[test]
fn dstar_beats_every_other_constant_on_the_family() {
    // the best constant threshold among the densities present
    for &x in &[1.0, 2.5, 5.0] {
        let inst = gen_x_nondecreasing(x, 20, 6, 1.0, 5.0).unwrap();
        let dstar = compute_dstar(&inst).unwrap();
        let best = inst
            .densities()
            .into_iter()
            .map(|phi| run(&PolicySpec::Constant { phi }, &inst).unwrap().final_value)
            .fold(0.0, f64::max);
        let got = run(&PolicySpec::Constant { phi: dstar }, &inst).unwrap().final_value;
        assert!((got - best).abs() <= 1e-12 * best, "x={x}: d*={dstar} {got} vs {best}");
    }
}

#[test]
fn oracle_star_on_uniform_instance_is_constant_l() {
    let inst = gen_x_nondecreasing(1.0, 50, 4, 1.0, 5.0).unwrap();
    let star = oracle_star(&inst).unwrap();
    let constant = run(&PolicySpec::Constant { phi: 1.0 }, &inst).unwrap();
    assert_eq!(star.value, constant.final_value);
}

#[test]
fn value_chain() {
    // the online run may pack past a misfit where greedy stops, so APX can
    // trail ORACLE* by at most the (1 - ε) fill slack
    let mut r = rng(91);
    for case in 0..2000 {
        let inst = random_instance(&mut r, 20);
        let eps = epsilon(&inst);
        let opt = opt_dp(&inst).unwrap().value;
        let apx = apx_greedy(&inst).value;
        let star = oracle_star(&inst).unwrap().value;
        assert!(opt >= apx - 1e-12 && opt >= star - 1e-12, "case {case}");
        assert!(apx >= (1.0 - eps) * star - 1e-12, "case {case}: {apx} vs {star}");
    }
}
