#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tfokp::{Instance, Item};

/// Small random instance; densities sometimes repeat to exercise ties.
pub fn random_instance(r: &mut ChaCha8Rng, max_n: usize) -> Instance<f64> {
    let m: u32 = r.random_range(4..=40);
    let n = r.random_range(1..=max_n);
    let upper: f64 = r.random_range(1.5..50.0);
    let palette: Vec<f64> = (0..3).map(|_| r.random_range(1.0..upper)).collect();
    let items = (0..n)
        .map(|_| {
            let units = r.random_range(1..=(m as u64 / 2).max(1));
            let d = if r.random_bool(0.5) {
                palette[r.random_range(0..palette.len())]
            } else {
                r.random_range(1.0..=upper)
            };
            Item::with_density(d, units, m)
        })
        .collect();
    Instance::new(items, 1.0, upper, m)
}

/// Best subset value by exhaustive enumeration in Gray-code order.
pub fn brute_force(inst: &Instance<f64>) -> f64 {
    let n = inst.len();
    assert!(n <= 24);
    let units: Vec<i64> = (0..n).map(|j| inst.units(j) as i64).collect();
    let cap = inst.capacity_units() as i64;
    let (mut w, mut v, mut best) = (0i64, 0f64, 0f64);
    let mut prev = 0u32;
    for k in 1u32..(1u32 << n) {
        let gray = k ^ (k >> 1);
        let bit = (gray ^ prev).trailing_zeros() as usize;
        if gray & (1 << bit) != 0 {
            w += units[bit];
            v += inst.items[bit].value;
        } else {
            w -= units[bit];
            v -= inst.items[bit].value;
        }
        prev = gray;
        if w <= cap && v > best {
            best = v;
        }
    }
    best
}
