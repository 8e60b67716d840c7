//! Empirical competitive ratios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use tfokp::algorithms::{run_with, Admission};
use tfokp::{opt_dp, run, Instance64, PolicySpec64};

/// OPT/ALG for one instance. Infinite when the policy earns nothing against a
/// positive optimum; serialized as the string `"inf"` in that case.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Cr(pub f64);

impl Cr {
    pub const INFINITE: Cr = Cr(f64::INFINITY);

    pub fn from_values(opt: f64, alg: f64) -> Cr {
        if opt <= 0.0 {
            return Cr(1.0);
        }
        if alg <= 0.0 {
            return Cr::INFINITE;
        }
        let r = opt / alg;
        if r < 1.0 - 1e-9 {
            log::warn!("ALG {alg} exceeds OPT {opt}");
        }
        Cr(r.max(1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for Cr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Cr {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inf" {
            Ok(Cr::INFINITE)
        } else {
            s.parse().map(Cr)
        }
    }
}

impl Serialize for Cr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Cr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Cr(x)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `opt_dp(inst) / run(spec, inst)`.
pub fn empirical_cr(spec: &PolicySpec64, inst: &Instance64) -> tfokp::Result<Cr> {
    let opt = opt_dp(inst)?.value;
    let alg = run(spec, inst)?.final_value;
    Ok(Cr::from_values(opt, alg))
}

/// Accepts exactly a fixed index set.
pub struct Replay {
    take: Vec<bool>,
}

impl Replay {
    pub fn new(n: usize, chosen: &[usize]) -> Self {
        let mut take = vec![false; n];
        for &j in chosen {
            take[j] = true;
        }
        Replay { take }
    }
}

impl Admission<f64> for Replay {
    fn offer(&mut self, index: usize, _density: f64, _z: f64) -> (bool, Option<f64>) {
        (self.take[index], None)
    }
}

/// CR of replaying the optimal set online; 1 up to rounding.
pub fn replay_opt_cr(inst: &Instance64) -> tfokp::Result<Cr> {
    let opt = opt_dp(inst)?;
    let exec = run_with(&mut Replay::new(inst.len(), &opt.chosen), inst);
    Ok(Cr::from_values(opt.value, exec.final_value))
}
