//! Finite-scale decisions for the structural conditions on a family of moduli.

mod mazur_orlicz;
mod quasi;
mod threshold;
mod trichotomy;
mod witness;

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use mazur_orlicz::{
    mazur_orlicz_check, ConditionEstimate, Linearity, MazurOrliczParams, MazurOrliczReport, RhoEstimate,
};
pub use quasi::{
    compare_moduli, compare_moduli_two_sided, quasi_constants, PairWitness, QuasiConstants,
    TripleWitness,
};
pub use threshold::{
    build_threshold_relation, threshold_relation_on_sample, ThresholdRelation, Validity, Violation,
};
pub use trichotomy::{classify_trichotomy, Branch, ClassifyOptions, TrichotomyReport, WitnessAttempt};
pub use witness::{search_l1_witness, L1Witness, WitnessTerm};

/// A minimal constant that may fail to exist. Serialized as a number or the
/// string `"INFINITE"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constant {
    Finite(f64),
    Infinite,
}

impl Constant {
    pub const ONE: Constant = Constant::Finite(1.0);

    pub fn is_finite(&self) -> bool {
        matches!(self, Constant::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Constant::Finite(v) => Some(v),
            Constant::Infinite => None,
        }
    }

    /// `f64::INFINITY` for the infinite case.
    pub fn value(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn at_least_one(self) -> Constant {
        match self {
            Constant::Finite(v) => Constant::Finite(v.max(1.0)),
            c => c,
        }
    }

    pub fn max(self, other: Constant) -> Constant {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for Constant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Constant::Finite(v) => s.serialize_f64(*v),
            Constant::Infinite => s.serialize_str("INFINITE"),
        }
    }
}

impl<'de> Deserialize<'de> for Constant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Constant::Finite(v)),
            Repr::Tag(t) if t == "INFINITE" => Ok(Constant::Infinite),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unexpected constant `{t}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_ordering_and_json() {
        assert!(Constant::Infinite > Constant::Finite(1e300));
        assert_eq!(Constant::Finite(0.5).at_least_one(), Constant::ONE);
        assert_eq!(serde_json::to_string(&Constant::Infinite).unwrap(), "\"INFINITE\"");
        let back: Constant = serde_json::from_str("2.5").unwrap();
        assert_eq!(back, Constant::Finite(2.5));
        assert!(serde_json::from_str::<Constant>("\"HUGE\"").is_err());
    }
}
