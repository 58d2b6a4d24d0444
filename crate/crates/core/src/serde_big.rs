//! Serde adapters writing big integers as bare JSON numbers.
//!
//! Relies on `serde_json`'s `arbitrary_precision` feature, so digits are never
//! squeezed through a machine integer.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Number;

pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    to_number(v).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    from_number(&Number::deserialize(d)?).map_err(serde::de::Error::custom)
}

pub(crate) fn to_number(v: &BigInt) -> Number {
    Number::from_str(&v.to_string()).expect("decimal integer is a JSON number")
}

pub(crate) fn from_number(n: &Number) -> Result<BigInt, String> {
    BigInt::from_str(&n.to_string()).map_err(|_| format!("expected an integer, got {n}"))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let nums: Vec<Number> = v.iter().map(to_number).collect();
        nums.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<Number>::deserialize(d)?
            .iter()
            .map(from_number)
            .collect::<Result<_, _>>()
            .map_err(serde::de::Error::custom)
    }
}
