//! Serde helpers writing big integers as JSON numbers when they fit in
//! `i64` and as decimal strings otherwise.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum Repr {
    Small(i64),
    Big(String),
}

impl From<&BigInt> for Repr {
    fn from(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => Repr::Small(v),
            None => Repr::Big(x.to_string()),
        }
    }
}

impl TryFrom<Repr> for BigInt {
    type Error = String;
    fn try_from(r: Repr) -> Result<Self, String> {
        match r {
            Repr::Small(v) => Ok(v.into()),
            Repr::Big(s) => s.parse().map_err(|_| format!("not an integer: {s:?}")),
        }
    }
}

pub mod big {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        Repr::from(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        BigInt::try_from(Repr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

pub mod big_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(Repr::from).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| BigInt::try_from(r).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct W {
        #[serde(with = "big_vec")]
        v: Vec<BigInt>,
    }

    #[test]
    fn round_trip() {
        let huge: BigInt = "123456789012345678901234567890".parse().unwrap();
        let w = W {
            v: vec![BigInt::from(-3), huge],
        };
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"v":[-3,"123456789012345678901234567890"]}"#);
        assert_eq!(serde_json::from_str::<W>(&s).unwrap(), w);
    }
}
