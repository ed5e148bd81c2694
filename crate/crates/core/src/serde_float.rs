//! Serde adapter writing non-finite floats as strings (`"inf"`, `"-inf"`,
//! `"nan"`) so reports with unbounded ε survive a JSON round trip.

use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;

use crate::scalar::Real;

pub fn serialize<F: Real, S: Serializer>(v: &F, s: S) -> Result<S::Ok, S::Error> {
    let x = v.f64();
    if x.is_finite() {
        s.serialize_f64(x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn deserialize<'de, F: Real, D: Deserializer<'de>>(d: D) -> Result<F, D::Error> {
    struct V;
    impl Visitor<'_> for V {
        type Value = f64;
        fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }
    d.deserialize_any(V).map(F::lit)
}

pub mod option {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::scalar::Real;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super")] f64);

    pub fn serialize<F: Real, S: Serializer>(v: &Option<F>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|x| Wrap(x.f64())).serialize(s)
    }

    pub fn deserialize<'de, F: Real, D: Deserializer<'de>>(d: D) -> Result<Option<F>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| F::lit(w.0)))
    }
}
