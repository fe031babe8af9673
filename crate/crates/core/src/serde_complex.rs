//! `{"re": …, "im": …}` encoding for complex numbers in JSON documents.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRepr {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexRepr {
    fn from(z: Complex64) -> Self {
        ComplexRepr { re: z.re, im: z.im }
    }
}

impl From<ComplexRepr> for Complex64 {
    fn from(z: ComplexRepr) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// For `#[serde(with = "crate::serde_complex::single")]` on `Complex64` fields.
pub mod single {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ComplexRepr::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        ComplexRepr::deserialize(d).map(Complex64::from)
    }
}

/// Same, for fixed-size arrays and vectors of `Complex64`.
pub mod many {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer, T: AsRef<[Complex64]>>(zs: &T, s: S) -> Result<S::Ok, S::Error> {
        let zs = zs.as_ref();
        let mut seq = s.serialize_seq(Some(zs.len()))?;
        for z in zs {
            seq.serialize_element(&ComplexRepr::from(*z))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D, T>(d: D) -> Result<T, D::Error>
    where
        D: Deserializer<'de>,
        T: TryFrom<Vec<Complex64>>,
    {
        let raw = Vec::<ComplexRepr>::deserialize(d)?;
        let n = raw.len();
        T::try_from(raw.into_iter().map(Complex64::from).collect())
            .map_err(|_| serde::de::Error::custom(format!("unexpected length {n}")))
    }
}
