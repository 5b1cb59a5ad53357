//! Serde helpers for complex numbers as `{"re": .., "im": ..}`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct ReIm {
    re: f64,
    #[serde(default)]
    im: f64,
}

pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    ReIm { re: z.re, im: z.im }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let r = ReIm::deserialize(d)?;
    Ok(Complex64::new(r.re, r.im))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| ReIm { re: z.re, im: z.im }))
    }

    /// Accepts plain numbers as well as `{re, im}` objects.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Real(f64),
            Pair(ReIm),
        }
        let v = Vec::<Entry>::deserialize(d)?;
        Ok(v.into_iter()
            .map(|e| match e {
                Entry::Real(x) => Complex64::new(x, 0.0),
                Entry::Pair(p) => Complex64::new(p.re, p.im),
            })
            .collect())
    }
}
