//! Parsing of map, family, point and Möbius arguments.

use std::path::Path;

use p1dyn::algebra::{GaussRational, ScalarMode};
use p1dyn::degeneration::{FamilyJson, FamilyMap, MobiusFamily, TParam};
use p1dyn::exceptional::{make_exceptional, ExceptionalKind};
use p1dyn::ratmap::{MapJson, RationalMap, SpherePoint};
use p1dyn::{Error, Result};
use serde::Deserialize;

/// Reads an argument that is either inline JSON or a path to a JSON file.
fn json_text(arg: &str) -> Result<String> {
    let t = arg.trim();
    if t.starts_with('{') {
        return Ok(t.to_string());
    }
    let p = Path::new(t);
    if p.is_file() {
        return std::fs::read_to_string(p)
            .map_err(|e| Error::BadInput(format!("cannot read {t}: {e}")));
    }
    Err(Error::BadInput(format!(
        "expected inline JSON or a file path, got {t:?}"
    )))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::BadInput(format!("invalid {what} JSON: {e}")))
}

/// A map given as JSON, a JSON file, or a preset `power:m`,
/// `chebyshev:m`, `lattes:a`.
pub fn map(arg: &str, prec: u32) -> Result<RationalMap> {
    let t = arg.trim();
    if let Some((kind, value)) = t.split_once(':').filter(|_| !t.starts_with('{')) {
        let bad = || Error::BadInput(format!("bad preset {t:?}"));
        let kind = match kind {
            "power" => ExceptionalKind::Power(value.parse().map_err(|_| bad())?),
            "chebyshev" => ExceptionalKind::Chebyshev(value.parse().map_err(|_| bad())?),
            "lattes" => {
                ExceptionalKind::FlexibleLattes(GaussRational::parse(value).map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        return make_exceptional(&kind, prec);
    }
    let mut j: MapJson = parse_json(&json_text(t)?, "map")?;
    j.prec_bits = Some(prec);
    RationalMap::from_json(&j)
}

pub fn family(arg: &str) -> Result<FamilyMap> {
    let j: FamilyJson = parse_json(&json_text(arg)?, "family")?;
    FamilyMap::from_json(&j)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MobiusArg {
    Entries {
        a: String,
        b: String,
        c: String,
        d: String,
    },
    Affine {
        num: Vec<String>,
        den: Vec<String>,
    },
}

/// `{"a","b","c","d"}` is read as `z ↦ (a + b·z)/(c·z + d)`; the form
/// `{"num":[p0,p1],"den":[q0,q1]}` gives `(p0 + p1 z)/(q0 + q1 z)`.
pub fn mobius(arg: &str) -> Result<MobiusFamily> {
    let t = |s: &str| TParam::parse(s);
    match parse_json::<MobiusArg>(&json_text(arg)?, "Möbius")? {
        MobiusArg::Entries { a, b, c, d } => MobiusFamily::new(t(&b)?, t(&a)?, t(&c)?, t(&d)?),
        MobiusArg::Affine { num, den } => {
            let get = |v: &[String], k: usize| v.get(k).map_or(Ok(TParam::zero()), |s| t(s));
            if num.len() > 2 || den.len() > 2 {
                return Err(Error::BadInput(
                    "Möbius coefficients have degree at most 1".into(),
                ));
            }
            MobiusFamily::new(get(&num, 1)?, get(&num, 0)?, get(&den, 1)?, get(&den, 0)?)
        }
    }
}

pub fn point(arg: &str, prec: u32) -> Result<SpherePoint> {
    SpherePoint::parse(arg.trim(), ScalarMode::Mp, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_conventions() {
        let m = mobius(r#"{"a":"0","b":"1/t","c":"0","d":"1"}"#).unwrap();
        assert_eq!(
            m,
            MobiusFamily::affine(TParam::zero(), TParam::parse("1/t").unwrap()).unwrap()
        );
        let n = mobius(r#"{"num":["0","1/t"],"den":["1"]}"#).unwrap();
        assert_eq!(m, n);
        assert!(mobius(r#"{"a":"0","b":"0","c":"0","d":"1"}"#).is_err());
    }

    #[test]
    fn presets_and_json() {
        let sq = map("power:2", 128).unwrap();
        assert_eq!(sq.to_json().num, vec!["0", "0", "1"]);
        let j = map(r#"{"num":["-1","0","1"],"den":["1"]}"#, 128).unwrap();
        assert_eq!(j.degree(), 2);
        assert!(matches!(map("nonsense", 128), Err(Error::BadInput(_))));
        assert!(matches!(map("{bad json", 128), Err(Error::BadInput(_))));
    }
}
