//! Flat `key = value` documents describing a [`WeightSpec`].
//!
//! ```text
//! # weights
//! omega = 0.5
//! a.kind = exponential
//! a.params = 1, 2.718281828459045
//! b.kind = constant
//! b.params = 1
//! s_max = 64
//! ```
//!
//! Missing keys fall back to `omega = 0.5`, `a = constant(1)`,
//! `b = constant(1)` and `s_max = 64`.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::weights::{SeqGen, WeightSpec};

pub const DEFAULT_S_MAX: usize = 64;

/// Partially specified weights; later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecConfig {
    pub omega: Option<f64>,
    pub a_kind: Option<String>,
    pub a_params: Option<Vec<f64>>,
    pub b_kind: Option<String>,
    pub b_params: Option<Vec<f64>>,
    pub s_max: Option<usize>,
}

fn parse_f64(v: &str, line: usize) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse { line, msg: format!("bad number '{}': {e}", v.trim()) })
}

pub fn parse_list(v: &str, line: usize) -> Result<Vec<f64>> {
    v.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_f64(t, line)).collect()
}

impl SpecConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SpecConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse { line, msg: format!("expected 'key = value', got '{body}'") });
            };
            let value = value.trim();
            match key.trim() {
                "omega" => cfg.omega = Some(parse_f64(value, line)?),
                "a.kind" => cfg.a_kind = Some(value.to_string()),
                "a.params" => cfg.a_params = Some(parse_list(value, line)?),
                "b.kind" => cfg.b_kind = Some(value.to_string()),
                "b.params" => cfg.b_params = Some(parse_list(value, line)?),
                "s_max" => {
                    cfg.s_max = Some(value.parse().map_err(|e| Error::Parse {
                        line,
                        msg: format!("bad s_max '{value}': {e}"),
                    })?)
                }
                other => return Err(Error::Parse { line, msg: format!("unknown key '{other}'") }),
            }
        }
        Ok(cfg)
    }

    /// Keys set in `other` replace those in `self`.
    pub fn merged(self, other: SpecConfig) -> SpecConfig {
        SpecConfig {
            omega: other.omega.or(self.omega),
            a_kind: other.a_kind.or(self.a_kind),
            a_params: other.a_params.or(self.a_params),
            b_kind: other.b_kind.or(self.b_kind),
            b_params: other.b_params.or(self.b_params),
            s_max: other.s_max.or(self.s_max),
        }
    }

    pub fn build(&self) -> Result<WeightSpec> {
        let seq = |kind: &Option<String>, params: &Option<Vec<f64>>| -> Result<SeqGen> {
            let kind = kind.as_deref().unwrap_or("constant");
            match params {
                Some(p) => SeqGen::from_kind(kind, p),
                None if kind == "constant" => Ok(SeqGen::Constant { c: 1.0 }),
                None => Err(Error::InvalidSpec(format!("sequence kind '{kind}' needs params"))),
            }
        };
        WeightSpec::new(
            self.omega.unwrap_or(0.5),
            seq(&self.a_kind, &self.a_params)?,
            seq(&self.b_kind, &self.b_params)?,
            self.s_max.unwrap_or(DEFAULT_S_MAX),
        )
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Canonical document for `spec`; parsing it yields the same spec.
pub fn to_text(spec: &WeightSpec) -> String {
    format!(
        "omega = {:?}\na.kind = {}\na.params = {}\nb.kind = {}\nb.params = {}\ns_max = {}\n",
        spec.omega(),
        spec.a_gen().kind(),
        join(&spec.a_gen().params()),
        spec.b_gen().kind(),
        join(&spec.b_gen().params()),
        spec.s_max()
    )
}

/// First 16 hex digits of the SHA-256 of [`to_text`].
pub fn spec_hash(spec: &WeightSpec) -> String {
    let digest = Sha256::digest(to_text(spec).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_spec(text: &str) -> Result<WeightSpec> {
    SpecConfig::parse(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "omega = 0.25\na.kind = list\na.params = 1.0, 1.5, 3.0\nb.kind = exponential\nb.params = 1.0, 2.0\ns_max = 7\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(to_text(&spec), text);
        assert_eq!(parse_spec(&to_text(&spec)).unwrap(), spec);
        assert_eq!(spec_hash(&spec).len(), 16);
    }

    #[test]
    fn defaults_and_overrides() {
        let base = SpecConfig::parse("omega = 0.3 # comment\n\nb.kind = polynomial\nb.params = 1,2").unwrap();
        let over = SpecConfig { omega: Some(0.5), ..Default::default() };
        let spec = base.merged(over).build().unwrap();
        assert_eq!(spec.omega(), 0.5);
        assert_eq!(spec.b(2), 4.0);
        assert_eq!(spec.a(3), 1.0);
        assert_eq!(spec.s_max(), DEFAULT_S_MAX);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match SpecConfig::parse("omega = 0.5\nbogus = 1") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(SpecConfig::parse("omega 0.5"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_spec("omega = 1.5"), Err(Error::InvalidSpec(_))));
        assert!(matches!(parse_spec("b.params = -1"), Err(Error::InvalidSpec(_))));
    }
}
