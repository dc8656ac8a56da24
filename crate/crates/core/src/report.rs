//! CSV and JSON emission. Every artifact carries the tool version and spec hash.

use std::io::Write;

use serde::Serialize;

use crate::approximation::{ApproxReport, OracleResult};
use crate::config::{spec_hash, to_text};
use crate::error::Result;
use crate::integration::{ErrorReport, SearchRow};
use crate::tractability::ComplexityRow;
use crate::weights::WeightSpec;

pub const TOOL: &str = "cosine-ec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip text for a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A record with a fixed column layout. The `spec_hash` column is prepended
/// by [`write_csv`].
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRow for ErrorReport {
    fn header() -> &'static [&'static str] {
        &["s", "mesh", "n", "e_exact", "e_upper", "e_lower", "eps_target", "construction"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.mesh.clone(),
            self.n.to_string(),
            opt(self.e_exact),
            fmt_f64(self.e_upper),
            opt(self.e_lower),
            opt(self.eps_target),
            self.construction.clone(),
        ]
    }
}

impl CsvRow for SearchRow {
    fn header() -> &'static [&'static str] {
        &["n", "mesh", "e_exact"]
    }
    fn fields(&self) -> Vec<String> {
        let mesh: Vec<String> = self.mesh.iter().map(|v| v.to_string()).collect();
        vec![self.n.to_string(), mesh.join("x"), fmt_f64(self.e_exact)]
    }
}

impl CsvRow for ApproxReport {
    fn header() -> &'static [&'static str] {
        &["s", "M", "cardinality", "mesh", "n", "F_n", "bound", "oracle", "eps_target", "construction"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            fmt_f64(self.m),
            self.cardinality.to_string(),
            self.mesh.clone(),
            self.n.to_string(),
            fmt_f64(self.f_n),
            fmt_f64(self.bound),
            opt(self.oracle),
            opt(self.eps_target),
            self.construction.clone(),
        ]
    }
}

impl CsvRow for ComplexityRow {
    fn header() -> &'static [&'static str] {
        &["problem", "class", "s", "eps", "n", "construction", "resolved"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.problem.as_str().to_string(),
            self.class.as_str().to_string(),
            self.s.to_string(),
            fmt_f64(self.eps),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            self.construction.clone(),
            self.resolved.to_string(),
        ]
    }
}

/// Summary row for an anisotropic index set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSetRow {
    pub s: usize,
    pub m: f64,
    pub cardinality: usize,
    pub card_bound: f64,
}

impl CsvRow for IndexSetRow {
    fn header() -> &'static [&'static str] {
        &["s", "M", "cardinality", "card_bound"]
    }
    fn fields(&self) -> Vec<String> {
        vec![self.s.to_string(), fmt_f64(self.m), self.cardinality.to_string(), fmt_f64(self.card_bound)]
    }
}

/// One member of an index set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexRow {
    pub index: String,
    pub weight: f64,
}

impl CsvRow for IndexRow {
    fn header() -> &'static [&'static str] {
        &["index", "weight"]
    }
    fn fields(&self) -> Vec<String> {
        vec![self.index.clone(), fmt_f64(self.weight)]
    }
}

/// Oracle evaluation for one `(mesh, M)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub s: usize,
    pub mesh: String,
    pub m: f64,
    #[serde(rename = "box")]
    pub box_: String,
    #[serde(flatten)]
    pub result: OracleResult,
    pub bound: f64,
}

impl CsvRow for OracleRow {
    fn header() -> &'static [&'static str] {
        &["s", "mesh", "M", "box", "oracle", "lambda_alias", "max_outside", "columns", "truncation", "bound"]
    }
    fn fields(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.mesh.clone(),
            fmt_f64(self.m),
            self.box_.clone(),
            fmt_f64(self.result.value),
            fmt_f64(self.result.lambda_alias),
            fmt_f64(self.result.max_outside),
            self.result.columns.to_string(),
            fmt_f64(self.result.truncation),
            fmt_f64(self.bound),
        ]
    }
}

/// Writes `# tool=… version=… spec_hash=…`, the column header and the rows.
pub fn write_csv<T: CsvRow, W: Write>(out: W, spec: &WeightSpec, rows: &[T]) -> Result<()> {
    let hash = spec_hash(spec);
    let mut out = out;
    writeln!(out, "# tool={TOOL} version={VERSION} spec_hash={hash}")?;
    let mut w = csv::WriterBuilder::new().from_writer(out);
    let mut header = vec!["spec_hash"];
    header.extend_from_slice(T::header());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![hash.clone()];
        rec.extend(r.fields());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    spec_hash: String,
    spec: String,
    data: &'a T,
}

/// Pretty JSON object `{tool, version, spec_hash, spec, data}` plus newline.
pub fn write_json<T: Serialize, W: Write>(mut out: W, spec: &WeightSpec, data: &T) -> Result<()> {
    let env = Envelope { tool: TOOL, version: VERSION, spec_hash: spec_hash(spec), spec: to_text(spec), data };
    serde_json::to_writer_pretty(&mut out, &env)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tractability::{InfoClass, Problem};
    use crate::weights::SeqGen;

    #[test]
    fn csv_layout() {
        let spec = WeightSpec::new(0.5, SeqGen::Constant { c: 1.0 }, SeqGen::Constant { c: 1.0 }, 4).unwrap();
        let row = ComplexityRow {
            problem: Problem::Approximation,
            class: InfoClass::Std,
            s: 2,
            eps: 0.1,
            n: None,
            construction: "none".into(),
            resolved: false,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &spec, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool=cosine-ec version="));
        assert!(lines[0].ends_with(&spec_hash(&spec)));
        assert_eq!(lines[1], "spec_hash,problem,class,s,eps,n,construction,resolved");
        assert_eq!(lines[2], format!("{},approximation,std,2,0.1,,none,false", spec_hash(&spec)));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 2.5e17, 0.365148371670110] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
