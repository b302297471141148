//! Deterministic number formatting, CSV tables and the JSON summary.

use std::str::FromStr;

use schmidt_core::schmidt::SchmidtResult;
use schmidt_core::Complex64 as C64;
use serde_json::{Map, Number, Value};

/// Version of the `summary.json` layout.
pub const SCHEMA_VERSION: u64 = 1;

/// Scientific notation with 17 significant digits; `nan`/`inf` spelled out.
/// Negative zero prints as zero.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x + 0.0)
    } else {
        x.to_string()
    }
}

/// JSON number carrying exactly [`fmt`]'s digits; non-finite values become
/// `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Number::from_str(&fmt(x)).map(Value::Number).unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn complex(z: C64) -> Value {
    obj([("re", num(z.re)), ("im", num(z.im))])
}

pub fn obj<const N: usize>(entries: [(&str, Value); N]) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

/// Comma-separated table with a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Csv {
        let mut text = header.iter().map(|h| h.as_ref()).collect::<Vec<_>>().join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// `k, lambda_k, cumulative_weight` over the retained weights.
pub fn spectrum_csv(result: &SchmidtResult) -> String {
    let mut csv = Csv::new(&["k", "lambda_k", "cumulative_weight"]);
    let mut cum = 0.0;
    for (k, &l) in result.lambdas.iter().enumerate() {
        cum += l;
        csv.row(&[(k + 1).to_string(), fmt(l), fmt(cum)]);
    }
    csv.finish()
}

/// `coordinate, mode1_re, mode1_im, …` for the first `r` modes.
pub fn modes_csv(coordinate: &str, nodes: &[f64], modes: &[Vec<C64>], r: usize) -> String {
    let r = r.min(modes.len());
    let mut header = vec![coordinate.to_string()];
    for k in 1..=r {
        header.push(format!("mode{k}_re"));
        header.push(format!("mode{k}_im"));
    }
    let mut csv = Csv::new(&header);
    for (j, &x) in nodes.iter().enumerate() {
        let mut row = vec![fmt(x)];
        for m in &modes[..r] {
            row.push(fmt(m[j].re));
            row.push(fmt(m[j].im));
        }
        csv.row(&row);
    }
    csv.finish()
}

/// `coordinate, mode1_density, …`: squared moduli of the first `r` modes.
pub fn densities_csv(coordinate: &str, nodes: &[f64], modes: &[Vec<C64>], r: usize) -> String {
    let r = r.min(modes.len());
    let mut header = vec![coordinate.to_string()];
    header.extend((1..=r).map(|k| format!("mode{k}_density")));
    let mut csv = Csv::new(&header);
    for (j, &x) in nodes.iter().enumerate() {
        let mut row = vec![fmt(x)];
        row.extend(modes[..r].iter().map(|m| fmt(m[j].norm_sqr())));
        csv.row(&row);
    }
    csv.finish()
}

/// Spectrum block of the summary: top 32 weights and the derived measures.
pub fn spectrum_json(result: &SchmidtResult) -> Value {
    let top: Vec<f64> = result.lambdas.iter().take(32).copied().collect();
    obj([
        ("lambdas", nums(&top)),
        ("rank", Value::from(result.rank)),
        ("schmidt_number", num(result.schmidt_number)),
        ("entropy_bits", num(result.entropy)),
        ("reconstruction_error", num(result.reconstruction_error)),
        ("discarded_weight", num(result.discarded_weight)),
        (
            "untruncated",
            obj([
                ("rank", Value::from(result.untruncated.rank)),
                ("schmidt_number", num(result.untruncated.schmidt_number)),
                ("entropy_bits", num(result.untruncated.entropy)),
            ]),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(2.0), "2.0000000000000000e0");
        assert_eq!(fmt(-0.0), fmt(0.0));
        assert_eq!(fmt(f64::NAN), "NaN");
        let v = num(0.1);
        assert_eq!(serde_json::to_string(&v).unwrap(), "1.0000000000000001e-1");
        assert_eq!(num(f64::INFINITY), Value::Null);
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&["1".into(), "2".into()]);
        assert_eq!(c.finish(), "a,b\n1,2\n");
    }
}
