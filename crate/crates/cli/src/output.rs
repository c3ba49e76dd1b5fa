//! Fixed-format rendering shared by the subcommands.

use moment_bounds::extremal::OddCaseSweep;
use moment_bounds::moments::rational_to_f64;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

/// Fifteen decimal places below 10, never more than sixteen significant
/// digits above, and fifteen significant digits in exponent form outside
/// `[1e-4, 1e16)`.
pub fn decimal(x: f64) -> String {
    if x == 0.0 {
        return "0.000000000000000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs();
    if !(1e-4..1e16).contains(&magnitude) {
        return format!("{x:.14e}");
    }
    let integer_digits = magnitude.log10().floor() as i32 + 1;
    let places = (16 - integer_digits.max(1)).min(15) as usize;
    format!("{x:.places$}")
}

/// JSON number rounded to fifteen significant digits; non-finite becomes null.
pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    json!(if rounded == 0.0 { 0.0 } else { rounded })
}

pub fn numbers(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| number(x)).collect())
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// One JSON document: `meta` first, then fields in insertion order.
pub struct Record {
    fields: Map<String, Value>,
}

impl Record {
    pub fn new<const N: usize>(name: &str, parameters: [(&str, Value); N]) -> Self {
        let parameters: Map<String, Value> = parameters
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let mut fields = Map::new();
        fields.insert(
            "meta".into(),
            json!({
                "name": name,
                "parameters": parameters,
                "version": env!("CARGO_PKG_VERSION"),
            }),
        );
        Self { fields }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.into(), value);
    }

    pub fn bound(&mut self, bound: &BigRational) {
        self.set(
            "bound",
            json!({
                "rational": rational(bound),
                "decimal": number(rational_to_f64(bound)),
            }),
        );
    }

    pub fn checks<'a>(&mut self, checks: impl IntoIterator<Item = (&'a str, bool, f64)>) {
        let rows = checks
            .into_iter()
            .map(|(name, pass, residual)| {
                json!({ "name": name, "pass": pass, "residual": number(residual) })
            })
            .collect();
        self.set("checks", Value::Array(rows));
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.fields.clone()))
            .expect("JSON values serialize");
        s.push('\n');
        s
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// `node,mass` rows in the given (ascending) order.
pub fn atoms_csv(atoms: &[(f64, f64)]) -> String {
    csv_string(
        &["node", "mass"],
        atoms.iter().map(|&(x, m)| vec![decimal(x), decimal(m)]),
    )
}

const SWEEP_HEADER: [&str; 12] = [
    "largest_node_square",
    "largest_node",
    "feasible",
    "p0",
    "limit_gap",
    "r_star",
    "tail_mass",
    "tail_bound",
    "free_node_squares",
    "free_masses",
    "moment_residual",
    "sweep_derivative",
];

/// A `#` comment line naming the limit, then one CSV row per record.
pub fn sweep_csv(sweep: &OddCaseSweep) -> String {
    let limit = rational_to_f64(&sweep.limit);
    let joined = |xs: &[f64]| xs.iter().map(|&x| decimal(x)).collect::<Vec<_>>().join(";");
    let rows = sweep.records.iter().map(|r| {
        let free = r.masses.len().saturating_sub(1);
        vec![
            decimal(r.largest_node_square),
            decimal(r.largest_node()),
            r.feasible.to_string(),
            decimal(r.p0),
            decimal(limit - r.p0),
            decimal(r.r_star),
            decimal(r.tail_mass),
            decimal(r.tail_bound),
            joined(&r.free_node_squares),
            joined(&r.masses[..free]),
            format!("{:.3e}", r.moment_residual),
            decimal(r.sweep_derivative),
        ]
    });
    format!(
        "# limit k={}: {} ({})\n{}",
        sweep.k - 1,
        rational(&sweep.limit),
        decimal(limit),
        csv_string(&SWEEP_HEADER, rows)
    )
}

pub fn sweep_records(sweep: &OddCaseSweep) -> Value {
    let limit = rational_to_f64(&sweep.limit);
    Value::Array(
        sweep
            .records
            .iter()
            .map(|r| {
                let free = r.masses.len().saturating_sub(1);
                json!({
                    "largest_node_square": number(r.largest_node_square),
                    "feasible": r.feasible,
                    "p0": number(r.p0),
                    "limit_gap": number(limit - r.p0),
                    "r_star": number(r.r_star),
                    "tail_mass": number(r.tail_mass),
                    "tail_bound": number(r.tail_bound),
                    "free_node_squares": numbers(&r.free_node_squares),
                    "free_masses": numbers(&r.masses[..free]),
                    "moment_residual": number(r.moment_residual),
                    "raw_largest_partial": number(r.raw_largest_partial),
                    "sweep_derivative": number(r.sweep_derivative),
                    "diagnostic": r.diagnostic,
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_formats() {
        assert_eq!(decimal(2.0 / 3.0), "0.666666666666667");
        assert_eq!(decimal(-3f64.sqrt()), "-1.732050807568877");
        assert_eq!(decimal(0.0), "0.000000000000000");
        assert_eq!(decimal(1.5e-20), "1.50000000000000e-20");
        assert_eq!(decimal(12.0), "12.00000000000000");
        assert_eq!(decimal(346.41016151377545), "346.4101615137754");
    }

    #[test]
    fn rationals_round_trip() {
        let q = BigRational::new(8.into(), 15.into());
        assert_eq!(rational(&q), "8/15");
        let back: BigRational = rational(&q).parse().unwrap();
        assert_eq!(back, q);
        assert_eq!(rational(&BigRational::from_integer(3.into())), "3");
    }

    #[test]
    fn numbers_round_to_fifteen_digits() {
        assert_eq!(number(2.0 / 3.0), json!(0.666666666666667));
        assert_eq!(number(f64::NAN), Value::Null);
    }
}
