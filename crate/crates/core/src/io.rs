//! File formats: matrix JSON and CSV, Chet coefficient CSV, and small JSON helpers.
//!
//! Matrix JSON is `{"n": int, "mode": "machine" | "decimal", "rows": [[…], …]}`.
//! Machine entries are numbers, decimal entries are strings (with an optional
//! `"digits"` field), and exact rationals are `{"num": …, "den": …}` objects whose
//! parts may be numbers or strings. Matrix CSV is a line holding `n` followed by
//! `n` comma-separated rows; entries may be decimals or fractions `p/q`.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::ChetData;
use crate::core::decimal::parse_rational_decimal;
use crate::core::{DecimalContext, Matrix, Precision};
use crate::error::{Error, Result};

/// Decimal digits used when neither the file nor the caller says otherwise.
pub const DEFAULT_DIGITS: u32 = 100;
/// Environment variable overriding [`DEFAULT_DIGITS`].
pub const DIGITS_ENV: &str = "SPECTRA_PRECISION_DIGITS";

/// [`DEFAULT_DIGITS`], unless `SPECTRA_PRECISION_DIGITS` holds a valid count.
pub fn default_digits() -> u32 {
    std::env::var(DIGITS_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_DIGITS)
}

/// On-disk matrix encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    /// Numbers, or `{"num","den"}` objects when the matrix is exact rational.
    Json,
    /// Always `{"num","den"}` objects; machine values are converted exactly.
    RationalJson,
    /// Decimal strings.
    DecimalJson,
    Csv,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(MatrixFormat::Json),
            "rational-json" => Ok(MatrixFormat::RationalJson),
            "decimal-json" => Ok(MatrixFormat::DecimalJson),
            "csv" => Ok(MatrixFormat::Csv),
            other => Err(Error::Parse(format!("unknown matrix format '{other}'"))),
        }
    }
}

fn bigint_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) if v.unsigned_abs() < (1u64 << 53) => json!(v),
        _ => json!(x.to_string()),
    }
}

fn rational_json(q: &BigRational) -> Value {
    json!({"num": bigint_json(q.numer()), "den": bigint_json(q.denom())})
}

fn exact_rationals(m: &Matrix) -> Vec<BigRational> {
    if let Some(q) = m.rational() {
        return q.to_vec();
    }
    if let Some((_, d)) = m.decimal() {
        return d.iter().map(|x| x.to_rational()).collect();
    }
    m.values()
        .transpose()
        .iter()
        .map(|&x| BigRational::from_float(x).unwrap_or_else(BigRational::zero))
        .collect()
}

fn rows_of<T: Clone>(n: usize, flat: Vec<T>) -> Vec<Vec<T>> {
    flat.chunks(n).map(<[T]>::to_vec).collect()
}

/// Matrix as a JSON value in the given format (`Csv` is rejected).
pub fn matrix_to_json(m: &Matrix, format: MatrixFormat) -> Result<Value> {
    let n = m.n();
    let value = match format {
        MatrixFormat::Json if m.rational().is_some() || m.decimal().is_some() => {
            return matrix_to_json(m, if m.rational().is_some() { MatrixFormat::RationalJson } else { MatrixFormat::DecimalJson });
        }
        MatrixFormat::Json => {
            let rows: Vec<Vec<f64>> = (0..n).map(|i| m.values().row(i).iter().copied().collect()).collect();
            json!({"n": n, "mode": "machine", "rows": rows})
        }
        MatrixFormat::RationalJson => {
            let flat: Vec<Value> = exact_rationals(m).iter().map(rational_json).collect();
            json!({"n": n, "mode": "machine", "rows": rows_of(n, flat)})
        }
        MatrixFormat::DecimalJson => {
            let (digits, flat): (u32, Vec<String>) = match m.decimal() {
                Some((ctx, d)) => (ctx.digits(), d.iter().map(|x| x.to_string_places(ctx.digits())).collect()),
                None => {
                    let ctx = DecimalContext::new(default_digits());
                    let flat = exact_rationals(m).iter().map(|q| ctx.from_rational(q).to_string_places(ctx.digits())).collect();
                    (ctx.digits(), flat)
                }
            };
            json!({"n": n, "mode": "decimal", "digits": digits, "rows": rows_of(n, flat)})
        }
        MatrixFormat::Csv => return Err(Error::Parse("CSV is not a JSON format".into())),
    };
    Ok(value)
}

fn json_bigint(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(x) => x
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("rational part {x} is not an integer"))),
        Value::String(s) => s.trim().parse().map_err(|_| Error::Parse(format!("bad integer '{s}'"))),
        _ => Err(Error::Parse("rational parts must be integers".into())),
    }
}

fn json_rational(v: &Value) -> Result<Option<BigRational>> {
    match v {
        Value::Object(o) => {
            let num = json_bigint(o.get("num").ok_or_else(|| Error::Parse("missing 'num'".into()))?)?;
            let den = json_bigint(o.get("den").ok_or_else(|| Error::Parse("missing 'den'".into()))?)?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Some(BigRational::new(num, den)))
        }
        Value::Number(x) if x.is_i64() => Ok(Some(BigRational::from_integer(x.as_i64().unwrap_or(0).into()))),
        _ => Ok(None),
    }
}

/// Inverse of [`matrix_to_json`].
pub fn matrix_from_json(v: &Value) -> Result<Matrix> {
    let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Parse("missing integer 'n'".into()))? as usize;
    let rows = v.get("rows").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing 'rows'".into()))?;
    if rows.len() != n {
        return Err(Error::ShapeMismatch(format!("{} rows for n = {n}", rows.len())));
    }
    let mut flat = Vec::with_capacity(n * n);
    for r in rows {
        let r = r.as_array().ok_or_else(|| Error::Parse("each row must be an array".into()))?;
        if r.len() != n {
            return Err(Error::ShapeMismatch(format!("row of length {} for n = {n}", r.len())));
        }
        flat.extend(r.iter());
    }
    let mode = v.get("mode").and_then(Value::as_str).unwrap_or("machine");
    match mode {
        "decimal" => {
            let digits = v.get("digits").and_then(Value::as_u64).map(|d| d as u32).unwrap_or_else(default_digits);
            let ctx = DecimalContext::new(digits);
            let entries = flat
                .iter()
                .map(|e| match e {
                    Value::String(s) => ctx.parse(s),
                    Value::Number(x) => ctx.parse(&x.to_string()),
                    _ => Err(Error::Parse("decimal entries must be strings".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            Matrix::from_decimal(n, ctx, entries)
        }
        "machine" => {
            let has_object = flat.iter().any(|e| e.is_object());
            if has_object {
                let exact: Vec<Option<BigRational>> = flat.iter().map(|e| json_rational(e)).collect::<Result<_>>()?;
                if exact.iter().all(Option::is_some) {
                    return Matrix::from_rational(n, exact.into_iter().flatten().collect());
                }
            }
            let vals = flat
                .iter()
                .map(|e| match e {
                    Value::Number(x) => x.as_f64().ok_or_else(|| Error::Parse(format!("bad number {x}"))),
                    Value::Object(_) => json_rational(e)?
                        .and_then(|q| q.to_f64())
                        .ok_or_else(|| Error::Parse("bad rational entry".into())),
                    _ => Err(Error::Parse("machine entries must be numbers".into())),
                })
                .collect::<Result<Vec<f64>>>()?;
            Matrix::from_dmatrix(nalgebra::DMatrix::from_row_slice(n, n, &vals))
        }
        other => Err(Error::Parse(format!("unknown mode '{other}'"))),
    }
}

/// `n` on the first line, then one comma-separated row per line.
pub fn matrix_to_csv(m: &Matrix) -> String {
    let n = m.n();
    let mut out = format!("{n}\n");
    let cells: Vec<String> = match (m.rational(), m.decimal()) {
        (Some(q), _) => q.iter().map(|x| if x.is_integer() { x.numer().to_string() } else { format!("{}/{}", x.numer(), x.denom()) }).collect(),
        (None, Some((ctx, d))) => d.iter().map(|x| x.to_string_places(ctx.digits())).collect(),
        (None, None) => m.values().transpose().iter().map(|x| format!("{x:?}")).collect(),
    };
    for row in cells.chunks(n) {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn parse_cell(s: &str) -> Result<BigRational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p = parse_rational_decimal(p.trim())?;
            let q = parse_rational_decimal(q.trim())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in '{s}'")));
            }
            Ok(p / q)
        }
        None => parse_rational_decimal(s.trim()),
    }
}

/// Inverse of [`matrix_to_csv`]. Fractions and plain decimals alike are read
/// exactly when every cell is a fraction or an integer; otherwise the matrix is
/// machine precision.
pub fn matrix_from_csv(text: &str) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut records = rdr.records();
    let head = records.next().ok_or_else(|| Error::Parse("empty CSV".into()))?.map_err(|e| Error::Parse(e.to_string()))?;
    let n: usize = head.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse("first line must hold n".into()))?;
    let mut cells: Vec<String> = Vec::with_capacity(n * n);
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != n {
            return Err(Error::ShapeMismatch(format!("CSV row of length {} for n = {n}", rec.len())));
        }
        cells.extend(rec.iter().map(str::to_string));
    }
    if cells.len() != n * n {
        return Err(Error::ShapeMismatch(format!("{} CSV cells for n = {n}", cells.len())));
    }
    let exact = cells.iter().all(|c| c.contains('/') || c.trim().parse::<i64>().is_ok());
    if exact {
        let q = cells.iter().map(|c| parse_cell(c)).collect::<Result<Vec<_>>>()?;
        return Matrix::from_rational(n, q);
    }
    let vals = cells
        .iter()
        .map(|c| c.trim().parse::<f64>().or_else(|_| parse_cell(c).map(|q| q.to_f64().unwrap_or(f64::NAN))))
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|_| Error::Parse("bad CSV entry".into()))?;
    Matrix::from_dmatrix(nalgebra::DMatrix::from_row_slice(n, n, &vals))
}

/// Serializes a matrix in the requested format.
pub fn matrix_to_string(m: &Matrix, format: MatrixFormat) -> Result<String> {
    match format {
        MatrixFormat::Csv => Ok(matrix_to_csv(m)),
        f => Ok(serde_json::to_string_pretty(&matrix_to_json(m, f)?)? + "\n"),
    }
}

/// Parses JSON when the text starts with `{`, CSV otherwise.
pub fn matrix_from_str(text: &str) -> Result<Matrix> {
    if text.trim_start().starts_with('{') {
        matrix_from_json(&serde_json::from_str(text)?)
    } else {
        matrix_from_csv(text)
    }
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    matrix_from_str(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &Matrix, format: MatrixFormat) -> Result<()> {
    fs::write(path, matrix_to_string(m, format)?)?;
    Ok(())
}

/// Chet coefficients as CSV rows `i,c_i,b_i`, with `places` digits after the point.
pub fn chet_csv(data: &ChetData, places: u32) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["i", "c_i", "b_i"]);
    for i in 0..data.c.len().max(data.b.len()) {
        let cell = |v: &[crate::core::Decimal]| v.get(i).map(|x| x.to_string_places(places)).unwrap_or_default();
        let _ = w.write_record([i.to_string(), cell(&data.c), cell(&data.b)]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

/// Rows of any serializable record type as CSV with a header line.
pub fn records_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Pretty-printed JSON of any serializable report.
pub fn to_json_string<T: Serialize>(x: &T) -> Result<String> {
    serde_json::to_string_pretty(x).map_err(|e| Error::Parse(e.to_string()))
}

/// Short label of a matrix's precision, for reports.
pub fn precision_label(m: &Matrix) -> String {
    match (m.rational().is_some(), m.precision()) {
        (true, _) => "rational".into(),
        (false, Precision::Decimal { digits }) => format!("decimal-{digits}"),
        (false, Precision::Machine) => "machine".into(),
    }
}

/// Rounds to 12 significant digits for printed reports.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{chet, rootn};
    use crate::core::PrecisionConfig;
    use crate::random::{random_irreducible, rng};

    #[test]
    fn rational_round_trip_is_exact() {
        let a = rootn(9).unwrap();
        for f in [MatrixFormat::Json, MatrixFormat::RationalJson, MatrixFormat::Csv] {
            let back = matrix_from_str(&matrix_to_string(&a, f).unwrap()).unwrap();
            assert_eq!(back.rational(), a.rational(), "{f:?}");
        }
        let v = matrix_to_json(&a, MatrixFormat::Json).unwrap();
        assert_eq!(v["rows"][0][0], json!({"num": 11, "den": 15}));
    }

    #[test]
    fn machine_round_trip_is_bit_identical() {
        let m = random_irreducible(5, 0.5, &mut rng(3));
        for f in [MatrixFormat::Json, MatrixFormat::Csv] {
            let back = matrix_from_str(&matrix_to_string(&m, f).unwrap()).unwrap();
            assert_eq!(back.values(), m.values(), "{f:?}");
        }
    }

    #[test]
    fn decimal_round_trip() {
        let (c, data) = chet(5, &PrecisionConfig::decimal(40).unwrap()).unwrap();
        let s = matrix_to_string(&c, MatrixFormat::DecimalJson).unwrap();
        let back = matrix_from_str(&s).unwrap();
        assert_eq!(back.precision(), Precision::Decimal { digits: 40 });
        assert!((back.values() - c.values()).amax() < 1e-15);
        let csv = chet_csv(&data, 10);
        assert!(csv.starts_with("i,c_i,b_i\n0,"));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(matrix_from_str("{\"n\": 2, \"rows\": [[1, 0]]}"), Err(Error::ShapeMismatch(_))));
        assert!(matches!(matrix_from_str("2\n1,0\n0"), Err(Error::ShapeMismatch(_))));
        assert!(matrix_from_str("{\"n\": 1, \"rows\": [[{\"num\": 1, \"den\": 0}]]}").is_err());
        assert!(matches!("xml".parse::<MatrixFormat>(), Err(Error::Parse(_))));
        let m = matrix_from_str("2\n1/2, 1/2\n0.5, 0.5\n").unwrap();
        assert_eq!(m.get(1, 0), 0.5);
    }

    #[test]
    fn rounding_to_twelve_digits() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(16.0 / 60.0), 0.266666666667);
    }
}
