use num::{BigRational, ToPrimitive};
use serde::Serialize;

use crate::{Format, Result};

/// One header row plus one row per record (CSV), or a JSON array.
pub fn render<T: Serialize>(rows: &[T], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        Format::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
    }
}

/// `p/q` form, `p` for integers.
pub(crate) fn exact(r: &BigRational) -> String {
    r.to_string()
}

pub(crate) fn float(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}
