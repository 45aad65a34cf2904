//! Fixed-format number rendering shared by the CSV exporters.
//!
//! CSV values carry 9 significant digits in scientific notation so repeated
//! runs produce byte-identical files.

/// `1.23456789e-5` style, 9 significant digits. Non-finite values print as
/// `nan`, `inf`, `-inf`.
pub fn csv_number(v: f64) -> String {
    if v == 0.0 {
        // no signed zeros in tables
        "0.00000000e0".to_string()
    } else if v.is_finite() {
        format!("{v:.8e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn csv_row(fields: &[String]) -> String {
    fields.join(",")
}
