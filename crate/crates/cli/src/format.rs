/// Scientific notation with 17 significant digits.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}
