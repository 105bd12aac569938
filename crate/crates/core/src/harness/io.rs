use crate::error::{Error, Result};

/// Reads a vector written as comma- and/or whitespace-separated numbers.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v: f64 = t.parse().map_err(|_| Error::Parse(format!("bad number {t:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("non-finite value {t:?}")))
            }
        })
        .collect()
}

/// One comma-separated line, 17 significant digits per entry.
pub fn format_vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
    parts.join(",") + "\n"
}
