//! Minimal CSV emission: UTF-8, comma-separated, mandatory header row,
//! floats in shortest round-trip decimal form. Field values never contain
//! commas, so no quoting is needed.

use std::io::Write;
use std::path::Path;

pub fn format_float(v: f64) -> String {
    format!("{v}")
}

pub fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width must match header");
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}
