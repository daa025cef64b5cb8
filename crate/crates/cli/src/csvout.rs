//! CSV emission with round-trip-safe numbers.

/// 17 significant digits: enough to reproduce any f64 bit pattern exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Builds a CSV document from a header and row iterator (always `\n` line
/// endings, no trailing separator) so output bytes are platform-independent.
pub fn csv_document<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<str>,
{
    let mut doc = String::with_capacity(1024);
    doc.push_str(header);
    doc.push('\n');
    for row in rows {
        doc.push_str(row.as_ref());
        doc.push('\n');
    }
    doc
}
