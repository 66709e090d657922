use std::io::{self, Write};

/// Writes one CSV row of floats with 17 significant digits, enough to
/// round-trip binary64.
pub(crate) fn write_row<W: Write>(w: &mut W, values: impl IntoIterator<Item = f64>) -> io::Result<()> {
    let mut first = true;
    for v in values {
        if !first {
            w.write_all(b",")?;
        }
        first = false;
        write!(w, "{v:.16e}")?;
    }
    w.write_all(b"\n")
}
