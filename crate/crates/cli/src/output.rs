//! CSV and JSON writers with fixed number formatting.

use serde::Serialize;
use std::io::{self, Write};
use std::path::Path;

/// 17 significant digits in scientific notation; `NaN`, `inf`, `-inf` otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Open the output path, or standard output when absent.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

/// Header plus rows, RFC-4180 quoting, `\n` line ends.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// JSON-safe float: non-finite values become `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(2.0 / 3.0), "6.6666666666666663e-1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a".into(), "b,c".into()], &[vec!["1".into(), "x\"y".into()]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,\"b,c\"\n1,\"x\"\"y\"\n");
    }
}
