//! CSV output and the two CSV inputs: sampled series and custom data tables.
//!
//! Files use `,` separators, `.` decimals and lowercase `e` exponents, and always
//! carry a header row. Floats are written in shortest round-trip form so that
//! identical runs produce identical bytes.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shortest round-trip rendering: plain decimals for moderate magnitudes,
/// lowercase exponent form (`1.5e-7`) otherwise.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes a header and rows to any writer.
pub fn write_rows<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_rows(std::io::BufWriter::new(file), header, rows)
}

/// Rows `x,re,im,abs` of a complex series.
pub fn series_rows(series: &[(f64, Complex64)]) -> Vec<Vec<String>> {
    series
        .iter()
        .map(|(x, y)| vec![format_float(*x), format_float(y.re), format_float(y.im), format_float(y.norm())])
        .collect()
}

pub fn write_series(path: &Path, x_label: &str, series: &[(f64, Complex64)]) -> Result<()> {
    write_csv(path, &[x_label, "re", "im", "abs"], &series_rows(series))
}

fn parse_field(field: &str, line: u64, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: {what} '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("line {line}: {what} is not finite")));
    }
    Ok(v)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(input)
}

/// Reads a series with header `x,re,im[,abs]`; the `abs` column is ignored.
/// Returns the name of the first column and the samples.
pub fn read_series<R: Read>(input: R) -> Result<(String, Vec<(f64, Complex64)>)> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.len() < 3 || header.len() > 4 {
        return Err(Error::Parse(format!("series header needs 3 or 4 columns, found {}", header.len())));
    }
    if &header[1] != "re" || &header[2] != "im" || (header.len() == 4 && &header[3] != "abs") {
        return Err(Error::Parse("series header must be x,re,im[,abs]".into()));
    }
    let label = header[0].to_string();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let x = parse_field(&record[0], line, &label)?;
        let re = parse_field(&record[1], line, "re")?;
        let im = parse_field(&record[2], line, "im")?;
        out.push((x, Complex64::new(re, im)));
    }
    Ok((label, out))
}

pub fn read_series_file(path: &Path) -> Result<(String, Vec<(f64, Complex64)>)> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_series(file)
}

/// Reads a two-column `R,value` table with strictly increasing radii.
pub fn read_custom_table<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.len() != 2 || &header[0] != "R" || &header[1] != "value" {
        return Err(Error::Parse("table header must be R,value".into()));
    }
    let mut out: Vec<(f64, f64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let r = parse_field(&record[0], line, "R")?;
        let v = parse_field(&record[1], line, "value")?;
        if r < 0.0 {
            return Err(Error::Parse(format!("line {line}: negative radius")));
        }
        if let Some(&(prev, _)) = out.last() {
            if !(r > prev) {
                return Err(Error::Parse(format!("line {line}: radii must increase")));
            }
        }
        out.push((r, v));
    }
    if out.len() < 2 {
        return Err(Error::Parse("table needs at least two rows".into()));
    }
    Ok(out)
}

pub fn read_custom_table_file(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_custom_table(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format_is_lowercase_and_round_trips() {
        assert_eq!(format_float(1.5e-7), "1.5e-7");
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(-0.25), "-0.25");
        assert_eq!(format_float(3e20), "3e20");
        for x in [std::f64::consts::PI, -2.5e300, 1e-310] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn series_round_trip() {
        let s = vec![(1.0, Complex64::new(0.5, -0.25)), (2.0, Complex64::new(1e-9, 3.0))];
        let mut buf = Vec::new();
        write_rows(&mut buf, &["u", "re", "im", "abs"], &series_rows(&s)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("u,re,im,abs\n"));
        let (label, back) = read_series(buf.as_slice()).unwrap();
        assert_eq!(label, "u");
        assert_eq!(back, s);
    }

    #[test]
    fn series_rejects_bad_input() {
        assert!(read_series("u,re\n1,2\n".as_bytes()).is_err());
        assert!(read_series("u,re,im\n1,x,2\n".as_bytes()).is_err());
        assert!(read_series("u,re,im\n1,2\n".as_bytes()).is_err());
        assert!(read_series("u,re,im\n1,inf,0\n".as_bytes()).is_err());
        let (_, ok) = read_series("t,re,im\n# note\n1, 2, 3\n".as_bytes()).unwrap();
        assert_eq!(ok, vec![(1.0, Complex64::new(2.0, 3.0))]);
    }

    #[test]
    fn table_parsing() {
        let t = read_custom_table("R,value\n0.1,0\n0.3,1\n0.5,0\n".as_bytes()).unwrap();
        assert_eq!(t, vec![(0.1, 0.0), (0.3, 1.0), (0.5, 0.0)]);
        assert!(read_custom_table("R,value\n0.3,1\n0.1,0\n".as_bytes()).is_err());
        assert!(read_custom_table("R,value\n0.3,1\n".as_bytes()).is_err());
        assert!(read_custom_table("r,v\n0.1,1\n0.2,1\n".as_bytes()).is_err());
        assert!(read_custom_table("R,value\n-0.1,1\n0.2,1\n".as_bytes()).is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_series_file(Path::new("/nonexistent/series.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/series.csv"));
    }

    proptest! {
        #[test]
        fn arbitrary_series_round_trip(xs in proptest::collection::vec((-1e6f64..1e6, -1e3f64..1e3, -1e3f64..1e3), 0..40)) {
            let s: Vec<(f64, Complex64)> = xs.iter().map(|&(x, a, b)| (x, Complex64::new(a, b))).collect();
            let mut buf = Vec::new();
            write_rows(&mut buf, &["t", "re", "im", "abs"], &series_rows(&s)).unwrap();
            let (_, back) = read_series(buf.as_slice()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn parsers_never_panic(text in ".{0,200}") {
            let _ = read_series(text.as_bytes());
            let _ = read_custom_table(text.as_bytes());
        }
    }
}
