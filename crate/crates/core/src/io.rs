//! Plain-text state and channel files, and CSV number formatting.
//!
//! A state file is a `dims dA dB` line followed by `dA·dB` rows of
//! whitespace-separated `re+imj` literals. A channel file starts with
//! `channel d_in d_out n_ops` and lists each Kraus operator's `d_out` rows
//! in the same literal syntax. Blank lines and lines starting with `#` are
//! ignored.

use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::DensityMatrix;

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{:.16e}{sign}{:.16e}j", z.re, z.im)
}

fn write_rows(out: &mut String, m: &ComplexMatrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn write_state(rho: &DensityMatrix) -> String {
    let (da, db) = rho.dims();
    let mut out = format!("dims {da} {db}\n");
    write_rows(&mut out, rho.matrix());
    out
}

pub fn write_channel(channel: &KrausChannel) -> String {
    let mut out = format!(
        "channel {} {} {}\n",
        channel.input_dim(),
        channel.output_dim(),
        channel.kraus_ops().len()
    );
    for k in channel.kraus_ops() {
        write_rows(&mut out, k);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_record(&mut self) -> Result<(usize, &'a str)> {
        for (idx, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last = idx + 1;
            return Ok((idx + 1, t));
        }
        Err(parse_err(self.last + 1, "unexpected end of input"))
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next_record() {
            Ok((line, _)) => Err(parse_err(line, "trailing content after the last row")),
            Err(_) => Ok(()),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(lines: &mut Lines, keyword: &str, fields: usize) -> Result<Vec<usize>> {
    let (line, text) = lines.next_record()?;
    let mut words = text.split_whitespace();
    if words.next() != Some(keyword) {
        return Err(parse_err(line, format!("expected a `{keyword}` header")));
    }
    let values = words
        .map(|w| w.parse::<usize>().map_err(|_| parse_err(line, format!("`{w}` is not a count"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != fields || values.contains(&0) {
        return Err(parse_err(line, format!("`{keyword}` takes {fields} positive counts")));
    }
    Ok(values)
}

fn parse_matrix(lines: &mut Lines, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        let (line, text) = lines.next_record()?;
        let entries: Vec<&str> = text.split_whitespace().collect();
        if entries.len() != cols {
            return Err(parse_err(line, format!("expected {cols} entries, found {}", entries.len())));
        }
        for (j, lit) in entries.iter().enumerate() {
            let z: Complex64 = lit
                .parse()
                .map_err(|_| parse_err(line, format!("`{lit}` is not a complex literal")))?;
            if !z.is_finite() {
                return Err(parse_err(line, format!("`{lit}` is not finite")));
            }
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

pub fn parse_state(text: &str) -> Result<DensityMatrix> {
    let mut lines = Lines::new(text);
    let dims = parse_header(&mut lines, "dims", 2)?;
    let n = dims[0]
        .checked_mul(dims[1])
        .ok_or(Error::SizeOverflow(usize::MAX))?;
    if n > crate::linalg::MAX_DIM {
        return Err(Error::SizeOverflow(n));
    }
    let m = parse_matrix(&mut lines, n, n)?;
    lines.expect_end()?;
    DensityMatrix::new(m, (dims[0], dims[1]))
}

pub fn parse_channel(text: &str) -> Result<KrausChannel> {
    let mut lines = Lines::new(text);
    let h = parse_header(&mut lines, "channel", 3)?;
    let (d_in, d_out, count) = (h[0], h[1], h[2]);
    if d_in.max(d_out) > crate::linalg::MAX_DIM {
        return Err(Error::SizeOverflow(d_in.max(d_out)));
    }
    let ops = (0..count)
        .map(|_| parse_matrix(&mut lines, d_out, d_in))
        .collect::<Result<Vec<_>>>()?;
    lines.expect_end()?;
    KrausChannel::new(d_in, d_out, ops)
}

/// Twelve significant digits, shortest round-trip form, locale-free.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".into();
    }
    if rounded.abs() < 1e-6 || rounded.abs() >= 1e15 {
        return format!("{rounded:e}");
    }
    format!("{rounded}")
}

/// Joins already-formatted fields into a CSV line (fields never contain commas).
pub fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::depolarizing;
    use crate::states::random_density_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn state_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (da, db) in [(2, 2), (3, 2), (3, 3)] {
            let rho = random_density_matrix(da, db, da * db, &mut rng).unwrap();
            let back = parse_state(&write_state(&rho)).unwrap();
            assert_eq!(back.dims(), (da, db));
            assert_eq!(back.matrix().max_abs_diff(rho.matrix()), 0.0);
        }
    }

    #[test]
    fn channel_round_trip() {
        let n = depolarizing(3, 0.4).unwrap();
        let back = parse_channel(&write_channel(&n)).unwrap();
        assert_eq!(back.kraus_ops().len(), n.kraus_ops().len());
        for (a, b) in back.kraus_ops().iter().zip(n.kraus_ops()) {
            assert_eq!(a.max_abs_diff(b), 0.0);
        }
    }

    #[test]
    fn comments_and_short_literals() {
        let text = "# bell\ndims 2 2\n0.5 0 0 0.5\n0 0 0 0\n\n0 0 0 0\n0.5 0 0 0.5+0j\n";
        let rho = parse_state(text).unwrap();
        assert!((rho.matrix()[(0, 3)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_state("dims 2 2\n1 0 0 0\n0 0 0\n").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 3,
                message: "expected 4 entries, found 3".into()
            }
        );
        assert!(matches!(parse_state("dim 2 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_state("dims 1 1\nfoo\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_state("dims 1 1\n1\n1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_state("dims 2 2\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_channel("channel 2 2 1\n0.5 0\n0 0.5\n"), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0 / 3f64.sqrt()), "0.57735026919");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(-1.0), "-1");
        assert_eq!(csv_line(&["a".into(), fmt_num(0.25)]), "a,0.25\n");
    }
}
