//! Number rendering for the text, CSV and JSON outputs.

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

/// Magnitudes below this print as `0` in text tables.
pub const TEXT_ZERO: f64 = 5e-11;

/// Ten significant digits, truncated toward zero, trailing zeros removed.
///
/// Truncation rather than rounding matches the reference tables, e.g.
/// `16.907058535368` prints as `16.90705853`. The value is first rounded to
/// `NOISE_DIGITS` so that `9 - 1e-14` still prints as `9`.
pub fn sig10(x: f64) -> String {
    significant(x, 10)
}

/// Significant digits kept before truncation.
pub const NOISE_DIGITS: usize = 14;

pub fn significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < TEXT_ZERO {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", NOISE_DIGITS.max(digits) - 1, x.abs());
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let all_digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let kept = &all_digits[..digits];
    let sign = if x < 0.0 { "-" } else { "" };
    let body = if (-5..15).contains(&exponent) {
        positional(kept, exponent)
    } else {
        let (lead, rest) = kept.split_at(1);
        let rest = rest.trim_end_matches('0');
        if rest.is_empty() {
            format!("{lead}e{exponent}")
        } else {
            format!("{lead}.{rest}e{exponent}")
        }
    };
    format!("{sign}{body}")
}

fn positional(digits: &str, exponent: i32) -> String {
    let text = if exponent < 0 {
        format!("0.{}{}", "0".repeat((-exponent - 1) as usize), digits)
    } else {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    }
}

/// Shortest round-trip decimal, used by CSV output.
pub fn exact(x: f64) -> String {
    x.to_string()
}

/// Right-aligned fixed-width table.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        (0..columns)
            .map(|c| {
                format!(
                    "{:>width$}",
                    cells.get(c).map_or("", String::as_str),
                    width = widths[c]
                )
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header);
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}
