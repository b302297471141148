//! Plain-text complex matrices: one row per line, whitespace-separated
//! entries written as `re`, `re+imj` or `re-imj`. Blank lines and lines
//! starting with `#` are skipped.

use schmidt_core::tensor::CMatrix;
use schmidt_core::Complex64 as C64;

use crate::error::CliError;

fn parse_entry(token: &str) -> Option<C64> {
    let Some(body) = token.strip_suffix('j') else {
        return token.parse::<f64>().ok().filter(|x| x.is_finite()).map(|re| C64::new(re, 0.0));
    };
    // split at the last sign that is not a leading sign or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (body[..i].parse::<f64>().ok()?, body[i..].parse::<f64>().ok()?),
        None => (0.0, body.parse::<f64>().ok()?),
    };
    (re.is_finite() && im.is_finite()).then(|| C64::new(re, im))
}

/// Parses a square matrix, reporting the line and column of the first bad
/// entry.
pub fn parse_matrix(text: &str) -> Result<CMatrix, CliError> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut first_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        let mut col = 0usize;
        for token in line.split_whitespace() {
            // byte offset of this token within the line
            let start = line[col..].find(token).map(|o| o + col).unwrap_or(col);
            col = start + token.len();
            let z = parse_entry(token).ok_or_else(|| {
                CliError::Parse(format!(
                    "line {line_no}, column {}: cannot read {token:?} as a complex number (re, re+imj or re-imj)",
                    line[..start].chars().count() + 1
                ))
            })?;
            row.push(z);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::Parse(format!(
                    "line {line_no}: row has {} entries but line {first_line} has {}",
                    row.len(),
                    first.len()
                )));
            }
        } else {
            first_line = line_no;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse("input contains no matrix rows".into()));
    }
    let (r, c) = (rows.len(), rows[0].len());
    if r != c {
        return Err(CliError::Parse(format!("matrix must be square, got {r}x{c}")));
    }
    if r < 2 {
        return Err(CliError::Parse("matrix must be at least 2x2".into()));
    }
    CMatrix::from_rows(&rows).map_err(|e| CliError::Parse(e.to_string()))
}

#[cfg(test)]
/// Writes a matrix in the same format with 17 significant digits.
pub fn format_matrix(m: &CMatrix) -> String {
    use crate::output::fmt;
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m
            .row(i)
            .iter()
            .map(|z| {
                let im = fmt(z.im);
                let sign = if im.starts_with('-') { "" } else { "+" };
                format!("{}{sign}{im}j", fmt(z.re))
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
