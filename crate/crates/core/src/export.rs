//! Plain-text and image writers shared by the command-line tools.

use std::fmt::Write as _;

/// Shortest round-trip decimal form of `x`.
///
/// Plain notation is used for moderate magnitudes and exponent notation
/// otherwise, so tiny tail intensities do not expand into hundreds of zeros.
/// Both forms parse back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Join values with commas using [`fmt_f64`].
pub fn csv_row(values: impl IntoIterator<Item = f64>) -> String {
    let mut out = String::new();
    for (k, v) in values.into_iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(v));
    }
    out
}

/// Binary 16-bit grayscale PGM (P5). Rows are written top to bottom; each
/// sample is mapped linearly from `[0, max]` of the whole image to
/// `[0, 65535]` and stored big-endian.
pub fn pgm16(rows: &[Vec<f64>]) -> Vec<u8> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let max = rows.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0_f64, f64::max);

    let mut header = String::new();
    let _ = write!(header, "P5\n{width} {height}\n65535\n");
    let mut out = header.into_bytes();
    out.reserve(2 * width * height);
    for row in rows {
        assert_eq!(row.len(), width, "ragged heatmap rows");
        for &v in row {
            let level =
                if max > 0.0 && v.is_finite() { ((v.max(0.0) / max) * 65535.0).round().min(65535.0) as u16 } else { 0 };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}
