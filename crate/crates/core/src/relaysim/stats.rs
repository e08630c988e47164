use std::fmt::Write;

use super::{BerRecord, SimError};

const Z95: f64 = 1.959963984540054;

/// Wilson score 95% interval for `errors` out of `n`.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if errors as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Decades of BER lost per decade of SNR between two points (positive when
/// the BER falls).
pub fn log_slope(a: &BerRecord, b: &BerRecord) -> f64 {
    (a.ber.log10() - b.ber.log10()) / ((b.snr_db - a.snr_db) / 10.0)
}

/// SNR at which the curve crosses `target`, interpolating linearly in
/// `log10(BER)` between the bracketing points; records must be sorted by
/// SNR.
pub fn snr_at_ber(records: &[BerRecord], target: f64) -> Option<f64> {
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.ber >= target && b.ber <= target && a.ber > 0.0 && b.ber > 0.0 {
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            if la == lb {
                return Some(a.snr_db);
            }
            Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}

/// `scheme,snr_db,trials,bit_errors,ber,ci95`.
pub fn write_csv(records: &[BerRecord]) -> String {
    let mut out = String::from("scheme,snr_db,trials,bit_errors,ber,ci95\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{:.6e},{:.6e}",
            r.scheme, r.snr_db, r.trials, r.bit_errors, r.ber, r.ci95
        )
        .expect("writing to a String");
    }
    out
}

/// Per end node: `scheme,snr_db,node,trials,bit_errors,ber,ci95`, where node
/// `A` counts errors in the bits A decodes.
pub fn write_node_csv(records: &[BerRecord]) -> String {
    let mut out = String::from("scheme,snr_db,node,trials,bit_errors,ber,ci95\n");
    for r in records {
        let (at_a, at_b) = (r.bits_at_a, r.bits - r.bits_at_a);
        for (node, errors, bits) in [("A", r.errors_at_a, at_a), ("B", r.errors_at_b, at_b)] {
            let (lo, hi) = wilson_interval(errors, bits);
            let ber = if bits == 0 {
                0.0
            } else {
                errors as f64 / bits as f64
            };
            writeln!(
                out,
                "{},{},{node},{},{errors},{ber:.6e},{:.6e}",
                r.scheme,
                r.snr_db,
                r.trials,
                (hi - lo) / 2.0
            )
            .expect("writing to a String");
        }
    }
    out
}

/// One row of a table written by [`write_csv`].
#[derive(Clone, Debug, PartialEq, serde::Deserialize)]
pub struct BerRow {
    pub scheme: String,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ci95: f64,
}

pub fn read_ber_table(text: &str) -> Result<Vec<BerRow>, SimError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| SimError::Table(e.to_string()))
}

/// Wide layout for plotting: one row per SNR, a BER and a CI column per
/// scheme (schemes in order of first appearance, optionally filtered).
pub fn pivot_ber(text: &str, schemes: Option<&[String]>) -> Result<String, SimError> {
    let rows = read_ber_table(text)?;
    let mut names: Vec<&str> = Vec::new();
    for r in &rows {
        let keep = schemes.is_none_or(|s| s.iter().any(|x| x == &r.scheme));
        if keep && !names.contains(&r.scheme.as_str()) {
            names.push(&r.scheme);
        }
    }
    let mut snrs: Vec<f64> = rows.iter().map(|r| r.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    let mut out = String::from("snr_db");
    for n in &names {
        write!(out, ",{n},{n}_ci95").expect("writing to a String");
    }
    out.push('\n');
    for snr in snrs {
        write!(out, "{snr}").expect("writing to a String");
        for n in &names {
            match rows.iter().find(|r| r.scheme == *n && r.snr_db == snr) {
                Some(r) => write!(out, ",{:.6e},{:.6e}", r.ber, r.ci95),
                None => write!(out, ",,"),
            }
            .expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}
