//! Plain-text grid files: a header line `M nA nB t` followed by `M^nA` rows
//! of `M^nB` symbols. Blank lines and lines starting with `#` are skipped.

use std::fs;
use std::path::Path;

use super::{is_latin, verify_removal, LatinError, LatinRectangle};
use crate::fadespace::{SubspaceKey, SystemDims};
use crate::psk::PskParams;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub params: PskParams,
    pub dims: SystemDims,
    pub rect: LatinRectangle,
}

pub fn parse_fixture(text: &str) -> Result<Fixture, LatinError> {
    let err = |line: usize, reason: &str| LatinError::Fixture {
        line,
        reason: reason.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|x| {
            x.parse()
                .map_err(|_| err(hline, "header must be `M nA nB t`"))
        })
        .collect::<Result<_, _>>()?;
    let [m, na, nb, t] = nums[..] else {
        return Err(err(hline, "header must be `M nA nB t`"));
    };
    let params = PskParams::from_order(m).map_err(|e| err(hline, &e.to_string()))?;
    let dims = SystemDims::new(na, nb, 1).map_err(|e| err(hline, &e.to_string()))?;
    let rows = m
        .checked_pow(na as u32)
        .ok_or_else(|| err(hline, "too many rows"))?;
    let cols = m
        .checked_pow(nb as u32)
        .ok_or_else(|| err(hline, "too many columns"))?;
    let mut cells = Vec::with_capacity(rows * cols);
    let mut last = hline;
    for r in 0..rows {
        let (line, text) = lines
            .next()
            .ok_or_else(|| err(last + 1, &format!("missing row {r}")))?;
        last = line;
        let row: Vec<u32> = text
            .split_whitespace()
            .map(|x| {
                x.parse()
                    .map_err(|_| err(line, &format!("row {r}: bad symbol {x:?}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != cols {
            return Err(err(
                line,
                &format!("row {r} has {} symbols, expected {cols}", row.len()),
            ));
        }
        cells.extend(row);
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, "trailing data after the grid"));
    }
    let t = u32::try_from(t).map_err(|_| err(hline, "alphabet too large"))?;
    let rect = LatinRectangle::new(rows, cols, cells, t).map_err(|e| err(hline, &e.to_string()))?;
    Ok(Fixture { params, dims, rect })
}

pub fn format_fixture(params: PskParams, rect: &LatinRectangle) -> Result<String, LatinError> {
    let dims = rect.layout(params)?;
    let mut out = format!("{} {} {} {}\n", params.order(), dims.na, dims.nb, rect.t());
    for r in 0..rect.rows() {
        let row: Vec<String> = rect.row(r).iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// One line of a captions file: `name key key ...`, naming `name.txt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caption {
    pub name: String,
    pub keys: Vec<SubspaceKey>,
}

pub fn parse_captions(text: &str) -> Result<Vec<Caption>, LatinError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let name = words.next().unwrap_or_default().to_string();
        let keys = words
            .map(|w| {
                w.parse().map_err(|e| LatinError::Fixture {
                    line: i + 1,
                    reason: format!("{w:?}: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        out.push(Caption { name, keys });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureCheck {
    pub name: String,
    pub fixture: Fixture,
    pub latin: bool,
    /// Captioned keys the grid fails to remove.
    pub failed: Vec<SubspaceKey>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureReport {
    pub checks: Vec<FixtureCheck>,
}

impl FixtureReport {
    pub fn all_latin(&self) -> bool {
        self.checks.iter().all(|c| c.latin)
    }

    pub fn all_removals_hold(&self) -> bool {
        self.checks.iter().all(|c| c.failed.is_empty())
    }

    pub fn passed(&self) -> bool {
        self.all_latin() && self.all_removals_hold()
    }
}

/// Loads every grid named in `dir/captions.txt` and checks it against its
/// caption. `order`, when given, must match each grid's header.
pub fn verify_fixture_set(
    dir: impl AsRef<Path>,
    order: Option<usize>,
) -> Result<FixtureReport, LatinError> {
    let dir = dir.as_ref();
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| LatinError::Io {
            path: p.display().to_string(),
            reason: e.to_string(),
        })
    };
    let captions = parse_captions(&read(&dir.join("captions.txt"))?)?;
    let mut checks = Vec::with_capacity(captions.len());
    for cap in captions {
        let path = dir.join(format!("{}.txt", cap.name));
        let fixture = parse_fixture(&read(&path)?).map_err(|e| LatinError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if let Some(m) = order.filter(|&m| m != fixture.params.order()) {
            return Err(LatinError::Io {
                path: path.display().to_string(),
                reason: format!("grid is for M={}, expected M={m}", fixture.params.order()),
            });
        }
        let latin = is_latin(&fixture.rect.to_rows())?;
        let mut failed = Vec::new();
        for key in cap.keys {
            if !verify_removal(fixture.params, &fixture.rect, &key)? {
                failed.push(key);
            }
        }
        checks.push(FixtureCheck {
            name: cap.name,
            fixture,
            latin,
            failed,
        });
    }
    Ok(FixtureReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::tests::{base, bpsk};

    #[test]
    fn round_trip() {
        let text = format_fixture(bpsk(), &base()).unwrap();
        assert!(text.starts_with("2 2 2 4\n3 0 2 1\n"));
        let f = parse_fixture(&text).unwrap();
        assert_eq!(f.rect, base());
        assert_eq!(f.dims, SystemDims::square(2).unwrap());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "2 1 1 2\n0 1\n1 x\n";
        assert_eq!(
            parse_fixture(bad),
            Err(LatinError::Fixture {
                line: 3,
                reason: "row 1: bad symbol \"x\"".into()
            })
        );
        assert!(matches!(
            parse_fixture("2 1 1 2\n0 1\n"),
            Err(LatinError::Fixture { line: 3, .. })
        ));
        assert!(matches!(
            parse_fixture("3 1 1 2\n"),
            Err(LatinError::Fixture { line: 1, .. })
        ));
        assert!(matches!(
            parse_fixture("2 1 1 2\n0 1\n0 1\n"),
            Err(LatinError::Fixture { line: 1, .. })
        ));
        assert!(parse_fixture("# comment\n2 1 1 2\n\n0 1\n1 0\n").is_ok());
    }

    #[test]
    fn captions_parse() {
        let caps = parse_captions("# header\nxor 05:u:0 0f:u:0,0,0\n\nbase 0e:u:0,2\n").unwrap();
        assert_eq!(caps.len(), 2);
        assert_eq!(caps[0].keys.len(), 2);
        assert_eq!(caps[1].name, "base");
        assert!(matches!(
            parse_captions("a zz:q"),
            Err(LatinError::Fixture { line: 1, .. })
        ));
    }

    #[test]
    fn bundled_sets_verify() {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
        let bpsk = verify_fixture_set(format!("{root}/bpsk"), Some(2)).unwrap();
        assert_eq!(bpsk.checks.len(), 4);
        assert!(bpsk.passed());
        assert!(verify_fixture_set(format!("{root}/bpsk"), Some(4)).is_err());
        assert!(matches!(
            verify_fixture_set(format!("{root}/missing"), None),
            Err(LatinError::Io { .. })
        ));
    }
}
