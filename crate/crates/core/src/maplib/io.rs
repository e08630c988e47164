//! Versioned text format:
//!
//! ```text
//! PLNC-MAPLIB v1
//! M=<int> nA=<int> nB=<int>
//! MAP id=<int> t=<int> removes=<key;key;...>
//! <M^nA rows of M^nB symbols>
//! ...
//! CRC32=<hex over every preceding byte>
//! ```

use std::path::Path;

use super::{MapError, MapLibrary, Origin};
use crate::exec::Execution;
use crate::fadespace::{SubspaceKey, SystemDims};
use crate::latin::LatinRectangle;
use crate::psk::PskParams;

const MAGIC: &str = "PLNC-MAPLIB v1";

pub fn write_library(lib: &MapLibrary) -> String {
    let d = lib.dims();
    let mut out = format!(
        "{MAGIC}\nM={} nA={} nB={}\n",
        lib.params().order(),
        d.na,
        d.nb
    );
    for (id, map) in lib.maps().iter().enumerate() {
        let keys: Vec<String> = map.removed().iter().map(SubspaceKey::to_string).collect();
        out.push_str(&format!(
            "MAP id={id} t={} removes={}\n",
            map.t(),
            keys.join(";")
        ));
        for r in 0..map.rect().rows() {
            let row: Vec<String> = map.rect().row(r).iter().map(u32::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    let crc = crc32fast::hash(out.as_bytes());
    out.push_str(&format!("CRC32={crc:08x}\n"));
    out
}

pub fn save(lib: &MapLibrary, path: impl AsRef<Path>) -> Result<(), MapError> {
    std::fs::write(path, write_library(lib))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<MapLibrary, MapError> {
    parse_library(&std::fs::read_to_string(path)?)
}

fn field<'a>(line: usize, token: Option<&'a str>, name: &str) -> Result<&'a str, MapError> {
    token
        .and_then(|t| t.strip_prefix(name)?.strip_prefix('='))
        .ok_or_else(|| MapError::Format {
            line,
            reason: format!("expected `{name}=`"),
        })
}

fn number(line: usize, text: &str, name: &str) -> Result<usize, MapError> {
    text.parse().map_err(|_| MapError::Format {
        line,
        reason: format!("{name} is not a number: {text:?}"),
    })
}

struct Declared {
    line: usize,
    id: usize,
    removes: Vec<SubspaceKey>,
    rect: LatinRectangle,
}

/// Parses and re-validates a library: grid shape and Latin property per
/// line, then the checksum, then each map's declared removals against a
/// recomputation, then coverage.
pub fn parse_library(text: &str) -> Result<MapLibrary, MapError> {
    let lines: Vec<&str> = text.lines().collect();
    let fmt = |line: usize, reason: &str| MapError::Format {
        line,
        reason: reason.to_string(),
    };
    if lines.first() != Some(&MAGIC) {
        return Err(fmt(1, "missing `PLNC-MAPLIB v1` header"));
    }
    let mut dims_line = lines
        .get(1)
        .ok_or_else(|| fmt(2, "missing system line"))?
        .split_whitespace();
    let m = number(2, field(2, dims_line.next(), "M")?, "M")?;
    let na = number(2, field(2, dims_line.next(), "nA")?, "nA")?;
    let nb = number(2, field(2, dims_line.next(), "nB")?, "nB")?;
    let params = PskParams::from_order(m).map_err(|e| fmt(2, &e.to_string()))?;
    let dims = SystemDims::new(na, nb, 1).map_err(|e| fmt(2, &e.to_string()))?;
    let rows = m
        .checked_pow(na as u32)
        .ok_or_else(|| fmt(2, "too many rows"))?;
    let cols = m
        .checked_pow(nb as u32)
        .ok_or_else(|| fmt(2, "too many columns"))?;

    let mut maps = Vec::new();
    let mut i = 2;
    let crc_line = loop {
        let n = i + 1;
        let line = *lines.get(i).ok_or_else(|| fmt(n, "missing CRC32 line"))?;
        if line.starts_with("CRC32=") {
            break i;
        }
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("MAP") {
            return Err(fmt(n, "expected `MAP` or `CRC32=`"));
        }
        let id = number(n, field(n, tokens.next(), "id")?, "id")?;
        let t = number(n, field(n, tokens.next(), "t")?, "t")?;
        let removes = field(n, tokens.next(), "removes")?;
        let removes: Vec<SubspaceKey> = removes
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e: crate::fadespace::FadeError| fmt(n, &e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        if id != maps.len() {
            return Err(fmt(
                n,
                &format!("map id {id} out of sequence, expected {}", maps.len()),
            ));
        }
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let ln = n + 1 + r;
            let text = lines
                .get(ln - 1)
                .ok_or_else(|| fmt(ln, &format!("missing grid row {r}")))?;
            let row: Vec<u32> = text
                .split_whitespace()
                .map(|x| {
                    x.parse()
                        .map_err(|_| fmt(ln, &format!("grid row {r}: bad symbol {x:?}")))
                })
                .collect::<Result<_, _>>()?;
            if row.len() != cols {
                return Err(fmt(
                    ln,
                    &format!("grid row {r} has {} symbols, expected {cols}", row.len()),
                ));
            }
            if let Some(s) = row.iter().find(|&&s| s as usize >= t) {
                return Err(fmt(
                    ln,
                    &format!("grid row {r}: symbol {s} outside alphabet of {t}"),
                ));
            }
            cells.extend(row);
            let filled = &cells[..];
            if let Some(c) = repeated_in_row_or_column(filled, r, cols) {
                return Err(fmt(ln, &format!("grid row {r}: not Latin at column {c}")));
            }
        }
        let rect =
            LatinRectangle::new(rows, cols, cells, t as u32).map_err(|e| fmt(n, &e.to_string()))?;
        maps.push(Declared {
            line: n,
            id,
            removes,
            rect,
        });
        i += 1 + rows;
    };

    let stored = lines[crc_line]
        .strip_prefix("CRC32=")
        .and_then(|h| u32::from_str_radix(h.trim(), 16).ok())
        .ok_or_else(|| fmt(crc_line + 1, "malformed CRC32 line"))?;
    if lines[crc_line + 1..].iter().any(|l| !l.trim().is_empty()) {
        return Err(fmt(crc_line + 2, "data after CRC32 line"));
    }
    let offset: usize = lines[..crc_line].iter().map(|l| l.len() + 1).sum();
    let computed = crc32fast::hash(&text.as_bytes()[..offset.min(text.len())]);
    if stored != computed {
        return Err(MapError::Checksum { stored, computed });
    }

    let rects = maps
        .iter()
        .map(|d| (d.rect.clone(), Origin::Loaded))
        .collect();
    let lib = MapLibrary::from_maps(params, dims, rects, Execution::Sequential)?;
    if lib.len() != maps.len() {
        return Err(fmt(
            maps.last().map_or(3, |d| d.line),
            "duplicate or unused maps",
        ));
    }
    for d in &maps {
        let id = lib.find(&d.rect).expect("every declared map was pooled");
        let mut declared = d.removes.clone();
        declared.sort();
        if declared != lib.maps()[id].removed() {
            return Err(MapError::Removals { id: d.id });
        }
    }
    Ok(lib)
}

/// Column of the first symbol in row `r` that repeats within the row or
/// within its column above.
fn repeated_in_row_or_column(cells: &[u32], r: usize, cols: usize) -> Option<usize> {
    let row = &cells[r * cols..];
    (0..cols)
        .find(|&c| row[..c].contains(&row[c]) || (0..r).any(|r2| cells[r2 * cols + c] == row[c]))
}
