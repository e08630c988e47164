//! Latin rectangles as relay clusterings.
//!
//! Rows are indexed by A's symbol vector and columns by B's, each linearized
//! with the leftmost component most significant. A cell's symbol is the
//! cluster label the relay forwards; the Latin property is the exclusive law.

mod complete;
mod cplr;
mod fixture;
mod transform;

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::fadespace::{canonical_key, FadeError, SubspaceKey, SystemDims, VectorCodec};
use crate::psk::{PskError, PskParams};

pub use complete::{complete, Completion, DEFAULT_BUDGET};
pub use cplr::{build_cplr, Cplr};
pub use fixture::{
    format_fixture, parse_captions, parse_fixture, verify_fixture_set, Caption, Fixture,
    FixtureCheck, FixtureReport,
};
pub use transform::{
    cartesian_product, compound, extract_rectangle, pad_vector, permute_antennas, permute_vector,
    phase_shift, shift_vector, transpose, transpose_vector, Isotopy,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatinError {
    #[error(transparent)]
    Fade(#[from] FadeError),
    #[error(transparent)]
    Psk(#[from] PskError),
    #[error("row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("grid is empty")]
    Empty,
    #[error("symbol {symbol} repeats in {line}")]
    NotLatin { symbol: u32, line: String },
    #[error("symbol {symbol} does not fit an alphabet of size {t}")]
    SymbolOutOfRange { symbol: u32, t: u32 },
    #[error("{rows}x{cols} grid is not a power of {m} in both directions")]
    Shape { rows: usize, cols: usize, m: usize },
    #[error("operation needs a square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("subspace {0} is not removable")]
    NonRemovable(String),
    #[error("forced cluster puts two cells in one row or column")]
    ClusterConflict,
    #[error("invalid permutation {0:?}")]
    Permutation(Vec<usize>),
    #[error("vector length {len} does not match {expected}")]
    Length { len: usize, expected: usize },
    #[error("compound operands need even lengths")]
    OddLength,
    #[error("rectangle extraction needs nA != nB")]
    EqualDims,
    #[error("no completion with at most {t_max} symbols")]
    Budget { t_max: u32 },
    #[error("fixture line {line}: {reason}")]
    Fixture { line: usize, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

/// A fully filled grid satisfying the exclusive law.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatinRectangle {
    rows: usize,
    cols: usize,
    cells: Vec<u32>,
    t: u32,
}

/// Row and column symbol vectors of one cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellIndex {
    pub row: Vec<usize>,
    pub col: Vec<usize>,
}

impl CellIndex {
    pub fn from_linear(params: PskParams, dims: &SystemDims, r: usize, c: usize) -> Self {
        Self {
            row: index_digits(params, dims.na, r),
            col: index_digits(params, dims.nb, c),
        }
    }

    pub fn linear(&self, params: PskParams) -> (usize, usize) {
        (linearize(params, &self.row), linearize(params, &self.col))
    }
}

/// Components of `x` in base `M`, leftmost most significant.
pub fn index_digits(params: PskParams, n: usize, mut x: usize) -> Vec<usize> {
    let m = params.order();
    let mut out = vec![0; n];
    for d in out.iter_mut().rev() {
        *d = x % m;
        x /= m;
    }
    out
}

pub fn linearize(params: PskParams, digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * params.order() + d)
}

/// True iff every row and column holds distinct symbols.
pub fn is_latin(grid: &[Vec<u32>]) -> Result<bool, LatinError> {
    let cols = grid.first().ok_or(LatinError::Empty)?.len();
    for (row, r) in grid.iter().enumerate() {
        if r.len() != cols {
            return Err(LatinError::Ragged {
                row,
                len: r.len(),
                expected: cols,
            });
        }
    }
    let flat: Vec<u32> = grid.iter().flatten().copied().collect();
    Ok(first_repeat(grid.len(), cols, &flat).is_none())
}

fn first_repeat(rows: usize, cols: usize, cells: &[u32]) -> Option<(u32, String)> {
    let mut seen = HashMap::new();
    for r in 0..rows {
        seen.clear();
        for c in 0..cols {
            if seen.insert(cells[r * cols + c], ()).is_some() {
                return Some((cells[r * cols + c], format!("row {r}")));
            }
        }
    }
    for c in 0..cols {
        seen.clear();
        for r in 0..rows {
            if seen.insert(cells[r * cols + c], ()).is_some() {
                return Some((cells[r * cols + c], format!("column {c}")));
            }
        }
    }
    None
}

impl LatinRectangle {
    /// Validates shape, alphabet and the Latin property.
    pub fn new(rows: usize, cols: usize, cells: Vec<u32>, t: u32) -> Result<Self, LatinError> {
        if rows == 0 || cols == 0 {
            return Err(LatinError::Empty);
        }
        if cells.len() != rows * cols {
            return Err(LatinError::Ragged {
                row: cells.len() / cols,
                len: cells.len() % cols,
                expected: cols,
            });
        }
        if let Some(&symbol) = cells.iter().find(|&&s| s >= t) {
            return Err(LatinError::SymbolOutOfRange { symbol, t });
        }
        if let Some((symbol, line)) = first_repeat(rows, cols, &cells) {
            return Err(LatinError::NotLatin { symbol, line });
        }
        Ok(Self {
            rows,
            cols,
            cells,
            t,
        })
    }

    /// Builds from rows; the alphabet size is the largest symbol plus one.
    pub fn from_rows(grid: &[Vec<u32>]) -> Result<Self, LatinError> {
        let cols = grid.first().ok_or(LatinError::Empty)?.len();
        for (row, r) in grid.iter().enumerate() {
            if r.len() != cols {
                return Err(LatinError::Ragged {
                    row,
                    len: r.len(),
                    expected: cols,
                });
            }
        }
        let cells: Vec<u32> = grid.iter().flatten().copied().collect();
        let t = cells.iter().max().map_or(0, |m| m + 1);
        Self::new(grid.len(), cols, cells, t)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Alphabet size.
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.cells[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.cells[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.cells.chunks(self.cols).map(<[u32]>::to_vec).collect()
    }

    pub fn distinct_symbols(&self) -> usize {
        let mut v = self.cells.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    /// Same alphabet, larger declared size.
    pub fn with_alphabet(mut self, t: u32) -> Result<Self, LatinError> {
        if let Some(&symbol) = self.cells.iter().find(|&&s| s >= t) {
            return Err(LatinError::SymbolOutOfRange { symbol, t });
        }
        self.t = t;
        Ok(self)
    }

    /// Relabels symbols in order of first occurrence (row-major); the
    /// alphabet shrinks to the symbols actually used.
    pub fn canonical(&self) -> LatinRectangle {
        let mut map = HashMap::new();
        let cells: Vec<u32> = self
            .cells
            .iter()
            .map(|&s| {
                let next = map.len() as u32;
                *map.entry(s).or_insert(next)
            })
            .collect();
        LatinRectangle {
            rows: self.rows,
            cols: self.cols,
            t: map.len() as u32,
            cells,
        }
    }

    /// True iff both grids induce the same clustering.
    pub fn same_partition(&self, other: &LatinRectangle) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.canonical().cells == other.canonical().cells
    }

    /// Antenna counts implied by the grid shape.
    pub fn layout(&self, params: PskParams) -> Result<SystemDims, LatinError> {
        let m = params.order();
        let log = |x: usize| -> Option<usize> {
            let mut n = 0;
            let mut v = 1;
            while v < x {
                v *= m;
                n += 1;
            }
            (v == x && n > 0).then_some(n)
        };
        match (log(self.rows), log(self.cols)) {
            (Some(na), Some(nb)) => Ok(SystemDims::new(na, nb, 1)?),
            _ => Err(LatinError::Shape {
                rows: self.rows,
                cols: self.cols,
                m,
            }),
        }
    }
}

/// Codec index of the difference vector of every (row, row') and
/// (col, col') pair, so a cell pair's vector index is a sum of two lookups.
#[derive(Clone, Debug)]
pub struct PairIndex {
    rows: usize,
    cols: usize,
    row_part: Vec<u32>,
    col_part: Vec<u32>,
}

impl PairIndex {
    pub fn new(params: PskParams, dims: &SystemDims) -> Result<Self, LatinError> {
        let codec = VectorCodec::new(params, dims.total())?;
        let p = params.point_count();
        let rows = params.order().pow(dims.na as u32);
        let cols = params.order().pow(dims.nb as u32);
        let part = |n: usize, size: usize, scale: usize| -> Vec<u32> {
            let digits: Vec<Vec<usize>> = (0..size).map(|x| index_digits(params, n, x)).collect();
            let mut out = vec![0u32; size * size];
            for a in 0..size {
                for b in 0..size {
                    let v = digits[a]
                        .iter()
                        .zip(&digits[b])
                        .fold(0usize, |acc, (&k, &l)| {
                            acc * p
                                + params
                                    .point_index(params.diff_unchecked(k, l))
                                    .expect("on lattice")
                        });
                    out[a * size + b] = (v * scale) as u32;
                }
            }
            out
        };
        let row_part = part(dims.na, rows, p.pow(dims.nb as u32));
        let col_part = part(dims.nb, cols, 1);
        debug_assert!(row_part.iter().all(|&v| (v as usize) < codec.count()));
        Ok(Self {
            rows,
            cols,
            row_part,
            col_part,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn vector(&self, r: usize, c: usize, r2: usize, c2: usize) -> usize {
        (self.row_part[r * self.rows + r2] + self.col_part[c * self.cols + c2]) as usize
    }

    /// Bitset over codec indices of the difference vectors every realizing
    /// cell pair of which carries equal symbols.
    pub fn merged(&self, rect: &LatinRectangle, vector_count: usize) -> FixedBitSet {
        assert_eq!(
            (rect.rows(), rect.cols()),
            (self.rows, self.cols),
            "layout mismatch"
        );
        let mut separated = FixedBitSet::with_capacity(vector_count);
        separated.insert(0);
        let n = self.rows * self.cols;
        let cells = rect.cells();
        for a in 0..n {
            let (r, c) = (a / self.cols, a % self.cols);
            for b in 0..n {
                if cells[a] != cells[b] {
                    separated.insert(self.vector(r, c, b / self.cols, b % self.cols));
                }
            }
        }
        separated.toggle_range(..);
        separated
    }
}

/// True iff every cell pair whose difference vector spans the same line as
/// the key's representative carries equal symbols.
pub fn verify_removal(
    params: PskParams,
    rect: &LatinRectangle,
    key: &SubspaceKey,
) -> Result<bool, LatinError> {
    let dims = rect.layout(params)?;
    key.validate(params, dims.total())?;
    let rows: Vec<Vec<usize>> = (0..rect.rows())
        .map(|r| index_digits(params, dims.na, r))
        .collect();
    let cols: Vec<Vec<usize>> = (0..rect.cols())
        .map(|c| index_digits(params, dims.nb, c))
        .collect();
    let mut dx = Vec::with_capacity(dims.total());
    for r in 0..rect.rows() {
        for c in 0..rect.cols() {
            for r2 in 0..rect.rows() {
                for c2 in 0..rect.cols() {
                    if rect.get(r, c) == rect.get(r2, c2) {
                        continue;
                    }
                    dx.clear();
                    dx.extend(
                        rows[r]
                            .iter()
                            .zip(&rows[r2])
                            .map(|(&k, &l)| params.diff_unchecked(k, l)),
                    );
                    dx.extend(
                        cols[c]
                            .iter()
                            .zip(&cols[c2])
                            .map(|(&k, &l)| params.diff_unchecked(k, l)),
                    );
                    if canonical_key(params, &dx).ok().as_ref() == Some(key) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Every removable key the rectangle removes, in canonical order.
pub fn removed_keys(
    params: PskParams,
    rect: &LatinRectangle,
) -> Result<Vec<SubspaceKey>, LatinError> {
    let dims = rect.layout(params)?;
    let index = PairIndex::new(params, &dims)?;
    let codec = VectorCodec::new(params, dims.total())?;
    let merged = index.merged(rect, codec.count());
    let mut all = HashMap::new();
    for v in 1..codec.count() {
        let key = canonical_key(params, &codec.decode(v))?;
        let e = all.entry(key).or_insert(true);
        *e &= merged.contains(v);
    }
    let mut out: Vec<SubspaceKey> = all
        .into_iter()
        .filter_map(|(k, m)| m.then_some(k))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Smallest distance between received points of different clusters for the
/// channel `[H_A H_B]`.
pub fn min_cluster_distance(
    params: PskParams,
    rect: &LatinRectangle,
    h_a: &DMatrix<Complex64>,
    h_b: &DMatrix<Complex64>,
) -> Result<f64, LatinError> {
    let dims = rect.layout(params)?;
    if h_a.ncols() != dims.na || h_b.ncols() != dims.nb || h_a.nrows() != h_b.nrows() {
        return Err(LatinError::Length {
            len: h_a.ncols() + h_b.ncols(),
            expected: dims.total(),
        });
    }
    let index = PairIndex::new(params, &dims)?;
    let codec = VectorCodec::new(params, dims.total())?;
    let merged = index.merged(rect, codec.count());
    let h = stack(h_a, h_b);
    let mut best = f64::INFINITY;
    for v in 1..codec.count() {
        if merged.contains(v) {
            continue;
        }
        let dx: Vec<Complex64> = codec
            .decode(v)
            .iter()
            .map(|&p| params.materialize(p))
            .collect();
        best = best.min(apply(&h, &dx).sqrt());
    }
    Ok(best)
}

pub(crate) fn stack(h_a: &DMatrix<Complex64>, h_b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(h_a.nrows(), h_a.ncols() + h_b.ncols());
    h.columns_mut(0, h_a.ncols()).copy_from(h_a);
    h.columns_mut(h_a.ncols(), h_b.ncols()).copy_from(h_b);
    h
}

/// `‖H x‖²`.
pub(crate) fn apply(h: &DMatrix<Complex64>, x: &[Complex64]) -> f64 {
    h.row_iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum()
}

/// The bit-wise XOR map of order `M^n`.
pub fn xor_map(params: PskParams, n: usize) -> Result<LatinRectangle, LatinError> {
    if n == 0 {
        return Err(LatinError::Empty);
    }
    let size = params.order().pow(n as u32);
    // with leftmost-first linearization the concatenated labels are the index
    let cells = (0..size * size)
        .map(|i| ((i / size) ^ (i % size)) as u32)
        .collect();
    LatinRectangle::new(size, size, cells, size as u32)
}
