//! `‖H Δx‖²` for every difference vector of a system, and the minimum
//! cluster distance of a map read off it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{MapError, MapLibrary};

impl MapLibrary {
    /// Squared norm `‖H Δx‖²` for every codec index, `H = [H_A H_B]`.
    pub fn norms(&self, h: &DMatrix<Complex64>) -> Result<Vec<f64>, MapError> {
        let params = self.params();
        let len = self.dims().total();
        if h.ncols() != len || h.nrows() == 0 {
            return Err(crate::latin::LatinError::Length {
                len: h.ncols(),
                expected: len,
            }
            .into());
        }
        let points: Vec<Complex64> = (0..params.point_count())
            .map(|i| params.materialize(params.point_at(i)))
            .collect();
        let count = self.catalog.codec().count();
        let mut out = vec![0.0; count];
        let mut sums = Vec::with_capacity(count);
        let mut next = Vec::with_capacity(count);
        for row in h.row_iter() {
            sums.clear();
            sums.push(Complex64::new(0.0, 0.0));
            for &hj in row.iter() {
                next.clear();
                next.extend(
                    sums.iter()
                        .flat_map(|&s| points.iter().map(move |&q| s + hj * q)),
                );
                std::mem::swap(&mut sums, &mut next);
            }
            for (o, s) in out.iter_mut().zip(&sums) {
                *o += s.norm_sqr();
            }
        }
        Ok(out)
    }

    /// Minimum cluster distance of map `id` by a full scan.
    pub fn d_min_scan(&self, id: usize, norms: &[f64]) -> f64 {
        self.separated(id)
            .map(|v| norms[v])
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

/// The smallest `head` vectors by norm, sorted, so that a map's minimum
/// distance is usually the first entry of this list it does not merge.
#[derive(Clone, Debug)]
pub struct NormOrder {
    head: Vec<u32>,
}

impl NormOrder {
    pub fn new(norms: &[f64], head: usize) -> Self {
        let mut idx: Vec<u32> = (1..norms.len() as u32).collect();
        let head = head.clamp(1, idx.len().max(1));
        let cmp = |a: &u32, b: &u32| {
            norms[*a as usize]
                .total_cmp(&norms[*b as usize])
                .then(a.cmp(b))
        };
        if head < idx.len() {
            idx.select_nth_unstable_by(head, cmp);
            idx.truncate(head);
        }
        idx.sort_unstable_by(cmp);
        Self { head: idx }
    }

    /// Whole-order variant: every vector sorted.
    pub fn full(norms: &[f64]) -> Self {
        Self::new(norms, norms.len())
    }

    /// Minimum cluster distance of map `id`: walks the sorted head and falls
    /// back to scanning the tail when the head is entirely merged.
    pub fn d_min(&self, lib: &MapLibrary, id: usize, norms: &[f64]) -> f64 {
        let merged = lib.maps[id].merged();
        if let Some(&v) = self.head.iter().find(|&&v| !merged.contains(v as usize)) {
            return norms[v as usize].sqrt();
        }
        lib.d_min_scan(id, norms)
    }
}
