use petgraph::unionfind::UnionFind;

use super::{index_digits, LatinError};
use crate::fadespace::{canonical_key, classify, SubspaceClass, SubspaceKey, SystemDims};
use crate::psk::PskParams;

/// Constrained partial Latin rectangle: the cells that must share a symbol
/// for a subspace to be removed, grouped into forced clusters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cplr {
    rows: usize,
    cols: usize,
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<Option<u32>>,
    key: SubspaceKey,
}

impl Cplr {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Forced clusters as row-major cell indices, ordered by smallest cell.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Provisional symbol of each cell: its cluster number, `None` if free.
    pub fn cell(&self, r: usize, c: usize) -> Option<u32> {
        self.cluster_of[r * self.cols + c]
    }

    pub fn key(&self) -> &SubspaceKey {
        &self.key
    }
}

/// Unions every cell pair whose difference vector is parallel to the key.
pub fn build_cplr(
    params: PskParams,
    dims: &SystemDims,
    key: &SubspaceKey,
) -> Result<Cplr, LatinError> {
    key.validate(params, dims.total())?;
    if classify(key, dims) != SubspaceClass::Removable {
        return Err(LatinError::NonRemovable(key.to_string()));
    }
    let rows = params.order().pow(dims.na as u32);
    let cols = params.order().pow(dims.nb as u32);
    let n = rows * cols;
    let row_digits: Vec<Vec<usize>> = (0..rows)
        .map(|r| index_digits(params, dims.na, r))
        .collect();
    let col_digits: Vec<Vec<usize>> = (0..cols)
        .map(|c| index_digits(params, dims.nb, c))
        .collect();
    let mut uf = UnionFind::<usize>::new(n);
    let mut dx = Vec::with_capacity(dims.total());
    for a in 0..n {
        let (r, c) = (a / cols, a % cols);
        for b in a + 1..n {
            let (r2, c2) = (b / cols, b % cols);
            dx.clear();
            dx.extend(
                row_digits[r]
                    .iter()
                    .zip(&row_digits[r2])
                    .map(|(&k, &l)| params.diff_unchecked(k, l)),
            );
            dx.extend(
                col_digits[c]
                    .iter()
                    .zip(&col_digits[c2])
                    .map(|(&k, &l)| params.diff_unchecked(k, l)),
            );
            if canonical_key(params, &dx).ok().as_ref() == Some(key) {
                uf.union(a, b);
            }
        }
    }
    let labels = uf.into_labeling();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of_root = vec![usize::MAX; n];
    for (cell, &root) in labels.iter().enumerate() {
        if group_of_root[root] == usize::MAX {
            group_of_root[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of_root[root]].push(cell);
    }
    let clusters: Vec<Vec<usize>> = groups.into_iter().filter(|g| g.len() > 1).collect();
    let mut cluster_of = vec![None; n];
    for (id, cells) in clusters.iter().enumerate() {
        let mut used_rows = vec![false; rows];
        let mut used_cols = vec![false; cols];
        for &cell in cells {
            let (r, c) = (cell / cols, cell % cols);
            if used_rows[r] || used_cols[c] {
                return Err(LatinError::ClusterConflict);
            }
            used_rows[r] = true;
            used_cols[c] = true;
            cluster_of[cell] = Some(id as u32);
        }
    }
    Ok(Cplr {
        rows,
        cols,
        clusters,
        cluster_of,
        key: key.clone(),
    })
}
