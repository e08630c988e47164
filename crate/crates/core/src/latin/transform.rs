//! Rectangle transforms and their action on difference vectors.
//!
//! If `L` removes the subspace of `Δx`, then `transpose(L)`,
//! `permute_antennas(L, σ)` and `phase_shift(L, k)` remove the subspace of
//! the matching `*_vector` image of `Δx`.

use super::{index_digits, linearize, LatinError, LatinRectangle};
use crate::fadespace::{canonical_key, FadeError, SubspaceKey, SystemDims};
use crate::psk::{DiffPoint, PskParams};

fn require_square(rect: &LatinRectangle) -> Result<(), LatinError> {
    if rect.rows() != rect.cols() {
        return Err(LatinError::NotSquare {
            rows: rect.rows(),
            cols: rect.cols(),
        });
    }
    Ok(())
}

pub fn transpose(rect: &LatinRectangle) -> Result<LatinRectangle, LatinError> {
    require_square(rect)?;
    let n = rect.rows();
    let cells = (0..n * n).map(|i| rect.get(i % n, i / n)).collect();
    LatinRectangle::new(n, n, cells, rect.t())
}

/// `[Δx_B; Δx_A]`.
pub fn transpose_vector<T: Clone>(dx: &[T], na: usize) -> Vec<T> {
    dx[na..].iter().chain(&dx[..na]).cloned().collect()
}

fn check_perm(sigma: &[usize], n: usize) -> Result<(), LatinError> {
    let mut seen = vec![false; n];
    if sigma.len() != n
        || sigma
            .iter()
            .any(|&s| s >= n || std::mem::replace(&mut seen[s], true))
    {
        return Err(LatinError::Permutation(sigma.to_vec()));
    }
    Ok(())
}

/// Relabels rows and columns so that component `i` of the new index is
/// component `σ(i)` of the old one.
pub fn permute_antennas(
    params: PskParams,
    rect: &LatinRectangle,
    sigma_a: &[usize],
    sigma_b: &[usize],
) -> Result<LatinRectangle, LatinError> {
    let dims = rect.layout(params)?;
    check_perm(sigma_a, dims.na)?;
    check_perm(sigma_b, dims.nb)?;
    let relabel = |x: usize, n: usize, sigma: &[usize]| {
        let d = index_digits(params, n, x);
        linearize(params, &sigma.iter().map(|&s| d[s]).collect::<Vec<_>>())
    };
    let rows: Vec<usize> = (0..rect.rows())
        .map(|r| relabel(r, dims.na, sigma_a))
        .collect();
    let cols: Vec<usize> = (0..rect.cols())
        .map(|c| relabel(c, dims.nb, sigma_b))
        .collect();
    Ok(remap(rect, &rows, &cols))
}

/// `L'(rows[r], cols[c]) = L(r, c)`.
fn remap(rect: &LatinRectangle, rows: &[usize], cols: &[usize]) -> LatinRectangle {
    let mut cells = vec![0; rect.cells().len()];
    for r in 0..rect.rows() {
        for c in 0..rect.cols() {
            cells[rows[r] * rect.cols() + cols[c]] = rect.get(r, c);
        }
    }
    LatinRectangle {
        rows: rect.rows(),
        cols: rect.cols(),
        cells,
        t: rect.t(),
    }
}

pub fn permute_vector<T: Clone>(
    dx: &[T],
    na: usize,
    sigma_a: &[usize],
    sigma_b: &[usize],
) -> Result<Vec<T>, LatinError> {
    check_perm(sigma_a, na)?;
    check_perm(sigma_b, dx.len() - na)?;
    let a = sigma_a.iter().map(|&s| dx[s].clone());
    let b = sigma_b.iter().map(|&s| dx[na + s].clone());
    Ok(a.chain(b).collect())
}

/// Adds `k_a[i]` to row component `i` and `k_b[i]` to column component `i`.
pub fn phase_shift(
    params: PskParams,
    rect: &LatinRectangle,
    k_a: &[usize],
    k_b: &[usize],
) -> Result<LatinRectangle, LatinError> {
    let dims = rect.layout(params)?;
    if k_a.len() != dims.na || k_b.len() != dims.nb {
        return Err(LatinError::Length {
            len: k_a.len() + k_b.len(),
            expected: dims.total(),
        });
    }
    let m = params.order();
    let shift = |x: usize, n: usize, k: &[usize]| {
        let d = index_digits(params, n, x);
        linearize(
            params,
            &d.iter()
                .zip(k)
                .map(|(&a, &b)| (a + b) % m)
                .collect::<Vec<_>>(),
        )
    };
    let rows: Vec<usize> = (0..rect.rows()).map(|r| shift(r, dims.na, k_a)).collect();
    let cols: Vec<usize> = (0..rect.cols()).map(|c| shift(c, dims.nb, k_b)).collect();
    Ok(remap(rect, &rows, &cols))
}

/// Rotates entry `i` by `2k_i π/M`, the effect of a symbol shift by `k_i`.
pub fn shift_vector(
    params: PskParams,
    dx: &[DiffPoint],
    k_a: &[usize],
    k_b: &[usize],
) -> Result<Vec<DiffPoint>, LatinError> {
    if k_a.len() + k_b.len() != dx.len() {
        return Err(LatinError::Length {
            len: k_a.len() + k_b.len(),
            expected: dx.len(),
        });
    }
    Ok(dx
        .iter()
        .zip(k_a.iter().chain(k_b))
        .map(|(&p, &k)| params.rotate(p, 2 * (k % params.order()) as u32))
        .collect())
}

/// Block `(i, j)` of the result is `inner + outer(i, j)·(max(inner) + 1)`.
///
/// Rows of the result are indexed by the outer components followed by the
/// inner ones, so it removes `compound(y, z)` whenever `outer` removes `y`
/// (or `y = 0`) and `inner` removes `z` (or `z = 0`).
pub fn cartesian_product(
    inner: &LatinRectangle,
    outer: &LatinRectangle,
) -> Result<LatinRectangle, LatinError> {
    require_square(inner)?;
    require_square(outer)?;
    let (a, b) = (inner.rows(), outer.rows());
    let step = inner.cells().iter().max().map_or(1, |m| m + 1);
    let outer_span = outer.cells().iter().max().map_or(1, |m| m + 1);
    let n = a * b;
    let mut cells = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            cells.push(inner.get(row % a, col % a) + outer.get(row / a, col / a) * step);
        }
    }
    LatinRectangle::new(n, n, cells, step * outer_span)
}

/// `[y_A, z_A, y_B, z_B]` for `y = [y_A; y_B]` and `z = [z_A; z_B]` with
/// equal halves.
pub fn compound<T: Clone>(y: &[T], z: &[T]) -> Result<Vec<T>, LatinError> {
    if !y.len().is_multiple_of(2) || !z.len().is_multiple_of(2) {
        return Err(LatinError::OddLength);
    }
    let (a, b) = (y.len() / 2, z.len() / 2);
    Ok(y[..a]
        .iter()
        .chain(&z[..b])
        .chain(&y[a..])
        .chain(&z[b..])
        .cloned()
        .collect())
}

/// First `M^nA` rows (`nB > nA`) or first `M^nB` columns (`nA > nB`) of a
/// square of order `M^max(nA, nB)`.
pub fn extract_rectangle(
    params: PskParams,
    rect: &LatinRectangle,
    dims: &SystemDims,
) -> Result<LatinRectangle, LatinError> {
    if dims.na == dims.nb {
        return Err(LatinError::EqualDims);
    }
    require_square(rect)?;
    let n = dims.na.max(dims.nb);
    let size = params.order().pow(n as u32);
    if rect.rows() != size {
        return Err(LatinError::Shape {
            rows: rect.rows(),
            cols: rect.cols(),
            m: params.order(),
        });
    }
    let rows = params.order().pow(dims.na as u32);
    let cols = params.order().pow(dims.nb as u32);
    let cells = (0..rows)
        .flat_map(|r| rect.row(r)[..cols].to_vec())
        .collect();
    LatinRectangle::new(rows, cols, cells, rect.t())
}

/// Embeds an `nA × nB` vector into the square system of size
/// `max(nA, nB)` by padding each block with leading zeros.
pub fn pad_vector(dx: &[DiffPoint], na: usize) -> Vec<DiffPoint> {
    let nb = dx.len() - na;
    let n = na.max(nb);
    let mut out = vec![DiffPoint::ZERO; n - na];
    out.extend_from_slice(&dx[..na]);
    out.extend(std::iter::repeat_n(DiffPoint::ZERO, n - nb));
    out.extend_from_slice(&dx[na..]);
    out
}

/// Composite transform: optional transpose, then antenna permutation, then
/// phase shift. Acts on square systems of `n` antennas per side.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Isotopy {
    pub transpose: bool,
    pub sigma_a: Vec<usize>,
    pub sigma_b: Vec<usize>,
    pub shift_a: Vec<usize>,
    pub shift_b: Vec<usize>,
}

impl Isotopy {
    pub fn identity(n: usize) -> Self {
        Self {
            transpose: false,
            sigma_a: (0..n).collect(),
            sigma_b: (0..n).collect(),
            shift_a: vec![0; n],
            shift_b: vec![0; n],
        }
    }

    /// Every composite transform for an `n × n` system, identity first.
    pub fn group(params: PskParams, n: usize) -> Vec<Isotopy> {
        let perms = permutations(n);
        let shifts: Vec<Vec<usize>> = (0..params.order().pow(n as u32))
            .map(|x| index_digits(params, n, x))
            .collect();
        let mut out = Vec::new();
        for transpose in [false, true] {
            for sa in &perms {
                for sb in &perms {
                    for ka in &shifts {
                        for kb in &shifts {
                            out.push(Isotopy {
                                transpose,
                                sigma_a: sa.clone(),
                                sigma_b: sb.clone(),
                                shift_a: ka.clone(),
                                shift_b: kb.clone(),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn apply(
        &self,
        params: PskParams,
        rect: &LatinRectangle,
    ) -> Result<LatinRectangle, LatinError> {
        let base = if self.transpose {
            transpose(rect)?
        } else {
            rect.clone()
        };
        let permuted = permute_antennas(params, &base, &self.sigma_a, &self.sigma_b)?;
        phase_shift(params, &permuted, &self.shift_a, &self.shift_b)
    }

    pub fn apply_vector(
        &self,
        params: PskParams,
        dx: &[DiffPoint],
    ) -> Result<Vec<DiffPoint>, LatinError> {
        let n = self.sigma_a.len();
        if dx.len() != 2 * n {
            return Err(LatinError::Length {
                len: dx.len(),
                expected: 2 * n,
            });
        }
        let base = if self.transpose {
            transpose_vector(dx, n)
        } else {
            dx.to_vec()
        };
        let permuted = permute_vector(&base, n, &self.sigma_a, &self.sigma_b)?;
        shift_vector(params, &permuted, &self.shift_a, &self.shift_b)
    }

    /// Image of a subspace key.
    pub fn apply_key(
        &self,
        params: PskParams,
        key: &SubspaceKey,
    ) -> Result<SubspaceKey, LatinError> {
        let rep = key.representative(params, 2 * self.sigma_a.len())?;
        let image = self.apply_vector(params, &rep)?;
        canonical_key(params, &image).map_err(|e: FadeError| e.into())
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}
