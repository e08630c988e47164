use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::SimError;
use crate::fadespace::SystemDims;
use crate::latin::index_digits;
use crate::psk::PskParams;

/// `H x` for every symbol vector `x` of `n` antennas, in linear index order.
fn images(params: PskParams, h: &DMatrix<Complex64>) -> Vec<DVector<Complex64>> {
    let n = h.ncols();
    (0..params.order().pow(n as u32))
        .map(|i| {
            let x = DVector::from_iterator(
                n,
                index_digits(params, n, i)
                    .into_iter()
                    .map(|k| params.symbol(k)),
            );
            h * x
        })
        .collect()
}

/// Joint ML estimate `(row, col)` of both end nodes' symbol vectors given
/// `Y = H_A x_A + H_B x_B + Z` with unit-energy symbols; ties go to the
/// lowest linearized cell.
pub fn ml_detect(
    y: &DVector<Complex64>,
    h_a: &DMatrix<Complex64>,
    h_b: &DMatrix<Complex64>,
    params: PskParams,
    dims: &SystemDims,
) -> Result<(usize, usize), SimError> {
    let nr = y.len();
    if h_a.shape() != (nr, dims.na) || h_b.shape() != (nr, dims.nb) {
        return Err(SimError::Shape(format!(
            "y has {nr} rows, H_A is {:?}, H_B is {:?}, system is {}x{}",
            h_a.shape(),
            h_b.shape(),
            dims.na,
            dims.nb
        )));
    }
    let a = images(params, h_a);
    let b = images(params, h_b);
    let residual_a: Vec<DVector<Complex64>> = a.iter().map(|v| y - v).collect();
    let mut best = (f64::INFINITY, 0, 0);
    for (r, ra) in residual_a.iter().enumerate() {
        for (c, vb) in b.iter().enumerate() {
            let d: f64 = ra
                .iter()
                .zip(vb.iter())
                .map(|(p, q)| (p - q).norm_sqr())
                .sum();
            if d < best.0 {
                best = (d, r, c);
            }
        }
    }
    Ok((best.1, best.2))
}

/// `e^{j(2l+1)π/t}`.
pub fn bc_point(label: u32, t: u32) -> Complex64 {
    Complex64::from_polar(1.0, (2 * label + 1) as f64 * PI / t as f64)
}

/// Relay transmit vector: the label's `t`-PSK point with amplitude
/// `amplitude`, repeated on all `nr` antennas.
pub fn bc_encode(
    label: u32,
    t: u32,
    nr: usize,
    amplitude: f64,
) -> Result<DVector<Complex64>, SimError> {
    if label >= t {
        return Err(SimError::Label { label, t });
    }
    Ok(DVector::from_element(nr, bc_point(label, t) * amplitude))
}

/// ML label among `candidates` for `Y = H' X_R + Z` with `X_R` from
/// [`bc_encode`]; ties go to the earliest candidate.
pub fn bc_decode_among(
    y: &DVector<Complex64>,
    h: &DMatrix<Complex64>,
    t: u32,
    amplitude: f64,
    candidates: impl IntoIterator<Item = u32>,
) -> Option<u32> {
    // repetition collapses the channel to its row sums
    let g: DVector<Complex64> = h.column_sum() * Complex64::new(amplitude, 0.0);
    let mut best: Option<(f64, u32)> = None;
    for l in candidates {
        let s = bc_point(l, t);
        let d: f64 = y
            .iter()
            .zip(g.iter())
            .map(|(yy, gg)| (yy - gg * s).norm_sqr())
            .sum();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, l));
        }
    }
    best.map(|(_, l)| l)
}

/// ML label over the whole alphabet.
pub fn bc_decode(
    y: &DVector<Complex64>,
    h: &DMatrix<Complex64>,
    t: u32,
    amplitude: f64,
) -> Result<u32, SimError> {
    if h.nrows() != y.len() {
        return Err(SimError::Shape(format!(
            "y has {} rows, H' is {:?}",
            y.len(),
            h.shape()
        )));
    }
    bc_decode_among(y, h, t, amplitude, 0..t).ok_or(SimError::Label { label: 0, t })
}
