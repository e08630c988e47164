//! Exact arithmetic over symmetric 2^λ-PSK signal sets and their difference
//! constellations.
//!
//! Symbols are integer indices `k` with value `e^{j(2k+1)π/M}`. A difference
//! point is stored as a magnitude index `n` and a phase index `phi` counted in
//! units of `π/M`, so every subspace computation stays free of floating point.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Largest supported `λ`; phase indices must fit in a `u16`.
pub const MAX_LAMBDA: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PskError {
    #[error("bits per symbol must be in 1..={max}, got {0}", max = MAX_LAMBDA)]
    InvalidLambda(u32),
    #[error("signal-set size {0} is not a power of two >= 2")]
    InvalidOrder(usize),
    #[error("symbol index {index} out of range for {order}-PSK")]
    SymbolOutOfRange { index: usize, order: usize },
    #[error("difference point (n={mag}, phi={phase}) out of range for {order}-PSK")]
    PointOutOfRange { mag: u32, phase: u32, order: usize },
    #[error("block split {na}+{nb} does not match vector length {len}")]
    BlockSplit { na: usize, nb: usize, len: usize },
}

/// Signal-set parameters: `M = 2^λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PskParams {
    lambda: u32,
}

impl PskParams {
    pub fn new(lambda: u32) -> Result<Self, PskError> {
        if lambda == 0 || lambda > MAX_LAMBDA {
            return Err(PskError::InvalidLambda(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn from_order(m: usize) -> Result<Self, PskError> {
        if m < 2 || !m.is_power_of_two() {
            return Err(PskError::InvalidOrder(m));
        }
        Self::new(m.trailing_zeros()).map_err(|_| PskError::InvalidOrder(m))
    }

    pub fn lambda(self) -> u32 {
        self.lambda
    }

    /// Signal-set size `M`.
    pub fn order(self) -> usize {
        1 << self.lambda
    }

    pub fn half(self) -> usize {
        self.order() / 2
    }

    /// Size of the phase lattice, `2M`.
    pub fn phase_modulus(self) -> u32 {
        2 * self.order() as u32
    }

    /// Number of points in the difference constellation, `1 + M²/2`.
    pub fn point_count(self) -> usize {
        1 + self.order() * self.half()
    }

    fn check_symbol(self, k: usize) -> Result<(), PskError> {
        if k >= self.order() {
            return Err(PskError::SymbolOutOfRange {
                index: k,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// `e^{j(2k+1)π/M}`.
    pub fn modulate(self, k: usize) -> Result<Complex64, PskError> {
        self.check_symbol(k)?;
        Ok(self.symbol(k))
    }

    /// Unchecked variant of [`modulate`](Self::modulate) for hot loops.
    pub(crate) fn symbol(self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, (2 * k + 1) as f64 * PI / self.order() as f64)
    }

    /// Exact difference `modulate(k) - modulate(k_prime)`.
    pub fn diff_point(self, k: usize, k_prime: usize) -> Result<DiffPoint, PskError> {
        self.check_symbol(k)?;
        self.check_symbol(k_prime)?;
        Ok(self.diff_unchecked(k, k_prime))
    }

    pub(crate) fn diff_unchecked(self, k: usize, k_prime: usize) -> DiffPoint {
        if k == k_prime {
            return DiffPoint::ZERO;
        }
        let m = self.order();
        let d = (k + m - k_prime) % m;
        let mag = d.min(m - d) as u32;
        let two_m = 2 * m;
        let base = k + k_prime + 1;
        let phase = if k > k_prime {
            (base + m / 2) % two_m
        } else {
            (base + two_m - m / 2) % two_m
        };
        DiffPoint::raw(mag, phase as u32)
    }

    /// Numeric value `2 sin(nπ/M) e^{jφπ/M}`.
    pub fn materialize(self, p: DiffPoint) -> Complex64 {
        if p.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.order() as f64;
        let r = 2.0 * (p.mag() as f64 * PI / m).sin();
        Complex64::from_polar(r, p.phase() as f64 * PI / m)
    }

    /// Phase parity of the points on circle `n`: `phi ≡ n + 1 + M/2 (mod 2)`.
    pub fn phase_parity(self, mag: u32) -> u32 {
        (mag + 1 + self.half() as u32) % 2
    }

    /// True if `p` is an actual difference of two symbols of this set.
    pub fn on_lattice(self, p: DiffPoint) -> bool {
        p.is_zero()
            || (p.mag() as usize <= self.half()
                && p.phase() < self.phase_modulus()
                && p.phase() % 2 == self.phase_parity(p.mag()))
    }

    /// All points of the difference constellation: zero first, then by
    /// magnitude index and phase.
    pub fn diff_constellation(self) -> Vec<DiffPoint> {
        (0..self.point_count()).map(|i| self.point_at(i)).collect()
    }

    /// Position of `p` in [`diff_constellation`](Self::diff_constellation).
    pub fn point_index(self, p: DiffPoint) -> Option<usize> {
        if p.is_zero() {
            return Some(0);
        }
        if !self.on_lattice(p) {
            return None;
        }
        let m = self.order();
        Some(1 + (p.mag() as usize - 1) * m + (p.phase() / 2) as usize)
    }

    /// Inverse of [`point_index`](Self::point_index). Panics when out of range.
    pub fn point_at(self, idx: usize) -> DiffPoint {
        assert!(
            idx < self.point_count(),
            "difference point index out of range"
        );
        if idx == 0 {
            return DiffPoint::ZERO;
        }
        let m = self.order();
        let mag = ((idx - 1) / m + 1) as u32;
        let j = ((idx - 1) % m) as u32;
        DiffPoint::raw(mag, 2 * j + self.phase_parity(mag))
    }

    pub fn negate(self, p: DiffPoint) -> DiffPoint {
        self.rotate(p, self.order() as u32)
    }

    /// Multiply by `e^{jsπ/M}`.
    pub fn rotate(self, p: DiffPoint, s: u32) -> DiffPoint {
        if p.is_zero() {
            return p;
        }
        DiffPoint::raw(p.mag(), (p.phase() + s) % self.phase_modulus())
    }
}

/// One element of the difference constellation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffPoint {
    /// 0 encodes the zero point.
    mag: u16,
    phase: u16,
}

impl DiffPoint {
    pub const ZERO: DiffPoint = DiffPoint { mag: 0, phase: 0 };

    /// Checks only the ranges `1 <= n <= M/2` and `phi < 2M`; use
    /// [`PskParams::on_lattice`] to test membership in the constellation.
    pub fn new(params: PskParams, mag: u32, phase: u32) -> Result<Self, PskError> {
        if mag == 0 || mag as usize > params.half() || phase >= params.phase_modulus() {
            return Err(PskError::PointOutOfRange {
                mag,
                phase,
                order: params.order(),
            });
        }
        Ok(Self::raw(mag, phase))
    }

    pub(crate) fn raw(mag: u32, phase: u32) -> Self {
        Self {
            mag: mag as u16,
            phase: phase as u16,
        }
    }

    pub fn is_zero(self) -> bool {
        self.mag == 0
    }

    /// Magnitude index `n` (0 for the zero point).
    pub fn mag(self) -> u32 {
        self.mag as u32
    }

    /// Phase index in units of `π/M` (0 for the zero point).
    pub fn phase(self) -> u32 {
        self.phase as u32
    }
}

impl fmt::Debug for DiffPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "({},{})", self.mag, self.phase)
        }
    }
}

/// A difference vector `[Δx_A; Δx_B]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffVector {
    entries: Vec<DiffPoint>,
    na: usize,
}

impl DiffVector {
    pub fn new(entries: Vec<DiffPoint>, na: usize, nb: usize) -> Result<Self, PskError> {
        if na + nb != entries.len() {
            return Err(PskError::BlockSplit {
                na,
                nb,
                len: entries.len(),
            });
        }
        Ok(Self { entries, na })
    }

    /// Difference between the symbol vectors `(xa, xb)` and `(xa2, xb2)`.
    pub fn between(
        params: PskParams,
        (xa, xb): (&[usize], &[usize]),
        (xa2, xb2): (&[usize], &[usize]),
    ) -> Result<Self, PskError> {
        let a = xa.iter().zip(xa2).map(|(&k, &l)| params.diff_point(k, l));
        let b = xb.iter().zip(xb2).map(|(&k, &l)| params.diff_point(k, l));
        let entries = a.chain(b).collect::<Result<Vec<_>, _>>()?;
        Self::new(entries, xa.len(), xb.len())
    }

    pub fn entries(&self) -> &[DiffPoint] {
        &self.entries
    }

    pub fn na(&self) -> usize {
        self.na
    }

    pub fn nb(&self) -> usize {
        self.entries.len() - self.na
    }

    pub fn a_block(&self) -> &[DiffPoint] {
        &self.entries[..self.na]
    }

    pub fn b_block(&self) -> &[DiffPoint] {
        &self.entries[self.na..]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    /// Indices of non-zero entries.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, _)| i)
    }

    pub fn materialize(&self, params: PskParams) -> Vec<Complex64> {
        self.entries
            .iter()
            .map(|&p| params.materialize(p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qpsk() -> PskParams {
        PskParams::new(2).unwrap()
    }

    #[test]
    fn modulate_examples() {
        let p = qpsk();
        let s = p.modulate(1).unwrap();
        assert!((s - Complex64::from_polar(1.0, 3.0 * PI / 4.0)).norm() < 1e-15);
        assert_eq!(p.modulate(0).unwrap().norm(), 1.0);
        let b = PskParams::new(1).unwrap();
        assert!((b.modulate(0).unwrap() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(
            p.modulate(4),
            Err(PskError::SymbolOutOfRange { .. })
        ));
    }

    #[test]
    fn order_validation() {
        assert_eq!(PskParams::from_order(8).unwrap().lambda(), 3);
        assert!(PskParams::from_order(6).is_err());
        assert!(PskParams::from_order(1).is_err());
        assert!(PskParams::new(0).is_err());
    }

    #[test]
    fn diff_point_examples() {
        let p = qpsk();
        let d = p.diff_point(1, 0).unwrap();
        assert_eq!((d.mag(), d.phase()), (1, 4));
        assert!((p.materialize(d) - Complex64::new(-2f64.sqrt(), 0.0)).norm() < 1e-12);
        for k in 0..4 {
            assert!(p.diff_point(k, k).unwrap().is_zero());
        }
        let b = PskParams::new(1).unwrap();
        assert!((b.materialize(b.diff_point(1, 0).unwrap()).norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn materialize_examples() {
        let p = qpsk();
        assert_eq!(p.materialize(DiffPoint::ZERO), Complex64::new(0.0, 0.0));
        let v = p.materialize(DiffPoint::new(p, 2, 1).unwrap());
        assert!((v - Complex64::from_polar(2.0, PI / 4.0)).norm() < 1e-12);
        let b = PskParams::new(1).unwrap();
        let v = b.materialize(DiffPoint::new(b, 1, 0).unwrap());
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constellation_sizes_and_parity() {
        for (lambda, size) in [(1, 3), (2, 9), (3, 33)] {
            let p = PskParams::new(lambda).unwrap();
            let pts = p.diff_constellation();
            assert_eq!(pts.len(), size);
            for (i, &q) in pts.iter().enumerate() {
                assert!(p.on_lattice(q));
                assert_eq!(p.point_index(q), Some(i));
                if p.order() >= 4 && !q.is_zero() {
                    // n odd => phi even, n even => phi odd
                    assert_ne!(q.mag() % 2, q.phase() % 2);
                }
            }
        }
    }

    #[test]
    fn subtraction_oracle_is_exhaustive() {
        for lambda in 1..=3 {
            let p = PskParams::new(lambda).unwrap();
            let m = p.order();
            let mut seen = std::collections::BTreeSet::new();
            for k in 0..m {
                for l in 0..m {
                    let d = p.diff_point(k, l).unwrap();
                    let exact = p.modulate(k).unwrap() - p.modulate(l).unwrap();
                    assert!((p.materialize(d) - exact).norm() < 1e-12);
                    assert_eq!(p.diff_point(l, k).unwrap(), p.negate(d));
                    assert!(p.on_lattice(d));
                    seen.insert(d);
                }
            }
            assert_eq!(seen.len(), p.point_count());
            for n in 1..=p.half() as u32 {
                assert_eq!(seen.iter().filter(|q| q.mag() == n).count(), m);
            }
        }
    }

    #[test]
    fn point_range_checks() {
        let p = qpsk();
        assert!(DiffPoint::new(p, 0, 0).is_err());
        assert!(DiffPoint::new(p, 3, 0).is_err());
        assert!(DiffPoint::new(p, 1, 8).is_err());
        let off = DiffPoint::new(p, 1, 1).unwrap();
        assert!(!p.on_lattice(off));
        assert_eq!(p.point_index(off), None);
    }

    #[test]
    fn diff_vector_blocks() {
        let p = qpsk();
        let v = DiffVector::between(p, (&[0, 1], &[2, 2]), (&[0, 3], &[1, 2])).unwrap();
        assert_eq!(v.na(), 2);
        assert!(v.a_block()[0].is_zero());
        assert!(v.b_block()[1].is_zero());
        assert_eq!(v.support().collect::<Vec<_>>(), vec![1, 2]);
        assert!(DiffVector::new(vec![DiffPoint::ZERO; 3], 1, 1).is_err());
    }
}
