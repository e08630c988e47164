//! Singular fade subspaces: canonical keys, classification, closed-form
//! counts and exhaustive enumeration.
//!
//! A subspace `[span(Δx)]⊥` is identified by a [`SubspaceKey`] built from the
//! support of `Δx`, the phases of its non-zero entries relative to the first
//! one, and the magnitude profile (collapsed to `Uniform` when all non-zero
//! magnitudes agree, since any common magnitude is a real rescaling).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::binomial;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::psk::{DiffPoint, PskError, PskParams};

/// Upper bound on `|ΔS|^(nA+nB)` for exhaustive enumeration.
pub const MAX_VECTORS: usize = 40_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FadeError {
    #[error(transparent)]
    Psk(#[from] PskError),
    #[error("antenna counts must be positive (nA={na}, nB={nb}, nR={nr})")]
    InvalidDims { na: usize, nb: usize, nr: usize },
    #[error("difference vector is zero")]
    ZeroVector,
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{count} difference vectors exceed the enumeration limit of {limit}")]
    TooLarge { count: usize, limit: usize },
    #[error("support size {k} outside 1..={total}")]
    SupportSize { k: usize, total: usize },
    #[error("cannot parse subspace key {0:?}")]
    KeyParse(String),
    #[error("key {key} is invalid here: {reason}")]
    InvalidKey { key: String, reason: &'static str },
    #[error("channel matrix is zero")]
    ZeroMatrix,
    #[error("count overflows u64")]
    Overflow,
}

/// Antenna counts at A, B and the relay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SystemDims {
    pub na: usize,
    pub nb: usize,
    pub nr: usize,
}

impl SystemDims {
    pub fn new(na: usize, nb: usize, nr: usize) -> Result<Self, FadeError> {
        if na == 0 || nb == 0 || nr == 0 || na + nb > 32 {
            return Err(FadeError::InvalidDims { na, nb, nr });
        }
        Ok(Self { na, nb, nr })
    }

    /// Dims for subspace work, where `nR` is irrelevant.
    pub fn square(n: usize) -> Result<Self, FadeError> {
        Self::new(n, n, 1)
    }

    pub fn total(&self) -> usize {
        self.na + self.nb
    }

    pub fn a_mask(&self) -> u32 {
        (1u32 << self.na) - 1
    }

    pub fn b_mask(&self) -> u32 {
        ((1u32 << self.total()) - 1) & !self.a_mask()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MagProfile {
    Uniform,
    /// Magnitude indices at the non-zero positions, not all equal.
    Exact(Vec<u16>),
}

/// Canonical identifier of a singular fade subspace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubspaceKey {
    support: u32,
    mags: MagProfile,
    phases: Vec<u16>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubspaceClass {
    Trivial,
    NonRemovableA,
    NonRemovableB,
    Removable,
}

impl SubspaceKey {
    /// Key of the zero vector.
    pub fn trivial() -> Self {
        Self {
            support: 0,
            mags: MagProfile::Uniform,
            phases: Vec::new(),
        }
    }

    /// Bitmask of non-zero positions; bit `i` is position `i`.
    pub fn support(&self) -> u32 {
        self.support
    }

    pub fn support_len(&self) -> usize {
        self.support.count_ones() as usize
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |i| self.support >> i & 1 == 1)
    }

    pub fn mags(&self) -> &MagProfile {
        &self.mags
    }

    /// Phases of the non-zero entries after the first, relative to the first.
    pub fn phases(&self) -> &[u16] {
        &self.phases
    }

    /// Checks that the key describes a subspace of a length-`len` system.
    pub fn validate(&self, params: PskParams, len: usize) -> Result<(), FadeError> {
        let bad = |reason| {
            Err(FadeError::InvalidKey {
                key: self.to_string(),
                reason,
            })
        };
        if self.support == 0 {
            return bad("empty support");
        }
        if len < 32 && self.support >> len != 0 {
            return bad("support exceeds vector length");
        }
        let k = self.support_len();
        if self.phases.len() + 1 != k {
            return bad("phase count does not match support");
        }
        if self
            .phases
            .iter()
            .any(|&p| p as u32 >= params.phase_modulus())
        {
            return bad("phase out of range");
        }
        let mags: Vec<u32> = match &self.mags {
            MagProfile::Uniform => vec![1; k],
            MagProfile::Exact(m) => {
                if m.len() != k {
                    return bad("magnitude count does not match support");
                }
                if m.iter().all(|&x| x == m[0]) {
                    return bad("equal magnitudes must be written as uniform");
                }
                if m.iter().any(|&x| x == 0 || x as usize > params.half()) {
                    return bad("magnitude index out of range");
                }
                m.iter().map(|&x| x as u32).collect()
            }
        };
        for (i, &p) in self.phases.iter().enumerate() {
            if !(p as u32 + mags[0] + mags[i + 1]).is_multiple_of(2) {
                return bad("relative phase has the wrong parity");
            }
        }
        Ok(())
    }

    /// The canonical representative `Δx₀` of this subspace, a vector of
    /// length `len` in `ΔS^len`.
    pub fn representative(
        &self,
        params: PskParams,
        len: usize,
    ) -> Result<Vec<DiffPoint>, FadeError> {
        self.validate(params, len)?;
        let mut out = vec![DiffPoint::ZERO; len];
        let mag_at = |j: usize| match &self.mags {
            MagProfile::Uniform => 1,
            MagProfile::Exact(m) => m[j] as u32,
        };
        let base = params.phase_parity(mag_at(0));
        for (j, pos) in self.positions().enumerate() {
            let rel = if j == 0 { 0 } else { self.phases[j - 1] as u32 };
            out[pos] = DiffPoint::raw(mag_at(j), (base + rel) % params.phase_modulus());
        }
        Ok(out)
    }
}

/// Canonical key of a difference vector; keys agree iff spans agree.
pub fn canonical_key(params: PskParams, dx: &[DiffPoint]) -> Result<SubspaceKey, FadeError> {
    if dx.len() > 32 {
        return Err(FadeError::LengthMismatch {
            expected: 32,
            got: dx.len(),
        });
    }
    let mut support = 0u32;
    let mut first: Option<DiffPoint> = None;
    let mut mags = Vec::new();
    let mut phases = Vec::new();
    let modulus = params.phase_modulus();
    for (i, &p) in dx.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        if p.mag() as usize > params.half() || p.phase() >= modulus {
            return Err(PskError::PointOutOfRange {
                mag: p.mag(),
                phase: p.phase(),
                order: params.order(),
            }
            .into());
        }
        support |= 1 << i;
        mags.push(p.mag() as u16);
        match first {
            None => first = Some(p),
            Some(f) => phases.push(((p.phase() + modulus - f.phase()) % modulus) as u16),
        }
    }
    if support == 0 {
        return Err(FadeError::ZeroVector);
    }
    let mags = if mags.iter().all(|&m| m == mags[0]) {
        MagProfile::Uniform
    } else {
        MagProfile::Exact(mags)
    };
    Ok(SubspaceKey {
        support,
        mags,
        phases,
    })
}

pub fn classify(key: &SubspaceKey, dims: &SystemDims) -> SubspaceClass {
    let a = key.support & dims.a_mask() != 0;
    let b = key.support & dims.b_mask() != 0;
    match (a, b) {
        (false, false) => SubspaceClass::Trivial,
        (true, false) => SubspaceClass::NonRemovableA,
        (false, true) => SubspaceClass::NonRemovableB,
        (true, true) => SubspaceClass::Removable,
    }
}

/// True iff `dx` and `dy` span the same line.
pub fn is_parallel(
    params: PskParams,
    dx: &[DiffPoint],
    dy: &[DiffPoint],
) -> Result<bool, FadeError> {
    if dx.len() != dy.len() {
        return Err(FadeError::LengthMismatch {
            expected: dx.len(),
            got: dy.len(),
        });
    }
    Ok(canonical_key(params, dx)? == canonical_key(params, dy)?)
}

/// Number of subspaces with a fixed support of size `k`.
fn per_support(params: PskParams, k: usize) -> Result<u64, FadeError> {
    let half = params.half() as u64;
    let m = params.order() as u64;
    let profiles = half
        .checked_pow(k as u32)
        .and_then(|p| p.checked_sub(half))
        .map(|p| p + 1)
        .ok_or(FadeError::Overflow)?;
    m.checked_pow(k as u32 - 1)
        .and_then(|p| p.checked_mul(profiles))
        .ok_or(FadeError::Overflow)
}

fn choose(n: usize, k: usize) -> u64 {
    if k > n {
        0
    } else {
        binomial(n as u64, k as u64)
    }
}

/// Closed-form count of non-trivial non-removable subspaces.
pub fn count_nonremovable(params: PskParams, dims: &SystemDims) -> Result<u64, FadeError> {
    let mut total = 0u64;
    for k in 1..=dims.na.max(dims.nb) {
        let supports = choose(dims.na, k) + choose(dims.nb, k);
        let c = supports
            .checked_mul(per_support(params, k)?)
            .ok_or(FadeError::Overflow)?;
        total = total.checked_add(c).ok_or(FadeError::Overflow)?;
    }
    Ok(total)
}

/// Closed-form count of removable subspaces with support size `k`.
pub fn count_removable(params: PskParams, dims: &SystemDims, k: usize) -> Result<u64, FadeError> {
    let n = dims.total();
    if k == 0 || k > n {
        return Err(FadeError::SupportSize { k, total: n });
    }
    let supports = choose(n, k) - choose(dims.na, k) - choose(dims.nb, k);
    supports
        .checked_mul(per_support(params, k)?)
        .ok_or(FadeError::Overflow)
}

pub fn count_removable_total(params: PskParams, dims: &SystemDims) -> Result<u64, FadeError> {
    (1..=dims.total()).try_fold(0u64, |acc, k| {
        acc.checked_add(count_removable(params, dims, k)?)
            .ok_or(FadeError::Overflow)
    })
}

/// Mixed-radix index over `ΔS^len`, leftmost entry most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VectorCodec {
    params: PskParams,
    len: usize,
    count: usize,
}

impl VectorCodec {
    pub fn new(params: PskParams, len: usize) -> Result<Self, FadeError> {
        let count = (params.point_count() as u64)
            .checked_pow(len as u32)
            .filter(|&c| c <= MAX_VECTORS as u64)
            .ok_or(FadeError::TooLarge {
                count: (params.point_count() as f64)
                    .powi(len as i32)
                    .min(usize::MAX as f64) as usize,
                limit: MAX_VECTORS,
            })?;
        Ok(Self {
            params,
            len,
            count: count as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of vectors including zero.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn index(&self, dx: &[DiffPoint]) -> Option<usize> {
        if dx.len() != self.len {
            return None;
        }
        let base = self.params.point_count();
        dx.iter().try_fold(0usize, |acc, &p| {
            Some(acc * base + self.params.point_index(p)?)
        })
    }

    pub fn decode(&self, mut idx: usize) -> Vec<DiffPoint> {
        let base = self.params.point_count();
        let mut out = vec![DiffPoint::ZERO; self.len];
        for slot in out.iter_mut().rev() {
            *slot = self.params.point_at(idx % base);
            idx /= base;
        }
        out
    }
}

/// Every non-trivial subspace of a system together with the index of each
/// difference vector into the key list.
#[derive(Clone, Debug)]
pub struct FadeCatalog {
    params: PskParams,
    dims: SystemDims,
    codec: VectorCodec,
    keys: Vec<SubspaceKey>,
    classes: Vec<SubspaceClass>,
    key_of: Vec<u32>,
    member_start: Vec<u32>,
    members: Vec<u32>,
}

pub const NO_KEY: u32 = u32::MAX;

impl FadeCatalog {
    pub fn build(params: PskParams, dims: SystemDims, exec: Execution) -> Result<Self, FadeError> {
        let codec = VectorCodec::new(params, dims.total())?;
        let per_index: Vec<Option<SubspaceKey>> =
            exec::map_chunks(exec, 1..codec.count(), 512, |r| {
                r.map(|i| canonical_key(params, &codec.decode(i)).ok())
                    .collect::<Vec<_>>()
            })
            .into_iter()
            .flatten()
            .collect();
        let mut keys: Vec<SubspaceKey> = per_index.iter().flatten().cloned().collect();
        keys.sort_unstable();
        keys.dedup();
        let mut key_of = vec![NO_KEY; codec.count()];
        for (i, k) in per_index.iter().enumerate() {
            if let Some(k) = k {
                key_of[i + 1] = keys.binary_search(k).expect("key collected above") as u32;
            }
        }
        let classes = keys.iter().map(|k| classify(k, &dims)).collect();
        let mut member_start = vec![0u32; keys.len() + 1];
        for &k in &key_of {
            if k != NO_KEY {
                member_start[k as usize + 1] += 1;
            }
        }
        for i in 0..keys.len() {
            member_start[i + 1] += member_start[i];
        }
        let mut fill = member_start.clone();
        let mut members = vec![0u32; member_start[keys.len()] as usize];
        for (v, &k) in key_of.iter().enumerate() {
            if k != NO_KEY {
                members[fill[k as usize] as usize] = v as u32;
                fill[k as usize] += 1;
            }
        }
        Ok(Self {
            params,
            dims,
            codec,
            keys,
            classes,
            key_of,
            member_start,
            members,
        })
    }

    pub fn params(&self) -> PskParams {
        self.params
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn codec(&self) -> &VectorCodec {
        &self.codec
    }

    /// All non-trivial keys in canonical order.
    pub fn keys(&self) -> &[SubspaceKey] {
        &self.keys
    }

    pub fn class(&self, id: usize) -> SubspaceClass {
        self.classes[id]
    }

    pub fn key_id(&self, key: &SubspaceKey) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }

    /// Key id of the vector with codec index `v` (`NO_KEY` for zero).
    pub fn key_of_vector(&self, v: usize) -> u32 {
        self.key_of[v]
    }

    /// Codec indices of every vector spanning the subspace `id`.
    pub fn members(&self, id: usize) -> &[u32] {
        &self.members[self.member_start[id] as usize..self.member_start[id + 1] as usize]
    }

    pub fn removable_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.keys.len()).filter(|&i| self.classes[i] == SubspaceClass::Removable)
    }

    pub fn entries(&self) -> Vec<(SubspaceKey, SubspaceClass)> {
        self.keys
            .iter()
            .cloned()
            .zip(self.classes.iter().copied())
            .collect()
    }
}

/// Exhaustive list of non-trivial subspaces with their classes, in canonical
/// key order.
pub fn enumerate_subspaces(
    params: PskParams,
    dims: &SystemDims,
    exec: Execution,
) -> Result<Vec<(SubspaceKey, SubspaceClass)>, FadeError> {
    Ok(FadeCatalog::build(params, *dims, exec)?.entries())
}

/// `‖H Δx₀‖ / (‖H‖_F ‖Δx₀‖)` for the representative of `key`; zero exactly
/// when every row of `H` lies in the subspace.
pub fn subspace_proximity(
    h: &DMatrix<Complex64>,
    params: PskParams,
    key: &SubspaceKey,
) -> Result<f64, FadeError> {
    let rep = key.representative(params, h.ncols())?;
    let dx: Vec<Complex64> = rep.iter().map(|&p| params.materialize(p)).collect();
    let h_norm = h.norm();
    if h_norm == 0.0 {
        return Err(FadeError::ZeroMatrix);
    }
    let dx_norm = dx.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let proj = h
        .row_iter()
        .map(|row| {
            row.iter()
                .zip(&dx)
                .map(|(a, b)| a * b)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum::<f64>();
    Ok(proj.sqrt() / (h_norm * dx_norm))
}

impl fmt::Display for SubspaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubspaceClass::Trivial => "trivial",
            SubspaceClass::NonRemovableA => "nonremovable-a",
            SubspaceClass::NonRemovableB => "nonremovable-b",
            SubspaceClass::Removable => "removable",
        })
    }
}

impl fmt::Display for SubspaceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}:", self.support)?;
        match &self.mags {
            MagProfile::Uniform => write!(f, "u")?,
            MagProfile::Exact(m) => write!(f, "{}", join(m))?,
        }
        write!(f, ":{}", join(&self.phases))
    }
}

fn join(xs: &[u16]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl FromStr for SubspaceKey {
    type Err = FadeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FadeError::KeyParse(s.to_string());
        let mut parts = s.trim().split(':');
        let (Some(sup), Some(mag), Some(ph), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(err());
        };
        let support = u32::from_str_radix(sup, 16).map_err(|_| err())?;
        let list = |x: &str| -> Result<Vec<u16>, FadeError> {
            if x.is_empty() {
                return Ok(Vec::new());
            }
            x.split(',')
                .map(|v| v.parse::<u16>().map_err(|_| err()))
                .collect()
        };
        let mags = if mag == "u" {
            MagProfile::Uniform
        } else {
            MagProfile::Exact(list(mag)?)
        };
        let phases = list(ph)?;
        Ok(Self {
            support,
            mags,
            phases,
        })
    }
}
