use num_integer::binomial;

use super::MapError;
use crate::psk::PskParams;

/// Number of maps that suffice, up to isotopy, for the removable subspaces
/// of a 2x2 system whose defining vector has `k` non-zero entries.
///
/// With `h = M/2` magnitude levels there are `N = C(h, 2) + h` unordered
/// pairs of non-zero magnitudes. For `k = 4` a subspace is fixed up to
/// isotopy by an unordered pair of such pairs; for `k = 3` by one pair and
/// one magnitude; for `k = 2` by one pair. The `h` all-equal choices span a
/// single subspace, so `h - 1` of them are discounted.
pub fn sufficient_generator_count(params: PskParams, k: usize) -> Result<u64, MapError> {
    let h = params.half() as u64;
    let pairs = binomial(h, 2) + h;
    let raw = match k {
        4 => binomial(pairs, 2) + pairs,
        3 => pairs * h,
        2 => pairs,
        _ => return Err(MapError::UnsupportedK(k)),
    };
    Ok(raw + 1 - h)
}
