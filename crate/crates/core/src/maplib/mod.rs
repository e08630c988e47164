//! Libraries of clusterings that together remove every removable singular
//! fade subspace of a system, plus the per-channel distance evaluation the
//! relay uses to pick among them.

mod count;
mod distance;
mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::fadespace::{canonical_key, FadeCatalog, FadeError, SubspaceKey, SystemDims};
use crate::latin::{
    build_cplr, cartesian_product, complete, extract_rectangle, xor_map, Isotopy, LatinError,
    LatinRectangle, PairIndex, DEFAULT_BUDGET,
};
use crate::psk::{DiffPoint, PskParams};

pub use count::sufficient_generator_count;
pub use distance::NormOrder;
pub use io::{load, parse_library, save, write_library};

/// Largest `nA + nB` a library is built for.
pub const MAX_TOTAL_ANTENNAS: usize = 4;

#[derive(Debug, Error)]
pub enum MapError {
    #[error(transparent)]
    Fade(#[from] FadeError),
    #[error(transparent)]
    Latin(#[from] LatinError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{na}x{nb} exceeds the library size guard (nA + nB <= {MAX_TOTAL_ANTENNAS})")]
    TooLarge { na: usize, nb: usize },
    #[error("no map found for {} key(s): {}", .0.len(), .0.join(" "))]
    Uncovered(Vec<String>),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("checksum mismatch: file says {stored:08x}, content gives {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("map {id} declares removals that differ from the recomputed set")]
    Removals { id: usize },
    #[error("generator count is defined for k in 2..=4, got {0}")]
    UnsupportedK(usize),
    #[error("library is empty")]
    Empty,
}

/// How a map entered the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Xor,
    Isotopy,
    Product,
    Extraction,
    Completion,
    Loaded,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Origin::Xor => "xor",
            Origin::Isotopy => "isotopy",
            Origin::Product => "product",
            Origin::Extraction => "extraction",
            Origin::Completion => "completion",
            Origin::Loaded => "loaded",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct LibraryMap {
    rect: LatinRectangle,
    removed: Vec<SubspaceKey>,
    merged: FixedBitSet,
    origin: Origin,
}

impl LibraryMap {
    /// Canonically relabelled grid.
    pub fn rect(&self) -> &LatinRectangle {
        &self.rect
    }

    /// Every removable key this map removes, sorted.
    pub fn removed(&self) -> &[SubspaceKey] {
        &self.removed
    }

    /// Codec indices of the difference vectors whose cell pairs all share a
    /// symbol.
    pub fn merged(&self) -> &FixedBitSet {
        &self.merged
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn t(&self) -> u32 {
        self.rect.t()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenOptions {
    /// Completion node budget per alphabet size.
    pub budget: u64,
    /// Largest alphabet a completion may use; `None` means twice the grid
    /// side.
    pub t_max: Option<u32>,
    pub exec: Execution,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            t_max: None,
            exec: Execution::default(),
        }
    }
}

impl GenOptions {
    /// Defaults, with the budget taken from `PLNC_BUDGET` when set.
    pub fn from_env() -> Self {
        let budget = std::env::var("PLNC_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_BUDGET);
        Self {
            budget,
            ..Self::default()
        }
    }
}

/// A set of maps with exactly one designated map per removable key.
#[derive(Clone, Debug)]
pub struct MapLibrary {
    catalog: FadeCatalog,
    maps: Vec<LibraryMap>,
    coverage: BTreeMap<SubspaceKey, usize>,
}

impl MapLibrary {
    pub fn params(&self) -> PskParams {
        self.catalog.params()
    }

    pub fn dims(&self) -> &SystemDims {
        self.catalog.dims()
    }

    pub fn catalog(&self) -> &FadeCatalog {
        &self.catalog
    }

    pub fn maps(&self) -> &[LibraryMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn coverage(&self) -> &BTreeMap<SubspaceKey, usize> {
        &self.coverage
    }

    /// Map designated for `key`.
    pub fn map_for(&self, key: &SubspaceKey) -> Option<usize> {
        self.coverage.get(key).copied()
    }

    /// Id of the map with the same partition as `rect`.
    pub fn find(&self, rect: &LatinRectangle) -> Option<usize> {
        let canon = rect.canonical();
        self.maps.iter().position(|m| m.rect == canon)
    }

    /// Codec indices of the non-zero difference vectors realized by at
    /// least one cell pair with different symbols.
    pub fn separated(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let merged = &self.maps[id].merged;
        (1..self.catalog.codec().count()).filter(move |&v| !merged.contains(v))
    }

    /// Assembles a library from maps, recomputing what each one removes and
    /// designating the covering map per key.
    pub fn from_maps(
        params: PskParams,
        dims: SystemDims,
        maps: Vec<(LatinRectangle, Origin)>,
        exec: Execution,
    ) -> Result<Self, MapError> {
        let mut pool = Pool::new(params, dims, exec)?;
        for (rect, origin) in maps {
            pool.add(rect, origin)?;
        }
        pool.finish()
    }
}

/// Keys removed by `rect`, by catalog id, with its merged bitset.
fn analyse(
    catalog: &FadeCatalog,
    index: &PairIndex,
    rect: &LatinRectangle,
) -> (Vec<usize>, FixedBitSet) {
    let merged = index.merged(rect, catalog.codec().count());
    let removed = catalog
        .removable_ids()
        .filter(|&id| {
            catalog
                .members(id)
                .iter()
                .all(|&v| merged.contains(v as usize))
        })
        .collect();
    (removed, merged)
}

struct Pool {
    params: PskParams,
    dims: SystemDims,
    exec: Execution,
    catalog: FadeCatalog,
    index: PairIndex,
    maps: Vec<(LatinRectangle, Vec<usize>, FixedBitSet, Origin)>,
    seen: HashSet<Vec<u32>>,
    uncovered: BTreeSet<usize>,
}

impl Pool {
    fn new(params: PskParams, dims: SystemDims, exec: Execution) -> Result<Self, MapError> {
        let catalog = FadeCatalog::build(params, dims, exec)?;
        let index = PairIndex::new(params, &dims)?;
        let uncovered = catalog.removable_ids().collect();
        Ok(Self {
            params,
            dims,
            exec,
            catalog,
            index,
            maps: Vec::new(),
            seen: HashSet::new(),
            uncovered,
        })
    }

    /// Adds a map unless its partition is already pooled.
    fn add(&mut self, rect: LatinRectangle, origin: Origin) -> Result<Option<usize>, MapError> {
        let rect = rect.canonical();
        if rect.layout(self.params)? != SystemDims::new(self.dims.na, self.dims.nb, 1)? {
            return Err(LatinError::Shape {
                rows: rect.rows(),
                cols: rect.cols(),
                m: self.params.order(),
            }
            .into());
        }
        if !self.seen.insert(rect.cells().to_vec()) {
            return Ok(None);
        }
        let (removed, merged) = analyse(&self.catalog, &self.index, &rect);
        for id in &removed {
            self.uncovered.remove(id);
        }
        self.maps.push((rect, removed, merged, origin));
        Ok(Some(self.maps.len() - 1))
    }

    /// Adds every isotopic image of map `seed` that removes a key still
    /// uncovered.
    fn expand(&mut self, seed: usize, group: &[Isotopy]) -> Result<(), MapError> {
        let params = self.params;
        let keys = self.catalog.keys();
        let removed: Vec<&SubspaceKey> = self.maps[seed].1.iter().map(|&id| &keys[id]).collect();
        let catalog = &self.catalog;
        let images: Vec<Result<Vec<usize>, MapError>> = exec::map_slice(self.exec, group, |g| {
            removed
                .iter()
                .map(|k| {
                    let image = g.apply_key(params, k)?;
                    catalog
                        .key_id(&image)
                        .ok_or_else(|| MapError::Uncovered(vec![image.to_string()]))
                })
                .collect()
        });
        for (g, image) in group.iter().zip(images) {
            if self.uncovered.is_empty() {
                break;
            }
            if image?.iter().any(|id| self.uncovered.contains(id)) {
                let rect = g.apply(params, &self.maps[seed].0)?;
                self.add(rect, Origin::Isotopy)?;
            }
        }
        Ok(())
    }

    /// Designates one map per key (lowest `t`, then smallest canonical
    /// grid) and drops maps nobody was assigned.
    fn finish(self) -> Result<MapLibrary, MapError> {
        if !self.uncovered.is_empty() {
            let keys = self
                .uncovered
                .iter()
                .map(|&id| self.catalog.keys()[id].to_string())
                .collect();
            return Err(MapError::Uncovered(keys));
        }
        let mut order: Vec<usize> = (0..self.maps.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (&self.maps[a].0, &self.maps[b].0);
            ra.t().cmp(&rb.t()).then_with(|| ra.cells().cmp(rb.cells()))
        });
        let mut best: HashMap<usize, usize> = HashMap::new();
        for &m in order.iter().rev() {
            for &id in &self.maps[m].1 {
                best.insert(id, m);
            }
        }
        let chosen: BTreeSet<usize> = best.values().copied().collect();
        let kept: Vec<usize> = order.into_iter().filter(|m| chosen.contains(m)).collect();
        let new_id: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let keys = self.catalog.keys();
        let coverage = best
            .iter()
            .map(|(&id, m)| (keys[id].clone(), new_id[m]))
            .collect();
        let mut slots: Vec<Option<_>> = self.maps.into_iter().map(Some).collect();
        let maps = kept
            .iter()
            .map(|&m| {
                let (rect, removed, merged, origin) = slots[m].take().expect("each map kept once");
                let removed = removed.iter().map(|&id| keys[id].clone()).collect();
                LibraryMap {
                    rect,
                    removed,
                    merged,
                    origin,
                }
            })
            .collect();
        Ok(MapLibrary {
            catalog: self.catalog,
            maps,
            coverage,
        })
    }
}

fn check_guard(dims: &SystemDims) -> Result<(), MapError> {
    if dims.na + dims.nb > MAX_TOTAL_ANTENNAS {
        return Err(MapError::TooLarge {
            na: dims.na,
            nb: dims.nb,
        });
    }
    Ok(())
}

/// Builds a library covering every removable key: the XOR map first, then
/// isotopic images of pooled maps, Cartesian products of lower-order maps,
/// extraction from the square library for `nA != nB`, and constrained
/// completion for whatever is left.
pub fn generate_library(
    params: PskParams,
    dims: &SystemDims,
    opts: &GenOptions,
) -> Result<MapLibrary, MapError> {
    check_guard(dims)?;
    let mut cache = HashMap::new();
    build(
        params,
        SystemDims::new(dims.na, dims.nb, 1)?,
        opts,
        &mut cache,
    )
}

fn build(
    params: PskParams,
    dims: SystemDims,
    opts: &GenOptions,
    cache: &mut HashMap<(usize, usize), MapLibrary>,
) -> Result<MapLibrary, MapError> {
    if let Some(lib) = cache.get(&(dims.na, dims.nb)) {
        return Ok(lib.clone());
    }
    let mut pool = Pool::new(params, dims, opts.exec)?;
    let rows = params.order().pow(dims.na as u32);
    let cols = params.order().pow(dims.nb as u32);
    let t_max = opts.t_max.unwrap_or(2 * rows.max(cols) as u32);

    if dims.na == dims.nb {
        let n = dims.na;
        let group = Isotopy::group(params, n);
        let lower = if n > 1 {
            let outer = build(params, SystemDims::square(n - 1)?, opts, cache)?;
            let inner = build(params, SystemDims::square(1)?, opts, cache)?;
            Some((outer, inner))
        } else {
            None
        };
        if let Some(id) = pool.add(xor_map(params, n)?, Origin::Xor)? {
            pool.expand(id, &group)?;
        }
        let mut failed = Vec::new();
        while let Some(&id) = pool.uncovered.first() {
            let key = pool.catalog.keys()[id].clone();
            let product = match &lower {
                Some((outer, inner)) => product_for(params, n, &key, outer, inner)?,
                None => None,
            };
            // a product wider than the grid side is kept only if completion
            // cannot beat it
            let side = rows as u32;
            let pick = match product {
                Some(p) if p.t() <= side => Some((p, Origin::Product)),
                product => {
                    let limit = product
                        .as_ref()
                        .map_or(t_max, |p| p.t().saturating_sub(1).min(t_max));
                    match complete_key(params, &dims, &key, limit, opts.budget)? {
                        Some(c) => Some((c, Origin::Completion)),
                        None => product.map(|p| (p, Origin::Product)),
                    }
                }
            };
            if let Some((rect, origin)) = pick {
                if let Some(m) = pool.add(rect, origin)? {
                    pool.expand(m, &group)?;
                }
            }
            if pool.uncovered.remove(&id) {
                failed.push(key.to_string());
            }
        }
        if !failed.is_empty() {
            return Err(MapError::Uncovered(failed));
        }
    } else {
        let n = dims.na.max(dims.nb);
        if 2 * n <= MAX_TOTAL_ANTENNAS {
            let square = build(params, SystemDims::square(n)?, opts, cache)?;
            for map in square.maps() {
                pool.add(
                    extract_rectangle(params, map.rect(), &dims)?,
                    Origin::Extraction,
                )?;
            }
        }
        let mut failed = Vec::new();
        while let Some(&id) = pool.uncovered.first() {
            let key = pool.catalog.keys()[id].clone();
            if let Some(rect) = complete_key(params, &dims, &key, t_max, opts.budget)? {
                pool.add(rect, Origin::Completion)?;
            }
            if pool.uncovered.remove(&id) {
                failed.push(key.to_string());
            }
        }
        if !failed.is_empty() {
            return Err(MapError::Uncovered(failed));
        }
    }
    let lib = pool.finish()?;
    cache.insert((dims.na, dims.nb), lib.clone());
    Ok(lib)
}

fn complete_key(
    params: PskParams,
    dims: &SystemDims,
    key: &SubspaceKey,
    t_max: u32,
    budget: u64,
) -> Result<Option<LatinRectangle>, MapError> {
    let cplr = build_cplr(params, dims, key)?;
    match complete(&cplr, t_max, budget) {
        Ok(done) => Ok(Some(done.rect)),
        Err(LatinError::Budget { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Splits the key's representative into an `(n-1) x (n-1)` outer part and a
/// `1 x 1` inner part and multiplies the maps covering them.
fn product_for(
    params: PskParams,
    n: usize,
    key: &SubspaceKey,
    outer: &MapLibrary,
    inner: &MapLibrary,
) -> Result<Option<LatinRectangle>, MapError> {
    let rep = key.representative(params, 2 * n)?;
    let y: Vec<DiffPoint> = rep[..n - 1]
        .iter()
        .chain(&rep[n..2 * n - 1])
        .copied()
        .collect();
    let z = [rep[n - 1], rep[2 * n - 1]];
    let pick = |lib: &MapLibrary, part: &[DiffPoint]| -> Result<Option<usize>, MapError> {
        if part.iter().all(|p| p.is_zero()) {
            return Ok(Some(0));
        }
        let k = canonical_key(params, part)?;
        Ok(lib.map_for(&k))
    };
    let (Some(o), Some(i)) = (pick(outer, &y)?, pick(inner, &z)?) else {
        return Ok(None);
    };
    Ok(Some(cartesian_product(
        inner.maps[i].rect(),
        outer.maps[o].rect(),
    )?))
}

/// Every non-zero difference vector that at least one pair of cells with
/// different symbols realizes, in codec order.
pub fn separated_differences(
    params: PskParams,
    rect: &LatinRectangle,
) -> Result<Vec<Vec<DiffPoint>>, MapError> {
    let dims = rect.layout(params)?;
    let codec = crate::fadespace::VectorCodec::new(params, dims.total())?;
    let index = PairIndex::new(params, &dims)?;
    let merged = index.merged(rect, codec.count());
    Ok((1..codec.count())
        .filter(|&v| !merged.contains(v))
        .map(|v| codec.decode(v))
        .collect())
}

/// Removable keys of the system that no map of `maps` removes.
pub fn uncovered_keys(
    params: PskParams,
    dims: &SystemDims,
    maps: &[LatinRectangle],
) -> Result<Vec<SubspaceKey>, MapError> {
    let dims = SystemDims::new(dims.na, dims.nb, 1)?;
    let catalog = FadeCatalog::build(params, dims, Execution::Sequential)?;
    let index = PairIndex::new(params, &dims)?;
    let mut left: BTreeSet<usize> = catalog.removable_ids().collect();
    for rect in maps {
        for id in analyse(&catalog, &index, rect).0 {
            left.remove(&id);
        }
    }
    Ok(left
        .into_iter()
        .map(|id| catalog.keys()[id].clone())
        .collect())
}

#[cfg(test)]
mod tests;
