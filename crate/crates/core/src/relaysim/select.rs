use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SimError;
use crate::latin::stack;
use crate::maplib::{MapLibrary, NormOrder};

/// Which maps the relay evaluates for a channel draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shortlist {
    All,
    /// Maps designated for the `n` subspaces closest to the channel.
    Nearest(usize),
}

impl fmt::Display for Shortlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shortlist::All => write!(f, "all"),
            Shortlist::Nearest(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Shortlist {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Shortlist::All);
        }
        match s.parse() {
            Ok(n) if n > 0 => Ok(Shortlist::Nearest(n)),
            _ => Err(SimError::Shortlist(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub map: usize,
    pub d_min: f64,
}

/// Sorted-norm head length walked before falling back to a full scan.
const HEAD: usize = 64;

/// Per-library state for repeated selections: each removable key's
/// representative as a codec index, with its squared norm.
#[derive(Clone, Debug)]
pub struct Selector<'a> {
    lib: &'a MapLibrary,
    reps: Vec<(usize, f64, usize)>,
}

impl<'a> Selector<'a> {
    pub fn new(lib: &'a MapLibrary) -> Result<Self, SimError> {
        if lib.is_empty() {
            return Err(SimError::EmptyLibrary);
        }
        let params = lib.params();
        let len = lib.dims().total();
        let codec = lib.catalog().codec();
        let reps = lib
            .coverage()
            .iter()
            .map(|(key, &map)| {
                let rep = key.representative(params, len)?;
                let norm: f64 = rep.iter().map(|&p| params.materialize(p).norm_sqr()).sum();
                let v = codec
                    .index(&rep)
                    .expect("representatives lie on the lattice");
                Ok((v, norm, map))
            })
            .collect::<Result<_, crate::fadespace::FadeError>>()
            .map_err(crate::maplib::MapError::from)?;
        Ok(Self { lib, reps })
    }

    pub fn library(&self) -> &MapLibrary {
        self.lib
    }

    /// Candidate map ids in ascending order.
    fn candidates(&self, norms: &[f64], shortlist: Shortlist) -> Vec<usize> {
        match shortlist {
            Shortlist::All => (0..self.lib.len()).collect(),
            Shortlist::Nearest(n) if n >= self.reps.len() => {
                let mut ids: Vec<usize> = self.reps.iter().map(|r| r.2).collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            }
            Shortlist::Nearest(n) => {
                // proximity up to the common factor 1/‖H‖_F
                let mut prox: Vec<(f64, usize)> = self
                    .reps
                    .iter()
                    .enumerate()
                    .map(|(i, &(v, norm, _))| (norms[v] / norm, i))
                    .collect();
                let cmp =
                    |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                prox.select_nth_unstable_by(n - 1, cmp);
                let mut ids: Vec<usize> = prox[..n].iter().map(|&(_, i)| self.reps[i].2).collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            }
        }
    }

    /// Map maximizing the minimum cluster distance among the candidates for
    /// `[H_A H_B]`; ties go to the lowest id.
    pub fn select(
        &self,
        h_a: &DMatrix<Complex64>,
        h_b: &DMatrix<Complex64>,
        shortlist: Shortlist,
    ) -> Result<Selection, SimError> {
        let norms = self.lib.norms(&stack(h_a, h_b))?;
        Ok(self.select_with_norms(&norms, shortlist))
    }

    pub fn select_with_norms(&self, norms: &[f64], shortlist: Shortlist) -> Selection {
        let order = NormOrder::new(norms, HEAD);
        let mut best = Selection {
            map: usize::MAX,
            d_min: f64::NEG_INFINITY,
        };
        for id in self.candidates(norms, shortlist) {
            let d = order.d_min(self.lib, id, norms);
            if d > best.d_min {
                best = Selection { map: id, d_min: d };
            }
        }
        best
    }
}

/// One-off selection; build a [`Selector`] once when selecting repeatedly.
pub fn select_map(
    h_a: &DMatrix<Complex64>,
    h_b: &DMatrix<Complex64>,
    lib: &MapLibrary,
    shortlist: Shortlist,
) -> Result<Selection, SimError> {
    Selector::new(lib)?.select(h_a, h_b, shortlist)
}
