//! Monte Carlo simulation of two-way relaying with physical-layer network
//! coding: joint ML detection at the relay, clustering by a fixed XOR map or
//! by the library map with the best minimum cluster distance, a repetition
//! `t`-PSK broadcast, and decoding at both end nodes with their own message
//! as side information.

mod channel;
mod phy;
mod select;
mod stats;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::fadespace::SystemDims;
use crate::latin::{extract_rectangle, xor_map, LatinError, LatinRectangle};
use crate::maplib::{MapError, MapLibrary};
use crate::psk::PskParams;

pub use channel::{complex_gaussian, sample_channel, ChannelModel};
pub use phy::{bc_decode, bc_decode_among, bc_encode, bc_point, ml_detect};
pub use select::{select_map, Selection, Selector, Shortlist};
pub use stats::{
    log_slope, pivot_ber, read_ber_table, snr_at_ber, wilson_interval, write_csv, write_node_csv,
    BerRow,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Latin(#[from] LatinError),
    #[error("unknown channel model {0:?}, expected `rayleigh` or `rician:<K dB>`")]
    Model(String),
    #[error("unknown scheme {0:?}, expected `adaptive` or `xor`")]
    Scheme(String),
    #[error("shortlist must be `all` or a positive integer, got {0:?}")]
    Shortlist(String),
    #[error("label {label} outside an alphabet of {t}")]
    Label { label: u32, t: u32 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("map library is empty")]
    EmptyLibrary,
    #[error("the adaptive scheme needs a map library")]
    MissingLibrary,
    #[error("library is for M={lib_m} {lib_na}x{lib_nb}, simulation is M={m} {na}x{nb}")]
    LibraryMismatch {
        lib_m: usize,
        lib_na: usize,
        lib_nb: usize,
        m: usize,
        na: usize,
        nb: usize,
    },
    #[error("invalid SNR list: {0}")]
    Snr(String),
    #[error("BER table: {0}")]
    Table(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Adaptive,
    FixedXor,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Adaptive => "adaptive",
            Scheme::FixedXor => "xor",
        })
    }
}

impl FromStr for Scheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adaptive" => Ok(Scheme::Adaptive),
            "xor" => Ok(Scheme::FixedXor),
            _ => Err(SimError::Scheme(s.to_string())),
        }
    }
}

/// A point ends once it has `min_trials` frames and `min_errors` bit errors,
/// or at `max_trials` frames regardless.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub min_trials: u64,
    pub min_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_trials: 10_000,
            min_errors: 100,
            max_trials: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub params: PskParams,
    /// End-node antennas and relay antennas (`nr`).
    pub dims: SystemDims,
    pub snr_db: Vec<f64>,
    pub model: ChannelModel,
    pub scheme: Scheme,
    pub stop: StopRule,
    pub seed: u64,
    pub shortlist: Shortlist,
    pub exec: Execution,
}

impl SimConfig {
    pub fn new(params: PskParams, dims: SystemDims, scheme: Scheme) -> Self {
        Self {
            params,
            dims,
            snr_db: vec![10.0],
            model: ChannelModel::Rayleigh,
            scheme,
            stop: StopRule::default(),
            seed: 0,
            shortlist: Shortlist::All,
            exec: Execution::default(),
        }
    }

    /// Information bits per frame over both directions.
    pub fn bits_per_frame(&self) -> u64 {
        ((self.dims.na + self.dims.nb) * self.params.lambda() as usize) as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: u64,
    /// Bits delivered over both directions.
    pub bits: u64,
    /// Of which B's bits decoded at A.
    pub bits_at_a: u64,
    pub bit_errors: u64,
    /// Errors in B's bits as decoded at A.
    pub errors_at_a: u64,
    /// Errors in A's bits as decoded at B.
    pub errors_at_b: u64,
    /// Frames whose relay label differed from the label of the sent pair.
    pub relay_errors: u64,
    pub ber: f64,
    /// Half-width of the Wilson 95% interval.
    pub ci95: f64,
}

impl BerRecord {
    /// Wilson 95% interval of the combined BER.
    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.bits)
    }
}

enum Relay<'a> {
    Fixed(&'a LatinRectangle),
    Adaptive(Selector<'a>, Shortlist),
}

struct Frame {
    errors_at_a: u64,
    errors_at_b: u64,
    relay_error: bool,
}

struct Link<'a> {
    cfg: &'a SimConfig,
    relay: Relay<'a>,
    amplitude: f64,
}

impl Link<'_> {
    fn run(&self, frame: u64) -> Result<Frame, SimError> {
        let cfg = self.cfg;
        let (p, d) = (cfg.params, &cfg.dims);
        let rows = p.order().pow(d.na as u32);
        let cols = p.order().pow(d.nb as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ frame);
        let r = rng.random_range(0..rows);
        let c = rng.random_range(0..cols);
        let h_a =
            sample_channel(cfg.model, d.nr, d.na, &mut rng) * Complex64::new(self.amplitude, 0.0);
        let h_b =
            sample_channel(cfg.model, d.nr, d.nb, &mut rng) * Complex64::new(self.amplitude, 0.0);
        let z_r = DVector::from_fn(d.nr, |_, _| complex_gaussian(&mut rng, 1.0));
        let g_a = sample_channel(cfg.model, d.na, d.nr, &mut rng);
        let g_b = sample_channel(cfg.model, d.nb, d.nr, &mut rng);
        let z_a = DVector::from_fn(d.na, |_, _| complex_gaussian(&mut rng, 1.0));
        let z_b = DVector::from_fn(d.nb, |_, _| complex_gaussian(&mut rng, 1.0));

        let x_a = symbols(p, d.na, r);
        let x_b = symbols(p, d.nb, c);
        let y_r = &h_a * x_a + &h_b * x_b + z_r;
        let (r_hat, c_hat) = ml_detect(&y_r, &h_a, &h_b, p, d)?;
        let rect = match &self.relay {
            Relay::Fixed(rect) => *rect,
            Relay::Adaptive(selector, shortlist) => {
                let chosen = selector.select(&h_a, &h_b, *shortlist)?;
                selector.library().maps()[chosen.map].rect()
            }
        };
        let t = rect.t();
        let x_r = bc_encode(rect.get(r_hat, c_hat), t, d.nr, self.amplitude)?;
        let y_a = &g_a * &x_r + z_a;
        let y_b = &g_b * &x_r + z_b;

        // each node only considers labels its own line of the map can carry
        let at_a = bc_decode_among(&y_a, &g_a, t, self.amplitude, rect.row(r).iter().copied())
            .expect("non-empty row");
        let c_dec = rect
            .row(r)
            .iter()
            .position(|&l| l == at_a)
            .expect("label from row");
        let at_b = bc_decode_among(
            &y_b,
            &g_b,
            t,
            self.amplitude,
            (0..rows).map(|i| rect.get(i, c)),
        )
        .expect("non-empty column");
        let r_dec = (0..rows)
            .position(|i| rect.get(i, c) == at_b)
            .expect("label from column");
        Ok(Frame {
            errors_at_a: (c_dec ^ c).count_ones() as u64,
            errors_at_b: (r_dec ^ r).count_ones() as u64,
            relay_error: rect.get(r_hat, c_hat) != rect.get(r, c),
        })
    }
}

/// Unit-energy symbols of the vector with linear index `i`.
fn symbols(params: PskParams, n: usize, i: usize) -> DVector<Complex64> {
    DVector::from_iterator(
        n,
        crate::latin::index_digits(params, n, i)
            .into_iter()
            .map(|k| params.symbol(k)),
    )
}

/// Fixed XOR clustering of the system (first rows or columns of the square
/// map when `nA != nB`).
pub fn xor_clustering(params: PskParams, dims: &SystemDims) -> Result<LatinRectangle, SimError> {
    let n = dims.na.max(dims.nb);
    let square = xor_map(params, n)?;
    if dims.na == dims.nb {
        return Ok(square);
    }
    Ok(extract_rectangle(
        params,
        &square,
        &SystemDims::new(dims.na, dims.nb, 1).map_err(LatinError::from)?,
    )?)
}

/// Frames per stop-rule check; fixed so results do not depend on threads.
const BATCH: u64 = 2048;
const CHUNK: usize = 128;

/// BER per SNR point. Frame `i` of every point draws from its own stream
/// seeded with `seed ^ i`, so runs are reproducible and the schemes see the
/// same channels and noise.
pub fn run_sim(cfg: &SimConfig, library: Option<&MapLibrary>) -> Result<Vec<BerRecord>, SimError> {
    if cfg.snr_db.is_empty() {
        return Err(SimError::Snr("empty".into()));
    }
    if let Some(bad) = cfg.snr_db.iter().find(|s| !s.is_finite()) {
        return Err(SimError::Snr(format!("{bad} is not finite")));
    }
    let fixed;
    let relay = match cfg.scheme {
        Scheme::FixedXor => {
            fixed = xor_clustering(cfg.params, &cfg.dims)?;
            Relay::Fixed(&fixed)
        }
        Scheme::Adaptive => {
            let lib = library.ok_or(SimError::MissingLibrary)?;
            let (ld, d) = (lib.dims(), &cfg.dims);
            if lib.params() != cfg.params || ld.na != d.na || ld.nb != d.nb {
                return Err(SimError::LibraryMismatch {
                    lib_m: lib.params().order(),
                    lib_na: ld.na,
                    lib_nb: ld.nb,
                    m: cfg.params.order(),
                    na: d.na,
                    nb: d.nb,
                });
            }
            Relay::Adaptive(Selector::new(lib)?, cfg.shortlist)
        }
    };
    let mut link = Link {
        cfg,
        relay,
        amplitude: 1.0,
    };
    let bits_a = (cfg.dims.nb * cfg.params.lambda() as usize) as u64;
    let bits_b = (cfg.dims.na * cfg.params.lambda() as usize) as u64;
    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for &snr in &cfg.snr_db {
        link.amplitude = 10f64.powf(snr / 20.0);
        let (mut trials, mut ea, mut eb, mut er) = (0u64, 0u64, 0u64, 0u64);
        loop {
            let done = trials >= cfg.stop.max_trials
                || (trials >= cfg.stop.min_trials && ea + eb >= cfg.stop.min_errors);
            if done {
                break;
            }
            let n = BATCH.min(cfg.stop.max_trials - trials) as usize;
            let link = &link;
            let sums = exec::map_chunks(cfg.exec, 0..n, CHUNK, |range| {
                range
                    .map(|i| link.run(trials + i as u64))
                    .try_fold((0, 0, 0), |acc, f| {
                        let f = f?;
                        Ok::<_, SimError>((
                            acc.0 + f.errors_at_a,
                            acc.1 + f.errors_at_b,
                            acc.2 + f.relay_error as u64,
                        ))
                    })
            });
            for s in sums {
                let (a, b, r) = s?;
                ea += a;
                eb += b;
                er += r;
            }
            trials += n as u64;
        }
        let bits = trials * (bits_a + bits_b);
        let errors = ea + eb;
        let (lo, hi) = wilson_interval(errors, bits);
        out.push(BerRecord {
            scheme: cfg.scheme,
            snr_db: snr,
            trials,
            bits,
            bits_at_a: trials * bits_a,
            bit_errors: errors,
            errors_at_a: ea,
            errors_at_b: eb,
            relay_errors: er,
            ber: if bits == 0 {
                0.0
            } else {
                errors as f64 / bits as f64
            },
            ci95: (hi - lo) / 2.0,
        });
    }
    Ok(out)
}

/// `start:step:stop` in dB, inclusive of `stop` up to rounding.
pub fn parse_snr_range(s: &str) -> Result<Vec<f64>, SimError> {
    let bad = |why: &str| SimError::Snr(format!("{s:?}: {why}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad("expected numbers")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x] if x.is_finite() => Ok(vec![x]),
        [start, step, stop]
            if start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start =>
        {
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad(
            "expected `start:step:stop` with step > 0 and stop >= start",
        )),
    }
}

#[cfg(test)]
mod tests;
