use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SimError;

/// Fading law of every channel entry; all entries are i.i.d. with unit
/// average power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelModel {
    Rayleigh,
    /// Line-of-sight to scattered power ratio in dB.
    Rician {
        k_db: f64,
    },
}

impl ChannelModel {
    /// Mean and scattered standard deviation of one entry.
    fn moments(self) -> (f64, f64) {
        match self {
            ChannelModel::Rayleigh => (0.0, 1.0),
            ChannelModel::Rician { k_db } => {
                let k = 10f64.powf(k_db / 10.0);
                if k.is_infinite() {
                    return (1.0, 0.0);
                }
                ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
            }
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Rayleigh => write!(f, "rayleigh"),
            ChannelModel::Rician { k_db } => write!(f, "rician:{k_db}"),
        }
    }
}

impl FromStr for ChannelModel {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::Model(s.to_string());
        match s.split_once(':') {
            None if s == "rayleigh" => Ok(ChannelModel::Rayleigh),
            Some(("rician", k)) => {
                let k_db: f64 = k.parse().map_err(|_| bad())?;
                if k_db.is_nan() {
                    return Err(bad());
                }
                Ok(ChannelModel::Rician { k_db })
            }
            _ => Err(bad()),
        }
    }
}

/// Circularly symmetric complex Gaussian with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// `rows x cols` matrix of i.i.d. entries; a Rician entry is a real
/// line-of-sight mean plus scattered Gaussian.
pub fn sample_channel<R: Rng + ?Sized>(
    model: ChannelModel,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let (mean, sd) = model.moments();
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(mean, 0.0) + complex_gaussian(rng, sd * sd)
    })
}
