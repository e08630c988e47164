use nalgebra::DMatrix;
use num_complex::Complex64;

use super::*;
use crate::latin::min_cluster_distance;
use crate::maplib::{generate_library, GenOptions};

fn bpsk() -> PskParams {
    PskParams::new(1).unwrap()
}

fn library(p: PskParams, n: usize) -> MapLibrary {
    generate_library(p, &SystemDims::square(n).unwrap(), &GenOptions::default()).unwrap()
}

fn row(xs: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_iterator(1, xs.len(), xs.iter().map(|&x| Complex64::new(x, 0.0)))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn single_antenna_bpsk_selection() {
    let lib = library(bpsk(), 1);
    let xor = lib.find(&xor_map(bpsk(), 1).unwrap()).unwrap();
    for h_b in [1.0, -1.0] {
        let s = select_map(&row(&[1.0]), &row(&[h_b]), &lib, Shortlist::All).unwrap();
        assert_eq!(s.map, xor);
        assert!((s.d_min - 2.0).abs() < 1e-12);
    }
}

#[test]
fn selection_matches_naive_argmax() {
    let p = bpsk();
    let lib = library(p, 2);
    let selector = Selector::new(&lib).unwrap();
    for seed in 0..50 {
        let mut r = rng(seed);
        let h_a = sample_channel(ChannelModel::Rayleigh, 2, 2, &mut r);
        let h_b = sample_channel(ChannelModel::Rayleigh, 2, 2, &mut r);
        let got = selector.select(&h_a, &h_b, Shortlist::All).unwrap();
        let mut best = (f64::NEG_INFINITY, 0);
        for (id, m) in lib.maps().iter().enumerate() {
            let d = min_cluster_distance(p, m.rect(), &h_a, &h_b).unwrap();
            if d > best.0 {
                best = (d, id);
            }
        }
        assert!((got.d_min - best.0).abs() < 1e-9);
        assert_eq!(got.map, best.1);
    }
}

#[test]
fn selection_ignores_channel_scale() {
    let lib = library(bpsk(), 2);
    let selector = Selector::new(&lib).unwrap();
    let mut r = rng(77);
    for _ in 0..20 {
        let h_a = sample_channel(ChannelModel::Rayleigh, 2, 2, &mut r);
        let h_b = sample_channel(ChannelModel::Rayleigh, 2, 2, &mut r);
        let a = selector.select(&h_a, &h_b, Shortlist::All).unwrap();
        let k = Complex64::new(3.7, 0.0);
        let b = selector
            .select(&(&h_a * k), &(&h_b * k), Shortlist::All)
            .unwrap();
        assert_eq!(a.map, b.map);
        assert!((b.d_min - 3.7 * a.d_min).abs() < 1e-9);
    }
}

#[test]
fn shortlist_of_everything_equals_all() {
    let lib = library(bpsk(), 2);
    let selector = Selector::new(&lib).unwrap();
    let mut r = rng(8);
    for _ in 0..20 {
        let h_a = sample_channel(ChannelModel::Rayleigh, 1, 2, &mut r);
        let h_b = sample_channel(ChannelModel::Rayleigh, 1, 2, &mut r);
        let all = selector.select(&h_a, &h_b, Shortlist::All).unwrap();
        let wide = selector
            .select(&h_a, &h_b, Shortlist::Nearest(1000))
            .unwrap();
        assert_eq!(all, wide);
        let narrow = selector.select(&h_a, &h_b, Shortlist::Nearest(1)).unwrap();
        assert!(narrow.d_min <= all.d_min);
    }
}

#[test]
fn adaptive_never_collapses() {
    let lib = library(bpsk(), 2);
    let selector = Selector::new(&lib).unwrap();
    let mut r = rng(2024);
    for _ in 0..10_000 {
        let h_a = sample_channel(ChannelModel::Rayleigh, 2, 2, &mut r);
        let h_b = sample_channel(ChannelModel::Rayleigh, 2, 2, &mut r);
        assert!(selector.select(&h_a, &h_b, Shortlist::All).unwrap().d_min > 0.0);
    }
}

fn bpsk_config(scheme: Scheme) -> SimConfig {
    let mut cfg = SimConfig::new(bpsk(), SystemDims::new(2, 2, 2).unwrap(), scheme);
    cfg.snr_db = vec![5.0, 15.0];
    cfg.stop = StopRule {
        min_trials: 2_000,
        min_errors: 50,
        max_trials: 20_000,
    };
    cfg.seed = 7;
    cfg
}

#[test]
fn same_seed_same_records() {
    let lib = library(bpsk(), 2);
    for scheme in [Scheme::Adaptive, Scheme::FixedXor] {
        let cfg = bpsk_config(scheme);
        let a = run_sim(&cfg, Some(&lib)).unwrap();
        let b = run_sim(&cfg, Some(&lib)).unwrap();
        assert_eq!(write_csv(&a), write_csv(&b));
        let seq = SimConfig {
            exec: Execution::Sequential,
            ..cfg.clone()
        };
        assert_eq!(run_sim(&seq, Some(&lib)).unwrap(), a);
        assert!(a[0].ber > a[1].ber);
        assert!(a
            .iter()
            .all(|r| r.trials >= 2_000 && r.trials % 2048 == 0 || r.trials == 20_000));
    }
}

#[test]
fn high_snr_is_error_free() {
    let lib = library(bpsk(), 2);
    let mut cfg = bpsk_config(Scheme::Adaptive);
    cfg.snr_db = vec![60.0];
    cfg.stop = StopRule {
        min_trials: 20_000,
        min_errors: 1,
        max_trials: 20_000,
    };
    let rec = &run_sim(&cfg, Some(&lib)).unwrap()[0];
    assert_eq!(rec.bit_errors, 0);
    assert_eq!(rec.bits, 20_000 * 4);
}

#[test]
fn config_errors() {
    let cfg = bpsk_config(Scheme::Adaptive);
    assert!(matches!(run_sim(&cfg, None), Err(SimError::MissingLibrary)));
    let other = library(bpsk(), 1);
    assert!(matches!(
        run_sim(&cfg, Some(&other)),
        Err(SimError::LibraryMismatch { .. })
    ));
    let empty = SimConfig {
        snr_db: vec![],
        ..bpsk_config(Scheme::FixedXor)
    };
    assert!(matches!(run_sim(&empty, None), Err(SimError::Snr(_))));
}

#[test]
fn snr_ranges() {
    assert_eq!(
        parse_snr_range("5:5:35").unwrap(),
        vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0]
    );
    assert_eq!(parse_snr_range("12").unwrap(), vec![12.0]);
    assert_eq!(parse_snr_range("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
    assert!(parse_snr_range("5:0:10").is_err());
    assert!(parse_snr_range("10:1:5").is_err());
    assert!(parse_snr_range("a:b").is_err());
}

#[test]
fn schemes_parse() {
    assert_eq!("adaptive".parse::<Scheme>().unwrap(), Scheme::Adaptive);
    assert_eq!("xor".parse::<Scheme>().unwrap(), Scheme::FixedXor);
    assert!("best".parse::<Scheme>().is_err());
    assert_eq!("all".parse::<Shortlist>().unwrap(), Shortlist::All);
    assert_eq!("8".parse::<Shortlist>().unwrap(), Shortlist::Nearest(8));
    assert!("0".parse::<Shortlist>().is_err());
}

#[test]
fn rectangular_xor_clustering() {
    let d = SystemDims::new(1, 2, 1).unwrap();
    let rect = xor_clustering(bpsk(), &d).unwrap();
    assert_eq!((rect.rows(), rect.cols()), (2, 4));
}
