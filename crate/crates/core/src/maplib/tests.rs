use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::latin::{min_cluster_distance, verify_removal};

fn bpsk() -> PskParams {
    PskParams::new(1).unwrap()
}

fn qpsk() -> PskParams {
    PskParams::new(2).unwrap()
}

fn seq() -> GenOptions {
    GenOptions {
        exec: Execution::Sequential,
        ..GenOptions::default()
    }
}

fn lib(p: PskParams, na: usize, nb: usize) -> MapLibrary {
    generate_library(p, &SystemDims::new(na, nb, 1).unwrap(), &seq()).unwrap()
}

fn random_h(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

fn assert_complete(lib: &MapLibrary) {
    let cat = lib.catalog();
    let removable: Vec<&SubspaceKey> = cat.removable_ids().map(|id| &cat.keys()[id]).collect();
    assert_eq!(lib.coverage().len(), removable.len());
    for key in removable {
        let id = lib
            .map_for(key)
            .unwrap_or_else(|| panic!("{key} uncovered"));
        assert!(
            verify_removal(lib.params(), lib.maps()[id].rect(), key).unwrap(),
            "{key}"
        );
    }
}

#[test]
fn bpsk_single_antenna_is_xor_only() {
    let l = lib(bpsk(), 1, 1);
    assert_eq!(l.len(), 1);
    assert_eq!(l.maps()[0].rect(), &xor_map(bpsk(), 1).unwrap().canonical());
    assert_complete(&l);
}

#[test]
fn bpsk_two_by_two_covers_all_32() {
    let l = lib(bpsk(), 2, 2);
    assert_eq!(l.coverage().len(), 32);
    assert!(l.len() <= 32);
    assert_complete(&l);
    let xor = l.find(&xor_map(bpsk(), 2).unwrap()).expect("xor kept");
    assert_eq!(l.maps()[xor].removed().len(), 12);
    assert!(l.maps().iter().all(|m| m.t() == 4));
}

#[test]
fn removals_match_verification() {
    let l = lib(bpsk(), 2, 2);
    let cat = l.catalog();
    for map in l.maps() {
        for id in cat.removable_ids() {
            let key = &cat.keys()[id];
            let listed = map.removed().contains(key);
            assert_eq!(
                listed,
                verify_removal(bpsk(), map.rect(), key).unwrap(),
                "{key}"
            );
        }
    }
}

#[test]
fn build_is_deterministic_across_modes() {
    let a = lib(bpsk(), 2, 2);
    let par = GenOptions {
        exec: Execution::Parallel,
        ..GenOptions::default()
    };
    let b = generate_library(bpsk(), &SystemDims::square(2).unwrap(), &par).unwrap();
    assert_eq!(write_library(&a), write_library(&b));
}

#[test]
fn qpsk_single_antenna() {
    let l = lib(qpsk(), 1, 1);
    assert_eq!(l.coverage().len(), 12);
    assert_complete(&l);
}

#[test]
fn rectangles_come_from_extraction() {
    for (na, nb) in [(1, 2), (2, 1)] {
        let l = lib(bpsk(), na, nb);
        assert_complete(&l);
        assert!(l.maps().iter().all(|m| m.origin() == Origin::Extraction));
    }
    assert_complete(&lib(qpsk(), 1, 2));
}

#[test]
fn size_guard() {
    let d = SystemDims::new(2, 3, 1).unwrap();
    assert!(matches!(
        generate_library(bpsk(), &d, &seq()),
        Err(MapError::TooLarge { na: 2, nb: 3 })
    ));
}

#[test]
fn xor_separates_unmerged_classes() {
    let p = bpsk();
    let sep = separated_differences(p, &xor_map(p, 1).unwrap()).unwrap();
    // BPSK differences are 2j and -2j
    let two = DiffPoint::new(p, 1, 1).unwrap();
    let minus_two = DiffPoint::new(p, 1, 3).unwrap();
    assert!(!sep.contains(&vec![two, minus_two]));
    assert!(!sep.contains(&vec![two, two]));
    assert!(sep.contains(&vec![two, DiffPoint::ZERO]));
    assert!(sep.contains(&vec![DiffPoint::ZERO, minus_two]));
}

#[test]
fn one_sided_differences_always_separated() {
    let l = lib(bpsk(), 2, 2);
    let codec = l.catalog().codec();
    for id in 0..l.len() {
        let sep: Vec<usize> = l.separated(id).collect();
        for v in 1..codec.count() {
            let dx = codec.decode(v);
            if dx[..2].iter().all(|p| p.is_zero()) || dx[2..].iter().all(|p| p.is_zero()) {
                assert!(sep.contains(&v));
            }
        }
    }
}

#[test]
fn norms_match_direct_products() {
    let l = lib(qpsk(), 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_h(&mut rng, 2, 2);
    let norms = l.norms(&h).unwrap();
    let codec = l.catalog().codec();
    for (v, n) in norms.iter().enumerate() {
        let dx: Vec<Complex64> = codec
            .decode(v)
            .iter()
            .map(|&p| qpsk().materialize(p))
            .collect();
        let direct = crate::latin::apply(&h, &dx);
        assert!((n - direct).abs() < 1e-12);
    }
}

#[test]
fn walk_matches_naive_distance() {
    for (p, n) in [(bpsk(), 2), (qpsk(), 1)] {
        let l = lib(p, n, n);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let h_a = random_h(&mut rng, 2, n);
            let h_b = random_h(&mut rng, 2, n);
            let norms = l.norms(&crate::latin::stack(&h_a, &h_b)).unwrap();
            let short = NormOrder::new(&norms, 4);
            let full = NormOrder::full(&norms);
            for id in 0..l.len() {
                let naive = min_cluster_distance(p, l.maps()[id].rect(), &h_a, &h_b).unwrap();
                assert!((short.d_min(&l, id, &norms) - naive).abs() < 1e-9);
                assert!((full.d_min(&l, id, &norms) - naive).abs() < 1e-9);
                assert!((l.d_min_scan(id, &norms) - naive).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn save_load_round_trip() {
    let l = lib(bpsk(), 2, 2);
    let text = write_library(&l);
    let back = parse_library(&text).unwrap();
    assert_eq!(back.len(), l.len());
    for (a, b) in l.maps().iter().zip(back.maps()) {
        assert!(a.rect().same_partition(b.rect()));
        assert_eq!(a.removed(), b.removed());
    }
    assert_eq!(back.coverage(), l.coverage());
    assert_eq!(write_library(&back), text);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bpsk22.maplib");
    save(&l, &path).unwrap();
    assert_eq!(write_library(&load(&path).unwrap()), text);
}

#[test]
fn corrupted_grid_line_reports_row() {
    let text = write_library(&lib(bpsk(), 2, 2));
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // line 5 is the second grid row of map 0
    lines[4] = lines[3].clone();
    let bad = lines.join("\n") + "\n";
    match parse_library(&bad) {
        Err(MapError::Format { line, .. }) => assert_eq!(line, 5),
        other => panic!("unexpected {other:?}"),
    }
    lines[4] = "0 1 x 3".into();
    assert!(matches!(
        parse_library(&(lines.join("\n") + "\n")),
        Err(MapError::Format { line: 5, .. })
    ));
}

#[test]
fn checksum_and_coverage_are_checked() {
    let text = write_library(&lib(bpsk(), 2, 2));
    let tampered = text.replacen("MAP id=0 t=4", "MAP id=0 t=5", 1);
    assert!(matches!(
        parse_library(&tampered),
        Err(MapError::Checksum { .. })
    ));

    // drop the last map and re-seal: some key loses its map
    let body: Vec<&str> = text.lines().collect();
    let cut = body.len() - 1 - 5;
    let mut partial = body[..cut].join("\n") + "\n";
    partial.push_str(&format!(
        "CRC32={:08x}\n",
        crc32fast::hash(partial.as_bytes())
    ));
    assert!(matches!(
        parse_library(&partial),
        Err(MapError::Uncovered(_))
    ));
}
