use std::collections::BTreeSet;

use plnc_core::fadespace::FadeCatalog;
use plnc_core::latin::{removed_keys, verify_fixture_set, verify_removal, Isotopy};
use plnc_core::maplib::{generate_library, parse_library, write_library, GenOptions};
use plnc_core::{Execution, PskParams, SubspaceKey, SystemDims};

fn qpsk() -> PskParams {
    PskParams::new(2).unwrap()
}

#[test]
fn qpsk_two_by_two_library_is_complete() {
    let p = qpsk();
    let lib = generate_library(p, &SystemDims::square(2).unwrap(), &GenOptions::default()).unwrap();
    assert_eq!(lib.coverage().len(), 1456);
    for (key, &id) in lib.coverage() {
        assert!(
            verify_removal(p, lib.maps()[id].rect(), key).unwrap(),
            "{key}"
        );
    }
    let widest = lib.maps().iter().map(|m| m.t()).max().unwrap();
    assert!(lib.maps().iter().all(|m| m.t() >= 16));
    assert!(widest <= 18, "{widest}");
    let back = parse_library(&write_library(&lib)).unwrap();
    assert_eq!(back.coverage(), lib.coverage());
}

/// Closing the ten fixture squares under the isotopy group leaves one
/// orbit of k=3 keys uncovered: a lone magnitude-1 entry opposite a
/// magnitude-2 pair.
#[test]
fn fixture_orbits_miss_one_class() {
    let p = qpsk();
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/generators");
    let report = verify_fixture_set(dir, Some(4)).unwrap();
    assert!(report.passed());
    let group = Isotopy::group(p, 2);
    let mut covered = BTreeSet::new();
    for check in &report.checks {
        let keys = removed_keys(p, &check.fixture.rect).unwrap();
        for g in &group {
            for k in &keys {
                covered.insert(g.apply_key(p, k).unwrap());
            }
        }
    }
    let cat = FadeCatalog::build(p, SystemDims::square(2).unwrap(), Execution::default()).unwrap();
    let missing: Vec<&SubspaceKey> = cat
        .removable_ids()
        .map(|id| &cat.keys()[id])
        .filter(|k| !covered.contains(*k))
        .collect();
    assert_eq!(covered.len(), 1392);
    assert_eq!(missing.len(), 64);
    for key in missing {
        assert_eq!(key.support_len(), 3, "{key}");
        let mags: Vec<usize> = key
            .representative(p, 4)
            .unwrap()
            .iter()
            .filter(|d| !d.is_zero())
            .map(|d| d.mag() as usize)
            .collect();
        let mut sorted = mags.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 2], "{key}");
        // the lone entry sits alone in its block
        let positions: Vec<usize> = key.positions().collect();
        let lone = positions
            .iter()
            .zip(&mags)
            .find(|(_, &m)| m == 1)
            .map(|(&i, _)| i)
            .unwrap();
        let same_block = positions.iter().filter(|&&i| (i < 2) == (lone < 2)).count();
        assert_eq!(same_block, 1, "{key}");
    }
}
