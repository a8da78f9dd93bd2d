use std::f64::consts::PI;

use proptest::prelude::*;
use rvb_core::lattice::{covering_count_transfer, enumerate_coverings, serialize_coverings};
use rvb_core::{Boundary, Error, LatticeSpec};

/// Closed-form count of dimer coverings of an open `a × b` grid.
fn kasteleyn(a: usize, b: usize) -> f64 {
    let mut p = 1.0;
    for j in 1..=a.div_ceil(2) {
        for k in 1..=b.div_ceil(2) {
            let cj = (PI * j as f64 / (a as f64 + 1.0)).cos();
            let ck = (PI * k as f64 / (b as f64 + 1.0)).cos();
            p *= 4.0 * cj * cj + 4.0 * ck * ck;
        }
    }
    p
}

/// Perfect matchings by trying every subset of `n/2` edges.
fn brute_matchings(n: usize, edges: &[(usize, usize)]) -> usize {
    fn rec(n: usize, edges: &[(usize, usize)], start: usize, used: u64, left: usize) -> usize {
        if left == 0 {
            return usize::from(used.count_ones() as usize == n);
        }
        let mut total = 0;
        for e in start..edges.len() {
            let (a, b) = edges[e];
            if used >> a & 1 == 0 && used >> b & 1 == 0 {
                total += rec(n, edges, e + 1, used | 1 << a | 1 << b, left - 1);
            }
        }
        total
    }
    rec(n, edges, 0, 0, n / 2)
}

#[test]
fn open_counts_match_closed_form() {
    for a in 1..=6 {
        for b in 1..=6 {
            if a * b % 2 == 1 {
                continue;
            }
            let spec = LatticeSpec::open(a, b).unwrap();
            let want = kasteleyn(a, b).round() as u64;
            assert_eq!(covering_count_transfer(&spec).unwrap(), want, "{a}x{b}");
            if a * b <= 24 {
                assert_eq!(enumerate_coverings(&spec).unwrap().len() as u64, want, "{a}x{b}");
            }
        }
    }
    assert_eq!(covering_count_transfer(&LatticeSpec::open(8, 8).unwrap()).unwrap(), 12_988_816);
}

#[test]
fn counts_match_edge_subsets() {
    let specs = [
        LatticeSpec::open(3, 4).unwrap(),
        LatticeSpec::open(4, 4).unwrap(),
        LatticeSpec::periodic(4, 2).unwrap(),
        LatticeSpec::periodic(4, 3).unwrap(),
        LatticeSpec::periodic(4, 4).unwrap(),
        LatticeSpec::periodic(6, 2).unwrap(),
        LatticeSpec::periodic(6, 3).unwrap(),
    ];
    for spec in specs {
        let want = brute_matchings(spec.num_sites(), &spec.edges());
        assert_eq!(enumerate_coverings(&spec).unwrap().len(), want, "{spec}");
        assert_eq!(covering_count_transfer(&spec).unwrap() as usize, want, "{spec}");
    }
}

#[test]
fn transfer_agrees_with_enumeration_up_to_36_sites() {
    for boundary in [Boundary::OpenBoth, Boundary::PeriodicHorizontal] {
        for m in 1..=6 {
            for mp in 1..=6 {
                let Ok(spec) = LatticeSpec::new(m, mp, boundary) else {
                    continue;
                };
                let listed = enumerate_coverings(&spec).unwrap().len() as u64;
                assert_eq!(covering_count_transfer(&spec).unwrap(), listed, "{spec}");
            }
        }
    }
}

#[test]
fn rejected_geometries() {
    assert!(matches!(LatticeSpec::open(3, 3), Err(Error::InvalidLattice(_))));
    assert!(LatticeSpec::periodic(2, 4).is_err());
    assert!(LatticeSpec::periodic(3, 4).is_err());
    assert!(LatticeSpec::open(0, 4).is_err());
    assert!(LatticeSpec::open(16, 17).is_err());
    let wide = LatticeSpec::open(9, 8).unwrap();
    assert!(matches!(enumerate_coverings(&wide), Err(Error::InvalidLattice(_))));
    assert!(matches!(
        covering_count_transfer(&LatticeSpec::open(2, 22).unwrap()),
        Err(Error::HeightTooLarge { .. })
    ));
}

#[test]
fn serialization_lists_every_covering() {
    let spec = LatticeSpec::periodic(4, 2).unwrap();
    let cov = enumerate_coverings(&spec).unwrap();
    let text = serialize_coverings(&spec, &cov);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# lattice m=4 mp=2 bc=ph"));
    let rest: Vec<&str> = lines.collect();
    assert_eq!(rest.len(), cov.len());
    for line in rest {
        assert_eq!(line.matches(")-(").count(), 4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn coverings_are_perfect_matchings(m in 1usize..5, mp in 1usize..5, ph in any::<bool>()) {
        let boundary = if ph { Boundary::PeriodicHorizontal } else { Boundary::OpenBoth };
        let Ok(spec) = LatticeSpec::new(m, mp, boundary) else {
            return Ok(());
        };
        let edges = spec.edges();
        for c in enumerate_coverings(&spec).unwrap() {
            let mut seen = vec![false; spec.num_sites()];
            for b in &c.bonds {
                prop_assert!(spec.sublattice(b.a) != spec.sublattice(b.b));
                let key = (b.a.min(b.b), b.a.max(b.b));
                prop_assert!(edges.contains(&key));
                prop_assert!(!seen[b.a] && !seen[b.b]);
                seen[b.a] = true;
                seen[b.b] = true;
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
