use rvb_core::dmrm::{
    column_pair_sites, pair_correlations, rho2_columns, rho2_imperfect, rho2_perfect, DmrmState,
    DEFAULT_ROW_WIDTH_CAP,
};
use rvb_core::ggm::{ggm_exact, ggm_restricted, Family, LatticeState};
use rvb_core::statevec::{build_rvb, partial_trace};
use rvb_core::LatticeSpec;

fn check_columns(spec: LatticeSpec, left: usize) {
    let psi = build_rvb(&spec).unwrap();
    let brute = partial_trace(&psi, &column_pair_sites(&spec, left)).unwrap();
    let fast = rho2_columns(&spec, left, 5).unwrap();
    let d = fast.trace_distance(&brute).unwrap();
    assert!(d < 1e-9, "{spec} left={left}: trace distance {d:e}");
}

#[test]
fn periodic_column_pairs_match_state_vector() {
    for (m, mp) in [(4, 2), (4, 3), (4, 4), (6, 3)] {
        let spec = LatticeSpec::periodic(m, mp).unwrap();
        for left in 0..m {
            check_columns(spec, left);
        }
    }
}

#[test]
fn open_column_pairs_match_state_vector() {
    for (m, mp) in [(3, 2), (4, 3), (4, 4), (5, 4), (6, 3)] {
        let spec = LatticeSpec::open(m, mp).unwrap();
        for left in 0..m - 1 {
            check_columns(spec, left);
        }
    }
}

#[test]
fn perfect_and_imperfect_entry_points() {
    let p = rho2_perfect(4, 4).unwrap();
    let spec = LatticeSpec::periodic(4, 4).unwrap();
    let brute = partial_trace(&build_rvb(&spec).unwrap(), &column_pair_sites(&spec, 2)).unwrap();
    assert!(p.trace_distance(&brute).unwrap() < 1e-9);
    assert!(rho2_imperfect(4, 4).is_err());
    assert!(rho2_perfect(4, 3).is_err());
    let q = rho2_imperfect(4, 3).unwrap();
    assert!((q.trace() - 1.0).abs() < 1e-12);
}

#[test]
fn pair_correlations_match_state_vector() {
    let specs = [
        LatticeSpec::open(2, 3).unwrap(),
        LatticeSpec::open(3, 4).unwrap(),
        LatticeSpec::open(4, 4).unwrap(),
        LatticeSpec::periodic(4, 3).unwrap(),
        LatticeSpec::periodic(4, 4).unwrap(),
        LatticeSpec::periodic(6, 3).unwrap(),
        LatticeSpec::periodic(8, 2).unwrap(),
        LatticeSpec::open(8, 2).unwrap(),
        LatticeSpec::open(5, 4).unwrap(),
    ];
    for spec in specs {
        let psi = build_rvb(&spec).unwrap();
        let pc = pair_correlations(&spec, DEFAULT_ROW_WIDTH_CAP).unwrap();
        let n = spec.num_sites();
        for i in 0..n {
            for j in i + 1..n {
                let rho = partial_trace(&psi, &[i, j]).unwrap();
                let mx = rho.matrix();
                // ⟨σzσz⟩ from the diagonal: ↑↑ and ↓↓ count +1.
                let c = (mx[(0, 0)] + mx[(3, 3)] - mx[(1, 1)] - mx[(2, 2)]).re;
                assert!((pc.zz(i, j) - c).abs() < 1e-10, "{spec} ({i},{j})");
                let l = rho.lambda_sq_max().unwrap();
                assert!((pc.pair_lambda_sq(i, j) - l).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn restricted_ggm_agrees_with_state_vector() {
    for spec in [
        LatticeSpec::periodic(4, 3).unwrap(),
        LatticeSpec::periodic(4, 4).unwrap(),
        LatticeSpec::open(4, 4).unwrap(),
    ] {
        let psi = build_rvb(&spec).unwrap();
        let brute = ggm_restricted(&LatticeState { spec, state: &psi }, &Family::ALL).unwrap();
        let src = DmrmState::new(spec).unwrap();
        let fast = ggm_restricted(&src, &src.supported_families()).unwrap();
        assert!((brute.value - fast.value).abs() < 1e-10, "{spec}");
        assert_eq!(brute.achieving_partition, fast.achieving_partition);
        assert_eq!(brute.partitions_checked, fast.partitions_checked);
    }
}

#[test]
fn restricted_search_finds_the_exhaustive_maximum() {
    let specs = [
        LatticeSpec::periodic(4, 2).unwrap(),
        LatticeSpec::periodic(4, 3).unwrap(),
        LatticeSpec::periodic(6, 2).unwrap(),
        LatticeSpec::open(2, 5).unwrap(),
        LatticeSpec::open(3, 4).unwrap(),
        LatticeSpec::open(4, 3).unwrap(),
        LatticeSpec::open(6, 2).unwrap(),
    ];
    for spec in specs {
        let psi = build_rvb(&spec).unwrap();
        let exact = ggm_exact(&psi).unwrap();
        let src = DmrmState::new(spec).unwrap();
        let fast = ggm_restricted(&src, &src.supported_families()).unwrap();
        assert!((exact.value - fast.value).abs() < 1e-10, "{spec}");
    }
}

#[test]
fn row_blocks_match_state_vector() {
    for spec in [
        LatticeSpec::periodic(4, 3).unwrap(),
        LatticeSpec::open(3, 4).unwrap(),
        LatticeSpec::open(7, 2).unwrap(),
        LatticeSpec::periodic(8, 2).unwrap(),
    ] {
        let psi = build_rvb(&spec).unwrap();
        let pc = pair_correlations(&spec, DEFAULT_ROW_WIDTH_CAP).unwrap();
        for r in 1..spec.m_prime {
            let sites = spec.row_block_sites(r);
            let want = partial_trace(&psi, &sites).unwrap().lambda_sq_max().unwrap();
            let got = pc.row_block_lambda_sq(r).unwrap();
            assert!((want - got).abs() < 1e-10, "{spec} r={r}: {want} vs {got}");
        }
        assert!(pc.row_block_lambda_sq(0).is_none());
        assert!(pc.row_block_lambda_sq(spec.m_prime).is_none());
    }
}
