//! Generalized geometric measure, genuine-entanglement certification and
//! strong-subadditivity checks.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec};
use crate::statevec::{partial_trace, partial_trace_with_cap, von_neumann_entropy, PureState};

/// Default limit on the number of sites for exhaustive bipartition searches.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 16;

/// Certification threshold on `1 − Tr ρ²`.
pub const CERTIFY_TOL: f64 = 1e-10;

/// Ties in `λ²` closer than this keep the earlier canonical partition.
pub const TIE_TOL: f64 = 1e-12;

/// One side `K` of a split `K : L`, in canonical form.
///
/// The canonical side is the smaller one; for equal halves it is the side
/// holding site 0. Partitions order by size, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    pub part_k: Vec<usize>,
}

impl Bipartition {
    pub fn canonical(num_sites: usize, sites: &[usize]) -> Result<Self> {
        let mut k: Vec<usize> = sites.to_vec();
        k.sort_unstable();
        k.dedup();
        if k.len() != sites.len() || k.iter().any(|&s| s >= num_sites) {
            return Err(Error::InvalidSites("bad bipartition side".into()));
        }
        if k.is_empty() || k.len() == num_sites {
            return Err(Error::InvalidSites("bipartition side must be proper".into()));
        }
        let flip = 2 * k.len() > num_sites || (2 * k.len() == num_sites && k[0] != 0);
        if flip {
            k = (0..num_sites).filter(|s| k.binary_search(s).is_err()).collect();
        }
        Ok(Bipartition { part_k: k })
    }

    fn order_key(&self) -> (usize, &[usize]) {
        (self.part_k.len(), &self.part_k)
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.part_k.iter().map(|x| x.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    SingleSite,
    SitePairs,
    SingleColumn,
    AdjacentColumnPairs,
    /// The top `r` rows, `0 < r < m_prime`.
    RowBlocks,
    /// The left `c` columns, `0 < c < m`; open lattices only.
    ColumnBlocks,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::SingleSite,
        Family::SitePairs,
        Family::SingleColumn,
        Family::AdjacentColumnPairs,
        Family::RowBlocks,
        Family::ColumnBlocks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SingleSite => "single_site",
            Family::SitePairs => "site_pairs",
            Family::SingleColumn => "single_column",
            Family::AdjacentColumnPairs => "adjacent_column_pairs",
            Family::RowBlocks => "row_blocks",
            Family::ColumnBlocks => "column_blocks",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    Exhaustive,
    /// Only the listed families; the reported G is an upper bound.
    Restricted(Vec<Family>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GgmResult {
    pub value: f64,
    pub lambda_sq_max: f64,
    pub achieving_partition: Bipartition,
    /// Family the achieving partition came from, for restricted searches.
    pub achieving_family: Option<Family>,
    pub partitions_searched: SearchMode,
    pub partitions_checked: usize,
}

/// Source of reduced states for a restricted search.
pub trait ReducedStates {
    fn num_sites(&self) -> usize;

    /// Candidate partitions of one family, canonical and ordered.
    fn partitions(&self, family: Family) -> Result<Vec<Bipartition>>;

    /// Largest eigenvalue of the reduced state on `part.part_k`.
    fn lambda_sq(&self, part: &Bipartition) -> Result<f64>;
}

/// Candidate partitions of `family` for a lattice geometry.
pub fn family_partitions(spec: &LatticeSpec, family: Family) -> Result<Vec<Bipartition>> {
    let n = spec.num_sites();
    let mut sides: Vec<Vec<usize>> = Vec::new();
    match family {
        Family::SingleSite => sides.extend((0..n).map(|s| vec![s])),
        Family::SitePairs => {
            for i in 0..n {
                for j in i + 1..n {
                    sides.push(vec![i, j]);
                }
            }
        }
        Family::SingleColumn => {
            if spec.m > 1 {
                sides.extend((0..spec.m).map(|c| spec.column_sites(c)));
            }
        }
        Family::AdjacentColumnPairs => {
            if spec.m > 2 {
                let last = match spec.boundary {
                    Boundary::OpenBoth => spec.m - 1,
                    Boundary::PeriodicHorizontal => spec.m,
                };
                for c in 0..last {
                    let mut side = spec.column_sites(c);
                    side.extend(spec.column_sites((c + 1) % spec.m));
                    sides.push(side);
                }
            }
        }
        Family::RowBlocks => sides.extend((1..spec.m_prime).map(|r| spec.row_block_sites(r))),
        Family::ColumnBlocks => {
            if spec.boundary == Boundary::OpenBoth {
                sides.extend((1..spec.m).map(|c| spec.column_block_sites(c)));
            }
        }
    }
    canonical_set(n, &sides)
}

fn canonical_set(n: usize, sides: &[Vec<usize>]) -> Result<Vec<Bipartition>> {
    let mut parts = Vec::with_capacity(sides.len());
    for s in sides {
        if s.len() < n {
            parts.push(Bipartition::canonical(n, s)?);
        }
    }
    parts.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
    parts.dedup();
    Ok(parts)
}

/// A pure state paired with the lattice it lives on.
pub struct LatticeState<'a> {
    pub spec: LatticeSpec,
    pub state: &'a PureState,
}

impl ReducedStates for LatticeState<'_> {
    fn num_sites(&self) -> usize {
        self.state.num_sites()
    }

    fn partitions(&self, family: Family) -> Result<Vec<Bipartition>> {
        family_partitions(&self.spec, family)
    }

    fn lambda_sq(&self, part: &Bipartition) -> Result<f64> {
        partial_trace(self.state, &part.part_k)?.lambda_sq_max()
    }
}

/// Every canonical bipartition of `n` sites, in canonical order.
pub fn canonical_bipartitions(n: usize) -> Vec<Bipartition> {
    let mut out = Vec::new();
    for size in 1..=n / 2 {
        let mut comb: Vec<usize> = (0..size).collect();
        loop {
            if 2 * size < n || comb[0] == 0 {
                out.push(Bipartition {
                    part_k: comb.clone(),
                });
            }
            let Some(i) = (0..size).rev().find(|&i| comb[i] != i + n - size) else {
                break;
            };
            comb[i] += 1;
            for j in i + 1..size {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }
    out
}

/// Index of the first entry within [`TIE_TOL`] of the maximum.
fn pick_max(values: &[f64]) -> Option<(usize, f64)> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .position(|&v| v >= max - TIE_TOL)
        .map(|i| (i, max))
}

/// GGM maximised over all canonical bipartitions.
pub fn ggm_exact(state: &PureState) -> Result<GgmResult> {
    ggm_exact_with_cap(state, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn ggm_exact_with_cap(state: &PureState, cap: usize) -> Result<GgmResult> {
    let n = state.num_sites();
    if n > cap {
        return Err(Error::TooLargeForExhaustive { sites: n, cap });
    }
    if n < 2 {
        return Err(Error::InvalidSites("need at least two sites".into()));
    }
    let parts = canonical_bipartitions(n);
    let mut values = Vec::with_capacity(parts.len());
    for part in &parts {
        values.push(partial_trace_with_cap(state, &part.part_k, cap)?.lambda_sq_max()?);
    }
    let (i, lambda_sq) = pick_max(&values).expect("at least one bipartition");
    Ok(GgmResult {
        value: 1.0 - lambda_sq,
        lambda_sq_max: lambda_sq,
        achieving_partition: parts[i].clone(),
        achieving_family: None,
        partitions_searched: SearchMode::Exhaustive,
        partitions_checked: parts.len(),
    })
}

/// GGM over the listed families only; an upper bound on the exhaustive value.
pub fn ggm_restricted(source: &dyn ReducedStates, families: &[Family]) -> Result<GgmResult> {
    let mut fams = families.to_vec();
    fams.sort_unstable();
    fams.dedup();
    if fams.is_empty() {
        return Err(Error::UnsupportedFamily("empty family list".into()));
    }
    let mut candidates: Vec<(Bipartition, Family)> = Vec::new();
    for &f in &fams {
        for p in source.partitions(f)? {
            candidates.push((p, f));
        }
    }
    candidates.sort_by(|a, b| a.0.order_key().cmp(&b.0.order_key()).then(a.1.cmp(&b.1)));
    candidates.dedup_by(|a, b| a.0 == b.0);
    let mut values = Vec::with_capacity(candidates.len());
    for (p, _) in &candidates {
        values.push(source.lambda_sq(p)?);
    }
    let (i, lambda_sq) = pick_max(&values)
        .ok_or_else(|| Error::UnsupportedFamily("families yield no partition".into()))?;
    Ok(GgmResult {
        value: 1.0 - lambda_sq,
        lambda_sq_max: lambda_sq,
        achieving_partition: candidates[i].0.clone(),
        achieving_family: Some(candidates[i].1),
        partitions_searched: SearchMode::Restricted(fams),
        partitions_checked: candidates.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub min_mixedness: f64,
    pub worst_partition: Vec<usize>,
    pub partitions_checked: usize,
    pub certified: bool,
}

/// Checks that no bipartition leaves a pure reduced state.
pub fn certify_genuine_entanglement(state: &PureState) -> Result<CertificationReport> {
    certify_with(state, DEFAULT_EXHAUSTIVE_CAP, CERTIFY_TOL)
}

pub fn certify_with(state: &PureState, cap: usize, tol: f64) -> Result<CertificationReport> {
    let n = state.num_sites();
    if n > cap {
        return Err(Error::TooLargeForExhaustive { sites: n, cap });
    }
    let parts = canonical_bipartitions(n);
    let mut worst: Option<(f64, &Bipartition)> = None;
    for part in &parts {
        let mixed = 1.0 - partial_trace_with_cap(state, &part.part_k, cap)?.purity();
        if worst.is_none_or(|(w, _)| mixed < w) {
            worst = Some((mixed, part));
        }
    }
    let (min_mixedness, part) =
        worst.ok_or_else(|| Error::InvalidSites("need at least two sites".into()))?;
    Ok(CertificationReport {
        min_mixedness,
        worst_partition: part.part_k.clone(),
        partitions_checked: parts.len(),
        certified: min_mixedness > tol,
    })
}

/// `S(X′∪c) + S(Y′∪c) − S(X′) − S(Y′)`; an empty `X′` or `Y′` has zero entropy.
pub fn ssa_check(state: &PureState, x_prime: &[usize], y_prime: &[usize], c: &[usize]) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::OverlappingSets);
    }
    let mut all: Vec<usize> = x_prime.iter().chain(y_prime).chain(c).copied().collect();
    let total = all.len();
    all.sort_unstable();
    all.dedup();
    if all.len() != total {
        return Err(Error::OverlappingSets);
    }
    let entropy = |sites: Vec<usize>| -> Result<f64> {
        if sites.is_empty() {
            return Ok(0.0);
        }
        if sites.len() == state.num_sites() {
            return Ok(0.0);
        }
        von_neumann_entropy(&partial_trace(state, &sites)?)
    };
    let union = |a: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = a.iter().chain(c).copied().collect();
        v.sort_unstable();
        v
    };
    Ok(entropy(union(x_prime))? + entropy(union(y_prime))?
        - entropy(x_prime.to_vec())?
        - entropy(y_prime.to_vec())?)
}

/// Random disjoint `(X′, Y′, c)` with `|c|` odd and `|X′∪c|, |Y′∪c| ≤ max_union`.
pub fn random_ssa_triple<R: Rng + ?Sized>(
    rng: &mut R,
    num_sites: usize,
    max_union: usize,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut sites: Vec<usize> = (0..num_sites).collect();
    sites.shuffle(rng);
    let max_c = max_union.min(num_sites).max(1);
    let c_len = loop {
        let l = rng.random_range(1..=max_c.min(3));
        if l % 2 == 1 {
            break l;
        }
    };
    let room = num_sites - c_len;
    let xl = rng.random_range(0..=(max_union - c_len).min(room));
    let yl = rng.random_range(0..=(max_union - c_len).min(room - xl));
    let mut take = |k: usize| -> Vec<usize> {
        let mut v: Vec<usize> = sites.drain(..k).collect();
        v.sort_unstable();
        v
    };
    let c = take(c_len);
    let x = take(xl);
    let y = take(yl);
    (x, y, c)
}
