//! Reduced states of RVB lattices too large for the state vector.
//!
//! [`column`] contracts the double layer column by column and returns exact
//! two-column reduced states. [`rows`] contracts row by row and returns every
//! two-site correlation. [`recursion`] holds the column-state algebra of the
//! strip and brick recursions.

pub mod column;
mod profile;
pub mod recursion;
pub mod rows;

use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ggm::{family_partitions, ggm_restricted, Bipartition, Family, GgmResult, ReducedStates};
use crate::lattice::{Boundary, LatticeSpec};
use crate::statevec::DensityMatrix;

pub use column::{
    column_pair_sites, rho2_columns, rho2_imperfect, rho2_perfect, ColumnTransfer,
    DEFAULT_TWO_COLUMN_CAP,
};
pub use recursion::{
    brick_state, build_base_states, derive_alpha_basis, recursion_state, BaseStates, ChiTable,
    ColumnLabel, ColumnState, RecursionTable, TableDump,
};
pub use rows::{pair_correlations, PairCorrelations, DEFAULT_ROW_WIDTH_CAP};

/// Reduced states of one RVB lattice served from the transfer engines.
///
/// Single sites are maximally mixed. Site pairs and row blocks come from the
/// row engine. Single columns and adjacent column pairs come from the column
/// engine when the column height is within `column_cap`. Column blocks of an
/// open lattice are the row blocks of its transpose.
pub struct DmrmState {
    spec: LatticeSpec,
    row_cap: usize,
    column_cap: usize,
    pairs: PairCorrelations,
    transposed: RefCell<Option<PairCorrelations>>,
    column_rho: RefCell<BTreeMap<usize, DensityMatrix>>,
    values: RefCell<BTreeMap<Bipartition, f64>>,
}

impl DmrmState {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        Self::with_caps(spec, DEFAULT_ROW_WIDTH_CAP, DEFAULT_TWO_COLUMN_CAP)
    }

    pub fn with_caps(spec: LatticeSpec, row_cap: usize, column_cap: usize) -> Result<Self> {
        let pairs = pair_correlations(&spec, row_cap)?;
        Ok(DmrmState {
            spec,
            row_cap,
            column_cap,
            pairs,
            transposed: RefCell::new(None),
            column_rho: RefCell::new(BTreeMap::new()),
            values: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn pair_correlations(&self) -> &PairCorrelations {
        &self.pairs
    }

    /// Families this handle can serve for its lattice.
    pub fn supported_families(&self) -> Vec<Family> {
        let mut f = vec![Family::SingleSite, Family::SitePairs];
        if self.spec.m_prime <= self.column_cap {
            if self.spec.m > 1 {
                f.push(Family::SingleColumn);
            }
            if self.spec.m > 2 {
                f.push(Family::AdjacentColumnPairs);
            }
        }
        if self.spec.m_prime > 1 {
            f.push(Family::RowBlocks);
        }
        if self.spec.m > 1 && self.spec.m_prime <= self.row_cap && self.spec.transposed().is_some() {
            f.push(Family::ColumnBlocks);
        }
        f
    }

    /// Reduced state of columns `(left, left + 1)`. Periodic lattices are
    /// translation invariant up to local sign flips, so one pair serves all.
    fn column_pair(&self, left: usize) -> Result<DensityMatrix> {
        let key = match self.spec.boundary {
            Boundary::PeriodicHorizontal => 0,
            Boundary::OpenBoth => left,
        };
        if let Some(r) = self.column_rho.borrow().get(&key) {
            return Ok(r.clone());
        }
        let r = rho2_columns(&self.spec, key, self.column_cap)?;
        self.column_rho.borrow_mut().insert(key, r.clone());
        Ok(r)
    }

    fn value_of(&self, family: Family, side: &[usize]) -> Result<f64> {
        let h = self.spec.m_prime;
        match family {
            Family::SingleSite => Ok(0.5),
            Family::SitePairs => Ok(self.pairs.pair_lambda_sq(side[0], side[1])),
            Family::SingleColumn => {
                let col = side[0] / h;
                let (left, keep): (usize, Vec<usize>) = if col + 1 < self.spec.m {
                    (col, (0..h).collect())
                } else {
                    (col - 1, (h..2 * h).collect())
                };
                self.column_pair(left)?.marginal(&keep)?.lambda_sq_max()
            }
            Family::AdjacentColumnPairs => self.column_pair(side[0] / h)?.lambda_sq_max(),
            Family::RowBlocks => self.pairs.row_block_lambda_sq(side.len() / self.spec.m).ok_or_else(
                || Error::InvalidSites("row block out of range".into()),
            ),
            Family::ColumnBlocks => {
                if self.transposed.borrow().is_none() {
                    let t = self
                        .spec
                        .transposed()
                        .ok_or_else(|| Error::UnsupportedFamily("column blocks".into()))?;
                    *self.transposed.borrow_mut() = Some(pair_correlations(&t, self.row_cap)?);
                }
                let t = self.transposed.borrow();
                t.as_ref()
                    .and_then(|pc| pc.row_block_lambda_sq(side.len() / h))
                    .ok_or_else(|| Error::InvalidSites("column block out of range".into()))
            }
        }
    }

    fn sides(&self, family: Family) -> Vec<Vec<usize>> {
        let (n, m, h) = (self.spec.num_sites(), self.spec.m, self.spec.m_prime);
        match family {
            Family::SingleSite => (0..n).map(|s| vec![s]).collect(),
            Family::SitePairs => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| vec![i, j]))
                .collect(),
            Family::SingleColumn => (0..m).map(|c| self.spec.column_sites(c)).collect(),
            Family::AdjacentColumnPairs => {
                let last = match self.spec.boundary {
                    Boundary::OpenBoth => m - 1,
                    Boundary::PeriodicHorizontal => m,
                };
                (0..last)
                    .map(|c| {
                        let mut s = self.spec.column_sites(c);
                        s.extend(self.spec.column_sites((c + 1) % m));
                        s
                    })
                    .collect()
            }
            Family::RowBlocks => (1..h).map(|r| self.spec.row_block_sites(r)).collect(),
            Family::ColumnBlocks => (1..m).map(|c| self.spec.column_block_sites(c)).collect(),
        }
    }
}

impl ReducedStates for DmrmState {
    fn num_sites(&self) -> usize {
        self.spec.num_sites()
    }

    fn partitions(&self, family: Family) -> Result<Vec<Bipartition>> {
        if !self.supported_families().contains(&family) {
            return Err(Error::UnsupportedFamily(format!(
                "{} on {}",
                family.name(),
                self.spec
            )));
        }
        let n = self.spec.num_sites();
        for side in self.sides(family) {
            if side.len() >= n {
                continue;
            }
            let part = Bipartition::canonical(n, &side)?;
            if self.values.borrow().contains_key(&part) {
                continue;
            }
            let v = self.value_of(family, &side)?;
            self.values.borrow_mut().insert(part, v);
        }
        family_partitions(&self.spec, family)
    }

    fn lambda_sq(&self, part: &Bipartition) -> Result<f64> {
        self.values
            .borrow()
            .get(part)
            .copied()
            .ok_or_else(|| Error::InvalidSites(format!("partition {part} was not prepared")))
    }
}

/// Restricted GGM of the RVB state on `spec` from the transfer engines.
pub fn ggm_from_dmrm(spec: &LatticeSpec, families: &[Family]) -> Result<GgmResult> {
    let state = DmrmState::new(*spec)?;
    ggm_restricted(&state, families)
}
