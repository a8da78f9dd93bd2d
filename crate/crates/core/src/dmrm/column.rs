//! Exact two-column reduced density matrices by column transfer.
//!
//! The environment of a two-column block is contracted column by column as a
//! ket–bra double layer over cut profiles. Under the periodic wrap the
//! contraction runs around the ring from the block's right cut back to its
//! left cut, once for every pair of starting profiles.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::profile::{
    group_by_phys, pow3, sector_transfer, singlet_weight, Piece, ProfileSpace, Sector,
    SectorTransfer,
};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec, Parity};
use crate::statevec::DensityMatrix;

/// Default largest column height for exact two-column blocks.
pub const DEFAULT_TWO_COLUMN_CAP: usize = 5;

/// Every local configuration of a column of height `h`. Rows with
/// `(row + parity)` even are on sublattice A.
pub(crate) fn column_pieces(h: usize, parity: usize) -> Vec<Piece> {
    let mut out = Vec::new();
    column_rec(h, parity, 0, 0, 0, 0, 1.0, None, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn column_rec(
    h: usize,
    parity: usize,
    r: usize,
    vin: u32,
    vout: u32,
    phys: u32,
    amp: f64,
    pend: Option<u32>,
    out: &mut Vec<Piece>,
) {
    if r == h {
        if pend.is_none() {
            out.push(Piece {
                vin,
                vout,
                phys,
                amp,
            });
        }
        return;
    }
    let on_a = (r + parity) % 2 == 0;
    let p3 = pow3(r);
    if let Some(s) = pend {
        column_rec(h, parity, r + 1, vin, vout, phys | (1 - s) << r, amp, None, out);
        return;
    }
    for sigma in 0..2u32 {
        let w = singlet_weight(on_a, sigma);
        column_rec(
            h,
            parity,
            r + 1,
            vin + (sigma + 1) * p3,
            vout,
            phys | (1 - sigma) << r,
            amp,
            None,
            out,
        );
        column_rec(
            h,
            parity,
            r + 1,
            vin,
            vout + (sigma + 1) * p3,
            phys | sigma << r,
            amp * w,
            None,
            out,
        );
        if r + 1 < h {
            column_rec(h, parity, r + 1, vin, vout, phys | sigma << r, amp * w, Some(sigma), out);
        }
    }
}

/// Precomputed double-layer column transfers for one height.
pub struct ColumnTransfer {
    h: usize,
    space: ProfileSpace,
    pieces: [Vec<Piece>; 2],
    sectors: Vec<Sector>,
    transfer: [Vec<SectorTransfer>; 2],
}

impl ColumnTransfer {
    pub fn new(h: usize) -> Self {
        let space = ProfileSpace::new(h);
        let pieces = [column_pieces(h, 0), column_pieces(h, 1)];
        let sectors: Vec<Sector> = space.deltas().map(|d| space.sector(d)).collect();
        let transfer = [0, 1].map(|par| {
            let groups = group_by_phys(&pieces[par]);
            sectors
                .iter()
                .map(|s| sector_transfer(&space, s, &groups))
                .collect()
        });
        ColumnTransfer {
            h,
            space,
            pieces,
            sectors,
            transfer,
        }
    }

    pub fn height(&self) -> usize {
        self.h
    }

    /// Stored nonzeros of the double-layer transfer, per sublattice parity.
    pub fn nnz(&self) -> [usize; 2] {
        [0, 1].map(|p| self.transfer[p].iter().map(|t| t.nnz()).sum())
    }

    fn sector_index(&self, delta: i32) -> usize {
        (delta + 2 * self.h as i32) as usize
    }

    /// Rows `(a, b) → Σ_phys amp` of the two-column block starting at a column
    /// with the given parity, grouped by outgoing profile `b`.
    fn block_rows(&self, parity: usize) -> Vec<Vec<BlockRow>> {
        let h = self.h;
        let left = &self.pieces[parity];
        let right = &self.pieces[1 - parity];
        let mut by_mid: HashMap<u32, Vec<&Piece>> = HashMap::new();
        for p in right {
            by_mid.entry(p.vin).or_default().push(p);
        }
        let mut acc: HashMap<(u32, u32), HashMap<u32, f64>> = HashMap::new();
        for p in left {
            if let Some(list) = by_mid.get(&p.vout) {
                for q in list {
                    *acc.entry((p.vin, q.vout))
                        .or_default()
                        .entry(p.phys | q.phys << h)
                        .or_default() += p.amp * q.amp;
                }
            }
        }
        let mut rows = vec![Vec::new(); self.space.size as usize];
        let mut keys: Vec<(u32, u32)> = acc.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            let mut entries: Vec<(u32, f64)> = acc[&(a, b)]
                .iter()
                .filter(|e| *e.1 != 0.0)
                .map(|(&k, &v)| (k, v))
                .collect();
            entries.sort_unstable_by_key(|e| e.0);
            if !entries.is_empty() {
                rows[b as usize].push(BlockRow { a, entries });
            }
        }
        rows
    }

    fn propagate(&self, x: &mut Vec<f64>, width: usize, delta: i32, parities: &[usize]) {
        let si = self.sector_index(delta);
        let mut out = vec![0.0; x.len()];
        for &par in parities {
            self.transfer[par][si].apply_block(x, width, &mut out);
            std::mem::swap(x, &mut out);
        }
    }

    /// Unnormalised reduced state of columns `(left, left + 1)`.
    pub fn rho2_unnormalized(&self, spec: &LatticeSpec, left: usize) -> Result<DMatrix<f64>> {
        if spec.m_prime != self.h {
            return Err(Error::InvalidLattice("height does not match transfer".into()));
        }
        if spec.m < 2 || left + 1 >= spec.m + usize::from(spec.boundary == Boundary::PeriodicHorizontal) {
            return Err(Error::InvalidSites(format!("no column pair at {left}")));
        }
        let m = spec.m;
        let rows = self.block_rows(left % 2);
        let d = 1usize << (2 * self.h);
        let mut rho = vec![0.0; d * d];
        match spec.boundary {
            Boundary::PeriodicHorizontal => {
                let env: Vec<usize> = (2..m).map(|k| (left + k) % m % 2).collect();
                self.contract_ring(&rows, &env, &mut rho, d);
            }
            Boundary::OpenBoth => {
                let left_env: Vec<usize> = (0..left).map(|c| c % 2).collect();
                let right_env: Vec<usize> = (left + 2..m).map(|c| c % 2).collect();
                self.contract_open(&rows, &left_env, &right_env, &mut rho, d);
            }
        }
        Ok(DMatrix::from_row_slice(d, d, &rho))
    }

    fn contract_ring(&self, rows: &[Vec<BlockRow>], env: &[usize], rho: &mut [f64], d: usize) {
        let space = &self.space;
        let live: Vec<u32> = (0..space.size).filter(|&b| !rows[b as usize].is_empty()).collect();
        for &b in &live {
            // Starting pairs (b, b'), grouped by sector.
            let mut starts: Vec<Vec<u32>> = vec![Vec::new(); self.sectors.len()];
            for &bp in &live {
                starts[self.sector_index(space.delta_of(b, bp))].push(bp);
            }
            let mut envs: Vec<Vec<f64>> = Vec::with_capacity(self.sectors.len());
            for (si, list) in starts.iter().enumerate() {
                if list.is_empty() {
                    envs.push(Vec::new());
                    continue;
                }
                let sector = &self.sectors[si];
                let w = list.len();
                let mut x = vec![0.0; sector.len * w];
                for (j, &bp) in list.iter().enumerate() {
                    let i = space.local(sector, b, bp).expect("start in its sector");
                    x[i * w + j] = 1.0;
                }
                self.propagate(&mut x, w, sector.delta, env);
                envs.push(x);
            }
            let lookup = |a: u32, ap: u32, si: usize, j: usize| -> f64 {
                let sector = &self.sectors[si];
                match space.local(sector, a, ap) {
                    Some(i) => envs[si][i * starts[si].len() + j],
                    None => 0.0,
                }
            };
            for ket in &rows[b as usize] {
                let mut u = vec![0.0; d];
                for (si, list) in starts.iter().enumerate() {
                    for (j, &bp) in list.iter().enumerate() {
                        for bra in &rows[bp as usize] {
                            let e = lookup(ket.a, bra.a, si, j);
                            if e != 0.0 {
                                for &(p, amp) in &bra.entries {
                                    u[p as usize] += e * amp;
                                }
                            }
                        }
                    }
                }
                accumulate(rho, d, &ket.entries, &u);
            }
        }
    }

    fn contract_open(
        &self,
        rows: &[Vec<BlockRow>],
        left_env: &[usize],
        right_env: &[usize],
        rho: &mut [f64],
        d: usize,
    ) {
        let space = &self.space;
        let sector = &self.sectors[self.sector_index(0)];
        let origin = space.local(sector, 0, 0).expect("empty profile pair");
        let mut lv = vec![0.0; sector.len];
        lv[origin] = 1.0;
        self.propagate(&mut lv, 1, 0, left_env);
        let mut rv = vec![0.0; sector.len];
        rv[origin] = 1.0;
        let mut tmp = vec![0.0; sector.len];
        for &par in right_env.iter().rev() {
            self.transfer[par][self.sector_index(0)].apply_transpose(&rv, &mut tmp);
            std::mem::swap(&mut rv, &mut tmp);
        }
        let get = |v: &[f64], x: u32, y: u32| space.local(sector, x, y).map_or(0.0, |i| v[i]);
        for b in 0..space.size {
            for ket in &rows[b as usize] {
                let mut u = vec![0.0; d];
                let mut any = false;
                for bp in 0..space.size {
                    let r = get(&rv, b, bp);
                    if r == 0.0 {
                        continue;
                    }
                    for bra in &rows[bp as usize] {
                        let e = r * get(&lv, ket.a, bra.a);
                        if e != 0.0 {
                            any = true;
                            for &(p, amp) in &bra.entries {
                                u[p as usize] += e * amp;
                            }
                        }
                    }
                }
                if any {
                    accumulate(rho, d, &ket.entries, &u);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct BlockRow {
    a: u32,
    entries: Vec<(u32, f64)>,
}

fn accumulate(rho: &mut [f64], d: usize, ket: &[(u32, f64)], u: &[f64]) {
    for &(p, amp) in ket {
        let row = &mut rho[p as usize * d..(p as usize + 1) * d];
        for (r, &x) in row.iter_mut().zip(u) {
            *r += amp * x;
        }
    }
}

/// Sites of columns `(left, left + 1)` in reduced-state bit order.
pub fn column_pair_sites(spec: &LatticeSpec, left: usize) -> Vec<usize> {
    let mut sites = spec.column_sites(left);
    sites.extend(spec.column_sites((left + 1) % spec.m));
    sites
}

/// Normalised reduced state of columns `(left, left + 1)`.
pub fn rho2_columns(spec: &LatticeSpec, left: usize, cap: usize) -> Result<DensityMatrix> {
    spec.validate()?;
    if spec.m_prime > cap {
        return Err(Error::HeightTooLarge {
            m_prime: spec.m_prime,
            cap,
        });
    }
    let engine = ColumnTransfer::new(spec.m_prime);
    let raw = engine.rho2_unnormalized(spec, left)?;
    DensityMatrix::from_real_unnormalized(column_pair_sites(spec, left), &raw)
}

/// Two-column reduced state of the periodic even × even lattice, on its
/// last two columns.
pub fn rho2_perfect(m: usize, m_prime: usize) -> Result<DensityMatrix> {
    let spec = LatticeSpec::periodic(m, m_prime)?;
    if m % 2 != 0 || m_prime % 2 != 0 {
        return Err(Error::InvalidLattice("expected an even x even lattice".into()));
    }
    rho2_columns(&spec, m - 2, DEFAULT_TWO_COLUMN_CAP)
}

/// Two-column reduced state of the periodic even × odd lattice.
pub fn rho2_imperfect(m: usize, m_prime: usize) -> Result<DensityMatrix> {
    let spec = LatticeSpec::periodic(m, m_prime)?;
    if spec.parity() != Parity::Imperfect {
        return Err(Error::InvalidLattice("expected an even x odd lattice".into()));
    }
    rho2_columns(&spec, m - 2, DEFAULT_TWO_COLUMN_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piece_counts() {
        assert_eq!(column_pieces(1, 0).len(), 4);
        assert_eq!(column_pieces(3, 0).len(), 80);
        assert_eq!(column_pieces(4, 1).len(), 356);
    }

    #[test]
    fn two_by_two_open_matches_state() {
        let spec = LatticeSpec::open(2, 2).unwrap();
        let rho = rho2_columns(&spec, 0, 5);
        // Both columns make up the whole lattice, so the "reduced" state is the
        // pure RVB projector.
        let rho = rho.unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }
}
