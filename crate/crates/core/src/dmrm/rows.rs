//! Exact two-site correlations and horizontal-cut spectra by row transfer.
//!
//! Rows are open in both boundary modes, so the double layer is contracted
//! from the top edge to the bottom edge with a single vector. Each row of `m`
//! sites is a chain, or a ring under the periodic wrap, and the cut below it
//! carries one vertical-bond slot per column.
//!
//! Contracted from one edge, the double layer is the Gram matrix of the
//! partial states that end on each cut profile. Profiles of different charge
//! give orthogonal partial states, so the Schmidt spectrum across a cut is
//! that of `G_top^{1/2} G_bottom G_top^{1/2}`, one charge block at a time.

use nalgebra::DMatrix;

use super::profile::{
    group_by_phys, pow3, sector_transfer, singlet_weight, Piece, ProfileSpace, Sector,
    SectorTransfer,
};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec};

/// Default widest row handled by the row engine.
pub const DEFAULT_ROW_WIDTH_CAP: usize = 8;

/// Every local configuration of one row of width `m`. Columns with
/// `(col + parity)` even are on sublattice A.
pub(crate) fn row_pieces(m: usize, parity: usize, periodic: bool) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut st = RowBuild {
        m,
        parity,
        periodic: periodic && m > 2,
        out: &mut out,
    };
    st.rec(0, 0, 0, 0, 1.0, None, None);
    out
}

struct RowBuild<'a> {
    m: usize,
    parity: usize,
    periodic: bool,
    out: &'a mut Vec<Piece>,
}

impl RowBuild<'_> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        &mut self,
        c: usize,
        vin: u32,
        vout: u32,
        phys: u32,
        amp: f64,
        pend: Option<u32>,
        wrap: Option<u32>,
    ) {
        let m = self.m;
        if c == m {
            if pend.is_none() && wrap.is_none() {
                self.out.push(Piece {
                    vin,
                    vout,
                    phys,
                    amp,
                });
            }
            return;
        }
        if let Some(s) = pend {
            self.rec(c + 1, vin, vout, phys | (1 - s) << c, amp, None, wrap);
            return;
        }
        if c == m - 1 {
            if let Some(s) = wrap {
                self.rec(c + 1, vin, vout, phys | (1 - s) << c, amp, None, None);
                return;
            }
        }
        let on_a = (c + self.parity) % 2 == 0;
        let p3 = pow3(c);
        for sigma in 0..2u32 {
            let w = singlet_weight(on_a, sigma);
            self.rec(c + 1, vin + (sigma + 1) * p3, vout, phys | (1 - sigma) << c, amp, None, wrap);
            self.rec(c + 1, vin, vout + (sigma + 1) * p3, phys | sigma << c, amp * w, None, wrap);
            if c + 1 < m {
                self.rec(c + 1, vin, vout, phys | sigma << c, amp * w, Some(sigma), wrap);
            }
            if c == 0 && self.periodic {
                self.rec(c + 1, vin, vout, phys | sigma << c, amp * w, None, Some(sigma));
            }
        }
    }
}

/// `⟨σ^z_i σ^z_j⟩` for every pair of sites of an RVB lattice.
#[derive(Debug, Clone)]
pub struct PairCorrelations {
    spec: LatticeSpec,
    zz: Vec<f64>,
    cuts: Vec<f64>,
}

impl PairCorrelations {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn zz(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        self.zz[i * self.spec.num_sites() + j]
    }

    /// Largest eigenvalue of the reduced state of the top `rows` rows,
    /// `0 < rows < m_prime`.
    pub fn row_block_lambda_sq(&self, rows: usize) -> Option<f64> {
        rows.checked_sub(1).and_then(|i| self.cuts.get(i)).copied()
    }

    /// Largest eigenvalue of the two-site reduced state. A total singlet has
    /// `ρ = (I + c Σ_a σ^a⊗σ^a)/4`, with singlet weight `(1 − 3c)/4` and
    /// triplet weights `(1 + c)/4`.
    pub fn pair_lambda_sq(&self, i: usize, j: usize) -> f64 {
        let c = self.zz(i, j);
        (0.25 * (1.0 - 3.0 * c)).max(0.25 * (1.0 + c))
    }
}

struct RowTransfer {
    space: ProfileSpace,
    sector: Sector,
    groups: [Vec<(u32, Vec<Piece>)>; 2],
    transfer: [SectorTransfer; 2],
}

impl RowTransfer {
    fn new(m: usize, periodic: bool) -> Self {
        let space = ProfileSpace::new(m);
        let sector = space.sector(0);
        let groups = [0, 1].map(|p| group_by_phys(&row_pieces(m, p, periodic)));
        let transfer = [0, 1].map(|p| sector_transfer(&space, &sector, &groups[p]));
        RowTransfer {
            space,
            sector,
            groups,
            transfer,
        }
    }

    fn forward(&self, par: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.transfer[par].apply_block(x, 1, &mut out);
        out
    }

    fn backward(&self, par: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.transfer[par].apply_transpose(x, &mut out);
        out
    }

    /// Forward step with a `±1` weight on each physical row configuration.
    fn forward_signed(&self, par: usize, x: &[f64], sign: impl Fn(u32) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        let (space, sector) = (&self.space, &self.sector);
        for (phys, list) in &self.groups[par] {
            let s = sign(*phys);
            for p in list {
                for q in list {
                    let (Some(i), Some(o)) = (
                        space.local(sector, p.vin, q.vin),
                        space.local(sector, p.vout, q.vout),
                    ) else {
                        continue;
                    };
                    out[o] += s * p.amp * q.amp * x[i];
                }
            }
        }
        out
    }

    /// Weight of each physical row configuration between `left` and `right`.
    fn phys_weights(&self, par: usize, left: &[f64], right: &[f64], width: usize) -> Vec<f64> {
        let mut w = vec![0.0; 1 << width];
        let (space, sector) = (&self.space, &self.sector);
        for (phys, list) in &self.groups[par] {
            let mut acc = 0.0;
            for p in list {
                for q in list {
                    let (Some(i), Some(o)) = (
                        space.local(sector, p.vin, q.vin),
                        space.local(sector, p.vout, q.vout),
                    ) else {
                        continue;
                    };
                    acc += left[i] * p.amp * q.amp * right[o];
                }
            }
            w[*phys as usize] = acc;
        }
        w
    }
}

impl RowTransfer {
    /// Largest Schmidt weight across the cut between `top` and `bottom`,
    /// before normalisation.
    fn cut_lambda_sq(&self, top: &[f64], bottom: &[f64]) -> Option<f64> {
        let w = self.space.width as i32;
        let mut best = 0.0f64;
        for q in -w..=w {
            let Some((start, n)) = self.space.diagonal_block(&self.sector, q) else {
                continue;
            };
            let (t, b) = (&top[start..start + n * n], &bottom[start..start + n * n]);
            // Profiles with an empty partial state on either side carry no weight.
            let live: Vec<usize> = (0..n)
                .filter(|&i| t[i * n + i] > 0.0 && b[i * n + i] > 0.0)
                .collect();
            if live.is_empty() {
                continue;
            }
            let k = live.len();
            let g_top = DMatrix::from_fn(k, k, |i, j| t[live[i] * n + live[j]]);
            let g_bottom = DMatrix::from_fn(k, k, |i, j| b[live[i] * n + live[j]]);
            let eig = g_top.symmetric_eigen();
            let mut root = eig.eigenvectors;
            for (c, &d) in eig.eigenvalues.iter().enumerate() {
                root.column_mut(c).scale_mut(d.max(0.0).sqrt());
            }
            let inner = root.transpose() * g_bottom * &root;
            let inner = (&inner + inner.transpose()) * 0.5;
            let top_eig = inner
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(0.0, f64::max);
            if !top_eig.is_finite() {
                return None;
            }
            best = best.max(top_eig);
        }
        Some(best)
    }
}

fn spin_sign(phys: u32, c: usize) -> f64 {
    if phys >> c & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All `⟨σ^z σ^z⟩` correlations of the RVB state on `spec`.
pub fn pair_correlations(spec: &LatticeSpec, width_cap: usize) -> Result<PairCorrelations> {
    spec.validate()?;
    let (m, h) = (spec.m, spec.m_prime);
    if m > width_cap {
        return Err(Error::HeightTooLarge {
            m_prime: m,
            cap: width_cap,
        });
    }
    let periodic = spec.boundary == Boundary::PeriodicHorizontal;
    let engine = RowTransfer::new(m, periodic);
    let len = engine.sector.len;
    let origin = engine
        .space
        .local(&engine.sector, 0, 0)
        .expect("empty profile pair");
    let unit = {
        let mut v = vec![0.0; len];
        v[origin] = 1.0;
        v
    };
    let parity = |r: usize| r % 2;
    // right[r] contracts rows r..h from the bottom edge.
    let mut right = vec![unit.clone(); h + 1];
    for r in (0..h).rev() {
        right[r] = engine.backward(parity(r), &right[r + 1]);
    }
    let norm = right[0][origin];
    if !(norm > 0.0) {
        return Err(Error::NoCoverings);
    }
    let n = spec.num_sites();
    let site = |r: usize, c: usize| c * h + r;
    let mut zz = vec![f64::NAN; n * n];
    let mut set = |a: usize, b: usize, v: f64| {
        zz[a * n + b] = v;
        zz[b * n + a] = v;
    };
    // Periodic rows are translation invariant up to a global sign, so one
    // source column suffices.
    let sources: Vec<usize> = if periodic { vec![0] } else { (0..m).collect() };
    let mut cuts = Vec::with_capacity(h.saturating_sub(1));
    let mut left = unit;
    for r1 in 0..h {
        if r1 > 0 {
            let lam = engine
                .cut_lambda_sq(&left, &right[r1])
                .ok_or_else(|| Error::NotPhysical(format!("cut spectrum below row {r1}")))?;
            cuts.push(lam / norm);
        }
        let w = engine.phys_weights(parity(r1), &left, &right[r1 + 1], m);
        for &c1 in &sources {
            for c2 in 0..m {
                if c2 == c1 {
                    continue;
                }
                let v: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(p, &x)| x * spin_sign(p as u32, c1) * spin_sign(p as u32, c2))
                    .sum();
                set(site(r1, c1), site(r1, c2), v / norm);
            }
            let mut carry = engine.forward_signed(parity(r1), &left, |p| spin_sign(p, c1));
            for r2 in r1 + 1..h {
                let w2 = engine.phys_weights(parity(r2), &carry, &right[r2 + 1], m);
                for c2 in 0..m {
                    let v: f64 = w2
                        .iter()
                        .enumerate()
                        .map(|(p, &x)| x * spin_sign(p as u32, c2))
                        .sum();
                    set(site(r1, c1), site(r2, c2), v / norm);
                }
                carry = engine.forward(parity(r2), &carry);
            }
        }
        left = engine.forward(parity(r1), &left);
    }
    if periodic {
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let (ra, ca, rb, cb) = (a % h, a / h, b % h, b / h);
                let v = if ra <= rb {
                    zz[site(ra, 0) * n + site(rb, (cb + m - ca) % m)]
                } else {
                    zz[site(rb, 0) * n + site(ra, (ca + m - cb) % m)]
                };
                zz[a * n + b] = v;
            }
        }
    }
    Ok(PairCorrelations {
        spec: *spec,
        zz,
        cuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_and_chain_piece_counts() {
        // A two-site chain: both sites free (4 × 4 vertical options... ) plus
        // the horizontal bond with two spin choices.
        let chain = row_pieces(2, 0, false);
        assert_eq!(chain.len(), 4 * 4 + 2);
        let ring = row_pieces(4, 0, true);
        let open = row_pieces(4, 0, false);
        assert!(ring.len() > open.len());
    }
}
