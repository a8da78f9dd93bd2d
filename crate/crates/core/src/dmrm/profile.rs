//! Cut profiles shared by the column and row transfer engines.
//!
//! A cut between two lines of the lattice carries one ternary digit per
//! crossing slot: 0 when no bond crosses, otherwise `1 + σ` where σ is the
//! spin (0 up, 1 down) of the site on the near side of the bond. The far site
//! takes the opposite spin, so every singlet is resolved exactly once.

use std::f64::consts::FRAC_1_SQRT_2;

/// Amplitude carried by the near site of a singlet when it has spin `sigma`.
pub(crate) fn singlet_weight(on_a: bool, sigma: u32) -> f64 {
    if on_a == (sigma == 0) {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    }
}

/// Local configuration of one line: incoming profile, outgoing profile,
/// physical spins and amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Piece {
    pub vin: u32,
    pub vout: u32,
    pub phys: u32,
    pub amp: f64,
}

pub(crate) fn pow3(k: usize) -> u32 {
    3u32.pow(k as u32)
}

/// `#up − #down` over the occupied slots of a profile.
pub(crate) fn charge(mut profile: u32, width: usize) -> i32 {
    let mut q = 0;
    for _ in 0..width {
        match profile % 3 {
            1 => q += 1,
            2 => q -= 1,
            _ => {}
        }
        profile /= 3;
    }
    q
}

/// Dense indexing of profile pairs `(u, u')` with a fixed charge difference.
///
/// Pairs with `charge(u) − charge(u') = delta` are laid out block by block in
/// `charge(u)`, row-major in the rank of `u` within its charge class.
#[derive(Debug, Clone)]
pub(crate) struct Sector {
    pub delta: i32,
    pub len: usize,
    offset: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct ProfileSpace {
    pub width: usize,
    pub size: u32,
    pub charge: Vec<i32>,
    pub rank: Vec<u32>,
    /// Number of profiles with charge `q`, indexed by `q + width`.
    pub class_len: Vec<usize>,
    /// Profiles of each charge class in rank order.
    #[cfg_attr(not(test), allow(dead_code))]
    pub class: Vec<Vec<u32>>,
}

impl ProfileSpace {
    pub fn new(width: usize) -> Self {
        let size = pow3(width);
        let mut charge_of = Vec::with_capacity(size as usize);
        let mut rank = Vec::with_capacity(size as usize);
        let mut class = vec![Vec::new(); 2 * width + 1];
        for u in 0..size {
            let q = charge(u, width);
            let c = &mut class[(q + width as i32) as usize];
            rank.push(c.len() as u32);
            c.push(u);
            charge_of.push(q);
        }
        let class_len = class.iter().map(|c| c.len()).collect();
        ProfileSpace {
            width,
            size,
            charge: charge_of,
            rank,
            class_len,
            class,
        }
    }

    fn class_index(&self, q: i32) -> Option<usize> {
        let i = q + self.width as i32;
        (i >= 0 && (i as usize) < self.class_len.len()).then_some(i as usize)
    }

    pub fn sector(&self, delta: i32) -> Sector {
        let mut offset = vec![usize::MAX; self.class_len.len()];
        let mut len = 0;
        for (qi, &n) in self.class_len.iter().enumerate() {
            let q = qi as i32 - self.width as i32;
            if let Some(pi) = self.class_index(q - delta) {
                offset[qi] = len;
                len += n * self.class_len[pi];
            }
        }
        Sector { delta, len, offset }
    }

    pub fn delta_of(&self, u: u32, v: u32) -> i32 {
        self.charge[u as usize] - self.charge[v as usize]
    }

    /// Local index of `(u, u')` in `sector`, if the pair belongs to it.
    #[inline]
    pub fn local(&self, sector: &Sector, u: u32, v: u32) -> Option<usize> {
        let qu = self.charge[u as usize];
        if qu - self.charge[v as usize] != sector.delta {
            return None;
        }
        let qi = (qu + self.width as i32) as usize;
        let pi = (self.charge[v as usize] + self.width as i32) as usize;
        Some(
            sector.offset[qi]
                + self.rank[u as usize] as usize * self.class_len[pi]
                + self.rank[v as usize] as usize,
        )
    }

    /// Inverse of [`ProfileSpace::local`].
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn pair(&self, sector: &Sector, local: usize) -> (u32, u32) {
        let qi = sector
            .offset
            .iter()
            .enumerate()
            .filter(|(_, &o)| o != usize::MAX && o <= local)
            .max_by_key(|(_, &o)| o)
            .map(|(i, _)| i)
            .expect("local index inside sector");
        let q = qi as i32 - self.width as i32;
        let pi = (q - sector.delta + self.width as i32) as usize;
        let within = local - sector.offset[qi];
        let (ru, rv) = (within / self.class_len[pi], within % self.class_len[pi]);
        (self.class[qi][ru], self.class[pi][rv])
    }

    /// Range of the diagonal block of charge class `q` within a `delta = 0`
    /// sector, and its side length.
    pub fn diagonal_block(&self, sector: &Sector, q: i32) -> Option<(usize, usize)> {
        debug_assert_eq!(sector.delta, 0);
        let qi = self.class_index(q)?;
        let n = self.class_len[qi];
        (n > 0).then(|| (sector.offset[qi], n))
    }

    pub fn deltas(&self) -> std::ops::RangeInclusive<i32> {
        -2 * self.width as i32..=2 * self.width as i32
    }
}

/// Sparse double-layer transfer restricted to one sector, stored by
/// destination row: `out[d] = Σ val · in[src]`.
#[derive(Debug, Clone)]
pub(crate) struct SectorTransfer {
    pub row_start: Vec<usize>,
    pub src: Vec<u32>,
    pub val: Vec<f64>,
}

impl SectorTransfer {
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// Columns of `x` are independent vectors; `x` is row-major with `width`
    /// columns.
    pub fn apply_block(&self, x: &[f64], width: usize, out: &mut [f64]) {
        out.fill(0.0);
        for d in 0..self.row_start.len() - 1 {
            let row = &mut out[d * width..(d + 1) * width];
            for e in self.row_start[d]..self.row_start[d + 1] {
                let s = self.src[e] as usize;
                let v = self.val[e];
                let xs = &x[s * width..(s + 1) * width];
                for (o, &xi) in row.iter_mut().zip(xs) {
                    *o += v * xi;
                }
            }
        }
    }

    /// `out = Tᵀ x` for a single vector.
    pub fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (d, &xd) in x.iter().enumerate() {
            if xd == 0.0 {
                continue;
            }
            for e in self.row_start[d]..self.row_start[d + 1] {
                out[self.src[e] as usize] += self.val[e] * xd;
            }
        }
    }
}

/// Pieces grouped by physical configuration.
pub(crate) fn group_by_phys(pieces: &[Piece]) -> Vec<(u32, Vec<Piece>)> {
    let mut sorted = pieces.to_vec();
    sorted.sort_by_key(|p| (p.phys, p.vin, p.vout));
    let mut out: Vec<(u32, Vec<Piece>)> = Vec::new();
    for p in sorted {
        match out.last_mut() {
            Some((phys, list)) if *phys == p.phys => list.push(p),
            _ => out.push((p.phys, vec![p])),
        }
    }
    out
}

/// Double-layer transfer `Σ_phys piece ⊗ piece` restricted to `sector`.
pub(crate) fn sector_transfer(
    space: &ProfileSpace,
    sector: &Sector,
    groups: &[(u32, Vec<Piece>)],
) -> SectorTransfer {
    let mut triples: Vec<(u32, u32, f64)> = Vec::new();
    for (_, list) in groups {
        for p in list {
            for q in list {
                if let (Some(s), Some(d)) = (
                    space.local(sector, p.vin, q.vin),
                    space.local(sector, p.vout, q.vout),
                ) {
                    triples.push((d as u32, s as u32, p.amp * q.amp));
                }
            }
        }
    }
    triples.sort_unstable_by_key(|t| (t.0, t.1));
    let mut row_start = vec![0usize; sector.len + 1];
    let mut src = Vec::with_capacity(triples.len());
    let mut val: Vec<f64> = Vec::with_capacity(triples.len());
    let mut last: Option<(u32, u32)> = None;
    for (d, s, v) in triples {
        if last == Some((d, s)) {
            *val.last_mut().expect("entry present") += v;
        } else {
            src.push(s);
            val.push(v);
            row_start[d as usize + 1] += 1;
            last = Some((d, s));
        }
    }
    for i in 0..sector.len {
        row_start[i + 1] += row_start[i];
    }
    SectorTransfer {
        row_start,
        src,
        val,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_index_round_trip() {
        let space = ProfileSpace::new(3);
        for delta in space.deltas() {
            let sector = space.sector(delta);
            let mut seen = vec![false; sector.len];
            for u in 0..space.size {
                for v in 0..space.size {
                    if let Some(i) = space.local(&sector, u, v) {
                        assert!(!seen[i]);
                        seen[i] = true;
                        assert_eq!(space.pair(&sector, i), (u, v));
                    } else {
                        assert_ne!(space.delta_of(u, v), delta);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn charges() {
        assert_eq!(charge(0, 2), 0);
        assert_eq!(charge(1 + 2 * 3, 2), 0);
        assert_eq!(charge(1 + 3, 2), 2);
    }
}
