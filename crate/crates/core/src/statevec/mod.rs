//! Sparse state vectors over the spin-1/2 computational basis.
//!
//! Bit `b` of a basis word is the spin at linear site `b`: 0 for up, 1 for down.

mod density;

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use density::{
    partial_trace, partial_trace_with_cap, schmidt_lambda_max, von_neumann_entropy,
    DensityMatrix, DEFAULT_TRACE_CAP,
};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_coverings, require_word, DimerCovering, LatticeSpec};

/// Sparse amplitude list sorted by basis word, with no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_sites: usize,
    entries: Vec<(u64, Complex64)>,
    norm_squared: f64,
}

impl PureState {
    /// Builds a state from arbitrary `(basis, amplitude)` pairs; duplicates add.
    pub fn from_pairs<I>(num_sites: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        if num_sites == 0 || num_sites > 64 {
            return Err(Error::InvalidSites(format!("{num_sites} sites")));
        }
        let mut map: HashMap<u64, Complex64> = HashMap::new();
        for (k, v) in pairs {
            if num_sites < 64 && k >> num_sites != 0 {
                return Err(Error::InvalidSites(format!(
                    "basis word {k:#x} exceeds {num_sites} sites"
                )));
            }
            *map.entry(k).or_default() += v;
        }
        let mut entries: Vec<(u64, Complex64)> =
            map.into_iter().filter(|(_, v)| v.norm_sqr() > 0.0).collect();
        entries.sort_unstable_by_key(|e| e.0);
        let norm_squared = entries.iter().map(|e| e.1.norm_sqr()).sum();
        Ok(PureState {
            num_sites,
            entries,
            norm_squared,
        })
    }

    /// Computational basis state.
    pub fn basis(num_sites: usize, word: u64) -> Result<Self> {
        Self::from_pairs(num_sites, [(word, Complex64::new(1.0, 0.0))])
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn entries(&self) -> &[(u64, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.norm_squared
    }

    pub fn amplitude(&self, word: u64) -> Complex64 {
        match self.entries.binary_search_by_key(&word, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn normalized(&self) -> Self {
        let s = 1.0 / self.norm_squared.sqrt();
        let entries: Vec<_> = self.entries.iter().map(|&(k, v)| (k, v * s)).collect();
        let norm_squared = entries.iter().map(|e| e.1.norm_sqr()).sum();
        PureState {
            num_sites: self.num_sites,
            entries,
            norm_squared,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = Complex64::new(0.0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i].0, other.entries[j].0);
            if a == b {
                acc += self.entries[i].1.conj() * other.entries[j].1;
                i += 1;
                j += 1;
            } else if a < b {
                i += 1;
            } else {
                j += 1;
            }
        }
        acc
    }

    /// `self ⊗ other`, with `other` occupying the high sites.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let n = self.num_sites + other.num_sites;
        let shift = self.num_sites;
        let pairs = self
            .entries
            .iter()
            .flat_map(|&(a, x)| other.entries.iter().map(move |&(b, y)| (a | b << shift, x * y)));
        Self::from_pairs(n, pairs)
    }

    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        Self::from_pairs(self.num_sites, self.entries.iter().map(|&(k, v)| (k, v * c)))
    }

    pub fn add(&self, other: &PureState) -> Result<Self> {
        if self.num_sites != other.num_sites {
            return Err(Error::InvalidSites("site counts differ".into()));
        }
        Self::from_pairs(
            self.num_sites,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }

    /// Expectation of total `(S^z)^2` and `S^z`, and `‖S⁺ψ‖²`, per unit norm.
    fn spin_moments(&self) -> (f64, f64, f64) {
        let n = self.num_sites;
        let (mut sz, mut sz2) = (0.0, 0.0);
        let mut raised: HashMap<u64, Complex64> = HashMap::new();
        for &(k, v) in &self.entries {
            let downs = k.count_ones() as f64;
            let m = 0.5 * (n as f64 - 2.0 * downs);
            sz += v.norm_sqr() * m;
            sz2 += v.norm_sqr() * m * m;
            let mut rest = k;
            while rest != 0 {
                let b = rest.trailing_zeros();
                *raised.entry(k & !(1 << b)).or_default() += v;
                rest &= rest - 1;
            }
        }
        let plus: f64 = raised.values().map(|v| v.norm_sqr()).sum();
        let nrm = self.norm_squared;
        (sz / nrm, sz2 / nrm, plus / nrm)
    }

    /// `⟨S_tot²⟩ = ⟨S⁻S⁺⟩ + ⟨S_z²⟩ + ⟨S_z⟩`.
    pub fn total_spin_squared(&self) -> f64 {
        let (sz, sz2, plus) = self.spin_moments();
        plus + sz2 + sz
    }

    /// Applies `u` to every site. Dense in `2^n`, so only for small states.
    pub fn rotate_all(&self, u: [[Complex64; 2]; 2]) -> Result<Self> {
        let n = self.num_sites;
        if n > 20 {
            return Err(Error::SubsystemTooLarge { size: n, cap: 20 });
        }
        let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
        for &(k, v) in &self.entries {
            psi[k as usize] = v;
        }
        for site in 0..n {
            let bit = 1usize << site;
            for k in 0..psi.len() {
                if k & bit == 0 {
                    let (x0, x1) = (psi[k], psi[k | bit]);
                    psi[k] = u[0][0] * x0 + u[0][1] * x1;
                    psi[k | bit] = u[1][0] * x0 + u[1][1] * x1;
                }
            }
        }
        Self::from_pairs(
            n,
            psi.into_iter()
                .enumerate()
                .filter(|(_, v)| v.norm_sqr() > 1e-30)
                .map(|(k, v)| (k as u64, v)),
        )
    }

    pub fn to_dump(&self) -> StateDump {
        StateDump {
            num_sites: self.num_sites,
            basis: self.entries.iter().map(|e| format!("{:x}", e.0)).collect(),
            re: self.entries.iter().map(|e| e.1.re).collect(),
            im: self.entries.iter().map(|e| e.1.im).collect(),
        }
    }

    pub fn from_dump(dump: &StateDump) -> Result<Self> {
        if dump.basis.len() != dump.re.len() || dump.re.len() != dump.im.len() {
            return Err(Error::InvalidSites("dump arrays differ in length".into()));
        }
        let mut pairs = Vec::with_capacity(dump.basis.len());
        for ((b, &re), &im) in dump.basis.iter().zip(&dump.re).zip(&dump.im) {
            let k = u64::from_str_radix(b, 16)
                .map_err(|e| Error::InvalidSites(format!("basis {b}: {e}")))?;
            pairs.push((k, Complex64::new(re, im)));
        }
        Self::from_pairs(dump.num_sites, pairs)
    }
}

/// JSON interchange form of a [`PureState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub num_sites: usize,
    pub basis: Vec<String>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Product of singlets `(|↑_a↓_b⟩ − |↓_a↑_b⟩)/√2` over the bonds.
pub fn singlet_product(spec: &LatticeSpec, covering: &DimerCovering) -> Result<PureState> {
    require_word(spec)?;
    covering.validate(spec)?;
    let terms = singlet_terms(covering);
    PureState::from_pairs(
        spec.num_sites(),
        terms.into_iter().map(|(k, v)| (k, Complex64::new(v, 0.0))),
    )
}

fn singlet_terms(covering: &DimerCovering) -> Vec<(u64, f64)> {
    let mut terms = vec![(0u64, 1.0f64)];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for bond in &covering.bonds {
        let mut next = Vec::with_capacity(terms.len() * 2);
        for &(k, v) in &terms {
            next.push((k | 1 << bond.b, v * s));
            next.push((k | 1 << bond.a, -v * s));
        }
        terms = next;
    }
    terms
}

/// Sum of the singlet products of every covering, without normalisation.
pub fn rvb_superposition(spec: &LatticeSpec) -> Result<PureState> {
    let coverings = enumerate_coverings(spec)?;
    if coverings.is_empty() {
        return Err(Error::NoCoverings);
    }
    let mut acc: HashMap<u64, f64> = HashMap::new();
    for covering in &coverings {
        for (k, v) in singlet_terms(covering) {
            *acc.entry(k).or_default() += v;
        }
    }
    PureState::from_pairs(
        spec.num_sites(),
        acc.into_iter().map(|(k, v)| (k, Complex64::new(v, 0.0))),
    )
}

/// Normalised equal-weight RVB state of `spec`.
pub fn build_rvb(spec: &LatticeSpec) -> Result<PureState> {
    Ok(rvb_superposition(spec)?.normalized())
}
