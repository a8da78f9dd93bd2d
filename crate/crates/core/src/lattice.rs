//! Square-lattice geometry and nearest-neighbour dimer coverings.
//!
//! Sites are indexed column-major, `index = col * m_prime + row`, so every
//! lattice column occupies a contiguous block of `m_prime` indices. A site is on
//! sublattice A when `row + col` is even.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest lattice accepted by [`LatticeSpec`].
pub const MAX_SITES: usize = 256;
/// Largest lattice whose basis states fit a `u64` word.
pub const WORD_SITES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    /// Open in both directions.
    OpenBoth,
    /// Columns wrap around: column `m - 1` is bonded to column 0.
    PeriodicHorizontal,
}

impl Boundary {
    pub fn tag(self) -> &'static str {
        match self {
            Boundary::OpenBoth => "open",
            Boundary::PeriodicHorizontal => "ph",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// Even × even with `m == m_prime`.
    Perfect,
    /// Even number of columns, odd number of rows.
    Imperfect,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteId {
    pub row: usize,
    pub col: usize,
}

impl SiteId {
    pub fn sublattice(self) -> Sublattice {
        if (self.row + self.col) % 2 == 0 {
            Sublattice::A
        } else {
            Sublattice::B
        }
    }
}

/// Lattice of `m` columns and `m_prime` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub m: usize,
    pub m_prime: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(m: usize, m_prime: usize, boundary: Boundary) -> Result<Self> {
        let spec = LatticeSpec {
            m,
            m_prime,
            boundary,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn open(m: usize, m_prime: usize) -> Result<Self> {
        Self::new(m, m_prime, Boundary::OpenBoth)
    }

    pub fn periodic(m: usize, m_prime: usize) -> Result<Self> {
        Self::new(m, m_prime, Boundary::PeriodicHorizontal)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m_prime == 0 {
            return Err(Error::InvalidLattice("sides must be positive".into()));
        }
        if (self.m * self.m_prime) % 2 != 0 {
            return Err(Error::InvalidLattice(format!(
                "{}x{} has an odd number of sites",
                self.m, self.m_prime
            )));
        }
        if self.m * self.m_prime > MAX_SITES {
            return Err(Error::InvalidLattice(format!(
                "more than {MAX_SITES} sites are not supported"
            )));
        }
        if self.boundary == Boundary::PeriodicHorizontal {
            if self.m == 2 {
                return Err(Error::InvalidLattice(
                    "periodic wrap with m = 2 duplicates existing bonds".into(),
                ));
            }
            if self.m % 2 != 0 {
                return Err(Error::InvalidLattice(
                    "periodic wrap with odd m breaks the A/B bipartition".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.m * self.m_prime
    }

    pub fn parity(&self) -> Parity {
        if self.m % 2 == 0 && self.m == self.m_prime {
            Parity::Perfect
        } else if self.m % 2 == 0 && self.m_prime % 2 == 1 {
            Parity::Imperfect
        } else {
            Parity::Other
        }
    }

    pub fn index(&self, site: SiteId) -> usize {
        site.col * self.m_prime + site.row
    }

    pub fn site(&self, index: usize) -> SiteId {
        SiteId {
            row: index % self.m_prime,
            col: index / self.m_prime,
        }
    }

    pub fn sublattice(&self, index: usize) -> Sublattice {
        self.site(index).sublattice()
    }

    /// Sites of one column, top to bottom.
    pub fn column_sites(&self, col: usize) -> Vec<usize> {
        (0..self.m_prime).map(|r| col * self.m_prime + r).collect()
    }

    /// Sites of the top `rows` rows, ascending.
    pub fn row_block_sites(&self, rows: usize) -> Vec<usize> {
        (0..self.m)
            .flat_map(|c| (0..rows.min(self.m_prime)).map(move |r| c * self.m_prime + r))
            .collect()
    }

    /// Sites of the left `cols` columns, ascending.
    pub fn column_block_sites(&self, cols: usize) -> Vec<usize> {
        (0..cols.min(self.m) * self.m_prime).collect()
    }

    /// The same lattice with rows and columns exchanged; `None` when the
    /// transpose is not a valid spec.
    pub fn transposed(&self) -> Option<LatticeSpec> {
        match self.boundary {
            Boundary::OpenBoth => LatticeSpec::open(self.m_prime, self.m).ok(),
            Boundary::PeriodicHorizontal => None,
        }
    }

    /// Nearest-neighbour edges, each listed once as `(lower, higher)` index.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for col in 0..self.m {
            for row in 0..self.m_prime {
                let here = self.index(SiteId { row, col });
                if row + 1 < self.m_prime {
                    out.push((here, here + 1));
                }
                if col + 1 < self.m {
                    out.push((here, here + self.m_prime));
                } else if self.boundary == Boundary::PeriodicHorizontal {
                    out.push((row, here));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_sites()];
        for (a, b) in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} {}", self.m, self.m_prime, self.boundary.tag())
    }
}

/// A nearest-neighbour bond oriented from its A site to its B site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
}

impl Bond {
    pub fn oriented(spec: &LatticeSpec, i: usize, j: usize) -> Bond {
        if spec.sublattice(i) == Sublattice::A {
            Bond { a: i, b: j }
        } else {
            Bond { a: j, b: i }
        }
    }
}

/// One perfect matching of the lattice, bonds sorted by `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DimerCovering {
    pub bonds: Vec<Bond>,
}

impl DimerCovering {
    pub fn new(spec: &LatticeSpec, mut bonds: Vec<Bond>) -> Result<Self> {
        bonds.sort_unstable();
        let covering = DimerCovering { bonds };
        covering.validate(spec)?;
        Ok(covering)
    }

    pub fn validate(&self, spec: &LatticeSpec) -> Result<()> {
        let n = spec.num_sites();
        if self.bonds.len() * 2 != n {
            return Err(Error::InvalidCovering(format!(
                "{} bonds for {} sites",
                self.bonds.len(),
                n
            )));
        }
        let edges = spec.edges();
        let mut seen = vec![false; n];
        for bond in &self.bonds {
            if bond.a >= n || bond.b >= n {
                return Err(Error::InvalidCovering("site out of range".into()));
            }
            if spec.sublattice(bond.a) != Sublattice::A || spec.sublattice(bond.b) != Sublattice::B
            {
                return Err(Error::InvalidCovering(format!(
                    "bond {}-{} is not oriented A to B",
                    bond.a, bond.b
                )));
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if edges.binary_search(&key).is_err() {
                return Err(Error::InvalidCovering(format!(
                    "{}-{} is not a lattice edge",
                    bond.a, bond.b
                )));
            }
            for s in [bond.a, bond.b] {
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidCovering(format!("site {s} used twice")));
                }
            }
        }
        Ok(())
    }
}

/// Rejects lattices whose sites do not fit one `u64` basis word.
pub fn require_word(spec: &LatticeSpec) -> Result<()> {
    if spec.num_sites() > WORD_SITES {
        return Err(Error::InvalidLattice(format!(
            "{spec} has more than {WORD_SITES} sites, too many for a basis word"
        )));
    }
    Ok(())
}

/// Every dimer covering of `spec`, sorted lexicographically by bond list.
pub fn enumerate_coverings(spec: &LatticeSpec) -> Result<Vec<DimerCovering>> {
    spec.validate()?;
    require_word(spec)?;
    let n = spec.num_sites();
    let adj = spec.neighbours();
    let mut used = vec![false; n];
    let mut bonds = Vec::with_capacity(n / 2);
    let mut out = Vec::new();
    extend_matching(spec, &adj, &mut used, &mut bonds, 0, &mut out);
    out.sort_unstable();
    Ok(out)
}

fn extend_matching(
    spec: &LatticeSpec,
    adj: &[Vec<usize>],
    used: &mut [bool],
    bonds: &mut Vec<Bond>,
    from: usize,
    out: &mut Vec<DimerCovering>,
) {
    let Some(s) = (from..used.len()).find(|&i| !used[i]) else {
        let mut sorted = bonds.clone();
        sorted.sort_unstable();
        out.push(DimerCovering { bonds: sorted });
        return;
    };
    used[s] = true;
    for &t in &adj[s] {
        if used[t] {
            continue;
        }
        used[t] = true;
        // A free neighbour of a lower site with no free partner left is a dead end.
        if !stranded(adj, used, s) {
            bonds.push(Bond::oriented(spec, s, t));
            extend_matching(spec, adj, used, bonds, s + 1, out);
            bonds.pop();
        }
        used[t] = false;
    }
    used[s] = false;
}

fn stranded(adj: &[Vec<usize>], used: &[bool], s: usize) -> bool {
    adj[s]
        .iter()
        .filter(|&&u| !used[u])
        .any(|&u| adj[u].iter().all(|&w| used[w]))
}

/// Tallest column accepted by [`covering_count_transfer`].
pub const TRANSFER_HEIGHT_CAP: usize = 20;

/// Covering count by a column-profile transfer; never materialises coverings.
pub fn covering_count_transfer(spec: &LatticeSpec) -> Result<u64> {
    spec.validate()?;
    let h = spec.m_prime;
    if h > TRANSFER_HEIGHT_CAP {
        return Err(Error::HeightTooLarge {
            m_prime: h,
            cap: TRANSFER_HEIGHT_CAP,
        });
    }
    let full = 1usize << h;
    let overflow = || Error::InvalidLattice(format!("{spec} has more than u64::MAX coverings"));
    match spec.boundary {
        Boundary::OpenBoth => {
            let mut counts = vec![0u64; full];
            counts[0] = 1;
            for col in 0..spec.m {
                counts = column_step(&counts, h, col + 1 < spec.m).ok_or_else(overflow)?;
            }
            Ok(counts[0])
        }
        Boundary::PeriodicHorizontal => {
            // Sum over which rows of column 0 are bonded across the seam.
            let mut total = 0u64;
            for seam in 0..full {
                let mut counts = vec![0u64; full];
                counts[seam] = 1;
                for _ in 0..spec.m {
                    counts = column_step(&counts, h, true).ok_or_else(overflow)?;
                }
                total = total.checked_add(counts[seam]).ok_or_else(overflow)?;
            }
            Ok(total)
        }
    }
}

fn column_step(counts: &[u64], h: usize, allow_right: bool) -> Option<Vec<u64>> {
    let mut next = vec![0u64; counts.len()];
    for (filled, &c) in counts.iter().enumerate() {
        if c != 0 {
            fill_column(filled, 0, 0, h, allow_right, c, &mut next)?;
        }
    }
    Some(next)
}

fn fill_column(
    filled: usize,
    row: usize,
    out: usize,
    h: usize,
    allow_right: bool,
    c: u64,
    next: &mut [u64],
) -> Option<()> {
    if row == h {
        next[out] = next[out].checked_add(c)?;
        return Some(());
    }
    if filled >> row & 1 == 1 {
        return fill_column(filled, row + 1, out, h, allow_right, c, next);
    }
    if row + 1 < h && filled >> (row + 1) & 1 == 0 {
        fill_column(filled | 3 << row, row + 2, out, h, allow_right, c, next)?;
    }
    if allow_right {
        fill_column(filled, row + 1, out | 1 << row, h, allow_right, c, next)?;
    }
    Some(())
}

/// Text form: a header line, then one covering per line.
pub fn serialize_coverings(spec: &LatticeSpec, coverings: &[DimerCovering]) -> String {
    let mut s = format!(
        "# lattice m={} mp={} bc={}\n",
        spec.m,
        spec.m_prime,
        spec.boundary.tag()
    );
    for covering in coverings {
        let mut pairs: Vec<(SiteId, SiteId)> = covering
            .bonds
            .iter()
            .map(|b| {
                let (x, y) = (spec.site(b.a), spec.site(b.b));
                if (x.row, x.col) <= (y.row, y.col) {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect();
        pairs.sort_by_key(|(x, y)| (x.row, x.col, y.row, y.col));
        let line: Vec<String> = pairs
            .iter()
            .map(|(x, y)| format!("({},{})-({},{})", x.row, x.col, y.row, y.col))
            .collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}
