//! Column-state algebra of the two-term strip recursion
//! `|N⟩ = |N−1⟩|1⟩ + |N−2⟩|2̄⟩` and of the periodic brick recursion built
//! from `|2⟩` blocks.
//!
//! Both recursions are exact for the states they define. The two-term strip
//! state equals the open-strip RVB state only for height 2: from height 4 on
//! it misses every covering in which one column is bonded to both of its
//! neighbours. The brick state keeps only two staggered tilings by `2 × h`
//! blocks. Exact RVB reduced states come from [`super::column`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Bond, DimerCovering, LatticeSpec};
use crate::statevec::{build_rvb, rvb_superposition, singlet_product, DensityMatrix, PureState};

/// Default cap on the column height of dense column states.
pub const DEFAULT_HEIGHT_CAP: usize = 12;

/// Default cap on the size of the α basis.
pub const DEFAULT_KDIM_CAP: usize = 64;

/// `Z_{−1}`: the strip with minus one column contributes nothing.
pub const Z_MINUS_ONE: f64 = 0.0;
/// `Z_0`: the empty strip has unit norm.
pub const Z_ZERO: f64 = 1.0;
/// `Y^j_0`: no column precedes the first one.
pub const Y_ZERO: f64 = 0.0;

const CLOSURE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnLabel {
    One,
    Two,
    TwoBar,
    AlphaBasis(usize),
    F(usize),
}

/// Dense state on one or two columns of height `height`; the left column
/// occupies the low bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnState {
    pub label: ColumnLabel,
    pub width: usize,
    pub height: usize,
    pub amplitudes: Vec<f64>,
}

impl ColumnState {
    fn from_state(label: ColumnLabel, width: usize, height: usize, st: &PureState) -> Self {
        let mut amplitudes = vec![0.0; 1 << (width * height)];
        for &(k, v) in st.entries() {
            amplitudes[k as usize] = v.re;
        }
        ColumnState {
            label,
            width,
            height,
            amplitudes,
        }
    }

    pub fn norm_squared(&self) -> f64 {
        dot(&self.amplitudes, &self.amplitudes)
    }

    pub fn to_pure(&self) -> Result<PureState> {
        PureState::from_pairs(
            self.width * self.height,
            self.amplitudes
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(k, &v)| (k as u64, Complex64::new(v, 0.0))),
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|1⟩`, `|2⟩` and `|2̄⟩ = |2⟩ − |1⟩⊗|1⟩` for one column height.
#[derive(Debug, Clone)]
pub struct BaseStates {
    pub height: usize,
    /// Only for even heights.
    pub one: Option<ColumnState>,
    /// Sum over coverings of the `2 × h` strip, unnormalised.
    pub two: ColumnState,
    pub two_bar: Option<ColumnState>,
}

impl BaseStates {
    pub fn one(&self) -> Result<&ColumnState> {
        self.one.as_ref().ok_or_else(|| {
            Error::InvalidLattice(format!("no single-column state at odd height {}", self.height))
        })
    }

    pub fn two_bar(&self) -> Result<&ColumnState> {
        self.two_bar.as_ref().ok_or_else(|| {
            Error::InvalidLattice(format!("no 2-bar state at odd height {}", self.height))
        })
    }

    /// Sign picked up by `|1⟩` when moved by one column: every singlet flips.
    pub fn one_shift_sign(&self) -> f64 {
        if (self.height / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Sign picked up by `|2⟩` when moved by one column.
    pub fn two_shift_sign(&self) -> f64 {
        if self.height % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `⟨v|` on the left column contracted into `|2̄⟩`, leaving the right column.
    pub fn contract_left(&self, v: &[f64]) -> Result<Vec<f64>> {
        let h = self.height;
        let tb = &self.two_bar()?.amplitudes;
        let d = 1usize << h;
        let mut out = vec![0.0; d];
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(v, &tb[r << h..(r << h) + d]);
        }
        Ok(out)
    }

    /// `⟨v|` on the right column contracted into `|2̄⟩`, leaving the left column.
    pub fn contract_right(&self, v: &[f64]) -> Result<Vec<f64>> {
        let h = self.height;
        let tb = &self.two_bar()?.amplitudes;
        let d = 1usize << h;
        let mut out = vec![0.0; d];
        for (r, &vr) in v.iter().enumerate() {
            if vr != 0.0 {
                for (l, o) in out.iter_mut().enumerate() {
                    *o += vr * tb[l | r << h];
                }
            }
        }
        Ok(out)
    }
}

/// Builds `|1⟩`, `|2⟩` and `|2̄⟩` for columns of height `m_prime`.
pub fn build_base_states(m_prime: usize) -> Result<BaseStates> {
    build_base_states_with_cap(m_prime, DEFAULT_HEIGHT_CAP)
}

pub fn build_base_states_with_cap(m_prime: usize, cap: usize) -> Result<BaseStates> {
    if m_prime < 2 {
        return Err(Error::InvalidLattice("column height must be at least 2".into()));
    }
    if m_prime > cap {
        return Err(Error::HeightTooLarge { m_prime, cap });
    }
    let strip = LatticeSpec::open(2, m_prime)?;
    let two = ColumnState::from_state(ColumnLabel::Two, 2, m_prime, &rvb_superposition(&strip)?);
    let (one, two_bar) = if m_prime % 2 == 0 {
        let one = build_rvb(&LatticeSpec::open(1, m_prime)?)?;
        let vertical: Vec<Bond> = (0..2)
            .flat_map(|c| (0..m_prime).step_by(2).map(move |r| (c, r)))
            .map(|(c, r)| Bond::oriented(&strip, c * m_prime + r, c * m_prime + r + 1))
            .collect();
        let ladder = singlet_product(&strip, &DimerCovering::new(&strip, vertical)?)?;
        let one = ColumnState::from_state(ColumnLabel::One, 1, m_prime, &one);
        let mut bar = two.clone();
        bar.label = ColumnLabel::TwoBar;
        for &(k, v) in ladder.entries() {
            bar.amplitudes[k as usize] -= v.re;
        }
        (Some(one), Some(bar))
    } else {
        (None, None)
    };
    Ok(BaseStates {
        height: m_prime,
        one,
        two,
        two_bar,
    })
}

/// The state defined by the two-term strip recursion on `n_cols` columns.
pub fn recursion_state(base: &BaseStates, n_cols: usize) -> Result<PureState> {
    let one = base.one()?.to_pure()?;
    let bar = base.two_bar()?.to_pure()?;
    let s1 = base.one_shift_sign();
    let mut prev: Option<PureState> = None;
    let mut cur: Option<PureState> = None;
    for k in 0..n_cols {
        let one_k = one.scaled(Complex64::new(s1.powi(k as i32), 0.0))?;
        let next = match (&prev, &cur) {
            (_, None) => one_k,
            (None, Some(c)) => c.tensor(&one_k)?.add(&bar)?,
            (Some(p), Some(c)) => c.tensor(&one_k)?.add(&p.tensor(&bar)?)?,
        };
        prev = cur.take();
        cur = Some(next);
    }
    cur.ok_or_else(|| Error::InvalidLattice("need at least one column".into()))
}

/// A real number kept as `mantissa · 2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub mantissa: f64,
    pub exponent: i32,
}

impl Scaled {
    pub fn value(self) -> f64 {
        self.mantissa * 2f64.powi(self.exponent)
    }

    pub fn ln(self) -> f64 {
        self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_2
    }
}

/// Scalar and coefficient tables of the strip recursion.
#[derive(Debug, Clone)]
pub struct RecursionTable {
    pub height: usize,
    pub k_dim: usize,
    /// `|α_i⟩`, starting with `|α_1⟩ = |1⟩`.
    pub basis: Vec<Vec<f64>>,
    /// Gram matrix `A_ij = ⟨α_i|α_j⟩`.
    pub a: DMatrix<f64>,
    /// `alpha[(i, j)]`: left contraction `⟨α_j|2̄⟩ = Σ_i alpha[(i, j)] |α_i⟩`.
    pub alpha: DMatrix<f64>,
    /// Same for contraction on the right column of `|2̄⟩`.
    pub alpha_right: DMatrix<f64>,
    pub closure_residual: f64,
    pub z1: f64,
    pub z2_bar: f64,
    /// Sign of `|1⟩` under a one-column shift, kept apart from the
    /// coefficients.
    pub one_shift_sign: f64,
    /// `Z_N` for `N = 0..=n_max`.
    pub z: Vec<Scaled>,
    /// `Y^j_N = y[N][j] · 2^{z[N].exponent}`.
    pub y: Vec<Vec<f64>>,
    /// `F_i = Σ_k g[i][k] |α_k⟩ · 2^{g_exp[i]}`.
    pub g: Vec<Vec<f64>>,
    pub g_exp: Vec<i32>,
    /// `ξ_N = Σ_k xi[N][k] |α_k⟩ · 2^{xi_exp[N]}`, for `N ≥ 1`.
    pub xi: Vec<Vec<f64>>,
    pub xi_exp: Vec<i32>,
}

/// Grows the α basis from `|1⟩` until left and right contractions with
/// `|2̄⟩` close on it. New directions are orthonormalised against the basis,
/// so `A` is the identity up to rounding.
///
/// Both contractions map singlets to singlets, so the basis is grown in
/// coordinates of the singlet sector; rounding noise outside it would
/// otherwise grow with each orthogonalisation and inflate the basis.
pub fn derive_alpha_basis(base: &BaseStates, kdim_cap: usize) -> Result<RecursionTable> {
    let singlets = singlet_sector(base.height);
    let to_sector = |v: &[f64]| project(&singlets, v).0;
    let from_sector = |c: &[f64]| {
        let mut v = vec![0.0; 1 << base.height];
        for (q, &x) in singlets.iter().zip(c) {
            v.iter_mut().zip(q).for_each(|(a, y)| *a += x * y);
        }
        v
    };
    // Growth runs in singlet-sector coordinates.
    let mut coords: Vec<Vec<f64>> = vec![to_sector(&base.one()?.amplitudes)];
    let mut basis: Vec<Vec<f64>> = vec![base.one()?.amplitudes.clone()];
    let mut images: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut next = 0;
    while next < basis.len() {
        let l = to_sector(&base.contract_left(&basis[next])?);
        let r = to_sector(&base.contract_right(&basis[next])?);
        for v in [&l, &r] {
            let (_, rest) = project(&coords, v);
            let (_, mut rest) = project(&coords, &rest);
            let norm = dot(&rest, &rest).sqrt();
            if norm > CLOSURE_TOL * dot(v, v).sqrt() {
                rest.iter_mut().for_each(|x| *x /= norm);
                basis.push(from_sector(&rest));
                coords.push(rest);
                if basis.len() > kdim_cap {
                    return Err(Error::BasisBlowup { cap: kdim_cap });
                }
            }
        }
        images.push((from_sector(&l), from_sector(&r)));
        next += 1;
    }
    let k = basis.len();
    let a = DMatrix::from_fn(k, k, |i, j| dot(&basis[i], &basis[j]));
    let mut alpha = DMatrix::zeros(k, k);
    let mut alpha_right = DMatrix::zeros(k, k);
    let mut worst = 0.0f64;
    for (j, (l, r)) in images.iter().enumerate() {
        let (cl, rl) = project(&basis, l);
        let (cr, rr) = project(&basis, r);
        worst = worst.max(dot(&rl, &rl).sqrt()).max(dot(&rr, &rr).sqrt());
        for i in 0..k {
            alpha[(i, j)] = cl[i];
            alpha_right[(i, j)] = cr[i];
        }
    }
    let bar = base.two_bar()?;
    Ok(RecursionTable {
        height: base.height,
        k_dim: k,
        a,
        alpha,
        alpha_right,
        closure_residual: worst,
        z1: dot(&basis[0], &basis[0]),
        z2_bar: bar.norm_squared(),
        one_shift_sign: base.one_shift_sign(),
        basis,
        z: Vec::new(),
        y: Vec::new(),
        g: Vec::new(),
        g_exp: Vec::new(),
        xi: Vec::new(),
        xi_exp: Vec::new(),
    })
}

/// Orthonormal basis of the total-spin-zero states of `h` spins.
pub fn singlet_sector(h: usize) -> Vec<Vec<f64>> {
    let words: Vec<usize> = (0..1usize << h)
        .filter(|w| 2 * w.count_ones() as usize == h)
        .collect();
    let index: std::collections::HashMap<usize, usize> =
        words.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let d = words.len();
    let mut s2 = DMatrix::<f64>::zeros(d, d);
    for (col, &w) in words.iter().enumerate() {
        s2[(col, col)] += 0.75 * h as f64;
        for i in 0..h {
            for j in i + 1..h {
                let (bi, bj) = (w >> i & 1, w >> j & 1);
                s2[(col, col)] += if bi == bj { 0.5 } else { -0.5 };
                if bi != bj {
                    let flipped = w ^ (1 << i) ^ (1 << j);
                    s2[(index[&flipped], col)] += 1.0;
                }
            }
        }
    }
    let eig = s2.symmetric_eigen();
    (0..d)
        .filter(|&k| eig.eigenvalues[k].abs() < 1e-8)
        .map(|k| {
            let mut v = vec![0.0; 1 << h];
            for (i, &w) in words.iter().enumerate() {
                v[w] = eig.eigenvectors[(i, k)];
            }
            v
        })
        .collect()
}

/// Coefficients of `v` on an orthonormal basis and the remainder.
fn project(basis: &[Vec<f64>], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut rest = v.to_vec();
    let mut coeffs = Vec::with_capacity(basis.len());
    for b in basis {
        let c = dot(b, &rest);
        for (x, y) in rest.iter_mut().zip(b) {
            *x -= c * y;
        }
        coeffs.push(c);
    }
    (coeffs, rest)
}

fn renormalise(v: &mut [f64]) -> i32 {
    let big = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if big == 0.0 || !big.is_finite() {
        return 0;
    }
    let shift = big.log2().floor() as i32;
    let scale = 2f64.powi(-shift);
    v.iter_mut().for_each(|x| *x *= scale);
    shift
}

impl RecursionTable {
    /// Fills `Z_N`, `Y^j_N`, `g^i` and `ξ_N` up to `n_max`.
    ///
    /// Each step is carried in units of `2^{E_{N−1}}`, then renormalised so
    /// the stored mantissa of `Z_N` lies in `[1, 2)`.
    pub fn recurse_inner_products(mut self, n_max: usize) -> Result<Self> {
        let k = self.k_dim;
        let s1 = self.one_shift_sign;
        let a_col1: Vec<f64> = (0..k).map(|j| self.a[(j, 0)]).collect();
        let mut z = vec![Scaled {
            mantissa: Z_ZERO,
            exponent: 0,
        }];
        let mut y: Vec<Vec<f64>> = vec![vec![Y_ZERO; k]];
        for n in 1..=n_max {
            let e_prev = z[n - 1].exponent;
            let zm1 = z[n - 1].mantissa;
            let zm2 = if n >= 2 {
                z[n - 2].mantissa * 2f64.powi(z[n - 2].exponent - e_prev)
            } else {
                Z_MINUS_ONE
            };
            let sign = s1.powi(n as i32 - 1);
            let yp = &y[n - 1];
            let cross: f64 = (0..k).map(|i| self.alpha_right[(i, 0)] * yp[i]).sum();
            let zn = zm1 * self.z1 + zm2 * self.z2_bar + 2.0 * sign * cross;
            let yn: Vec<f64> = (0..k)
                .map(|j| {
                    sign * a_col1[j] * zm1
                        + (0..k).map(|i| self.alpha_right[(i, j)] * yp[i]).sum::<f64>()
                })
                .collect();
            if !zn.is_finite() || zn <= 0.0 || yn.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericOverflow(n));
            }
            let shift = zn.log2().floor() as i32;
            let scale = 2f64.powi(-shift);
            z.push(Scaled {
                mantissa: zn * scale,
                exponent: e_prev + shift,
            });
            y.push(yn.into_iter().map(|v| v * scale).collect());
        }
        let mut g = vec![{
            let mut e = vec![0.0; k];
            e[0] = 1.0;
            e
        }];
        let mut g_exp = vec![0];
        for i in 1..=n_max {
            let prev = &g[i - 1];
            let mut next: Vec<f64> = (0..k)
                .map(|j| (0..k).map(|kk| prev[kk] * self.alpha[(j, kk)]).sum())
                .collect();
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericOverflow(i));
            }
            let shift = renormalise(&mut next);
            g_exp.push(g_exp[i - 1] + shift);
            g.push(next);
        }
        let mut xi = vec![vec![0.0; k]];
        let mut xi_exp = vec![0];
        for n in 1..=n_max {
            let e_ref = (1..=n)
                .map(|i| z[n - i].exponent + g_exp[i])
                .max()
                .unwrap_or(0);
            let mut acc = vec![0.0; k];
            for i in 1..=n {
                let e = z[n - i].exponent + g_exp[i] - e_ref;
                if e < -1100 {
                    continue;
                }
                let w = z[n - i].mantissa * 2f64.powi(e) * s1.powi((n - i) as i32);
                for (x, gi) in acc.iter_mut().zip(&g[i]) {
                    *x += w * gi;
                }
            }
            let shift = renormalise(&mut acc);
            xi.push(acc);
            xi_exp.push(e_ref + shift);
        }
        self.z = z;
        self.y = y;
        self.g = g;
        self.g_exp = g_exp;
        self.xi = xi;
        self.xi_exp = xi_exp;
        Ok(self)
    }

    /// `Σ_k c_k |α_k⟩`.
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.basis[0].len()];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(b) {
                *o += c * x;
            }
        }
        out
    }

    pub fn dump(&self) -> TableDump {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        TableDump {
            height: self.height,
            k_dim: self.k_dim,
            alpha: rows(&self.alpha),
            alpha_right: rows(&self.alpha_right),
            a: rows(&self.a),
            z: self.z.iter().map(|s| (s.mantissa, s.exponent)).collect(),
            z2_bar: self.z2_bar,
            closure_residual: self.closure_residual,
            conventions: Conventions {
                z_minus_one: Z_MINUS_ONE,
                z_zero: Z_ZERO,
                y_zero: Y_ZERO,
                one_shift_sign: self.one_shift_sign,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub z_minus_one: f64,
    pub z_zero: f64,
    pub y_zero: f64,
    pub one_shift_sign: f64,
}

/// JSON form of a [`RecursionTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDump {
    pub height: usize,
    pub k_dim: usize,
    pub alpha: Vec<Vec<f64>>,
    pub alpha_right: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    /// `(mantissa, exponent)` with `Z = mantissa · 2^exponent`.
    pub z: Vec<(f64, i32)>,
    pub z2_bar: f64,
    pub closure_residual: f64,
    pub conventions: Conventions,
}

/// Overlap table of the periodic brick recursion on `n + 2` columns.
#[derive(Debug, Clone)]
pub struct ChiTable {
    pub height: usize,
    pub n: usize,
    pub z2: f64,
    /// `⟨χ_n|` on the last two columns, left column in the low bits.
    pub chi: Vec<f64>,
    /// One period of the alternating contraction, `T_even · T_odd`.
    pub transfer: DMatrix<f64>,
    two_even: DMatrix<f64>,
    two_odd: DMatrix<f64>,
}

impl ChiTable {
    /// `n` is the number of traced columns and must be even and positive.
    pub fn new(base: &BaseStates, n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidLattice("traced column count must be even".into()));
        }
        let h = base.height;
        let d = 1usize << h;
        let two = &base.two.amplitudes;
        let two_even = DMatrix::from_fn(d, d, |l, r| two[l | r << h]);
        let two_odd = &two_even * base.two_shift_sign();
        let transfer = &two_even * &two_odd;
        let mut p = two_odd.clone();
        for _ in 0..n / 2 {
            p = &p * &transfer;
        }
        // p[(x, z)]: x on the last column, z on the one before.
        let mut chi = vec![0.0; d * d];
        for x in 0..d {
            for zc in 0..d {
                chi[zc | x << h] = p[(x, zc)];
            }
        }
        Ok(ChiTable {
            height: h,
            n,
            z2: base.two.norm_squared(),
            chi,
            transfer,
            two_even,
            two_odd,
        })
    }

    /// `Z_n = Z₂^{n/2}`.
    pub fn z(&self, n: usize) -> f64 {
        self.z2.powi((n / 2) as i32)
    }

    /// `Z_n |2⟩⟨2| + Z_{n−2} ρ̄⊗ρ̄ + (|2⟩⟨χ_n| + h.c.)`, normalised.
    pub fn brick_rho2(&self, sites: Vec<usize>) -> Result<DensityMatrix> {
        let h = self.height;
        let d = 1usize << h;
        let dd = d * d;
        let two: Vec<f64> = (0..dd).map(|k| self.two_even[(k % d, k / d)]).collect();
        let rho_left = self.two_odd.transpose() * &self.two_odd;
        let rho_right = &self.two_odd * self.two_odd.transpose();
        let (zn, zn2) = (self.z(self.n), self.z(self.n - 2));
        let m = DMatrix::from_fn(dd, dd, |i, j| {
            let (zi, xi) = (i % d, i / d);
            let (zj, xj) = (j % d, j / d);
            zn * two[i] * two[j]
                + zn2 * rho_left[(zi, zj)] * rho_right[(xi, xj)]
                + two[i] * self.chi[j]
                + self.chi[i] * two[j]
        });
        DensityMatrix::from_real_unnormalized(sites, &m)
    }
}

/// The brick superposition on `m` columns: `2 × h` blocks on columns
/// `(0,1), (2,3), …` plus the same tiling shifted by one column around the
/// wrap.
pub fn brick_state(base: &BaseStates, m: usize) -> Result<PureState> {
    if m < 4 || m % 2 != 0 {
        return Err(Error::InvalidLattice("brick state needs an even m >= 4".into()));
    }
    let h = base.height;
    let two = base.two.to_pure()?;
    let sgn = base.two_shift_sign();
    let mut straight = two.clone();
    for _ in 1..m / 2 {
        straight = straight.tensor(&two)?;
    }
    // Shifted tiling: blocks (1,2), (3,4), …, and (m−1, 0).
    let odd = two.scaled(Complex64::new(sgn, 0.0))?;
    let mut inner = odd.clone();
    for _ in 1..m / 2 - 1 {
        inner = inner.tensor(&odd)?;
    }
    let cols_inner = m - 2;
    let lo_mask = (1u64 << h) - 1;
    let pairs = odd.entries().iter().flat_map(|&(kw, vw)| {
        let (left, right) = (kw & lo_mask, kw >> h);
        inner.entries().iter().map(move |&(ki, vi)| {
            let word = right | ki << h | left << ((cols_inner + 1) * h);
            (word, vw * vi)
        })
    });
    let shifted = PureState::from_pairs(m * h, pairs)?;
    straight.add(&shifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_state_shapes() {
        let b = build_base_states(2).unwrap();
        assert_eq!(b.one.as_ref().unwrap().amplitudes.len(), 4);
        assert!((b.one.as_ref().unwrap().norm_squared() - 1.0).abs() < 1e-15);
        assert!(build_base_states(3).unwrap().one().is_err());
        assert!(matches!(
            build_base_states(13),
            Err(Error::HeightTooLarge { .. })
        ));
    }

    #[test]
    fn height_two_basis_is_one_dimensional() {
        let b = build_base_states(2).unwrap();
        let t = derive_alpha_basis(&b, DEFAULT_KDIM_CAP).unwrap();
        assert_eq!(t.k_dim, 1);
        assert!((t.a[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
