use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::PureState;
use crate::error::{Error, Result};

/// Largest subsystem `partial_trace` will build by default.
pub const DEFAULT_TRACE_CAP: usize = 12;

const CLIP_TOL: f64 = 1e-12;

/// Reduced state of an ordered list of sites; bit `j` of a row index is the
/// spin at `sites[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sites: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(sites: Vec<usize>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = 1usize << sites.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidSites(format!(
                "{} sites need a {d}x{d} matrix",
                sites.len()
            )));
        }
        Ok(DensityMatrix { sites, matrix })
    }

    /// Builds from a real symmetric matrix and rescales to unit trace.
    pub fn from_real_unnormalized(sites: Vec<usize>, matrix: &DMatrix<f64>) -> Result<Self> {
        let tr = matrix.trace();
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::NotPhysical(format!("trace {tr}")));
        }
        Self::new(sites, matrix.map(|x| Complex64::new(x / tr, 0.0)))
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    fn conserves_sz(m: &DMatrix<Complex64>) -> bool {
        let d = m.nrows();
        (0..d).all(|i| {
            (0..d).all(|j| (i.count_ones() == j.count_ones()) || m[(i, j)].norm() < 1e-13)
        })
    }

    /// Eigenvalues in descending order, without clipping.
    pub fn raw_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Eigenvalues in descending order, clipped to `[0, 1]` within 1e-12.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev = self.raw_eigenvalues();
        for x in &mut ev {
            if *x < 0.0 {
                if *x < -CLIP_TOL {
                    return Err(Error::NotPhysical(format!("eigenvalue {x:e}")));
                }
                *x = 0.0;
            } else if *x > 1.0 {
                if *x > 1.0 + CLIP_TOL {
                    return Err(Error::NotPhysical(format!("eigenvalue {x}")));
                }
                *x = 1.0;
            }
        }
        Ok(ev)
    }

    pub fn lambda_sq_max(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Reduced state on `keep`, given as positions into `self.sites()`.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let p = self.sites.len();
        if keep.iter().any(|&k| k >= p) {
            return Err(Error::InvalidSites("marginal position out of range".into()));
        }
        let keep_mask: usize = keep.iter().map(|&k| 1 << k).sum();
        let d = self.dim();
        let dk = 1usize << keep.len();
        let gather = |i: usize| -> usize {
            keep.iter()
                .enumerate()
                .map(|(j, &k)| (i >> k & 1) << j)
                .sum()
        };
        let mut out = DMatrix::<Complex64>::zeros(dk, dk);
        for i in 0..d {
            for j in 0..d {
                if i & !keep_mask == j & !keep_mask {
                    out[(gather(i), gather(j))] += self.matrix[(i, j)];
                }
            }
        }
        DensityMatrix::new(keep.iter().map(|&k| self.sites[k]).collect(), out)
    }

    /// `½‖self − other‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidSites("dimension mismatch".into()));
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>())
    }
}

/// Eigenvalues of a Hermitian matrix, descending; solved per `S^z` block when
/// the matrix conserves magnetisation.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let d = m.nrows();
    let mut ev = Vec::with_capacity(d);
    if d > 2 && DensityMatrix::conserves_sz(m) {
        let bits = d.trailing_zeros();
        for w in 0..=bits {
            let idx: Vec<usize> = (0..d).filter(|i| i.count_ones() == w).collect();
            let block = DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
            ev.extend(SymmetricEigen::new(block).eigenvalues.iter().copied());
        }
    } else {
        ev.extend(SymmetricEigen::new(m.clone()).eigenvalues.iter().copied());
    }
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `ρ = Tr_{complement}|ψ⟩⟨ψ| / ⟨ψ|ψ⟩` with the default subsystem cap.
pub fn partial_trace(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_with_cap(state, keep, DEFAULT_TRACE_CAP)
}

pub fn partial_trace_with_cap(
    state: &PureState,
    keep: &[usize],
    cap: usize,
) -> Result<DensityMatrix> {
    let n = state.num_sites();
    if keep.is_empty() || keep.len() >= n {
        return Err(Error::InvalidSites(
            "keep must be a nonempty proper subset".into(),
        ));
    }
    if keep.iter().any(|&s| s >= n) {
        return Err(Error::InvalidSites("site out of range".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::InvalidSites("repeated site".into()));
    }
    if keep.len() > cap {
        return Err(Error::SubsystemTooLarge {
            size: keep.len(),
            cap,
        });
    }
    let keep_mask: u64 = keep.iter().map(|&s| 1u64 << s).sum();
    let mut rows: Vec<(u64, usize, Complex64)> = state
        .entries()
        .iter()
        .map(|&(k, v)| {
            let sys = keep
                .iter()
                .enumerate()
                .map(|(j, &s)| ((k >> s & 1) as usize) << j)
                .sum();
            (k & !keep_mask, sys, v)
        })
        .collect();
    rows.sort_unstable_by_key(|r| (r.0, r.1));
    let d = 1usize << keep.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); d * d];
    let mut start = 0;
    while start < rows.len() {
        let env = rows[start].0;
        let mut end = start;
        while end < rows.len() && rows[end].0 == env {
            end += 1;
        }
        let group = &rows[start..end];
        for &(_, i, x) in group {
            let row = &mut acc[i * d..(i + 1) * d];
            for &(_, j, y) in group {
                row[j] += x * y.conj();
            }
        }
        start = end;
    }
    let norm = state.norm_squared();
    let matrix = DMatrix::from_row_slice(d, d, &acc).map(|z| z / norm);
    DensityMatrix::new(keep.to_vec(), matrix)
}

/// Largest Schmidt coefficient across the split `part : rest`.
pub fn schmidt_lambda_max(state: &PureState, part: &[usize]) -> Result<f64> {
    let rho = partial_trace(state, part)?;
    Ok(rho.lambda_sq_max()?.sqrt())
}

/// `−Σ λ log₂ λ` over eigenvalues of at least 1e-14.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .filter(|&x| x >= 1e-14)
        .map(|x| -x * x.log2())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::statevec::build_rvb;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn singlet_halves() {
        let st = build_rvb(&LatticeSpec::open(1, 2).unwrap()).unwrap();
        let rho = partial_trace(&st, &[0]).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(rho.matrix()[(0, 1)].norm() < 1e-15);
        assert!((schmidt_lambda_max(&st, &[0]).unwrap().powi(2) - 0.5).abs() < 1e-14);
        assert!((von_neumann_entropy(&rho).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn product_state_is_pure() {
        let st = PureState::basis(2, 0).unwrap();
        assert!((schmidt_lambda_max(&st, &[0]).unwrap() - 1.0).abs() < 1e-14);
        let rho = partial_trace(&st, &[1]).unwrap();
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-14);
    }

    #[test]
    fn complement_spectrum_matches() {
        let st = build_rvb(&LatticeSpec::open(2, 2).unwrap()).unwrap();
        let big = partial_trace(&st, &[1, 2, 3]).unwrap().eigenvalues().unwrap();
        assert!((big[0] - 0.5).abs() < 1e-12 && (big[1] - 0.5).abs() < 1e-12);
        assert!(big[2..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn marginal_of_pair() {
        let st = build_rvb(&LatticeSpec::open(2, 2).unwrap()).unwrap();
        let rho = partial_trace(&st, &[0, 1, 2]).unwrap();
        let direct = partial_trace(&st, &[0, 2]).unwrap();
        let m = rho.marginal(&[0, 2]).unwrap();
        assert!(m.trace_distance(&direct).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_bad_keep() {
        let st = PureState::from_pairs(2, [(0, c(1.0))]).unwrap();
        assert!(partial_trace(&st, &[]).is_err());
        assert!(partial_trace(&st, &[0, 1]).is_err());
        assert!(partial_trace(&st, &[0, 0]).is_err());
        let big = PureState::basis(20, 0).unwrap();
        let keep: Vec<usize> = (0..13).collect();
        assert!(matches!(
            partial_trace(&big, &keep),
            Err(Error::SubsystemTooLarge { .. })
        ));
    }
}
