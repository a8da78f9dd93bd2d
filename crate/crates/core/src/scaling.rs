//! Finite-size scaling of GGM sequences with `g = g_c + s·k·n^(−x)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 4;
pub const GRADIENT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 500;

/// Lattice family of a sample: even × even or even × odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFamily {
    Perfect,
    Imperfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchKind {
    Exhaustive,
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub n_total: usize,
    pub g: f64,
    pub family: SampleFamily,
    pub search: SearchKind,
}

impl ScalingSample {
    pub fn new(n_total: usize, g: f64, family: SampleFamily, search: SearchKind) -> Self {
        ScalingSample {
            n_total,
            g,
            family,
            search,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub g_c: f64,
    pub k: f64,
    pub x: f64,
    /// `+1` when the sequence approaches `g_c` from above.
    pub sign: i8,
    pub residual_rms: f64,
    /// Covariance of `(g_c, k, x)`, `σ̂²(JᵀJ)⁻¹` with `σ̂²` from the residuals.
    pub covariance: [[f64; 3]; 3],
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl ScalingFit {
    /// One-sigma uncertainty of `g_c`.
    pub fn g_c_sigma(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }
}

/// `g_c + s·k·n^(−x)`; `n = ∞` gives `g_c`.
pub fn extrapolate(fit: &ScalingFit, n: f64) -> f64 {
    if n.is_infinite() {
        return fit.g_c;
    }
    fit.g_c + f64::from(fit.sign) * fit.k * n.powf(-fit.x)
}

struct Problem {
    n: Vec<f64>,
    g: Vec<f64>,
    sign: f64,
}

impl Problem {
    fn residuals(&self, p: &Vector3<f64>) -> Vec<f64> {
        self.n
            .iter()
            .zip(&self.g)
            .map(|(&n, &g)| p[0] + self.sign * p[1] * n.powf(-p[2]) - g)
            .collect()
    }

    fn jacobian(&self, p: &Vector3<f64>) -> Vec<Vector3<f64>> {
        self.n
            .iter()
            .map(|&n| {
                let t = n.powf(-p[2]);
                Vector3::new(1.0, self.sign * t, -self.sign * p[1] * t * n.ln())
            })
            .collect()
    }

    fn normal(&self, p: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>, f64) {
        let r = self.residuals(p);
        let jac = self.jacobian(p);
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (j, &ri) in jac.iter().zip(&r) {
            jtj += j * j.transpose();
            jtr += j * ri;
        }
        (jtj, jtr, r.iter().map(|x| x * x).sum())
    }
}

fn initial_guess(prob: &Problem) -> Result<Vector3<f64>> {
    let len = prob.n.len();
    let g_c = 0.5 * (prob.g[len - 1] + prob.g[len - 2]);
    let pts: Vec<(f64, f64)> = prob
        .n
        .iter()
        .zip(&prob.g)
        .take(len - 2)
        .map(|(&n, &g)| (n.ln(), (g - g_c).abs()))
        .filter(|&(_, d)| d > 0.0)
        .map(|(ln, d)| (ln, d.ln()))
        .collect();
    let scale = prob.g.iter().fold(0.0f64, |a, g| a.max(g.abs())).max(1e-300);
    let spread = prob.g.iter().map(|g| (g - g_c).abs()).fold(0.0, f64::max);
    if spread <= 1e-14 * scale {
        return Err(Error::DegenerateFit {
            reason: "constant data".into(),
            g_c,
            k: 0.0,
        });
    }
    let (x, ln_k) = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        (-slope, my - slope * mx)
    } else {
        let (ln, d) = pts.first().copied().unwrap_or((prob.n[0].ln(), spread.ln()));
        (1.0, d + ln)
    };
    let x = if x.is_finite() && x > 0.05 { x } else { 1.0 };
    let k = if ln_k.is_finite() { ln_k.exp() } else { spread };
    Ok(Vector3::new(g_c, k, x))
}

/// Least-squares fit of `g = g_c + s·k·n^(−x)`; `s` follows the trend of
/// the data, `+1` when the last sample lies below the first.
pub fn fit_scaling(samples: &[ScalingSample]) -> Result<ScalingFit> {
    let mut pts: Vec<(usize, f64)> = samples.iter().map(|s| (s.n_total, s.g)).collect();
    pts.sort_by_key(|p| p.0);
    pts.dedup_by_key(|p| p.0);
    if pts.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            need: MIN_SAMPLES,
            got: pts.len(),
        });
    }
    if pts.len() != samples.len() {
        return Err(Error::InvalidSites("sample sizes must be distinct".into()));
    }
    if pts.iter().any(|p| !p.1.is_finite() || p.0 == 0) {
        return Err(Error::InvalidSites("samples need finite g and positive n".into()));
    }
    let (first, last) = (pts[0].1, pts[pts.len() - 1].1);
    let prob = Problem {
        n: pts.iter().map(|p| p.0 as f64).collect(),
        g: pts.iter().map(|p| p.1).collect(),
        sign: if last <= first { 1.0 } else { -1.0 },
    };
    let mut p = initial_guess(&prob)?;
    let (mut jtj, mut jtr, mut cost) = prob.normal(&p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        if jtr.norm() < GRADIENT_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj;
            for i in 0..3 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let (tjtj, tjtr, tcost) = prob.normal(&trial);
            if tcost.is_finite() && tcost <= cost {
                let moved = step.norm() > 0.0 && trial != p;
                p = trial;
                (jtj, jtr, cost) = (tjtj, tjtr, tcost);
                lambda = (lambda * 0.1).max(1e-15);
                accepted = moved;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No step lowers the cost: the minimum is resolved to rounding.
            converged = jtr.norm() < 1e-9 * (1.0 + cost.sqrt());
            break;
        }
    }
    let sign = prob.sign as i8;
    if !converged {
        return Err(Error::DegenerateFit {
            reason: format!("no convergence in {MAX_ITERATIONS} iterations"),
            g_c: p[0],
            k: p[1],
        });
    }
    if !(p[2] > 0.0) || !(p[1] > 0.0) {
        return Err(Error::DegenerateFit {
            reason: format!("non-decaying correction (k = {}, x = {})", p[1], p[2]),
            g_c: p[0],
            k: p[1],
        });
    }
    let residuals = prob.residuals(&p);
    let m = residuals.len() as f64;
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let sigma2 = rss / (m - 3.0);
    let cov = match jtj.try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => inv * sigma2,
        _ => {
            return Err(Error::DegenerateFit {
                reason: format!("singular normal matrix at x = {}", p[2]),
                g_c: p[0],
                k: p[1],
            })
        }
    };
    let covariance = [0, 1, 2].map(|i| [0, 1, 2].map(|j| cov[(i, j)]));
    Ok(ScalingFit {
        g_c: p[0],
        k: p[1],
        x: p[2],
        sign,
        residual_rms: (rss / m).sqrt(),
        covariance,
        residuals,
        iterations,
    })
}
