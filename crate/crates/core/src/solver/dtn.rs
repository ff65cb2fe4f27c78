//! Fourier–Bessel Dirichlet-to-Neumann map on the truncation circle.

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::geometry::MeshedDomain;
use crate::quadrature::GaussLegendre;
use crate::waves::bessel::hankel1_table;

use super::SolverError;

/// Multipliers lambda_m = kappa H_m'(kappa R) / H_m(kappa R) for |m| <= N.
#[derive(Debug, Clone, PartialEq)]
pub struct DtnMultipliers {
    pub kappa: f64,
    pub radius: f64,
    pub n: usize,
    /// indexed by m + N
    pub lambda: Vec<C>,
}

impl DtnMultipliers {
    pub fn get(&self, m: i64) -> C {
        self.lambda[(m + self.n as i64) as usize]
    }
}

/// Default mode cutoff ceil(kappa R) + 15.
pub fn default_cutoff(kappa: f64, r: f64) -> usize {
    (kappa * r).ceil() as usize + 15
}

pub fn dtn_coefficients(kappa: f64, r: f64, n: usize) -> Result<DtnMultipliers, SolverError> {
    if !(kappa * r > 0.0 && (kappa * r).is_finite()) {
        return Err(SolverError::Parameter(format!("kappa R = {} must be positive", kappa * r)));
    }
    let (h, dh) = hankel1_table(n, kappa * r)?;
    let mut lambda = vec![C::new(0.0, 0.0); 2 * n + 1];
    for m in 0..=n {
        let l = kappa * dh[m] / h[m];
        lambda[n + m] = l;
        lambda[n - m] = l;
    }
    Ok(DtnMultipliers { kappa, radius: r, n, lambda })
}

/// Dense DtN block on the truncation nodes:
/// T_ij = (R / 2 pi) sum_m lambda_m c_{i,-m} c_{j,m},
/// with c_{i,m} the integral of the hat function i against e^{-i m theta}.
#[derive(Debug, Clone)]
pub struct DtnBlock {
    pub nodes: Vec<usize>,
    /// row-major, nodes.len() squared
    pub values: Vec<C>,
}

pub fn dtn_block(mesh: &MeshedDomain, dtn: &DtnMultipliers) -> DtnBlock {
    let mut nodes: Vec<usize> = mesh.truncation_edges().flat_map(|e| [e.i, e.j]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let nb = nodes.len();
    let local = |k: usize| nodes.binary_search(&k).unwrap();
    let n = dtn.n as i64;
    let modes = (2 * n + 1) as usize;
    // c[i * modes + (m + n)]
    let mut c = vec![C::new(0.0, 0.0); nb * modes];
    let g = GaussLegendre::new(8);
    for e in mesh.truncation_edges() {
        let (pi, pj) = (mesh.vertices[e.i], mesh.vertices[e.j]);
        let ti = pi[1].atan2(pi[0]);
        let mut dt = pj[1].atan2(pj[0]) - ti;
        if dt > PI {
            dt -= 2.0 * PI;
        } else if dt <= -PI {
            dt += 2.0 * PI;
        }
        let (li, lj) = (local(e.i), local(e.j));
        for (t, w) in g.mapped(0.0, 1.0) {
            let th = ti + t * dt;
            for m in -n..=n {
                let ph = C::from_polar(w * dt, -(m as f64) * th);
                let k = (m + n) as usize;
                c[li * modes + k] += ph * (1.0 - t);
                c[lj * modes + k] += ph * t;
            }
        }
    }
    let scale = dtn.radius / (2.0 * PI);
    let mut values = vec![C::new(0.0, 0.0); nb * nb];
    for i in 0..nb {
        for j in i..nb {
            let mut s = C::new(0.0, 0.0);
            for m in -n..=n {
                s += dtn.get(m) * c[i * modes + (n - m) as usize] * c[j * modes + (m + n) as usize];
            }
            values[i * nb + j] = s * scale;
            values[j * nb + i] = s * scale;
        }
    }
    DtnBlock { nodes, values }
}
