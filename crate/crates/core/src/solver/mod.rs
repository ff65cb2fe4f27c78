//! P1 finite elements for the scattered field of the transmission problem
//! on the truncation disk, closed by the Fourier–Bessel DtN map.

pub mod dtn;
pub mod field;

use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use thiserror::Error;

use crate::coefficients::{CoefficientField, Mat2, IDENTITY};
use crate::geometry::{MeshError, MeshedDomain};
use crate::quadrature::TRI7;
use crate::waves::bessel::BesselError;
use crate::waves::IncidentWave;

pub use dtn::{default_cutoff, dtn_block, dtn_coefficients, DtnBlock, DtnMultipliers};
pub use field::{FieldData, FieldRole, WaveField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("truncation radius {r} does not exceed the scatterer extent {extent}")]
    Truncation { r: f64, extent: f64 },
    #[error("mode cutoff {n} below the minimum {min}")]
    Cutoff { n: usize, min: usize },
    #[error("coefficient not finite on triangle {0}")]
    UndefinedCoefficient(usize),
    #[error("non-finite nodal value at node {0}")]
    NonFinite(usize),
    #[error("mesh is not interface conforming: {0}")]
    NonConforming(String),
    #[error("near-singular system: relative residual {residual:e}, condition estimate {condition:e}")]
    Singular { residual: f64, condition: f64 },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// Required relative residual of the discrete solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct TransmissionProblem {
    pub mesh: Arc<MeshedDomain>,
    pub medium: Arc<CoefficientField>,
    pub incident: IncidentWave,
    pub n_modes: usize,
}

impl TransmissionProblem {
    pub fn new(mesh: Arc<MeshedDomain>, medium: Arc<CoefficientField>, incident: IncidentWave) -> Result<Self, SolverError> {
        let n = default_cutoff(medium.kappa, mesh.truncation_radius);
        Self::with_cutoff(mesh, medium, incident, n)
    }

    pub fn with_cutoff(
        mesh: Arc<MeshedDomain>,
        medium: Arc<CoefficientField>,
        incident: IncidentWave,
        n_modes: usize,
    ) -> Result<Self, SolverError> {
        let r = mesh.truncation_radius;
        let extent = medium
            .domain
            .sample_boundary(64)
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max);
        if !(r > extent) {
            return Err(SolverError::Truncation { r, extent });
        }
        let min = (medium.kappa * r).ceil() as usize + 10;
        if n_modes < min {
            return Err(SolverError::Cutoff { n: n_modes, min });
        }
        if (incident.kappa() - medium.kappa).abs() > 1e-14 * medium.kappa {
            return Err(SolverError::Parameter(format!(
                "incident wavenumber {} differs from medium wavenumber {}",
                incident.kappa(),
                medium.kappa
            )));
        }
        if mesh.interface_edges().next().is_none() {
            return Err(SolverError::NonConforming("no interface edges".into()));
        }
        Ok(TransmissionProblem { mesh, medium, incident, n_modes })
    }
}

/// The assembled pieces of the discrete system
/// (K - Z - T) u = b, with K the A-weighted stiffness, Z the zeroth-order
/// mass with weight kappa^2 rho (+ q in D) and T the DtN block.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub n: usize,
    /// summed (row, col, value), sorted by (col, row)
    pub stiffness: Vec<(usize, usize, f64)>,
    pub mass: Vec<(usize, usize, f64)>,
    pub dtn: DtnBlock,
    pub rhs: Vec<Vec<C>>,
}

struct Local {
    k: [[f64; 3]; 3],
    m: [[f64; 3]; 3],
    b: Vec<[C; 3]>,
}

fn local_system(
    mesh: &MeshedDomain,
    medium: &CoefficientField,
    waves: &[IncidentWave],
    t: usize,
) -> Result<Local, SolverError> {
    let tri = mesh.triangles[t];
    let p = tri.map(|k| mesh.vertices[k]);
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    if !(det > 0.0) {
        return Err(SolverError::NonConforming(format!("triangle {t} has signed area {}", 0.5 * det)));
    }
    let area = 0.5 * det;
    let gl = [
        [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
        [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
        [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
    ];
    let inside = mesh.inside[t];
    let k2 = medium.kappa * medium.kappa;
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    let mut b = vec![[C::new(0.0, 0.0); 3]; waves.len()];
    let pushforward = matches!(medium.medium, crate::coefficients::Medium::Pushforward { .. });
    if !inside && !pushforward {
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = area * (gl[i][0] * gl[j][0] + gl[i][1] * gl[j][1]);
                m[i][j] = k2 * area / 12.0 * if i == j { 2.0 } else { 1.0 };
            }
        }
        return Ok(Local { k, m, b });
    }
    let q = if inside { medium.q.unwrap_or(0.0) } else { 0.0 };
    for (l, w) in TRI7.iter() {
        let x = [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ];
        let (a, rho): (Mat2, f64) = medium.coef(x, inside);
        if a.iter().flatten().chain([&rho]).any(|v| !v.is_finite()) {
            return Err(SolverError::UndefinedCoefficient(t));
        }
        let wa = w * area;
        let zeroth = k2 * rho + q;
        for i in 0..3 {
            let ag = [a[0][0] * gl[i][0] + a[0][1] * gl[i][1], a[1][0] * gl[i][0] + a[1][1] * gl[i][1]];
            for j in 0..3 {
                k[i][j] += wa * (ag[0] * gl[j][0] + ag[1] * gl[j][1]);
                m[i][j] += wa * zeroth * l[i] * l[j];
            }
        }
        let dev = [[a[0][0] - IDENTITY[0][0], a[0][1]], [a[1][0], a[1][1] - IDENTITY[1][1]]];
        let src = zeroth - k2;
        let trivial = dev.iter().flatten().all(|&v| v == 0.0) && src == 0.0;
        if trivial {
            continue;
        }
        for (bw, wave) in b.iter_mut().zip(waves) {
            let jet = wave.jet(x);
            let dg = [
                jet.grad[0] * dev[0][0] + jet.grad[1] * dev[0][1],
                jet.grad[0] * dev[1][0] + jet.grad[1] * dev[1][1],
            ];
            for i in 0..3 {
                bw[i] += (-(dg[0] * gl[i][0] + dg[1] * gl[i][1]) + jet.value * src * l[i]) * wa;
            }
        }
    }
    // keep the discrete operator exactly symmetric
    for i in 0..3 {
        for j in 0..i {
            let s = 0.5 * (k[i][j] + k[j][i]);
            k[i][j] = s;
            k[j][i] = s;
        }
    }
    Ok(Local { k, m, b })
}

fn sum_triplets(mut v: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    v.sort_by_key(|&(i, j, _)| (j, i));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(v.len() / 3);
    for (i, j, x) in v {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += x,
            _ => out.push((i, j, x)),
        }
    }
    out
}

/// Assembles the system for several incident waves at once. Element
/// contributions are computed in parallel and reduced in a fixed order, so
/// the result does not depend on the thread count.
pub fn assemble_system(
    mesh: &MeshedDomain,
    medium: &CoefficientField,
    waves: &[IncidentWave],
    n_modes: usize,
) -> Result<AssembledSystem, SolverError> {
    let locals: Vec<Local> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| local_system(mesh, medium, waves, t))
        .collect::<Result<_, _>>()?;
    let n = mesh.num_vertices();
    let mut kt = Vec::with_capacity(9 * locals.len());
    let mut mt = Vec::with_capacity(9 * locals.len());
    let mut rhs = vec![vec![C::new(0.0, 0.0); n]; waves.len()];
    for (t, loc) in locals.iter().enumerate() {
        let tri = mesh.triangles[t];
        for i in 0..3 {
            for j in 0..3 {
                kt.push((tri[i], tri[j], loc.k[i][j]));
                mt.push((tri[i], tri[j], loc.m[i][j]));
            }
            for (r, b) in rhs.iter_mut().zip(&loc.b) {
                r[tri[i]] += b[i];
            }
        }
    }
    let dtn = dtn_coefficients(medium.kappa, mesh.truncation_radius, n_modes)?;
    let block = dtn_block(mesh, &dtn);
    Ok(AssembledSystem { n, stiffness: sum_triplets(kt), mass: sum_triplets(mt), dtn: block, rhs })
}

pub fn assemble_transmission_system(p: &TransmissionProblem) -> Result<AssembledSystem, SolverError> {
    assemble_system(&p.mesh, &p.medium, std::slice::from_ref(&p.incident), p.n_modes)
}

impl AssembledSystem {
    /// Entries of K - Z - T, summed and sorted by (col, row).
    pub fn matrix_triplets(&self) -> Vec<(usize, usize, C)> {
        let mut v: Vec<(usize, usize, C)> = Vec::with_capacity(self.stiffness.len() + self.dtn.values.len());
        v.extend(self.stiffness.iter().map(|&(i, j, x)| (i, j, C::new(x, 0.0))));
        v.extend(self.mass.iter().map(|&(i, j, x)| (i, j, C::new(-x, 0.0))));
        let nb = self.dtn.nodes.len();
        for (a, &i) in self.dtn.nodes.iter().enumerate() {
            for (b, &j) in self.dtn.nodes.iter().enumerate() {
                v.push((i, j, -self.dtn.values[a * nb + b]));
            }
        }
        v.sort_by_key(|&(i, j, _)| (j, i));
        let mut out: Vec<(usize, usize, C)> = Vec::with_capacity(v.len());
        for (i, j, x) in v {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += x,
                _ => out.push((i, j, x)),
            }
        }
        out
    }

    /// y = (K - Z - T) u
    pub fn apply(&self, u: &[C]) -> Vec<C> {
        let mut y = vec![C::new(0.0, 0.0); self.n];
        for &(i, j, x) in &self.stiffness {
            y[i] += u[j] * x;
        }
        for &(i, j, x) in &self.mass {
            y[i] -= u[j] * x;
        }
        let nb = self.dtn.nodes.len();
        for (a, &i) in self.dtn.nodes.iter().enumerate() {
            let mut s = C::new(0.0, 0.0);
            for (b, &j) in self.dtn.nodes.iter().enumerate() {
                s += self.dtn.values[a * nb + b] * u[j];
            }
            y[i] -= s;
        }
        y
    }

    fn one_norm(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for (_, j, x) in self.matrix_triplets() {
            col[j] += x.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Factorizes once and solves every right-hand side, with up to three
/// steps of iterative refinement; fails unless each relative residual is
/// below RESIDUAL_TOL (absolute when b = 0).
pub fn solve_system(sys: &AssembledSystem) -> Result<Vec<Vec<C>>, SolverError> {
    let n = sys.n;
    let trip: Vec<Triplet<usize, usize, C>> =
        sys.matrix_triplets().into_iter().map(|(i, j, x)| Triplet::new(i, j, x)).collect();
    let a = SparseColMat::<usize, C>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
    let k = sys.rhs.len();
    let solve = |cols: &[Vec<C>]| -> Vec<Vec<C>> {
        let b = Mat::<C>::from_fn(n, cols.len(), |i, j| cols[j][i]);
        let x = lu.solve(&b);
        (0..cols.len()).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect()
    };
    let mut xs = solve(&sys.rhs);
    for j in 0..k {
        let bn = norm(&sys.rhs[j]);
        let scale = if bn > 0.0 { bn } else { 1.0 };
        let mut res = f64::INFINITY;
        for _ in 0..4 {
            let ax = sys.apply(&xs[j]);
            let r: Vec<C> = sys.rhs[j].iter().zip(&ax).map(|(b, a)| b - a).collect();
            res = norm(&r) / scale;
            if res < RESIDUAL_TOL {
                break;
            }
            let d = solve(std::slice::from_ref(&r)).remove(0);
            for (x, dx) in xs[j].iter_mut().zip(d) {
                *x += dx;
            }
        }
        if !(res < RESIDUAL_TOL) {
            let cond = sys.one_norm() * norm(&xs[j]) / scale;
            return Err(SolverError::Singular { residual: res, condition: cond });
        }
    }
    Ok(xs)
}

/// Scattered fields for several incident waves sharing one factorization.
pub fn solve_scattered_fields(
    mesh: Arc<MeshedDomain>,
    medium: Arc<CoefficientField>,
    waves: &[IncidentWave],
) -> Result<Vec<WaveField>, SolverError> {
    let Some(first) = waves.first() else {
        return Ok(Vec::new());
    };
    let p = TransmissionProblem::new(mesh.clone(), medium.clone(), first.clone())?;
    for w in waves {
        TransmissionProblem::with_cutoff(mesh.clone(), medium.clone(), w.clone(), p.n_modes)?;
    }
    let sys = assemble_system(&mesh, &medium, waves, p.n_modes)?;
    solve_system(&sys)?
        .into_iter()
        .map(|u| WaveField::nodal(mesh.clone(), u, FieldRole::Scattered))
        .collect()
}

pub fn solve_scattered_field(p: &TransmissionProblem) -> Result<WaveField, SolverError> {
    let sys = assemble_transmission_system(p)?;
    let u = solve_system(&sys)?.remove(0);
    WaveField::nodal(p.mesh.clone(), u, FieldRole::Scattered)
}

/// L2(D) norm of the incident wave over the scatterer triangles.
pub fn incident_l2_norm(mesh: &MeshedDomain, w: &IncidentWave) -> f64 {
    let mut s = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !mesh.inside[t] {
            continue;
        }
        let p = tri.map(|k| mesh.vertices[k]);
        let area = mesh.signed_area(t);
        for (l, wq) in TRI7.iter() {
            let x = [
                l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
                l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
            ];
            s += wq * area * w.value(x).norm_sqr();
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk_domain, build_sector_domain, mesh_domain};
    use crate::waves::{fourier_bessel_wave, hankel1, plane_wave};

    fn disk_setup(rho: f64, h: f64) -> (Arc<MeshedDomain>, Arc<CoefficientField>) {
        let d = build_disk_domain([0.0, 0.0], 0.5).unwrap();
        let mesh = Arc::new(mesh_domain(&d, h, 1.0).unwrap());
        let med = Arc::new(CoefficientField::constant_contrast(d, 1.0, rho).unwrap());
        (mesh, med)
    }

    #[test]
    fn dtn_multipliers() {
        for kr in [1.0, 5.0, 10.0] {
            let d = dtn_coefficients(1.0, kr, 40).unwrap();
            for m in 0..=40 {
                assert_eq!(d.get(m), d.get(-m));
                assert!(d.get(m).im > 0.0, "m = {m}, kR = {kr}");
            }
        }
        // outgoing mode: d_r u = lambda_m u on r = R
        let (k, r, m) = (1.3, 1.7, 4);
        let d = dtn_coefficients(k, r, 10).unwrap();
        let e = 1e-6;
        let dr = (hankel1(m, k * (r + e)).unwrap() - hankel1(m, k * (r - e)).unwrap()) / (2.0 * e);
        assert!((dr - d.get(m as i64) * hankel1(m, k * r).unwrap()).norm() < 1e-7);
        assert!(dtn_coefficients(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn identity_medium_gives_exact_zero() {
        let (mesh, med) = disk_setup(1.0, 0.1);
        let w = plane_wave(1.0, [0.6, 0.8]).unwrap();
        let sys = assemble_system(&mesh, &med, &[w.clone()], 30).unwrap();
        assert!(sys.rhs[0].iter().all(|z| *z == C::new(0.0, 0.0)));
        let u = solve_scattered_fields(mesh, med, &[w]).unwrap().remove(0);
        assert!(u.nodal_values().unwrap().iter().all(|z| *z == C::new(0.0, 0.0)));
    }

    #[test]
    fn matrix_is_complex_symmetric_and_stiffness_kills_constants() {
        let (mesh, med) = disk_setup(2.0, 0.1);
        let sys = assemble_system(&mesh, &med, &[], 30).unwrap();
        let trip = sys.matrix_triplets();
        let map: std::collections::HashMap<(usize, usize), C> = trip.iter().map(|&(i, j, x)| ((i, j), x)).collect();
        for (&(i, j), x) in &map {
            let y = map.get(&(j, i)).copied().unwrap_or_default();
            assert!((x - y).norm() <= 1e-14 * x.norm().max(1.0));
        }
        let mut rows = vec![0.0; sys.n];
        for &(i, _, x) in &sys.stiffness {
            rows[i] += x;
        }
        assert!(rows.iter().all(|r| r.abs() < 1e-12));
        // the DtN block is not Hermitian
        let nb = sys.dtn.nodes.len();
        assert!((0..nb).any(|a| sys.dtn.values[a * nb + a].im.abs() > 1e-8));
    }

    #[test]
    fn solve_meets_residual_and_is_thread_count_independent() {
        let d = build_sector_domain(3.0 * std::f64::consts::PI / 4.0, 1.0).unwrap();
        let mesh = Arc::new(mesh_domain(&d, 0.1, 1.5).unwrap());
        let med = Arc::new(CoefficientField::constant_contrast(d, 1.0, 2.0).unwrap());
        let w = fourier_bessel_wave(1.0, 1).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| assemble_system(&mesh, &med, &[w.clone()], 30).unwrap());
        let b = assemble_system(&mesh, &med, &[w.clone()], 30).unwrap();
        assert_eq!(a.stiffness, b.stiffness);
        assert_eq!(a.mass, b.mass);
        assert_eq!(a.rhs, b.rhs);
        let x = solve_system(&b).unwrap().remove(0);
        let r: Vec<C> = b.apply(&x).iter().zip(&b.rhs[0]).map(|(p, q)| p - q).collect();
        assert!(norm(&r) / norm(&b.rhs[0]) < RESIDUAL_TOL);
        assert!(x.iter().any(|z| z.norm() > 1e-3));
    }

    #[test]
    fn problem_validation() {
        let (mesh, med) = disk_setup(2.0, 0.1);
        let w = plane_wave(1.0, [1.0, 0.0]).unwrap();
        assert!(matches!(
            TransmissionProblem::with_cutoff(mesh.clone(), med.clone(), w.clone(), 5),
            Err(SolverError::Cutoff { .. })
        ));
        let w2 = plane_wave(2.0, [1.0, 0.0]).unwrap();
        assert!(matches!(TransmissionProblem::new(mesh.clone(), med.clone(), w2), Err(SolverError::Parameter(_))));
        let d = build_disk_domain([0.0, 0.0], 0.5).unwrap();
        let small = Arc::new(mesh_domain(&build_disk_domain([0.0, 0.0], 0.2).unwrap(), 0.04, 0.45).unwrap());
        let med = Arc::new(CoefficientField::constant_contrast(d, 1.0, 2.0).unwrap());
        assert!(matches!(TransmissionProblem::new(small, med, w), Err(SolverError::Truncation { .. })));
    }

    #[test]
    fn field_text_roundtrip() {
        let (mesh, med) = disk_setup(2.0, 0.1);
        let w = plane_wave(1.0, [1.0, 0.0]).unwrap();
        let u = solve_scattered_fields(mesh.clone(), med, &[w]).unwrap().remove(0);
        let text = u.to_text().unwrap();
        let v = WaveField::from_text(&text, [0.5, 0.0], FieldRole::Scattered).unwrap();
        assert_eq!(u.nodal_values(), v.nodal_values());
        let p = [0.3, -0.2];
        assert_eq!(u.value(p), v.value(p));
    }
}
