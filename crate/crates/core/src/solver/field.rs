//! Scalar complex fields on a mesh (piecewise linear) or in closed form.

use std::fmt::Write;
use std::sync::Arc;

use num_complex::Complex64 as C;

use crate::geometry::{MeshedDomain, TriangleLocator};
use crate::waves::IncidentWave;

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    Scattered,
    Total,
    Manufactured,
    ClosedForm,
}

/// Value and gradient at a point.
pub type ClosedFn = Arc<dyn Fn([f64; 2]) -> (C, [C; 2]) + Send + Sync>;

#[derive(Clone)]
pub enum FieldData {
    Nodal {
        mesh: Arc<MeshedDomain>,
        locator: Arc<TriangleLocator>,
        values: Vec<C>,
        /// added analytically on evaluation (total fields)
        incident: Option<IncidentWave>,
    },
    Closed { eval: ClosedFn, radius: f64 },
}

#[derive(Clone)]
pub struct WaveField {
    pub role: FieldRole,
    pub data: FieldData,
}

impl std::fmt::Debug for WaveField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.data {
            FieldData::Nodal { values, .. } => write!(f, "WaveField({:?}, {} nodes)", self.role, values.len()),
            FieldData::Closed { radius, .. } => write!(f, "WaveField({:?}, closed form on B_{radius})", self.role),
        }
    }
}

impl WaveField {
    pub fn nodal(mesh: Arc<MeshedDomain>, values: Vec<C>, role: FieldRole) -> Result<Self, SolverError> {
        if values.len() != mesh.num_vertices() {
            return Err(SolverError::Format(format!(
                "{} values for {} nodes",
                values.len(),
                mesh.num_vertices()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(SolverError::NonFinite(k));
        }
        let locator = Arc::new(TriangleLocator::new(&mesh.vertices, &mesh.triangles));
        Ok(WaveField { role, data: FieldData::Nodal { mesh, locator, values, incident: None } })
    }

    /// Closed-form field on the disk of the given radius about the origin.
    pub fn closed_form(
        role: FieldRole,
        radius: f64,
        eval: impl Fn([f64; 2]) -> (C, [C; 2]) + Send + Sync + 'static,
    ) -> Self {
        WaveField { role, data: FieldData::Closed { eval: Arc::new(eval), radius } }
    }

    /// Total field u^sc + u^inc from a nodal scattered field.
    pub fn total(&self, w: &IncidentWave) -> Self {
        let mut out = self.clone();
        out.role = FieldRole::Total;
        match &mut out.data {
            FieldData::Nodal { incident, .. } => *incident = Some(w.clone()),
            FieldData::Closed { eval, .. } => {
                let (f, w) = (eval.clone(), w.clone());
                *eval = Arc::new(move |x| {
                    let (v, g) = f(x);
                    let j = w.jet(x);
                    (v + j.value, [g[0] + j.grad[0], g[1] + j.grad[1]])
                });
            }
        }
        out
    }

    pub fn scaled(&self, alpha: C) -> Self {
        let mut out = self.clone();
        match &mut out.data {
            FieldData::Nodal { values, incident, .. } => {
                for v in values.iter_mut() {
                    *v *= alpha;
                }
                if let Some(w) = incident.take() {
                    *incident = Some(IncidentWave::Superposition {
                        kappa: w.kappa(),
                        terms: vec![(alpha, w)],
                    });
                }
            }
            FieldData::Closed { eval, .. } => {
                let f = eval.clone();
                *eval = Arc::new(move |x| {
                    let (v, g) = f(x);
                    (alpha * v, [alpha * g[0], alpha * g[1]])
                });
            }
        }
        out
    }

    pub fn mesh(&self) -> Option<&Arc<MeshedDomain>> {
        match &self.data {
            FieldData::Nodal { mesh, .. } => Some(mesh),
            FieldData::Closed { .. } => None,
        }
    }

    pub fn nodal_values(&self) -> Option<&[C]> {
        match &self.data {
            FieldData::Nodal { values, .. } => Some(values),
            FieldData::Closed { .. } => None,
        }
    }

    /// Radius of the disk about the origin on which the field is defined.
    pub fn domain_radius(&self) -> f64 {
        match &self.data {
            FieldData::Nodal { mesh, .. } => mesh.truncation_radius,
            FieldData::Closed { radius, .. } => *radius,
        }
    }

    /// Largest distance from the origin of a scatterer boundary node
    /// (0 for closed-form fields).
    pub fn scatterer_extent(&self) -> f64 {
        match &self.data {
            FieldData::Nodal { mesh, .. } => mesh
                .interface_edges()
                .map(|e| {
                    let p = mesh.vertices[e.i];
                    p[0].hypot(p[1])
                })
                .fold(0.0, f64::max),
            FieldData::Closed { .. } => 0.0,
        }
    }

    /// Diameter of the element containing x (0 for closed-form fields).
    pub fn local_mesh_size(&self, x: [f64; 2]) -> Option<f64> {
        match &self.data {
            FieldData::Nodal { mesh, locator, .. } => {
                let (t, _) = locator.locate(x, mesh.mesh_size * mesh.mesh_size)?;
                let p = mesh.triangles[t].map(|k| mesh.vertices[k]);
                let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
                Some(d(p[0], p[1]).max(d(p[1], p[2])).max(d(p[2], p[0])))
            }
            FieldData::Closed { .. } => Some(0.0),
        }
    }

    /// Value and gradient, or None outside the field's domain.
    pub fn eval(&self, x: [f64; 2]) -> Option<(C, [C; 2])> {
        match &self.data {
            FieldData::Nodal { mesh, locator, values, incident } => {
                let (t, l) = locator.locate(x, mesh.mesh_size * mesh.mesh_size)?;
                let tri = mesh.triangles[t];
                let p = tri.map(|k| mesh.vertices[k]);
                let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
                let gl = [
                    [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
                    [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
                    [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
                ];
                let mut v = C::new(0.0, 0.0);
                let mut g = [C::new(0.0, 0.0); 2];
                for k in 0..3 {
                    let u = values[tri[k]];
                    v += u * l[k];
                    g[0] += u * gl[k][0];
                    g[1] += u * gl[k][1];
                }
                if let Some(w) = incident {
                    let j = w.jet(x);
                    v += j.value;
                    g[0] += j.grad[0];
                    g[1] += j.grad[1];
                }
                Some((v, g))
            }
            FieldData::Closed { eval, radius } => {
                if x[0].hypot(x[1]) > *radius * (1.0 + 1e-12) {
                    return None;
                }
                Some(eval(x))
            }
        }
    }

    pub fn value(&self, x: [f64; 2]) -> Option<C> {
        self.eval(x).map(|e| e.0)
    }

    pub fn grad(&self, x: [f64; 2]) -> Option<[C; 2]> {
        self.eval(x).map(|e| e.1)
    }

    /// Mesh text format followed by one `re im` line per node.
    pub fn to_text(&self) -> Result<String, SolverError> {
        match &self.data {
            FieldData::Nodal { mesh, values, .. } => {
                let mut s = mesh.to_text();
                for v in values {
                    writeln!(s, "{:.16e} {:.16e}", v.re, v.im).unwrap();
                }
                Ok(s)
            }
            FieldData::Closed { .. } => Err(SolverError::Format("closed-form fields have no nodal text form".into())),
        }
    }

    pub fn from_text(text: &str, corner: [f64; 2], role: FieldRole) -> Result<Self, SolverError> {
        let (mesh, used) = MeshedDomain::from_text(text, corner)?;
        let mut values = Vec::with_capacity(mesh.num_vertices());
        for line in text.lines().skip(used).filter(|l| !l.trim().is_empty()) {
            let f: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| SolverError::Format(format!("bad value line '{line}'")))?;
            if f.len() != 2 {
                return Err(SolverError::Format(format!("bad value line '{line}'")));
            }
            values.push(C::new(f[0], f[1]));
        }
        WaveField::nodal(Arc::new(mesh), values, role)
    }
}
