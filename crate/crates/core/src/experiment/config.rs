//! Experiment configuration: a TOML document with one table per parameter
//! block.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    IdentitySanity,
    DiskOracle,
    CornerScatters,
    PushforwardNonscattering,
    BlowupStudy,
    OracleSuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::IdentitySanity,
        ExperimentKind::DiskOracle,
        ExperimentKind::CornerScatters,
        ExperimentKind::PushforwardNonscattering,
        ExperimentKind::BlowupStudy,
        ExperimentKind::OracleSuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::IdentitySanity => "identity-sanity",
            ExperimentKind::DiskOracle => "disk-oracle",
            ExperimentKind::CornerScatters => "corner-scatters",
            ExperimentKind::PushforwardNonscattering => "pushforward-nonscattering",
            ExperimentKind::BlowupStudy => "blowup-study",
            ExperimentKind::OracleSuite => "oracle-suite",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExperimentKind::IdentitySanity => "identity medium; every normalized far-field norm below 1e-8",
            ExperimentKind::DiskOracle => "penetrable disk against the Mie series; error decreasing with order >= 1.8",
            ExperimentKind::CornerScatters => "corner scatterer; far-field norms above 1e-3 and not decaying under refinement",
            ExperimentKind::PushforwardNonscattering => {
                "pushforward medium; far-field norm shrinking by a factor >= 3 per level"
            }
            ExperimentKind::BlowupStudy => "decay, non-degeneracy and blowup support at the corner point",
            ExperimentKind::OracleSuite => "sector determinants, Cauchy-Kowalevski, half-space residuals, Weiss value",
        }
    }

    fn needs_mesh(&self) -> bool {
        !matches!(self, ExperimentKind::OracleSuite)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Output directory; the command line may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incident: Option<IncidentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farfield: Option<FarFieldConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup: Option<BlowupConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    Sector {
        angle: f64,
        radius: f64,
        #[serde(default)]
        corner: [f64; 2],
        #[serde(default)]
        rotation: f64,
    },
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Star {
        #[serde(default)]
        center: [f64; 2],
        r0: f64,
        eps: f64,
        lobes: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MediumConfig {
    Identity,
    Constant {
        rho: f64,
        #[serde(default = "identity_matrix")]
        a: [[f64; 2]; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
    },
    Pushforward { bump: BumpConfig },
}

fn identity_matrix() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

/// Diffeomorphism generating a pushforward medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BumpConfig {
    Radial { center: [f64; 2], radius: f64, amplitude: f64 },
    Swirl { center: [f64; 2], radius: f64, amplitude: f64 },
    /// Swirl inside the corner of a sector domain, fixing both rays.
    CornerSwirl { radius: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IncidentConfig {
    /// Plane waves with direction angles in radians.
    Plane {
        #[serde(default = "default_angles")]
        angles: Vec<f64>,
    },
    FourierBessel { orders: Vec<i32> },
}

fn default_angles() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Mesh sizes, coarsest first.
    pub levels: Vec<f64>,
    pub truncation_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldConfig {
    pub eval_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupMode {
    /// decay_trace and nondegeneracy_check against `order`
    Decay,
    /// blowup_limit_fit; support must match the corner angle
    Support,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupField {
    Fem,
    /// exact u^inc o Phi^{-1} - u^inc, pushforward media only
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupConfig {
    pub mode: BlowupMode,
    pub order: f64,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// index into the incident list
    #[serde(default)]
    pub wave: usize,
    #[serde(default = "default_field")]
    pub field: BlowupField,
}

fn default_radii() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_eps() -> f64 {
    0.25
}

fn default_field() -> BlowupField {
    BlowupField::Fem
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_det_samples")]
    pub determinant_samples: usize,
    #[serde(default = "default_ck_samples")]
    pub ck_samples: usize,
    #[serde(default = "default_halfspace_samples")]
    pub halfspace_samples: usize,
}

fn default_seed() -> u64 {
    1
}
fn default_det_samples() -> usize {
    10_000
}
fn default_ck_samples() -> usize {
    200
}
fn default_halfspace_samples() -> usize {
    20
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: default_seed(),
            determinant_samples: default_det_samples(),
            ck_samples: default_ck_samples(),
            halfspace_samples: default_halfspace_samples(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks that every block the kind needs is present and sane.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        let k = self.kind;
        if k.needs_mesh() {
            for (present, block) in [
                (self.domain.is_some(), "domain"),
                (self.medium.is_some(), "medium"),
                (self.wave.is_some(), "wave"),
                (self.incident.is_some(), "incident"),
                (self.mesh.is_some(), "mesh"),
                (self.farfield.is_some(), "farfield"),
            ] {
                if !present {
                    return bad(format!("{} needs a [{block}] block", k.name()));
                }
            }
            let mesh = self.mesh.as_ref().unwrap();
            if mesh.levels.is_empty() {
                return bad("mesh.levels needs at least one level".into());
            }
            if mesh.levels.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
                return bad("mesh.levels must be positive".into());
            }
            if !(self.wave.as_ref().unwrap().kappa > 0.0) {
                return bad("wave.kappa must be positive".into());
            }
            match self.incident.as_ref().unwrap() {
                IncidentConfig::Plane { angles } if angles.is_empty() => return bad("incident.angles is empty".into()),
                IncidentConfig::FourierBessel { orders } if orders.is_empty() => {
                    return bad("incident.orders is empty".into())
                }
                _ => {}
            }
        }
        match k {
            ExperimentKind::DiskOracle => {
                if !matches!(self.domain, Some(DomainConfig::Disk { center: [0.0, 0.0], .. })) {
                    return bad("disk-oracle needs a disk domain centred at the origin".into());
                }
                match &self.medium {
                    Some(MediumConfig::Constant { a, q: None, .. }) if *a == identity_matrix() => {}
                    _ => return bad("disk-oracle needs a constant medium with a = identity and no q".into()),
                }
                if self.mesh.as_ref().unwrap().levels.len() < 2 {
                    return bad("disk-oracle needs at least two levels".into());
                }
            }
            ExperimentKind::CornerScatters | ExperimentKind::PushforwardNonscattering => {
                if self.mesh.as_ref().unwrap().levels.len() < 2 {
                    return bad(format!("{} needs at least two levels", k.name()));
                }
                if k == ExperimentKind::PushforwardNonscattering
                    && !matches!(self.medium, Some(MediumConfig::Pushforward { .. }))
                {
                    return bad("pushforward-nonscattering needs a pushforward medium".into());
                }
            }
            ExperimentKind::BlowupStudy => {
                let Some(b) = &self.blowup else {
                    return bad("blowup-study needs a [blowup] block".into());
                };
                if b.radii.is_empty() || b.radii.windows(2).any(|w| !(w[1] < w[0])) {
                    return bad("blowup.radii must be strictly decreasing".into());
                }
                if b.field == BlowupField::ClosedForm && !matches!(self.medium, Some(MediumConfig::Pushforward { .. })) {
                    return bad("blowup.field = closed-form needs a pushforward medium".into());
                }
                if b.mode == BlowupMode::Support && b.radii.len() < 3 {
                    return bad("blowup support mode needs at least three radii".into());
                }
            }
            _ => {}
        }
        if matches!(self.medium, Some(MediumConfig::Pushforward { bump: BumpConfig::CornerSwirl { .. } }))
            && !matches!(self.domain, Some(DomainConfig::Sector { .. }))
        {
            return bad("corner-swirl bumps need a sector domain".into());
        }
        Ok(())
    }
}
