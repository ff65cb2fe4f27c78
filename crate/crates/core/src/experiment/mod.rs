//! Named experiments: a config selects a pipeline, the pipeline runs over
//! the refinement levels, and the run leaves CSV tables, a manifest and a
//! verdict in an output directory.

pub mod config;
pub mod suite;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::blowup::{blowup_limit_fit, decay_trace, nondegeneracy_check_on, SupportClass, HALF_SPACE_TOL};
use crate::coefficients::{bump_diffeomorphism, pushforward_medium, CoefficientField, Diffeomorphism};
use crate::farfield::{farfield_from_boundary, relative_l2_error, scattering_norm, FarFieldPattern};
use crate::geometry::{build_disk_domain, build_sector_domain_at, build_star_domain, mesh_domain, DomainSpec};
use crate::oracles::{mie_disk_farfield, pushforward_scattered_field};
use crate::solver::{incident_l2_norm, solve_scattered_fields, WaveField};
use crate::waves::{fourier_bessel_wave, plane_wave, IncidentWave};
pub use config::*;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("writing {path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> ExperimentError {
    move |e| ExperimentError::Stage { stage, message: e.to_string() }
}

/// Absolute tolerances of the verdict rules.
pub const IDENTITY_TOL: f64 = 1e-8;
pub const DISK_ERROR_TOL: f64 = 0.02;
pub const DISK_MIN_ORDER: f64 = 1.8;
pub const CORNER_MIN_NORM: f64 = 1e-3;
pub const CORNER_MIN_RATIO: f64 = 0.5;
pub const PUSHFORWARD_MIN_FACTOR: f64 = 3.0;
/// Accepted window [order - below, order + above] for the decay exponent.
pub const DECAY_WINDOW: (f64, f64) = (0.2, 0.3);

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from(if self.pass { "PASS\n" } else { "FAIL\n" });
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub h: f64,
    pub dof: usize,
    /// normalized far-field norm per incident wave
    pub norms: Vec<f64>,
    /// relative L2 error against the reference pattern, when one exists
    pub errors: Option<Vec<f64>>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub out_dir: PathBuf,
    pub levels: Vec<LevelResult>,
    pub verdict: Verdict,
}

impl ExperimentReport {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.pass {
            0
        } else {
            1
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text)
}

struct Writer {
    dir: PathBuf,
}

impl Writer {
    fn create(dir: &Path) -> Result<Self, ExperimentError> {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::Io { path: dir.into(), message: e.to_string() })?;
        Ok(Writer { dir: dir.into() })
    }

    fn write(&self, name: &str, text: &str) -> Result<(), ExperimentError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| ExperimentError::Io { path: parent.into(), message: e.to_string() })?;
        }
        fs::write(&path, text).map_err(|e| ExperimentError::Io { path, message: e.to_string() })
    }
}

pub fn build_domain(c: &DomainConfig) -> Result<DomainSpec, ExperimentError> {
    match *c {
        DomainConfig::Sector { angle, radius, corner, rotation } => build_sector_domain_at(angle, radius, corner, rotation),
        DomainConfig::Disk { center, radius } => build_disk_domain(center, radius),
        DomainConfig::Star { center, r0, eps, lobes } => build_star_domain(center, r0, eps, lobes),
    }
    .map_err(stage("domain"))
}

pub fn build_diffeomorphism(c: &BumpConfig, domain: &DomainConfig) -> Result<Diffeomorphism, ExperimentError> {
    match *c {
        BumpConfig::Radial { center, radius, amplitude } => {
            bump_diffeomorphism(center, radius, amplitude).map_err(stage("medium"))
        }
        BumpConfig::Swirl { center, radius, amplitude } => {
            if !(radius > 0.0 && amplitude.is_finite()) {
                return Err(ExperimentError::Config("swirl bump needs radius > 0 and finite amplitude".into()));
            }
            Ok(Diffeomorphism::SwirlBump { center, radius, amplitude })
        }
        BumpConfig::CornerSwirl { radius, amplitude } => match *domain {
            DomainConfig::Sector { angle, radius: outer, corner, rotation } => {
                if !(radius > 0.0 && radius <= outer) {
                    return Err(ExperimentError::Config("corner swirl radius must lie in (0, sector radius]".into()));
                }
                Ok(Diffeomorphism::CornerSwirl { corner, rotation, angle, radius, amplitude })
            }
            _ => Err(ExperimentError::Config("corner swirl needs a sector domain".into())),
        },
    }
}

pub fn build_medium(cfg: &ExperimentConfig, spec: &DomainSpec) -> Result<CoefficientField, ExperimentError> {
    let kappa = cfg.wave.as_ref().map(|w| w.kappa).unwrap_or(1.0);
    let medium = cfg.medium.as_ref().ok_or_else(|| ExperimentError::Config("missing [medium]".into()))?;
    match medium {
        MediumConfig::Identity => CoefficientField::constant_contrast(spec.clone(), kappa, 1.0),
        MediumConfig::Constant { rho, a, q } => CoefficientField::constant(spec.clone(), kappa, *a, *rho).map(|f| match q {
            Some(q) => f.with_q(*q),
            None => f,
        }),
        MediumConfig::Pushforward { bump } => {
            let phi = build_diffeomorphism(bump, cfg.domain.as_ref().unwrap())?;
            pushforward_medium(phi, spec, kappa)
        }
    }
    .map_err(stage("medium"))
}

pub fn build_waves(kappa: f64, c: &IncidentConfig) -> Result<Vec<IncidentWave>, ExperimentError> {
    match c {
        IncidentConfig::Plane { angles } => angles.iter().map(|t| plane_wave(kappa, [t.cos(), t.sin()])).collect::<Result<Vec<_>, _>>(),
        IncidentConfig::FourierBessel { orders } => orders.iter().map(|&m| fourier_bessel_wave(kappa, m)).collect(),
    }
    .map_err(stage("incident"))
}

/// Runs the experiment and writes its outputs to `out` (or the config's
/// `output`). Errors are infrastructure failures; a failed acceptance rule
/// is a normal report with `verdict.pass == false`.
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| ExperimentError::Config("no output directory given".into()))?;
    let w = Writer::create(&dir)?;
    w.write(
        "manifest.toml",
        &format!("# cornerlab {}\n{}", env!("CARGO_PKG_VERSION"), cfg.to_toml()),
    )?;
    let (levels, verdict) = match cfg.kind {
        ExperimentKind::OracleSuite => {
            let o = cfg.oracle.clone().unwrap_or_default();
            let (csv, verdict) = suite::run_oracle_suite(&o)?;
            w.write("oracle_suite.csv", &csv)?;
            (Vec::new(), verdict)
        }
        _ => run_mesh_experiment(cfg, &w)?,
    };
    w.write("verdict.txt", &verdict.to_text())?;
    Ok(ExperimentReport { kind: cfg.kind, out_dir: dir, levels, verdict })
}

fn run_mesh_experiment(cfg: &ExperimentConfig, w: &Writer) -> Result<(Vec<LevelResult>, Verdict), ExperimentError> {
    let spec = build_domain(cfg.domain.as_ref().unwrap())?;
    let kappa = cfg.wave.as_ref().unwrap().kappa;
    let waves = build_waves(kappa, cfg.incident.as_ref().unwrap())?;
    let mesh_cfg = cfg.mesh.as_ref().unwrap();
    let r_eval = cfg.farfield.as_ref().unwrap().eval_radius;
    let medium = Arc::new(build_medium(cfg, &spec)?);
    let reference: Option<Vec<FarFieldPattern>> = match (cfg.kind, &cfg.medium, &cfg.domain) {
        (ExperimentKind::DiskOracle, Some(MediumConfig::Constant { rho, .. }), Some(DomainConfig::Disk { radius, .. })) => {
            Some(waves.iter().map(|wv| mie_disk_farfield(kappa, *rho, *radius, wv)).collect::<Result<_, _>>().map_err(stage("mie"))?)
        }
        _ => None,
    };

    let mut levels = Vec::new();
    let mut finest: Vec<WaveField> = Vec::new();
    // levels run one after another; each solve is parallel inside
    for (l, &h) in mesh_cfg.levels.iter().enumerate() {
        let t = Instant::now();
        let mesh = Arc::new(mesh_domain(&spec, h, mesh_cfg.truncation_radius).map_err(stage("mesh"))?);
        let fields = solve_scattered_fields(mesh.clone(), medium.clone(), &waves).map_err(stage("solve"))?;
        let mut norms = Vec::new();
        let mut errors = Vec::new();
        for (j, (u, wv)) in fields.iter().zip(&waves).enumerate() {
            let p = farfield_from_boundary(u, kappa, r_eval).map_err(stage("farfield"))?;
            norms.push(scattering_norm(&p) / incident_l2_norm(&mesh, wv));
            if let Some(r) = &reference {
                errors.push(relative_l2_error(&p, &r[j]));
            }
            w.write(&format!("farfield/level{l}_wave{j}.csv"), &p.to_csv())?;
        }
        levels.push(LevelResult {
            h,
            dof: mesh.num_vertices(),
            norms,
            errors: reference.as_ref().map(|_| errors),
            seconds: t.elapsed().as_secs_f64(),
        });
        finest = fields;
    }
    w.write("summary.csv", &summary_csv(&levels))?;
    let mut rt = String::from("level,h,seconds\n");
    for (l, r) in levels.iter().enumerate() {
        writeln!(rt, "{l},{},{:.3}", r.h, r.seconds).unwrap();
    }
    w.write("runtime.csv", &rt)?;

    let verdict = match cfg.kind {
        ExperimentKind::IdentitySanity => identity_verdict(&levels),
        ExperimentKind::DiskOracle => disk_verdict(&levels),
        ExperimentKind::CornerScatters => corner_verdict(&levels),
        ExperimentKind::PushforwardNonscattering => pushforward_verdict(&levels),
        ExperimentKind::BlowupStudy => blowup_verdict(cfg, &spec, &waves, finest, w)?,
        ExperimentKind::OracleSuite => unreachable!(),
    };
    Ok((levels, verdict))
}

/// Per level and incident wave: h, dof, normalized far-field norm and, for
/// oracle runs, the relative error. Runtimes go to runtime.csv so that this
/// table is identical across reruns.
pub fn summary_csv(levels: &[LevelResult]) -> String {
    let with_err = levels.iter().any(|l| l.errors.is_some());
    let mut s = String::from(if with_err { "level,h,dof,wave,farfield_norm,error\n" } else { "level,h,dof,wave,farfield_norm\n" });
    for (l, r) in levels.iter().enumerate() {
        for (j, n) in r.norms.iter().enumerate() {
            write!(s, "{l},{},{},{j},{n:.16e}", r.h, r.dof).unwrap();
            if let Some(e) = &r.errors {
                write!(s, ",{:.16e}", e[j]).unwrap();
            }
            s.push('\n');
        }
    }
    s
}

fn identity_verdict(levels: &[LevelResult]) -> Verdict {
    let mut v = Verdict::new();
    for (l, r) in levels.iter().enumerate() {
        let worst = r.norms.iter().cloned().fold(0.0, f64::max);
        v.check(worst < IDENTITY_TOL, format!("level {l} h={}: max far-field norm {worst:.3e} < {IDENTITY_TOL:e}", r.h));
    }
    v
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    crate::coefficients::fit_slope(&pts)
}

fn disk_verdict(levels: &[LevelResult]) -> Verdict {
    let mut v = Verdict::new();
    let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let nw = levels[0].norms.len();
    for j in 0..nw {
        let errs: Vec<f64> = levels.iter().map(|l| l.errors.as_ref().unwrap()[j]).collect();
        let order = loglog_slope(&hs, &errs);
        let finest = *errs.last().unwrap();
        v.check(errs.windows(2).all(|e| e[1] < e[0]), format!("wave {j}: errors {} decreasing", errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")));
        v.check(order >= DISK_MIN_ORDER, format!("wave {j}: fitted order {order:.3} >= {DISK_MIN_ORDER}"));
        v.check(finest < DISK_ERROR_TOL, format!("wave {j}: finest error {finest:.3e} < {DISK_ERROR_TOL}"));
    }
    v
}

fn corner_verdict(levels: &[LevelResult]) -> Verdict {
    let mut v = Verdict::new();
    let n = levels.len();
    for j in 0..levels[0].norms.len() {
        let norms: Vec<f64> = levels.iter().map(|l| l.norms[j]).collect();
        let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        v.check(min > CORNER_MIN_NORM, format!("wave {j}: min far-field norm {min:.4e} > {CORNER_MIN_NORM:e}"));
        let ratio = norms[n - 1] / norms[n - 2];
        v.check(ratio > CORNER_MIN_RATIO, format!("wave {j}: finest/previous ratio {ratio:.4} > {CORNER_MIN_RATIO}"));
    }
    v
}

fn pushforward_verdict(levels: &[LevelResult]) -> Verdict {
    let mut v = Verdict::new();
    for j in 0..levels[0].norms.len() {
        for (l, p) in levels.windows(2).enumerate() {
            let f = p[0].norms[j] / p[1].norms[j];
            v.check(
                f >= PUSHFORWARD_MIN_FACTOR,
                format!("wave {j}: level {l}->{} factor {f:.3} >= {PUSHFORWARD_MIN_FACTOR}", l + 1),
            );
        }
    }
    v
}

fn blowup_verdict(
    cfg: &ExperimentConfig,
    spec: &DomainSpec,
    waves: &[IncidentWave],
    mut finest: Vec<WaveField>,
    w: &Writer,
) -> Result<Verdict, ExperimentError> {
    let b = cfg.blowup.as_ref().unwrap();
    if b.wave >= waves.len() {
        return Err(ExperimentError::Config(format!("blowup.wave {} out of range", b.wave)));
    }
    let x0 = spec.corner_point;
    let u = match b.field {
        BlowupField::Fem => finest.swap_remove(b.wave),
        BlowupField::ClosedForm => {
            let Some(MediumConfig::Pushforward { bump }) = &cfg.medium else { unreachable!() };
            let phi = build_diffeomorphism(bump, cfg.domain.as_ref().unwrap())?;
            pushforward_scattered_field(phi, waves[b.wave].clone(), cfg.mesh.as_ref().unwrap().truncation_radius)
        }
    };
    let mut v = Verdict::new();
    match b.mode {
        BlowupMode::Decay => {
            let trace = decay_trace(&u, x0, &b.radii).map_err(stage("decay_trace"))?;
            w.write("decay.csv", &trace.to_csv())?;
            let (lo, hi) = (b.order - DECAY_WINDOW.0, b.order + DECAY_WINDOW.1);
            v.check(
                trace.exponent >= lo && trace.exponent <= hi,
                format!("decay exponent {:.4} in [{lo}, {hi}]", trace.exponent),
            );
            let nd = nondegeneracy_check_on(&u, x0, b.order, b.eps, &b.radii).map_err(stage("nondegeneracy_check"))?;
            let mut csv = String::from("r,min_ratio\n");
            for (r, m) in &nd.per_radius {
                writeln!(csv, "{r:.16e},{m:.16e}").unwrap();
            }
            w.write("nondegeneracy.csv", &csv)?;
            v.check(nd.pass, format!("non-degeneracy eps={}: c_eps {:.4e}, slope {:.4}", b.eps, nd.c_eps, nd.slope));
        }
        BlowupMode::Support => match blowup_limit_fit(&u, x0, b.order, &b.radii) {
            Ok(fit) => {
                w.write("blowup_fit.txt", &fit.report())?;
                let want = spec.corner_angle;
                let got = fit.support.angle();
                let class_ok = if (want - PI).abs() <= HALF_SPACE_TOL {
                    matches!(fit.support, SupportClass::HalfSpace { .. })
                } else {
                    matches!(fit.support, SupportClass::Sector { .. })
                };
                v.check(
                    class_ok && (got - want).abs() <= HALF_SPACE_TOL,
                    format!("support {} angle {got:.4} vs corner angle {want:.4} (tolerance 5 deg)", fit.support.label()),
                );
            }
            Err(e) => {
                w.write("blowup_fit.txt", &format!("error = {e}\n"))?;
                v.check(false, format!("blowup_limit_fit: {e}"));
            }
        },
    }
    Ok(v)
}
