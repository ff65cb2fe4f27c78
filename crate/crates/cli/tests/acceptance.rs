//! Acceptance run: one PASS/FAIL line per criterion. Criteria run one after
//! another so that the runtime limits are measured without contention.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cornerlab::blowup::{blowup_limit_fit, SupportClass, HALF_SPACE_TOL};
use cornerlab::experiment::suite::{
    check_cauchy_kowalevski_random, check_halfspace_residuals, check_halfspace_x2, check_sector_determinants,
    check_sector_kernels, check_weiss, OracleCheck,
};
use cornerlab::experiment::{
    build_diffeomorphism, build_domain, build_medium, build_waves, load_config, run_experiment, ExperimentConfig,
    MediumConfig,
};
use cornerlab::geometry::{mesh_domain, DomainKind};
use cornerlab::oracles::{
    boundary_pairing_scale, distributional_residual, halfspace_blowup_solution, pushforward_scattered_field, Support,
};
use cornerlab::solver::solve_scattered_fields;
use cornerlab::waves::HarmonicPolynomial2D;
use num_complex::Complex64 as C;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240607;

struct Outcome {
    pass: bool,
    detail: String,
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    load_config(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn out_dir(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("cornerlab-acceptance-{}", std::process::id())).join(name)
}

/// Runs a shipped config and applies its verdict plus a wall-clock limit.
fn experiment(name: &str, limit: Duration) -> Outcome {
    let cfg = config(name);
    let t = Instant::now();
    match run_experiment(&cfg, Some(&out_dir(name))) {
        Ok(r) => {
            let secs = t.elapsed();
            let mut detail = r.verdict.lines.join("; ");
            detail.push_str(&format!("; {:.1}s (limit {}s)", secs.as_secs_f64(), limit.as_secs()));
            Outcome { pass: r.verdict.pass && secs <= limit, detail }
        }
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn rows(rows: &[OracleCheck]) -> Outcome {
    let detail = rows
        .iter()
        .map(|r| format!("{} worst {:.2e} over {} (tol {:e})", r.name, r.worst, r.cases, r.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass: rows.iter().all(|r| r.pass), detail }
}

fn criterion_1() -> Outcome {
    experiment("identity-sanity.toml", Duration::from_secs(10))
}

fn criterion_2() -> Outcome {
    experiment("disk-oracle.toml", Duration::from_secs(120))
}

fn criterion_3() -> Outcome {
    experiment("corner-scatters.toml", Duration::from_secs(600))
}

fn criterion_4() -> Outcome {
    experiment("pushforward-nonscattering.toml", Duration::from_secs(300))
}

fn criterion_5() -> Outcome {
    match check_weiss() {
        Ok(r) => rows(&r),
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Vec::new();
    match (check_halfspace_residuals(&mut rng, 20), check_halfspace_x2()) {
        (Ok(a), Ok(b)) => checks.extend([a, b]),
        (Err(e), _) | (_, Err(e)) => return Outcome { pass: false, detail: e.to_string() },
    }
    // the constant without the factor 1/2 must leave an O(1) residual
    let h = HarmonicPolynomial2D::new(2, C::new(0.3, 0.2), C::new(-0.4, 0.1));
    let printed = halfspace_blowup_solution(&h, 2.0)
        .and_then(|v| distributional_residual(&v, &h, 1.0, Support::HALF_PLANE))
        .and_then(|res| Ok(res / boundary_pairing_scale(&h, 1.0, Support::HALF_PLANE)?));
    let mut out = rows(&checks);
    match printed {
        Ok(rel) => {
            out.pass &= rel > 0.1;
            out.detail.push_str(&format!("; constant c0 instead of c0/2 leaves relative residual {rel:.3}"));
        }
        Err(e) => {
            out.pass = false;
            out.detail.push_str(&format!("; {e}"));
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rows(&[check_sector_determinants(&mut rng, 10_000), check_sector_kernels(&mut rng, 100)])
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let t = Instant::now();
    match check_cauchy_kowalevski_random(&mut rng, 200) {
        Ok(r) => {
            let mut out = rows(&[r]);
            let secs = t.elapsed().as_secs_f64();
            out.pass &= secs < 30.0;
            out.detail.push_str(&format!("; {secs:.2}s (limit 30s)"));
            out
        }
        Err(e) => Outcome { pass: false, detail: e.to_string() },
    }
}

/// Decay exponent and non-degeneracy at the corner. In a genuinely
/// scattering configuration u^sc(x0) is not zero, so the expected decay
/// order cannot appear; the criterion is run as stated and reported.
fn criterion_9() -> Outcome {
    experiment("blowup-decay.toml", Duration::from_secs(600))
}

/// Closed-form pushforward field: support of the blow-up limit against the
/// corner angle, cross-checked against the finite element solution of the
/// same medium, plus recovery of (a, b) from manufactured half-space data.
fn criterion_10() -> Outcome {
    let cfg = config("blowup-support.toml");
    let mut out = experiment("blowup-support.toml", Duration::from_secs(600));

    let cross = (|| -> Result<(f64, f64), String> {
        let spec = build_domain(cfg.domain.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let kappa = cfg.wave.as_ref().unwrap().kappa;
        let waves = build_waves(kappa, cfg.incident.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let medium = Arc::new(build_medium(&cfg, &spec).map_err(|e| e.to_string())?);
        let Some(MediumConfig::Pushforward { bump }) = &cfg.medium else { return Err("not a pushforward".into()) };
        let phi = build_diffeomorphism(bump, cfg.domain.as_ref().unwrap()).map_err(|e| e.to_string())?;
        let radius = cfg.mesh.as_ref().unwrap().truncation_radius;
        let mesh = Arc::new(mesh_domain(&spec, 0.02, radius).map_err(|e| e.to_string())?);
        let fem = solve_scattered_fields(mesh, medium, &waves).map_err(|e| e.to_string())?;
        let exact = pushforward_scattered_field(phi, waves[0].clone(), radius);
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        let x0 = spec.corner_point;
        let DomainKind::Sector { rotation, .. } = spec.kind else { return Err("not a sector".into()) };
        for i in 1..40 {
            for j in 0..24 {
                let r = 0.05 + 1.2 * i as f64 / 40.0;
                let t = rotation + spec.corner_angle * (j as f64 + 0.5) / 24.0;
                let x = [x0[0] + r * t.cos(), x0[1] + r * t.sin()];
                let (Some(a), Some(b)) = (fem[0].value(x), exact.value(x)) else { continue };
                diff = diff.max((a - b).norm());
                scale = scale.max(b.norm());
            }
        }
        Ok((diff / scale, scale))
    })();
    match cross {
        Ok((rel, scale)) => {
            out.pass &= rel < 0.05;
            out.detail.push_str(&format!("; FEM h=0.02 vs closed form: relative sup deviation {rel:.3e} (scale {scale:.3e}, tol 5e-2)"));
        }
        Err(e) => {
            out.pass = false;
            out.detail.push_str(&format!("; cross-check: {e}"));
        }
    }

    let (a, b) = (C::new(0.7, -0.2), C::new(-0.3, 0.4));
    let h = HarmonicPolynomial2D::new(2, a, b);
    let manufactured = halfspace_blowup_solution(&h, 1.0)
        .map_err(|e| e.to_string())
        .and_then(|v| blowup_limit_fit(&v.to_wave_field(4.0), [0.0, 0.0], 2.0, &[0.4, 0.2, 0.1, 0.05]).map_err(|e| e.to_string()));
    match manufactured {
        Ok(fit) => {
            let half = matches!(fit.support, SupportClass::HalfSpace { .. }) && (fit.support.angle() - PI).abs() <= HALF_SPACE_TOL;
            // v = k (z^2 - zbar^2) on the upper half-plane with k = (a - b) / 2
            let k = (a - b) * 0.5;
            let rel = fit.fit.map(|f| ((f.a - k).norm() + (f.b + k).norm()) / (2.0 * k.norm())).unwrap_or(f64::INFINITY);
            out.pass &= half && rel < 1e-3;
            out.detail.push_str(&format!("; manufactured half-space: support {}, recovered coefficients relative error {rel:.2e}", fit.support.label()));
        }
        Err(e) => {
            out.pass = false;
            out.detail.push_str(&format!("; manufactured half-space: {e}"));
        }
    }
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("identity medium does not scatter", criterion_1),
        ("disk far field converges to the Mie series", criterion_2),
        ("corner scatters every incident wave", criterion_3),
        ("pushforward medium is non-scattering", criterion_4),
        ("Weiss energy quadrature and exact oracle", criterion_5),
        ("half-space blow-up solution", criterion_6),
        ("sector system determinant and kernel", criterion_7),
        ("Cauchy-Kowalevski expansion", criterion_8),
        ("corner decay and non-degeneracy", criterion_9),
        ("blow-up support of the pushforward field", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {:>2} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    let _ = std::fs::remove_dir_all(out_dir(""));
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
