//! Command-line front end: solves, far fields, blowup diagnostics, oracles
//! and named experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use cornerlab::blowup::{blowup_limit_fit, decay_trace, nondegeneracy_check_on, weiss_trace};
use cornerlab::experiment::{
    build_domain, build_medium, build_waves, load_config, run_experiment, ExperimentConfig, ExperimentKind,
};
use cornerlab::farfield::farfield_from_boundary;
use cornerlab::geometry::mesh_domain;
use cornerlab::oracles::poly::{format_poly, parse_poly};
use cornerlab::oracles::{
    cauchy_kowalevski_halfspace, check_cauchy_kowalevski, mie_disk_farfield, sector_neumann_kernel_dim,
    sector_system_determinant,
};
use cornerlab::oracles::ck::exact_constant;
use cornerlab::solver::{solve_scattered_fields, FieldRole, WaveField};
use cornerlab::waves::{plane_wave, HarmonicPolynomial2D};
use num_complex::Complex64 as C;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "CORNERLAB_THREADS";

#[derive(Parser)]
#[command(name = "cornerlab", version, about = "Helmholtz transmission scattering and corner blowup diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the finest level of a config and write field and far-field files.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// mesh size; defaults to the finest level of the config
        #[arg(long)]
        h: Option<f64>,
    },
    /// Far-field coefficients of a scattered field file.
    Farfield {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, value_parser = parse_point, default_value = "0,0")]
        corner: [f64; 2],
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decay trace, non-degeneracy check and blowup fit at a point.
    Blowup(BlowupArgs),
    #[command(subcommand)]
    Oracle(OracleCommand),
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Args)]
struct BlowupArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, value_parser = parse_point, default_value = "0,0")]
    corner: [f64; 2],
    /// point x0; defaults to the corner
    #[arg(long, value_parser = parse_point)]
    x0: Option<[f64; 2]>,
    #[arg(long)]
    order: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.1, 0.05, 0.025])]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// H = a z^m + b zbar^m for the Weiss energies, as m,are,aim,bre,bim
    #[arg(long, value_delimiter = ',')]
    weiss_h: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Sector determinant and Neumann kernel dimension.
    Det {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        theta0: f64,
    },
    /// Half-space Cauchy-Kowalevski solution for polynomial data.
    Ck {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
    },
    /// Mie far-field coefficients of a penetrable disk under a plane wave.
    Mie {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        radius: f64,
        /// incident direction angle
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run a config; exit status 0 on pass, 1 on fail, 2 on error.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiment kinds, and the configs found in a directory.
    List {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    match v[..] {
        [x, y] => Ok([x, y]),
        _ => Err(format!("expected x,y, got '{s}'")),
    }
}

type Res<T> = Result<T, String>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Res<()> {
    if let Some(p) = path.parent() {
        if !p.as_os_str().is_empty() {
            fs::create_dir_all(p).map_err(|e| format!("{}: {e}", p.display()))?;
        }
    }
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_field(path: &Path, corner: [f64; 2]) -> Res<WaveField> {
    WaveField::from_text(&read(path)?, corner, FieldRole::Scattered).map_err(|e| e.to_string())
}

fn solve(config: &Path, out: &Path, h: Option<f64>) -> Res<()> {
    let cfg: ExperimentConfig = load_config(config).map_err(|e| e.to_string())?;
    if cfg.kind == ExperimentKind::OracleSuite {
        return Err("oracle-suite configs have nothing to solve".into());
    }
    let spec = build_domain(cfg.domain.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let kappa = cfg.wave.as_ref().unwrap().kappa;
    let waves = build_waves(kappa, cfg.incident.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let medium = Arc::new(build_medium(&cfg, &spec).map_err(|e| e.to_string())?);
    let mesh_cfg = cfg.mesh.as_ref().unwrap();
    let h = h.unwrap_or_else(|| *mesh_cfg.levels.last().unwrap());
    let mesh = Arc::new(mesh_domain(&spec, h, mesh_cfg.truncation_radius).map_err(|e| format!("mesh: {e}"))?);
    let fields = solve_scattered_fields(mesh, medium, &waves).map_err(|e| format!("solve: {e}"))?;
    let r_eval = cfg.farfield.as_ref().unwrap().eval_radius;
    for (j, u) in fields.iter().enumerate() {
        write(&out.join(format!("field_wave{j}.txt")), &u.to_text().map_err(|e| e.to_string())?)?;
        let p = farfield_from_boundary(u, kappa, r_eval).map_err(|e| format!("farfield: {e}"))?;
        write(&out.join(format!("farfield_wave{j}.csv")), &p.to_csv())?;
    }
    Ok(())
}

fn blowup(a: &BlowupArgs) -> Res<()> {
    let u = load_field(&a.field, a.corner)?;
    let x0 = a.x0.unwrap_or(a.corner);
    let trace = decay_trace(&u, x0, &a.radii).map_err(|e| format!("decay_trace: {e}"))?;
    write(&a.out.join("decay.csv"), &trace.to_csv())?;
    println!("decay exponent {:.6}", trace.exponent);
    let nd = nondegeneracy_check_on(&u, x0, a.order, a.eps, &a.radii).map_err(|e| format!("nondegeneracy_check: {e}"))?;
    let mut csv = String::from("r,min_ratio\n");
    for (r, m) in &nd.per_radius {
        csv.push_str(&format!("{r:.16e},{m:.16e}\n"));
    }
    write(&a.out.join("nondegeneracy.csv"), &csv)?;
    println!("non-degeneracy c_eps {:.6e} slope {:.6} {}", nd.c_eps, nd.slope, if nd.pass { "pass" } else { "fail" });
    let report = match blowup_limit_fit(&u, x0, a.order, &a.radii) {
        Ok(f) => f.report(),
        Err(e) => format!("error = {e}\n"),
    };
    write(&a.out.join("blowup_fit.txt"), &report)?;
    if let Some(h) = &a.weiss_h {
        if h.len() != 5 {
            return Err(format!("weiss-h needs 5 values m,are,aim,bre,bim, got {}", h.len()));
        }
        let m = h[0];
        if !(m >= 0.0 && m.fract() == 0.0) {
            return Err(format!("weiss-h degree must be a nonnegative integer, got {m}"));
        }
        let h = HarmonicPolynomial2D::new(m as u32, C::new(h[1], h[2]), C::new(h[3], h[4]));
        let t = weiss_trace(&u, &h, None, x0, &a.radii, h.m + 2).map_err(|e| format!("weiss: {e}"))?;
        write(&a.out.join("weiss.csv"), &t.to_csv())?;
    }
    Ok(())
}

fn oracle(cmd: &OracleCommand) -> Res<()> {
    match cmd {
        OracleCommand::Det { m, theta0 } => {
            println!("m,theta0,determinant,four_sin2,kernel_dim");
            let d = sector_system_determinant(*m, *theta0);
            let s = 4.0 * (*m as f64 * theta0).sin().powi(2);
            println!("{m},{theta0:.16e},{d:.16e},{s:.16e},{}", sector_neumann_kernel_dim(*m, *theta0));
        }
        OracleCommand::Ck { poly, c0 } => {
            let p = parse_poly(&read(poly)?).map_err(|e| e.to_string())?;
            let c = exact_constant(*c0).map_err(|e| e.to_string())?;
            let w = cauchy_kowalevski_halfspace(&p, &c, p.nvars()).map_err(|e| e.to_string())?;
            let checks = check_cauchy_kowalevski(&p, &c, &w);
            print!("{}", format_poly(&w));
            eprintln!(
                "harmonic {} dirichlet {} neumann {} homogeneous {}",
                checks.harmonic, checks.dirichlet, checks.neumann, checks.homogeneous
            );
            if !checks.all() {
                return Err("checks failed".into());
            }
        }
        OracleCommand::Mie { kappa, rho, radius, angle } => {
            let w = plane_wave(*kappa, [angle.cos(), angle.sin()]).map_err(|e| e.to_string())?;
            let p = mie_disk_farfield(*kappa, *rho, *radius, &w).map_err(|e| e.to_string())?;
            print!("{}", p.to_csv());
        }
    }
    Ok(())
}

fn list(dir: Option<&Path>) -> Res<()> {
    println!("kind,description");
    for k in ExperimentKind::ALL {
        println!("{},{}", k.name(), k.description());
    }
    if let Some(dir) = dir {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| format!("{}: {e}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        entries.sort();
        println!();
        println!("config,kind");
        for p in entries {
            match load_config(&p) {
                Ok(c) => println!("{},{}", p.display(), c.kind.name()),
                Err(e) => println!("{},invalid: {e}", p.display()),
            }
        }
    }
    Ok(())
}

fn parse_threads(v: Option<&str>) -> Res<Option<usize>> {
    match v {
        None => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_VAR} must be a positive integer, got '{v}'")),
        },
    }
}

fn configure_threads() -> Res<()> {
    if let Some(n) = parse_threads(std::env::var(THREADS_VAR).ok().as_deref())? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Runs one command and returns the process exit status.
fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Solve { config, out, h } => solve(config, out, *h),
        Command::Farfield { field, corner, kappa, radius, out } => load_field(field, *corner).and_then(|u| {
            let p = farfield_from_boundary(&u, *kappa, *radius).map_err(|e| e.to_string())?;
            emit(out.as_deref(), &p.to_csv())
        }),
        Command::Blowup(a) => blowup(a),
        Command::Oracle(o) => oracle(o),
        Command::Experiment(ExperimentCommand::List { dir }) => list(dir.as_deref()),
        Command::Experiment(ExperimentCommand::Run { config, out }) => {
            return match load_config(config).and_then(|c| run_experiment(&c, out.as_deref())) {
                Ok(r) => {
                    print!("{}", r.verdict.to_text());
                    r.exit_code() as u8
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            };
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(run(&cli))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("cornerlab").chain(args.iter().copied())).unwrap()
    }

    fn p(path: &Path) -> &str {
        path.to_str().unwrap()
    }

    const IDENTITY: &str = r#"
kind = "identity-sanity"

[domain]
kind = "disk"
radius = 0.5

[medium]
kind = "identity"

[wave]
kappa = 1.0

[incident]
kind = "plane"

[mesh]
levels = [0.1]
truncation_radius = 1.0

[farfield]
eval_radius = 0.8
"#;

    fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn experiment_run_passes_and_is_reproducible() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = write_file(tmp.path(), "id.toml", IDENTITY);
        for out in ["a", "b"] {
            let o = tmp.path().join(out);
            assert_eq!(run(&cmd(&["experiment", "run", p(&cfg), "--out", p(&o)])), 0);
        }
        let a = fs::read(tmp.path().join("a/summary.csv")).unwrap();
        let b = fs::read(tmp.path().join("b/summary.csv")).unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a).unwrap().starts_with("level,h,dof,wave,farfield_norm\n"));
        assert!(fs::read_to_string(tmp.path().join("a/verdict.txt")).unwrap().starts_with("PASS"));
    }

    #[test]
    fn failing_verdict_and_bad_config_exit_codes() {
        let tmp = tempfile::tempdir().unwrap();
        // a contrast medium scatters, so the identity rule fails
        let cfg = write_file(tmp.path(), "c.toml", &IDENTITY.replace("kind = \"identity\"", "kind = \"constant\"\nrho = 2.0"));
        let o = tmp.path().join("o");
        assert_eq!(run(&cmd(&["experiment", "run", p(&cfg), "--out", p(&o)])), 1);
        assert!(fs::read_to_string(o.join("verdict.txt")).unwrap().starts_with("FAIL"));
        let bad = write_file(tmp.path(), "bad.toml", "kind = \"disk-oracle\"\n");
        assert_eq!(run(&cmd(&["experiment", "run", p(&bad), "--out", p(&tmp.path().join("q"))])), 2);
        assert_eq!(run(&cmd(&["experiment", "run", p(&tmp.path().join("missing.toml"))])), 2);
    }

    #[test]
    fn thread_variable() {
        assert_eq!(parse_threads(None), Ok(None));
        assert_eq!(parse_threads(Some("3")), Ok(Some(3)));
        assert!(parse_threads(Some("0")).is_err());
        assert!(parse_threads(Some("many")).is_err());
    }

    #[test]
    fn experiment_list() {
        let tmp = tempfile::tempdir().unwrap();
        write_file(tmp.path(), "id.toml", IDENTITY);
        assert_eq!(run(&cmd(&["experiment", "list", "--dir", p(tmp.path())])), 0);
        assert_eq!(run(&cmd(&["experiment", "list", "--dir", p(&tmp.path().join("nope"))])), 2);
        assert!(Cli::try_parse_from(["cornerlab", "experiment", "run"]).is_err());
    }

    #[test]
    fn solve_then_farfield_and_blowup_on_the_written_field() {
        let tmp = tempfile::tempdir().unwrap();
        let text = IDENTITY
            .replace("kind = \"disk\"\nradius = 0.5", "kind = \"sector\"\nangle = 2.356194490192345\nradius = 0.5")
            .replace("kind = \"identity\"", "kind = \"constant\"\nrho = 2.0");
        let cfg = write_file(tmp.path(), "s.toml", &text);
        let out = tmp.path().join("solve");
        assert_eq!(run(&cmd(&["solve", "--config", p(&cfg), "--out", p(&out)])), 0);
        let field = out.join("field_wave0.txt");
        let solved = fs::read_to_string(out.join("farfield_wave0.csv")).unwrap();
        let ff = tmp.path().join("ff.csv");
        assert_eq!(
            run(&cmd(&["farfield", "--kappa", "1", "--radius", "0.8", "--field", p(&field), "--out", p(&ff)])),
            0
        );
        assert_eq!(fs::read_to_string(&ff).unwrap(), solved);

        let b = tmp.path().join("blowup");
        let args = ["blowup", "--order", "2", "--radii", "0.4,0.3,0.2", "--weiss-h", "0,0.5,0,0.5,0", "--field", p(&field), "--out", p(&b)];
        assert_eq!(run(&cmd(&args)), 0);
        assert!(fs::read_to_string(b.join("decay.csv")).unwrap().starts_with("r,S_r\n"));
        assert!(fs::read_to_string(b.join("nondegeneracy.csv")).unwrap().starts_with("r,min_ratio\n"));
        assert!(fs::read_to_string(b.join("weiss.csv")).unwrap().starts_with("r,W_A,W"));
        assert!(b.join("blowup_fit.txt").exists());
        let short = ["blowup", "--order", "2", "--weiss-h", "0,1", "--field", p(&field), "--out", p(&b)];
        assert_eq!(run(&cmd(&short)), 2);
    }

    #[test]
    fn oracle_commands() {
        assert_eq!(run(&cmd(&["oracle", "det", "--m", "3", "--theta0", "1.0471975511965976"])), 0);
        let tmp = tempfile::tempdir().unwrap();
        let poly = write_file(tmp.path(), "p.txt", "1 1 2\n");
        assert_eq!(run(&cmd(&["oracle", "ck", "--poly", p(&poly)])), 0);
        let bad = write_file(tmp.path(), "q.txt", "1 1 0\n1 0 2\n");
        assert_eq!(run(&cmd(&["oracle", "ck", "--poly", p(&bad)])), 2);
        assert_eq!(run(&cmd(&["oracle", "mie", "--kappa", "1", "--rho", "2", "--radius", "0.5"])), 0);
        assert_eq!(run(&cmd(&["oracle", "mie", "--kappa=-1", "--rho", "2", "--radius", "0.5"])), 2);
    }
}
