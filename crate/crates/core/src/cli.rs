//! Command-line front end. `run` takes the full argument vector and returns
//! the process exit code: 0 success, 1 verification failure, 2 usage or
//! configuration error.

use crate::experiments::{
    dirichlet_log_moments, ks_csv, moment_decay_check, run_fluctuation_experiment, samples_csv, ExperimentConfig, Schedule,
};
use crate::fredholm::{f_gue, laplace_transform, limit_det, LaplaceResolution};
use crate::rate::{drift_point, theta_grid, verify_polygamma, verify_steep_descent, ModelParams, SteepDescentReport, SteepGrid, Witness};
use crate::specfun::digamma;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "betawalk", version, about = "Beta random walk: rates, Fredholm determinants, verification and experiments")]
struct Cli {
    /// Worker threads (falls back to BETAWALK_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of x(θ), I(x(θ)) and σ(θ) over a θ grid.
    Rate {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// start:stop:step
        #[arg(long, default_value = "0.05:0.45:0.05")]
        theta_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fredholm determinant evaluation.
    Fredholm {
        #[command(subcommand)]
        which: FredholmCmd,
    },
    /// Inequality and moment verification suites.
    Verify {
        #[command(subcommand)]
        suite: VerifyCmd,
    },
    /// Monte Carlo fluctuation experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Directory for samples.csv, ks.csv and manifest.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum FredholmCmd {
    /// F_GUE(y) over a y grid.
    Gue {
        #[arg(long, allow_hyphen_values = true, default_value = "-6:4:0.5")]
        y_grid: String,
        #[arg(long, default_value_t = 80)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// E[exp(u P(t, x))] as det(I - K_u).
    Laplace {
        #[arg(long)]
        t: u32,
        #[arg(long, allow_hyphen_values = true)]
        x: i64,
        /// Comma-separated real u values, none positive.
        #[arg(long, allow_hyphen_values = true, default_value = "-1")]
        u: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 16)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The wedge-contour determinant that converges to F_GUE.
    Limit {
        #[arg(long, allow_hyphen_values = true, default_value = "-4:2:1")]
        y_grid: String,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_3)]
        phi: f64,
        #[arg(long, default_value_t = 12)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Also write the machine-readable report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Polygamma bracketing inequalities.
    Polygamma {
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Steep-descent inequalities for h.
    Steep {
        /// θ grid start:stop:step
        #[arg(long, default_value = "0.05:0.45:0.05")]
        thetas: String,
        /// Comma-separated α values.
        #[arg(long, default_value = "0.7,1,2,10")]
        alphas: String,
        /// Comma-separated β values.
        #[arg(long, default_value = "0.5,1,5")]
        betas: String,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        /// Test hook: multiply h' by 1.5 at this index of the consistency suite.
        #[arg(long)]
        perturb_h_prime: Option<usize>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Dirichlet log-moment identities and decay.
    Moments {
        /// Comma-separated growth exponents r for the decay check.
        #[arg(long, default_value = "0.5")]
        r: String,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Debug)]
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parse "start:stop:step".
pub fn parse_grid(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
    match parts[..] {
        [a] => Some(vec![a]),
        [a, b, h] if h > 0.0 && b >= a => Some(theta_grid(a, b, h)),
        _ => None,
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn manifest(command: &str, config: Value) -> Value {
    json!({
        "tool": "betawalk",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    })
}

fn write_file(path: &Path, body: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// CSV to `out` (plus `<out>.manifest.json`), or CSV to stdout and the manifest to stderr.
fn emit(out: &Option<PathBuf>, csv: &str, man: Value) -> std::result::Result<(), Failure> {
    let man = serde_json::to_string_pretty(&man).expect("manifest serializes");
    match out {
        Some(p) => {
            write_file(p, csv)?;
            let mut m = p.clone().into_os_string();
            m.push(".manifest.json");
            write_file(Path::new(&m), &(man + "\n"))
        }
        None => {
            print!("{csv}");
            eprintln!("{man}");
            Ok(())
        }
    }
}

fn cmd_rate(alpha: f64, beta: f64, grid: &str, out: &Option<PathBuf>) -> CmdResult {
    let thetas = parse_grid(grid).ok_or_else(|| usage(format!("bad grid '{grid}', expected start:stop:step")))?;
    let mut csv = String::from("theta,x_theta,rate_I,sigma\n");
    for th in &thetas {
        let p = ModelParams::new(alpha, beta, *th).map_err(|e| usage(e.to_string()))?;
        let d = drift_point(&p).map_err(|e| usage(e.to_string()))?;
        writeln!(csv, "{},{},{},{}", fmt(d.theta), fmt(d.x_theta), fmt(d.rate_i), fmt(d.sigma)).unwrap();
    }
    emit(out, &csv, manifest("rate", json!({"alpha": alpha, "beta": beta, "theta_grid": grid, "thetas": thetas})))?;
    Ok(EXIT_OK)
}

fn cmd_fredholm(which: &FredholmCmd) -> CmdResult {
    match which {
        FredholmCmd::Gue { y_grid, m, out } => {
            let ys = parse_grid(y_grid).ok_or_else(|| usage(format!("bad grid '{y_grid}'")))?;
            let mut csv = String::from("y,value,err_est\n");
            for y in &ys {
                let r = f_gue(*y, *m).map_err(|e| usage(e.to_string()))?;
                writeln!(csv, "{},{},{}", fmt(*y), fmt(r.clipped()), fmt(r.err_est)).unwrap();
            }
            emit(out, &csv, manifest("fredholm gue", json!({"y_grid": y_grid, "m": m})))?;
        }
        FredholmCmd::Laplace { t, x, u, alpha, beta, m, out } => {
            let us: Vec<f64> = parse_list(u).ok_or_else(|| usage(format!("bad u list '{u}'")))?;
            let res = LaplaceResolution { m: *m, ..Default::default() };
            let mut csv = String::from("t,x,u,value,err_est\n");
            for uu in &us {
                let r = laplace_transform(*t, *x, C64::new(*uu, 0.0), *alpha, *beta, &res).map_err(|e| usage(e.to_string()))?;
                writeln!(csv, "{},{},{},{},{}", t, x, fmt(*uu), fmt(r.value), fmt(r.err_est)).unwrap();
            }
            let cfg = json!({"t": t, "x": x, "u": us, "alpha": alpha, "beta": beta, "m": m, "tol": res.tol});
            emit(out, &csv, manifest("fredholm laplace", cfg))?;
        }
        FredholmCmd::Limit { y_grid, phi, m, out } => {
            let ys = parse_grid(y_grid).ok_or_else(|| usage(format!("bad grid '{y_grid}'")))?;
            let mut csv = String::from("y,phi,value,err_est\n");
            for y in &ys {
                let r = limit_det(*y, *phi, *m).map_err(|e| usage(e.to_string()))?;
                writeln!(csv, "{},{},{},{}", fmt(*y), fmt(*phi), fmt(r.value), fmt(r.err_est)).unwrap();
            }
            emit(out, &csv, manifest("fredholm limit", json!({"y_grid": y_grid, "phi": phi, "m": m})))?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    manifest: Value,
    pass: bool,
    suites: &'a [SteepDescentReport],
}

fn finish_verify(command: &str, config: Value, reports: &[SteepDescentReport], json_out: &Option<PathBuf>) -> CmdResult {
    let pass = reports.iter().all(|r| r.pass);
    println!("{:<22} {:>7} {:>13}  status  tightest point", "suite", "points", "min margin");
    for r in reports {
        let w = r.witnesses.first().map_or("-", |w| w.point.as_str());
        println!("{:<22} {:>7} {:>13.5e}  {}    {}", r.suite, r.evaluated, r.min_margin, if r.pass { "pass" } else { "FAIL" }, w);
    }
    println!("overall: {}", if pass { "pass" } else { "FAIL" });
    if let Some(p) = json_out {
        let rep = VerifyReport { manifest: manifest(command, config), pass, suites: reports };
        write_file(p, &(serde_json::to_string_pretty(&rep).expect("report serializes") + "\n"))?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn moments_reports(rs: &[f64], k_max: usize) -> std::result::Result<Vec<SteepDescentReport>, Failure> {
    let err = |e: crate::experiments::ExperimentError| usage(e.to_string());
    let mut out = Vec::new();

    // degree-1 moments vanish when centered at E[log X_i]
    let grid = [vec![0.5, 0.5], vec![1.0, 1.0], vec![0.7, 2.0, 1.5], vec![3.0, 0.2, 1.0, 8.0]];
    let mut pts = Vec::new();
    for a in &grid {
        let total: f64 = a.iter().sum();
        let shifts: Vec<f64> = a.iter().map(|x| digamma(*x).unwrap() - digamma(total).unwrap()).collect();
        for i in 0..a.len() {
            let mut idx = vec![0; a.len()];
            idx[i] = 1;
            let l = dirichlet_log_moments(a, &idx, &shifts).map_err(err)?;
            pts.push(Witness { point: format!("alpha={a:?} i={i}"), margin: 1.0 - l.abs() / 1e-14 });
        }
    }
    out.push(SteepDescentReport::from_margins("moment_centering", "degree 1", pts));

    // Beta(1,1): Var(log U) = 1
    let c = digamma(1.0).unwrap() - digamma(2.0).unwrap();
    let v = dirichlet_log_moments(&[1.0, 1.0], &[2, 0], &[c, 0.0]).map_err(err)?;
    out.push(SteepDescentReport::from_margins(
        "beta11_variance",
        "alpha=(1,1)",
        vec![Witness { point: format!("L[2,0]={v}"), margin: 1.0 - (v - 1.0).abs() / 1e-12 }],
    ));

    for &r in rs {
        let rep = moment_decay_check(&Schedule::Power { r, s: r, c1: 1.0, c2: 1.0 }, k_max).map_err(err)?;
        let pts = rep
            .rows
            .iter()
            .map(|row| Witness {
                point: format!("L[{},{}] products={:?}", row.multi_index[0], row.multi_index[1], row.products),
                margin: 0.5 - row.products.iter().map(|p| (p / row.products[0] - 1.0).abs()).fold(0.0, f64::max),
            })
            .collect();
        let g = format!("r={r} t=1e2,1e3,1e4 c={} k_min={} p>={}", rep.c, rep.k_min, rep.p_threshold);
        out.push(SteepDescentReport::from_margins(&format!("moment_decay_r{r}"), &g, pts));
    }
    Ok(out)
}

fn cmd_verify(suite: &VerifyCmd) -> CmdResult {
    match suite {
        VerifyCmd::Polygamma { k_max, report } => {
            if *k_max == 0 || *k_max > crate::specfun::MAX_ORDER {
                return Err(usage(format!("k_max must lie in 1..={}", crate::specfun::MAX_ORDER)));
            }
            let ks: Vec<usize> = (1..=*k_max).collect();
            let xs = SteepGrid::default().xs;
            let reps = verify_polygamma(&ks, &xs);
            finish_verify("verify polygamma", json!({"k": ks, "xs": xs}), &reps, &report.json)
        }
        VerifyCmd::Steep { thetas, alphas, betas, k_max, perturb_h_prime, report } => {
            let grid = SteepGrid {
                thetas: parse_grid(thetas).ok_or_else(|| usage(format!("bad grid '{thetas}'")))?,
                alphas: parse_list(alphas).ok_or_else(|| usage(format!("bad list '{alphas}'")))?,
                betas: parse_list(betas).ok_or_else(|| usage(format!("bad list '{betas}'")))?,
                k_max: *k_max,
                perturb_h_prime: *perturb_h_prime,
                ..SteepGrid::default()
            };
            if grid.thetas.iter().any(|t| !(*t > 0.0 && *t < 0.5)) || grid.alphas.is_empty() || grid.betas.is_empty() {
                return Err(usage("θ must lie in (0, 0.5) and α, β lists must be nonempty"));
            }
            let reps = verify_steep_descent(&grid);
            let cfg = serde_json::to_value(&grid).expect("grid serializes");
            finish_verify("verify steep", cfg, &reps, &report.json)
        }
        VerifyCmd::Moments { r, k_max, report } => {
            let rs: Vec<f64> = parse_list(r).ok_or_else(|| usage(format!("bad list '{r}'")))?;
            let reps = moments_reports(&rs, *k_max)?;
            finish_verify("verify moments", json!({"r": rs, "k_max": k_max}), &reps, &report.json)
        }
    }
}

fn cmd_experiment(config: &Path, out_dir: &Path) -> CmdResult {
    let text = std::fs::read_to_string(config).map_err(|e| usage(format!("cannot read {}: {e}", config.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| usage(format!("config schema: {e}")))?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let out = run_fluctuation_experiment(&cfg).map_err(|e| usage(e.to_string()))?;
    std::fs::create_dir_all(out_dir).map_err(|e| usage(format!("cannot create {}: {e}", out_dir.display())))?;
    write_file(&out_dir.join("samples.csv"), &samples_csv(&out.samples))?;
    write_file(&out_dir.join("ks.csv"), &ks_csv(&out.ks))?;
    let mut man = manifest("experiment", serde_json::to_value(&cfg).expect("config serializes"));
    man["schedule_flags"] = serde_json::to_value(cfg.schedule.flags()).expect("flags serialize");
    man["schedule"] = serde_json::to_value(&out.schedule).expect("schedule serializes");
    write_file(&out_dir.join("manifest.json"), &(serde_json::to_string_pretty(&man).unwrap() + "\n"))?;
    for r in &out.ks {
        println!("t={} n={} ks={:.4} mean={:+.4} sd={:.4}", r.t, r.n_samples, r.ks_distance, r.sample_mean, r.sample_sd);
    }
    Ok(EXIT_OK)
}

fn thread_count(flag: Option<usize>) -> std::result::Result<Option<usize>, Failure> {
    if let Some(n) = flag {
        return if n > 0 { Ok(Some(n)) } else { Err(usage("--threads must be positive")) };
    }
    match std::env::var("BETAWALK_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("BETAWALK_THREADS must be a positive integer, got '{s}'"))),
        },
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Rate { alpha, beta, theta_grid, out } => cmd_rate(*alpha, *beta, theta_grid, out),
        Command::Fredholm { which } => cmd_fredholm(which),
        Command::Verify { suite } => cmd_verify(suite),
        Command::Experiment { config, out_dir } => cmd_experiment(config, out_dir),
    }
}

/// Run the command line `args` (including the program name) and return the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = thread_count(cli.threads).and_then(|n| match n {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(usage(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli),
    });
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
