//! Command-line front end for nagumo-core.

// `!(x <= y)` guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nagumo_core::lattice::{collision_report, write_speed_csv, write_trajectory_csv};
use nagumo_core::numeric::fmt_float;
use nagumo_core::scan::describe_contradictions;
use nagumo_core::verify::{run_suite, Suite};
use nagumo_core::{
    bifurcation_curves, build_ic, classify, estimate_speed, estimate_upper_speed,
    find_standing_front, gamma_fn, integrate, scan, solve_equilibria, write_csv, IcKind, Params,
    ScanOptions, SimConfig, SimulatePolicy,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nagumo",
    version,
    about = "Equilibria, wave criteria and simulations for the bichromatic Nagumo lattice"
)]
struct Cli {
    /// key=value file supplying defaults for any flag (flags win)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print all equilibria with stability
    Equilibria {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        json: bool,
    },
    /// CSV of a,d_minus,d_plus
    Curves(Sweep),
    /// CSV of a,gamma
    Gamma(Sweep),
    /// Criterion report at one point
    Classify {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        json: bool,
    },
    /// Scan a rectangle of parameter space to CSV
    Regions(Regions),
    /// Integrate the lattice equation and write the trajectory
    Simulate(Simulate),
    /// Newton solve for a standing front
    Standing {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run self-checks; nonzero exit on failure
    Verify {
        /// corner | cusp | gamma | all
        #[arg(long)]
        suite: Option<String>,
    },
}

#[derive(Args)]
struct Point {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Args)]
struct Sweep {
    #[arg(long)]
    a_min: Option<f64>,
    #[arg(long)]
    a_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct Regions {
    #[arg(long)]
    a_min: Option<f64>,
    #[arg(long)]
    a_max: Option<f64>,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    d_max: Option<f64>,
    #[arg(long)]
    res: Option<usize>,
    /// never | undetermined | always
    #[arg(long)]
    simulate: Option<String>,
    /// cap on simulated cells, drawn at random
    #[arg(long)]
    budget: Option<usize>,
    /// extra proven cells simulated as a cross-check
    #[arg(long)]
    audit: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Simulate {
    #[command(flatten)]
    point: Point,
    /// bichromatic | upper | mono | plateau
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// record a state every this many steps
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// also write t,interface_pos here
    #[arg(long)]
    speed_out: Option<PathBuf>,
}

/// Errors sorted by exit code.
enum Failure {
    Usage(String),
    Numeric(anyhow::Error),
    Check(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Numeric(e.into())
    }
}

type Outcome = Result<(), Failure>;

/// Flag values with fallback to the config file.
struct Settings {
    values: HashMap<String, String>,
    source: Option<PathBuf>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Settings {
                values: HashMap::new(),
                source: None,
            });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::Usage(format!("{}:{}: expected key=value", path.display(), k + 1))
            })?;
            values.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(Settings {
            values,
            source: Some(path.to_path_buf()),
        })
    }

    fn opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                let src = self
                    .source
                    .as_deref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default();
                Failure::Usage(format!("{src}: bad value {raw:?} for {key}: {e}"))
            }),
        }
    }

    fn req<T>(&self, flag: Option<T>, key: &str) -> Result<T, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt(flag, key)?
            .ok_or_else(|| Failure::Usage(format!("missing --{key}")))
    }

    fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Failure>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    fn params(&self, point: &Point) -> Result<Params, Failure> {
        let a = self.req(point.a, "a")?;
        let d = self.req(point.d, "d")?;
        Params::new(a, d).map_err(|e| Failure::Usage(e.to_string()))
    }

    fn sweep(&self, s: &Sweep) -> Result<Vec<f64>, Failure> {
        let lo: f64 = self.req(s.a_min, "a-min")?;
        let hi: f64 = self.req(s.a_max, "a-max")?;
        let steps: usize = self.req(s.steps, "steps")?;
        if !(lo <= hi) || steps == 0 {
            return Err(Failure::Usage("need a-min <= a-max and steps >= 1".into()));
        }
        Ok((0..=steps)
            .map(|k| {
                if k == steps {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / steps as f64
                }
            })
            .collect())
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn run(cli: Cli) -> Outcome {
    let cfg = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Equilibria { point, json } => {
            let params = cfg.params(&point)?;
            let roots = solve_equilibria(params)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&roots)?);
            } else {
                println!("branch,u,v,stability");
                for r in roots {
                    println!(
                        "{:?},{},{},{:?}",
                        r.branch,
                        fmt_float(r.u),
                        fmt_float(r.v),
                        r.stability
                    );
                }
            }
        }
        Command::Curves(s) => {
            println!("a,d_minus,d_plus");
            for a in cfg.sweep(&s)? {
                if !(0.0..=1.0).contains(&a) {
                    return Err(Failure::Usage(format!("a = {a} outside [0, 1]")));
                }
                let c = bifurcation_curves(a);
                println!(
                    "{},{},{}",
                    fmt_float(c.a),
                    fmt_float(c.d_minus),
                    fmt_float(c.d_plus)
                );
            }
        }
        Command::Gamma(s) => {
            let axis = cfg.sweep(&s)?;
            if axis.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                return Err(Failure::Usage("gamma needs 0 < a < 1".into()));
            }
            println!("a,gamma");
            for a in axis {
                println!("{},{}", fmt_float(a), fmt_opt(gamma_fn(a).ok()));
            }
        }
        Command::Classify { point, json } => {
            let params = cfg.params(&point)?;
            let r = classify(params);
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("a: {}", fmt_float(params.a));
                println!("d: {}", fmt_float(params.d));
                println!(
                    "root_count: {}",
                    r.root_count.map(|n| n.to_string()).unwrap_or_default()
                );
                println!("in_omega_minus: {}", r.in_omega_minus);
                println!("v_bot: {}", fmt_opt(r.v_bot));
                println!("v_top: {}", fmt_opt(r.v_top));
                println!("u_top: {}", fmt_opt(r.u_top));
                println!("u_bot: {}", fmt_opt(r.u_bot));
                println!("gamma_at_dminus: {}", fmt_opt(r.gamma_at_dminus));
                println!("pinning_bound_holds: {}", r.pinning_bound_holds);
                println!(
                    "travelling_test: {}",
                    r.travelling_test.map(|b| b.to_string()).unwrap_or_default()
                );
                println!(
                    "simplified_test: {}",
                    r.simplified_test.map(|b| b.to_string()).unwrap_or_default()
                );
                println!("verdict: {}", r.verdict.as_str());
            }
        }
        Command::Regions(r) => regions(&cfg, r)?,
        Command::Simulate(s) => simulate(&cfg, s)?,
        Command::Standing { point, n, out } => {
            let params = cfg.params(&point)?;
            let n = cfg.or(n, "n", 128)?;
            let out: PathBuf = cfg.req(out, "out")?;
            let front = find_standing_front(params, n)?;
            front.write_csv(&out)?;
            println!("residual: {}", fmt_float(front.residual_norm));
            println!("newton_steps: {}", front.newton_steps);
        }
        Command::Verify { suite } => {
            let suite: Suite = cfg
                .or(suite, "suite", "all".to_string())?
                .parse()
                .map_err(Failure::Usage)?;
            let checks = run_suite(suite);
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(Failure::Check(format!(
                    "{failed} of {} checks failed",
                    checks.len()
                )));
            }
        }
    }
    Ok(())
}

fn regions(cfg: &Settings, r: Regions) -> Outcome {
    let a_range = (
        cfg.or(r.a_min, "a-min", 0.0)?,
        cfg.or(r.a_max, "a-max", 1.0)?,
    );
    let d_range = (
        cfg.or(r.d_min, "d-min", 0.0)?,
        cfg.or(r.d_max, "d-max", 0.05)?,
    );
    let res = cfg.or(r.res, "res", 64)?;
    let policy: SimulatePolicy = cfg
        .or(r.simulate, "simulate", "never".to_string())?
        .parse()
        .map_err(Failure::Usage)?;
    let defaults = ScanOptions::default();
    let options = ScanOptions {
        simulate: policy,
        sim_budget: cfg.opt(r.budget, "budget")?,
        audit_budget: cfg.or(r.audit, "audit", 0)?,
        seed: cfg.or(r.seed, "seed", defaults.seed)?,
        sim_n: cfg.or(r.n, "n", defaults.sim_n)?,
        sim_t_end: cfg.or(r.t_end, "t-end", defaults.sim_t_end)?,
    };
    let out: PathBuf = cfg.req(r.out, "out")?;
    let grid = scan(a_range, d_range, res, &options).map_err(|e| Failure::Usage(e.to_string()))?;
    write_csv(&grid, &out)?;
    let simulated = grid.cells.iter().filter(|c| c.sim_class.is_some()).count();
    println!("cells: {}", grid.cells.len());
    println!("simulated: {simulated}");
    let bad = describe_contradictions(&grid);
    if !bad.is_empty() {
        eprint!("{bad}");
        return Err(Failure::Check(
            "criterion/simulation contradictions found".into(),
        ));
    }
    Ok(())
}

fn simulate(cfg: &Settings, s: Simulate) -> Outcome {
    let params = cfg.params(&s.point)?;
    let kind = match cfg.or(s.kind, "kind", "bichromatic".to_string())?.as_str() {
        "bichromatic" => IcKind::BichromaticFront,
        "upper" => IcKind::UpperBichromaticFront,
        "mono" => IcKind::MonochromaticFront,
        "plateau" => IcKind::Plateau,
        other => return Err(Failure::Usage(format!("unknown kind {other:?}"))),
    };
    let n = cfg.or(s.n, "n", 512)?;
    let t_end = cfg.or(s.t_end, "t-end", 2000.0)?;
    let mut config = SimConfig::new(n, params.d, t_end);
    config.dt = cfg.or(s.dt, "dt", config.dt)?;
    config.record_stride = cfg.or(s.stride, "stride", config.record_stride)?;
    config
        .validate(params.d)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let width = cfg.or(s.width, "width", 2.0)?;
    let out: PathBuf = cfg.req(s.out, "out")?;
    let speed_out: Option<PathBuf> = cfg.opt(s.speed_out, "speed-out")?;

    if kind == IcKind::Plateau {
        let ic = build_ic(kind, params, &config, n as f64 / 4.0, width)?;
        let trajectory = integrate(&ic, params, &config)?;
        write_trajectory_csv(&trajectory, &out)?;
        let report = collision_report(&ic, &trajectory, params);
        let first = report.widths.first().map_or(0, |w| w.1);
        let last = report.widths.last().map_or(0, |w| w.1);
        println!("buffer_width_start: {first}");
        println!("buffer_width_end: {last}");
        println!(
            "width_non_increasing: {}",
            report.width_non_increasing_after(0.1)
        );
        println!("final_residual: {}", fmt_float(report.final_residual));
        println!("monochromatic_outcome: {}", report.monochromatic_outcome);
        return Ok(());
    }

    let center = match kind {
        IcKind::UpperBichromaticFront => 3.0 * n as f64 / 4.0,
        IcKind::BichromaticFront => n as f64 / 4.0,
        _ => n as f64 / 2.0,
    };
    let ic = build_ic(kind, params, &config, center, width)?;
    let trajectory = integrate(&ic, params, &config)?;
    write_trajectory_csv(&trajectory, &out)?;
    let estimate = match kind {
        IcKind::BichromaticFront => Some(estimate_speed(&trajectory, params)?),
        IcKind::UpperBichromaticFront => Some(estimate_upper_speed(&trajectory, params)?),
        _ => None,
    };
    if let Some(e) = estimate {
        println!("speed: {}", fmt_float(e.c));
        println!("r_squared: {}", fmt_float(e.r_squared));
        println!("std_error: {}", fmt_float(e.std_error));
        println!("displacement: {}", fmt_float(e.displacement));
        println!("class: {}", e.classification.as_str());
        if let Some(path) = speed_out {
            write_speed_csv(&e, &path)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
