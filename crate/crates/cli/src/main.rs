//! `hskpz`: samplers, scans and verification suites for half-space KPZ models.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hskpz::horizon::{self, HorizonGrid};
use hskpz::lpp::{self, Constraint, PassageQuery, TieBreak};
use hskpz::pam::{self, SpaceTimePoint};
use hskpz::tasep::{self, ClockField, HeightFunction};
use hskpz::verify::{self, scan, MCConfig};
use hskpz::{polymer, EnvironmentSpec, Error, LazyField, SeededSource};

#[derive(Parser, Debug)]
#[command(name = "hskpz", version, about = "Half-space KPZ samplers and checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed.
    #[arg(long, global = true, env = "HSKPZ_SEED")]
    seed: Option<u64>,
    /// Number of replicas; for `verify`, overrides every suite's default.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file with any of `seed`, `replicas`, `workers`, `format`, `out`. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    replicas: Option<usize>,
    workers: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
struct Resolved {
    seed: u64,
    replicas: Option<usize>,
    workers: usize,
    format: Format,
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples from one of the models.
    Sample {
        #[command(subcommand)]
        kind: SampleKind,
    },
    /// Run a verification suite; exits nonzero if any check fails.
    Verify {
        /// Suite name, or `all`.
        suite: String,
    },
    /// Emit plot-ready tables.
    Scan {
        #[command(subcommand)]
        kind: ScanKind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ConstraintArg {
    None,
    HalfSpace,
    Diagonal,
}

#[derive(Subcommand, Debug)]
enum SampleKind {
    /// Half-space exponential passage time `X(1,1;n,m)`.
    Lpp {
        #[arg(long, default_value_t = 100)]
        n: i64,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = ConstraintArg::HalfSpace)]
        constraint: ConstraintArg,
        /// Also return the geodesic (single replica only).
        #[arg(long)]
        geodesic: bool,
    },
    /// Half-space log-gamma `log Z(1,1;n,m)`.
    Polymer {
        #[arg(long, default_value_t = 50)]
        n: i64,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Stationary horizon marginals `R_1, …, R_k` on `[-T, T]`.
    Horizon {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long, value_delimiter = ',', default_value = "1.0,0.5", allow_hyphen_values = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Half-space TASEP heights driven by Poisson clocks.
    Tasep {
        #[arg(long, default_value_t = 10.0)]
        t: f64,
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Last observed site.
        #[arg(long, default_value_t = 30)]
        x_max: usize,
        /// `wedge` (narrow wedge at 0) or `flat`.
        #[arg(long, default_value = "wedge")]
        init: String,
        /// Number of equally spaced snapshots after time 0.
        #[arg(long, default_value_t = 10)]
        snapshots: usize,
    },
    /// Reduced multi-level Poisson-avoiding distance `H_d⁻(x,s;y,t)` and a geodesic.
    Pam {
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, default_value_t = 5)]
        y: usize,
        #[arg(long, default_value_t = 10.0)]
        t: f64,
    },
}

#[derive(Subcommand, Debug)]
enum ScanKind {
    /// Tail probabilities of `X(1,1;n,n)` with a fitted envelope.
    Tails {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        n: i64,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        eps: Vec<f64>,
        #[arg(long, default_value = "upper")]
        side: String,
    },
    /// Variance of `X(1,1;n,n)` against `n` and the fitted exponent.
    Exponent {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "250,500,1000")]
        ns: Vec<i64>,
    },
    /// `mean/n` against the limit shape.
    Shape {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "1000")]
        n: Vec<i64>,
    },
    /// Tails of spatial and temporal two-point increments.
    TwoPoint {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        n: i64,
        #[arg(long)]
        z0: Option<i64>,
        #[arg(long)]
        r: Option<i64>,
    },
}

fn resolve(common: &Common) -> anyhow::Result<Resolved> {
    let file = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<ConfigFile>(&text).map_err(|e| Error::Usage(format!("config {}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    Ok(Resolved {
        seed: common.seed.or(file.seed).unwrap_or(1),
        replicas: common.replicas.or(file.replicas),
        workers: common.workers.or(file.workers).unwrap_or(0),
        format: common.format.or(file.format).unwrap_or(Format::Json),
        out: common.out.clone().or(file.out),
    })
}

fn write_out(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_header(cfg: &Resolved, extra: &Value) -> String {
    format!("# {}\n", json!({"config": cfg, "params": extra}))
}

fn mc(cfg: &Resolved, default: usize) -> MCConfig {
    MCConfig::new(cfg.replicas.unwrap_or(default), cfg.seed).with_workers(cfg.workers)
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Usage(msg.into()).into()
}

fn sample(kind: &SampleKind, cfg: &Resolved) -> anyhow::Result<String> {
    match kind {
        SampleKind::Lpp { n, m, alpha, constraint, geodesic } => {
            let m = m.unwrap_or(*n);
            if *n < 1 || m < 1 {
                return Err(usage("n and m must be at least 1"));
            }
            let c = match constraint {
                ConstraintArg::None => Constraint::None,
                ConstraintArg::HalfSpace => Constraint::HalfSpace,
                ConstraintArg::Diagonal => Constraint::DiagonalCondition,
            };
            if matches!(c, Constraint::HalfSpace) && m > *n {
                return Err(usage("half-space passage to (n, m) needs n ≥ m"));
            }
            let spec = EnvironmentSpec::half_space_exponential(*alpha);
            let params = json!({"kind": "lpp", "n": n, "m": m, "alpha": alpha, "constraint": constraint});
            let mcfg = mc(cfg, 1);
            if *geodesic {
                if mcfg.replicas != 1 {
                    return Err(usage("--geodesic needs a single replica"));
                }
                let f = LazyField::new(spec, SeededSource::new(cfg.seed, 0))?;
                let r = lpp::passage_with_geodesic(&f, &PassageQuery::new((1, 1), (*n, m)).with(c), TieBreak::Left)?;
                let path = r.geodesic.unwrap_or_default();
                return Ok(match cfg.format {
                    Format::Json => pretty(json!({"config": cfg, "params": params, "value": r.value, "geodesic": path})),
                    Format::Csv => {
                        let mut s = csv_header(cfg, &params) + "i,j\n";
                        for (i, j) in path {
                            s.push_str(&format!("{i},{j}\n"));
                        }
                        s
                    }
                });
            }
            let values = mcfg.run(|s| {
                let f = LazyField::new(spec.clone(), s)?;
                lpp::passage_value_streaming(&f, (1, 1), (*n, m), c)
            })?;
            Ok(values_output(cfg, &params, &values))
        }
        SampleKind::Polymer { n, m, alpha, beta } => {
            let m = m.unwrap_or(*n);
            if *n < 1 || m < 1 || m > *n {
                return Err(usage("need n ≥ m ≥ 1"));
            }
            let params = json!({"kind": "polymer", "n": n, "m": m, "alpha": alpha, "beta": beta});
            let values = mc(cfg, 1).run(|s| {
                let f = LazyField::new(EnvironmentSpec::half_space_log_gamma(*alpha, *beta), s)?;
                let q = PassageQuery::new((1, 1), (*n, m)).with(Constraint::HalfSpace);
                Ok(polymer::log_partition(&f, &q)?.log_z)
            })?;
            Ok(values_output(cfg, &params, &values))
        }
        SampleKind::Horizon { rho, lambdas, t_max, delta } => {
            let grid = HorizonGrid::new(*t_max, *delta).map_err(|e| usage(e.to_string()))?;
            let h = horizon::sample_horizon_marginals(*rho, lambdas, grid, &SeededSource::new(cfg.seed, 0))
                .map_err(|e| usage(e.to_string()))?;
            let params = json!({"kind": "horizon", "rho": rho, "lambdas": lambdas, "t_max": t_max, "delta": delta});
            Ok(match cfg.format {
                Format::Json => pretty(json!({"config": cfg, "params": params, "xs": h.xs, "processes": h.processes})),
                Format::Csv => csv_header(cfg, &params) + &h.to_csv(),
            })
        }
        SampleKind::Tasep { t, alpha, d, x_max, init, snapshots } => {
            let h0 = match init.as_str() {
                "wedge" => HeightFunction::narrow_wedge(0, x_max + 1),
                "flat" => HeightFunction::flat(x_max + 1),
                other => return Err(usage(format!("unknown initial profile '{other}' (wedge, flat)"))),
            };
            if !(*t >= 0.0) || !(*alpha > 0.0) || *d == 0 {
                return Err(usage("need t ≥ 0, α > 0 and d ≥ 1"));
            }
            let sites = tasep::padded_sites(*x_max, *alpha, *t);
            let clocks = ClockField::sample(*d, *alpha, sites, *t, &SeededSource::new(cfg.seed, 0))?;
            let k = (*snapshots).max(1);
            let mut snaps = vec![(0.0, h0.clone())];
            for s in 1..=k {
                let time = t * s as f64 / k as f64;
                snaps.push((time, tasep::evolve_observed(&h0, &clocks, time, *x_max)?));
            }
            let params = json!({"kind": "tasep", "t": t, "alpha": alpha, "d": d, "x_max": x_max, "init": init, "sites": sites});
            Ok(match cfg.format {
                Format::Json => {
                    let rows: Vec<Value> = snaps.iter().map(|(t, h)| json!({"t": t, "h": h.values()})).collect();
                    pretty(json!({"config": cfg, "params": params, "snapshots": rows}))
                }
                Format::Csv => csv_header(cfg, &params) + &tasep::trajectory_csv(&snaps),
            })
        }
        SampleKind::Pam { d, alpha, x, s, y, t } => {
            if !(*s < *t) || *s < 0.0 {
                return Err(usage("need 0 ≤ s < t"));
            }
            let sites = pam::pam_window(x.max(y) + 1, *d, *t - *s);
            let clocks = ClockField::sample(*d, *alpha, sites, *t, &SeededSource::new(cfg.seed, 0))?;
            let value = pam::pam_distance_reduced(&clocks, *x, *s, *y, *t)?;
            // a geodesic between the level pair attaining the minimum
            let m = 2 * d;
            let mut best = None;
            for a in (0..m).filter(|a| (x + a) % 2 == 0) {
                for b in (0..m).filter(|b| (y + b) % 2 == 0) {
                    let p = SpaceTimePoint::new(*x, a, *s);
                    let q = SpaceTimePoint::new(*y, b, *t);
                    if pam::pam_distance(&clocks, p, q)? == value && best.is_none() {
                        best = Some(pam::pam_geodesic(&clocks, p, q)?);
                    }
                }
            }
            let geo = best.expect("the minimum is attained");
            let params = json!({"kind": "pam", "d": d, "alpha": alpha, "x": x, "s": s, "y": y, "t": t, "sites": sites});
            Ok(match cfg.format {
                Format::Json => pretty(json!({"config": cfg, "params": params, "value": value, "geodesic": geo.points})),
                Format::Csv => csv_header(cfg, &json!({"value": value, "model": params})) + &geo.to_csv(),
            })
        }
    }
}

fn pretty(v: Value) -> String {
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

fn values_output(cfg: &Resolved, params: &Value, values: &[f64]) -> String {
    match cfg.format {
        Format::Json => pretty(json!({"config": cfg, "params": params, "values": values})),
        Format::Csv => {
            let mut s = csv_header(cfg, params) + "replica,value\n";
            for (r, v) in values.iter().enumerate() {
                s.push_str(&format!("{r},{v}\n"));
            }
            s
        }
    }
}

fn table_output(cfg: &Resolved, table: &scan::Table) -> String {
    match cfg.format {
        Format::Json => pretty(json!({"config": cfg, "table": table})),
        Format::Csv => table.to_csv(),
    }
}

fn sidecar(out: &Option<PathBuf>, value: &Value) -> anyhow::Result<()> {
    if let Some(p) = out {
        let side = p.with_extension("json");
        if side != *p {
            std::fs::write(&side, pretty(value.clone())).with_context(|| format!("writing {}", side.display()))?;
        }
    }
    Ok(())
}

fn run_scan(kind: &ScanKind, cfg: &Resolved) -> anyhow::Result<String> {
    match kind {
        ScanKind::Tails { alpha, n, eps, side } => {
            if eps.is_empty() {
                return Err(usage("scan tails needs a nonempty --eps grid"));
            }
            let side = match side.as_str() {
                "upper" => scan::TailSide::Upper,
                "lower" => scan::TailSide::Lower,
                other => return Err(usage(format!("unknown tail side '{other}' (upper, lower)"))),
            };
            let t = scan::tail_scan(*alpha, *n, eps, side, &mc(cfg, 2000)).map_err(|e| usage(e.to_string()))?;
            Ok(table_output(cfg, &t))
        }
        ScanKind::Exponent { alpha, ns } => {
            let (t, fit) = scan::exponent_scan(*alpha, ns, &mc(cfg, 500)).map_err(|e| usage(e.to_string()))?;
            let fit = serde_json::to_value(&fit)?;
            sidecar(&cfg.out, &json!({"config": cfg, "fit": fit}))?;
            Ok(match cfg.format {
                Format::Json => pretty(json!({"config": cfg, "table": t, "fit": fit})),
                Format::Csv => t.to_csv(),
            })
        }
        ScanKind::Shape { alpha, n } => {
            let t = scan::shape_scan(*alpha, n, &mc(cfg, 200)).map_err(|e| usage(e.to_string()))?;
            Ok(table_output(cfg, &t))
        }
        ScanKind::TwoPoint { alpha, n, z0, r } => {
            let z0 = z0.unwrap_or((*n as f64).powf(2.0 / 3.0).floor() as i64);
            let r = r.unwrap_or(n / 4);
            let t = scan::two_point_scan(*alpha, *n, z0, r, &mc(cfg, 2000)).map_err(|e| usage(e.to_string()))?;
            Ok(table_output(cfg, &t))
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = resolve(&cli.common)?;
    match &cli.command {
        Command::Sample { kind } => {
            write_out(&cfg.out, &sample(kind, &cfg)?)?;
            Ok(true)
        }
        Command::Scan { kind } => {
            write_out(&cfg.out, &run_scan(kind, &cfg)?)?;
            Ok(true)
        }
        Command::Verify { suite } => {
            let mcfg = MCConfig::new(cfg.replicas.unwrap_or(0), cfg.seed).with_workers(cfg.workers);
            let report = verify::run_suite(suite, &mcfg)?;
            let text = match cfg.format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => csv_header(&cfg, &json!({"suite": suite})) + &report.to_csv(),
            };
            write_out(&cfg.out, &text)?;
            for c in report.failures() {
                eprintln!("FAIL {}", c.label);
            }
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(e.downcast_ref::<Error>(), Some(Error::Usage(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
