use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use bovdyn::bundle::{parse_param, parse_window};
use bovdyn::parallel::{init_thread_pool, render_parallel};
use bovdyn::ppm::{write_ppm, write_stats_csv};
use bovdyn::repro::{run_repro, Example, EXAMPLE_NAMES};
use bovdyn_core::analysis::{
    analyze_fixed_point, critical_set_closed_form, find_critical_points_newton, find_real_roots,
    find_two_cycle,
};
use bovdyn_core::basin::{connectivity_probe, RenderConfig};
use bovdyn_core::checkers::{
    check_bov_attracting_recipe, check_critical_values_in_disk, check_disk_self_map,
    check_f3_basin_chain, Verdict,
};
use bovdyn_core::expr::ExprNode;
use bovdyn_core::interval::{cascade_sign, certify_sign, Interval, SignVerdict, DEFAULT_MAX_DEPTH};
use bovdyn_core::sphere::{iterate_orbit, OrbitConfig};
use bovdyn_core::{Complex, MapExpr};
use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 pass, 1 check failed, 2 usage (from clap), 3 numeric or
/// IO abort.
const EXIT_PASS: u8 = 0;
const EXIT_CHECK_FAIL: u8 = 1;
const EXIT_ABORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "bovdyn",
    version,
    about = "Fixed points, certified sign proofs, orbits and basin images for meromorphic maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate and classify fixed points, 2-cycles and critical sets; emits JSON
    Analyze(AnalyzeArgs),
    /// Iterate a seed and print the orbit prefix and fate as CSV
    Orbit(OrbitArgs),
    /// Certify the sign of a real expression on an interval; emits the certificate as JSON
    Verify(VerifyArgs),
    /// Run a hypothesis checker; exit code 0 iff every clause passes
    Check {
        #[command(subcommand)]
        checker: CheckCommand,
    },
    /// Render a basin-of-attraction image as binary PPM
    Render(RenderArgs),
    /// Julia connectivity probe over an increasing resolution ladder
    Probe(ProbeArgs),
    /// Re-run a scripted example end to end into an experiment bundle
    Repro(ReproArgs),
}

#[derive(Args)]
struct MapArgs {
    /// Map expression in z, e.g. 'lambda/(exp(z)+z)'
    #[arg(long)]
    map: String,
    /// Parameter binding, repeatable: --param lambda=0.04 or --param lambda=-0.2,0.35
    #[arg(long = "param", value_name = "NAME=RE[,IM]")]
    params: Vec<String>,
}

impl MapArgs {
    fn build(&self) -> Result<MapExpr> {
        let mut e = MapExpr::parse(&self.map).map_err(|err| anyhow!("--map: {err}"))?;
        for p in &self.params {
            let (name, value) = parse_param(p).map_err(|err| anyhow!("--param: {err}"))?;
            e = e.with_param(&name, value);
        }
        Ok(e)
    }

    fn config_fragment(&self) -> String {
        let mut s = format!("--map '{}'", self.map);
        for p in &self.params {
            s.push_str(&format!(" --param {p}"));
        }
        s
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Real interval lo,hi to search for fixed points of the map
    #[arg(long, value_name = "LO,HI")]
    interval: Option<String>,
    /// Also search the interval for a genuine 2-cycle
    #[arg(long, default_value_t = false)]
    two_cycle: bool,
    /// Newton window cx,cy,w,h for hunting critical points
    #[arg(long, value_name = "CX,CY,W,H")]
    critical_window: Option<String>,
    /// Seed grid per axis for the critical-point hunt
    #[arg(long, default_value_t = 32)]
    grid: u32,
    /// Closed-form critical set of lambda/(exp(z)+z) for k in LO,HI
    #[arg(long, value_name = "KLO,KHI")]
    closed_form: Option<String>,
    /// Write the JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Starting point re[,im]
    #[arg(long, value_name = "RE[,IM]")]
    seed: String,
    #[arg(long, default_value_t = 10_000)]
    max_iter: u32,
    /// Chordal cycle-agreement tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Number of orbit rows to print
    #[arg(long, default_value_t = 64)]
    limit: u32,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Real interval lo,hi
    #[arg(long, value_name = "LO,HI")]
    interval: String,
    /// Cascade through this many derivative orders (0 = plain bisection)
    #[arg(long, default_value_t = 0)]
    order: u32,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// lambda/(e^z+z) maps the disk |z| <= 0.5 strictly into itself
    DiskSelfMap {
        #[arg(long)]
        lambda: f64,
    },
    /// All critical values of lambda/(e^z+z) lie in the disk of this radius
    CriticalValues {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        #[arg(long, default_value_t = 50)]
        k_max: u32,
    },
    /// Contracting-disk recipe for eps/g + b on D_r(b)
    BovRecipe {
        /// The entire map g
        #[arg(long)]
        g: String,
        /// Disk center re[,im]
        #[arg(long, value_name = "RE[,IM]")]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        eps: f64,
    },
    /// The two-basin orbit chain of 0.1/(z^9+e^z) - 0.99
    F3Chain,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Window cx,cy,w,h
    #[arg(long, value_name = "CX,CY,W,H")]
    window: String,
    /// Square resolution in pixels
    #[arg(long, default_value_t = 512)]
    res: u32,
    #[arg(long, default_value_t = 10_000)]
    max_iter: u32,
    /// Output PPM path
    #[arg(long)]
    out: PathBuf,
    /// Optional stats CSV path (code,fraction rows)
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, value_name = "CX,CY,W,H")]
    window: String,
    /// Increasing resolution ladder, e.g. 128,256,512
    #[arg(long, default_value = "128,256,512")]
    res: String,
    #[arg(long, default_value_t = 10_000)]
    max_iter: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// One of: ex41-attracting, ex41-2cycle, ex42, ex43, ex44-parabolic, ex44-siegel
    example: String,
    /// Output directory for the bundle and any images
    #[arg(long, default_value = "repro-out")]
    out: PathBuf,
}

fn parse_complex(text: &str) -> Result<Complex> {
    let (re, im) = match text.split_once(',') {
        Some((re, im)) => (re, im),
        None => (text, "0"),
    };
    Ok(Complex::new(
        re.trim()
            .parse()
            .with_context(|| format!("bad real part in `{text}`"))?,
        im.trim()
            .parse()
            .with_context(|| format!("bad imaginary part in `{text}`"))?,
    ))
}

fn parse_interval(text: &str) -> Result<Interval> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("expected lo,hi, got `{text}`"))?;
    let lo: f64 = lo.trim().parse().context("bad interval endpoint")?;
    let hi: f64 = hi.trim().parse().context("bad interval endpoint")?;
    if lo > hi {
        bail!("interval endpoints out of order: {lo} > {hi}");
    }
    Ok(Interval::new(lo, hi))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn echo_config(fragment: &str) {
    eprintln!("# config: bovdyn {fragment}");
}

fn run_analyze(args: &AnalyzeArgs) -> Result<u8> {
    let map = args.map.build()?;
    let mut cfg = format!("analyze {}", args.map.config_fragment());
    let mut doc = serde_json::Map::new();

    if let Some(text) = &args.interval {
        let interval = parse_interval(text)?;
        cfg.push_str(&format!(" --interval {text}"));
        let g = MapExpr {
            root: ExprNode::Sub(Box::new(map.root.clone()), Box::new(ExprNode::Var)),
            params: map.params.clone(),
        };
        let roots = find_real_roots(&g, interval, 64)?;
        let mut records = Vec::new();
        for r in roots {
            let rec = analyze_fixed_point(
                &map,
                Complex::new(r, 0.0),
                1,
                &format!("bracket [{}, {}]", interval.lo, interval.hi),
            )?;
            records.push(rec);
        }
        doc.insert("fixed_points".into(), serde_json::to_value(&records)?);
        if args.two_cycle {
            cfg.push_str(" --two-cycle");
            let rec = find_two_cycle(&map, interval)?;
            doc.insert("two_cycle".into(), serde_json::to_value(&rec)?);
        }
    }

    if let Some(text) = &args.critical_window {
        let window = parse_window(text).map_err(|e| anyhow!("--critical-window: {e}"))?;
        cfg.push_str(&format!(" --critical-window {text} --grid {}", args.grid));
        let cs = find_critical_points_newton(&map, window, args.grid)?;
        doc.insert("critical_set".into(), serde_json::to_value(&cs)?);
    }

    if let Some(text) = &args.closed_form {
        let (lo, hi) = text
            .split_once(',')
            .ok_or_else(|| anyhow!("--closed-form expects KLO,KHI"))?;
        let (lo, hi): (i64, i64) = (lo.trim().parse()?, hi.trim().parse()?);
        let lambda = map
            .params
            .get("lambda")
            .copied()
            .ok_or_else(|| anyhow!("--closed-form needs --param lambda=..."))?;
        cfg.push_str(&format!(" --closed-form {text}"));
        let cs = critical_set_closed_form(lambda, lo, hi)?;
        doc.insert(
            "closed_form_critical_set".into(),
            serde_json::to_value(&cs)?,
        );
    }

    if doc.is_empty() {
        bail!("analyze needs at least one of --interval, --critical-window, --closed-form");
    }
    echo_config(&cfg);
    emit(
        &args.out,
        &serde_json::to_string_pretty(&serde_json::Value::Object(doc))?,
    )?;
    Ok(EXIT_PASS)
}

fn run_orbit(args: &OrbitArgs) -> Result<u8> {
    let map = args.map.build()?.inline_params()?;
    let seed = parse_complex(&args.seed)?;
    echo_config(&format!(
        "orbit {} --seed {} --max-iter {} --tol {} --limit {}",
        args.map.config_fragment(),
        args.seed,
        args.max_iter,
        args.tol,
        args.limit
    ));
    let cfg = OrbitConfig {
        max_iter: args.max_iter,
        conv_eps: args.tol,
        ..OrbitConfig::default()
    };
    let result = iterate_orbit(&map, seed, &cfg)?;

    println!("n,re,im");
    let mut z = seed;
    for n in 0..=args.limit.min(result.iterations_used) {
        println!("{n},{},{}", z.re, z.im);
        match map.eval(z, cfg.pole_eps)?.finite() {
            Some(v) => z = v,
            None => break,
        }
    }
    println!("fate,{:?},{}", result.fate, result.iterations_used);
    Ok(EXIT_PASS)
}

fn run_verify(args: &VerifyArgs) -> Result<u8> {
    let map = args.map.build()?;
    let interval = parse_interval(&args.interval)?;
    echo_config(&format!(
        "verify {} --interval {} --order {} --max-depth {}",
        args.map.config_fragment(),
        args.interval,
        args.order,
        args.max_depth
    ));
    let cert = if args.order == 0 {
        certify_sign(&map, interval, args.max_depth)?
    } else {
        cascade_sign(&map, interval, args.order, args.max_depth)?
    };
    let verdict = cert.verdict;
    emit(&args.out, &serde_json::to_string_pretty(&cert)?)?;
    Ok(if verdict == SignVerdict::Indeterminate {
        EXIT_CHECK_FAIL
    } else {
        EXIT_PASS
    })
}

fn run_check(checker: &CheckCommand) -> Result<u8> {
    let report = match checker {
        CheckCommand::DiskSelfMap { lambda } => {
            echo_config(&format!("check disk-self-map --lambda {lambda}"));
            check_disk_self_map(*lambda)
        }
        CheckCommand::CriticalValues {
            lambda,
            radius,
            k_max,
        } => {
            echo_config(&format!(
                "check critical-values --lambda {lambda} --radius {radius} --k-max {k_max}"
            ));
            check_critical_values_in_disk(*lambda, *radius, *k_max)
        }
        CheckCommand::BovRecipe {
            g,
            center,
            radius,
            eps,
        } => {
            echo_config(&format!(
                "check bov-recipe --g '{g}' --center {center} --radius {radius} --eps {eps}"
            ));
            let g = MapExpr::parse(g).map_err(|err| anyhow!("--g: {err}"))?;
            let b = parse_complex(center)?;
            check_bov_attracting_recipe(&g, b, *radius, *eps)
        }
        CheckCommand::F3Chain => {
            echo_config("check f3-chain");
            check_f3_basin_chain()
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.overall == Verdict::Pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAIL
    })
}

fn run_render(args: &RenderArgs) -> Result<u8> {
    let map = args.map.build()?.inline_params()?;
    let window = parse_window(&args.window).map_err(|e| anyhow!("--window: {e}"))?;
    echo_config(&format!(
        "render {} --window {} --res {} --max-iter {} --out {}",
        args.map.config_fragment(),
        args.window,
        args.res,
        args.max_iter,
        args.out.display()
    ));
    let mut cfg = RenderConfig::default();
    cfg.orbit.max_iter = args.max_iter;
    let img = render_parallel(&map, window, args.res, args.res, &[], &cfg)?;
    write_ppm(&img, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(stats) = &args.stats {
        write_stats_csv(&img, stats).with_context(|| format!("writing {}", stats.display()))?;
    }
    eprintln!(
        "# wrote {} ({} attractors, {} codes)",
        args.out.display(),
        img.attractors.len(),
        img.stats.len()
    );
    Ok(EXIT_PASS)
}

fn run_probe(args: &ProbeArgs) -> Result<u8> {
    let map = args.map.build()?.inline_params()?;
    let window = parse_window(&args.window).map_err(|e| anyhow!("--window: {e}"))?;
    let resolutions: Result<Vec<u32>, _> = args
        .res
        .split(',')
        .map(|r| r.trim().parse::<u32>())
        .collect();
    let resolutions = resolutions.context("--res expects e.g. 128,256,512")?;
    echo_config(&format!(
        "probe {} --window {} --res {} --max-iter {}",
        args.map.config_fragment(),
        args.window,
        args.res,
        args.max_iter
    ));
    let mut cfg = RenderConfig::default();
    cfg.orbit.max_iter = args.max_iter;
    let report = connectivity_probe(&map, window, &resolutions, &cfg)?;
    emit(&args.out, &serde_json::to_string_pretty(&report)?)?;
    Ok(EXIT_PASS)
}

fn run_repro_cmd(args: &ReproArgs) -> Result<u8> {
    let example = Example::parse(&args.example).ok_or_else(|| {
        anyhow!(
            "unknown example `{}`; expected one of {}",
            args.example,
            EXAMPLE_NAMES.join(", ")
        )
    })?;
    echo_config(&format!(
        "repro {} --out {}",
        args.example,
        args.out.display()
    ));
    let timestamp = std::env::var("BOVDYN_TIMESTAMP").ok();
    let outcome = run_repro(example, &args.out, timestamp.as_deref())?;
    for (what, ok) in &outcome.checks {
        println!("{} {}", if *ok { "PASS" } else { "FAIL" }, what);
    }
    println!(
        "bundle: {}{}",
        outcome.bundle_path.display(),
        outcome
            .ppm_path
            .as_ref()
            .map(|p| format!("  image: {}", p.display()))
            .unwrap_or_default()
    );
    Ok(if outcome.pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAIL
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    let result = match &cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Orbit(args) => run_orbit(args),
        Command::Verify(args) => run_verify(args),
        Command::Check { checker } => run_check(checker),
        Command::Render(args) => run_render(args),
        Command::Probe(args) => run_probe(args),
        Command::Repro(args) => run_repro_cmd(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ABORT)
        }
    }
}
