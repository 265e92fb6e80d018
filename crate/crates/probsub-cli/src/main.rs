//! Scenario-driven verification harness for distance-distribution-function
//! valued submeasures.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a violation was
//! found (the report carries replayable witnesses), 2 on input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(v > 0.0)` also rejects NaN

mod scenario;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use probsub::agg::{classify, make_family, AggClass, LatticeMode, TnormFamily};
use probsub::classes::{theta_lattice, theta_leq, ThetaDescriptor};
use probsub::grid::{Ddf, Grid, DEFAULT_GRID_N, DEFAULT_X_MAX};
use probsub::psub::{
    check_axioms, check_rho, extract_numerical, neighborhood, AxiomReport, CheckParams,
};
use probsub::report::TAIL_POLICY;
use probsub::sets::{check_numerical, NumericalSubmeasure, Ring};
use probsub::tau::{tau_conv, TriangleSpec};

use scenario::ScenarioFile;

#[derive(Parser)]
#[command(
    name = "probsub",
    version,
    about = "Distance-distribution-function-valued submeasures: constructions and exhaustive desk-scale checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Grid intervals (overrides the scenario).
    #[arg(long, global = true)]
    grid_n: Option<usize>,

    /// Grid upper end (overrides the scenario).
    #[arg(long, global = true)]
    xmax: Option<f64>,

    /// Inequality slack (overrides the scenario).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for quasi-random off-knot sampling, echoed in reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Also write the report (JSON, or CSV for `tau`) to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Directory for CSV exports of constructed DDFs.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the submeasure laws of a constructed gamma against (L, A).
    Check,
    /// Build gamma, validate its eta table and export per-set CSVs.
    Construct,
    /// Extract a numerical table from gamma through an additive generator.
    Extract,
    /// Classification flags for an aggregation function.
    Classify,
    /// Sup-convolution of two DDFs, emitted as CSV.
    Tau,
    /// Compare two class descriptors in the submeasure-class order.
    Order,
    /// Join or meet of two class descriptors, with flags of the result.
    Lattice,
    /// Pseudo-metric checks for a constructed gamma.
    Rho,
    /// List the ring members inside a neighborhood of the empty set.
    Neighborhood,
    /// Full parameterized-family sweep against the matching t-norms.
    Conformance,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok(pass) => {
            eprintln!(
                "probsub: finished in {:.2}s ({})",
                started.elapsed().as_secs_f64(),
                if pass { "pass" } else { "violations found" }
            );
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("probsub: error: {err:#}");
            ExitCode::from(2)
        }
    }
}

#[derive(Serialize)]
struct RunReport<T: Serialize> {
    subcommand: &'static str,
    version: &'static str,
    seed: u64,
    tail_policy: &'static str,
    #[serde(flatten)]
    body: T,
}

struct Ctx {
    scenario: ScenarioFile,
    grid: Grid,
    params: CheckParams,
    seed: u64,
}

fn load_ctx(cli: &Cli) -> Result<Ctx> {
    let scenario = match &cli.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read scenario {}", path.display()))?;
            ScenarioFile::parse(&text)?
        }
        None => ScenarioFile::default(),
    };
    let n = cli
        .grid_n
        .or(scenario.grid.as_ref().map(|g| g.n))
        .unwrap_or(DEFAULT_GRID_N);
    let x_max = cli
        .xmax
        .or(scenario.grid.as_ref().map(|g| g.x_max))
        .unwrap_or(DEFAULT_X_MAX);
    let grid = Grid::uniform(x_max, n)?;
    let params = CheckParams {
        tol: cli.tol.or(scenario.tol),
        seed: cli.seed,
        ..CheckParams::default()
    };
    Ok(Ctx {
        scenario,
        grid,
        params,
        seed: cli.seed,
    })
}

fn run(cli: &Cli) -> Result<bool> {
    let ctx = load_ctx(cli)?;
    match cli.command {
        Command::Check => cmd_check(cli, &ctx),
        Command::Construct => cmd_construct(cli, &ctx),
        Command::Extract => cmd_extract(cli, &ctx),
        Command::Classify => cmd_classify(cli, &ctx),
        Command::Tau => cmd_tau(cli, &ctx),
        Command::Order => cmd_order(cli, &ctx),
        Command::Lattice => cmd_lattice(cli, &ctx),
        Command::Rho => cmd_rho(cli, &ctx),
        Command::Neighborhood => cmd_neighborhood(cli, &ctx),
        Command::Conformance => cmd_conformance(cli, &ctx),
    }
}

fn emit<T: Serialize>(cli: &Cli, ctx: &Ctx, subcommand: &'static str, body: T) -> Result<()> {
    let report = RunReport {
        subcommand,
        version: env!("CARGO_PKG_VERSION"),
        seed: ctx.seed,
        tail_policy: TAIL_POLICY,
        body,
    };
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(path) = &cli.out {
        fs::write(path, format!("{text}\n"))
            .with_context(|| format!("cannot write report to {}", path.display()))?;
    }
    Ok(())
}

fn scenario_ring(ctx: &Ctx) -> Result<Ring> {
    let universe = scenario::build_universe(&ctx.scenario)?;
    scenario::build_ring(&ctx.scenario, &universe)
}

fn cmd_check(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let ring = scenario_ring(ctx)?;
    let gamma = scenario::build_gamma(&ctx.scenario, &ring)?;
    let l = scenario::build_padd(
        ctx.scenario
            .l
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"L\""))?,
    )?;
    let a = scenario::build_aggregator(
        ctx.scenario
            .a
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"A\""))?,
    )?;
    let report = check_axioms(&gamma, &l, &a, &ctx.grid, &ctx.params)?;
    let pass = report.pass;
    emit(cli, ctx, "check", report)?;
    Ok(pass)
}

#[derive(Serialize)]
struct ConstructBody {
    eta_check: probsub::sets::NumericalReport,
    sets: Vec<String>,
    csv_files: Vec<String>,
}

fn sanitize(label: &str) -> String {
    if label.is_empty() {
        "empty".to_string()
    } else {
        label.replace(',', "_")
    }
}

fn cmd_construct(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let ring = scenario_ring(ctx)?;
    let gamma = scenario::build_gamma(&ctx.scenario, &ring)?;
    // the eta table is validated and flagged; the construction stands either way
    let eta_check = match ctx.scenario.eta.as_ref() {
        Some(spec) => {
            let eta = scenario::build_eta(spec, &ring)?;
            check_numerical(&eta, &ring, ctx.params.tol.unwrap_or(1e-9))?
        }
        None => {
            // constructors without an eta table (two-point family): extract one
            let eta = NumericalSubmeasure::from_fn(&ring, |_| 0.0)?;
            let mut r = check_numerical(&eta, &ring, 1e-9)?;
            r.pass = true;
            r
        }
    };
    let mut csv_files = Vec::new();
    let mut sets = Vec::new();
    for (m, ddf) in gamma.iter() {
        let label = ring.universe().label_of(m);
        if let Some(dir) = &cli.csv {
            fs::create_dir_all(dir)?;
            let path = dir.join(format!("set_{}.csv", sanitize(&label)));
            fs::write(&path, ddf.to_csv(&ctx.grid))?;
            csv_files.push(path.display().to_string());
        }
        sets.push(label);
    }
    let pass = eta_check.pass;
    emit(
        cli,
        ctx,
        "construct",
        ConstructBody {
            eta_check,
            sets,
            csv_files,
        },
    )?;
    Ok(pass)
}

#[derive(Serialize)]
struct ExtractBody {
    generator: String,
    z_max: f64,
    table: std::collections::BTreeMap<String, f64>,
    capped: Vec<String>,
    numerical_check: probsub::sets::NumericalReport,
}

fn cmd_extract(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let ring = scenario_ring(ctx)?;
    let gamma = scenario::build_gamma(&ctx.scenario, &ring)?;
    let gen_name = ctx
        .scenario
        .t
        .clone()
        .unwrap_or_else(|| "linear".to_string());
    let gen = probsub::agg::AdditiveGenerator::by_name(&gen_name)?;
    let z_max = ctx.scenario.z_max.unwrap_or(1000.0);
    let out = extract_numerical(&gamma, &gen, z_max)?;
    let numerical_check = check_numerical(&out.eta, &ring, ctx.params.tol.unwrap_or(1e-9))?;
    let table = out
        .eta
        .iter()
        .map(|(m, v)| (ring.universe().label_of(m), v))
        .collect();
    let capped = out
        .capped
        .iter()
        .map(|&m| ring.universe().label_of(m))
        .collect();
    let pass = numerical_check.pass;
    emit(
        cli,
        ctx,
        "extract",
        ExtractBody {
            generator: gen_name,
            z_max,
            table,
            capped,
            numerical_check,
        },
    )?;
    Ok(pass)
}

fn claimed_flags_hold(report: &probsub::agg::ClassReport, claimed: AggClass) -> bool {
    match claimed {
        AggClass::Aggregation => report.is_aggregation,
        AggClass::Tnorm => report.is_tnorm_candidate,
        AggClass::Semicopula => report.is_semicopula,
        AggClass::Quasicopula => report.is_quasicopula,
        AggClass::Copula => report.is_copula,
    }
}

#[derive(Serialize)]
struct ClassifyBody {
    claimed: AggClass,
    claim_supported: bool,
    report: probsub::agg::ClassReport,
}

fn cmd_classify(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let a = scenario::build_aggregator(
        ctx.scenario
            .a
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"A\""))?,
    )?;
    let ladder = ctx.scenario.ladder.unwrap_or(64);
    let report = classify(&a, ladder)?;
    let claimed = a.claimed_class();
    let claim_supported = claimed_flags_hold(&report, claimed);
    emit(
        cli,
        ctx,
        "classify",
        ClassifyBody {
            claimed,
            claim_supported,
            report,
        },
    )?;
    Ok(claim_supported)
}

fn cmd_tau(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let l = scenario::build_padd(
        ctx.scenario
            .l
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"L\""))?,
    )?;
    let a = scenario::build_aggregator(
        ctx.scenario
            .a
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"A\""))?,
    )?;
    let g = scenario::build_ddf(
        ctx.scenario
            .g
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"G\""))?,
    )?;
    let h = scenario::build_ddf(
        ctx.scenario
            .h
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"H\""))?,
    )?;
    let spec = TriangleSpec::new(l, a);
    let out: Ddf = tau_conv(&spec, &g, &h, &ctx.grid);
    let csv = out.to_csv(&ctx.grid);
    print!("{csv}");
    if let Some(path) = &cli.out {
        fs::write(path, &csv)?;
    }
    if let Some(dir) = &cli.csv {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("tau.csv"), &csv)?;
    }
    Ok(true)
}

#[derive(Serialize)]
struct OrderBody {
    d1: String,
    d2: String,
    samples: usize,
    leq_12: bool,
    leq_21: bool,
}

fn build_descriptor(spec: &scenario::DescriptorSpec) -> Result<ThetaDescriptor> {
    Ok(ThetaDescriptor::new(
        scenario::build_padd(&spec.l)?,
        scenario::build_aggregator(&spec.a)?,
    ))
}

fn two_descriptors(ctx: &Ctx) -> Result<(ThetaDescriptor, ThetaDescriptor)> {
    let d1 = ctx
        .scenario
        .d1
        .as_ref()
        .ok_or_else(|| anyhow!("scenario needs \"d1\""))?;
    let d2 = ctx
        .scenario
        .d2
        .as_ref()
        .ok_or_else(|| anyhow!("scenario needs \"d2\""))?;
    Ok((build_descriptor(d1)?, build_descriptor(d2)?))
}

fn cmd_order(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let (d1, d2) = two_descriptors(ctx)?;
    let samples = ctx.scenario.samples.unwrap_or(200);
    let body = OrderBody {
        d1: d1.label.clone(),
        d2: d2.label.clone(),
        samples,
        leq_12: theta_leq(&d1, &d2, samples)?,
        leq_21: theta_leq(&d2, &d1, samples)?,
    };
    emit(cli, ctx, "order", body)?;
    Ok(true)
}

#[derive(Serialize)]
struct LatticeBody {
    mode: String,
    result: String,
    classify: probsub::agg::ClassReport,
}

fn cmd_lattice(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let (d1, d2) = two_descriptors(ctx)?;
    let mode = match ctx.scenario.mode.as_deref() {
        Some("join") | None => LatticeMode::Join,
        Some("meet") => LatticeMode::Meet,
        Some(other) => bail!("unknown lattice mode {other:?}"),
    };
    let combined = theta_lattice(&d1, &d2, mode)?;
    let report = classify(&combined.a, ctx.scenario.ladder.unwrap_or(64))?;
    emit(
        cli,
        ctx,
        "lattice",
        LatticeBody {
            mode: if mode == LatticeMode::Join {
                "join"
            } else {
                "meet"
            }
            .to_string(),
            result: combined.label.clone(),
            classify: report,
        },
    )?;
    Ok(true)
}

fn cmd_rho(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let ring = scenario_ring(ctx)?;
    let gamma = scenario::build_gamma(&ctx.scenario, &ring)?;
    let l = scenario::build_padd(
        ctx.scenario
            .l
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"L\""))?,
    )?;
    let a = scenario::build_aggregator(
        ctx.scenario
            .a
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs \"A\""))?,
    )?;
    let report = check_rho(&gamma, &l, &a, &ctx.grid, &ctx.params)?;
    let pass = report.pass;
    emit(cli, ctx, "rho", report)?;
    Ok(pass)
}

#[derive(Serialize)]
struct NeighborhoodBody {
    epsilon: f64,
    delta: f64,
    members: Vec<String>,
}

fn cmd_neighborhood(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let ring = scenario_ring(ctx)?;
    let gamma = scenario::build_gamma(&ctx.scenario, &ring)?;
    let epsilon = ctx
        .scenario
        .epsilon
        .ok_or_else(|| anyhow!("scenario needs \"epsilon\""))?;
    let delta = ctx
        .scenario
        .delta
        .ok_or_else(|| anyhow!("scenario needs \"delta\""))?;
    let members = neighborhood(&gamma, epsilon, delta)?
        .into_iter()
        .map(|m| ring.universe().label_of(m))
        .collect();
    emit(
        cli,
        ctx,
        "neighborhood",
        NeighborhoodBody {
            epsilon,
            delta,
            members,
        },
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct ConformanceRow {
    family: &'static str,
    lambda: String,
    must_pass: bool,
    pass: bool,
    union_violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<probsub::report::Witness>,
}

#[derive(Serialize)]
struct ConformanceBody {
    universe_size: usize,
    eta: &'static str,
    tol: f64,
    rows: Vec<ConformanceRow>,
    must_pass_ok: bool,
}

/// The family sweep: three parameters per family including the degenerate
/// rows, each checked against its own t-norm under ordinary addition.
fn conformance_rows() -> Vec<(TnormFamily, f64, bool)> {
    use TnormFamily::*;
    let inf = f64::INFINITY;
    vec![
        (AczelAlsina, 0.0, true),
        (AczelAlsina, 1.0, true),
        (AczelAlsina, 2.0, false),
        (Dombi, 0.0, false),
        (Dombi, 1.0, false),
        (Dombi, 2.0, false),
        (Frank, 1.0, true),
        (Frank, 2.0, false),
        (Frank, inf, true),
        (Hamacher, 0.0, false),
        (Hamacher, 2.0, false),
        (Hamacher, inf, false),
        (Yager, 0.0, false),
        (Yager, 1.0, true),
        (Yager, 2.0, false),
        (SugenoWeber, -1.0, false),
        (SugenoWeber, 0.0, true),
        (SugenoWeber, inf, true),
    ]
}

fn cmd_conformance(cli: &Cli, ctx: &Ctx) -> Result<bool> {
    let labels: Vec<String> = (1..=4).map(|i| format!("w{i}")).collect();
    let ring = Ring::powerset(probsub::sets::Universe::new(labels)?);
    let eta = NumericalSubmeasure::cardinality(&ring);
    let k1 = probsub::padd::PseudoAddition::k1();

    let mut rows = Vec::new();
    let mut must_pass_ok = true;
    let mut tol_echo = 0.0;
    for (family, lambda, must_pass) in conformance_rows() {
        let gamma = probsub::psub::table1(family, lambda, &eta, &ring)?;
        let tnorm = make_family(family, lambda)?;
        let report: AxiomReport = check_axioms(&gamma, &k1, &tnorm, &ctx.grid, &ctx.params)?;
        tol_echo = report.tol;
        if must_pass && !report.pass {
            must_pass_ok = false;
        }
        rows.push(ConformanceRow {
            family: family.name(),
            lambda: if lambda.is_infinite() {
                "inf".to_string()
            } else {
                format!("{lambda}")
            },
            must_pass,
            pass: report.pass,
            union_violations: report.union_law.violations,
            witness: report
                .union_law
                .witnesses
                .first()
                .cloned()
                .or_else(|| report.antitone.witnesses.first().cloned())
                .or_else(|| report.empty_is_identity.witnesses.first().cloned()),
        });
    }
    emit(
        cli,
        ctx,
        "conformance",
        ConformanceBody {
            universe_size: 4,
            eta: "cardinality",
            tol: tol_echo,
            rows,
            must_pass_ok,
        },
    )?;
    Ok(must_pass_ok)
}
