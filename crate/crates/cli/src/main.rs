use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use switchlab_core::hco::{enumerate_single_switch_extensions, replay_possibilistic_contradiction, CertificateVerdict};
use switchlab_core::inequality::{eval_causal_mermin, eval_chain_causal, ChainReport, Verdict};
use switchlab_core::linalg::PHYSICAL_TOL;
use switchlab_core::report::r9;
use switchlab_core::scenario::{
    build_chained_switch, build_ghz_three_switch, ChainedScenarioConfig, GhzScenarioConfig, ScenarioData, SWITCH_WINGS,
};
use switchlab_core::suite::{chain_property_slack, mermin_property_slack, selfcheck_with, SuiteOptions};
use switchlab_core::DEFAULT_EPS;

#[derive(Parser, Debug)]
#[command(name = "switchlab", version, about = "Quantum switch correlations and causal inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Causal Mermin value of the three-switch data.
    GhzMermin(DataArgs),
    /// Replay the possibilistic contradiction on the three-switch data.
    Possibilistic(DataArgs),
    /// Chained inequality on the Z-controlled switch for one N or a sweep.
    Chained(ChainedArgs),
    /// Enumerate hidden causal order extensions of each switch marginal.
    EnumerateHco(DataArgs),
    /// Check the classical bounds on seeded random hidden causal order models.
    RandomModels(RandomArgs),
    /// Run every acceptance check.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Possibility threshold: probabilities above this count as possible.
    #[arg(long, default_value_t = DEFAULT_EPS, value_parser = nonnegative)]
    eps: f64,
    /// White-noise weight mixed into the GHZ control state.
    #[arg(long, default_value_t = 0.0, value_parser = unit_interval)]
    noise: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct ChainedArgs {
    /// Number of chain links.
    #[arg(long, conflicts_with = "sweep", value_parser = clap::value_parser!(u32).range(2..=64))]
    n: Option<u32>,
    /// Inclusive range of N, as `lo:hi`.
    #[arg(long, value_name = "LO:HI")]
    sweep: Option<Sweep>,
    /// Write the rows as CSV here.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct RandomArgs {
    /// Models per family (and per N for the chained family).
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct SelfcheckArgs {
    /// Override the model counts of the property suites.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long, default_value_t = 0.0, value_parser = unit_interval, hide = true)]
    noise: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Clone, Copy)]
struct Sweep {
    lo: usize,
    hi: usize,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
        let lo: usize = lo.trim().parse().map_err(|e| format!("bad LO: {e}"))?;
        let hi: usize = hi.trim().parse().map_err(|e| format!("bad HI: {e}"))?;
        if lo < 2 || hi > 64 || lo > hi {
            return Err(format!("need 2 <= LO <= HI <= 64, got {lo}:{hi}"));
        }
        Ok(Sweep { lo, hi })
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is negative"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    if let Some(p) = path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn write_csv(path: &Path, rows: &[ChainReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(ChainReport::CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

fn switch_data(args: &DataArgs) -> Result<ScenarioData> {
    Ok(build_ghz_three_switch(&GhzScenarioConfig::noisy(args.noise))?.with_eps(args.eps))
}

fn ghz_mermin(args: &DataArgs) -> Result<bool> {
    let rep = eval_causal_mermin(&switch_data(args)?)?;
    println!("parity terms  {:?}", rep.parity_terms.iter().map(|p| format!("{p:.9}")).collect::<Vec<_>>());
    println!("alpha beta gamma  {:.9} {:.9} {:.9}", rep.alpha, rep.beta, rep.gamma);
    println!("total {:.9}  (classical 3, algebraic 4)  {:?}", rep.total, rep.verdict);
    write_json(&args.out.json, &rep)?;
    Ok(rep.verdict == Verdict::Violated)
}

fn possibilistic(args: &DataArgs) -> Result<bool> {
    let cert = replay_possibilistic_contradiction(&switch_data(args)?)?;
    for c in &cert.conditions {
        println!("[{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    println!("verdict {:?}", cert.verdict);
    write_json(&args.out.json, &cert)?;
    Ok(cert.verdict == CertificateVerdict::Infeasible)
}

fn chained(args: &ChainedArgs) -> Result<bool> {
    let (lo, hi) = match (args.n, args.sweep) {
        (Some(n), None) => (n as usize, n as usize),
        (None, Some(s)) => (s.lo, s.hi),
        (None, None) => bail!("one of --n or --sweep is required"),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    let mut rows = Vec::new();
    for n in lo..=hi {
        let d = build_chained_switch(&ChainedScenarioConfig::new(n))?;
        rows.push(eval_chain_causal(&d, n)?);
    }
    println!(
        "{:>3} {:>14} {:>12} {:>14} {:>14} {:>10}",
        "N", "bcValue", "alpha", "constrained", "closedForm", "fraction"
    );
    for r in &rows {
        println!(
            "{:>3} {:>14.9} {:>12.9} {:>14.9} {:>14.9} {:>10.6}  {:?}",
            r.n, r.bc_value, r.alpha, r.constrained_value, r.closed_form, r.causal_fraction_bound, r.verdict
        );
    }
    if let Some(p) = &args.csv {
        write_csv(p, &rows)?;
    }
    write_json(&args.out.json, &rows)?;
    Ok(rows.iter().all(|r| (r.constrained_value - r.closed_form).abs() < PHYSICAL_TOL))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SwitchExtensions {
    switch: &'static str,
    #[serde(flatten)]
    summary: switchlab_core::hco::extension::ExtensionSummary,
}

fn enumerate_hco(args: &DataArgs) -> Result<bool> {
    let d = switch_data(args)?;
    let mut out = Vec::new();
    for (label, w) in ["A", "B", "C"].into_iter().zip(SWITCH_WINGS) {
        let [o1, o2, _, i1, i2] = w;
        let base =
            d.possible.marginalize(&[o1, o2, i1, i2])?.rename(&[(o1, "a1"), (o2, "a2"), (i1, "x1"), (i2, "x2")])?;
        let summary = enumerate_single_switch_extensions(&base)?.summary();
        println!(
            "switch {label}: support {}, {} candidates, {} valid, forced determinism {}",
            summary.support_size, summary.candidates, summary.valid, summary.forced_determinism
        );
        out.push(SwitchExtensions { switch: label, summary });
    }
    write_json(&args.out.json, &out)?;
    Ok(out.iter().all(|s| s.summary.valid > 0 && s.summary.forced_determinism))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ChainSlack {
    #[serde(rename = "N")]
    n: usize,
    #[serde(serialize_with = "r9")]
    slack: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RandomModelsReport {
    models_per_family: u64,
    /// Minimum of `3 − total` over the Mermin family.
    #[serde(serialize_with = "r9")]
    mermin_bound_slack: f64,
    /// Minimum of `P(a1 = λ | 11) − (1 − α)` over all switches.
    #[serde(serialize_with = "r9")]
    order_claim_slack: f64,
    /// Minimum of `2N − (BC_N − 2Nα)` per N.
    chained_slack: Vec<ChainSlack>,
    all_hold: bool,
}

fn random_models(args: &RandomArgs) -> Result<bool> {
    let (bound, claim) = mermin_property_slack(0..args.seeds)?;
    let chained_slack = (2..=4)
        .map(|n| Ok(ChainSlack { n, slack: chain_property_slack(n, 0..args.seeds)? }))
        .collect::<Result<Vec<_>>>()?;
    let all_hold =
        bound >= -PHYSICAL_TOL && claim >= -PHYSICAL_TOL && chained_slack.iter().all(|c| c.slack >= -PHYSICAL_TOL);
    println!("mermin bound slack {bound:.9}");
    println!("order claim slack  {claim:.9}");
    for c in &chained_slack {
        println!("chained N={} slack {:.9}", c.n, c.slack);
    }
    let rep = RandomModelsReport {
        models_per_family: args.seeds,
        mermin_bound_slack: bound,
        order_claim_slack: claim,
        chained_slack,
        all_hold,
    };
    write_json(&args.out.json, &rep)?;
    Ok(all_hold)
}

fn selfcheck(args: &SelfcheckArgs) -> Result<bool> {
    let mut opts = SuiteOptions { noise: args.noise, ..SuiteOptions::default() };
    if let Some(k) = args.seeds {
        opts.mermin_models = k;
        opts.chain_models = k;
        opts.random_tables = k;
    }
    let res = selfcheck_with(&opts)?;
    for c in &res.checks {
        println!(
            "{} [{}] {} (measured {:.3e}, tol {:.0e}) {}",
            c.criterion,
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        );
    }
    println!("{} in {:.2?}", if res.all_pass { "all checks pass" } else { "some checks FAILED" }, res.elapsed);
    write_json(&args.out.json, &res)?;
    Ok(res.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::GhzMermin(a) => ghz_mermin(a),
        Command::Possibilistic(a) => possibilistic(a),
        Command::Chained(a) => chained(a),
        Command::EnumerateHco(a) => enumerate_hco(a),
        Command::RandomModels(a) => random_models(a),
        Command::Selfcheck(a) => selfcheck(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
