use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use coordmech::equilibrium::{
    enumerate_equilibria, AnalysisOptions, EquilibriumReport, Spoa, StrongVerdict,
    DEFAULT_COALITION_BUDGET, DEFAULT_PROFILE_BUDGET,
};
use coordmech::{Policy, Profile, Rat};
use serde_json::json;

use crate::error::CliError;
use crate::output::{
    csv_preamble, emit, emit_config, profile_cell, rat_cells, rat_headers, CommandName, Format,
    RunConfig,
};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    policy: Policy,
    /// Largest coalition checked when classifying strong NE; 0 skips it.
    #[arg(long, default_value_t = 0)]
    strong_bound: usize,
    /// Maximum number of profiles to enumerate.
    #[arg(long, default_value_t = DEFAULT_PROFILE_BUDGET)]
    budget: u64,
    /// Joint moves examined per strong-NE check.
    #[arg(long, default_value_t = DEFAULT_COALITION_BUDGET)]
    coalition_budget: u64,
    /// Only examine count-preserving coalition moves (EQUI only).
    #[arg(long)]
    count_preserving: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    csv: bool,
}

pub fn run(args: AnalyzeArgs, out: &mut impl Write) -> Result<ExitCode, CliError> {
    let inst = crate::read_instance(&args.instance)?;
    let options = AnalysisOptions {
        strong_bound: args.strong_bound,
        profile_budget: args.budget,
        coalition_budget: args.coalition_budget,
        threads: args.threads,
        count_preserving: args.count_preserving,
    };
    let mut config = RunConfig::new(CommandName::Analyze)
        .option("strong_bound", args.strong_bound)
        .option("count_preserving", args.count_preserving)
        .option("threads", args.threads);
    config.instance = Some(args.instance.display().to_string());
    config.policy = Some(args.policy);
    config.budgets.profiles = Some(args.budget);
    config.budgets.coalition_nodes = Some(args.coalition_budget);
    if args.csv {
        config.format = Format::Csv;
    }

    let report = enumerate_equilibria(&inst, args.policy, options)?;
    if args.csv {
        write_csv(out, &config, &report)?;
    } else {
        emit_config(out, &config)?;
        emit(out, "report", json!({ "report": report }))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn strong_label(report: &EquilibriumReport, profile: &Profile) -> String {
    match report.strong_nash.iter().find(|s| &s.profile == profile) {
        Some(s) => match &s.verdict {
            StrongVerdict::VerifiedTrue => "VERIFIED_TRUE".into(),
            StrongVerdict::TrueUpToBound { bound } => format!("TRUE_UP_TO_BOUND({bound})"),
            StrongVerdict::False { .. } => "FALSE".into(),
        },
        None if matches!(report.spoa, Spoa::NotComputed) => "NOT_CHECKED".into(),
        None => "FALSE".into(),
    }
}

fn write_csv(
    out: &mut impl Write,
    config: &RunConfig,
    report: &EquilibriumReport,
) -> Result<(), CliError> {
    csv_preamble(out, config)?;
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        let mut header = vec!["profile".to_string()];
        header.extend(rat_headers("makespan"));
        header.extend(rat_headers("ratio"));
        header.push("strong".into());
        w.write_record(&header)?;
        for e in &report.nash {
            let ratio = &e.makespan / &report.opt;
            let mut row = vec![profile_cell(&e.profile)];
            row.extend(rat_cells(Some(&e.makespan)));
            row.extend(rat_cells(Some(&ratio)));
            row.push(strong_label(report, &e.profile));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    let spoa: Option<&Rat> = match &report.spoa {
        Spoa::Exact { value } => Some(value),
        Spoa::Unverified { ratio, .. } => Some(ratio),
        Spoa::NotComputed | Spoa::Undefined => None,
    };
    let show = |r: Option<&Rat>| r.map_or("none".to_string(), |r| r.to_string());
    writeln!(
        out,
        "# profiles_scanned={} opt={} poa={} spoa={}",
        report.profiles_scanned,
        report.opt,
        show(report.poa.as_ref()),
        show(spoa),
    )?;
    Ok(())
}
