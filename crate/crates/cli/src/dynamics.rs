use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use coordmech::dynamics::{
    run_coalition_dynamics, run_dynamics, DynamicsTrace, MoveRule, Outcome, Response, Selection,
};
use coordmech::equilibrium::DEFAULT_COALITION_BUDGET;
use coordmech::io::profile_from_json;
use coordmech::model::makespan;
use coordmech::{Instance, Policy, Profile};
use serde_json::json;

use crate::error::{CliError, EXIT_BUDGET};
use crate::output::{
    csv_preamble, emit, emit_config, rat_cells, rat_headers, CommandName, Format, RunConfig,
};

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    policy: Policy,
    /// Which unhappy job moves: `lowest`, `best` or `random:SEED`.
    #[arg(long, default_value = "lowest")]
    rule: Selection,
    /// Where it moves: `best` response or `first` improving machine.
    #[arg(long, default_value = "best")]
    response: Response,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Let coalitions of up to K jobs deviate jointly.
    #[arg(long, value_name = "K")]
    coalition: Option<usize>,
    /// Joint moves examined per coalition step.
    #[arg(long, default_value_t = DEFAULT_COALITION_BUDGET)]
    coalition_budget: u64,
    /// Starting profile file (`{"sigma": [...]}`, 1-based).
    #[arg(long, conflicts_with = "sigma")]
    start: Option<PathBuf>,
    /// Starting profile inline, e.g. `1,1,2,3`. Default: every job on its
    /// lowest-numbered allowed machine.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<usize>>,
    #[arg(long)]
    csv: bool,
}

fn initial_profile(args: &DynamicsArgs, inst: &Instance) -> Result<Profile, CliError> {
    if let Some(path) = &args.start {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok(profile_from_json(inst, &text)?);
    }
    if let Some(sigma) = &args.sigma {
        return Ok(Profile::from_one_based(inst, sigma)?);
    }
    let lowest = (0..inst.jobs()).map(|i| inst.strategy_set(i)[0]).collect();
    Ok(Profile::new(inst, lowest)?)
}

pub fn run(args: DynamicsArgs, out: &mut impl Write) -> Result<ExitCode, CliError> {
    let inst = crate::read_instance(&args.instance)?;
    let start = initial_profile(&args, &inst)?;
    let rule = MoveRule::new(args.rule, args.response);

    let mut config = RunConfig::new(CommandName::Dynamics);
    config.instance = Some(args.instance.display().to_string());
    config.policy = Some(args.policy);
    config.rule = Some(args.rule.to_string());
    if let Selection::RandomUnhappy(seed) = args.rule {
        config.seed = Some(seed);
    }
    config.budgets.steps = Some(args.max_steps);
    config = config
        .option(
            "response",
            match rule.response {
                Response::BestResponse => "best",
                Response::FirstImproving => "first",
            },
        )
        .option("start", &start);
    if let Some(k) = args.coalition {
        config.budgets.coalition_nodes = Some(args.coalition_budget);
        config = config.option("coalition", k);
    }
    if args.csv {
        config.format = Format::Csv;
    }

    let trace = match args.coalition {
        Some(k) => run_coalition_dynamics(
            &inst,
            &start,
            args.policy,
            k,
            args.max_steps,
            args.coalition_budget,
        )?,
        None => run_dynamics(&inst, &start, args.policy, rule, args.max_steps),
    };

    if args.csv {
        write_csv(out, &config, &trace)?;
    } else {
        write_json(out, &inst, &config, &trace)?;
    }
    Ok(match trace.outcome {
        Outcome::StepLimit => ExitCode::from(EXIT_BUDGET),
        _ => ExitCode::SUCCESS,
    })
}

fn outcome_fields(trace: &DynamicsTrace) -> (&'static str, Option<usize>) {
    match trace.outcome {
        Outcome::Converged => ("CONVERGED", None),
        // steps are numbered from 1 in output
        Outcome::CycleDetected { start } => ("CYCLE_DETECTED", Some(start + 1)),
        Outcome::StepLimit => ("STEP_LIMIT", None),
    }
}

fn write_json(
    out: &mut impl Write,
    inst: &Instance,
    config: &RunConfig,
    trace: &DynamicsTrace,
) -> Result<(), CliError> {
    emit_config(out, config)?;
    for (i, step) in trace.steps.iter().enumerate() {
        emit(
            out,
            "step",
            json!({
                "step": i + 1,
                "profile": step.profile,
                "potential": step.potential,
                "moves": step.moves,
            }),
        )?;
    }
    let (outcome, cycle_start) = outcome_fields(trace);
    emit(
        out,
        "outcome",
        json!({
            "outcome": outcome,
            "cycle_start": cycle_start,
            "steps": trace.steps.len(),
            "final_profile": trace.final_profile,
            "final_potential": trace.final_potential,
            "final_makespan": makespan(inst, &trace.final_profile),
        }),
    )
}

fn write_csv(
    out: &mut impl Write,
    config: &RunConfig,
    trace: &DynamicsTrace,
) -> Result<(), CliError> {
    csv_preamble(out, config)?;
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        let mut header = vec!["step".to_string(), "job".into(), "from".into(), "to".into()];
        header.extend(rat_headers("cost_before"));
        header.extend(rat_headers("cost_after"));
        header.extend(rat_headers("potential"));
        w.write_record(&header)?;
        for (i, step) in trace.steps.iter().enumerate() {
            for mv in &step.moves {
                let mut row = vec![
                    (i + 1).to_string(),
                    (mv.job + 1).to_string(),
                    (mv.from + 1).to_string(),
                    (mv.to + 1).to_string(),
                ];
                row.extend(rat_cells(Some(&mv.cost_before)));
                row.extend(rat_cells(Some(&mv.cost_after)));
                row.extend(rat_cells(step.potential.as_ref()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
    }
    let (outcome, cycle_start) = outcome_fields(trace);
    let mut tail = format!("# outcome={outcome} steps={}", trace.steps.len());
    if let Some(s) = cycle_start {
        tail.push_str(&format!(" cycle_start={s}"));
    }
    writeln!(out, "{tail}")?;
    Ok(())
}
