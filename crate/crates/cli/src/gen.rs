use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use coordmech::families::{
    gen_identical_family, gen_random_cycle_instance, gen_random_instance, gen_restricted_family,
    gen_uniform_family, gen_unrelated_family, CertifiedInstance, EnvironmentKind, Magnitudes,
};
use coordmech::io::{certificate_to_json, instance_to_json};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::output::{emit, emit_config, CommandName, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Identical,
    Uniform,
    Restricted,
    Unrelated,
    RandomCycle,
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// m for identical/unrelated (default 3), k for uniform (1) / restricted (2).
    #[arg(long)]
    param: Option<usize>,
    /// Seed for `--family random`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Environment for `--family random`.
    #[arg(long, default_value = "unrelated")]
    env: EnvironmentKind,
    #[arg(long, default_value_t = 5)]
    jobs: usize,
    #[arg(long, default_value_t = 3)]
    machines: usize,
    #[arg(long, default_value_t = Magnitudes::default().max_numerator)]
    max_numerator: u32,
    #[arg(long, default_value_t = Magnitudes::default().max_denominator)]
    max_denominator: u32,
    /// Instance path; the certificate goes next to it as `<stem>.cert.json`.
    /// Without it the instance is printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn certified(family: Family, param: Option<usize>) -> Result<CertifiedInstance, CliError> {
    Ok(match family {
        Family::Identical => gen_identical_family(param.unwrap_or(3))?,
        Family::Uniform => gen_uniform_family(param.unwrap_or(1))?,
        Family::Restricted => gen_restricted_family(param.unwrap_or(2))?,
        Family::Unrelated => gen_unrelated_family(param.unwrap_or(3))?,
        Family::RandomCycle => gen_random_cycle_instance(),
        Family::Random => unreachable!("random instances carry no certificate"),
    })
}

fn certificate_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    out.with_file_name(format!("{stem}.cert.json"))
}

pub fn run(args: GenArgs, out: &mut impl Write) -> Result<ExitCode, CliError> {
    let mut config = RunConfig::new(CommandName::Gen).option("family", args.family);
    let (instance, cert) = if args.family == Family::Random {
        let mag = Magnitudes {
            max_numerator: args.max_numerator,
            max_denominator: args.max_denominator,
        };
        config.seed = Some(args.seed);
        config = config
            .option("environment", args.env)
            .option("jobs", args.jobs)
            .option("machines", args.machines)
            .option("magnitudes", mag);
        let inst = gen_random_instance(args.env, args.jobs, args.machines, args.seed, mag)?;
        (inst, None)
    } else {
        let cert = certified(args.family, args.param)?;
        config = config.option("param", cert.parameter);
        (cert.instance.clone(), Some(cert))
    };

    let Some(path) = args.out else {
        writeln!(out, "{}", instance_to_json(&instance))?;
        return Ok(ExitCode::SUCCESS);
    };
    config.instance = Some(path.display().to_string());
    crate::write_file(&path, &(instance_to_json(&instance) + "\n"))?;
    let cert_path = match &cert {
        Some(cert) => {
            let p = certificate_path(&path);
            crate::write_file(&p, &(certificate_to_json(cert) + "\n"))?;
            Some(p.display().to_string())
        }
        None => None,
    };
    emit_config(out, &config)?;
    emit(
        out,
        "generated",
        json!({
            "instance": path.display().to_string(),
            "certificate": cert_path,
            "jobs": instance.jobs(),
            "machines": instance.machines(),
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}
