//! JSON file formats. Machine and job indices are 1-based on disk.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{GameError, Result};
use crate::families::{CertifiedInstance, Claim};
use crate::model::{make_instance, Environment, EnvironmentSpec, Instance, Profile};
use crate::policy::Policy;
use crate::rat::Rat;

pub const SCHEMA: &str = "coordmech/1";

pub(crate) fn one_based<S: Serializer>(
    index: &usize,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*index as u64 + 1)
}

pub(crate) fn one_based_vec<S: Serializer>(
    indices: &[usize],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(indices.iter().map(|i| i + 1))
}

impl Serialize for Profile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        one_based_vec(self.assignment(), s)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JobEntry {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    times: Option<Vec<Rat>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<Rat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    allowed: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    #[serde(default = "default_schema")]
    schema: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
    environment: String,
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    speeds: Option<Vec<Rat>>,
    jobs: Vec<JobEntry>,
}

fn default_schema() -> String {
    SCHEMA.to_string()
}

fn check_schema(schema: &str) -> Result<()> {
    if schema != SCHEMA {
        return Err(GameError::InvalidInput(format!(
            "unsupported schema {schema:?}, expected {SCHEMA:?}"
        )));
    }
    Ok(())
}

fn invalid(e: serde_json::Error) -> GameError {
    GameError::InvalidInput(e.to_string())
}

pub fn instance_to_json(instance: &Instance) -> String {
    let names = instance.names();
    let jobs = (0..instance.jobs())
        .map(|i| {
            let mut entry = JobEntry {
                name: names[i].clone(),
                times: None,
                length: None,
                allowed: None,
            };
            match instance.environment() {
                Environment::Unrelated => entry.times = Some(instance.row(i).to_vec()),
                Environment::RestrictedIdentical { lengths, allowed } => {
                    entry.length = Some(lengths[i].clone());
                    entry.allowed = Some(allowed[i].iter().map(|j| j + 1).collect());
                }
                Environment::Identical | Environment::Uniform { .. } => {
                    entry.length = instance.length(i);
                }
            }
            entry
        })
        .collect();
    let speeds = match instance.environment() {
        Environment::Uniform { speeds } => Some(speeds.clone()),
        _ => None,
    };
    let file = InstanceFile {
        schema: SCHEMA.into(),
        label: instance.label().to_string(),
        environment: instance.environment().name().into(),
        m: instance.machines(),
        speeds,
        jobs,
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(invalid)?;
    check_schema(&file.schema)?;
    let missing = |what: &str, i: usize| {
        GameError::InvalidInput(format!("job {} is missing {what:?}", i + 1))
    };
    let lengths = || -> Result<Vec<Rat>> {
        file.jobs
            .iter()
            .enumerate()
            .map(|(i, j)| j.length.clone().ok_or_else(|| missing("length", i)))
            .collect()
    };
    let spec = match file.environment.as_str() {
        "identical" => EnvironmentSpec::Identical {
            lengths: lengths()?,
            machines: file.m,
        },
        "uniform" => {
            let speeds = file.speeds.clone().ok_or_else(|| {
                GameError::InvalidInput("uniform instance needs \"speeds\"".into())
            })?;
            if speeds.len() != file.m {
                return Err(GameError::InvalidInput(format!(
                    "{} speeds but m = {}",
                    speeds.len(),
                    file.m
                )));
            }
            EnvironmentSpec::Uniform {
                lengths: lengths()?,
                speeds,
            }
        }
        "restricted" => {
            let allowed = file
                .jobs
                .iter()
                .enumerate()
                .map(|(i, j)| {
                    let a = j.allowed.as_ref().ok_or_else(|| missing("allowed", i))?;
                    a.iter()
                        .map(|&x| {
                            x.checked_sub(1).ok_or_else(|| {
                                GameError::InvalidInput("machine index 0 in 1-based list".into())
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            EnvironmentSpec::RestrictedIdentical {
                lengths: lengths()?,
                allowed,
                machines: file.m,
            }
        }
        "unrelated" => {
            let times = file
                .jobs
                .iter()
                .enumerate()
                .map(|(i, j)| {
                    let row = j.times.clone().ok_or_else(|| missing("times", i))?;
                    if row.len() != file.m {
                        return Err(GameError::InvalidInput(format!(
                            "job {} has {} times but m = {}",
                            i + 1,
                            row.len(),
                            file.m
                        )));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            EnvironmentSpec::Unrelated { times }
        }
        other => {
            return Err(GameError::InvalidInput(format!(
                "unknown environment {other:?}"
            )))
        }
    };
    let names = file.jobs.iter().map(|j| j.name.clone()).collect();
    make_instance(spec, file.label.clone())?.with_names(names)
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileFile {
    #[serde(default = "default_schema")]
    schema: String,
    sigma: Vec<usize>,
}

pub fn profile_to_json(profile: &Profile) -> String {
    serde_json::to_string(&ProfileFile {
        schema: SCHEMA.into(),
        sigma: profile.one_based(),
    })
    .expect("profile serializes")
}

pub fn profile_from_json(instance: &Instance, text: &str) -> Result<Profile> {
    let file: ProfileFile = serde_json::from_str(text).map_err(invalid)?;
    check_schema(&file.schema)?;
    Profile::from_one_based(instance, &file.sigma)
}

#[derive(Debug, Serialize)]
struct WitnessMove {
    #[serde(serialize_with = "one_based")]
    job: usize,
    #[serde(serialize_with = "one_based")]
    to: usize,
}

#[derive(Debug, Serialize)]
struct CertificateFile<'a> {
    schema: &'static str,
    family: &'static str,
    parameter: usize,
    policy: Policy,
    certified_profile: &'a Profile,
    expected_makespan: &'a Rat,
    opt_witness: &'a Profile,
    expected_opt_bound: &'a Rat,
    claims: &'a [Claim],
    job_group: &'a [usize],
    machine_group: &'a [usize],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    witness_moves: Vec<WitnessMove>,
}

/// Sidecar certificate: certified profiles and expected metrics.
pub fn certificate_to_json(cert: &CertifiedInstance) -> String {
    let file = CertificateFile {
        schema: SCHEMA,
        family: cert.family,
        parameter: cert.parameter,
        policy: cert.policy,
        certified_profile: &cert.certified_profile,
        expected_makespan: &cert.expected_makespan,
        opt_witness: &cert.opt_witness,
        expected_opt_bound: &cert.expected_opt_bound,
        claims: &cert.claims,
        job_group: &cert.job_group,
        machine_group: &cert.machine_group,
        witness_moves: cert
            .witness_moves
            .iter()
            .map(|&(job, to)| WitnessMove { job, to })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("certificate serializes")
}
