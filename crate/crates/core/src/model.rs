//! Instances, strategy profiles and machine loads.
//!
//! Jobs and machines are 0-based everywhere in this crate; the JSON formats
//! and CLI output convert to 1-based indices at the boundary.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{GameError, Result};
use crate::rat::Rat;

/// Machine environment tag, carrying the parameters the matrix is derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Environment {
    Identical,
    Uniform {
        speeds: Vec<Rat>,
    },
    RestrictedIdentical {
        lengths: Vec<Rat>,
        allowed: Vec<BTreeSet<usize>>,
    },
    Unrelated,
}

impl Environment {
    pub fn name(&self) -> &'static str {
        match self {
            Environment::Identical => "identical",
            Environment::Uniform { .. } => "uniform",
            Environment::RestrictedIdentical { .. } => "restricted",
            Environment::Unrelated => "unrelated",
        }
    }
}

/// Raw environment data before the processing-time matrix is derived.
#[derive(Debug, Clone)]
pub enum EnvironmentSpec {
    Identical {
        lengths: Vec<Rat>,
        machines: usize,
    },
    Uniform {
        lengths: Vec<Rat>,
        speeds: Vec<Rat>,
    },
    RestrictedIdentical {
        lengths: Vec<Rat>,
        allowed: Vec<Vec<usize>>,
        machines: usize,
    },
    Unrelated {
        times: Vec<Vec<Rat>>,
    },
}

/// A scheduling-game instance: `proc[i][j]` is the time job `i` needs on
/// machine `j`, `Rat::INFINITY` when `j` is outside the job's strategy set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    proc: Vec<Vec<Rat>>,
    environment: Environment,
    names: Vec<String>,
    label: String,
}

fn positive(what: &str, values: &[Rat]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || !v.is_positive() {
            return Err(GameError::InvalidInput(format!(
                "{what} {} must be finite and positive, got {v}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Build a validated instance from raw environment data.
pub fn make_instance(spec: EnvironmentSpec, label: impl Into<String>) -> Result<Instance> {
    let (environment, proc) = match spec {
        EnvironmentSpec::Identical { lengths, machines } => {
            positive("length", &lengths)?;
            if machines == 0 {
                return Err(GameError::InvalidInput("need at least one machine".into()));
            }
            let proc = lengths.iter().map(|p| vec![p.clone(); machines]).collect();
            (Environment::Identical, proc)
        }
        EnvironmentSpec::Uniform { lengths, speeds } => {
            positive("length", &lengths)?;
            positive("speed", &speeds)?;
            let proc = lengths
                .iter()
                .map(|p| speeds.iter().map(|s| p / s).collect())
                .collect();
            (Environment::Uniform { speeds }, proc)
        }
        EnvironmentSpec::RestrictedIdentical {
            lengths,
            allowed,
            machines,
        } => {
            positive("length", &lengths)?;
            if allowed.len() != lengths.len() {
                return Err(GameError::InvalidInput(format!(
                    "{} lengths but {} allowed sets",
                    lengths.len(),
                    allowed.len()
                )));
            }
            let mut sets = Vec::with_capacity(allowed.len());
            for (i, a) in allowed.iter().enumerate() {
                let set: BTreeSet<usize> = a.iter().copied().collect();
                if let Some(&bad) = set.iter().find(|&&j| j >= machines) {
                    return Err(GameError::InvalidInput(format!(
                        "job {} allows machine {} but m = {machines}",
                        i + 1,
                        bad + 1
                    )));
                }
                sets.push(set);
            }
            let proc = lengths
                .iter()
                .zip(&sets)
                .map(|(p, set)| {
                    (0..machines)
                        .map(|j| {
                            if set.contains(&j) {
                                p.clone()
                            } else {
                                Rat::INFINITY
                            }
                        })
                        .collect()
                })
                .collect();
            (
                Environment::RestrictedIdentical {
                    lengths,
                    allowed: sets,
                },
                proc,
            )
        }
        EnvironmentSpec::Unrelated { times } => (Environment::Unrelated, times),
    };
    Instance::new(environment, proc, label)
}

impl Instance {
    /// Validate a matrix against its environment tag.
    pub fn new(
        environment: Environment,
        proc: Vec<Vec<Rat>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = proc.len();
        let m = proc.first().map_or(0, Vec::len);
        if m == 0 {
            return Err(GameError::InvalidInput("need at least one machine".into()));
        }
        for (i, row) in proc.iter().enumerate() {
            if row.len() != m {
                return Err(GameError::InvalidInput(format!(
                    "row {} has {} entries, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            for v in row {
                if v.is_finite() && !v.is_positive() {
                    return Err(GameError::InvalidInput(format!(
                        "processing time {v} of job {} is not positive",
                        i + 1
                    )));
                }
            }
            if row.iter().all(Rat::is_infinite) {
                return Err(GameError::EmptyStrategySet { job: i });
            }
        }
        let inconsistent = |msg: String| Err(GameError::InconsistentEnvironment(msg));
        match &environment {
            Environment::Identical => {
                for (i, row) in proc.iter().enumerate() {
                    if row.iter().any(|v| v != &row[0]) {
                        return inconsistent(format!("job {} has unequal times", i + 1));
                    }
                }
            }
            Environment::Uniform { speeds } => {
                if speeds.len() != m {
                    return inconsistent(format!("{} speeds for {m} machines", speeds.len()));
                }
                positive("speed", speeds)?;
                for (i, row) in proc.iter().enumerate() {
                    if row.iter().any(Rat::is_infinite) {
                        return inconsistent(format!("job {} has an infinite time", i + 1));
                    }
                    let length = &row[0] * &speeds[0];
                    if row.iter().zip(speeds).any(|(p, s)| p * s != length) {
                        return inconsistent(format!("job {} times are not length/speed", i + 1));
                    }
                }
            }
            Environment::RestrictedIdentical { lengths, allowed } => {
                if lengths.len() != n || allowed.len() != n {
                    return inconsistent("lengths/allowed do not match job count".into());
                }
                for (i, row) in proc.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let expected = if allowed[i].contains(&j) {
                            &lengths[i]
                        } else {
                            &Rat::INFINITY
                        };
                        if v != expected {
                            return inconsistent(format!(
                                "job {} on machine {} is {v}, expected {expected}",
                                i + 1,
                                j + 1
                            ));
                        }
                    }
                }
            }
            Environment::Unrelated => {}
        }
        let names = (1..=n).map(|i| format!("J{i}")).collect();
        Ok(Instance {
            proc,
            environment,
            names,
            label: label.into(),
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.jobs() {
            return Err(GameError::InvalidInput(format!(
                "{} names for {} jobs",
                names.len(),
                self.jobs()
            )));
        }
        self.names = names;
        Ok(self)
    }

    pub fn jobs(&self) -> usize {
        self.proc.len()
    }

    pub fn machines(&self) -> usize {
        self.proc[0].len()
    }

    pub fn time(&self, job: usize, machine: usize) -> &Rat {
        &self.proc[job][machine]
    }

    pub fn row(&self, job: usize) -> &[Rat] {
        &self.proc[job]
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.proc
    }

    pub fn environment(&self) -> &Environment {
        &self.environment
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn can_run(&self, job: usize, machine: usize) -> bool {
        self.proc[job][machine].is_finite()
    }

    /// Machines with a finite processing time for `job`, ascending.
    pub fn strategy_set(&self, job: usize) -> Vec<usize> {
        (0..self.machines())
            .filter(|&j| self.can_run(job, j))
            .collect()
    }

    /// Machine-independent job length, where the environment defines one.
    pub fn length(&self, job: usize) -> Option<Rat> {
        match &self.environment {
            Environment::Identical => Some(self.proc[job][0].clone()),
            Environment::Uniform { speeds } => Some(&self.proc[job][0] * &speeds[0]),
            Environment::RestrictedIdentical { lengths, .. } => Some(lengths[job].clone()),
            Environment::Unrelated => None,
        }
    }

    /// Machine speeds for identical (all one) and uniform environments.
    pub fn speeds(&self) -> Option<Vec<Rat>> {
        match &self.environment {
            Environment::Identical => Some(vec![Rat::one(); self.machines()]),
            Environment::Uniform { speeds } => Some(speeds.clone()),
            _ => None,
        }
    }

    /// `min_j p_{i,j}`.
    pub fn min_time(&self, job: usize) -> &Rat {
        self.proc[job].iter().min().expect("at least one machine")
    }

    /// Number of profiles in the product of all strategy sets, saturating.
    pub fn profile_count(&self) -> u128 {
        (0..self.jobs()).fold(1u128, |acc, i| {
            acc.saturating_mul(self.strategy_set(i).len() as u128)
        })
    }
}

/// A pure strategy profile: `assignment[i]` is the machine of job `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(Vec<usize>);

impl Profile {
    pub fn new(instance: &Instance, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != instance.jobs() {
            return Err(GameError::InvalidProfile(format!(
                "{} entries for {} jobs",
                assignment.len(),
                instance.jobs()
            )));
        }
        for (i, &j) in assignment.iter().enumerate() {
            if j >= instance.machines() {
                return Err(GameError::InvalidProfile(format!(
                    "job {} assigned to machine {} but m = {}",
                    i + 1,
                    j + 1,
                    instance.machines()
                )));
            }
            if !instance.can_run(i, j) {
                return Err(GameError::ForbiddenMachine { job: i, machine: j });
            }
        }
        Ok(Profile(assignment))
    }

    /// Build from 1-based machine indices.
    pub fn from_one_based(instance: &Instance, sigma: &[usize]) -> Result<Self> {
        let zero_based = sigma
            .iter()
            .map(|&j| {
                j.checked_sub(1).ok_or_else(|| {
                    GameError::InvalidProfile("machine index 0 in 1-based profile".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Profile::new(instance, zero_based)
    }

    /// Skips validation; callers guarantee every entry is allowed.
    pub(crate) fn from_vec_unchecked(assignment: Vec<usize>) -> Self {
        Profile(assignment)
    }

    pub fn machine_of(&self, job: usize) -> usize {
        self.0[job]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|j| j + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The profile with `job` moved to `machine`; `self` is unchanged.
    pub fn with_move(&self, job: usize, machine: usize) -> Profile {
        let mut next = self.0.clone();
        next[job] = machine;
        Profile(next)
    }

    pub(crate) fn set(&mut self, job: usize, machine: usize) {
        self.0[job] = machine;
    }

    /// Jobs assigned to `machine`, ascending.
    pub fn jobs_on(&self, machine: usize) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(move |(_, &j)| j == machine)
            .map(|(i, _)| i)
    }

    /// Number of jobs on each of `machines` machines.
    pub fn counts(&self, machines: usize) -> Vec<usize> {
        let mut counts = vec![0; machines];
        for &j in &self.0 {
            counts[j] += 1;
        }
        counts
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|j| (j + 1).to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// The jobs and load of one machine under a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineView {
    pub machine: usize,
    pub jobs: Vec<usize>,
    pub load: Rat,
}

impl MachineView {
    pub fn count(&self) -> usize {
        self.jobs.len()
    }
}

pub fn loads(instance: &Instance, profile: &Profile) -> Vec<MachineView> {
    let mut views: Vec<MachineView> = (0..instance.machines())
        .map(|machine| MachineView {
            machine,
            jobs: Vec::new(),
            load: Rat::zero(),
        })
        .collect();
    for (i, &j) in profile.assignment().iter().enumerate() {
        let view = &mut views[j];
        view.jobs.push(i);
        view.load = &view.load + instance.time(i, j);
    }
    views
}

pub fn load_vector(instance: &Instance, profile: &Profile) -> Vec<Rat> {
    loads(instance, profile)
        .into_iter()
        .map(|v| v.load)
        .collect()
}

pub fn makespan(instance: &Instance, profile: &Profile) -> Rat {
    loads(instance, profile)
        .into_iter()
        .map(|v| v.load)
        .max()
        .unwrap_or_else(Rat::zero)
}
