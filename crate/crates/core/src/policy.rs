//! Per-machine scheduling policies and the individual cost they induce.
//!
//! Every machine runs the same policy. A job's cost is its completion time
//! (expected completion time for `Random`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::model::{Instance, Profile};
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Proportional time-sharing: every job finishes with the machine.
    Makespan,
    /// Shortest processing time first, lower job index on ties.
    Spt,
    /// Longest processing time first, lower job index on ties.
    Lpt,
    /// Uniformly random order without preemption; cost is the expectation.
    Random,
    /// Equal processor sharing among the jobs present.
    Equi,
}

impl Policy {
    pub const ALL: [Policy; 5] = [
        Policy::Makespan,
        Policy::Spt,
        Policy::Lpt,
        Policy::Random,
        Policy::Equi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Makespan => "makespan",
            Policy::Spt => "spt",
            Policy::Lpt => "lpt",
            Policy::Random => "random",
            Policy::Equi => "equi",
        }
    }

    /// Completion time of `job` (length `own` on this machine) when it shares
    /// the machine with `mates` (pairs of job index and processing time, not
    /// including `job` itself).
    pub fn completion_time<'a, I>(self, job: usize, own: &Rat, mates: I) -> Rat
    where
        I: IntoIterator<Item = (usize, &'a Rat)>,
    {
        let mut total = own.clone();
        match self {
            Policy::Makespan => {
                for (_, p) in mates {
                    total = total + p;
                }
            }
            Policy::Random => {
                let half = Rat::new(1, 2);
                let others: Rat = mates.into_iter().map(|(_, p)| p).sum();
                total = total + &half * &others;
            }
            Policy::Equi => {
                for (_, p) in mates {
                    total = total + own.min_of(p);
                }
            }
            Policy::Spt => {
                for (i, p) in mates {
                    if p < own || (p == own && i < job) {
                        total = total + p;
                    }
                }
            }
            Policy::Lpt => {
                for (i, p) in mates {
                    if p > own || (p == own && i < job) {
                        total = total + p;
                    }
                }
            }
        }
        total
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "makespan" => Ok(Policy::Makespan),
            "spt" => Ok(Policy::Spt),
            "lpt" => Ok(Policy::Lpt),
            "random" => Ok(Policy::Random),
            "equi" => Ok(Policy::Equi),
            other => Err(GameError::InvalidInput(format!("unknown policy {other:?}"))),
        }
    }
}

fn cost_on(
    instance: &Instance,
    profile: &Profile,
    policy: Policy,
    job: usize,
    machine: usize,
) -> Rat {
    let mates = profile
        .jobs_on(machine)
        .filter(|&i| i != job)
        .map(|i| (i, instance.time(i, machine)));
    policy.completion_time(job, instance.time(job, machine), mates)
}

pub fn cost(instance: &Instance, profile: &Profile, policy: Policy, job: usize) -> Rat {
    cost_on(instance, profile, policy, job, profile.machine_of(job))
}

pub fn cost_vector(instance: &Instance, profile: &Profile, policy: Policy) -> Vec<Rat> {
    let mut by_machine: Vec<Vec<usize>> = vec![Vec::new(); instance.machines()];
    for (i, &j) in profile.assignment().iter().enumerate() {
        by_machine[j].push(i);
    }
    let mut costs = vec![Rat::zero(); instance.jobs()];
    for (machine, jobs) in by_machine.iter().enumerate() {
        for &job in jobs {
            let mates = jobs
                .iter()
                .filter(|&&i| i != job)
                .map(|&i| (i, instance.time(i, machine)));
            costs[job] = policy.completion_time(job, instance.time(job, machine), mates);
        }
    }
    costs
}

/// Cost of `job` if it alone switched to `target`.
pub fn hypothetical_cost(
    instance: &Instance,
    profile: &Profile,
    policy: Policy,
    job: usize,
    target: usize,
) -> Result<Rat> {
    if target >= instance.machines() || !instance.can_run(job, target) {
        return Err(GameError::ForbiddenMachine {
            job,
            machine: target,
        });
    }
    Ok(cost_on(instance, profile, policy, job, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_instance, EnvironmentSpec};

    fn rs(v: &[&str]) -> Vec<Rat> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn single_machine(lengths: &[&str]) -> (Instance, Profile) {
        let inst = make_instance(
            EnvironmentSpec::Identical {
                lengths: rs(lengths),
                machines: 1,
            },
            "t",
        )
        .unwrap();
        let p = Profile::new(&inst, vec![0; lengths.len()]).unwrap();
        (inst, p)
    }

    fn cycle() -> Instance {
        make_instance(
            EnvironmentSpec::Unrelated {
                times: vec![
                    rs(&["90", "84", "inf"]),
                    rs(&["96", "2", "inf"]),
                    rs(&["138", "100", "inf"]),
                    rs(&["inf", "254", "300"]),
                ],
            },
            "cycle",
        )
        .unwrap()
    }

    #[test]
    fn equi_on_figure_one_machine() {
        let (inst, p) = single_machine(&["1", "1", "2", "3"]);
        assert_eq!(
            cost_vector(&inst, &p, Policy::Equi),
            rs(&["4", "4", "6", "7"])
        );
    }

    #[test]
    fn spt_and_lpt_two_jobs() {
        let (inst, p) = single_machine(&["2", "1"]);
        assert_eq!(cost_vector(&inst, &p, Policy::Spt), rs(&["3", "1"]));
        assert_eq!(cost_vector(&inst, &p, Policy::Lpt), rs(&["2", "3"]));
    }

    #[test]
    fn spt_ties_go_to_lower_index() {
        let (inst, p) = single_machine(&["1", "1"]);
        assert_eq!(cost_vector(&inst, &p, Policy::Spt), rs(&["1", "2"]));
        assert_eq!(cost_vector(&inst, &p, Policy::Lpt), rs(&["1", "2"]));
    }

    #[test]
    fn lone_job_costs_its_processing_time() {
        let (inst, p) = single_machine(&["7/3"]);
        for policy in Policy::ALL {
            assert_eq!(cost(&inst, &p, policy, 0), "7/3".parse().unwrap());
        }
    }

    #[test]
    fn random_costs_on_cycle_instance() {
        let inst = cycle();
        let ab_c_d = Profile::new(&inst, vec![0, 0, 1, 2]).unwrap();
        assert_eq!(
            cost(&inst, &ab_c_d, Policy::Random, 0),
            Rat::from_integer(138)
        );
        assert_eq!(
            hypothetical_cost(&inst, &ab_c_d, Policy::Random, 0, 1).unwrap(),
            Rat::from_integer(134)
        );
        let abc_d = Profile::new(&inst, vec![1, 1, 1, 2]).unwrap();
        assert_eq!(
            cost_vector(&inst, &abc_d, Policy::Random)[2],
            Rat::from_integer(143)
        );
    }

    #[test]
    fn makespan_costs_equal_machine_load() {
        let inst = cycle();
        let p = Profile::new(&inst, vec![0, 0, 1, 2]).unwrap();
        let c = cost_vector(&inst, &p, Policy::Makespan);
        assert_eq!(c[0], Rat::from_integer(186));
        assert_eq!(c[1], Rat::from_integer(186));
        assert_eq!(c[3], Rat::from_integer(300));
    }

    #[test]
    fn hypothetical_move_to_own_machine_is_a_noop() {
        let inst = cycle();
        let p = Profile::new(&inst, vec![0, 0, 1, 2]).unwrap();
        for policy in Policy::ALL {
            for job in 0..4 {
                let m = p.machine_of(job);
                assert_eq!(
                    hypothetical_cost(&inst, &p, policy, job, m).unwrap(),
                    cost(&inst, &p, policy, job)
                );
            }
        }
    }

    #[test]
    fn hypothetical_move_to_forbidden_machine_fails() {
        let inst = cycle();
        let p = Profile::new(&inst, vec![0, 0, 1, 2]).unwrap();
        assert_eq!(
            hypothetical_cost(&inst, &p, Policy::Equi, 0, 2).unwrap_err(),
            GameError::ForbiddenMachine { job: 0, machine: 2 }
        );
    }

    #[test]
    fn policy_names_round_trip() {
        for policy in Policy::ALL {
            assert_eq!(policy.as_str().parse::<Policy>().unwrap(), policy);
        }
        assert!("fifo".parse::<Policy>().is_err());
    }
}
