//! Better-response dynamics, unilateral and by coalitions.
//!
//! Runs stop at the first of: no unhappy job (or no improving coalition),
//! a profile seen before in this run, or the step limit. Recurrence is
//! detected by storing full profiles, so a reported cycle is certain.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coalition::{CoalitionSearch, JointMove};
use crate::error::{GameError, Result};
use crate::model::{Instance, Profile};
use crate::policy::{cost, cost_vector, hypothetical_cost, Policy};
use crate::potential::potential;
use crate::rat::Rat;

/// Which unhappy job moves next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seed")]
pub enum Selection {
    LowestIndexUnhappy,
    RandomUnhappy(u64),
    BestImprovement,
}

/// Where the selected job moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    #[default]
    BestResponse,
    FirstImproving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MoveRule {
    pub selection: Selection,
    pub response: Response,
}

impl Default for MoveRule {
    fn default() -> Self {
        MoveRule {
            selection: Selection::LowestIndexUnhappy,
            response: Response::BestResponse,
        }
    }
}

impl MoveRule {
    pub fn new(selection: Selection, response: Response) -> Self {
        MoveRule {
            selection,
            response,
        }
    }
}

impl FromStr for Selection {
    type Err = GameError;

    /// `lowest`, `best` or `random:SEED`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest" => Ok(Selection::LowestIndexUnhappy),
            "best" => Ok(Selection::BestImprovement),
            _ => match s.strip_prefix("random:") {
                Some(seed) => seed
                    .parse()
                    .map(Selection::RandomUnhappy)
                    .map_err(|_| GameError::InvalidInput(format!("bad seed in rule {s:?}"))),
                None => Err(GameError::InvalidInput(format!("unknown rule {s:?}"))),
            },
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::LowestIndexUnhappy => f.write_str("lowest"),
            Selection::BestImprovement => f.write_str("best"),
            Selection::RandomUnhappy(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for Response {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best" => Ok(Response::BestResponse),
            "first" => Ok(Response::FirstImproving),
            _ => Err(GameError::InvalidInput(format!("unknown response {s:?}"))),
        }
    }
}

/// A job with at least one strictly improving unilateral move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unhappy {
    pub job: usize,
    pub cost: Rat,
    /// Best response, ties to the lowest machine index.
    pub target: usize,
    pub improved_cost: Rat,
    /// Lowest-index strictly improving machine and its cost.
    pub first_target: usize,
    pub first_cost: Rat,
}

/// Best and first improving deviation of one job, if any.
pub fn unhappy_job(
    instance: &Instance,
    profile: &Profile,
    policy: Policy,
    job: usize,
    current: &Rat,
) -> Option<Unhappy> {
    let here = profile.machine_of(job);
    let mut best: Option<(usize, Rat)> = None;
    let mut first: Option<(usize, Rat)> = None;
    for target in instance.strategy_set(job) {
        if target == here {
            continue;
        }
        let c = hypothetical_cost(instance, profile, policy, job, target)
            .expect("strategy set machines are allowed");
        if &c >= current {
            continue;
        }
        if first.is_none() {
            first = Some((target, c.clone()));
        }
        if best.as_ref().is_none_or(|(_, b)| &c < b) {
            best = Some((target, c));
        }
    }
    let (target, improved_cost) = best?;
    let (first_target, first_cost) = first?;
    Some(Unhappy {
        job,
        cost: current.clone(),
        target,
        improved_cost,
        first_target,
        first_cost,
    })
}

/// Every unhappy job, ascending by index.
pub fn unhappy_jobs(instance: &Instance, profile: &Profile, policy: Policy) -> Vec<Unhappy> {
    let costs = cost_vector(instance, profile, policy);
    (0..instance.jobs())
        .filter_map(|job| unhappy_job(instance, profile, policy, job, &costs[job]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JobMove {
    #[serde(serialize_with = "crate::io::one_based")]
    pub job: usize,
    #[serde(serialize_with = "crate::io::one_based")]
    pub from: usize,
    #[serde(serialize_with = "crate::io::one_based")]
    pub to: usize,
    pub cost_before: Rat,
    pub cost_after: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// Profile before the move.
    pub profile: Profile,
    pub moves: Vec<JobMove>,
    /// Potential of `profile`, when the policy/environment pair has one.
    pub potential: Option<Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Converged,
    /// `steps[start].profile` equals the final profile.
    CycleDetected {
        start: usize,
    },
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsTrace {
    pub policy: Policy,
    pub steps: Vec<Step>,
    pub final_profile: Profile,
    pub final_potential: Option<Rat>,
    pub outcome: Outcome,
}

impl DynamicsTrace {
    /// Profiles visited, including the initial and final ones.
    pub fn profiles(&self) -> impl Iterator<Item = &Profile> {
        self.steps
            .iter()
            .map(|s| &s.profile)
            .chain(std::iter::once(&self.final_profile))
    }
}

struct Recorder<'a> {
    instance: &'a Instance,
    policy: Policy,
    steps: Vec<Step>,
    seen: HashMap<Profile, usize>,
}

impl<'a> Recorder<'a> {
    fn new(instance: &'a Instance, policy: Policy) -> Self {
        Recorder {
            instance,
            policy,
            steps: Vec::new(),
            seen: HashMap::new(),
        }
    }

    /// Record a step out of `current`; returns the cycle start if the
    /// resulting profile was seen before.
    fn push(&mut self, current: &Profile, moves: Vec<JobMove>, next: &Profile) -> Option<usize> {
        self.seen.insert(current.clone(), self.steps.len());
        self.steps.push(Step {
            profile: current.clone(),
            moves,
            potential: potential(self.instance, current, self.policy).ok(),
        });
        self.seen.get(next).copied()
    }

    fn finish(self, final_profile: Profile, outcome: Outcome) -> DynamicsTrace {
        DynamicsTrace {
            policy: self.policy,
            final_potential: potential(self.instance, &final_profile, self.policy).ok(),
            steps: self.steps,
            final_profile,
            outcome,
        }
    }
}

/// Unilateral better-response dynamics under `rule`.
pub fn run_dynamics(
    instance: &Instance,
    initial: &Profile,
    policy: Policy,
    rule: MoveRule,
    step_limit: usize,
) -> DynamicsTrace {
    let mut rng = match rule.selection {
        Selection::RandomUnhappy(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut recorder = Recorder::new(instance, policy);
    let mut current = initial.clone();
    let outcome = loop {
        let unhappy = unhappy_jobs(instance, &current, policy);
        if unhappy.is_empty() {
            break Outcome::Converged;
        }
        if recorder.steps.len() >= step_limit {
            break Outcome::StepLimit;
        }
        let chosen = match rule.selection {
            Selection::LowestIndexUnhappy => &unhappy[0],
            Selection::RandomUnhappy(_) => {
                let rng = rng.as_mut().expect("seeded for random selection");
                &unhappy[rng.gen_range(0..unhappy.len())]
            }
            Selection::BestImprovement => {
                let gain = |u: &Unhappy| &u.cost - &u.improved_cost;
                let mut best = &unhappy[0];
                for u in &unhappy[1..] {
                    if gain(u) > gain(best) {
                        best = u;
                    }
                }
                best
            }
        };
        let (to, cost_after) = match rule.response {
            Response::BestResponse => (chosen.target, chosen.improved_cost.clone()),
            Response::FirstImproving => (chosen.first_target, chosen.first_cost.clone()),
        };
        let mv = JobMove {
            job: chosen.job,
            from: current.machine_of(chosen.job),
            to,
            cost_before: chosen.cost.clone(),
            cost_after,
        };
        let next = current.with_move(chosen.job, to);
        let cycle = recorder.push(&current, vec![mv], &next);
        current = next;
        if let Some(start) = cycle {
            break Outcome::CycleDetected { start };
        }
    };
    recorder.finish(current, outcome)
}

/// Apply a forced sequence of unilateral `(job, target)` moves, checking that
/// each strictly improves the mover. Stops early if a profile recurs.
pub fn replay_moves(
    instance: &Instance,
    initial: &Profile,
    policy: Policy,
    moves: &[(usize, usize)],
) -> Result<DynamicsTrace> {
    let mut recorder = Recorder::new(instance, policy);
    let mut current = initial.clone();
    let mut outcome = Outcome::StepLimit;
    for &(job, to) in moves {
        let before = cost(instance, &current, policy, job);
        let after = hypothetical_cost(instance, &current, policy, job, to)?;
        if after >= before || to == current.machine_of(job) {
            return Err(GameError::InvalidInput(format!(
                "move of job {} to machine {} is not a better response ({before} -> {after})",
                job + 1,
                to + 1
            )));
        }
        let mv = JobMove {
            job,
            from: current.machine_of(job),
            to,
            cost_before: before,
            cost_after: after,
        };
        let next = current.with_move(job, to);
        let cycle = recorder.push(&current, vec![mv], &next);
        current = next;
        if let Some(start) = cycle {
            outcome = Outcome::CycleDetected { start };
            break;
        }
    }
    if outcome == Outcome::StepLimit && unhappy_jobs(instance, &current, policy).is_empty() {
        outcome = Outcome::Converged;
    }
    Ok(recorder.finish(current, outcome))
}

/// Coalition better-response dynamics: each step applies the
/// lexicographically first (coalition, joint move) with at most `max_size`
/// members in which every member strictly improves. `node_budget` bounds the
/// joint moves examined per step.
pub fn run_coalition_dynamics(
    instance: &Instance,
    initial: &Profile,
    policy: Policy,
    max_size: usize,
    step_limit: usize,
    node_budget: u64,
) -> Result<DynamicsTrace> {
    if max_size > instance.jobs() {
        return Err(GameError::InvalidParameter(format!(
            "coalition size {max_size} exceeds {} jobs",
            instance.jobs()
        )));
    }
    let mut recorder = Recorder::new(instance, policy);
    let mut current = initial.clone();
    let outcome = loop {
        let mut search = CoalitionSearch::new(instance, &current, policy, node_budget);
        let Some(joint) = search.first_improving_lex(max_size)? else {
            break Outcome::Converged;
        };
        if recorder.steps.len() >= step_limit {
            break Outcome::StepLimit;
        }
        let next = joint.apply(&current);
        let moves = joint_moves(instance, &current, &next, policy, &joint, search.costs());
        let cycle = recorder.push(&current, moves, &next);
        current = next;
        if let Some(start) = cycle {
            break Outcome::CycleDetected { start };
        }
    };
    Ok(recorder.finish(current, outcome))
}

fn joint_moves(
    instance: &Instance,
    before: &Profile,
    after: &Profile,
    policy: Policy,
    joint: &JointMove,
    costs: &[Rat],
) -> Vec<JobMove> {
    joint
        .pairs()
        .map(|(job, to)| JobMove {
            job,
            from: before.machine_of(job),
            to,
            cost_before: costs[job].clone(),
            cost_after: cost(instance, after, policy, job),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_instance, EnvironmentSpec};

    fn rs(v: &[&str]) -> Vec<Rat> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn cycle_instance() -> Instance {
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
    fn unhappy_set_contains_a_on_cycle_instance() {
        let inst = cycle_instance();
        let p = Profile::new(&inst, vec![0, 0, 1, 2]).unwrap();
        let unhappy = unhappy_jobs(&inst, &p, Policy::Random);
        let a = unhappy.iter().find(|u| u.job == 0).unwrap();
        assert_eq!(a.target, 1);
        assert_eq!(a.improved_cost, Rat::from_integer(134));
    }

    #[test]
    fn nash_start_converges_immediately() {
        let inst = make_instance(
            EnvironmentSpec::Identical {
                lengths: rs(&["1", "1"]),
                machines: 2,
            },
            "t",
        )
        .unwrap();
        let p = Profile::new(&inst, vec![0, 1]).unwrap();
        let trace = run_dynamics(&inst, &p, Policy::Equi, MoveRule::default(), 10);
        assert_eq!(trace.outcome, Outcome::Converged);
        assert!(trace.steps.is_empty());
        let trace = run_coalition_dynamics(&inst, &p, Policy::Equi, 2, 10, 1000).unwrap();
        assert_eq!(trace.outcome, Outcome::Converged);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn zero_step_limit_stops_unconverged_run() {
        let inst = make_instance(
            EnvironmentSpec::Identical {
                lengths: rs(&["1", "1"]),
                machines: 2,
            },
            "t",
        )
        .unwrap();
        let p = Profile::new(&inst, vec![0, 0]).unwrap();
        let trace = run_dynamics(&inst, &p, Policy::Equi, MoveRule::default(), 0);
        assert_eq!(trace.outcome, Outcome::StepLimit);
        let trace = run_dynamics(&inst, &p, Policy::Equi, MoveRule::default(), 5);
        assert_eq!(trace.outcome, Outcome::Converged);
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].moves[0].job, 0);
    }

    #[test]
    fn replay_rejects_non_improving_move() {
        let inst = cycle_instance();
        let p = Profile::new(&inst, vec![0, 0, 1, 2]).unwrap();
        // C from machine 2 back to 1 is worse (138+93 > 100)
        assert!(replay_moves(&inst, &p, Policy::Random, &[(2, 0)]).is_err());
    }

    #[test]
    fn rule_parsing() {
        assert_eq!(
            "random:42".parse::<Selection>().unwrap(),
            Selection::RandomUnhappy(42)
        );
        assert_eq!(
            "lowest".parse::<Selection>().unwrap(),
            Selection::LowestIndexUnhappy
        );
        assert_eq!(
            "best".parse::<Selection>().unwrap(),
            Selection::BestImprovement
        );
        assert!("random:x".parse::<Selection>().is_err());
        assert!("fastest".parse::<Selection>().is_err());
        assert_eq!(Selection::RandomUnhappy(7).to_string(), "random:7");
    }

    #[test]
    fn oversized_coalition_is_rejected() {
        let inst = cycle_instance();
        let p = Profile::new(&inst, vec![0, 0, 1, 2]).unwrap();
        assert!(run_coalition_dynamics(&inst, &p, Policy::Equi, 5, 10, 100).is_err());
    }
}
