//! Joint deviations of job coalitions.
//!
//! A joint move assigns every coalition member a machine different from its
//! current one. A member that stays put can be dropped from the coalition
//! without changing the resulting profile, so this loses no deviations.

use serde::Serialize;

use crate::error::{GameError, Result};
use crate::model::{Instance, Profile};
use crate::policy::{cost, cost_vector, Policy};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct JointMove {
    /// Coalition members, strictly ascending.
    #[serde(serialize_with = "crate::io::one_based_vec")]
    pub members: Vec<usize>,
    /// `targets[k]` is the new machine of `members[k]`.
    #[serde(serialize_with = "crate::io::one_based_vec")]
    pub targets: Vec<usize>,
}

impl JointMove {
    pub fn single(job: usize, target: usize) -> Self {
        JointMove {
            members: vec![job],
            targets: vec![target],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn apply(&self, profile: &Profile) -> Profile {
        let mut next = profile.clone();
        for (&job, &target) in self.members.iter().zip(&self.targets) {
            next.set(job, target);
        }
        next
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members
            .iter()
            .copied()
            .zip(self.targets.iter().copied())
    }
}

/// Whether a joint move leaves every machine with the same number of jobs.
pub fn preserves_counts(profile: &Profile, mv: &JointMove, machines: usize) -> bool {
    let mut delta = vec![0i64; machines];
    for (job, target) in mv.pairs() {
        delta[profile.machine_of(job)] -= 1;
        delta[target] += 1;
    }
    delta.iter().all(|&d| d == 0)
}

/// Subsets of `0..n` with at most `max` elements, in lexicographic order of
/// their ascending element sequences: `[0], [0,1], [0,1,2], [0,2], [1], ...`.
pub struct LexSubsets {
    n: usize,
    max: usize,
    current: Vec<usize>,
    started: bool,
}

impl LexSubsets {
    pub fn new(n: usize, max: usize) -> Self {
        LexSubsets {
            n,
            max,
            current: Vec::new(),
            started: false,
        }
    }
}

impl Iterator for LexSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.n == 0 || self.max == 0 {
            return None;
        }
        if !self.started {
            self.started = true;
            self.current.push(0);
            return Some(self.current.clone());
        }
        let last = *self.current.last()?;
        if self.current.len() < self.max && last + 1 < self.n {
            self.current.push(last + 1);
            return Some(self.current.clone());
        }
        loop {
            let last = self.current.pop()?;
            if last + 1 < self.n {
                self.current.push(last + 1);
                return Some(self.current.clone());
            }
        }
    }
}

/// Bounded search for strictly improving joint moves from a fixed profile.
pub struct CoalitionSearch<'a> {
    instance: &'a Instance,
    profile: &'a Profile,
    policy: Policy,
    costs: Vec<Rat>,
    budget: u64,
    used: u64,
    preserve_counts: bool,
}

impl<'a> CoalitionSearch<'a> {
    /// `budget` bounds the number of joint moves evaluated.
    pub fn new(instance: &'a Instance, profile: &'a Profile, policy: Policy, budget: u64) -> Self {
        CoalitionSearch {
            instance,
            profile,
            policy,
            costs: cost_vector(instance, profile, policy),
            budget,
            used: 0,
            preserve_counts: false,
        }
    }

    /// Skip joint moves that change some machine's job count.
    pub fn count_preserving_only(mut self, on: bool) -> Self {
        self.preserve_counts = on;
        self
    }

    pub fn costs(&self) -> &[Rat] {
        &self.costs
    }

    pub fn nodes_used(&self) -> u64 {
        self.used
    }

    /// Every member strictly better off after `mv`.
    pub fn is_improving(&self, mv: &JointMove) -> bool {
        let next = mv.apply(self.profile);
        mv.members
            .iter()
            .all(|&job| cost(self.instance, &next, self.policy, job) < self.costs[job])
    }

    /// Visit each joint move of `coalition` in lexicographic order of target
    /// tuples; the visitor returns `true` to stop.
    fn scan<F>(&mut self, coalition: &[usize], mut visit: F) -> Result<bool>
    where
        F: FnMut(&JointMove) -> bool,
    {
        let options: Vec<Vec<usize>> = coalition
            .iter()
            .map(|&job| {
                self.instance
                    .strategy_set(job)
                    .into_iter()
                    .filter(|&j| j != self.profile.machine_of(job))
                    .collect()
            })
            .collect();
        if coalition.is_empty() || options.iter().any(Vec::is_empty) {
            return Ok(false);
        }
        let mut digits = vec![0usize; coalition.len()];
        loop {
            let mv = JointMove {
                members: coalition.to_vec(),
                targets: digits.iter().zip(&options).map(|(&d, o)| o[d]).collect(),
            };
            if !self.preserve_counts
                || preserves_counts(self.profile, &mv, self.instance.machines())
            {
                self.used += 1;
                if self.used > self.budget {
                    return Err(GameError::CombinatorialLimit {
                        budget: self.budget,
                    });
                }
                if self.is_improving(&mv) && visit(&mv) {
                    return Ok(true);
                }
            }
            // odometer, last member fastest
            let mut k = coalition.len();
            loop {
                if k == 0 {
                    return Ok(false);
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < options[k].len() {
                    break;
                }
                digits[k] = 0;
            }
        }
    }

    /// First strictly improving joint move of exactly this coalition.
    pub fn first_improving(&mut self, coalition: &[usize]) -> Result<Option<JointMove>> {
        let mut found = None;
        self.scan(coalition, |mv| {
            found = Some(mv.clone());
            true
        })?;
        Ok(found)
    }

    /// All strictly improving joint moves of this coalition.
    pub fn all_improving(&mut self, coalition: &[usize]) -> Result<Vec<JointMove>> {
        let mut found = Vec::new();
        self.scan(coalition, |mv| {
            found.push(mv.clone());
            false
        })?;
        Ok(found)
    }

    /// Lexicographically first improving (coalition, joint move) with at
    /// most `max_size` members.
    pub fn first_improving_lex(&mut self, max_size: usize) -> Result<Option<JointMove>> {
        for coalition in LexSubsets::new(self.instance.jobs(), max_size) {
            if let Some(mv) = self.first_improving(&coalition)? {
                return Ok(Some(mv));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_instance, EnvironmentSpec};

    #[test]
    fn lex_subsets_order() {
        let all: Vec<Vec<usize>> = LexSubsets::new(3, 3).collect();
        assert_eq!(
            all,
            vec![
                vec![0],
                vec![0, 1],
                vec![0, 1, 2],
                vec![0, 2],
                vec![1],
                vec![1, 2],
                vec![2]
            ]
        );
        let pairs: Vec<Vec<usize>> = LexSubsets::new(3, 1).collect();
        assert_eq!(pairs, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(LexSubsets::new(0, 2).count(), 0);
        assert_eq!(LexSubsets::new(5, 5).count(), 31);
    }

    #[test]
    fn count_preservation_of_swaps() {
        let inst = make_instance(
            EnvironmentSpec::Identical {
                lengths: vec![Rat::one(); 3],
                machines: 2,
            },
            "t",
        )
        .unwrap();
        let p = Profile::new(&inst, vec![0, 1, 1]).unwrap();
        let swap = JointMove {
            members: vec![0, 1],
            targets: vec![1, 0],
        };
        assert!(preserves_counts(&p, &swap, 2));
        assert!(!preserves_counts(&p, &JointMove::single(0, 1), 2));
        let empty = JointMove {
            members: vec![],
            targets: vec![],
        };
        assert!(preserves_counts(&p, &empty, 2));
    }

    #[test]
    fn budget_is_enforced() {
        let inst = make_instance(
            EnvironmentSpec::Identical {
                lengths: vec![Rat::one(); 4],
                machines: 3,
            },
            "t",
        )
        .unwrap();
        let p = Profile::new(&inst, vec![0, 1, 2, 0]).unwrap();
        let mut search = CoalitionSearch::new(&inst, &p, Policy::Equi, 3);
        let err = search.all_improving(&[0, 1]).unwrap_err();
        assert_eq!(err.code(), "COMBINATORIAL_LIMIT");
    }
}
