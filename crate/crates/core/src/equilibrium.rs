//! Equilibrium verification and exhaustive analysis.
//!
//! "Improvement" is always a strict rational decrease.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::coalition::{preserves_counts, CoalitionSearch, JointMove};
use crate::dynamics::{unhappy_job, Unhappy};
use crate::error::{GameError, Result};
use crate::model::{makespan, Instance, Profile};
use crate::policy::{cost_vector, Policy};
use crate::rat::Rat;

pub const DEFAULT_PROFILE_BUDGET: u64 = 10_000_000;
pub const DEFAULT_COALITION_BUDGET: u64 = 5_000_000;
pub const DEFAULT_BNB_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum NashCheck {
    Nash,
    /// A job with a strictly improving unilateral move.
    NotNash(Unhappy),
}

impl NashCheck {
    pub fn is_nash(&self) -> bool {
        matches!(self, NashCheck::Nash)
    }

    pub fn witness(&self) -> Option<&Unhappy> {
        match self {
            NashCheck::Nash => None,
            NashCheck::NotNash(u) => Some(u),
        }
    }
}

/// Checks jobs in index order and stops at the first unhappy one.
pub fn is_nash(instance: &Instance, profile: &Profile, policy: Policy) -> NashCheck {
    let costs = cost_vector(instance, profile, policy);
    for (job, cost) in costs.iter().enumerate() {
        if let Some(u) = unhappy_job(instance, profile, policy, job, cost) {
            return NashCheck::NotNash(u);
        }
    }
    NashCheck::Nash
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StrongVerdict {
    /// No improving coalition of any size.
    VerifiedTrue,
    /// An improving joint move; a singleton when the profile is not a NE.
    False { witness: JointMove },
    /// No improving coalition with at most `bound` members; larger ones unchecked.
    TrueUpToBound { bound: usize },
}

impl StrongVerdict {
    pub fn is_false(&self) -> bool {
        matches!(self, StrongVerdict::False { .. })
    }

    /// Largest coalition size checked without finding a deviation.
    pub fn verified_bound(&self, jobs: usize) -> Option<usize> {
        match self {
            StrongVerdict::VerifiedTrue => Some(jobs),
            StrongVerdict::TrueUpToBound { bound } => Some(*bound),
            StrongVerdict::False { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StrongOptions {
    pub max_coalition: usize,
    /// Joint moves examined before giving up.
    pub node_budget: u64,
    /// Only examine count-preserving joint moves. Sound for `Equi` only (an
    /// improving coalition move out of a NE preserves every machine's job
    /// count there); ignored for other policies.
    pub count_preserving: bool,
}

impl StrongOptions {
    pub fn full(jobs: usize) -> Self {
        StrongOptions {
            max_coalition: jobs,
            node_budget: DEFAULT_COALITION_BUDGET,
            count_preserving: false,
        }
    }

    pub fn bounded(max_coalition: usize) -> Self {
        StrongOptions {
            max_coalition,
            ..StrongOptions::full(0)
        }
    }
}

pub fn is_strong_nash(
    instance: &Instance,
    profile: &Profile,
    policy: Policy,
    options: StrongOptions,
) -> StrongVerdict {
    if let NashCheck::NotNash(u) = is_nash(instance, profile, policy) {
        return StrongVerdict::False {
            witness: JointMove::single(u.job, u.target),
        };
    }
    let n = instance.jobs();
    let bound = options.max_coalition.min(n);
    let prune = options.count_preserving && policy == Policy::Equi;
    let mut search = CoalitionSearch::new(instance, profile, policy, options.node_budget)
        .count_preserving_only(prune);
    let mut completed = bound.min(1);
    for size in 2..=bound {
        for coalition in (0..n).combinations(size) {
            match search.first_improving(&coalition) {
                Ok(Some(witness)) => return StrongVerdict::False { witness },
                Ok(None) => {}
                Err(_) => return StrongVerdict::TrueUpToBound { bound: completed },
            }
        }
        completed = size;
    }
    if completed >= n {
        StrongVerdict::VerifiedTrue
    } else {
        StrongVerdict::TrueUpToBound { bound: completed }
    }
}

/// Whether a coalition move out of `profile` keeps every machine's job count.
pub fn count_preserving_check(instance: &Instance, profile: &Profile, mv: &JointMove) -> bool {
    preserves_counts(profile, mv, instance.machines())
}

/// Every strictly improving joint move with at most `max_size` members.
pub fn improving_coalition_moves(
    instance: &Instance,
    profile: &Profile,
    policy: Policy,
    max_size: usize,
    node_budget: u64,
) -> Result<Vec<JointMove>> {
    let mut search = CoalitionSearch::new(instance, profile, policy, node_budget);
    let mut found = Vec::new();
    for size in 1..=max_size.min(instance.jobs()) {
        for coalition in (0..instance.jobs()).combinations(size) {
            found.extend(search.all_improving(&coalition)?);
        }
    }
    Ok(found)
}

/// Upper bound on each job's cost in any EQUI Nash equilibrium:
/// with `q` the per-job minimum times sorted ascending (ties by index), the
/// job at rank `r` (0-based) gets `2(q_0 + … + q_{r-1}) + (n − r) q_r`.
/// Indexed by job.
pub fn equi_cost_bounds(instance: &Instance) -> Vec<Rat> {
    let n = instance.jobs();
    let order: Vec<usize> = (0..n)
        .sorted_by(|&a, &b| {
            instance
                .min_time(a)
                .cmp(instance.min_time(b))
                .then(a.cmp(&b))
        })
        .collect();
    let mut bounds = vec![Rat::zero(); n];
    let mut prefix = Rat::zero();
    for (rank, &job) in order.iter().enumerate() {
        let q = instance.min_time(job);
        bounds[job] = Rat::from_integer(2) * &prefix + Rat::from_integer((n - rank) as i64) * q;
        prefix = prefix + q;
    }
    bounds
}

/// Checks the per-job EQUI cost bound and `makespan ≤ 2 Σ q_i (≤ 2m·OPT)`.
pub fn equi_ne_cost_bound_check(instance: &Instance, profile: &Profile) -> bool {
    let costs = cost_vector(instance, profile, Policy::Equi);
    let bounds = equi_cost_bounds(instance);
    let q_sum: Rat = (0..instance.jobs()).map(|i| instance.min_time(i)).sum();
    costs.iter().zip(&bounds).all(|(c, b)| c <= b)
        && makespan(instance, profile) <= Rat::from_integer(2) * q_sum
}

/// Exact minimum makespan by depth-first branch and bound.
///
/// Jobs are placed in order of decreasing minimum time; machines whose
/// processing-time columns coincide and whose current loads are equal are
/// tried once. `node_budget` bounds the search-tree size.
pub fn opt_makespan(instance: &Instance, node_budget: u64) -> Result<(Rat, Profile)> {
    let n = instance.jobs();
    let m = instance.machines();
    let order: Vec<usize> = (0..n)
        .sorted_by(|&a, &b| {
            instance
                .min_time(b)
                .cmp(instance.min_time(a))
                .then(a.cmp(&b))
        })
        .collect();
    // twin[j] = lowest machine with the same column as j
    let twin: Vec<usize> = (0..m)
        .map(|j| {
            (0..j)
                .find(|&k| (0..n).all(|i| instance.time(i, k) == instance.time(i, j)))
                .unwrap_or(j)
        })
        .collect();

    // greedy incumbent
    let mut loads = vec![Rat::zero(); m];
    let mut assignment = vec![0usize; n];
    for &i in &order {
        let j = instance
            .strategy_set(i)
            .into_iter()
            .min_by(|&a, &b| {
                (&loads[a] + instance.time(i, a)).cmp(&(&loads[b] + instance.time(i, b)))
            })
            .expect("non-empty strategy set");
        loads[j] = &loads[j] + instance.time(i, j);
        assignment[i] = j;
    }
    let incumbent = Profile::from_vec_unchecked(assignment);
    let mut best = (makespan(instance, &incumbent), incumbent);

    struct Frame<'a> {
        instance: &'a Instance,
        order: &'a [usize],
        twin: &'a [usize],
        loads: Vec<Rat>,
        assignment: Vec<usize>,
        nodes: u64,
        budget: u64,
    }

    fn dfs(
        f: &mut Frame<'_>,
        depth: usize,
        current_max: &Rat,
        best: &mut (Rat, Profile),
    ) -> Result<()> {
        f.nodes += 1;
        if f.nodes > f.budget {
            return Err(GameError::BudgetExceeded {
                required: "branch-and-bound nodes".into(),
                budget: f.budget,
            });
        }
        if depth == f.order.len() {
            if current_max < &best.0 {
                *best = (
                    current_max.clone(),
                    Profile::from_vec_unchecked(f.assignment.clone()),
                );
            }
            return Ok(());
        }
        let job = f.order[depth];
        let mut candidates: Vec<(Rat, usize)> = f
            .instance
            .strategy_set(job)
            .into_iter()
            .filter(|&j| {
                let t = f.twin[j];
                // among twins with equal load, only the lowest index branches
                !(t != j && (t..j).any(|k| f.twin[k] == t && f.loads[k] == f.loads[j]))
            })
            .map(|j| (&f.loads[j] + f.instance.time(job, j), j))
            .filter(|(load, _)| load < &best.0)
            .collect();
        candidates.sort();
        for (new_load, j) in candidates {
            if new_load >= best.0 {
                break;
            }
            let old = std::mem::replace(&mut f.loads[j], new_load.clone());
            f.assignment[job] = j;
            let next_max = current_max.max_of(&new_load).clone();
            dfs(f, depth + 1, &next_max, best)?;
            f.loads[j] = old;
        }
        Ok(())
    }

    let mut frame = Frame {
        instance,
        order: &order,
        twin: &twin,
        loads: vec![Rat::zero(); m],
        assignment: vec![0; n],
        nodes: 0,
        budget: node_budget,
    };
    dfs(&mut frame, 0, &Rat::zero(), &mut best)?;
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnalysisOptions {
    /// Coalition bound for strong-NE classification; 0 skips it.
    pub strong_bound: usize,
    pub profile_budget: u64,
    /// Joint-move budget per strong-NE check.
    pub coalition_budget: u64,
    pub threads: usize,
    pub count_preserving: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            strong_bound: 0,
            profile_budget: DEFAULT_PROFILE_BUDGET,
            coalition_budget: DEFAULT_COALITION_BUDGET,
            threads: 1,
            count_preserving: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NashEntry {
    pub profile: Profile,
    pub makespan: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrongEntry {
    pub profile: Profile,
    pub makespan: Rat,
    pub verdict: StrongVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Spoa {
    NotComputed,
    /// No profile survived the coalition check.
    Undefined,
    Exact {
        value: Rat,
    },
    /// Some strong-NE candidate was only checked up to `bound`.
    Unverified {
        bound: usize,
        ratio: Rat,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub policy: Policy,
    pub profiles_scanned: u64,
    pub opt: Rat,
    pub opt_profile: Profile,
    /// In enumeration order.
    pub nash: Vec<NashEntry>,
    pub strong_nash: Vec<StrongEntry>,
    /// `None` when the game has no pure NE.
    pub poa: Option<Rat>,
    pub spoa: Spoa,
}

impl EquilibriumReport {
    pub fn worst_nash_makespan(&self) -> Option<&Rat> {
        self.nash.iter().map(|e| &e.makespan).max()
    }
}

/// Mixed-radix decoding of profile `index` over the strategy sets, job 0 most
/// significant.
fn decode(mut index: u64, sets: &[Vec<usize>]) -> Vec<usize> {
    let mut assignment = vec![0; sets.len()];
    for (i, set) in sets.iter().enumerate().rev() {
        let radix = set.len() as u64;
        assignment[i] = set[(index % radix) as usize];
        index /= radix;
    }
    assignment
}

fn advance(assignment: &mut [usize], digits: &mut [usize], sets: &[Vec<usize>]) {
    for i in (0..sets.len()).rev() {
        digits[i] += 1;
        if digits[i] < sets[i].len() {
            assignment[i] = sets[i][digits[i]];
            return;
        }
        digits[i] = 0;
        assignment[i] = sets[i][0];
    }
}

struct ChunkResult {
    best: Option<(Rat, u64, Profile)>,
    nash: Vec<(u64, NashEntry)>,
}

fn scan_chunk(
    instance: &Instance,
    policy: Policy,
    sets: &[Vec<usize>],
    start: u64,
    end: u64,
) -> ChunkResult {
    let mut assignment = decode(start, sets);
    let mut digits: Vec<usize> = assignment
        .iter()
        .zip(sets)
        .map(|(j, set)| set.iter().position(|x| x == j).expect("decoded from set"))
        .collect();
    let mut out = ChunkResult {
        best: None,
        nash: Vec::new(),
    };
    for index in start..end {
        let profile = Profile::from_vec_unchecked(assignment.clone());
        let span = makespan(instance, &profile);
        if out.best.as_ref().is_none_or(|(b, _, _)| &span < b) {
            out.best = Some((span.clone(), index, profile.clone()));
        }
        if is_nash(instance, &profile, policy).is_nash() {
            out.nash.push((
                index,
                NashEntry {
                    profile,
                    makespan: span,
                },
            ));
        }
        if index + 1 < end {
            advance(&mut assignment, &mut digits, sets);
        }
    }
    out
}

/// Scan every profile: classify NE and (bounded) strong NE, compute OPT as
/// the minimum makespan and the exact PoA/SPoA ratios. Output is independent
/// of `threads`.
pub fn enumerate_equilibria(
    instance: &Instance,
    policy: Policy,
    options: AnalysisOptions,
) -> Result<EquilibriumReport> {
    let total = instance.profile_count();
    if total > options.profile_budget as u128 {
        return Err(GameError::BudgetExceeded {
            required: format!("{total} profiles"),
            budget: options.profile_budget,
        });
    }
    let total = total as u64;
    let sets: Vec<Vec<usize>> = (0..instance.jobs())
        .map(|i| instance.strategy_set(i))
        .collect();
    let threads = options.threads.max(1);
    let chunk_count = (threads as u64 * 8).min(total).max(1);
    let chunk = total.div_ceil(chunk_count);
    let ranges: Vec<(u64, u64)> = (0..chunk_count)
        .map(|c| (c * chunk, ((c + 1) * chunk).min(total)))
        .filter(|(a, b)| a < b)
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| GameError::InvalidParameter(format!("thread pool: {e}")))?;

    let (chunks, strong) = pool.install(|| {
        let chunks: Vec<ChunkResult> = ranges
            .par_iter()
            .map(|&(a, b)| scan_chunk(instance, policy, &sets, a, b))
            .collect();
        let strong: Vec<Option<StrongVerdict>> = if options.strong_bound == 0 {
            Vec::new()
        } else {
            let strong_options = StrongOptions {
                max_coalition: options.strong_bound,
                node_budget: options.coalition_budget,
                count_preserving: options.count_preserving,
            };
            chunks
                .iter()
                .flat_map(|c| c.nash.iter())
                .collect::<Vec<_>>()
                .par_iter()
                .map(|(_, entry)| {
                    let verdict = is_strong_nash(instance, &entry.profile, policy, strong_options);
                    (!verdict.is_false()).then_some(verdict)
                })
                .collect()
        };
        (chunks, strong)
    });

    let mut best: Option<(Rat, u64, Profile)> = None;
    let mut nash = Vec::new();
    for c in chunks {
        if let Some(b) = c.best {
            if best.as_ref().is_none_or(|x| (&b.0, b.1) < (&x.0, x.1)) {
                best = Some(b);
            }
        }
        nash.extend(c.nash.into_iter().map(|(_, e)| e));
    }
    let (opt, _, opt_profile) = best.expect("at least one profile");

    let strong_nash: Vec<StrongEntry> = nash
        .iter()
        .zip(strong.iter())
        .filter_map(|(entry, verdict)| {
            verdict.as_ref().map(|v| StrongEntry {
                profile: entry.profile.clone(),
                makespan: entry.makespan.clone(),
                verdict: v.clone(),
            })
        })
        .collect();

    let poa = nash.iter().map(|e| &e.makespan).max().map(|w| w / &opt);
    let spoa = if options.strong_bound == 0 {
        Spoa::NotComputed
    } else {
        match strong_nash.iter().map(|e| &e.makespan).max() {
            None => Spoa::Undefined,
            Some(worst) => {
                let ratio = worst / &opt;
                let weakest = strong_nash
                    .iter()
                    .filter_map(|e| match e.verdict {
                        StrongVerdict::TrueUpToBound { bound } => Some(bound),
                        _ => None,
                    })
                    .min();
                match weakest {
                    None => Spoa::Exact { value: ratio },
                    Some(bound) => Spoa::Unverified { bound, ratio },
                }
            }
        }
    };

    Ok(EquilibriumReport {
        policy,
        profiles_scanned: total,
        opt,
        opt_profile,
        nash,
        strong_nash,
        poa,
        spoa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_instance, EnvironmentSpec};

    fn rs(v: &[&str]) -> Vec<Rat> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn identical(lengths: &[&str], m: usize) -> Instance {
        make_instance(
            EnvironmentSpec::Identical {
                lengths: rs(lengths),
                machines: m,
            },
            "t",
        )
        .unwrap()
    }

    #[test]
    fn decode_and_advance_agree() {
        let sets = vec![vec![0, 2], vec![1], vec![0, 1, 2]];
        let mut a = decode(0, &sets);
        let mut d = vec![0; 3];
        for idx in 0..6u64 {
            assert_eq!(a, decode(idx, &sets));
            advance(&mut a, &mut d, &sets);
        }
    }

    #[test]
    fn single_machine_has_one_profile() {
        let inst = identical(&["1", "2", "3"], 1);
        let report = enumerate_equilibria(&inst, Policy::Equi, AnalysisOptions::default()).unwrap();
        assert_eq!(report.profiles_scanned, 1);
        assert_eq!(report.nash.len(), 1);
        assert_eq!(report.poa, Some(Rat::one()));
    }

    #[test]
    fn budget_is_enforced() {
        let inst = identical(&["1"; 12], 4);
        let err = enumerate_equilibria(
            &inst,
            Policy::Equi,
            AnalysisOptions {
                profile_budget: 1000,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert_eq!(err.code(), "BUDGET_EXCEEDED");
    }

    #[test]
    fn one_job_opt_is_row_minimum() {
        let inst = make_instance(
            EnvironmentSpec::Unrelated {
                times: vec![rs(&["5", "3/2", "inf", "7"])],
            },
            "t",
        )
        .unwrap();
        let (opt, witness) = opt_makespan(&inst, 1000).unwrap();
        assert_eq!(opt, "3/2".parse().unwrap());
        assert_eq!(witness.assignment(), &[1]);
    }

    #[test]
    fn non_nash_is_not_strong_with_singleton_witness() {
        let inst = identical(&["1", "1"], 2);
        let p = Profile::new(&inst, vec![0, 0]).unwrap();
        match is_strong_nash(&inst, &p, Policy::Equi, StrongOptions::full(2)) {
            StrongVerdict::False { witness } => assert_eq!(witness.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_job_on_fastest_allowed_machine_is_nash() {
        let inst = make_instance(
            EnvironmentSpec::Uniform {
                lengths: rs(&["3"]),
                speeds: rs(&["1", "3", "3", "1/2"]),
            },
            "t",
        )
        .unwrap();
        for j in [1, 2] {
            let p = Profile::new(&inst, vec![j]).unwrap();
            assert!(is_nash(&inst, &p, Policy::Equi).is_nash());
        }
        let slow = Profile::new(&inst, vec![0]).unwrap();
        assert!(!is_nash(&inst, &slow, Policy::Equi).is_nash());
    }

    #[test]
    fn cost_bound_for_single_job() {
        let inst = make_instance(
            EnvironmentSpec::Unrelated {
                times: vec![rs(&["4", "2"])],
            },
            "t",
        )
        .unwrap();
        assert_eq!(equi_cost_bounds(&inst), rs(&["2"]));
        let p = Profile::new(&inst, vec![1]).unwrap();
        assert!(equi_ne_cost_bound_check(&inst, &p));
    }
}
