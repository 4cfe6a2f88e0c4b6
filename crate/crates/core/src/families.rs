//! Instance families with certified profiles.
//!
//! Each generator returns the instance together with a profile whose
//! equilibrium status and makespan are known in closed form, and a witness
//! schedule bounding OPT. Group labels follow the usual numbering of each
//! construction (`G_0..G_k` for the uniform and restricted families,
//! `J_1..J_m` for the unrelated one).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::model::{make_instance, EnvironmentSpec, Instance, Profile};
use crate::policy::Policy;
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Claim {
    IsNe,
    IsStrongNe,
    CyclesUnderRandom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedInstance {
    pub family: &'static str,
    pub parameter: usize,
    /// Policy under which the claims hold.
    pub policy: Policy,
    pub instance: Instance,
    pub certified_profile: Profile,
    pub expected_makespan: Rat,
    pub opt_witness: Profile,
    pub expected_opt_bound: Rat,
    pub claims: Vec<Claim>,
    pub job_group: Vec<usize>,
    pub machine_group: Vec<usize>,
    /// Forced `(job, target)` better-response sequence, for cycle certificates.
    pub witness_moves: Vec<(usize, usize)>,
}

/// Largest `k` accepted by the uniform and restricted generators.
pub const MAX_GROUP_PARAMETER: usize = 7;

fn check_range(name: &str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(GameError::InvalidParameter(format!(
            "{name} must be in {lo}..={hi}, got {value}"
        )));
    }
    Ok(())
}

/// `m(m−1)` unit jobs and one job of length `m` on `m` identical machines.
pub fn gen_identical_family(m: usize) -> Result<CertifiedInstance> {
    check_range("m", m, 2, 64)?;
    let units = m * (m - 1);
    let mut lengths = vec![Rat::one(); units];
    lengths.push(Rat::from_integer(m as i64));
    let instance = make_instance(
        EnvironmentSpec::Identical {
            lengths,
            machines: m,
        },
        format!("identical-family m={m}"),
    )?;
    let mut certified: Vec<usize> = (0..units).map(|i| i / (m - 1)).collect();
    certified.push(0);
    let mut witness: Vec<usize> = (0..units).map(|i| 1 + i / m).collect();
    witness.push(0);
    let mut job_group = vec![0; units];
    job_group.push(1);
    Ok(CertifiedInstance {
        family: "identical",
        parameter: m,
        policy: Policy::Equi,
        certified_profile: Profile::new(&instance, certified)?,
        opt_witness: Profile::new(&instance, witness)?,
        instance,
        expected_makespan: Rat::from_integer(2 * m as i64 - 1),
        expected_opt_bound: Rat::from_integer(m as i64),
        claims: vec![Claim::IsNe, Claim::IsStrongNe],
        job_group,
        machine_group: vec![0; m],
        witness_moves: Vec::new(),
    })
}

/// Machine-group sizes `m_0 = 1`, `m_j = Σ_{t<j} m_t 2^{j−t}`.
pub fn uniform_group_sizes(k: usize) -> Vec<usize> {
    let mut sizes = vec![1usize];
    for j in 1..=k {
        let m_j = (0..j).map(|t| sizes[t] << (j - t)).sum();
        sizes.push(m_j);
    }
    sizes
}

/// Hands out job indices group by group while a layout is being filled.
struct Pools {
    next: Vec<usize>,
    end: Vec<usize>,
}

impl Pools {
    fn new(counts: &[usize]) -> Self {
        let mut next = Vec::with_capacity(counts.len());
        let mut end = Vec::with_capacity(counts.len());
        let mut offset = 0;
        for &c in counts {
            next.push(offset);
            offset += c;
            end.push(offset);
        }
        Pools { next, end }
    }

    fn take(&mut self, group: usize, count: usize) -> std::ops::Range<usize> {
        let start = self.next[group];
        self.next[group] += count;
        assert!(
            self.next[group] <= self.end[group],
            "layout overdraws group {group}"
        );
        start..self.next[group]
    }

    fn exhausted(&self) -> bool {
        self.next == self.end
    }
}

fn group_labels(counts: &[usize], first_label: usize) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(g, &c)| std::iter::repeat_n(g + first_label, c))
        .collect()
}

/// Uniform machines in groups `G_0..G_k` (speed `2^-j`), with the profile σ
/// of makespan `k + 2`.
///
/// Job group `J_i` (length `2^-i`) has exactly as many jobs as σ places:
/// `2` for `i = 0` and `3 m_i` otherwise.
pub fn gen_uniform_family(k: usize) -> Result<CertifiedInstance> {
    check_range("k", k, 1, MAX_GROUP_PARAMETER)?;
    let sizes = uniform_group_sizes(k);
    let counts: Vec<usize> = (0..=k)
        .map(|i| 2 * sizes[i] + (0..i).map(|t| sizes[t] << (i - t)).sum::<usize>())
        .collect();
    let lengths: Vec<Rat> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(Rat::pow2(-(i as i32)), c))
        .collect();
    let machine_group = group_labels(&sizes, 0);
    let speeds: Vec<Rat> = machine_group
        .iter()
        .map(|&j| Rat::pow2(-(j as i32)))
        .collect();
    let instance = make_instance(
        EnvironmentSpec::Uniform { lengths, speeds },
        format!("uniform-family k={k}"),
    )?;

    let mut sigma = vec![usize::MAX; instance.jobs()];
    let mut pools = Pools::new(&counts);
    for (machine, &j) in machine_group.iter().enumerate() {
        for i in pools.take(j, 2) {
            sigma[i] = machine;
        }
        for g in j + 1..=k {
            for i in pools.take(g, 1 << (g - j)) {
                sigma[i] = machine;
            }
        }
    }
    assert!(pools.exhausted(), "σ must consume every job");

    let mut witness = vec![usize::MAX; instance.jobs()];
    let mut pools = Pools::new(&counts);
    let first_machine: Vec<usize> = (0..=k).map(|g| sizes[..g].iter().sum()).collect();
    for g in 0..=k {
        let per_machine = counts[g] / sizes[g];
        for slot in 0..sizes[g] {
            for i in pools.take(g, per_machine) {
                witness[i] = first_machine[g] + slot;
            }
        }
    }
    assert!(pools.exhausted());

    Ok(CertifiedInstance {
        family: "uniform",
        parameter: k,
        policy: Policy::Equi,
        certified_profile: Profile::new(&instance, sigma)?,
        opt_witness: Profile::new(&instance, witness)?,
        instance,
        expected_makespan: Rat::from_integer(k as i64 + 2),
        expected_opt_bound: Rat::from_integer(3),
        claims: vec![Claim::IsNe, Claim::IsStrongNe],
        job_group: group_labels(&counts, 0),
        machine_group,
        witness_moves: Vec::new(),
    })
}

/// Machine-group sizes `1, 2, 3·2^{j−2}` for `j = 0, 1, ≥ 2`.
pub fn restricted_group_sizes(k: usize) -> Vec<usize> {
    (0..=k)
        .map(|j| match j {
            0 => 1,
            1 => 2,
            _ => 3 << (j - 2),
        })
        .collect()
}

/// Restricted identical machines in groups `G_0..G_k` with the profile μ.
///
/// On each `G_j` machine μ places `2^{j+1}` jobs of length `2^-j` and `2^i`
/// jobs of length `2^-i` for every `i > j`. Job group `J_i` has exactly the
/// jobs μ places; each job may use all of `G_i` plus its μ-machine.
pub fn gen_restricted_family(k: usize) -> Result<CertifiedInstance> {
    check_range("k", k, 1, MAX_GROUP_PARAMETER)?;
    let sizes = restricted_group_sizes(k);
    let counts: Vec<usize> = (0..=k)
        .map(|i| (1usize << i) * (2 * sizes[i] + sizes[..i].iter().sum::<usize>()))
        .collect();
    let machine_group = group_labels(&sizes, 0);
    let job_group = group_labels(&counts, 0);
    let m = machine_group.len();
    let n: usize = counts.iter().sum();
    let first_machine: Vec<usize> = (0..=k).map(|g| sizes[..g].iter().sum()).collect();

    let mut mu = vec![usize::MAX; n];
    let mut pools = Pools::new(&counts);
    for (machine, &j) in machine_group.iter().enumerate() {
        for i in pools.take(j, 1 << (j + 1)) {
            mu[i] = machine;
        }
        for g in j + 1..=k {
            for i in pools.take(g, 1 << g) {
                mu[i] = machine;
            }
        }
    }
    assert!(pools.exhausted(), "μ must consume every job");

    let allowed: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let g = job_group[i];
            let mut set: Vec<usize> = (first_machine[g]..first_machine[g] + sizes[g]).collect();
            if !set.contains(&mu[i]) {
                set.push(mu[i]);
            }
            set
        })
        .collect();
    let lengths: Vec<Rat> = job_group.iter().map(|&g| Rat::pow2(-(g as i32))).collect();
    let instance = make_instance(
        EnvironmentSpec::RestrictedIdentical {
            lengths,
            allowed,
            machines: m,
        },
        format!("restricted-family k={k}"),
    )?;

    let mut witness = vec![usize::MAX; n];
    let mut pools = Pools::new(&counts);
    for g in 0..=k {
        let per_machine = counts[g] / sizes[g];
        for slot in 0..sizes[g] {
            for i in pools.take(g, per_machine) {
                witness[i] = first_machine[g] + slot;
            }
        }
    }
    assert!(pools.exhausted());

    Ok(CertifiedInstance {
        family: "restricted",
        parameter: k,
        policy: Policy::Equi,
        certified_profile: Profile::new(&instance, mu)?,
        opt_witness: Profile::new(&instance, witness)?,
        instance,
        expected_makespan: Rat::from_integer(k as i64 + 2),
        expected_opt_bound: Rat::from_integer(3),
        claims: vec![Claim::IsNe, Claim::IsStrongNe],
        job_group,
        machine_group,
        witness_moves: Vec::new(),
    })
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Unrelated machines with job groups `J_1..J_m`: `J_j` (`j < m`) holds
/// `2(m−1)!/(j−1)!` jobs that run on machine `j` in `(j−1)!/(m−1)!` or on
/// machine `j+1` in `j!/(2(m−1)!)`; `J_m` is one job of length 1 on machine
/// `m`. The certified profile splits every `J_j` evenly over `j` and `j+1`.
pub fn gen_unrelated_family(m: usize) -> Result<CertifiedInstance> {
    check_range("m", m, 2, 8)?;
    let top = factorial(m - 1);
    let group_size = |j: usize| (2 * top / factorial(j - 1)) as usize;
    let mut times = Vec::new();
    let mut job_group = Vec::new();
    let mut certified = Vec::new();
    let mut witness = Vec::new();
    for j in 1..m {
        let n_j = group_size(j);
        let mut row = vec![Rat::INFINITY; m];
        row[j - 1] = Rat::new(factorial(j - 1), top);
        row[j] = Rat::new(factorial(j), 2 * top);
        for t in 0..n_j {
            times.push(row.clone());
            job_group.push(j);
            certified.push(if t < n_j / 2 { j - 1 } else { j });
            witness.push(j - 1);
        }
    }
    let mut last = vec![Rat::INFINITY; m];
    last[m - 1] = Rat::one();
    times.push(last);
    job_group.push(m);
    certified.push(m - 1);
    witness.push(m - 1);

    let instance = make_instance(
        EnvironmentSpec::Unrelated { times },
        format!("unrelated-family m={m}"),
    )?;
    Ok(CertifiedInstance {
        family: "unrelated",
        parameter: m,
        policy: Policy::Equi,
        certified_profile: Profile::new(&instance, certified)?,
        opt_witness: Profile::new(&instance, witness)?,
        instance,
        expected_makespan: Rat::new(m as i64 + 1, 2),
        expected_opt_bound: Rat::from_integer(2),
        claims: vec![Claim::IsNe, Claim::IsStrongNe],
        job_group,
        machine_group: (1..=m).collect(),
        witness_moves: Vec::new(),
    })
}

/// The four-job, three-machine instance on which RANDOM better-response
/// dynamics can cycle, with the eight-move cycle from `AB|C|D`.
pub fn gen_random_cycle_instance() -> CertifiedInstance {
    let row = |v: [&str; 3]| {
        v.iter()
            .map(|s| s.parse::<Rat>().unwrap())
            .collect::<Vec<_>>()
    };
    let times = vec![
        row(["90", "84", "inf"]),
        row(["96", "2", "inf"]),
        row(["138", "100", "inf"]),
        row(["inf", "254", "300"]),
    ];
    let instance = make_instance(EnvironmentSpec::Unrelated { times }, "random-cycle")
        .and_then(|i| i.with_names(["A", "B", "C", "D"].map(String::from).to_vec()))
        .expect("static instance is valid");
    let (a, b, c, d) = (0, 1, 2, 3);
    CertifiedInstance {
        family: "random-cycle",
        parameter: 0,
        policy: Policy::Random,
        certified_profile: Profile::new(&instance, vec![0, 0, 1, 2]).unwrap(),
        opt_witness: Profile::new(&instance, vec![0, 1, 0, 1]).unwrap(),
        instance,
        expected_makespan: Rat::from_integer(300),
        expected_opt_bound: Rat::from_integer(256),
        claims: vec![Claim::CyclesUnderRandom],
        job_group: vec![0; 4],
        machine_group: vec![0; 3],
        witness_moves: vec![
            (a, 1),
            (b, 1),
            (c, 0),
            (d, 1),
            (b, 0),
            (a, 0),
            (c, 1),
            (d, 2),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvironmentKind {
    Identical,
    Uniform,
    Restricted,
    Unrelated,
}

impl EnvironmentKind {
    pub const ALL: [EnvironmentKind; 4] = [
        EnvironmentKind::Identical,
        EnvironmentKind::Uniform,
        EnvironmentKind::Restricted,
        EnvironmentKind::Unrelated,
    ];
}

impl fmt::Display for EnvironmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvironmentKind::Identical => "identical",
            EnvironmentKind::Uniform => "uniform",
            EnvironmentKind::Restricted => "restricted",
            EnvironmentKind::Unrelated => "unrelated",
        })
    }
}

impl FromStr for EnvironmentKind {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identical" => Ok(EnvironmentKind::Identical),
            "uniform" => Ok(EnvironmentKind::Uniform),
            "restricted" => Ok(EnvironmentKind::Restricted),
            "unrelated" => Ok(EnvironmentKind::Unrelated),
            _ => Err(GameError::InvalidInput(format!(
                "unknown environment {s:?}"
            ))),
        }
    }
}

/// Bounds for random rationals `a/b` with `1 ≤ a ≤ max_numerator`,
/// `1 ≤ b ≤ max_denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Magnitudes {
    pub max_numerator: u32,
    pub max_denominator: u32,
}

impl Default for Magnitudes {
    fn default() -> Self {
        Magnitudes {
            max_numerator: 10,
            max_denominator: 4,
        }
    }
}

fn random_rat(rng: &mut ChaCha8Rng, mag: Magnitudes) -> Rat {
    let a = rng.gen_range(1..=mag.max_numerator.max(1)) as i64;
    let b = rng.gen_range(1..=mag.max_denominator.max(1)) as i64;
    Rat::new(a, b)
}

/// Deterministic random instance for property tests and sweeps.
pub fn gen_random_instance(
    kind: EnvironmentKind,
    n: usize,
    m: usize,
    seed: u64,
    magnitudes: Magnitudes,
) -> Result<Instance> {
    if n == 0 || m == 0 {
        return Err(GameError::InvalidParameter("need n, m >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = format!("random {kind} n={n} m={m} seed={seed}");
    let mut lengths = || {
        (0..n)
            .map(|_| random_rat(&mut rng, magnitudes))
            .collect::<Vec<_>>()
    };
    let spec = match kind {
        EnvironmentKind::Identical => EnvironmentSpec::Identical {
            lengths: lengths(),
            machines: m,
        },
        EnvironmentKind::Uniform => {
            let lengths = lengths();
            let speeds = (0..m).map(|_| random_rat(&mut rng, magnitudes)).collect();
            EnvironmentSpec::Uniform { lengths, speeds }
        }
        EnvironmentKind::Restricted => {
            let lengths = lengths();
            let allowed = (0..n)
                .map(|_| {
                    let mut set: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
                    if set.is_empty() {
                        set.push(rng.gen_range(0..m));
                    }
                    set
                })
                .collect();
            EnvironmentSpec::RestrictedIdentical {
                lengths,
                allowed,
                machines: m,
            }
        }
        EnvironmentKind::Unrelated => {
            let times = (0..n)
                .map(|_| {
                    let mut row: Vec<Rat> = (0..m)
                        .map(|_| {
                            if m > 1 && rng.gen_ratio(1, 5) {
                                Rat::INFINITY
                            } else {
                                random_rat(&mut rng, magnitudes)
                            }
                        })
                        .collect();
                    if row.iter().all(Rat::is_infinite) {
                        let j = rng.gen_range(0..m);
                        row[j] = random_rat(&mut rng, magnitudes);
                    }
                    row
                })
                .collect();
            EnvironmentSpec::Unrelated { times }
        }
    };
    make_instance(spec, label)
}

/// A uniformly random valid profile.
pub fn random_profile(instance: &Instance, rng: &mut impl Rng) -> Profile {
    let assignment = (0..instance.jobs())
        .map(|i| {
            let set = instance.strategy_set(i);
            set[rng.gen_range(0..set.len())]
        })
        .collect();
    Profile::from_vec_unchecked(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::makespan;

    #[test]
    fn identical_smallest_case() {
        let c = gen_identical_family(2).unwrap();
        assert_eq!(c.instance.jobs(), 3);
        assert_eq!(
            makespan(&c.instance, &c.certified_profile),
            Rat::from_integer(3)
        );
        assert_eq!(makespan(&c.instance, &c.opt_witness), Rat::from_integer(2));
    }

    #[test]
    fn uniform_group_sizes_follow_recursion() {
        assert_eq!(uniform_group_sizes(1), vec![1, 2]);
        assert_eq!(uniform_group_sizes(3), vec![1, 2, 8, 32]);
    }

    #[test]
    fn uniform_k1_shape() {
        let c = gen_uniform_family(1).unwrap();
        assert_eq!(c.instance.machines(), 3);
        assert_eq!(c.instance.jobs(), 8);
        assert_eq!(
            c.instance.speeds().unwrap(),
            vec![Rat::one(), Rat::new(1, 2), Rat::new(1, 2)]
        );
    }

    #[test]
    fn restricted_group_sizes_sum() {
        for k in 1..=5 {
            let total: usize = restricted_group_sizes(k).iter().sum();
            assert_eq!(total, 3 << (k - 1));
        }
    }

    #[test]
    fn unrelated_m2_shape() {
        let c = gen_unrelated_family(2).unwrap();
        let inst = &c.instance;
        assert_eq!(inst.jobs(), 3);
        assert_eq!(inst.row(0), &[Rat::one(), Rat::new(1, 2)]);
        assert_eq!(inst.row(2), &[Rat::INFINITY, Rat::one()]);
        assert_eq!(makespan(inst, &c.certified_profile), Rat::new(3, 2));
    }

    #[test]
    fn parameters_out_of_range_are_rejected() {
        assert!(gen_identical_family(1).is_err());
        assert!(gen_uniform_family(0).is_err());
        assert!(gen_restricted_family(0).is_err());
        assert!(gen_unrelated_family(1).is_err());
        assert!(gen_unrelated_family(9).is_err());
        assert!(
            gen_random_instance(EnvironmentKind::Unrelated, 0, 2, 1, Magnitudes::default())
                .is_err()
        );
    }

    #[test]
    fn random_instances_are_deterministic() {
        let a = gen_random_instance(EnvironmentKind::Identical, 3, 2, 7, Magnitudes::default())
            .unwrap();
        let b = gen_random_instance(EnvironmentKind::Identical, 3, 2, 7, Magnitudes::default())
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_unrelated_rows_have_a_finite_entry() {
        let inst = gen_random_instance(EnvironmentKind::Unrelated, 4, 3, 1, Magnitudes::default())
            .unwrap();
        for i in 0..4 {
            assert!(inst.row(i).iter().any(Rat::is_finite));
        }
    }

    #[test]
    fn random_uniform_obeys_environment_law() {
        let inst =
            gen_random_instance(EnvironmentKind::Uniform, 5, 3, 11, Magnitudes::default()).unwrap();
        let speeds = inst.speeds().unwrap();
        for i in 0..5 {
            let first = inst.time(i, 0) * &speeds[0];
            for (j, s) in speeds.iter().enumerate().skip(1) {
                assert_eq!(inst.time(i, j) * s, first);
            }
        }
    }
}
