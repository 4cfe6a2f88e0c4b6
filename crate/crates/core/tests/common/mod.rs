//! Independent reference implementations used to cross-check the library.
//!
//! Everything here is written from the definitions, without calling the
//! library's cost, potential or equilibrium code.

#![allow(dead_code)]

use coordmech::model::Instance;
use coordmech::{Policy, Rat};
use itertools::Itertools;

pub fn rat(s: &str) -> Rat {
    s.parse().unwrap()
}

pub fn int(v: i64) -> Rat {
    Rat::from_integer(v)
}

/// Sorted-prefix form of the EQUI completion time on one machine: with the
/// times sorted ascending, the job at position `r` (0-based) of `k` finishes
/// at `p_0 + … + p_{r−1} + (k − r) p_r`.
pub fn equi_prefix_formula(times: &[Rat], job: usize) -> Rat {
    let mut sorted = times.to_vec();
    sorted.sort();
    let k = sorted.len();
    let r = sorted.iter().position(|p| p == &times[job]).unwrap();
    let prefix: Rat = sorted[..r].iter().sum();
    prefix + Rat::from_integer((k - r) as i64) * &sorted[r]
}

/// Completion time of the job at local position `job` among `times`
/// (indices are the jobs' global indices, used for SPT/LPT ties).
pub fn machine_cost(times: &[Rat], ids: &[usize], policy: Policy, job: usize) -> Rat {
    let k = times.len();
    match policy {
        Policy::Makespan => times.iter().sum(),
        Policy::Equi => equi_prefix_formula(times, job),
        Policy::Spt | Policy::Lpt => {
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| {
                let by_time = times[a].cmp(&times[b]);
                let by_time = if policy == Policy::Lpt {
                    by_time.reverse()
                } else {
                    by_time
                };
                by_time.then(ids[a].cmp(&ids[b]))
            });
            let mut t = Rat::zero();
            for &x in &order {
                t = t + &times[x];
                if x == job {
                    return t;
                }
            }
            unreachable!()
        }
        Policy::Random => {
            if k <= 6 {
                // average completion time over all k! orders
                let mut total = Rat::zero();
                let mut count = 0i64;
                for perm in (0..k).permutations(k) {
                    let mut t = Rat::zero();
                    for &x in &perm {
                        t = t + &times[x];
                        if x == job {
                            break;
                        }
                    }
                    total = total + t;
                    count += 1;
                }
                total / Rat::from_integer(count)
            } else {
                // each other job precedes `job` in exactly half of the orders
                let others: Rat = (0..k).filter(|&x| x != job).map(|x| &times[x]).sum();
                &times[job] + others / Rat::from_integer(2)
            }
        }
    }
}

pub fn oracle_cost(inst: &Instance, sigma: &[usize], policy: Policy, job: usize) -> Rat {
    let machine = sigma[job];
    let ids: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] == machine).collect();
    let times: Vec<Rat> = ids.iter().map(|&i| inst.time(i, machine).clone()).collect();
    let local = ids.iter().position(|&i| i == job).unwrap();
    machine_cost(&times, &ids, policy, local)
}

pub fn oracle_costs(inst: &Instance, sigma: &[usize], policy: Policy) -> Vec<Rat> {
    (0..sigma.len())
        .map(|i| oracle_cost(inst, sigma, policy, i))
        .collect()
}

pub fn oracle_loads(inst: &Instance, sigma: &[usize]) -> Vec<Rat> {
    let mut loads = vec![Rat::zero(); inst.machines()];
    for (i, &j) in sigma.iter().enumerate() {
        loads[j] = &loads[j] + inst.time(i, j);
    }
    loads
}

pub fn oracle_makespan(inst: &Instance, sigma: &[usize]) -> Rat {
    oracle_loads(inst, sigma).into_iter().max().unwrap()
}

fn finite_machines(inst: &Instance, job: usize) -> Vec<usize> {
    (0..inst.machines())
        .filter(|&j| inst.time(job, j).is_finite())
        .collect()
}

/// Whether every job is at least as well off as under any unilateral move.
pub fn oracle_is_nash(inst: &Instance, sigma: &[usize], policy: Policy) -> bool {
    (0..sigma.len()).all(|i| {
        let now = oracle_cost(inst, sigma, policy, i);
        finite_machines(inst, i).into_iter().all(|j| {
            let mut moved = sigma.to_vec();
            moved[i] = j;
            oracle_cost(inst, &moved, policy, i) >= now
        })
    })
}

/// All valid profiles, first job slowest-varying.
pub fn all_profiles(inst: &Instance) -> Vec<Vec<usize>> {
    (0..inst.jobs())
        .map(|i| finite_machines(inst, i))
        .multi_cartesian_product()
        .collect()
}

pub fn oracle_opt(inst: &Instance) -> Rat {
    all_profiles(inst)
        .iter()
        .map(|s| oracle_makespan(inst, s))
        .min()
        .unwrap()
}

/// ½ Σ (c_i + p_{i,σ(i)}) from the reference EQUI costs.
pub fn oracle_equi_potential(inst: &Instance, sigma: &[usize]) -> Rat {
    let total: Rat = (0..sigma.len())
        .map(|i| oracle_cost(inst, sigma, Policy::Equi, i) + inst.time(i, sigma[i]))
        .sum();
    total / Rat::from_integer(2)
}

/// Σ ℓ_j²/s_j + 3 Σ p_i²/s_{σ(i)}, loads in lengths.
pub fn oracle_random_uniform_potential(lengths: &[Rat], speeds: &[Rat], sigma: &[usize]) -> Rat {
    let mut loads = vec![Rat::zero(); speeds.len()];
    for (i, &j) in sigma.iter().enumerate() {
        loads[j] = &loads[j] + &lengths[i];
    }
    let a: Rat = loads.iter().zip(speeds).map(|(l, s)| l * l / s).sum();
    let b: Rat = sigma
        .iter()
        .enumerate()
        .map(|(i, &j)| &lengths[i] * &lengths[i] / &speeds[j])
        .sum();
    a + Rat::from_integer(3) * b
}

/// (ℓ_1 − ℓ_2)² + 3 Σ p_{i,σ(i)}².
pub fn oracle_random_two_machine_potential(inst: &Instance, sigma: &[usize]) -> Rat {
    let loads = oracle_loads(inst, sigma);
    let d = &loads[0] - &loads[1];
    let sq: Rat = (0..sigma.len())
        .map(|i| inst.time(i, sigma[i]) * inst.time(i, sigma[i]))
        .sum();
    &d * &d + Rat::from_integer(3) * sq
}

/// Per-job NE cost bound under EQUI with `q_i = min_j p_{ij}`: jobs ranked
/// by ascending `q` (ties by index); rank `r` gets `2(q_0+…+q_{r−1}) + (n−r) q_r`.
pub fn oracle_equi_bounds(inst: &Instance) -> Vec<Rat> {
    let n = inst.jobs();
    let q: Vec<Rat> = (0..n)
        .map(|i| {
            (0..inst.machines())
                .map(|j| inst.time(i, j).clone())
                .min()
                .unwrap()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| q[a].cmp(&q[b]).then(a.cmp(&b)));
    let mut bounds = vec![Rat::zero(); n];
    for (r, &i) in order.iter().enumerate() {
        let before: Rat = order[..r].iter().map(|&t| &q[t]).sum();
        bounds[i] = Rat::from_integer(2) * before + Rat::from_integer((n - r) as i64) * &q[i];
    }
    bounds
}

/// Σ min(p_{i,j}, p_{i',j}) over pairs of `members` sharing a machine `j`.
pub fn coalition_overlap(inst: &Instance, sigma: &[usize], members: &[usize]) -> Rat {
    members
        .iter()
        .tuple_combinations()
        .filter(|(&a, &b)| sigma[a] == sigma[b])
        .map(|(&a, &b)| inst.time(a, sigma[a]).min_of(inst.time(b, sigma[b])))
        .sum()
}

/// Random instance of any environment plus a random valid profile.
pub fn arb_game(
    max_n: usize,
    max_m: usize,
) -> impl proptest::strategy::Strategy<Value = (Instance, coordmech::Profile)> {
    use coordmech::families::{gen_random_instance, random_profile, EnvironmentKind, Magnitudes};
    use proptest::prelude::*;
    use rand::SeedableRng;
    (0usize..4, 1..=max_n, 1..=max_m, any::<u64>()).prop_map(|(kind, n, m, seed)| {
        let inst = gen_random_instance(
            EnvironmentKind::ALL[kind],
            n,
            m,
            seed,
            Magnitudes::default(),
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let profile = random_profile(&inst, &mut rng);
        (inst, profile)
    })
}

/// Whether some coalition of at most `max_size` jobs has a joint move (any
/// targets, staying put allowed) that strictly lowers every member's cost.
pub fn oracle_has_improving_coalition(
    inst: &Instance,
    sigma: &[usize],
    policy: Policy,
    max_size: usize,
) -> bool {
    let before = oracle_costs(inst, sigma, policy);
    (1..=max_size.min(sigma.len())).any(|size| {
        (0..sigma.len()).combinations(size).any(|members| {
            members
                .iter()
                .map(|&i| finite_machines(inst, i))
                .multi_cartesian_product()
                .any(|targets| {
                    let mut moved = sigma.to_vec();
                    for (&i, &t) in members.iter().zip(&targets) {
                        moved[i] = t;
                    }
                    members
                        .iter()
                        .all(|&i| oracle_cost(inst, &moved, policy, i) < before[i])
                })
        })
    })
}
