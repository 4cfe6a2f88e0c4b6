//! Potential functions for the (policy, environment) pairs that admit one.
//!
//! * `Equi`, any environment: `½ Σ_i (c_i + p_{i,σ(i)})`, an exact potential.
//!   For a coalition move it changes by `c'(S) − c(S) + I − I'`, where `I`
//!   sums `min(p, p')` over pairs of members sharing a machine; that is not
//!   always negative, so it does not certify coalition convergence.
//! * `Random`, identical or uniform machines:
//!   `Σ_j ℓ_j² / s_j + 3 Σ_i p_i² / s_{σ(i)}` with `ℓ_j` the total *length*
//!   on machine `j`.
//! * `Random`, at most two machines: `(ℓ_1 − ℓ_2)² + 3 Σ_i p_{i,σ(i)}²`.
//!
//! Everything else is `NoPotentialDefined`.

use crate::error::{GameError, Result};
use crate::model::{load_vector, Instance, Profile};
use crate::policy::{cost_vector, Policy};
use crate::rat::Rat;

pub fn has_potential(instance: &Instance, policy: Policy) -> bool {
    match policy {
        Policy::Equi => true,
        Policy::Random => instance.speeds().is_some() || instance.machines() <= 2,
        _ => false,
    }
}

pub fn potential(instance: &Instance, profile: &Profile, policy: Policy) -> Result<Rat> {
    match policy {
        Policy::Equi => Ok(equi_potential(instance, profile)),
        Policy::Random => {
            if let Some(speeds) = instance.speeds() {
                Ok(random_uniform_potential(instance, profile, &speeds))
            } else if instance.machines() <= 2 {
                Ok(random_two_machine_potential(instance, profile))
            } else {
                Err(undefined(instance, policy))
            }
        }
        _ => Err(undefined(instance, policy)),
    }
}

fn undefined(instance: &Instance, policy: Policy) -> GameError {
    GameError::NoPotentialDefined {
        policy: policy.to_string(),
        environment: format!(
            "{} machines ({})",
            instance.machines(),
            instance.environment().name()
        ),
    }
}

fn equi_potential(instance: &Instance, profile: &Profile) -> Rat {
    let costs = cost_vector(instance, profile, Policy::Equi);
    let total: Rat = costs
        .iter()
        .enumerate()
        .map(|(i, c)| c + instance.time(i, profile.machine_of(i)))
        .sum();
    total * Rat::new(1, 2)
}

fn random_uniform_potential(instance: &Instance, profile: &Profile, speeds: &[Rat]) -> Rat {
    let mut length_loads = vec![Rat::zero(); instance.machines()];
    let mut squares = Rat::zero();
    for i in 0..instance.jobs() {
        let j = profile.machine_of(i);
        let length = instance.length(i).expect("uniform environment has lengths");
        squares = squares + length.square() / &speeds[j];
        length_loads[j] = &length_loads[j] + &length;
    }
    let load_term: Rat = length_loads
        .iter()
        .zip(speeds)
        .map(|(l, s)| l.square() / s)
        .sum();
    load_term + Rat::from_integer(3) * squares
}

fn random_two_machine_potential(instance: &Instance, profile: &Profile) -> Rat {
    let loads = load_vector(instance, profile);
    let first = loads[0].clone();
    let second = loads.get(1).cloned().unwrap_or_else(Rat::zero);
    let squares: Rat = (0..instance.jobs())
        .map(|i| instance.time(i, profile.machine_of(i)).square())
        .sum();
    (first - second).square() + Rat::from_integer(3) * squares
}
