mod common;

use common::*;
use coordmech::families::{gen_random_cycle_instance, gen_uniform_family};
use coordmech::model::{load_vector, loads, make_instance, makespan, EnvironmentSpec, Profile};
use coordmech::Rat;
use num_bigint::BigInt;
use proptest::prelude::*;

fn rs(v: &[&str]) -> Vec<Rat> {
    v.iter().map(|s| rat(s)).collect()
}

#[test]
fn identical_lengths_replicate_across_machines() {
    let inst = make_instance(
        EnvironmentSpec::Identical {
            lengths: rs(&["1", "1", "2"]),
            machines: 2,
        },
        "",
    )
    .unwrap();
    assert_eq!(
        inst.matrix(),
        &[rs(&["1", "1"]), rs(&["1", "1"]), rs(&["2", "2"])]
    );
}

#[test]
fn uniform_times_are_length_over_speed() {
    let inst = make_instance(
        EnvironmentSpec::Uniform {
            lengths: rs(&["1", "1/2"]),
            speeds: rs(&["1", "1/2"]),
        },
        "",
    )
    .unwrap();
    assert_eq!(inst.matrix(), &[rs(&["1", "2"]), rs(&["1/2", "1"])]);
}

#[test]
fn infinite_entries_shrink_the_strategy_set() {
    let cert = gen_random_cycle_instance();
    assert_eq!(cert.instance.strategy_set(0), vec![0, 1]);
    assert_eq!(cert.instance.strategy_set(3), vec![1, 2]);
}

#[test]
fn cycle_instance_loads_and_makespan() {
    let cert = gen_random_cycle_instance();
    let p = &cert.certified_profile;
    assert_eq!(
        load_vector(&cert.instance, p),
        vec![int(186), int(100), int(300)]
    );
    assert_eq!(makespan(&cert.instance, p), int(300));
}

#[test]
fn everything_on_the_first_machine() {
    let cert = gen_random_cycle_instance();
    let inst = make_instance(
        EnvironmentSpec::Identical {
            lengths: rs(&["3", "1/2", "5/4"]),
            machines: 3,
        },
        "",
    )
    .unwrap();
    let p = Profile::new(&inst, vec![0, 0, 0]).unwrap();
    assert_eq!(load_vector(&inst, &p), vec![rat("19/4"), int(0), int(0)]);
    assert!(Profile::new(&cert.instance, vec![0, 0, 0, 0]).is_err());
}

#[test]
fn uniform_family_fast_machine_load() {
    let cert = gen_uniform_family(1).unwrap();
    let views = loads(&cert.instance, &cert.certified_profile);
    let fast = cert.machine_group.iter().position(|&g| g == 0).unwrap();
    assert_eq!(views[fast].load, int(3));
    // two unit jobs and two half-length jobs at speed 1
    let by_hand: Rat = views[fast]
        .jobs
        .iter()
        .map(|&i| cert.instance.length(i).unwrap())
        .sum();
    assert_eq!(by_hand, int(3));
}

#[test]
fn rejections_carry_stable_codes() {
    let err = make_instance(
        EnvironmentSpec::Unrelated {
            times: vec![vec![Rat::INFINITY, Rat::INFINITY]],
        },
        "",
    )
    .unwrap_err();
    assert_eq!(err.code(), "EMPTY_STRATEGY_SET");
    let err = make_instance(
        EnvironmentSpec::RestrictedIdentical {
            lengths: rs(&["1"]),
            allowed: vec![vec![]],
            machines: 2,
        },
        "",
    )
    .unwrap_err();
    assert_eq!(err.code(), "EMPTY_STRATEGY_SET");
}

#[test]
fn infinity_rules() {
    let inf = Rat::INFINITY;
    assert!(inf > Rat::from_integer(i64::MAX));
    assert_eq!(&inf + &int(5), inf);
    assert!(inf.checked_sub(&inf).is_err());
    assert!(inf.checked_mul(&Rat::zero()).is_err());
    assert!(Rat::zero().checked_mul(&inf).is_err());
    assert!(int(1).checked_div(&Rat::zero()).is_err());
}

#[test]
fn rationals_are_kept_in_lowest_terms() {
    let r = Rat::from_big(BigInt::from(-6), BigInt::from(-4)).unwrap();
    assert_eq!(r.numer(), Some(&BigInt::from(3)));
    assert_eq!(r.denom(), Some(&BigInt::from(2)));
    assert_eq!(r.to_string(), "3/2");
}

fn dyadic_rat() -> impl Strategy<Value = Rat> {
    (1i64..=1 << 20, 0u32..=20).prop_map(|(a, e)| Rat::new(a, 1 << e))
}

fn any_rat() -> impl Strategy<Value = Rat> {
    (1i64..=1 << 20, 1i64..=1 << 20).prop_map(|(a, b)| Rat::new(a, b))
}

proptest! {
    #[test]
    fn loads_do_not_depend_on_summation_order(
        rows in prop::collection::vec(prop::collection::vec(prop_oneof![dyadic_rat(), any_rat()], 3), 1..8),
        picks in prop::collection::vec(0usize..3, 8),
    ) {
        let inst = make_instance(EnvironmentSpec::Unrelated { times: rows.clone() }, "").unwrap();
        let sigma: Vec<usize> = (0..rows.len()).map(|i| picks[i]).collect();
        let p = Profile::new(&inst, sigma.clone()).unwrap();
        let forward = load_vector(&inst, &p);
        let mut backward = vec![Rat::zero(); 3];
        for i in (0..rows.len()).rev() {
            backward[sigma[i]] = &rows[i][sigma[i]] + &backward[sigma[i]];
        }
        prop_assert_eq!(&forward, &backward);
        prop_assert_eq!(&forward, &oracle_loads(&inst, &sigma));
        prop_assert_eq!(makespan(&inst, &p), oracle_makespan(&inst, &sigma));
    }

    #[test]
    fn makespan_is_the_largest_load(
        rows in prop::collection::vec(prop::collection::vec(any_rat(), 4), 1..8),
        picks in prop::collection::vec(0usize..4, 8),
    ) {
        let inst = make_instance(EnvironmentSpec::Unrelated { times: rows.clone() }, "").unwrap();
        let p = Profile::new(&inst, (0..rows.len()).map(|i| picks[i]).collect()).unwrap();
        let span = makespan(&inst, &p);
        let views = loads(&inst, &p);
        prop_assert!(views.iter().all(|v| v.load <= span));
        prop_assert!(views.iter().any(|v| v.load == span));
        let mut all: Vec<usize> = views.iter().flat_map(|v| v.jobs.clone()).collect();
        all.sort();
        prop_assert_eq!(all, (0..rows.len()).collect::<Vec<_>>());
        prop_assert_eq!(views.iter().map(|v| v.count()).sum::<usize>(), rows.len());
    }

    #[test]
    fn rational_text_round_trips(r in any_rat(), neg in any::<bool>()) {
        let r = if neg { -r } else { r };
        let back: Rat = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
    }
}
