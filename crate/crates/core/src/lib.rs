//! Scheduling games under coordination mechanisms.
//!
//! Each of `n` jobs picks one of `m` machines; every machine schedules its
//! jobs with the same [`Policy`], and a job's cost is its completion time.
//! The crate computes everything exactly over [`Rat`]:
//!
//! * costs under MAKESPAN, SPT, LPT, RANDOM and EQUI ([`policy`]),
//! * potential functions and better-response dynamics, unilateral and by
//!   coalitions, with cycle detection ([`potential`], [`dynamics`]),
//! * Nash and strong Nash checks, exhaustive equilibrium enumeration, exact
//!   OPT and price-of-anarchy ratios ([`equilibrium`]),
//! * the lower-bound instance families with certified equilibria
//!   ([`families`]) and their JSON formats ([`io`]).

pub mod coalition;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod families;
pub mod io;
pub mod model;
pub mod policy;
pub mod potential;
pub mod rat;

pub use error::{GameError, Result};
pub use model::{loads, makespan, Environment, EnvironmentSpec, Instance, MachineView, Profile};
pub use policy::Policy;
pub use rat::Rat;
