//! Shared fixtures for the benchmarks: the Table I servers.

use agewise_core::{Dph, Policy, ServerSpec};

pub fn m1() -> ServerSpec {
    ServerSpec::new(
        "M1",
        Dph::mixed_geometric(0.01, 0.05, 0.5, 0.5).unwrap(),
        10.0,
    )
    .unwrap()
}

pub fn g() -> ServerSpec {
    ServerSpec::new("G", Dph::geometric(1.0 / 30.0).unwrap(), 100.0).unwrap()
}

pub fn u() -> ServerSpec {
    ServerSpec::new("U", Dph::uniform(12, 18).unwrap(), 500.0).unwrap()
}

pub fn pool() -> Vec<ServerSpec> {
    vec![m1(), g(), u()]
}

/// `[M1,G,U](5,10,20)`.
pub fn three_server_policy() -> Policy {
    Policy::new(pool(), vec![5, 10, 20]).unwrap()
}

/// `[M1,G](10,20)`.
pub fn two_server_policy() -> Policy {
    Policy::new(vec![m1(), g()], vec![10, 20]).unwrap()
}
