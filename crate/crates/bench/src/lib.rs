//! Instances shared by the benchmarks.

use sigtamper_core::{NetworkSpec, ScenarioConfig, SuperGraph};

/// Generated network `net` (`A`, `B`, `C`, `D:<seed>` or `crossing`) at
/// `rate` veh/hr over `steps` steps.
pub fn instance(net: &str, rate: u32, steps: u32) -> SuperGraph {
    let spec: NetworkSpec = net.parse().expect("known network");
    ScenarioConfig::uniform(spec, steps, rate)
        .instantiate(None)
        .and_then(|i| i.expand())
        .expect("benchmark instance")
}
