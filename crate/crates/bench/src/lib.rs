//! Fixtures shared by the allocation benchmarks.

use basmin::basmin::BalanceItem;
use basmin::network::FlowId;
use basmin::{builtin_profiles, NetworkState, PathId};

/// `n` flows cycling through the built-in profiles, with the floors BASMIN
/// would use at increment `delta`.
pub fn balance_items(n: usize, delta: f64) -> Vec<BalanceItem> {
    let profiles = builtin_profiles();
    (0..n)
        .map(|k| {
            let p = &profiles[k % profiles.len()];
            let floor = match p.class() {
                basmin::TrafficClass::Elastic => delta.min(p.utility.b_max()),
                _ => p.utility.b_min(),
            };
            BalanceItem {
                id: FlowId(k as u64),
                priority: p.priority,
                utility: p.utility,
                floor,
                cap: p.utility.b_max(),
            }
        })
        .collect()
}

/// A single path of the given capacity holding `n` active elastic flows.
pub fn elastic_path(capacity: f64, n: usize) -> NetworkState {
    let profiles = builtin_profiles();
    let mut state = NetworkState::new(&[capacity]).expect("capacity is positive");
    for k in 0..n {
        let p = &profiles[if k % 2 == 0 { 5 } else { 3 }];
        let id = state.add_flow(p, 10.0);
        state
            .activate(id, PathId(0), 0.0)
            .expect("fresh flows are pending");
    }
    state
}
