#![allow(dead_code)]

pub mod examples;

use basmin::basmin::{load_balance, BalanceItem, BasminConfig};
use basmin::{builtin_profiles, FlowId, TrafficClass, UtilityFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Utility from the closed forms, written out independently of the crate.
pub fn utility(u: &UtilityFunction, b: f64) -> f64 {
    match *u {
        UtilityFunction::Elastic { k, b_max, scale } => {
            1.0 - (-k * b / scale.unwrap_or(b_max)).exp()
        }
        UtilityFunction::HardRealTime { b_max } => {
            if b >= b_max {
                1.0
            } else {
                0.0
            }
        }
        UtilityFunction::RealTime { k1, k2, .. } => 1.0 - (-k1 * b * b / (k2 + b)).exp(),
    }
}

pub fn item_worth(item: &BalanceItem, b: f64) -> f64 {
    item.priority.weight() * utility(&item.utility, b)
}

/// Worth at `x`, linearly interpolated between the points
/// `floor + n * delta` (clipped at the cap).
pub fn pl_worth(item: &BalanceItem, x: f64, delta: f64) -> f64 {
    if item.cap - item.floor <= 1e-12 {
        return item_worth(item, item.floor);
    }
    let n = ((x - item.floor) / delta + 1e-9).floor().max(0.0);
    let a = (item.floor + n * delta).min(item.cap);
    let b = (a + delta).min(item.cap);
    if b - a <= 1e-12 {
        return item_worth(item, a);
    }
    let wa = item_worth(item, a);
    let wb = item_worth(item, b);
    wa + (wb - wa) * (x - a) / (b - a)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn milli(x: f64) -> u64 {
    let m = (x * 1000.0).round();
    assert!(
        (m - x * 1000.0).abs() < 1e-6,
        "{x} is not on the 0.001 grid"
    );
    m as u64
}

/// Exhaustive optimum of the interpolated worth over allocations on the
/// finest common grid of capacity, floors, caps and `delta`.
pub fn dp_optimum(capacity: f64, items: &[BalanceItem], delta: f64) -> Option<f64> {
    let mut g = milli(capacity);
    g = gcd(g, milli(delta));
    for i in items {
        g = gcd(g, milli(i.floor));
        g = gcd(g, milli(i.cap));
    }
    let unit = g as f64 / 1000.0;
    let n = (milli(capacity) / g) as usize;
    let neg = f64::NEG_INFINITY;
    let mut best = vec![0.0f64; n + 1];
    for item in items {
        let lo = (milli(item.floor) / g) as usize;
        let hi = (milli(item.cap) / g) as usize;
        let values: Vec<f64> = (lo..=hi)
            .map(|k| pl_worth(item, k as f64 * unit, delta))
            .collect();
        let mut next = vec![neg; n + 1];
        for (used, slot) in next.iter_mut().enumerate() {
            for (j, w) in values.iter().enumerate() {
                let x = lo + j;
                if x > used {
                    break;
                }
                let prev = best[used - x];
                if prev > neg && prev + w > *slot {
                    *slot = prev + w;
                }
            }
        }
        best = next;
    }
    best.into_iter().filter(|v| v.is_finite()).reduce(f64::max)
}

/// Floors as stated for the oracle: elastic 0, RT `b_min`, HRT `b_max`.
pub fn oracle_item(id: u64, profile: &basmin::TrafficProfile) -> BalanceItem {
    let floor = match profile.class() {
        TrafficClass::Elastic => 0.0,
        _ => profile.utility.b_min(),
    };
    BalanceItem {
        id: FlowId(id),
        priority: profile.priority,
        utility: profile.utility,
        floor,
        cap: profile.utility.b_max(),
    }
}

pub struct OracleOutcome {
    pub instances: usize,
    pub worst_gap: f64,
    pub failures: Vec<String>,
}

/// Random single-path instances: up to five built-in flows, capacity at
/// most 5 Mbps on the 0.01 grid, feasible floors.
pub fn greedy_vs_oracle(instances: usize, seed: u64) -> OracleOutcome {
    let profiles = builtin_profiles();
    let config = BasminConfig::default();
    let delta = config.delta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut worst_gap: f64 = 0.0;
    let mut failures = Vec::new();
    while done < instances {
        let capacity = rng.random_range(1..=500u32) as f64 / 100.0;
        let n = rng.random_range(1..=5usize);
        let items: Vec<BalanceItem> = (0..n)
            .map(|i| oracle_item(i as u64, &profiles[rng.random_range(0..profiles.len())]))
            .collect();
        if items.iter().map(|i| i.floor).sum::<f64>() > capacity + 1e-12 {
            continue;
        }
        done += 1;
        let alloc = load_balance(capacity, &items, &config).expect("feasible instance");
        let used: f64 = alloc.values().sum();
        let greedy: f64 = items.iter().map(|i| pl_worth(i, alloc[&i.id], delta)).sum();
        let optimum = dp_optimum(capacity, &items, delta).expect("feasible instance");
        let gap = (greedy - optimum).abs();
        worst_gap = worst_gap.max(gap);
        if gap > 1e-9 || used > capacity + 1e-9 {
            failures.push(format!(
                "capacity {capacity}, flows {:?}: greedy {greedy}, optimum {optimum}, used {used}",
                items
                    .iter()
                    .map(|i| (i.priority.level(), i.floor, i.cap))
                    .collect::<Vec<_>>()
            ));
        }
    }
    OracleOutcome {
        instances: done,
        worst_gap,
        failures,
    }
}

/// Largest relative error of the closed-form derivative against a central
/// difference, over `points` samples from each family. Points where the
/// exponent exceeds 10 are resampled: there `1 - U` is below the stencil's
/// rounding error.
pub fn derivative_errors(points: usize, seed: u64) -> Vec<(TrafficClass, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for class in TrafficClass::ALL {
        let mut worst: f64 = 0.0;
        let mut taken = 0;
        while taken < points {
            let (u, b, h) = match class {
                TrafficClass::Elastic => {
                    let k = rng.random_range(0.5..10.0);
                    let b_max = rng.random_range(0.01..10.0);
                    let scale = b_max * rng.random_range(0.5..2.0);
                    let u = UtilityFunction::elastic_with_scale(k, b_max, scale).unwrap();
                    let b = rng.random_range(0.0..1.5) * b_max;
                    if k * b / scale > 10.0 {
                        continue;
                    }
                    (u, b, 1e-4 * scale / k)
                }
                TrafficClass::RealTime => {
                    let (k1, k2) = (rng.random_range(0.1..5.0), rng.random_range(0.1..5.0));
                    let b_max = rng.random_range(0.5..10.0);
                    let u = UtilityFunction::real_time(k1, k2, 0.5 * b_max, b_max).unwrap();
                    let b = rng.random_range(0.01..1.5) * b_max;
                    if k1 * b * b / (k2 + b) > 10.0 {
                        continue;
                    }
                    (u, b, 1e-4 * b.min(1.0))
                }
                TrafficClass::HardRealTime => {
                    let b_max = rng.random_range(0.01..5.0);
                    let u = UtilityFunction::hard_real_time(b_max).unwrap();
                    // keep the stencil off the step
                    let b = if rng.random_bool(0.5) {
                        b_max * rng.random_range(0.0..0.99)
                    } else {
                        b_max * rng.random_range(1.01..3.0)
                    };
                    (u, b, 1e-6 * b_max)
                }
            };
            taken += 1;
            let lo = (b - h).max(0.0);
            let hi = lo + 2.0 * h;
            let fd = (utility(&u, hi) - utility(&u, lo)) / (hi - lo);
            let exact = u.derivative(lo + h).unwrap();
            let err = if exact == 0.0 {
                fd.abs()
            } else {
                ((fd - exact) / exact).abs()
            };
            worst = worst.max(err);
        }
        out.push((class, worst));
    }
    out
}

pub struct ConservationOutcome {
    pub events: u64,
    pub invalid: Vec<String>,
    pub completed: usize,
    pub worst_volume_error: f64,
    pub schedule_errors: Vec<String>,
}

/// Mixed workload on two 2 Mbps paths, long enough for at least 10,000
/// events.
pub fn mixed_config(kind: basmin::SchemeKind) -> basmin::ScenarioConfig {
    basmin::ScenarioConfig {
        paths: vec![2.0, 2.0],
        horizon_s: 80_000.0,
        warmup_s: 8_000.0,
        rate_multiplier: 2.5,
        scheme: kind,
        ..Default::default()
    }
}

/// Runs the scheme with validation, a from-scratch departure-time check
/// after every event, and volume conservation for completed sessions.
pub fn conservation_run(config: &basmin::ScenarioConfig) -> ConservationOutcome {
    use basmin::sim::{run_with_scheme, DepartureSchedule, EndReason, Event};
    use basmin::NetworkState;

    let mut scheme = basmin::scheme::build(config.scheme, &config.params);
    let policy = scheme.validation_policy();
    let mut invalid = Vec::new();
    let mut schedule_errors = Vec::new();
    let mut observer = |e: &Event, s: &NetworkState, sched: &DepartureSchedule| {
        if let Err(v) = s.validate(policy) {
            invalid.push(format!("t={} {:?}: {}", e.time, e.kind, v[0]));
        }
        for f in s.active_flows() {
            let expected =
                (f.allocation > 0.0).then(|| s.now() + f.remaining_volume / f.allocation);
            let got = sched.scheduled(f.id);
            let ok = match (expected, got) {
                (None, None) => true,
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                _ => false,
            };
            if !ok && schedule_errors.len() < 10 {
                schedule_errors.push(format!(
                    "t={} {}: expected {expected:?}, scheduled {got:?}",
                    e.time, f.id
                ));
            }
        }
    };
    let report = run_with_scheme(config, scheme.as_mut(), &mut observer).expect("run succeeds");
    let done: Vec<_> = report
        .sessions
        .iter()
        .filter(|s| s.end_reason == EndReason::Completed)
        .collect();
    let worst_volume_error = done
        .iter()
        .map(|s| ((s.transferred_mbit - s.volume_mbit) / s.volume_mbit).abs())
        .fold(0.0, f64::max);
    ConservationOutcome {
        events: report.events,
        invalid,
        completed: done.len(),
        worst_volume_error,
        schedule_errors,
    }
}

/// Sessions and sweep-row CSV bytes of one run.
pub fn run_csv(config: &basmin::ScenarioConfig) -> (Vec<u8>, Vec<u8>) {
    use basmin::output::{write_sessions_csv, write_sweep_csv};
    let report = basmin::run(config).expect("run succeeds");
    let row =
        basmin::SweepRow::from_report("arrival_rate_multiplier", config.rate_multiplier, &report);
    (
        write_sessions_csv(Vec::new(), &report.sessions).unwrap(),
        write_sweep_csv(Vec::new(), &[row]).unwrap(),
    )
}
