#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Worked examples for every operation, runnable as one catalogue.

use std::collections::BTreeMap;

use basmin::baselines::{
    best_effort_allocate, complete_partitioning_allocate, rt_utility_level,
    trunk_reservation_admits, Demand, RtAggregate,
};
use basmin::basmin::{
    admission_check, evaluate_path, handle_arrival, handle_departure, hypothetical_available,
    load_balance, select_path, Admission, BalanceItem, BasminConfig, PathCandidate,
};
use basmin::experiment::{run_sweep, summarize};
use basmin::network::Violation;
use basmin::output::{write_sessions_csv, write_summary_csv, write_sweep_csv};
use basmin::scenario::{ScenarioConfig, SweepParam, SweepSpec};
use basmin::sim::{average_connection_worth, sample_workload, EndReason, MetricsIntegrator};
use basmin::utility::{marginal_worth, worth};
use basmin::{
    builtin_profiles, run, ArrivalOutcome, BestEffort, CompletePartitioning, FlowId, FlowState,
    NetworkState, PartitionShares, PathId, PriorityLevel, Scheme, SchemeKind, TrafficProfile,
    TrunkReservationConfig, UtilityFunction, ValidationPolicy,
};

pub struct Example {
    pub name: &'static str,
    pub check: fn() -> Result<(), String>,
}

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(actual: f64, expected: f64, tol: f64) -> Outcome {
    ensure!(
        (actual - expected).abs() <= tol,
        "got {actual}, expected {expected} within {tol}"
    );
    Ok(())
}

fn profile(id: u32) -> TrafficProfile {
    builtin_profiles().into_iter().find(|p| p.id == id).unwrap()
}

fn custom(priority: u8, utility: UtilityFunction) -> TrafficProfile {
    TrafficProfile {
        id: 90,
        label: "custom".into(),
        priority: PriorityLevel::new(priority).unwrap(),
        volume_mbit: [1.0, 2.0],
        utility,
    }
}

fn state_with(caps: &[f64], flows: &[(&TrafficProfile, usize, f64)]) -> NetworkState {
    let mut s = NetworkState::new(caps).unwrap();
    for (p, path, b) in flows {
        let id = s.add_flow(p, 100.0);
        s.activate(id, PathId(*path), *b).unwrap();
    }
    s
}

fn item(id: u64, p: &TrafficProfile, floor: f64) -> BalanceItem {
    BalanceItem {
        id: FlowId(id),
        priority: p.priority,
        utility: p.utility,
        floor,
        cap: p.utility.b_max(),
    }
}

fn cfg() -> BasminConfig {
    BasminConfig::default()
}

fn demands(utilities: &[UtilityFunction]) -> Vec<Demand> {
    utilities
        .iter()
        .enumerate()
        .map(|(i, u)| Demand {
            id: FlowId(i as u64),
            utility: *u,
        })
        .collect()
}

fn elastic(k: f64, b_max: f64) -> UtilityFunction {
    UtilityFunction::elastic(k, b_max).unwrap()
}

fn hrt(b_max: f64) -> UtilityFunction {
    UtilityFunction::hard_real_time(b_max).unwrap()
}

fn rt() -> UtilityFunction {
    profile(3).utility
}

fn p(level: u8) -> PriorityLevel {
    PriorityLevel::new(level).unwrap()
}

fn only(profiles: Vec<TrafficProfile>, rates: Vec<f64>, horizon: f64) -> ScenarioConfig {
    ScenarioConfig {
        profiles,
        arrival_rates: rates,
        horizon_s: horizon,
        warmup_s: 0.0,
        ..Default::default()
    }
}

/// RT curve with `k1 = 2` and the allocation at which it reaches `level`.
fn steep_rt_at(level: f64) -> (UtilityFunction, f64) {
    let (k1, k2) = (2.0, 2.166);
    let g = -(1.0 - level).ln();
    let b = (g + (g * g + 4.0 * k1 * g * k2).sqrt()) / (2.0 * k1);
    (UtilityFunction::real_time(k1, k2, 1.0, 4.0).unwrap(), b)
}

// utility functions

fn elastic_at_cap() -> Outcome {
    close(elastic(4.6, 0.02).evaluate(0.02).unwrap(), 0.989948, 1e-6)
}

fn hrt_step() -> Outcome {
    ensure!(hrt(0.25).evaluate(0.25).unwrap() == 1.0, "at the step");
    ensure!(hrt(0.25).evaluate(0.249).unwrap() == 0.0, "below the step");
    Ok(())
}

fn rt_at_cap() -> Outcome {
    close(rt().evaluate(4.0).unwrap(), 0.93355, 1e-4)
}

fn utilities_at_zero() -> Outcome {
    for u in [elastic(4.6, 0.5), rt(), hrt(0.25)] {
        ensure!(u.evaluate(0.0).unwrap() == 0.0, "{u:?}");
    }
    Ok(())
}

fn elastic_slope_at_zero() -> Outcome {
    close(elastic(4.6, 0.5).derivative(0.0).unwrap(), 9.2, 1e-12)
}

fn rt_slope_at_one() -> Outcome {
    close(rt().derivative(1.0).unwrap(), 0.3996, 1e-3)
}

fn hrt_slope_flat() -> Outcome {
    ensure!(hrt(0.25).derivative(0.3).unwrap() == 0.0, "flat");
    Ok(())
}

fn worth_examples() -> Outcome {
    ensure!(worth(p(4), 1.0).unwrap() == 16.0, "max");
    ensure!(worth(p(1), 0.0).unwrap() == 0.0, "zero");
    close(worth(p(2), 0.93355).unwrap(), 3.7342, 4e-4)
}

fn marginal_worth_examples() -> Outcome {
    // 2^4 * 9.2
    close(
        marginal_worth(p(4), &elastic(4.6, 0.5), 0.0).unwrap(),
        147.2,
        1e-9,
    )?;
    ensure!(marginal_worth(p(2), &hrt(0.25), 0.1).unwrap() == 0.0, "hrt");
    close(marginal_worth(p(2), &rt(), 1.0).unwrap(), 1.5985, 4e-3)
}

// network state

fn consumed_examples() -> Outcome {
    let e = profile(6);
    let s = NetworkState::new(&[2.0]).unwrap();
    ensure!(s.consumed_bandwidth(PathId(0)).unwrap() == 0.0, "empty");
    let s = state_with(&[2.0], &[(&e, 0, 0.3), (&e, 0, 0.5)]);
    close(s.consumed_bandwidth(PathId(0)).unwrap(), 0.8, 1e-12)?;
    let s = state_with(
        &[2.0],
        &[(&profile(2), 0, 0.256), (&profile(3), 0, 1.0), (&e, 0, 0.5)],
    );
    close(s.consumed_bandwidth(PathId(0)).unwrap(), 1.756, 1e-12)
}

fn available_examples() -> Outcome {
    let e = profile(6);
    let s = NetworkState::new(&[2.0]).unwrap();
    ensure!(s.available_bandwidth(PathId(0)).unwrap() == 2.0, "empty");
    let s = state_with(
        &[2.0],
        &[(&profile(2), 0, 0.256), (&profile(3), 0, 1.0), (&e, 0, 0.5)],
    );
    close(s.available_bandwidth(PathId(0)).unwrap(), 0.244, 1e-12)?;
    let s = state_with(&[2.0], &[(&e, 0, 2.0)]);
    close(s.available_bandwidth(PathId(0)).unwrap(), 0.0, 1e-12)
}

fn path_worth_examples() -> Outcome {
    let s = NetworkState::new(&[2.0]).unwrap();
    ensure!(s.path_worth(PathId(0)).unwrap() == 0.0, "empty");
    let s = state_with(&[2.0], &[(&profile(2), 0, 0.256)]);
    close(s.path_worth(PathId(0)).unwrap(), 8.0, 1e-12)?;
    let voice = profile(1);
    let s = state_with(&[5.0], &[(&profile(3), 0, 4.0), (&voice, 0, 0.03)]);
    close(s.path_worth(PathId(0)).unwrap(), 7.7342, 4e-4)
}

fn validate_examples() -> Outcome {
    let s = state_with(&[2.0], &[(&profile(3), 0, 1.744), (&profile(2), 0, 0.256)]);
    ensure!(s.validate(ValidationPolicy::STRICT).is_ok(), "saturated");

    let s = state_with(&[2.0], &[(&profile(3), 0, 0.5)]);
    let v = s.validate(ValidationPolicy::STRICT).unwrap_err();
    ensure!(
        v.iter()
            .any(|v| matches!(v, Violation::BelowMinimum { flow, .. } if *flow == FlowId(0))),
        "{v:?}"
    );

    let e = profile(6);
    let s = state_with(&[2.0], &[(&e, 0, 1.5), (&e, 0, 0.6)]);
    let v = s.validate(ValidationPolicy::STRICT).unwrap_err();
    ensure!(
        v.iter()
            .any(|v| matches!(v, Violation::CapacityExceeded { path, .. } if *path == PathId(0))),
        "{v:?}"
    );
    Ok(())
}

// BASMIN

fn balance_single_rt() -> Outcome {
    let out =
        load_balance(10.0, &[item(0, &profile(3), 1.0)], &cfg()).map_err(|e| e.to_string())?;
    close(out[&FlowId(0)], 4.0, 1e-9)
}

fn balance_symmetric_elastic() -> Outcome {
    let u = custom(4, elastic(4.6, 0.5));
    let out = load_balance(0.6, &[item(0, &u, 0.0), item(1, &u, 0.0)], &cfg())
        .map_err(|e| e.to_string())?;
    let (a, b) = (out[&FlowId(0)], out[&FlowId(1)]);
    close(a, 0.30, 1e-9)?;
    close(b, 0.30, 1e-9)?;
    ensure!((a - b).abs() <= 0.01, "asymmetric");
    let items = [item(0, &u, 0.0), item(1, &u, 0.0)];
    let greedy: f64 = items
        .iter()
        .map(|i| super::pl_worth(i, out[&i.id], 0.01))
        .sum();
    close(greedy, super::dp_optimum(0.6, &items, 0.01).unwrap(), 1e-9)
}

fn balance_hrt_then_elastic() -> Outcome {
    let items = [item(0, &profile(2), 0.256), item(1, &profile(5), 0.0)];
    let out = load_balance(1.0, &items, &cfg()).map_err(|e| e.to_string())?;
    ensure!(out[&FlowId(0)] == 0.256, "hrt");
    // b_max of profile 5 is 0.512
    close(out[&FlowId(1)], 0.512, 1e-9)?;
    let greedy: f64 = items
        .iter()
        .map(|i| super::pl_worth(i, out[&i.id], 0.01))
        .sum();
    close(greedy, super::dp_optimum(1.0, &items, 0.01).unwrap(), 1e-9)
}

fn hypothetical_examples() -> Outcome {
    let (p3, p6) = (profile(3), profile(6));
    let mut s = state_with(&[2.0], &[(&p6, 0, 2.0)]);
    let new = s.add_flow(&p3, 10.0);
    close(
        hypothetical_available(&s, PathId(0), new, 0.01).unwrap(),
        2.0,
        1e-12,
    )?;

    let (hi_rt, hi_el) = (custom(2, p3.utility), custom(2, p6.utility));
    let mut s = state_with(&[2.0], &[(&hi_rt, 0, 1.5), (&hi_el, 0, 0.5)]);
    let new = s.add_flow(&p3, 10.0);
    close(
        hypothetical_available(&s, PathId(0), new, 0.01).unwrap(),
        0.99,
        1e-12,
    )?;

    let mut s = state_with(&[2.0], &[(&profile(2), 0, 0.256)]);
    let new = s.add_flow(&p3, 10.0);
    close(
        hypothetical_available(&s, PathId(0), new, 0.01).unwrap(),
        1.744,
        1e-12,
    )
}

fn admission_examples() -> Outcome {
    let (p2, p3, p6) = (profile(2), profile(3), profile(6));
    let mut s = state_with(&[2.0], &[(&p3, 0, 1.7)]);
    let new = s.add_flow(&p2, 100.0);
    ensure!(
        admission_check(&s, new, &cfg()).unwrap() == Admission::Admit,
        "direct fit"
    );

    let heavy = custom(4, hrt(1.9));
    let mut s = state_with(&[2.0], &[(&heavy, 0, 1.9)]);
    let new = s.add_flow(&p3, 100.0);
    ensure!(
        admission_check(&s, new, &cfg()).unwrap() == Admission::Reject,
        "no room"
    );

    let rt_i3 = custom(3, p3.utility);
    let mut s = state_with(&[2.0], &[(&p6, 0, 1.0), (&p6, 0, 1.0)]);
    let new = s.add_flow(&rt_i3, 100.0);
    ensure!(
        admission_check(&s, new, &cfg()).unwrap() == Admission::AdmitWithPreemption,
        "preemption branch"
    );
    Ok(())
}

fn evaluate_empty_path() -> Outcome {
    let mut s = NetworkState::new(&[2.0]).unwrap();
    let new = s.add_flow(&profile(3), 100.0);
    let c = evaluate_path(&s, PathId(0), new, &cfg()).map_err(|e| e.to_string())?;
    ensure!(c.feasible, "feasible");
    close(c.proposed_allocations[&new], 2.0, 1e-9)?;
    // 4 * (1 - exp(-1.045 * 4 / 4.166)) evaluates to 2.533419
    close(
        c.worth_increment,
        4.0 * (1.0 - (-1.045f64 * 4.0 / 4.166).exp()),
        1e-9,
    )?;
    close(c.worth_increment, 2.533419, 1e-5)
}

fn evaluate_saturated_path() -> Outcome {
    let h = custom(3, hrt(1.0));
    let mut s = state_with(&[2.0], &[(&h, 0, 1.0), (&h, 0, 1.0)]);
    let new = s.add_flow(&profile(3), 100.0);
    let c = evaluate_path(&s, PathId(0), new, &cfg()).map_err(|e| e.to_string())?;
    ensure!(!c.feasible, "should be infeasible");
    Ok(())
}

fn evaluate_empty_beats_busy() -> Outcome {
    let (p5, p6) = (profile(5), profile(6));
    let mut s = state_with(&[2.0, 2.0], &[(&p6, 1, 1.0), (&p5, 1, 0.512)]);
    basmin::basmin::rebalance_path(&mut s, PathId(1), &cfg()).map_err(|e| e.to_string())?;
    let new = s.add_flow(&p6, 100.0);
    let empty = evaluate_path(&s, PathId(0), new, &cfg()).map_err(|e| e.to_string())?;
    let busy = evaluate_path(&s, PathId(1), new, &cfg()).map_err(|e| e.to_string())?;
    ensure!(
        empty.worth_increment >= busy.worth_increment,
        "{} < {}",
        empty.worth_increment,
        busy.worth_increment
    );
    // the empty path's increment is the single-flow DP optimum
    let lone = [item(new.0, &p6, 0.0)];
    close(
        empty.worth_increment,
        super::dp_optimum(2.0, &lone, 0.01).unwrap(),
        1e-9,
    )
}

fn candidate(path: usize, dw: f64) -> PathCandidate {
    PathCandidate {
        path: PathId(path),
        feasible: true,
        proposed_allocations: BTreeMap::new(),
        preempted: vec![],
        worth_increment: dw,
    }
}

fn select_examples() -> Outcome {
    ensure!(
        select_path(&[candidate(0, 1.0)]) == Some(PathId(0)),
        "single"
    );
    ensure!(
        select_path(&[candidate(0, 3.0), candidate(1, 5.0)]) == Some(PathId(1)),
        "argmax"
    );
    ensure!(
        select_path(&[candidate(0, 5.0), candidate(1, 5.0)]) == Some(PathId(0)),
        "tie"
    );
    Ok(())
}

fn arrival_into_empty_network() -> Outcome {
    let mut s = NetworkState::new(&[2.0]).unwrap();
    let new = s.add_flow(&profile(5), 10.0);
    let rec = handle_arrival(&mut s, new, &cfg()).map_err(|e| e.to_string())?;
    ensure!(
        rec.outcome
            == ArrivalOutcome::Admitted {
                path: PathId(0),
                preempted: vec![]
            },
        "{:?}",
        rec.outcome
    );
    close(s.flow(new).unwrap().allocation, 0.512f64.min(2.0), 1e-12)
}

fn high_priority_elastic_degrades() -> Outcome {
    let (p5, p6) = (profile(5), profile(6));
    let mut s = NetworkState::new(&[2.0]).unwrap();
    for _ in 0..4 {
        let id = s.add_flow(&p6, 100.0);
        handle_arrival(&mut s, id, &cfg()).map_err(|e| e.to_string())?;
    }
    let before: Vec<(FlowId, f64)> = s
        .active_on(PathId(0))
        .unwrap()
        .map(|f| (f.id, f.allocation))
        .collect();
    let new = s.add_flow(&p5, 10.0);
    let rec = handle_arrival(&mut s, new, &cfg()).map_err(|e| e.to_string())?;
    ensure!(
        matches!(&rec.outcome, ArrivalOutcome::Admitted { preempted, .. } if preempted.is_empty()),
        "{:?}",
        rec.outcome
    );
    for (id, b) in before {
        let f = s.flow(id).unwrap();
        ensure!(
            f.state == FlowState::Active && f.allocation < b,
            "{id} not degraded"
        );
    }
    ensure!(s.validate(ValidationPolicy::STRICT).is_ok(), "invalid");
    Ok(())
}

fn hrt_fits_nowhere() -> Outcome {
    let heavy = custom(4, hrt(1.9));
    let mut s = NetworkState::new(&[2.0]).unwrap();
    let id = s.add_flow(&heavy, 10.0);
    handle_arrival(&mut s, id, &cfg()).map_err(|e| e.to_string())?;
    let snapshot: Vec<f64> = s.flows().iter().map(|f| f.allocation).collect();
    let new = s.add_flow(&profile(2), 10.0);
    let rec = handle_arrival(&mut s, new, &cfg()).map_err(|e| e.to_string())?;
    ensure!(rec.outcome == ArrivalOutcome::Rejected, "admitted");
    let after: Vec<f64> = s
        .flows()
        .iter()
        .take(snapshot.len())
        .map(|f| f.allocation)
        .collect();
    ensure!(snapshot == after, "state changed");
    Ok(())
}

fn departure_examples() -> Outcome {
    let e = profile(6);
    let mut s = state_with(&[1.0, 1.0], &[(&e, 0, 0.5), (&e, 0, 0.5), (&e, 1, 1.0)]);
    let (gone, survivor, elsewhere) = (FlowId(0), FlowId(1), FlowId(2));
    handle_departure(&mut s, gone, &cfg()).map_err(|e| e.to_string())?;
    let after = s.flow(survivor).unwrap().allocation;
    ensure!(after > 0.5, "0.5 -> {after}");
    let expected =
        load_balance(1.0, &[item(survivor.0, &e, 0.01)], &cfg()).map_err(|e| e.to_string())?;
    close(after, expected[&survivor], 1e-12)?;
    let lone = [item(survivor.0, &e, 0.0)];
    close(
        super::pl_worth(&lone[0], after, 0.01),
        super::dp_optimum(1.0, &lone, 0.01).unwrap(),
        1e-9,
    )?;
    ensure!(
        s.flow(elsewhere).unwrap().allocation == 1.0,
        "other path moved"
    );
    handle_departure(&mut s, survivor, &cfg()).map_err(|e| e.to_string())?;
    ensure!(s.active_ids(PathId(0)).unwrap().is_empty(), "not empty");
    ensure!(
        s.available_bandwidth(PathId(0)).unwrap() == 1.0,
        "capacity not restored"
    );
    Ok(())
}

// baselines

fn best_effort_examples() -> Outcome {
    let out = best_effort_allocate(2.0, &demands(&[elastic(1.0, 5.0); 3]));
    for b in out.values() {
        close(*b, 2.0 / 3.0, 1e-4)?;
    }
    let out = best_effort_allocate(2.0, &demands(&[hrt(0.03), hrt(0.256), elastic(1.0, 5.0)]));
    close(out[&FlowId(0)], 0.03, 1e-9)?;
    close(out[&FlowId(1)], 0.256, 1e-9)?;
    close(out[&FlowId(2)], 1.714, 1e-9)?;
    let out = best_effort_allocate(2.0, &demands(&[elastic(1.0, 0.5)]));
    close(out[&FlowId(0)], 0.5, 1e-12)
}

fn partitioning_examples() -> Outcome {
    let shares = PartitionShares::default();
    let out = complete_partitioning_allocate(10.0, &demands(&[hrt(0.256); 2]), &shares);
    for b in out.values() {
        close(*b, 0.256, 1e-9)?;
    }
    let five = demands(&[hrt(0.256); 5]);
    let out = complete_partitioning_allocate(10.0, &five, &shares);
    for (d, b) in five.iter().zip(out.values()) {
        close(*b, 0.2, 1e-9)?;
        ensure!(d.utility.evaluate(*b).unwrap() == 0.0, "utility");
    }
    let out = complete_partitioning_allocate(10.0, &demands(&[elastic(1.0, 5.0)]), &shares);
    close(out[&FlowId(0)], 5.0, 1e-12)
}

fn trunk_threshold(level: f64) -> Result<bool, String> {
    let (curve, b) = steep_rt_at(level);
    let mut s = state_with(&[10.0], &[(&custom(2, curve), 0, b)]);
    let mean = rt_utility_level(&s, PathId(0), RtAggregate::Mean)
        .unwrap()
        .unwrap();
    close(mean, level, 1e-9)?;
    let new = s.add_flow(&profile(6), 10.0);
    let config = TrunkReservationConfig {
        eta: 0.9,
        aggregate: RtAggregate::Mean,
    };
    Ok(trunk_reservation_admits(&s, PathId(0), new, &config).unwrap())
}

fn trunk_examples() -> Outcome {
    ensure!(trunk_threshold(0.95)?, "0.95 should admit");
    ensure!(!trunk_threshold(0.5)?, "0.5 should reject");
    let mut s = state_with(&[2.0], &[(&profile(2), 0, 0.256)]);
    let new = s.add_flow(&profile(6), 10.0);
    ensure!(
        trunk_reservation_admits(&s, PathId(0), new, &TrunkReservationConfig::default()).unwrap(),
        "vacuous"
    );
    Ok(())
}

fn scheme_interface_examples() -> Outcome {
    // BASMIN through the trait matches the module functions
    let flows = [5u32, 6, 3, 6, 1];
    let mut direct = NetworkState::new(&[2.0]).unwrap();
    let mut boxed = NetworkState::new(&[2.0]).unwrap();
    let mut scheme = basmin::Basmin::new(cfg());
    for id in flows {
        let a = direct.add_flow(&profile(id), 50.0);
        handle_arrival(&mut direct, a, &cfg()).map_err(|e| e.to_string())?;
        let b = boxed.add_flow(&profile(id), 50.0);
        scheme
            .on_arrival(&mut boxed, b)
            .map_err(|e| e.to_string())?;
    }
    let bits = |s: &NetworkState| {
        s.flows()
            .iter()
            .map(|f| (f.state, f.allocation.to_bits()))
            .collect::<Vec<_>>()
    };
    ensure!(bits(&direct) == bits(&boxed), "adapter differs");

    let mut s = NetworkState::new(&[2.0]).unwrap();
    let mut be = BestEffort;
    let ids: Vec<FlowId> = (0..3)
        .map(|_| {
            let id = s.add_flow(&profile(6), 50.0);
            be.on_arrival(&mut s, id).unwrap();
            id
        })
        .collect();
    be.on_departure(&mut s, ids[0]).map_err(|e| e.to_string())?;
    for id in &ids[1..] {
        close(s.flow(*id).unwrap().allocation, 1.0, 1e-12)?;
    }

    let mut s = NetworkState::new(&[0.1]).unwrap();
    let mut cp = CompletePartitioning::new(PartitionShares::default());
    for id in [3u32, 3, 3, 2, 2, 1, 6] {
        let f = s.add_flow(&profile(id), 50.0);
        ensure!(cp.on_arrival(&mut s, f).unwrap().is_admitted(), "rejected");
    }
    Ok(())
}

// simulator

fn workload_examples() -> Outcome {
    let c = ScenarioConfig {
        arrival_rates: vec![0.0; 6],
        ..Default::default()
    };
    ensure!(sample_workload(&c).is_empty(), "not empty");
    let c = ScenarioConfig::default();
    ensure!(sample_workload(&c) == sample_workload(&c), "not repeatable");
    let voice: Vec<f64> = sample_workload(&c)
        .into_iter()
        .filter(|a| c.profiles[a.profile].id == 1)
        .map(|a| a.volume_mbit)
        .collect();
    ensure!(!voice.is_empty(), "no voice flows");
    ensure!(
        voice.iter().all(|v| (8.0..=48.0).contains(v)),
        "out of range"
    );
    Ok(())
}

fn lone_voice_flow() -> Outcome {
    let mut voice = profile(1);
    voice.volume_mbit = [24.0, 24.0];
    let c = only(vec![voice], vec![1e-4], 50_000.0);
    let r = run(&c).map_err(|e| e.to_string())?;
    let done: Vec<_> = r
        .sessions
        .iter()
        .filter(|s| s.end_reason == EndReason::Completed)
        .collect();
    ensure!(!done.is_empty(), "no completions");
    for s in done {
        close(s.end_s - s.arrival_s, 800.0, 1e-6)?;
    }
    Ok(())
}

fn zero_workload_run() -> Outcome {
    let c = ScenarioConfig {
        arrival_rates: vec![0.0; 6],
        horizon_s: 100.0,
        warmup_s: 0.0,
        ..Default::default()
    };
    let r = run(&c).map_err(|e| e.to_string())?;
    ensure!(
        r.time_avg_total_worth == 0.0 && r.mean_link_utilization == 0.0,
        "nonzero"
    );
    Ok(())
}

fn identical_runs() -> Outcome {
    let c = ScenarioConfig {
        horizon_s: 2000.0,
        warmup_s: 200.0,
        ..Default::default()
    };
    ensure!(run(&c).unwrap() == run(&c).unwrap(), "reports differ");
    Ok(())
}

fn connection_worth_examples() -> Outcome {
    close(
        average_connection_worth(8.0 * 10.0 + 4.0 * 10.0, 20.0),
        6.0,
        1e-12,
    )?;
    close(average_connection_worth(16.0 * 37.5, 37.5), 16.0, 1e-12)?;
    let c = only(vec![profile(2)], vec![1e-3], 20_000.0);
    let r = run(&c).map_err(|e| e.to_string())?;
    let held: Vec<_> = r
        .sessions
        .iter()
        .filter(|s| s.end_reason == EndReason::Completed)
        .collect();
    ensure!(!held.is_empty(), "no completions");
    for s in held {
        close(s.avg_connection_worth(), 8.0, 1e-9)?;
    }
    Ok(())
}

fn metric_examples() -> Outcome {
    let mut m = MetricsIntegrator::new(0.0, 10.0);
    m.advance(0.0, 0.0, 0.0);
    m.advance(10.0, 7.0, 0.25);
    close(m.time_avg_total_worth(), 7.0, 1e-12)?;
    close(m.mean_utilization(), 0.25, 1e-12)?;
    let mut m = MetricsIntegrator::new(0.0, 10.0);
    m.advance(10.0, 1.0, 1.0);
    close(m.mean_utilization(), 1.0, 1e-12)?;
    let mut m = MetricsIntegrator::new(0.0, 10.0);
    m.advance(5.0, 0.0, 0.0);
    m.advance(10.0, 10.0, 0.0);
    close(m.time_avg_total_worth(), 5.0, 1e-12)
}

// experiments and files

fn profile_examples() -> Outcome {
    ensure!(profile(3).priority.level() == 2, "profile 3");
    ensure!(profile(5).priority.level() == 4, "profile 5");
    ensure!(profile(2).volume_mbit == [160.0, 560.0], "profile 2");
    Ok(())
}

fn scenario_examples() -> Outcome {
    let c = ScenarioConfig::from_toml("capacity = 2.0\nseed = 3\n").map_err(|e| e.to_string())?;
    let d = ScenarioConfig {
        seed: 3,
        ..Default::default()
    };
    ensure!(c == d, "defaults differ");

    let err = ScenarioConfig::from_toml(
        "capacity = 2.0\n[scheme.shares]\nhrt = 0.2\nrt = 0.2\nelastic = 0.2\n",
    )
    .unwrap_err()
    .to_string();
    ensure!(err.contains("shares must sum to 1"), "{err}");

    let c = ScenarioConfig::from_toml("capacity = 2.0\n[scheme]\ndelta = 0.05\neta = 0.8\n")
        .map_err(|e| e.to_string())?;
    let echoed = c.to_toml();
    ensure!(
        echoed.contains("delta = 0.05") && echoed.contains("eta = 0.8"),
        "{echoed}"
    );
    Ok(())
}

fn tiny_sweep(values: Vec<f64>, schemes: Vec<SchemeKind>, replications: u32) -> SweepSpec {
    SweepSpec {
        name: "tiny".into(),
        param: SweepParam::ArrivalRateMultiplier,
        values,
        replications,
        schemes,
        base: ScenarioConfig {
            horizon_s: 500.0,
            warmup_s: 50.0,
            ..Default::default()
        },
    }
}

fn sweep_examples() -> Outcome {
    let rows = run_sweep(&tiny_sweep(vec![1.0], vec![SchemeKind::Basmin], 1))
        .map_err(|e| e.to_string())?;
    ensure!(rows.len() == 1, "{} rows", rows.len());
    let spec = tiny_sweep(vec![1.0, 1.5, 2.0, 2.5, 3.0], SchemeKind::ALL.to_vec(), 3);
    let rows = run_sweep(&spec).map_err(|e| e.to_string())?;
    ensure!(rows.len() == 60, "{} rows", rows.len());
    let a = write_sweep_csv(Vec::new(), &rows).unwrap();
    let b = write_sweep_csv(Vec::new(), &run_sweep(&spec).unwrap()).unwrap();
    ensure!(a == b, "sweep bytes differ");
    let s1 = write_summary_csv(Vec::new(), &summarize(&rows)).unwrap();
    ensure!(!s1.is_empty(), "summary");
    Ok(())
}

fn csv_examples() -> Outcome {
    let sessions = String::from_utf8(write_sessions_csv(Vec::new(), &[]).unwrap()).unwrap();
    ensure!(sessions.lines().count() == 1, "{sessions}");
    let sweep = String::from_utf8(write_sweep_csv(Vec::new(), &[]).unwrap()).unwrap();
    ensure!(sweep.lines().count() == 1, "{sweep}");

    let mut voice = profile(1);
    voice.volume_mbit = [24.0, 24.0];
    let c = only(vec![voice], vec![1e-3], 10_000.0);
    let r = run(&c).map_err(|e| e.to_string())?;
    let one: Vec<_> = r
        .sessions
        .iter()
        .filter(|s| s.end_reason == EndReason::Completed)
        .take(1)
        .cloned()
        .collect();
    ensure!(one.len() == 1, "no completed session");
    let text = String::from_utf8(write_sessions_csv(Vec::new(), &one).unwrap()).unwrap();
    ensure!(text.lines().count() == 2, "{text}");

    for s in &r.sessions {
        if s.duration() > 0.0 {
            close(
                s.avg_connection_worth(),
                s.worth_integral / s.duration(),
                1e-9,
            )?;
        }
    }
    Ok(())
}

pub fn all() -> Vec<Example> {
    macro_rules! ex {
        ($($f:ident),* $(,)?) => {
            vec![$(Example { name: stringify!($f), check: $f }),*]
        };
    }
    ex![
        elastic_at_cap,
        hrt_step,
        rt_at_cap,
        utilities_at_zero,
        elastic_slope_at_zero,
        rt_slope_at_one,
        hrt_slope_flat,
        worth_examples,
        marginal_worth_examples,
        consumed_examples,
        available_examples,
        path_worth_examples,
        validate_examples,
        balance_single_rt,
        balance_symmetric_elastic,
        balance_hrt_then_elastic,
        hypothetical_examples,
        admission_examples,
        evaluate_empty_path,
        evaluate_saturated_path,
        evaluate_empty_beats_busy,
        select_examples,
        arrival_into_empty_network,
        high_priority_elastic_degrades,
        hrt_fits_nowhere,
        departure_examples,
        best_effort_examples,
        partitioning_examples,
        trunk_examples,
        scheme_interface_examples,
        workload_examples,
        lone_voice_flow,
        zero_workload_run,
        identical_runs,
        connection_worth_examples,
        metric_examples,
        profile_examples,
        scenario_examples,
        sweep_examples,
        csv_examples,
    ]
}
