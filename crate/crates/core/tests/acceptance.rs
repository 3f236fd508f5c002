//! Acceptance suite. Every check prints one PASS/FAIL line; the process exits
//! nonzero if any check fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tclsim_core::engine::{ParamDist, PriceSignal, SubgroupSpec};
use tclsim_core::metrics::{MetricsConfig, MetricsReport};
use tclsim_core::output::write_trace_csv;
use tclsim_core::{
    build_demand_curve, clear, make_bid, run, scenarios, Bid, Scenario, TclParams, Trace,
};

/// Relative tolerance of the natural duty-cycle baseline.
const BASELINE_REL_TOL: f64 = 0.03;
/// Demand counts as pinned at or above this fraction of the feeder limit.
const PINNED_FRACTION: f64 = 0.95;
/// Share of the 20 $/MWh hold that must be pinned, and priced above base.
const PINNED_SHARE: f64 = 0.80;
/// Coherence threshold for the high-price hold and for each subgroup.
const SYNC_HIGH: f64 = 0.9;
/// Whole-population coherence must stay below this while subgroups are coherent.
const SYNC_LOW: f64 = 0.6;
/// Intervals (5 min each) that count as a sustained stretch: one hour.
const SUSTAINED_INTERVALS: usize = 12;
/// Peak-to-peak within a 2 h window, as a fraction of the feeder limit.
const OSCILLATION_FRACTION: f64 = 0.5;
/// Interval-to-interval swing counted as large, as a fraction of capacity.
const LARGE_SWING: f64 = 0.30;
/// Share of intervals that must carry a large swing under fluctuating prices.
const LARGE_SWING_SHARE: f64 = 0.10;
/// Largest swing tolerated under a constant price once settled.
const SETTLED_SWING: f64 = 0.10;
/// Settling time for the constant-price comparison, minutes.
const SETTLE_MIN: f64 = 360.0;
/// Slope changes smaller than this fraction of capacity are treated as flat.
const SLOPE_DEADZONE: f64 = 0.01;
/// Minimum slope sign changes inside each low-price phase.
const CASCADE_SIGN_CHANGES: usize = 3;
/// Windows with a smaller peak-to-peak (fraction of the limit) carry no period.
const SPECTRUM_MIN_SWING: f64 = 0.1;
const RANDOM_SCENARIOS: usize = 100;
const RANDOM_BID_SETS: usize = 10_000;
const RANDOM_BID_EVALS: usize = 10_000;

fn report(label: &str, pass: bool, detail: String) {
    println!("{} {label}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn run_ok(s: &Scenario) -> Trace {
    run(s).unwrap_or_else(|e| panic!("{}: {e}", s.name))
}

fn metrics(trace: &Trace) -> MetricsReport {
    MetricsReport::compute(trace, &MetricsConfig::default())
}

/// Intervals whose start lies in `[from, to)` minutes.
fn phase(trace: &Trace, from: f64, to: f64) -> Vec<usize> {
    trace
        .intervals
        .iter()
        .filter(|r| r.start_min >= from && r.start_min < to)
        .map(|r| r.index)
        .collect()
}

fn random_scenario(rng: &mut ChaCha8Rng, k: usize) -> Scenario {
    let mut s = Scenario {
        name: format!("random-{k}"),
        seed: rng.random(),
        ..Scenario::default()
    };
    s.step_s = [5.0, 10.0, 15.0, 20.0, 30.0][rng.random_range(0..5)];
    s.horizon_min = 5.0 * rng.random_range(6..=72) as f64;
    s.lookahead_s = s.step_s * rng.random_range(0..=(300.0 / s.step_s) as usize) as f64;
    s.price_tick = [0.01, 0.1, 1.0][rng.random_range(0..3)];

    let p = &mut s.population;
    p.count = rng.random_range(1..=200);
    p.ambient = rng.random_range(24.0..42.0);
    p.capacitance = ParamDist::relative(rng.random_range(2.0..20.0), rng.random_range(0.0..0.3));
    p.resistance = ParamDist::relative(rng.random_range(1.0..3.0), rng.random_range(0.0..0.2));
    p.power = ParamDist::relative(rng.random_range(5.0..20.0), rng.random_range(0.0..0.2));
    p.setpoint = ParamDist::absolute(rng.random_range(18.0..23.0), rng.random_range(0.0..1.0));
    p.deadband = ParamDist::relative(rng.random_range(0.2..1.0), rng.random_range(0.0..0.5));
    p.noise_std = if rng.random_bool(0.5) {
        rng.random_range(0.0..0.02)
    } else {
        0.0
    };
    p.bids.gamma1 = ParamDist::relative(rng.random_range(10.0..150.0), rng.random_range(0.0..0.5));
    p.bids.gamma2 = ParamDist::relative(rng.random_range(10.0..150.0), rng.random_range(0.0..0.5));
    p.bids.p0 = ParamDist::absolute(rng.random_range(10.0..50.0), rng.random_range(0.0..10.0));
    if rng.random_bool(0.3) {
        p.subgroups = (0..rng.random_range(1..=5))
            .map(|_| SubgroupSpec {
                weight: rng.random_range(0.5..2.0),
                p0: rng.random_range(10.0..50.0),
                gamma1: rng.random_range(10.0..150.0),
                gamma2: rng.random_range(10.0..150.0),
                spread: rng.random_range(0.0..0.1),
                ..SubgroupSpec::default()
            })
            .collect();
    }

    if rng.random_bool(0.5) {
        s.feeder.fraction = rng.random_range(0.05..1.0);
    } else {
        s.feeder.limit_kw = Some(rng.random_range(1.0..1500.0));
    }

    let intervals = s.intervals();
    s.price = match rng.random_range(0..3) {
        0 => PriceSignal::Constant {
            price: rng.random_range(0.0..60.0),
        },
        1 => PriceSignal::Square {
            low: rng.random_range(0.0..25.0),
            high: rng.random_range(25.0..60.0),
            period_min: 10.0 * rng.random_range(1..=30) as f64,
            start_high: rng.random(),
        },
        _ => PriceSignal::Series {
            prices: (0..intervals)
                .map(|_| rng.random_range(0.0..60.0))
                .collect(),
            repeat: false,
        },
    };
    s
}

fn feeder_limit_is_never_exceeded() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    let mut cases = scenarios::all();
    cases.extend((0..RANDOM_SCENARIOS).map(|k| random_scenario(&mut rng, k)));

    let mut checked = 0usize;
    let mut constrained = 0usize;
    let mut failures = Vec::new();
    for s in &cases {
        let t = run_ok(s);
        for r in &t.intervals {
            checked += 1;
            constrained += r.constrained as usize;
            if !(r.cleared_demand <= t.feeder_limit && r.avg_demand <= t.feeder_limit) {
                failures.push(format!(
                    "{} interval {}: cleared {} realized {} limit {}",
                    s.name, r.index, r.cleared_demand, r.avg_demand, t.feeder_limit
                ));
            }
        }
    }
    let pass = failures.is_empty();
    report(
        "feeder limit invariant",
        pass,
        format!(
            "{} scenarios, {checked} intervals ({constrained} constrained), {} violations",
            cases.len(),
            failures.len()
        ),
    );
    if !pass {
        println!("    {:#?}", &failures[..failures.len().min(5)]);
    }
    pass
}

/// Enumerates every candidate price at or above base and keeps the lowest
/// feasible one.
fn brute_force_clear(bids: &[Bid], base: f64, limit: f64, tick: f64) -> (f64, f64) {
    let demand = |p: f64| {
        bids.iter()
            .filter(|b| b.price >= p)
            .map(|b| b.quantity)
            .sum::<f64>()
    };
    let mut candidates: Vec<f64> = bids
        .iter()
        .map(|b| b.price)
        .chain([base])
        .filter(|&p| p >= base)
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for p in candidates {
        let d = demand(p);
        if d <= limit {
            return (p, d);
        }
    }
    let top = bids
        .iter()
        .map(|b| b.price)
        .fold(f64::NEG_INFINITY, f64::max);
    (top + tick, 0.0)
}

fn clearing_matches_brute_force_oracle() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1ea);
    let mut mismatches = Vec::new();
    let mut constrained = 0usize;
    let mut priced_out = 0usize;
    for case in 0..RANDOM_BID_SETS {
        let n = rng.random_range(0..=12);
        let coarse = rng.random_bool(0.5);
        let bids: Vec<Bid> = (0..n)
            .map(|i| Bid {
                tcl_id: i,
                // Coarse prices force ties.
                price: if coarse {
                    rng.random_range(0..=10) as f64 * 5.0
                } else {
                    rng.random_range(0.0..50.0)
                },
                quantity: rng.random_range(1..=40) as f64 * 0.25,
            })
            .collect();
        let total: f64 = bids.iter().map(|b| b.quantity).sum();
        let limit = rng.random_range(1..=((total * 4.0) as u32 + 8)) as f64 * 0.25;
        let base = if coarse && rng.random_bool(0.5) {
            rng.random_range(0..=10) as f64 * 5.0
        } else {
            rng.random_range(0.0..55.0)
        };

        let curve = build_demand_curve(&bids).unwrap();
        let got = clear(&curve, base, limit).unwrap();
        let want = brute_force_clear(&bids, base, limit, tclsim_core::market::DEFAULT_PRICE_TICK);
        constrained += got.constrained as usize;
        priced_out += (got.constrained && got.cleared_demand == 0.0) as usize;
        if (got.clearing_price, got.cleared_demand) != want {
            mismatches.push(format!(
                "case {case}: got ({}, {}) want {want:?} base {base} limit {limit} bids {bids:?}",
                got.clearing_price, got.cleared_demand
            ));
        }
    }
    let pass = mismatches.is_empty();
    report(
        "clearing oracle",
        pass,
        format!(
            "{RANDOM_BID_SETS} bid sets ({constrained} constrained, {priced_out} priced out), {} mismatches",
            mismatches.len()
        ),
    );
    if !pass {
        println!("    {:#?}", &mismatches[..mismatches.len().min(5)]);
    }
    pass
}

fn unconstrained_demand_matches_natural_duty_cycle() -> bool {
    let mut s = Scenario {
        name: "baseline".into(),
        price: PriceSignal::Constant { price: 0.0 },
        ..Scenario::default()
    };
    s.feeder.limit_kw = Some(1.0e9);
    s.population.noise_std = 0.0;
    let t = run_ok(&s);

    let predicted: f64 = t
        .params
        .iter()
        .map(|p| p.electrical_power() * p.natural_duty(t.theta_ambient))
        .sum();
    let tail = phase(&t, s.horizon_min - 720.0, s.horizon_min);
    let observed = tail.iter().map(|&i| t.intervals[i].avg_demand).sum::<f64>() / tail.len() as f64;
    let rel = (observed - predicted).abs() / predicted;
    let pass = rel <= BASELINE_REL_TOL;
    report(
        "natural duty-cycle baseline",
        pass,
        format!(
            "observed {observed:.1} kW vs predicted {predicted:.1} kW over the final 12 h, error {:.2}% (tol {:.0}%)",
            rel * 100.0,
            BASELINE_REL_TOL * 100.0
        ),
    );
    pass
}

/// Largest peak-to-peak over 2 h windows lying entirely in `[from, to)`.
fn max_window_swing(report: &MetricsReport, from: f64, to: f64) -> f64 {
    report
        .windows
        .iter()
        .filter(|w| w.start_min >= from && w.end_min <= to)
        .map(|w| w.peak_to_peak)
        .fold(0.0, f64::max)
}

fn low_price_swing(name: &str, s: &Scenario) -> bool {
    let t = run_ok(s);
    let m = metrics(&t);
    let swing = max_window_swing(&m, 720.0, s.horizon_min);
    let pass = swing > OSCILLATION_FRACTION * t.feeder_limit;
    report(
        name,
        pass,
        format!(
            "max 2 h peak-to-peak after the drop to 9 $/MWh {swing:.0} kW vs threshold {:.0} kW",
            OSCILLATION_FRACTION * t.feeder_limit
        ),
    );
    pass
}

fn step_schedule_synchronizes_pins_and_oscillates() -> bool {
    let s = scenarios::step_price();
    let t = run_ok(&s);
    let m = metrics(&t);

    let hold = phase(&t, 0.0, 360.0);
    let peak_sync = hold
        .iter()
        .map(|&i| m.intervals[i].sync_index)
        .fold(0.0, f64::max);
    let a = peak_sync > SYNC_HIGH;
    report(
        "step schedule, synchronized during the 42 $/MWh hold",
        a,
        format!("max sync index {peak_sync:.3} before minute 360 (threshold {SYNC_HIGH})"),
    );

    let mid = phase(&t, 360.0, 720.0);
    let limit = t.feeder_limit;
    let pinned = mid
        .iter()
        .filter(|&&i| t.intervals[i].avg_demand >= PINNED_FRACTION * limit)
        .count();
    let raised = mid
        .iter()
        .filter(|&&i| t.intervals[i].clearing_price > t.intervals[i].base_price)
        .count();
    let pinned_share = pinned as f64 / mid.len() as f64;
    let raised_share = raised as f64 / mid.len() as f64;
    let b = pinned_share >= PINNED_SHARE && raised_share >= PINNED_SHARE;
    report(
        "step schedule, pinned at the feeder limit at 20 $/MWh",
        b,
        format!(
            "{pinned}/{} intervals at >= {:.0}% of limit, {raised}/{} cleared above base (need {:.0}% each)",
            mid.len(),
            PINNED_FRACTION * 100.0,
            mid.len(),
            PINNED_SHARE * 100.0
        ),
    );

    let c = low_price_swing("step schedule, large oscillations at 9 $/MWh", &s);
    a && b && c
}

fn heterogeneous_setpoints_still_oscillate() -> bool {
    low_price_swing(
        "heterogeneous set-points, large oscillations at 9 $/MWh",
        &scenarios::step_price_heterogeneous_setpoints(),
    )
}

fn swings(trace: &Trace, from: f64) -> Vec<f64> {
    trace
        .intervals
        .windows(2)
        .filter(|w| w[0].start_min >= from)
        .map(|w| (w[1].avg_demand - w[0].avg_demand).abs())
        .collect()
}

fn fluctuating_price_gives_fluctuating_demand() -> bool {
    let s = scenarios::fluctuating();
    let t = run_ok(&s);
    let cap = t.capacity;
    let all = swings(&t, 0.0);
    let large = all.iter().filter(|&&d| d > LARGE_SWING * cap).count();
    let large_share = large as f64 / t.intervals.len() as f64;

    let mut flat = s.clone();
    flat.price = PriceSignal::Constant { price: 25.0 };
    let tf = run_ok(&flat);
    let settled = swings(&tf, SETTLE_MIN);
    let worst = settled.iter().copied().fold(0.0, f64::max);

    let pass = large_share >= LARGE_SWING_SHARE && worst < SETTLED_SWING * cap;
    report(
        "fluctuating base price",
        pass,
        format!(
            "{large}/{} intervals swing > {:.0}% of capacity (need {:.0}%); constant 25 $/MWh worst swing after {SETTLE_MIN:.0} min {:.1}% (limit {:.0}%)",
            t.intervals.len(),
            LARGE_SWING * 100.0,
            LARGE_SWING_SHARE * 100.0,
            worst / cap * 100.0,
            SETTLED_SWING * 100.0
        ),
    );
    pass
}

/// Sign changes of the interval-to-interval slope, ignoring flat steps.
fn slope_sign_changes(series: &[f64], deadzone: f64) -> usize {
    let signs: Vec<bool> = series
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| d.abs() > deadzone)
        .map(|d| d > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Maximal runs of consecutive intervals satisfying `pred`.
fn runs(len: usize, pred: impl Fn(usize) -> bool) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..=len {
        match (start, i < len && pred(i)) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                out.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn pulse_train_produces_staged_cascades() -> bool {
    let s = scenarios::pulse_train();
    let t = run_ok(&s);
    let low = t
        .intervals
        .iter()
        .map(|r| r.base_price)
        .fold(f64::INFINITY, f64::min);
    let phases = runs(t.intervals.len(), |i| t.intervals[i].base_price == low);
    let deadzone = SLOPE_DEADZONE * t.capacity;

    let mut pass = !phases.is_empty();
    let mut details = Vec::new();
    for ph in &phases {
        let recs = &t.intervals[ph.clone()];
        let demand: Vec<f64> = recs.iter().map(|r| r.avg_demand).collect();
        let at_limit = demand
            .iter()
            .any(|&d| d >= PINNED_FRACTION * t.feeder_limit);
        let changes = slope_sign_changes(&demand, deadzone);
        let first = &recs[0];
        let revised = first.clearing_price > first.base_price;
        pass &= at_limit && changes >= CASCADE_SIGN_CHANGES && revised;
        details.push(format!(
            "[{:.0}-{:.0} min: at limit {at_limit}, {changes} slope changes, opening price {:.2} vs base {:.2}]",
            recs[0].start_min,
            recs[recs.len() - 1].start_min + t.interval_min(),
            first.clearing_price,
            first.base_price
        ));
    }
    report(
        "pulse train cascades",
        pass,
        format!("{} low phases {}", phases.len(), details.join(" ")),
    );
    pass
}

fn subgroups_synchronize_separately() -> bool {
    let s = scenarios::subgroups();
    let t = run_ok(&s);
    let m = metrics(&t);

    let mut periods: Vec<i64> = m
        .windows
        .iter()
        .filter(|w| w.peak_to_peak > SPECTRUM_MIN_SWING * t.feeder_limit)
        .filter_map(|w| w.dominant_period_min)
        .map(|p| p.round() as i64)
        .collect();
    periods.sort_unstable();
    periods.dedup();

    let split = runs(m.intervals.len(), |i| {
        let im = &m.intervals[i];
        im.sync_index < SYNC_LOW && im.group_sync.iter().all(|&g| g > SYNC_HIGH)
    });
    let longest = split.iter().map(|r| r.len()).max().unwrap_or(0);
    let groups = t.groups();

    let pass = groups == 4 && periods.len() >= 2 && longest >= SUSTAINED_INTERVALS;
    report(
        "subgroups synchronize separately",
        pass,
        format!(
            "{groups} groups, dominant periods {periods:?} min, longest stretch with every group > {SYNC_HIGH} and whole < {SYNC_LOW}: {longest} intervals (need {SUSTAINED_INTERVALS})"
        ),
    );
    pass
}

fn runs_are_byte_identical() -> bool {
    let mut differing = Vec::new();
    for s in scenarios::all() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trace_csv(&run_ok(&s), &mut a).unwrap();
        write_trace_csv(&run_ok(&s), &mut b).unwrap();
        if a != b || a.is_empty() {
            differing.push(s.name.clone());
        }
    }
    let pass = differing.is_empty();
    report(
        "determinism",
        pass,
        format!(
            "{} built-in scenarios run twice, differing: {differing:?}",
            scenarios::BUILTIN_NAMES.len()
        ),
    );
    pass
}

fn random_params(rng: &mut ChaCha8Rng) -> TclParams {
    let p_cap = rng.random_range(1.0..100.0);
    TclParams {
        setpoint: rng.random_range(15.0..28.0),
        deadband: rng.random_range(0.05..2.0),
        p0: rng.random_range(0.0..=p_cap),
        p_cap,
        gamma1: rng.random_range(0.0..300.0),
        gamma2: rng.random_range(0.0..300.0),
        ..TclParams::reference(0)
    }
}

fn bid_curve_is_monotone_continuous_and_bounded() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb1d);
    let mut failures = Vec::new();
    for case in 0..RANDOM_BID_EVALS {
        let p = random_params(&mut rng);
        p.validate().unwrap();
        let span = 2.0 * p.deadband;
        let t1 = p.setpoint + rng.random_range(-span..span);
        let t2 = p.setpoint + rng.random_range(-span..span);
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let (b_lo, b_hi) = (make_bid(lo, &p).price, make_bid(hi, &p).price);

        let eps = 1e-9;
        let left = make_bid(p.setpoint - eps, &p).price;
        let right = make_bid(p.setpoint + eps, &p).price;
        let at = make_bid(p.setpoint, &p).price;
        let jump_bound = (p.gamma1 + p.gamma2) * eps + 1e-9;

        let monotone = b_lo <= b_hi;
        let continuous =
            (right - left).abs() <= jump_bound && (at - p.p0.clamp(0.0, p.p_cap)).abs() <= 1e-12;
        let bounded = [b_lo, b_hi, left, right, at]
            .iter()
            .all(|&x| (0.0..=p.p_cap).contains(&x));
        if !(monotone && continuous && bounded) {
            failures.push(format!("case {case}: {p:?} at {lo}, {hi}"));
        }
    }
    let pass = failures.is_empty();
    report(
        "bid curve properties",
        pass,
        format!(
            "{RANDOM_BID_EVALS} random curves, {} failures",
            failures.len()
        ),
    );
    if !pass {
        println!("    {:#?}", &failures[..failures.len().min(5)]);
    }
    pass
}

fn main() -> std::process::ExitCode {
    let checks: [fn() -> bool; 10] = [
        feeder_limit_is_never_exceeded,
        clearing_matches_brute_force_oracle,
        unconstrained_demand_matches_natural_duty_cycle,
        step_schedule_synchronizes_pins_and_oscillates,
        heterogeneous_setpoints_still_oscillate,
        fluctuating_price_gives_fluctuating_demand,
        pulse_train_produces_staged_cascades,
        subgroups_synchronize_separately,
        runs_are_byte_identical,
        bid_curve_is_monotone_continuous_and_bounded,
    ];
    let failed = checks.iter().filter(|check| !check()).count();
    println!(
        "{} of {} acceptance checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
