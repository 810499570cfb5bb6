use gridsddp::lp::Tolerances;
use gridsddp::network::{parse_case, Bus, Cost, Generator, Line, Network};
use gridsddp::stage::{build_stage_lp, extract_decision, BreakpointGrid, Cut, FutureCost, SystemState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nine_bus() -> Network {
    parse_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nine_bus.toml")).unwrap()
}

fn generator(id: usize, bus: usize, p_max: f64, marginal: f64) -> Generator {
    Generator { id, bus, p_min: 0.0, p_max, ramp_up: p_max, ramp_down: p_max, cost: Cost::Quadratic([0.0, marginal, 0.0]) }
}

fn two_bus(limit: f64, d1: f64, d2: f64) -> Network {
    Network {
        buses: vec![
            Bus { id: 1, is_slack: true, load_profile: vec![d1] },
            Bus { id: 2, is_slack: false, load_profile: vec![d2] },
        ],
        generators: vec![generator(1, 1, 100.0, 10.0), generator(2, 2, 100.0, 25.0)],
        lines: vec![Line { id: 1, from_bus: 1, to_bus: 2, susceptance: 50.0, flow_limit: limit }],
        storage_devices: vec![],
        wind_farms: vec![],
        penalty_m: 500.0,
        horizon: 1,
    }
}

fn random_state(net: &Network, rng: &mut ChaCha8Rng) -> SystemState {
    SystemState {
        t: 0,
        s: net.storage_devices.iter().map(|d| rng.random_range(d.s_min..=d.s_max)).collect(),
        p_prev: net.generators.iter().map(|g| rng.random_range(g.p_min..=g.p_max)).collect(),
        w_prev: net.wind_farms.iter().map(|w| rng.random_range(0.0..=w.capacity)).collect(),
    }
}

fn stage_value(net: &Network, state: &SystemState, wind: &[f64], future: &FutureCost, grid: &BreakpointGrid) -> f64 {
    let stage = build_stage_lp(net, state, wind, future, grid).unwrap();
    stage.solve(None, &Tolerances::default()).unwrap().objective
}

#[test]
fn two_bus_dispatch_matches_flow_enumeration() {
    for (limit, d1, d2) in [(10.0, 5.0, 30.0), (40.0, 20.0, 30.0), (15.0, 0.0, 60.0), (80.0, 10.0, 10.0)] {
        let net = two_bus(limit, d1, d2);
        let state = SystemState::at_minimum(&net, vec![]);
        let lp = stage_value(&net, &state, &[], &FutureCost::None, &BreakpointGrid::uniform(&net, 2));

        let mut best = f64::INFINITY;
        let steps = 4000;
        for k in 0..=steps {
            let e = -limit + 2.0 * limit * k as f64 / steps as f64;
            let p2 = (d2 - e).clamp(0.0, 100.0);
            let short2 = d2 - e - p2;
            let p1 = (d1 + e).clamp(0.0, 100.0);
            let short1 = d1 + e - p1;
            let cost = 10.0 * p1 + 25.0 * p2 + 500.0 * (short1.abs() + short2.abs());
            best = best.min(cost);
        }
        assert!((lp - best).abs() <= 1e-6 * best.max(1.0) + 2.0 * limit / steps as f64 * 500.0, "limit {limit}: {lp} vs {best}");
        assert!(lp <= best + 1e-6);
    }
}

#[test]
fn balance_residuals_within_feasibility_tolerance() {
    let net = nine_bus();
    let grid = BreakpointGrid::uniform(&net, 11);
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for t in 0..net.horizon {
        let state = SystemState { t, ..random_state(&net, &mut rng) };
        let wind = [rng.random_range(0.0..145.0)];
        let stage = build_stage_lp(&net, &state, &wind, &FutureCost::None, &grid).unwrap();
        let sol = stage.solve(None, &tol).unwrap();
        for &row in &stage.layout.balance {
            let r = stage.problem.row_activity(row, &sol.primal) - stage.problem.row(row).rhs;
            assert!(r.abs() <= tol.feas, "period {t}: residual {r}");
        }
    }
}

#[test]
fn empty_pool_leaves_rho_at_zero() {
    let net = nine_bus();
    let grid = BreakpointGrid::uniform(&net, 11);
    let state = SystemState::at_minimum(&net, vec![40.0]);
    let stage = build_stage_lp(&net, &state, &[40.0], &FutureCost::Cuts { cuts: &[], lower: 0.0 }, &grid).unwrap();
    let sol = stage.solve(None, &Tolerances::default()).unwrap();
    assert!(stage.future_value(&sol).abs() < 1e-9);
}

#[test]
fn refined_breakpoints_never_raise_the_stage_value() {
    let net = nine_bus();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let state = SystemState { t: rng.random_range(0..24), ..random_state(&net, &mut rng) };
        let wind = [rng.random_range(0.0..145.0)];
        let coarse = BreakpointGrid::uniform(&net, 6);
        let fine = coarse.refined(&net);
        let finer = fine.refined(&net);
        let v: Vec<f64> = [&coarse, &fine, &finer].iter().map(|g| stage_value(&net, &state, &wind, &FutureCost::None, g)).collect();
        assert!(v[0] >= v[1] - 1e-8 && v[1] >= v[2] - 1e-8, "{v:?}");
    }
}

#[test]
fn adding_cuts_never_lowers_the_stage_value() {
    let net = nine_bus();
    let grid = BreakpointGrid::uniform(&net, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let state = SystemState { t: 3, ..SystemState::at_minimum(&net, vec![50.0]) };
    let mut cuts: Vec<Cut> = Vec::new();
    let mut last = stage_value(&net, &state, &[50.0], &FutureCost::Cuts { cuts: &cuts, lower: 0.0 }, &grid);
    for k in 0..15 {
        cuts.push(Cut {
            t: 4,
            intercept: rng.random_range(0.0..40_000.0),
            g_s: vec![rng.random_range(-80.0..0.0)],
            g_p: (0..3).map(|_| rng.random_range(-20.0..20.0)).collect(),
            g_w: vec![rng.random_range(-30.0..0.0)],
            iteration: 1,
            sample: k,
        });
        let v = stage_value(&net, &state, &[50.0], &FutureCost::Cuts { cuts: &cuts, lower: 0.0 }, &grid);
        assert!(v >= last - 1e-6, "cut {k}: {v} < {last}");
        last = v;
    }
}

#[test]
fn decisions_respect_ramp_windows() {
    let net = nine_bus();
    let grid = BreakpointGrid::uniform(&net, 11);
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let state = SystemState { t: rng.random_range(0..24), ..random_state(&net, &mut rng) };
        let wind = [rng.random_range(0.0..145.0)];
        let stage = build_stage_lp(&net, &state, &wind, &FutureCost::None, &grid).unwrap();
        let sol = stage.solve(None, &tol).unwrap();
        let d = extract_decision(&net, &state, &wind, &stage, &sol).unwrap();
        for ((g, &p), &prev) in net.generators.iter().zip(&d.p).zip(&state.p_prev) {
            assert!(p >= (prev - g.ramp_down).max(g.p_min) - 1e-6 && p <= (prev + g.ramp_up).min(g.p_max) + 1e-6);
        }
        assert_eq!(d.next.p_prev, d.p);
        assert_eq!(d.next.w_prev, wind.to_vec());
    }
}
