use gridsddp::lp::Tolerances;
use gridsddp::network::{parse_case, Network};
use gridsddp::sddp::{run, CutPool, Sddp, SddpConfig, StopRule};
use gridsddp::stage::{build_stage_lp, extract_decision, SystemState};
use gridsddp::wind::WindModel;

fn load(case: &str, wind: &str) -> (Network, WindModel) {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    (parse_case(format!("{dir}/{case}")).unwrap(), WindModel::load(format!("{dir}/{wind}")).unwrap())
}

fn small(iters: usize, seed: u64) -> SddpConfig {
    SddpConfig { backward_samples: 5, forward_samples: 10, max_iters: iters, stop_rule: StopRule::Fixed, seed, ..SddpConfig::default() }
}

#[test]
fn deterministic_case_closes_the_gap_at_once() {
    let (net, model) = load("one_bus.toml", "one_bus_wind.toml");
    let cfg = SddpConfig { max_iters: 5, stop_rule: StopRule::Ci, ..small(5, 0) };
    let out = run(&net, &model, cfg).unwrap();
    assert_eq!(out.iterations, 1);
    assert!(out.converged);
    let b = &out.history[0];
    assert!((b.lower_bound - b.upper_mean).abs() < 1e-6 * b.upper_mean, "{b:?}");
    assert_eq!(b.upper_sd, 0.0);
}

#[test]
fn single_period_cut_is_tight_at_its_state() {
    let (net, model) = load("one_bus.toml", "one_bus_wind.toml");
    let net = net.with_horizon(1).unwrap();
    let cfg = SddpConfig { backward_samples: 1, scenarios: 1, ..small(1, 0) };
    let sddp = Sddp::new(&net, &model, cfg).unwrap();
    let out = sddp.run().unwrap();
    let cut = &out.pool.at(0)[0];
    let state = SystemState { t: 0, ..SystemState::at_minimum(&net, model.mu.clone()) };
    let (w, _) = model.step_lag1(&state.w_prev, &[0.0]);
    let stage = build_stage_lp(&net, &state, &w, &sddp.future(&out.pool, 0), &sddp.grid).unwrap();
    let direct = stage.solve(None, &Tolerances::default()).unwrap().objective;
    let sampled = sddp.uniform_samples()[0][0].clone();
    assert!((cut.value_at(&sampled) - sddp.expected_value(&CutPool::new(1), &sampled).unwrap()).abs() < 1e-6);
    assert!((sddp.expected_value(&out.pool, &state).unwrap() - direct).abs() < 1e-6);
}

#[test]
fn cuts_are_tight_where_they_were_generated() {
    let (net, model) = load("tiny_compare.toml", "tiny_wind.toml");
    let sddp = Sddp::new(&net, &model, small(3, 4)).unwrap();
    let out = sddp.run().unwrap();
    for t in 0..net.horizon {
        let mut partial = CutPool::new(net.horizon);
        for tt in t + 1..net.horizon {
            for c in out.pool.at(tt) {
                partial.add(c.clone());
            }
        }
        for probe in sddp.visited_samples(&out.trajectories)[t].iter().take(3) {
            let cut = sddp.cut_at(&partial, probe).unwrap();
            let value = sddp.expected_value(&partial, probe).unwrap();
            assert!((cut.value_at(probe) - value).abs() <= 1e-6 * value.abs().max(1.0));
        }
    }
}

#[test]
fn lower_bound_never_drops() {
    let (net, model) = load("tiny_compare.toml", "tiny_wind.toml");
    let out = run(&net, &model, small(8, 2)).unwrap();
    for w in out.history.windows(2) {
        assert!(w[1].lower_bound >= w[0].lower_bound - 1e-6 * w[0].lower_bound.abs(), "{} then {}", w[0].lower_bound, w[1].lower_bound);
    }
}

#[test]
fn same_seed_same_history_for_any_thread_count() {
    let (net, model) = load("tiny_compare.toml", "tiny_wind.toml");
    let go = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run(&net, &model, small(4, 11)).unwrap())
    };
    let (a, b) = (go(1), go(3));
    assert_eq!(a.history, b.history);
    assert_eq!(a.pool, b.pool);
    assert_ne!(a.history, run(&net, &model, small(4, 12)).unwrap().history);
}

#[test]
fn nine_bus_pass_adds_twenty_five_cuts_per_hour() {
    let (net, model) = load("nine_bus.toml", "nine_bus_wind.toml");
    let cfg = SddpConfig { max_iters: 1, forward_samples: 5, ..SddpConfig::default() };
    let out = run(&net, &model, cfg).unwrap();
    assert_eq!(out.cuts_generated, vec![vec![25; 24]]);
    assert!(out.pool.sizes().iter().all(|&n| (1..=25).contains(&n)));
}

#[test]
fn trained_policy_charges_in_the_first_hour() {
    let (net, model) = load("nine_bus.toml", "nine_bus_wind.toml");
    let cfg = SddpConfig { backward_samples: 10, scenarios: 25, forward_samples: 10, max_iters: 3, ..SddpConfig::default() };
    let sddp = Sddp::new(&net, &model, cfg).unwrap();
    let out = sddp.run().unwrap();
    let state = sddp.initial.clone();
    let wind = model.mu.clone();
    let stage = build_stage_lp(&net, &state, &wind, &sddp.future(&out.pool, 0), &sddp.grid).unwrap();
    let sol = stage.solve(None, &Tolerances::default()).unwrap();
    let d = extract_decision(&net, &state, &wind, &stage, &sol).unwrap();
    assert!(d.charge[0] > 1.0, "charge {:?}", d.charge);
}
