//! Acceptance checks. One line per criterion; exits nonzero if any fails.
//!
//! `cargo test --release --test acceptance`

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gridsddp::bench::{
    cmd_compare, cmd_fit_wind, cmd_make_fixtures, cmd_rescale_wind, cmd_run_dp, cmd_run_sddp, cmd_scale,
    discretize_for, ExperimentConfig,
};
use gridsddp::dp::{backward_dp, simulate_dp_policy, CostSummary, DpOptions, StateGrid};
use gridsddp::lp::{solve, LpProblem, Sense, Tolerances, VarId};
use gridsddp::network::{parse_case, Network};
use gridsddp::sddp::{CutPool, Sddp, SddpConfig, SddpOutcome, StopRule, Trajectory};
use gridsddp::stage::{add_glp_term, SystemState};
use gridsddp::wind::{discretize, simulate, write_history_csv, WindModel};

type Check = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(case: &str, wind: &str) -> (Network, WindModel) {
    (parse_case(fixture(case)).unwrap(), WindModel::load(fixture(wind)).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

// 1

fn sampled_program(x1: &[f64], x2: &[f64]) -> (f64, f64, f64) {
    let f1 = |x: f64| 0.5 * x * x - 2.0 * x;
    let f2 = |x: f64| x * x - 6.0 * x;
    let mut lp = LpProblem::new();
    let a = lp.add_var("x1", 0.0, f64::INFINITY, 0.0);
    let b = lp.add_var("x2", 0.0, f64::INFINITY, 0.0);
    add_glp_term(&mut lp, "x1", a, &x1.iter().map(|&x| (x, f1(x))).collect::<Vec<_>>());
    add_glp_term(&mut lp, "x2", b, &x2.iter().map(|&x| (x, f2(x))).collect::<Vec<_>>());
    lp.add_row("c1", vec![(a, 1.0), (b, 1.0)], Sense::Le, 1.75);
    lp.add_row("c2", vec![(a, -1.0), (b, 2.0)], Sense::Le, 2.2);
    lp.add_row("c3", vec![(a, 2.0), (b, 1.0)], Sense::Le, 4.7);
    let sol = solve(&lp, &Tolerances::default()).unwrap();
    (sol.value(a), sol.value(b), sol.objective)
}

fn glp_worked_example() -> Check {
    let six = sampled_program(&[3.0, 31.0, 0.0, 9.0, 0.5, 1.75], &[7.0, 21.0, 0.0, 5.0, 1.5, 1.25]);
    let four = sampled_program(&[3.0, 31.0, 0.0, 9.0], &[7.0, 21.0, 0.0, 5.0]);
    let msg = format!(
        "six points: x = ({:.5}, {:.5}), obj {:.5} (want (0.43333, 1.31667), -6.5); four points: obj {:.5} (want -1.5333)",
        six.0, six.1, six.2, four.2
    );
    let ok = (six.0 - 0.43333).abs() <= 1e-4
        && (six.1 - 1.31667).abs() <= 1e-4
        && (six.2 + 6.5).abs() <= 1e-4
        && (four.2 + 1.5333).abs() <= 1e-3;
    if ok { Ok(msg) } else { Err(msg) }
}

// 2

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let (a, b) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if f(a) < f(b) { hi = b } else { lo = a }
    }
    f(0.5 * (lo + hi))
}

fn glp_overestimates() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_gap = f64::INFINITY;
    let mut worst_refine = f64::NEG_INFINITY;
    for _ in 0..20 {
        let n = rng.random_range(2..=4);
        let gens: Vec<(f64, f64, f64, f64)> = (0..n)
            .map(|_| {
                let lo = rng.random_range(0.0..20.0);
                (rng.random_range(0.01..0.5), rng.random_range(-20.0..5.0), lo, lo + rng.random_range(10.0..100.0))
            })
            .collect();
        let cost = |g: &(f64, f64, f64, f64), x: f64| g.0 * x * x + g.1 * x;
        let smooth: f64 = gens.iter().map(|g| golden_section(|x| cost(g, x), g.2, g.3)).sum();
        let glp = |count: usize| {
            let mut lp = LpProblem::new();
            for (i, g) in gens.iter().enumerate() {
                let x = lp.add_var(format!("x{i}"), g.2, g.3, 0.0);
                let pts: Vec<(f64, f64)> = (0..count)
                    .map(|k| g.2 + (g.3 - g.2) * k as f64 / (count - 1) as f64)
                    .map(|p| (p, cost(g, p)))
                    .collect();
                add_glp_term(&mut lp, &format!("x{i}"), x, &pts);
            }
            solve(&lp, &Tolerances::default()).unwrap().objective
        };
        let mut prev = f64::INFINITY;
        for count in [3, 5, 9, 17] {
            let v = glp(count);
            worst_gap = worst_gap.min(v - smooth);
            worst_refine = worst_refine.max(v - prev);
            prev = v;
        }
    }
    let msg = format!("min(GLP - smooth) = {worst_gap:.3e}, max increase on refinement = {worst_refine:.3e}");
    if worst_gap >= -1e-8 && worst_refine <= 1e-8 { Ok(msg) } else { Err(msg) }
}

// 3, 4

/// Expected cost of `tiny.toml` from `state` to the horizon, as one LP over
/// every innovation path. Wind and costs are written out from the fixture.
fn tiny_oracle(state: &SystemState, breakpoints: &[(f64, f64)]) -> f64 {
    const LOAD: [f64; 2] = [60.0, 75.0];
    const NOISE: [f64; 3] = [-8.0, 0.0, 8.0];
    let mut lp = LpProblem::new();
    struct Prev {
        s: Option<VarId>,
        p: Option<VarId>,
        w: f64,
    }
    fn period(
        lp: &mut LpProblem,
        bp: &[(f64, f64)],
        state: &SystemState,
        t: usize,
        prob: f64,
        prev: Prev,
        tag: String,
    ) {
        let inf = f64::INFINITY;
        for (j, eps) in NOISE.iter().enumerate() {
            let w = (20.0 + 0.5 * (prev.w - 20.0) + eps).clamp(0.0, 40.0);
            let pr = prob / 3.0;
            let tag = format!("{tag}{j}");
            let p = lp.add_var(format!("p{tag}"), 0.0, 80.0, 0.0);
            let pts: Vec<(f64, f64)> = bp.iter().map(|&(x, c)| (x, c * pr)).collect();
            add_glp_term(lp, &format!("g{tag}"), p, &pts);
            let c = lp.add_var(format!("c{tag}"), 0.0, 10.0, 0.5 * pr);
            let d = lp.add_var(format!("d{tag}"), 0.0, 10.0, 0.5 * pr);
            let s = lp.add_var(format!("s{tag}"), 0.0, 30.0, 0.0);
            let kp = lp.add_var(format!("kp{tag}"), 0.0, inf, 200.0 * pr);
            let km = lp.add_var(format!("km{tag}"), 0.0, inf, 200.0 * pr);
            let bal = vec![(p, 1.0), (c, -1.0 / 0.9), (d, 0.9), (km, 1.0), (kp, -1.0)];
            lp.add_row(format!("bal{tag}"), bal, Sense::Eq, LOAD[t] - w);
            match (prev.s, prev.p) {
                (Some(sp), Some(pp)) => {
                    lp.add_row(format!("sto{tag}"), vec![(s, 1.0), (sp, -0.95), (c, -1.0), (d, 1.0)], Sense::Eq, 0.0);
                    lp.add_row(format!("up{tag}"), vec![(p, 1.0), (pp, -1.0)], Sense::Le, 15.0);
                    lp.add_row(format!("dn{tag}"), vec![(pp, 1.0), (p, -1.0)], Sense::Le, 60.0);
                }
                _ => {
                    lp.add_row(format!("sto{tag}"), vec![(s, 1.0), (c, -1.0), (d, 1.0)], Sense::Eq, 0.95 * state.s[0]);
                    lp.add_row(format!("up{tag}"), vec![(p, 1.0)], Sense::Le, state.p_prev[0] + 15.0);
                    lp.add_row(format!("dn{tag}"), vec![(p, 1.0)], Sense::Ge, state.p_prev[0] - 60.0);
                }
            }
            if t + 1 < LOAD.len() {
                period(lp, bp, state, t + 1, pr, Prev { s: Some(s), p: Some(p), w }, tag);
            }
        }
    }
    period(&mut lp, breakpoints, state, state.t, 1.0, Prev { s: None, p: None, w: state.w_prev[0] }, String::new());
    solve(&lp, &Tolerances::default()).unwrap().objective
}

fn random_state(rng: &mut ChaCha8Rng, net: &Network, model: &WindModel, t: usize) -> SystemState {
    SystemState {
        t,
        s: net.storage_devices.iter().map(|d| rng.random_range(d.s_min..=d.s_max)).collect(),
        p_prev: net.generators.iter().map(|g| rng.random_range(g.p_min..=g.p_max)).collect(),
        w_prev: model.capacity.iter().map(|&c| rng.random_range(0.0..=c)).collect(),
    }
}

fn tiny_run() -> (Network, WindModel, SddpConfig) {
    let (net, model) = load("tiny.toml", "tiny_wind.toml");
    let cfg = SddpConfig { backward_samples: 10, forward_samples: 50, max_iters: 30, stop_rule: StopRule::Ci, seed: 1, ..SddpConfig::default() };
    (net, model, cfg)
}

fn cut_validity() -> Check {
    let (net, model, cfg) = tiny_run();
    let sddp = Sddp::new(&net, &model, cfg).unwrap();
    let out = sddp.run().map_err(|e| e.to_string())?;
    let bp = &sddp.grid.points[0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    let mut cuts = 0;
    for t in 0..net.horizon {
        cuts += out.pool.at(t).len();
        for _ in 0..100 {
            let state = random_state(&mut rng, &net, &model, t);
            let oracle = tiny_oracle(&state, bp);
            let v = out.pool.evaluate(&state).unwrap_or(f64::NEG_INFINITY);
            worst = worst.min((oracle - v) / oracle.abs().max(1.0));
        }
    }
    let msg = format!("{cuts} cuts, 200 states, min relative (oracle - cut) = {worst:.3e}");
    if worst >= -1e-4 { Ok(msg) } else { Err(msg) }
}

fn bound_sandwich() -> Check {
    let (net, model, cfg) = tiny_run();
    let l = cfg.forward_samples as f64;
    let sddp = Sddp::new(&net, &model, cfg).unwrap();
    let out = sddp.run().map_err(|e| e.to_string())?;
    let b = out.last_bounds().unwrap();
    let oracle = tiny_oracle(&sddp.initial, &sddp.grid.points[0]);
    let upper = b.upper_mean + 3.0 * b.upper_sd / l.sqrt();
    let msg = format!(
        "converged after {} iterations: lower {:.4} <= optimum {oracle:.4} <= upper {:.4} + 3 sd/sqrt(L) = {upper:.4}",
        out.iterations, b.lower_bound, b.upper_mean
    );
    let tol = 1e-9 * oracle.abs();
    if out.converged && b.lower_bound <= oracle + tol && oracle <= upper + tol { Ok(msg) } else { Err(msg) }
}

// 5

fn lower_bound_monotone() -> Check {
    let (net, model) = load("nine_bus.toml", "nine_bus_wind.toml");
    let out = gridsddp::sddp::run(&net, &model, SddpConfig { max_iters: 10, seed: 1, ..SddpConfig::default() })
        .map_err(|e| e.to_string())?;
    let lbs: Vec<f64> = out.history.iter().map(|b| b.lower_bound).collect();
    let worst = lbs.windows(2).map(|w| (w[0] - w[1]) / w[0].abs().max(1.0)).fold(f64::NEG_INFINITY, f64::max);
    let msg = format!("{} iterations, lower bound {:.2} -> {:.2}, worst relative drop {worst:.3e}", lbs.len(), lbs[0], lbs[lbs.len() - 1]);
    if lbs.len() == 10 && worst <= 1e-6 { Ok(msg) } else { Err(msg) }
}

// 6

fn dual_matches_finite_difference() -> Check {
    let (net, model) = load("tiny_compare.toml", "tiny_wind.toml");
    let cfg = SddpConfig { backward_samples: 5, forward_samples: 10, max_iters: 4, seed: 2, ..SddpConfig::default() };
    let sddp = Sddp::new(&net, &model, cfg).unwrap();
    let pool: CutPool = sddp.run().map_err(|e| e.to_string())?.pool;
    let d = &net.storage_devices[0];
    let h = 1e-4 * (d.s_max - d.s_min);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut good, mut degenerate, mut worst) = (0, 0, 0.0f64);
    while good < 20 && good + degenerate < 500 {
        let t = rng.random_range(0..net.horizon);
        let mut state = random_state(&mut rng, &net, &model, t);
        state.s[0] = rng.random_range(d.s_min + 2.0 * h..d.s_max - 2.0 * h);
        let at = |ds: f64| {
            let mut s = state.clone();
            s.s[0] += ds;
            sddp.expected_value(&pool, &s).unwrap()
        };
        let (lo, mid, hi) = (at(-h), at(0.0), at(h));
        let (back, fwd) = ((mid - lo) / h, (hi - mid) / h);
        if (fwd - back).abs() > 1e-6 * fwd.abs().max(1.0) {
            degenerate += 1;
            continue;
        }
        let g = sddp.cut_at(&pool, &state).unwrap().g_s[0];
        let fd = (hi - lo) / (2.0 * h);
        worst = worst.max(rel(g, fd));
        good += 1;
    }
    let msg = format!("{good} states, {degenerate} kinked states excluded, worst relative |g_s - fd| = {worst:.3e}");
    if good == 20 && worst <= 1e-3 { Ok(msg) } else { Err(msg) }
}

// 7, 9

struct NineBusTiming {
    per_period: usize,
    total: usize,
    dp_seconds: f64,
    sddp_seconds: f64,
}

fn nine_bus_timing() -> NineBusTiming {
    let (net, model) = load("nine_bus.toml", "nine_bus_wind.toml");
    let start = Instant::now();
    let sddp = Sddp::new(&net, &model, SddpConfig { max_iters: 4, seed: 1, ..SddpConfig::default() }).unwrap();
    let _: SddpOutcome = sddp.run().unwrap();
    let sddp_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let chain = discretize_for(&model, 7, 20_000, 0).unwrap();
    let grid = StateGrid::uniform(&net, 6, 6, chain).unwrap();
    let out = backward_dp(&net, grid, DpOptions::default()).unwrap();
    NineBusTiming {
        per_period: out.evaluations_per_period,
        total: out.total_evaluations,
        dp_seconds: start.elapsed().as_secs_f64(),
        sddp_seconds,
    }
}

fn dp_count(n: &NineBusTiming) -> Check {
    let msg = format!("{} evaluations per period, {} in total, DP took {:.1}s", n.per_period, n.total, n.dp_seconds);
    if n.per_period == 63_504 && n.total == 1_524_096 { Ok(msg) } else { Err(msg) }
}

fn speed_direction(n: &NineBusTiming) -> Check {
    let ratio = n.sddp_seconds / n.dp_seconds;
    let msg = format!("SDDP {:.2}s, DP {:.2}s, ratio {ratio:.4}", n.sddp_seconds, n.dp_seconds);
    if ratio < 0.5 { Ok(msg) } else { Err(msg) }
}

// 8

fn sddp_close_to_dp() -> Check {
    let (net, model) = load("tiny_compare.toml", "tiny_wind.toml");
    let initial = SystemState::at_minimum(&net, model.initial.clone());
    let scenarios = simulate(&model, std::slice::from_ref(&model.initial), net.horizon, 100, 2024);
    let cfg = SddpConfig { max_iters: 8, seed: 5, ..SddpConfig::default() };
    let sddp = Sddp::new(&net, &model, cfg).unwrap();
    let out = sddp.run().map_err(|e| e.to_string())?;
    let paths = sddp.simulate_policy(&out.pool, &scenarios).map_err(|e| e.to_string())?;
    let sddp_cost = CostSummary::from_costs(&paths.iter().map(|p| p.cost).collect::<Vec<_>>());
    let chain = discretize(&model, 3, 20_000, 5).unwrap();
    let grid = StateGrid::uniform(&net, 6, 6, chain).unwrap();
    let dp = backward_dp(&net, grid.clone(), DpOptions::default()).unwrap();
    let sim = simulate_dp_policy(&net, &dp.table, grid, &initial, &scenarios, DpOptions::default()).unwrap();
    let excess = (sddp_cost.mean - sim.summary.mean) / sim.summary.mean;
    let msg = format!("SDDP mean {:.2}, DP mean {:.2}, excess {:.3}%", sddp_cost.mean, sim.summary.mean, 100.0 * excess);
    if excess <= 0.02 { Ok(msg) } else { Err(msg) }
}

// 10

fn storage_paths(case: &str, s0: Option<f64>) -> (Network, Vec<Trajectory>) {
    let net = parse_case(fixture(case)).unwrap();
    let model = WindModel::load(fixture("storage_wind.toml")).unwrap();
    let mut initial = SystemState::at_minimum(&net, model.initial.clone());
    if let Some(s) = s0 {
        initial.s = vec![s];
    }
    let cfg = SddpConfig { max_iters: 10, seed: 3, ..SddpConfig::default() };
    let sddp = Sddp::new(&net, &model, cfg).unwrap().with_initial(initial);
    let out = sddp.run().unwrap();
    let scenarios = simulate(&model, std::slice::from_ref(&model.initial), net.horizon, 100, 99);
    let paths = sddp.simulate_policy(&out.pool, &scenarios).unwrap();
    (net, paths)
}

fn storage_behaviour() -> Check {
    let (net, paths) = storage_paths("storage_arbitrage.toml", None);
    let n = paths.len() as f64;
    let horizon = net.horizon;
    let mean = |f: &dyn Fn(&Trajectory) -> f64| paths.iter().map(f).sum::<f64>() / n;
    let net_load: Vec<f64> = (0..horizon).map(|t| net.total_demand(t) - mean(&|p| p.wind[t][0])).collect();
    let mut order: Vec<usize> = (0..horizon).collect();
    order.sort_by(|&a, &b| net_load[a].total_cmp(&net_load[b]));
    let lowest = &order[..horizon / 3];
    let charging: Vec<usize> = (0..horizon)
        .filter(|&t| mean(&|p| p.decisions[t].charge[0] - p.decisions[t].discharge[0]) > 1e-3)
        .collect();
    let outside: Vec<usize> = charging.iter().copied().filter(|t| !lowest.contains(t)).collect();
    let s_min = net.storage_devices[0].s_min;
    let end = mean(&|p| p.decisions[horizon - 1].next.s[0]);
    let a_ok = !charging.is_empty() && outside.is_empty() && (end - s_min).abs() <= 1e-6;

    let (net, paths) = storage_paths("storage_reserve.toml", Some(30.0));
    let capacity: f64 = net.generators.iter().map(|g| g.p_max).sum();
    let (mut changes, mut bad) = (0, 0);
    for p in &paths {
        for t in 0..net.horizon {
            if (p.decisions[t].next.s[0] - p.states[t].s[0]).abs() > 1e-6 {
                changes += 1;
                if capacity + p.wind[t][0] >= net.total_demand(t) {
                    bad += 1;
                }
            }
        }
    }
    let b_ok = changes > 0 && bad == 0;
    let hours = |v: &[usize]| v.iter().map(|t| (t + 1).to_string()).collect::<Vec<_>>().join(" ");
    let msg = format!(
        "free cycling charges in hours [{}], {} outside the lowest-net-load third, ends at {end:.2e}; \
         costly cycling moves in {changes} path-hours, {bad} of them with capacity to spare",
        hours(&charging),
        outside.len()
    );
    if a_ok && b_ok { Ok(msg) } else { Err(msg) }
}

// 11

fn strip_column(text: &str, col: &str) -> String {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let skip = header.iter().position(|h| *h == col);
    let keep = |line: &str| {
        line.split(',').enumerate().filter(|(i, _)| Some(*i) != skip).map(|(_, f)| f).collect::<Vec<_>>().join(",")
    };
    std::iter::once(keep(&header.join(","))).chain(lines.map(keep)).collect::<Vec<_>>().join("\n")
}

fn run_all(dir: &Path) -> Vec<(String, String)> {
    let base = ExperimentConfig {
        case: fixture("tiny_compare.toml"),
        wind: fixture("tiny_wind.toml"),
        iterations: 3,
        backward_samples: 5,
        forward_samples: 8,
        dp_grid: [4, 3, 3],
        simulations: 30,
        compare_runs: vec![2, 4],
        seed: 9,
        out: dir.to_path_buf(),
        ..ExperimentConfig::default()
    };
    cmd_run_sddp(&base).unwrap();
    cmd_run_dp(&base).unwrap();
    cmd_compare(&base).unwrap();
    cmd_scale(&ExperimentConfig { cases: vec!["30".into()], iterations: 1, horizon: Some(4), ..base.clone() }).unwrap();
    let ladder = dir.join("ladder");
    cmd_make_fixtures(&ExperimentConfig { out: ladder.clone(), storage_counts: vec![1], wind_counts: vec![1], horizon: Some(4), ..base.clone() })
        .unwrap();
    let model = WindModel::load(fixture("tiny_wind.toml")).unwrap();
    let history = simulate(&model, std::slice::from_ref(&model.mu), 500, 1, 4).remove(0).values;
    let hist = dir.join("history.csv");
    write_history_csv(&hist, &history).unwrap();
    cmd_fit_wind(&base, &hist).unwrap();
    cmd_rescale_wind(&base, &hist, 0.4).unwrap();

    let mut files: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.extend(std::fs::read_dir(&ladder).unwrap().map(|e| e.unwrap().path()));
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "csv" || e == "toml"));
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p.strip_prefix(dir).unwrap().display().to_string(), strip_column(&text, "cpu_seconds"))
        })
        .collect()
}

fn determinism() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (fa, fb) = (run_all(a.path()), run_all(b.path()));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = fa.iter().zip(&fb).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let msg = format!("{} files compared, differing: [{}]", names.len(), differing.join(", "));
    if fa.len() == fb.len() && differing.is_empty() && names.len() >= 10 { Ok(msg) } else { Err(msg) }
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, budget: f64, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        let (ok, msg) = match result {
            Ok(m) => (secs < budget, m),
            Err(m) => (false, m),
        };
        if !ok {
            failures += 1;
        }
        println!("{} {id:>2} {name}: {msg} [{secs:.2}s, budget {budget}s]", if ok { "PASS" } else { "FAIL" });
    };
    report(1, "glp worked example", 1.0, &mut glp_worked_example);
    report(2, "glp overestimates and refines", 10.0, &mut glp_overestimates);
    report(3, "cut validity", 30.0, &mut cut_validity);
    report(4, "bound sandwich", 60.0, &mut bound_sandwich);
    report(5, "lower bound monotone", 600.0, &mut lower_bound_monotone);
    report(6, "dual vs finite difference", 60.0, &mut dual_matches_finite_difference);
    let mut timing = None;
    report(7, "dp evaluation count", 1800.0, &mut || {
        let t = nine_bus_timing();
        let r = dp_count(&t);
        timing = Some(t);
        r
    });
    report(8, "sddp vs dp cost", 900.0, &mut sddp_close_to_dp);
    report(9, "sddp vs dp speed", f64::INFINITY, &mut || speed_direction(timing.as_ref().unwrap()));
    report(10, "storage policy", 300.0, &mut storage_behaviour);
    report(11, "determinism", 60.0, &mut determinism);
    println!("{} of 11 criteria failed", failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
