use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::BenchError;
use crate::network::{serialize_case, Bus, Cost, Generator, Line, Network, StorageDevice, WindFarm};
use crate::wind::{path_rng, WindModel};

/// Shape of a synthetic test network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaseShape {
    pub buses: usize,
    pub generators: usize,
    pub lines: usize,
}

/// Bus, generator and line counts of the scaling ladder.
pub const LADDER: [CaseShape; 5] = [
    CaseShape { buses: 30, generators: 6, lines: 41 },
    CaseShape { buses: 57, generators: 7, lines: 80 },
    CaseShape { buses: 89, generators: 12, lines: 210 },
    CaseShape { buses: 118, generators: 54, lines: 186 },
    CaseShape { buses: 300, generators: 69, lines: 411 },
];

/// Ladder entry with `buses` buses.
pub fn ladder_shape(buses: usize) -> Option<CaseShape> {
    LADDER.iter().copied().find(|s| s.buses == buses)
}

const SALT_FIXTURE: u64 = 0x6669_7874;

/// 24-hour load shape, peak 1.
pub const DAILY_SHAPE: [f64; 24] = [
    0.62, 0.58, 0.55, 0.54, 0.55, 0.60, 0.68, 0.77, 0.84, 0.88, 0.90, 0.91, 0.90, 0.89, 0.88, 0.88, 0.90, 0.95,
    1.00, 0.98, 0.93, 0.85, 0.76, 0.68,
];

/// Seeded synthetic network with `storage` devices and `wind` farms.
///
/// A random spanning tree guarantees connectivity and the remaining lines
/// join random distinct bus pairs. Generation capacity is about 1.4 times
/// the peak load. Wind capacity totals 20% of the peak.
pub fn synthetic_case(shape: CaseShape, storage: usize, wind: usize, horizon: usize, seed: u64) -> Result<Network, BenchError> {
    let CaseShape { buses: n, generators: g, lines: l } = shape;
    if n == 0 || g == 0 || l + 1 < n || l > n * (n - 1) / 2 || storage > n || wind > n {
        return Err(BenchError::Config(format!("cannot build a case with shape {shape:?}, {storage} storage, {wind} wind")));
    }
    let shape_id = (n as u64) << 32 | (storage as u64) << 16 | wind as u64;
    let mut rng = path_rng(seed ^ SALT_FIXTURE, shape_id);

    let bases: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.6) { rng.random_range(5.0..40.0) } else { 0.0 }).collect();
    let buses: Vec<Bus> = (0..n)
        .map(|i| Bus {
            id: i + 1,
            is_slack: i == 0,
            load_profile: (0..horizon).map(|t| round2(bases[i] * DAILY_SHAPE[t % 24])).collect(),
        })
        .collect();
    let peak: f64 = bases.iter().sum::<f64>().max(1.0);

    let mut gen_buses: Vec<usize> = (1..=n).collect();
    gen_buses.shuffle(&mut rng);
    let weights: Vec<f64> = (0..g).map(|_| rng.random_range(0.5..1.5)).collect();
    let wsum: f64 = weights.iter().sum();
    let generators = (0..g)
        .map(|k| {
            let p_max = round2(1.4 * peak * weights[k] / wsum);
            Generator {
                id: k + 1,
                bus: gen_buses[k % n],
                p_min: round2(0.1 * p_max),
                p_max,
                ramp_up: round2(0.4 * p_max),
                ramp_down: round2(0.4 * p_max),
                cost: Cost::Quadratic([
                    round4(rng.random_range(0.01..0.1)),
                    round2(rng.random_range(5.0..40.0)),
                    round2(rng.random_range(0.0..300.0)),
                ]),
            }
        })
        .collect();

    let mut pairs = BTreeSet::new();
    let mut order: Vec<usize> = (1..=n).collect();
    order[1..].shuffle(&mut rng);
    for i in 1..n {
        let a = order[rng.random_range(0..i)];
        pairs.insert((a.min(order[i]), a.max(order[i])));
    }
    while pairs.len() < l {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
    pairs.shuffle(&mut rng);
    let lines = pairs
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| Line {
            id: k + 1,
            from_bus: a,
            to_bus: b,
            susceptance: round2(100.0 / rng.random_range(0.02..0.3)),
            flow_limit: round2(peak),
        })
        .collect();

    let mut site: Vec<usize> = (1..=n).collect();
    site.shuffle(&mut rng);
    let storage_devices = (0..storage)
        .map(|k| {
            let s_max = round2(rng.random_range(0.05..0.15) * peak);
            StorageDevice {
                id: k + 1,
                bus: site[k],
                s_min: 0.0,
                s_max,
                delta_max: round2(0.3 * s_max),
                eff_charge: round2(rng.random_range(0.85..0.98)),
                eff_discharge: round2(rng.random_range(0.85..0.98)),
                eff_storage: round2(rng.random_range(0.95..1.0)),
                variation_cost: 0.0,
            }
        })
        .collect();
    site.shuffle(&mut rng);
    let wind_farms = (0..wind)
        .map(|k| WindFarm { id: k + 1, bus: site[k], capacity: round2(0.2 * peak / wind as f64) })
        .collect();

    let mut net = Network { buses, generators, lines, storage_devices, wind_farms, penalty_m: 0.0, horizon };
    net.penalty_m = net.default_penalty();
    net.ensure_valid().map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(net)
}

/// Independent lag-1 model per farm at a 30% capacity factor.
pub fn synthetic_wind(net: &Network) -> Result<WindModel, BenchError> {
    let m = net.wind_farms.len();
    let cap: Vec<f64> = net.wind_farms.iter().map(|w| w.capacity).collect();
    let mut phi = vec![0.0; m * m];
    for k in 0..m {
        phi[k * m + k] = 0.6;
    }
    WindModel::new(
        1,
        cap.iter().map(|c| round2(0.3 * c)).collect(),
        vec![phi],
        cap.iter().map(|c| round2(0.06 * c)).collect(),
        cap,
    )
    .map_err(|e| BenchError::Config(e.to_string()))
}

/// File stem of a ladder case, e.g. `case30_s1_m1`.
pub fn case_name(shape: CaseShape, storage: usize, wind: usize) -> String {
    format!("case{}_s{storage}_m{wind}", shape.buses)
}

/// Writes `<name>.toml` and `<name>_wind.toml` for every ladder shape with
/// the given storage and wind counts. Returns the written stems.
pub fn write_ladder(
    dir: &Path,
    storage: &[usize],
    wind: &[usize],
    horizon: usize,
    seed: u64,
) -> Result<Vec<String>, BenchError> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for shape in LADDER {
        for &s in storage {
            for &m in wind {
                let net = synthetic_case(shape, s, m, horizon, seed)?;
                let name = case_name(shape, s, m);
                std::fs::write(dir.join(format!("{name}.toml")), serialize_case(&net))?;
                if m > 0 {
                    std::fs::write(dir.join(format!("{name}_wind.toml")), synthetic_wind(&net)?.to_toml())?;
                }
                names.push(name);
            }
        }
    }
    Ok(names)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}
