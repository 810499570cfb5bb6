//! Samples the lag-1 wind model, approximates it by a Markov chain and
//! refits the model from a simulated history.
//!
//! `cargo run --release --example wind_model`

use gridsddp::wind::{discretize, fit_lag1, simulate, WindModel};

fn main() -> anyhow::Result<()> {
    let model = WindModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nine_bus_wind.toml"))?;
    println!(
        "mu {:?}, phi {:?}, sd {:?}, spectral radius {:.2}",
        model.mu,
        model.phi[0],
        model.noise_sd,
        model.spectral_radius()
    );

    let paths = simulate(&model, std::slice::from_ref(&model.initial), 24, 500, 11);
    let hour_means: Vec<f64> =
        (0..24).map(|t| paths.iter().map(|p| p.values[t][0]).sum::<f64>() / paths.len() as f64).collect();
    println!("mean output by hour: {:.1?}", hour_means);

    let chain = discretize(&model, 7, 20_000, 11)?;
    println!("chain levels: {:.1?}", chain.levels[0]);
    for (k, row) in chain.transition.iter().enumerate() {
        println!("  from {:>5.1}: {:.2?}", chain.value(k)[0], row);
    }

    let history: Vec<Vec<f64>> = simulate(&model, std::slice::from_ref(&model.mu), 5_000, 1, 12)[0].values.clone();
    let fitted = fit_lag1(&history, model.capacity.clone())?;
    println!("refitted: mu {:.2?}, phi {:.3?}, sd {:.2?}", fitted.mu, fitted.phi[0], fitted.noise_sd);
    Ok(())
}
