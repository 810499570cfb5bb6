use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Bus, Generator, Line, Network, NetworkError, StorageDevice, WindFarm};

/// The `[options]` section of a case file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Load CSV path, relative to the case file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_csv: Option<String>,
    #[serde(default, rename = "penalty_M", skip_serializing_if = "Option::is_none")]
    pub penalty_m: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    #[serde(default)]
    options: CaseOptions,
    buses: Vec<Bus>,
    #[serde(default)]
    generators: Vec<Generator>,
    #[serde(default)]
    lines: Vec<Line>,
    #[serde(default)]
    storage: Vec<StorageDevice>,
    #[serde(default)]
    wind: Vec<WindFarm>,
}

/// Reads a TOML case file and the load CSV it references.
pub fn parse_case(path: impl AsRef<Path>) -> Result<Network, NetworkError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| NetworkError::Io { path: path.to_path_buf(), source })?;
    parse_case_str(&text, path)
}

/// Parses case text as if it were read from `path`; relative load CSV
/// references resolve against `path`'s directory.
pub fn parse_case_str(text: &str, path: &Path) -> Result<Network, NetworkError> {
    let file: CaseFile = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        if message.contains("missing field") {
            return NetworkError::Schema { path: path.to_path_buf(), message };
        }
        let (line, column) = match e.span() {
            Some(span) => line_col(text, span.start),
            None => (0, 0),
        };
        NetworkError::Parse { path: path.to_path_buf(), line, column, message }
    })?;
    let schema = |message: String| NetworkError::Schema { path: path.to_path_buf(), message };

    let known = |id: usize| file.buses.iter().any(|b| b.id == id);
    for g in &file.generators {
        if !known(g.bus) {
            return Err(schema(format!("generator {} references unknown bus {}", g.id, g.bus)));
        }
    }
    for l in &file.lines {
        for b in [l.from_bus, l.to_bus] {
            if !known(b) {
                return Err(schema(format!("line {} references unknown bus {b}", l.id)));
            }
        }
    }
    for s in &file.storage {
        if !known(s.bus) {
            return Err(schema(format!("storage {} references unknown bus {}", s.id, s.bus)));
        }
    }
    for w in &file.wind {
        if !known(w.bus) {
            return Err(schema(format!("wind farm {} references unknown bus {}", w.id, w.bus)));
        }
    }

    let mut buses = file.buses;
    let mut data_len = buses.iter().map(|b| b.load_profile.len()).max().unwrap_or(0);
    if let Some(csv_name) = &file.options.load_csv {
        let csv_path = path.parent().unwrap_or(Path::new(".")).join(csv_name);
        let table = read_load_csv(&csv_path)?;
        for (id, profile) in table.rows {
            let Some(b) = buses.iter_mut().find(|b| b.id == id) else {
                return Err(NetworkError::Schema {
                    path: csv_path.clone(),
                    message: format!("load for unknown bus {id}"),
                });
            };
            b.load_profile = profile;
        }
        data_len = data_len.max(table.periods);
    }
    let horizon = file.options.horizon.unwrap_or(data_len);
    for b in &mut buses {
        if b.load_profile.is_empty() {
            b.load_profile = vec![0.0; horizon];
        }
        if b.load_profile.len() < horizon {
            return Err(schema(format!(
                "bus {} has {} load values, horizon is {horizon}",
                b.id,
                b.load_profile.len()
            )));
        }
        b.load_profile.truncate(horizon);
    }
    let mut net = Network {
        buses,
        generators: file.generators,
        lines: file.lines,
        storage_devices: file.storage,
        wind_farms: file.wind,
        penalty_m: 0.0,
        horizon,
    };
    net.penalty_m = file.options.penalty_m.unwrap_or_else(|| net.default_penalty());
    Ok(net)
}

/// Renders `net` as a self-contained case file with inline load profiles.
pub fn serialize_case(net: &Network) -> String {
    let file = CaseFile {
        options: CaseOptions {
            horizon: Some(net.horizon),
            load_csv: None,
            penalty_m: Some(net.penalty_m),
        },
        buses: net.buses.clone(),
        generators: net.generators.clone(),
        lines: net.lines.clone(),
        storage: net.storage_devices.clone(),
        wind: net.wind_farms.clone(),
    };
    toml::to_string(&file).expect("case data is always representable")
}

struct LoadTable {
    periods: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

fn read_load_csv(path: &PathBuf) -> Result<LoadTable, NetworkError> {
    let io = |source| NetworkError::Io { path: path.clone(), source };
    let text = std::fs::read_to_string(path).map_err(io)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| NetworkError::Parse {
        path: path.clone(),
        line,
        column: 0,
        message,
    };
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.get(0) != Some("bus_id") {
        return Err(NetworkError::Schema {
            path: path.clone(),
            message: "load CSV header must start with bus_id".into(),
        });
    }
    let periods = headers.len() - 1;
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let id: usize = rec[0].parse().map_err(|_| parse_err(line, format!("bad bus id `{}`", &rec[0])))?;
        let mut values = Vec::with_capacity(periods);
        for field in rec.iter().skip(1) {
            values.push(field.parse::<f64>().map_err(|_| parse_err(line, format!("bad load value `{field}`")))?);
        }
        rows.push((id, values));
    }
    Ok(LoadTable { periods, rows })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}
