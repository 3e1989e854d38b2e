use std::fs;
use std::path::Path;

use serde::Serialize;

use cryolink::gaussian::{sample_quadratures, GaussianState};
use cryolink::heatprofile::{self, HeatModel, ResponseFit};
use cryolink::linalg::Matrix;
use cryolink::network::{self, ConfigFile};
use cryolink::thermal;

use crate::error::CliError;
use crate::output::{csv_table, ensure_dir, json_pretty, sidecar_path, sig9, Outputs, RunManifest};

/// Reads, deserializes and validates a config; errors name the offending key.
pub fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("reading {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
}

pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::input(e.to_string()))?;
    let cfg: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::input(format!("at `{path}`: {}", e.into_inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn heat_model(cfg: &ConfigFile) -> Result<Option<HeatModel<f64>>, CliError> {
    cfg.heat.as_ref().map(|h| h.to_model()).transpose().map_err(Into::into)
}

/// Writes `contents` to `path`, or to stdout when `path` is `None`; a
/// sidecar manifest accompanies file outputs.
fn emit(contents: String, path: Option<&Path>, mut manifest: RunManifest) -> Result<(), CliError> {
    match path {
        None => {
            print!("{contents}");
            Ok(())
        }
        Some(p) => {
            manifest.outputs = vec![p.display().to_string()];
            let mut out = Outputs::default();
            out.add(p, contents);
            out.add(sidecar_path(p), json_pretty(&manifest)?);
            out.commit()
        }
    }
}

#[derive(Serialize)]
struct WithManifest<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    manifest: &'a RunManifest,
}

pub fn thresholds(freq_ghz: f64, at_kelvin: &[f64], output: Option<&Path>, timestamp: &str) -> Result<(), CliError> {
    if !(freq_ghz.is_finite() && freq_ghz > 0.0) {
        return Err(CliError::input(format!("--freq-ghz must be positive, got {freq_ghz}")));
    }
    if let Some(t) = at_kelvin.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::input(format!("--at-kelvin must be non-negative, got {t}")));
    }
    let f = freq_ghz * 1e9;
    let t_kappa = thermal::threshold_kappa(f)?;
    let mut rows: Vec<(String, f64)> = vec![
        ("freq_GHz".into(), freq_ghz),
        ("T_kappa_mK".into(), t_kappa * 1e3),
        ("T_kappa_ratio".into(), t_kappa / thermal::photon_temperature(f)),
        ("T_cr_mK".into(), thermal::crossover_temperature(f) * 1e3),
        ("T_sudden_death_mK".into(), thermal::sudden_death_temperature(f) * 1e3),
        ("T_ln3_bound_mK".into(), thermal::max_input_temperature_for_squeezing(f) * 1e3),
    ];
    for &t in at_kelvin {
        rows.push((format!("n_th_at_{t}K"), thermal::planck_occupation(f, t)));
    }
    let csv = csv_table(&["quantity", "value"], rows.iter().map(|(k, v)| vec![k.clone(), sig9(*v)]));
    print!("{csv}");
    if let Some(path) = output {
        let mut manifest = RunManifest::new("thresholds", None, None, timestamp);
        manifest.outputs = vec![path.display().to_string()];
        let table: serde_json::Map<String, serde_json::Value> =
            rows.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
        let doc = serde_json::json!({ "thresholds": table, "manifest": manifest });
        let mut out = Outputs::default();
        out.add(path, json_pretty(&doc)?);
        out.commit()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Reconstruction {
    samples: usize,
    squeezing_db: f64,
    covariance: Vec<Vec<f64>>,
}

/// Sample covariance of the signal-mode quadratures and the squeezing level it
/// implies.
fn reconstruct(state: &GaussianState<f64>, mode: usize, samples: usize, seed: u64) -> Result<Reconstruction, CliError> {
    let draws = sample_quadratures(state, samples, seed)?;
    let idx = [2 * mode, 2 * mode + 1];
    let n = draws.count() as f64;
    let mut mean = [0.0; 2];
    for rec in draws.records() {
        for (m, &i) in mean.iter_mut().zip(&idx) {
            *m += rec[i] / n;
        }
    }
    let mut cov = [[0.0; 2]; 2];
    for rec in draws.records() {
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += (rec[idx[a]] - mean[a]) * (rec[idx[b]] - mean[b]) / (n - 1.0);
            }
        }
    }
    let tr = cov[0][0] + cov[1][1];
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let min_var = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
    Ok(Reconstruction {
        samples,
        squeezing_db: -10.0 * (4.0 * min_var).log10(),
        covariance: cov.iter().map(|r| r.to_vec()).collect(),
    })
}

#[derive(Serialize)]
struct TapOutput<'a> {
    #[serde(flatten)]
    result: &'a network::TapResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconstruction: Option<Reconstruction>,
}

#[derive(Serialize)]
struct TransferOutput<'a> {
    temperatures: &'a network::Temperatures,
    cable_photons: f64,
    chain: &'a [network::Stage],
    taps: Vec<TapOutput<'a>>,
}

pub fn transfer(config: &Path, out_dir: &Path, samples: usize, seed: u64, timestamp: &str) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let exp = cfg.experiment()?;
    let heat = heat_model(&cfg)?;
    let result = network::run_transfer(exp, heat.as_ref())?;

    let mut taps = Vec::with_capacity(result.taps.len());
    for t in &result.taps {
        let reconstruction = if samples > 0 {
            let state = GaussianState::new(t.displacement.clone(), Matrix::from_rows(&t.covariance).ok_or_else(|| CliError::input("ragged covariance"))?)?;
            Some(reconstruct(&state, t.signal_mode, samples, seed)?)
        } else {
            None
        };
        taps.push(TapOutput { result: t, reconstruction });
    }

    let mut header = vec![
        "tap".to_string(),
        "signal_mode".into(),
        "squeezing_dB".into(),
        "signal_purity".into(),
        "purity".into(),
        "negativity".into(),
    ];
    for i in 0..4 {
        for j in i..4 {
            header.push(format!("v{}{}", i + 1, j + 1));
        }
    }
    if samples > 0 {
        header.push("squeezing_reconstructed_dB".into());
    }
    let rows = taps.iter().map(|t| {
        let r = t.result;
        let mut row = vec![
            r.tap.name().to_string(),
            r.signal_mode.to_string(),
            sig9(r.squeezing_db),
            sig9(r.signal_purity),
            sig9(r.report.purity),
            sig9(r.report.negativity),
        ];
        for i in 0..4 {
            for j in i..4 {
                row.push(sig9(r.covariance[i][j]));
            }
        }
        if let Some(rec) = &t.reconstruction {
            row.push(sig9(rec.squeezing_db));
        }
        row
    });
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = csv_table(&header_refs, rows);

    ensure_dir(out_dir)?;
    let json_path = out_dir.join("transfer.json");
    let csv_path = out_dir.join("transfer.csv");
    let mut manifest = RunManifest::new("transfer", Some(config), (samples > 0).then_some(seed), timestamp);
    manifest.outputs = vec![json_path.display().to_string(), csv_path.display().to_string()];
    let body = TransferOutput {
        temperatures: &result.temperatures,
        cable_photons: result.cable_photons,
        chain: &result.chain,
        taps,
    };
    let json = json_pretty(&WithManifest {
        body: &body,
        manifest: &manifest,
    })?;
    let mut out = Outputs::default();
    out.add(&json_path, json);
    out.add(&csv_path, csv);
    out.add(sidecar_path(&csv_path), json_pretty(&manifest)?);
    out.commit()
}

fn parse_temperature_list(list: &str) -> Result<Vec<f64>, CliError> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::input(format!("--t-center-k: `{s}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::input("--t-center-k: empty temperature list"));
    }
    Ok(values)
}

pub fn sweep(config: &Path, t_center_k: Option<&str>, output: Option<&Path>, timestamp: &str) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let exp = cfg.experiment()?;
    let values = match t_center_k {
        Some(list) => parse_temperature_list(list)?,
        None => exp
            .sweep
            .as_ref()
            .map(|s| s.center_temperatures_k.clone())
            .ok_or_else(|| CliError::input("no [experiment.sweep] section and no --t-center-k"))?,
    };
    let heat = heat_model(&cfg)?;
    let result = network::sweep_center_temperature(exp, &values, heat.as_ref())?;
    let csv = csv_table(
        &network::SweepResult::COLUMNS,
        result.rows.iter().map(|r| r.values().iter().map(|&v| sig9(v)).collect()),
    );
    emit(csv, output, RunManifest::new("sweep", Some(config), None, timestamp))
}

pub fn heat(config: &Path, output: Option<&Path>, calibrate_center_k: Option<f64>, timestamp: &str) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let mut model = cfg.heat()?.to_model()?;
    if let Some(target) = calibrate_center_k {
        if !(target.is_finite() && target > 0.0) {
            return Err(CliError::input("--calibrate-center-k must be positive"));
        }
        model = heatprofile::calibrate_radiative_load(&model, target)?;
        eprintln!("emissivity_perimeter_m = {}", sig9(model.emissivity_perimeter));
    }
    let profile = heatprofile::solve_profile(&model)?;
    let csv = csv_table(
        &["position_m", "temperature_K"],
        profile
            .positions
            .iter()
            .zip(&profile.temperatures)
            .map(|(&x, &t)| vec![sig9(x), sig9(t)]),
    );
    emit(csv, output, RunManifest::new("heat", Some(config), None, timestamp))
}

/// Parses two whitespace- or comma-separated numeric columns. `#` starts a
/// comment; a non-numeric first data line is taken as a header.
pub fn parse_fit_data(text: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut first = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|s| s.parse().ok()).collect();
        let is_header = first && parsed.is_none();
        first = false;
        if is_header {
            continue;
        }
        match parsed.as_deref() {
            Some([x, y]) if x.is_finite() && y.is_finite() => {
                xs.push(*x);
                ys.push(*y);
            }
            _ => {
                return Err(CliError::input(format!(
                    "line {}: expected two numeric columns, got `{}`",
                    lineno + 1,
                    raw.trim()
                )))
            }
        }
    }
    Ok((xs, ys))
}

#[derive(Serialize)]
struct FitOutput {
    a: f64,
    b_k: f64,
    c: f64,
    residual_k: f64,
    n_points: usize,
}

pub fn fit(data: &Path, output: Option<&Path>, timestamp: &str) -> Result<(), CliError> {
    let text = fs::read_to_string(data).map_err(|e| CliError::input(format!("reading {}: {e}", data.display())))?;
    let (xs, ys) = parse_fit_data(&text)?;
    let f: ResponseFit<f64> = heatprofile::fit_response(&xs, &ys)?;
    let body = FitOutput {
        a: f.a,
        b_k: f.b,
        c: f.c,
        residual_k: f.residual,
        n_points: xs.len(),
    };
    let mut manifest = RunManifest::new("fit", Some(data), None, timestamp);
    if let Some(p) = output {
        manifest.outputs = vec![p.display().to_string()];
    }
    let json = json_pretty(&WithManifest {
        body: &body,
        manifest: &manifest,
    })?;
    match output {
        None => {
            print!("{json}");
            Ok(())
        }
        Some(p) => {
            let mut out = Outputs::default();
            out.add(p, json);
            out.commit()
        }
    }
}

pub fn calibrate(
    config: &Path,
    target_s_db: f64,
    target_negativity: f64,
    output: Option<&Path>,
    timestamp: &str,
) -> Result<(), CliError> {
    if !(target_s_db.is_finite() && target_s_db > 0.0 && target_negativity.is_finite() && target_negativity > 0.0) {
        return Err(CliError::input("calibration targets must be positive"));
    }
    let cfg = load_config(config)?;
    let exp = cfg.experiment()?;
    let heat = heat_model(&cfg)?;
    let cal = network::calibrate_squeezer(exp, heat.as_ref(), target_s_db, target_negativity)?;
    let mut manifest = RunManifest::new("calibrate", Some(config), None, timestamp);
    if let Some(p) = output {
        manifest.outputs = vec![p.display().to_string()];
    }
    let json = json_pretty(&WithManifest {
        body: &cal,
        manifest: &manifest,
    })?;
    match output {
        None => {
            print!("{json}");
            Ok(())
        }
        Some(p) => {
            let mut out = Outputs::default();
            out.add(p, json);
            out.commit()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_data_header_and_comments() {
        let (x, y) = parse_fit_data("# T data\nt_center,t\n0.1, 0.2\n0.5 0.7 # inline\n\n").unwrap();
        assert_eq!(x, [0.1, 0.5]);
        assert_eq!(y, [0.2, 0.7]);
    }

    #[test]
    fn fit_data_bad_row_names_line() {
        let err = parse_fit_data("0.1,0.2\n0.2,abc\n").unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("line 2"), "{}", err.message);
        assert!(parse_fit_data("0.1,0.2,0.3\n").is_err());
    }

    #[test]
    fn temperature_list() {
        assert_eq!(parse_temperature_list("0.1, 0.2,0.3").unwrap(), [0.1, 0.2, 0.3]);
        assert!(parse_temperature_list("").is_err());
        assert!(parse_temperature_list(" , ").is_err());
        assert!(parse_temperature_list("0.1,x").is_err());
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = parse_config("schema_version = 1\n[heat]\nlenght_m = 6.0\n").unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("heat"), "{}", err.message);
    }
}
