use std::error::Error as StdError;

use qdtransfer::config::parse_config_with;
use qdtransfer::exec::{map_indexed, Execution};
use qdtransfer::params::ProtocolKind;
use qdtransfer::protocol::{run, single_spin_family, singlet_triplet_family};
use qdtransfer::report;
use qdtransfer::spectra::{track_branches, TrackOptions};
use qdtransfer::{DeviceParams, ProtocolConfig};

use crate::manifest::RunManifest;
use crate::ModelArgs;

pub type CliResult = Result<bool, Box<dyn StdError + Send + Sync>>;

pub fn parse_grid(s: &str) -> Result<[String; 3], String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [a, b, c] if !a.is_empty() && !b.is_empty() && !c.is_empty() => {
            Ok([a.to_string(), b.to_string(), c.to_string()])
        }
        _ => Err(format!("expected `start:stop:step`, got `{s}`")),
    }
}

pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected `key=value`, got `{s}`"))?;
    if k.trim().is_empty() {
        return Err(format!("missing key in `{s}`"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn overrides(m: &ModelArgs) -> Vec<(String, String)> {
    let mut o = Vec::new();
    let mut put = |k: &str, v: &Option<String>| {
        if let Some(v) = v {
            o.push((k.to_string(), v.clone()));
        }
    };
    put("protocol", &m.protocol);
    put("t_c", &m.tc);
    put("t_dd", &m.tdd);
    put("eps_dd", &m.epsdd);
    put("p_lz", &m.plz);
    if let Some([a, b, c]) = &m.grid {
        o.push(("grid_start".into(), a.clone()));
        o.push(("grid_stop".into(), b.clone()));
        o.push(("grid_step".into(), c.clone()));
    }
    o.extend(m.set.iter().cloned());
    o
}

pub fn load(m: &ModelArgs, extra: &[(String, String)]) -> qdtransfer::Result<(DeviceParams, ProtocolConfig)> {
    let text = match &m.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut o = overrides(m);
    o.extend(extra.iter().cloned());
    parse_config_with(&text, &o)
}

pub fn spectrum(m: &ModelArgs) -> CliResult {
    let (p, c) = load(m, &[])?;
    let family = match c.kind {
        ProtocolKind::SingleSpin => single_spin_family(&p),
        ProtocolKind::SingletTriplet => singlet_triplet_family(&p),
    };
    let trace = track_branches(&family, &c.grid.nodes(), TrackOptions::default())?;
    let meta = [
        ("protocol", c.kind.to_string()),
        ("t_c_ueV", p.t_c.to_string()),
        ("eps_dd_ueV", p.eps_dd.to_string()),
    ];
    let mut buf = Vec::new();
    report::write_spectrum(&trace, &meta, &mut buf)?;
    let mut manifest = RunManifest::new("spectrum", m.config.as_deref(), &m.out);
    manifest.emit("spectrum.csv", &buf)?;
    manifest.write()?;
    println!("wrote {} branches over {} nodes to {}", trace.branches.len(), trace.grid.len(), m.out.display());
    Ok(true)
}

pub fn budget(m: &ModelArgs) -> CliResult {
    let (p, c) = load(m, &[])?;
    let r = run(&p, &c)?;
    let text = report::budget_report(&r);
    let mut manifest = RunManifest::new("budget", m.config.as_deref(), &m.out);
    manifest.emit("budget.txt", text.as_bytes())?;
    let mut buf = Vec::new();
    report::write_inverse_speed(&r, &mut buf)?;
    manifest.emit("inverse_speed.csv", &buf)?;
    buf.clear();
    report::write_trajectory(&r, &mut buf)?;
    manifest.emit("trajectory.csv", &buf)?;
    if r.rabi.is_some() {
        buf.clear();
        report::write_rabi(&r, &mut buf)?;
        manifest.emit("rabi.csv", &buf)?;
    }
    manifest.write()?;
    print!("{text}");
    Ok(true)
}

pub const SCAN_COLUMNS: &[&str] = &[
    "param",
    "value",
    "transfer_time_ns",
    "p_lz",
    "p_rec_min",
    "p_rec_max",
    "p_deph",
    "p_rabi_leak",
    "p_rabi_fail",
    "p_success",
];

pub fn scan(m: &ModelArgs, param: &str, values: &[String]) -> CliResult {
    let values: Vec<&String> = values.iter().filter(|v| !v.trim().is_empty()).collect();
    if values.is_empty() {
        return Err("empty scan: give at least one value with --values".into());
    }
    let configs = values
        .iter()
        .map(|v| load(m, &[(param.to_string(), v.to_string())]))
        .collect::<qdtransfer::Result<Vec<_>>>()?;
    let runs = map_indexed(configs.len(), Execution::default(), |i| run(&configs[i].0, &configs[i].1));
    let mut out = format!("# scan: {param}\n{}\n", SCAN_COLUMNS.join(","));
    for (v, r) in values.iter().zip(runs) {
        let r = r?;
        let b = &r.budget;
        let opt = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
        out.push_str(&format!(
            "{param},{v},{},{},{},{},{},{},{},{}\n",
            r.schedule.transfer_time(),
            b.p_lz,
            b.p_rec.0,
            b.p_rec.1,
            b.p_deph,
            opt(b.p_rabi_leak),
            opt(b.p_rabi_fail),
            b.p_success
        ));
    }
    let mut manifest = RunManifest::new("scan", m.config.as_deref(), &m.out);
    manifest.emit("scan.csv", out.as_bytes())?;
    manifest.write()?;
    print!("{out}");
    Ok(true)
}
