//! Plain-text configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value ws* comment?
//! value   := number unit? | word
//! ```
//!
//! Numbers use Rust float syntax (`1.5`, `-2e3`). A bare number is read in the
//! internal unit of its key (µeV, T, ns, V, V²/Hz). Recognised suffixes:
//!
//! | dimension | suffixes |
//! |-----------|----------|
//! | energy    | `neV`, `ueV`, `µeV`, `meV`, `eV` |
//! | field     | `uT`, `µT`, `mT`, `T` |
//! | time      | `ps`, `ns`, `us`, `µs`, `s` |
//! | voltage   | `nV`, `uV`, `µV`, `mV`, `V` |
//! | density   | `V2/Hz`, `V^2/Hz`, `V²/Hz` |
//! | ratio     | `%`, and `/e` for the lever arm |
//!
//! Whitespace between number and suffix is allowed. Unknown keys, repeated
//! keys and suffixes of the wrong dimension are errors. Keys not present keep
//! their defaults.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{
    DeviceParams, ExcitationPoint, ProtocolConfig, ProtocolKind, SingletConvention,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dim {
    Energy,
    Field,
    Time,
    Voltage,
    Density,
    Ratio,
    LeverArm,
    Plain,
}

const ENERGY: &[(&str, f64)] =
    &[("neV", 1e-3), ("ueV", 1.0), ("µeV", 1.0), ("meV", 1e3), ("eV", 1e6)];
const FIELD: &[(&str, f64)] = &[("uT", 1e-6), ("µT", 1e-6), ("mT", 1e-3), ("T", 1.0)];
const TIME: &[(&str, f64)] = &[("ps", 1e-3), ("ns", 1.0), ("us", 1e3), ("µs", 1e3), ("s", 1e9)];
const VOLTAGE: &[(&str, f64)] =
    &[("nV", 1e-9), ("uV", 1e-6), ("µV", 1e-6), ("mV", 1e-3), ("V", 1.0)];
const DENSITY: &[(&str, f64)] = &[("V2/Hz", 1.0), ("V^2/Hz", 1.0), ("V²/Hz", 1.0)];
const RATIO: &[(&str, f64)] = &[("%", 1e-2)];
const LEVER: &[(&str, f64)] = &[("/e", 1.0)];

impl Dim {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dim::Energy => ENERGY,
            Dim::Field => FIELD,
            Dim::Time => TIME,
            Dim::Voltage => VOLTAGE,
            Dim::Density => DENSITY,
            Dim::Ratio => RATIO,
            Dim::LeverArm => LEVER,
            Dim::Plain => &[],
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Dim::Energy => "ueV",
            Dim::Field => "T",
            Dim::Time => "ns",
            Dim::Voltage => "V",
            Dim::Density => "V2/Hz",
            Dim::LeverArm => "/e",
            Dim::Ratio | Dim::Plain => "",
        }
    }
}

/// Parses a number with an optional unit suffix into the internal unit.
fn parse_quantity(raw: &str, dim: Dim) -> std::result::Result<f64, String> {
    let raw = raw.trim();
    let mut units: Vec<_> = dim.units().to_vec();
    units.sort_by_key(|(s, _)| std::cmp::Reverse(s.len()));
    for (suffix, scale) in units {
        if let Some(num) = raw.strip_suffix(suffix) {
            let num = num.trim_end();
            if let Ok(v) = num.parse::<f64>() {
                return Ok(v * scale);
            }
        }
    }
    raw.parse::<f64>().map_err(|_| {
        let allowed: Vec<_> = dim.units().iter().map(|(s, _)| *s).collect();
        if allowed.is_empty() {
            format!("expected a plain number, got `{raw}`")
        } else {
            format!("expected a number with optional unit ({}), got `{raw}`", allowed.join(", "))
        }
    })
}

fn dim_of(key: &str) -> Option<Dim> {
    use Dim::*;
    Some(match key {
        "delta0" | "delta1" | "delta2" | "t_c" | "t_dd" | "eps_dd" | "U" | "V_plus" | "V_minus" => {
            Energy
        }
        "grid_start" | "grid_stop" | "grid_step" | "eps_ep" | "eps_final" | "drive_start"
        | "drive_stop" => Energy,
        "B" | "B_of_rms" | "B_of_rms_tilde" => Field,
        "tau" | "rabi_dt" => Time,
        "eps_rms_gate" => Voltage,
        "S_eps_gate" => Density,
        "lever_arm" => LeverArm,
        "eta" | "p_lz" | "lambda_tolerance" | "vp_target" => Ratio,
        "g_e" | "g_h" | "g_e_tilde" | "hbar" | "mu_B" => Plain,
        _ => return None,
    })
}

const WORD_KEYS: &[&str] = &["protocol", "singlet_convention"];

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn tokenize(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, msg: format!("expected `key = value`, got `{content}`") });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Parse { line, msg: "missing key".into() });
        }
        if value.is_empty() {
            return Err(Error::Parse { line, msg: format!("missing value for `{key}`") });
        }
        if dim_of(key).is_none() && !WORD_KEYS.contains(&key) {
            return Err(Error::Parse { line, msg: format!("unknown key `{key}`") });
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(Error::Parse {
                line,
                msg: format!("`{key}` already set on line {}", prev.line),
            });
        }
        out.push(Entry { line, key: key.to_string(), value: value.to_string() });
    }
    Ok(out)
}

fn parse_convention(v: &str) -> Option<SingletConvention> {
    match v {
        "left-low" | "default" => Some(SingletConvention::LeftLowForNegative),
        "mirrored" => Some(SingletConvention::Mirrored),
        _ => None,
    }
}

fn convention_name(c: SingletConvention) -> &'static str {
    match c {
        SingletConvention::LeftLowForNegative => "left-low",
        SingletConvention::Mirrored => "mirrored",
    }
}

/// Sets one key on the records. `value` follows the file grammar.
pub fn set_key(p: &mut DeviceParams, c: &mut ProtocolConfig, key: &str, value: &str) -> Result<()> {
    if key == "protocol" {
        let kind: ProtocolKind = value.parse()?;
        if kind != c.kind {
            *c = ProtocolConfig::for_kind(kind);
        }
        return Ok(());
    }
    if key == "singlet_convention" {
        p.singlet_convention = parse_convention(value.trim()).ok_or_else(|| {
            Error::invalid(key, format!("expected `left-low` or `mirrored`, got `{value}`"))
        })?;
        return Ok(());
    }
    if key == "eps_ep" && value.trim().eq_ignore_ascii_case("auto") {
        c.excitation = ExcitationPoint::Auto;
        return Ok(());
    }
    let dim = dim_of(key).ok_or_else(|| Error::invalid(key, "unknown key"))?;
    let v = parse_quantity(value, dim).map_err(|m| Error::invalid(key, m))?;
    let slot: &mut f64 = match key {
        "delta0" => &mut p.delta0,
        "delta1" => &mut p.delta1,
        "delta2" => &mut p.delta2,
        "B" => &mut p.b_field,
        "g_e" => &mut p.g_e,
        "g_h" => &mut p.g_h,
        "g_e_tilde" => &mut p.g_e_tilde,
        "t_c" => &mut p.t_c,
        "tau" => &mut p.tau,
        "eps_rms_gate" => &mut p.eps_rms_gate,
        "S_eps_gate" => &mut p.s_eps_gate,
        "lever_arm" => &mut p.lever_arm,
        "B_of_rms" => &mut p.b_of_rms,
        "B_of_rms_tilde" => &mut p.b_of_rms_tilde,
        "eta" => &mut p.eta,
        "t_dd" => &mut p.t_dd,
        "eps_dd" => &mut p.eps_dd,
        "U" => &mut p.u,
        "V_plus" => &mut p.v_plus,
        "V_minus" => &mut p.v_minus,
        "hbar" => &mut p.hbar,
        "mu_B" => &mut p.mu_b,
        "grid_start" => &mut c.grid.start,
        "grid_stop" => &mut c.grid.stop,
        "grid_step" => &mut c.grid.step,
        "eps_final" => &mut c.final_detuning,
        "p_lz" => &mut c.p_lz,
        "drive_start" => &mut c.drive_window.0,
        "drive_stop" => &mut c.drive_window.1,
        "lambda_tolerance" => &mut c.lambda_tolerance,
        "vp_target" => &mut c.vp_target,
        "rabi_dt" => &mut c.rabi_time_step,
        "eps_ep" => {
            c.excitation = ExcitationPoint::Fixed(v);
            return Ok(());
        }
        _ => return Err(Error::invalid(key, "unknown key")),
    };
    *slot = v;
    Ok(())
}

/// Parses a configuration document, then applies `overrides` in order.
///
/// The `protocol` key is resolved first (overrides win) so that the protocol
/// defaults are in place before any other key is applied.
pub fn parse_config_with(
    text: &str,
    overrides: &[(String, String)],
) -> Result<(DeviceParams, ProtocolConfig)> {
    let mut entries = tokenize(text)?;
    entries.extend(overrides.iter().map(|(k, v)| Entry { line: 0, key: k.clone(), value: v.clone() }));
    let kind = match entries.iter().rev().find(|e| e.key == "protocol") {
        Some(e) => e.value.parse::<ProtocolKind>()?,
        None => ProtocolKind::SingleSpin,
    };
    let mut p = DeviceParams::default();
    let mut c = ProtocolConfig::for_kind(kind);
    for e in entries.iter().filter(|e| e.key != "protocol") {
        set_key(&mut p, &mut c, &e.key, &e.value).map_err(|err| match err {
            Error::Invalid { reason, .. } if e.line > 0 => {
                Error::Parse { line: e.line, msg: format!("`{}`: {reason}", e.key) }
            }
            other => other,
        })?;
    }
    p.validate()?;
    c.validate()?;
    Ok((p, c))
}

pub fn parse_config(text: &str) -> Result<(DeviceParams, ProtocolConfig)> {
    parse_config_with(text, &[])
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(DeviceParams, ProtocolConfig)> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Writes every field back in the file grammar. Numbers use the shortest
/// representation that parses back to the same `f64`.
pub fn serialize(p: &DeviceParams, c: &ProtocolConfig) -> String {
    let mut s = String::new();
    let mut put = |key: &str, v: f64| {
        let dim = dim_of(key).unwrap_or(Dim::Plain);
        let _ = writeln!(s, "{key} = {v:?}{}", dim.suffix());
    };
    put("delta0", p.delta0);
    put("delta1", p.delta1);
    put("delta2", p.delta2);
    put("B", p.b_field);
    put("g_e", p.g_e);
    put("g_h", p.g_h);
    put("g_e_tilde", p.g_e_tilde);
    put("t_c", p.t_c);
    put("tau", p.tau);
    put("eps_rms_gate", p.eps_rms_gate);
    put("S_eps_gate", p.s_eps_gate);
    put("lever_arm", p.lever_arm);
    put("B_of_rms", p.b_of_rms);
    put("B_of_rms_tilde", p.b_of_rms_tilde);
    put("eta", p.eta);
    put("t_dd", p.t_dd);
    put("eps_dd", p.eps_dd);
    put("U", p.u);
    put("V_plus", p.v_plus);
    put("V_minus", p.v_minus);
    put("hbar", p.hbar);
    put("mu_B", p.mu_b);
    put("grid_start", c.grid.start);
    put("grid_stop", c.grid.stop);
    put("grid_step", c.grid.step);
    if let ExcitationPoint::Fixed(ep) = c.excitation {
        put("eps_ep", ep);
    }
    put("eps_final", c.final_detuning);
    put("p_lz", c.p_lz);
    put("drive_start", c.drive_window.0);
    put("drive_stop", c.drive_window.1);
    put("lambda_tolerance", c.lambda_tolerance);
    put("vp_target", c.vp_target);
    put("rabi_dt", c.rabi_time_step);
    let _ = writeln!(s, "singlet_convention = {}", convention_name(p.singlet_convention));
    if c.excitation == ExcitationPoint::Auto {
        s.push_str("eps_ep = auto\n");
    }
    format!("protocol = {}\n{s}", c.kind)
}
