//! CSV datasets and budget reports.
//!
//! Every CSV starts with `#`-prefixed metadata lines followed by one header
//! row. Energies are in µeV, times in ns, inverse speeds in ns/meV.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::error::Result;
use crate::exec::Execution;
use crate::lossmodels::{cumulative_dephasing, sensitivities, survival_curve, SegmentKind, Which};
use crate::protocol::ProtocolRun;
use crate::rabi::{choose_drive_amplitude, transition_profile};
use crate::spectra::BranchTrace;
use crate::sweep::inverse_speed_profile;

pub const SPECTRUM_COLUMNS: &[&str] = &["eps_ueV", "branch", "anchor", "energy_ueV", "bright", "vertical", "excitonic"];
pub const SPEED_COLUMNS: &[&str] = &["eps_ueV", "branch", "inverse_speed_ns_per_meV"];
pub const TRAJECTORY_COLUMNS: &[&str] =
    &["t_ns", "eps_ueV", "segment", "bright_psi1", "bright_psi2", "survival_psi1", "survival_psi2"];
pub const RABI_COLUMNS: &[&str] = &["eps_ueV", "lambda", "amplitude_ueV", "t_rabi_ns"];

fn header(w: &mut impl Write, meta: &[(&str, String)], columns: &[&str]) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}: {v}")?;
    }
    writeln!(w, "{}", columns.join(","))
}

pub fn write_spectrum(trace: &BranchTrace, meta: &[(&str, String)], w: &mut impl Write) -> io::Result<()> {
    header(w, meta, SPECTRUM_COLUMNS)?;
    for (i, eps) in trace.grid.iter().enumerate() {
        for (k, b) in trace.branches.iter().enumerate() {
            writeln!(
                w,
                "{eps},{k},{},{},{},{},{}",
                b.anchor, b.energies[i], b.bright[i], b.vertical[i], b.excitonic[i]
            )?;
        }
    }
    Ok(())
}

/// Inverse adiabatic speed of the protocol branches over the sweep window.
pub fn write_inverse_speed(run: &ProtocolRun, w: &mut impl Write) -> Result<()> {
    let mut branches = vec![run.psi1, run.psi2];
    branches.extend(run.psi2_driven);
    let range = run.trace.window(run.eps_ep, run.config.final_detuning);
    let profiles = branches
        .iter()
        .map(|&b| inverse_speed_profile(&run.trace, b, run.config.p_lz, run.params.hbar, Execution::default()))
        .collect::<Result<Vec<_>>>()?;
    header(
        w,
        &[
            ("protocol", run.kind.to_string()),
            ("p_lz", run.config.p_lz.to_string()),
            ("bottleneck_eps_ueV", run.schedule.bottleneck.eps.to_string()),
        ],
        SPEED_COLUMNS,
    )?;
    for i in range {
        for (b, prof) in branches.iter().zip(&profiles) {
            writeln!(w, "{},{b},{}", run.trace.grid[i], prof[i] * 1e3)?;
        }
    }
    Ok(())
}

fn segment_name(k: SegmentKind) -> &'static str {
    match k {
        SegmentKind::Sweep => "sweep",
        SegmentKind::Hold => "hold",
        SegmentKind::Rabi => "rabi",
    }
}

/// Recombination and dephasing along the trajectory. One column of
/// accumulated phase variance per noise source follows the fixed columns.
pub fn write_trajectory(run: &ProtocolRun, w: &mut impl Write) -> io::Result<()> {
    let traj = &run.trajectory;
    let tau = run.params.tau;
    let bc1 = traj.bright_content(Which::Psi1);
    let bc2 = traj.bright_content(Which::Psi2);
    let s1 = survival_curve(traj, Which::Psi1, tau);
    let s2 = survival_curve(traj, Which::Psi2, tau);
    let chi = sensitivities(traj, &run.noise);
    let deph = cumulative_dephasing(traj, &run.noise, &run.params);
    let mut cols: Vec<String> = TRAJECTORY_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend(chi.iter().map(|(s, _)| format!("chi_{}", s.name())));
    cols.extend(deph.iter().map(|(s, _)| format!("var_{}", s.name())));
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    header(w, &[("protocol", run.kind.to_string()), ("tau_ns", tau.to_string())], &refs)?;
    for (k, n) in traj.nodes.iter().enumerate() {
        write!(w, "{},{},{},{},{},{},{}", n.t, n.eps, segment_name(n.kind), bc1[k], bc2[k], s1[k], s2[k])?;
        for (_, c) in &chi {
            write!(w, ",{}", c[k])?;
        }
        for (_, v) in &deph {
            write!(w, ",{}", v[k])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Transition element and candidate π-pulse durations over the drive window.
pub fn write_rabi(run: &ProtocolRun, w: &mut impl Write) -> Result<()> {
    let Some(rabi) = &run.rabi else { return Ok(()) };
    let b = rabi.pulse.branches;
    let lambda = transition_profile(&run.trace, b.t_plus, b.singlet);
    let (lo, hi) = run.config.drive_window;
    header(
        w,
        &[
            ("eps_star_ueV", rabi.pulse.eps_star.to_string()),
            ("omega_d_rad_per_ns", rabi.pulse.omega_d.to_string()),
            ("leakage", rabi.leakage.to_string()),
        ],
        RABI_COLUMNS,
    )?;
    for i in run.trace.window(lo, hi) {
        let amp = if lambda[i] > 0.0 {
            choose_drive_amplitude(&run.trace.grid, &lambda, i, run.config.lambda_tolerance)?
        } else {
            0.0
        };
        let t = if amp > 0.0 { std::f64::consts::PI * run.params.hbar / (amp * lambda[i]) } else { f64::INFINITY };
        writeln!(w, "{},{},{amp},{t}", run.trace.grid[i], lambda[i])?;
    }
    Ok(())
}

fn pct(v: f64) -> String {
    format!("{:.2} %", 100.0 * v)
}

/// Human-readable budget followed by a `key = value` block.
pub fn budget_report(run: &ProtocolRun) -> String {
    let b = &run.budget;
    let s = &run.schedule;
    let mut out = String::new();
    let _ = writeln!(out, "protocol            {}", run.kind);
    let _ = writeln!(out, "excitation point    {:.2} µeV", run.eps_ep);
    let _ = writeln!(out, "sweep speed         {:.3} meV/ns", s.speed() * 1e-3);
    let _ = writeln!(out, "transfer time       {:.4} ns", s.transfer_time());
    if let Some(r) = &run.rabi {
        let _ = writeln!(out, "drive point         {:.2} µeV", r.pulse.eps_star);
        let _ = writeln!(out, "drive amplitude     {:.2} µeV", r.pulse.amplitude);
        let _ = writeln!(out, "drive frequency     {:.3} rad/ns", r.pulse.omega_d);
        let _ = writeln!(out, "pi-pulse duration   {:.4} ns", r.pulse.duration);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Landau-Zener        {}", pct(b.p_lz));
    let _ = writeln!(out, "recombination       {} - {}", pct(b.p_rec.0), pct(b.p_rec.1));
    let _ = writeln!(out, "dephasing           {}", pct(b.p_deph));
    if let Some(v) = b.p_rabi_leak {
        let _ = writeln!(out, "Rabi leakage        {}", pct(v));
    }
    if let Some(v) = b.p_rabi_fail {
        let _ = writeln!(out, "Rabi failure        {}", pct(v));
    }
    let _ = writeln!(out, "success            > {}", pct(b.p_success));
    let _ = writeln!(out);
    for (k, v) in key_values(run) {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Machine-readable summary of a run.
pub fn key_values(run: &ProtocolRun) -> Vec<(String, String)> {
    let s = &run.schedule;
    let mut kv: Vec<(String, String)> = vec![
        ("protocol".into(), run.kind.to_string()),
        ("eps_ep_ueV".into(), run.eps_ep.to_string()),
        ("speed_ueV_per_ns".into(), s.speed().to_string()),
        ("inverse_speed_ns_per_meV".into(), (1e3 / s.speed()).to_string()),
        ("transfer_time_ns".into(), s.transfer_time().to_string()),
    ];
    for (k, seg) in s.segments.iter().enumerate() {
        kv.push((format!("segment{k}_ns"), seg.duration().to_string()));
    }
    if let Some(r) = &run.rabi {
        kv.push(("eps_star_ueV".into(), r.pulse.eps_star.to_string()));
        kv.push(("drive_amplitude_ueV".into(), r.pulse.amplitude.to_string()));
        kv.push(("omega_d_rad_per_ns".into(), r.pulse.omega_d.to_string()));
        kv.push(("t_rabi_ns".into(), r.pulse.duration.to_string()));
    }
    for (src, v) in &run.dephasing.contributions {
        kv.push((format!("variance_{}", src.name()), v.to_string()));
    }
    if let Some(r) = &run.rabi {
        for (name, v) in &r.failure.contributions {
            kv.push((format!("rabi_fail_{name}"), v.to_string()));
        }
    }
    for (k, v) in run.budget.rows() {
        kv.push((k.to_string(), v.to_string()));
    }
    kv
}
