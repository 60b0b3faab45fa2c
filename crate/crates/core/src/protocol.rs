//! End-to-end transfer pipelines and the failure budget.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hamiltonians::{
    dd_dh_deps, dd_dh_deps_dd, overhauser_h, single_basis, single_electron_dh_deps, single_electron_h,
    subspace_basis, subspace_h, BasisState, FieldDeviation, Hole, HermitianMatrix, Spin, Subspace,
};
use crate::lossmodels::{
    dephasing_breakdown, recombination_probability, DephasingBreakdown, DephasingSource, FieldNoise,
    NoiseOperators, SegmentKind, Trajectory, TrajectoryNode, TrajectoryState, Which,
};
use crate::params::{DeviceParams, ExcitationPoint, ProtocolConfig, ProtocolKind};
use crate::rabi::{
    optimize_drive_point, rabi_failure_noise, rabi_propagate, rwa_hamiltonian, rwa_inputs, DriveBranches,
    RabiFailure, RabiNoiseSource, RabiPulse, RwaInputs,
};
use crate::spectra::{eigendecompose, track_branches, BranchTrace, DetuningFamily, TrackOptions};
use crate::sweep::{plan_sweep, SweepEvent, SweepSchedule};
use crate::{CVector, C64};

/// Worst-case failure budget of one transfer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailureBudget {
    pub p_lz: f64,
    /// Recombination probability of the two protocol states, `(min, max)`.
    pub p_rec: (f64, f64),
    pub p_deph: f64,
    pub p_rabi_leak: Option<f64>,
    pub p_rabi_fail: Option<f64>,
    pub p_success: f64,
}

impl FailureBudget {
    /// Sum of the worst-case failure terms.
    pub fn total_failure(&self) -> f64 {
        self.p_lz + self.p_rec.1 + self.p_deph + self.p_rabi_leak.unwrap_or(0.0) + self.p_rabi_fail.unwrap_or(0.0)
    }

    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let mut rows = vec![
            ("p_lz", self.p_lz),
            ("p_rec_min", self.p_rec.0),
            ("p_rec_max", self.p_rec.1),
            ("p_deph", self.p_deph),
        ];
        if let Some(v) = self.p_rabi_leak {
            rows.push(("p_rabi_leak", v));
        }
        if let Some(v) = self.p_rabi_fail {
            rows.push(("p_rabi_fail", v));
        }
        rows.push(("p_success", self.p_success));
        rows
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetParts {
    pub p_lz: f64,
    pub p_rec: [f64; 2],
    pub p_deph: f64,
    pub p_rabi_leak: Option<f64>,
    pub p_rabi_fail: Option<f64>,
}

/// Linear sum of worst-case terms.
pub fn assemble_budget(parts: BudgetParts) -> Result<FailureBudget> {
    let [a, b] = parts.p_rec;
    let terms = [Some(parts.p_lz), Some(a), Some(b), Some(parts.p_deph), parts.p_rabi_leak, parts.p_rabi_fail];
    for v in terms.into_iter().flatten() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid("budget", format!("failure term {v} outside [0, 1]")));
        }
    }
    let mut budget = FailureBudget {
        p_lz: parts.p_lz,
        p_rec: (a.min(b), a.max(b)),
        p_deph: parts.p_deph,
        p_rabi_leak: parts.p_rabi_leak,
        p_rabi_fail: parts.p_rabi_fail,
        p_success: 0.0,
    };
    budget.p_success = 1.0 - budget.total_failure();
    Ok(budget)
}

/// Drive results of the singlet-triplet protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct RabiSummary {
    pub pulse: RabiPulse,
    pub rwa: RwaInputs,
    pub transfer: f64,
    pub leakage: f64,
    pub failure: RabiFailure,
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub kind: ProtocolKind,
    pub params: DeviceParams,
    pub config: ProtocolConfig,
    pub trace: BranchTrace,
    pub psi1: usize,
    /// Branch holding Ψ₂ before the drive (the whole sweep without a drive).
    pub psi2: usize,
    /// Branch holding Ψ₂ after the drive.
    pub psi2_driven: Option<usize>,
    pub eps_ep: f64,
    pub schedule: SweepSchedule,
    pub trajectory: Trajectory,
    pub noise: NoiseOperators,
    pub recombination: [f64; 2],
    pub dephasing: DephasingBreakdown,
    pub rabi: Option<RabiSummary>,
    pub budget: FailureBudget,
}

impl ProtocolRun {
    /// Branch that `which` should occupy during sweep segment `segment`.
    pub fn target_branch(&self, which: Which, segment: usize) -> usize {
        match (which, self.psi2_driven) {
            (Which::Psi1, _) => self.psi1,
            (Which::Psi2, Some(s)) if segment > 0 => s,
            (Which::Psi2, _) => self.psi2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub exec: Execution,
}

pub fn single_spin_family(p: &DeviceParams) -> DetuningFamily {
    let q = p.clone();
    DetuningFamily::new(move |e| single_electron_h(&q, e), single_electron_dh_deps())
}

/// Double-dot family on the sector holding the transfer, at the held `ε_DD`.
pub fn singlet_triplet_family(p: &DeviceParams) -> DetuningFamily {
    let q = p.clone();
    let dh = dd_dh_deps(&subspace_basis(Subspace::One));
    DetuningFamily::new(move |e| subspace_h(&q, e, q.eps_dd, Subspace::One), dh)
}

fn track(family: &DetuningFamily, cfg: &ProtocolConfig, exec: Execution) -> Result<BranchTrace> {
    track_branches(family, &cfg.grid.nodes(), TrackOptions { exec, ..TrackOptions::default() })
}

fn noise_operators(p: &DeviceParams, kind: ProtocolKind, labels: &[BasisState]) -> NoiseOperators {
    match kind {
        ProtocolKind::SingleSpin => NoiseOperators {
            dh_deps: single_electron_dh_deps(),
            dh_deps_dd: None,
            fields: vec![
                FieldNoise {
                    source: DephasingSource::OverhauserOptical,
                    dh_db: overhauser_h(p, labels, FieldDeviation::SingleSpin { b_of: 1.0, b_gate: 0.0 }),
                    rms: p.b_of_rms,
                },
                FieldNoise {
                    source: DephasingSource::OverhauserGate,
                    dh_db: overhauser_h(p, labels, FieldDeviation::SingleSpin { b_of: 0.0, b_gate: 1.0 }),
                    rms: p.b_of_rms_tilde,
                },
            ],
        },
        ProtocolKind::SingletTriplet => {
            let dd = |b_of, b_left, b_right| {
                overhauser_h(p, labels, FieldDeviation::DoubleDot { b_of, b_left, b_right })
            };
            NoiseOperators {
                dh_deps: dd_dh_deps(labels),
                dh_deps_dd: Some(dd_dh_deps_dd(p, labels)),
                fields: vec![
                    FieldNoise {
                        source: DephasingSource::OverhauserOptical,
                        dh_db: dd(1.0, 0.0, 0.0),
                        rms: p.b_of_rms,
                    },
                    FieldNoise {
                        source: DephasingSource::OverhauserLeft,
                        dh_db: dd(0.0, 1.0, 0.0),
                        rms: p.b_of_rms_tilde,
                    },
                    FieldNoise {
                        source: DephasingSource::OverhauserRight,
                        dh_db: dd(0.0, 0.0, 1.0),
                        rms: p.b_of_rms_tilde,
                    },
                ],
            }
        }
    }
}

fn sweep_nodes(
    trace: &BranchTrace,
    branches: (usize, usize),
    start: f64,
    end: f64,
    t0: f64,
    speed: f64,
    dd_held: bool,
    include_start: bool,
) -> Result<Vec<TrajectoryNode>> {
    let mut eps: Vec<f64> = trace.grid[trace.window(start, end)].to_vec();
    if eps.first().map_or(true, |&e| (e - start).abs() > 1e-9) {
        eps.insert(0, start);
    }
    if eps.last().map_or(true, |&e| (e - end).abs() > 1e-9) {
        eps.push(end);
    }
    if !include_start {
        eps.remove(0);
    }
    eps.into_iter()
        .map(|e| {
            Ok(TrajectoryNode {
                t: t0 + (e - start) / speed,
                eps: e,
                kind: SegmentKind::Sweep,
                dd_held,
                psi1: TrajectoryState::pure(trace.state_at(branches.0, e)?.1),
                psi2: TrajectoryState::pure(trace.state_at(branches.1, e)?.1),
            })
        })
        .collect()
}

fn finish(
    p: &DeviceParams,
    cfg: &ProtocolConfig,
    trace: BranchTrace,
    (psi1, psi2, psi2_driven): (usize, usize, Option<usize>),
    eps_ep: f64,
    schedule: SweepSchedule,
    trajectory: Trajectory,
    rabi: Option<RabiSummary>,
) -> Result<ProtocolRun> {
    let noise = noise_operators(p, cfg.kind, &trajectory.labels);
    let recombination = [
        recombination_probability(&trajectory, Which::Psi1, p.tau)?,
        recombination_probability(&trajectory, Which::Psi2, p.tau)?,
    ];
    let dephasing = dephasing_breakdown(&trajectory, &noise, p)?;
    let budget = assemble_budget(BudgetParts {
        p_lz: cfg.p_lz,
        p_rec: recombination,
        p_deph: dephasing.p_fail,
        p_rabi_leak: rabi.as_ref().map(|r| r.leakage),
        p_rabi_fail: rabi.as_ref().map(|r| r.failure.total),
    })?;
    Ok(ProtocolRun {
        kind: cfg.kind,
        params: p.clone(),
        config: cfg.clone(),
        trace,
        psi1,
        psi2,
        psi2_driven,
        eps_ep,
        schedule,
        trajectory,
        noise,
        recombination,
        dephasing,
        rabi,
        budget,
    })
}

fn check(p: &DeviceParams, cfg: &ProtocolConfig, kind: ProtocolKind) -> Result<()> {
    p.validate()?;
    cfg.validate()?;
    if cfg.kind != kind {
        return Err(Error::invalid("protocol", format!("expected {kind}, got {}", cfg.kind)));
    }
    Ok(())
}

/// Single-spin transfer: `|◦↑⇑⟩ → |↑◦⇑⟩`, `|◦↓⇑⟩ → |↓◦⇑⟩` by one adiabatic sweep.
pub fn run_single_spin(p: &DeviceParams, cfg: &ProtocolConfig, opts: RunOptions) -> Result<ProtocolRun> {
    check(p, cfg, ProtocolKind::SingleSpin)?;
    let ExcitationPoint::Fixed(eps_ep) = cfg.excitation else {
        return Err(Error::invalid("eps_ep", "single-spin protocol needs a fixed excitation point"));
    };
    let trace = track(&single_spin_family(p), cfg, opts.exec)?;
    let psi1 = trace.branch_by_anchor(&BasisState::SingleExcitonic { e: Spin::Up, h: Hole::Up })?;
    let psi2 = trace.branch_by_anchor(&BasisState::SingleExcitonic { e: Spin::Down, h: Hole::Up })?;
    let window = (eps_ep, cfg.final_detuning);
    let schedule = plan_sweep(&trace, &[psi1, psi2], window, cfg.p_lz, &[], p.hbar)?;
    let nodes = sweep_nodes(&trace, (psi1, psi2), window.0, window.1, 0.0, schedule.speed(), false, true)?;
    let trajectory = Trajectory { labels: single_basis(), nodes };
    finish(p, cfg, trace, (psi1, psi2, None), eps_ep, schedule, trajectory, None)
}

/// Branches of the singlet-triplet protocol, identified at the grid start.
pub fn singlet_triplet_branches(trace: &BranchTrace) -> Result<DriveBranches> {
    use BasisState::DoubleExcitonic as Ex;
    Ok(DriveBranches {
        t_plus: trace.branch_by_anchor(&Ex { left: Spin::Up, e: Spin::Up, h: Hole::Down })?,
        singlet: trace.branch_by_anchor(&Ex { left: Spin::Down, e: Spin::Up, h: Hole::Up })?,
        t0: trace.branch_by_anchor(&Ex { left: Spin::Up, e: Spin::Down, h: Hole::Up })?,
    })
}

/// Bisection for `VP/ES = target` on `branch`, bracketed by the first sign
/// change along the grid.
pub fn solve_excitation_point(trace: &BranchTrace, branch: usize, target: f64) -> Result<f64> {
    let b = &trace.branches[branch];
    let f = |i: usize| {
        let w = b.excitonic[i];
        (if w > 0.0 { b.vertical[i] / w } else { 0.0 }) - target
    };
    let i = (1..trace.grid.len())
        .find(|&i| f(i - 1) < 0.0 && f(i) >= 0.0)
        .ok_or_else(|| Error::Root(format!("relative vertical polarization never reaches {target}")))?;
    let g = |eps: f64| -> Result<f64> {
        let (_, v) = trace.state_at(branch, eps)?;
        Ok(trace.observables(&v).vertical_relative() - target)
    };
    let (mut lo, mut hi) = (trace.grid[i - 1], trace.grid[i]);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenpair of `h` with the largest overlap with `reference`.
fn follow(h: &HermitianMatrix, refs: &[&CVector]) -> Result<Vec<(f64, CVector)>> {
    let sys = eigendecompose(h)?;
    Ok(refs
        .iter()
        .map(|r| {
            let k = (0..sys.len())
                .max_by(|&a, &b| r.dotc(&sys.vectors[a]).norm().total_cmp(&r.dotc(&sys.vectors[b]).norm()))
                .expect("non-empty spectrum");
            (sys.values[k], sys.vectors[k].clone())
        })
        .collect())
}

fn rabi_sources<'a>(
    p: &'a DeviceParams,
    trace: &'a BranchTrace,
    pulse: &'a RabiPulse,
    labels: &'a [BasisState],
) -> Vec<RabiNoiseSource<'a>> {
    let b = pulse.branches;
    let i = pulse.node;
    let dh = trace.family().dh_deps();
    let response = move |h: HermitianMatrix| -> Result<(f64, f64)> {
        let r = follow(&h, &[&trace.branches[b.t_plus].states[i], &trace.branches[b.singlet].states[i]])?;
        let omega = (r[1].0 - r[0].0) / p.hbar;
        let rabi = pulse.amplitude * dh.element(&r[1].1, &r[0].1).norm() / p.hbar;
        Ok((omega, rabi))
    };
    let at = move |d: f64| trace.family().at(pulse.eps_star + d);
    let noise = p.detuning_noise();
    let field = move |dev: FieldDeviation, d: f64| {
        trace.family().at(pulse.eps_star).plus(&overhauser_h(p, labels, dev).scaled(d))
    };
    vec![
        RabiNoiseSource { name: "eps", rms: noise.eps_rms, response: Box::new(move |d| response(at(d))) },
        RabiNoiseSource {
            name: "eps_dd",
            rms: noise.eps_rms,
            response: Box::new(move |d| response(subspace_h(p, pulse.eps_star, p.eps_dd + d, Subspace::One))),
        },
        RabiNoiseSource {
            name: "b_of",
            rms: p.b_of_rms,
            response: Box::new(move |d| {
                response(field(FieldDeviation::DoubleDot { b_of: 1.0, b_left: 0.0, b_right: 0.0 }, d))
            }),
        },
        RabiNoiseSource {
            name: "b_left",
            rms: p.b_of_rms_tilde,
            response: Box::new(move |d| {
                response(field(FieldDeviation::DoubleDot { b_of: 0.0, b_left: 1.0, b_right: 0.0 }, d))
            }),
        },
        RabiNoiseSource {
            name: "b_right",
            rms: p.b_of_rms_tilde,
            response: Box::new(move |d| {
                response(field(FieldDeviation::DoubleDot { b_of: 0.0, b_left: 0.0, b_right: 1.0 }, d))
            }),
        },
    ]
}

fn rabi_nodes(
    trace: &BranchTrace,
    branches: DriveBranches,
    pulse: &RabiPulse,
    t0: f64,
    dt: f64,
) -> Vec<TrajectoryNode> {
    let i = pulse.node;
    let tp = &trace.branches[branches.t_plus].states[i];
    let s = &trace.branches[branches.singlet].states[i];
    let t0_state = &trace.branches[branches.t0].states[i];
    let omega = pulse.rabi_frequency();
    let n = (pulse.duration / dt).ceil().max(1.0) as usize;
    (1..=n)
        .map(|k| {
            let tt = pulse.duration * k as f64 / n as f64;
            let (c, sn) = ((0.5 * omega * tt).cos(), (0.5 * omega * tt).sin());
            let psi = tp * C64::from_polar(c, pulse.omega_d * tt) + s * C64::new(sn, 0.0);
            TrajectoryNode {
                t: t0 + tt,
                eps: pulse.eps_star,
                kind: SegmentKind::Rabi,
                dd_held: true,
                psi1: TrajectoryState::pure(t0_state.clone()),
                psi2: TrajectoryState { psi, mixture: vec![(c * c, tp.clone()), (sn * sn, s.clone())] },
            }
        })
        .collect()
}

/// Singlet-triplet transfer: excitation at `ε_EP`, sweep to `ε*`, π-pulse
/// `T₊ → S`, sweep to the final detuning.
pub fn run_singlet_triplet(p: &DeviceParams, cfg: &ProtocolConfig, opts: RunOptions) -> Result<ProtocolRun> {
    check(p, cfg, ProtocolKind::SingletTriplet)?;
    let trace = track(&singlet_triplet_family(p), cfg, opts.exec)?;
    let br = singlet_triplet_branches(&trace)?;
    let eps_ep = match cfg.excitation {
        ExcitationPoint::Fixed(e) => e,
        ExcitationPoint::Auto => solve_excitation_point(&trace, br.singlet, cfg.vp_target)?,
    };
    let pulse = optimize_drive_point(&trace, br, cfg.drive_window, cfg.lambda_tolerance, p.hbar)?;
    if !(eps_ep < pulse.eps_star && pulse.eps_star < cfg.final_detuning) {
        return Err(Error::invalid(
            "drive_start",
            format!("drive point {} µeV outside ({eps_ep}, {})", pulse.eps_star, cfg.final_detuning),
        ));
    }
    let labels = subspace_basis(Subspace::One);
    let rwa = rwa_inputs(&trace, &pulse, p.hbar);
    let (_, outcome) = rabi_propagate(&rwa_hamiltonian(&rwa, p.hbar), pulse.duration, p.hbar)?;
    let failure = rabi_failure_noise(
        &rabi_sources(p, &trace, &pulse, &labels),
        pulse.rabi_frequency(),
        pulse.duration,
        opts.exec,
    )?;

    let window = (eps_ep, cfg.final_detuning);
    let mut schedule =
        plan_sweep(&trace, &[br.t_plus, br.singlet, br.t0], window, cfg.p_lz, &[pulse.eps_star], p.hbar)?;
    schedule.events.push(SweepEvent::Drive { eps: pulse.eps_star, duration: pulse.duration });
    let speed = schedule.speed();

    let mut nodes = sweep_nodes(&trace, (br.t0, br.t_plus), eps_ep, pulse.eps_star, 0.0, speed, true, true)?;
    let t1 = nodes.last().map_or(0.0, |n| n.t);
    nodes.extend(rabi_nodes(&trace, br, &pulse, t1, cfg.rabi_time_step));
    let t2 = t1 + pulse.duration;
    nodes.extend(sweep_nodes(&trace, (br.t0, br.singlet), pulse.eps_star, cfg.final_detuning, t2, speed, false, false)?);
    let trajectory = Trajectory { labels, nodes };

    let rabi = RabiSummary { pulse, rwa, transfer: outcome.transfer, leakage: outcome.leakage, failure };
    finish(p, cfg, trace, (br.t0, br.t_plus, Some(br.singlet)), eps_ep, schedule, trajectory, Some(rabi))
}

pub fn run(p: &DeviceParams, cfg: &ProtocolConfig) -> Result<ProtocolRun> {
    run_with(p, cfg, RunOptions::default())
}

pub fn run_with(p: &DeviceParams, cfg: &ProtocolConfig, opts: RunOptions) -> Result<ProtocolRun> {
    match cfg.kind {
        ProtocolKind::SingleSpin => run_single_spin(p, cfg, opts),
        ProtocolKind::SingletTriplet => run_singlet_triplet(p, cfg, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_additivity() {
        let b = assemble_budget(BudgetParts {
            p_lz: 0.01,
            p_rec: [0.08, 0.12],
            p_deph: 0.011,
            p_rabi_leak: Some(0.006),
            p_rabi_fail: Some(0.003),
        })
        .unwrap();
        assert_eq!(b.p_rec, (0.08, 0.12));
        assert!((b.p_success + b.total_failure() - 1.0).abs() == 0.0);
        assert!((b.p_success - 0.85).abs() < 1e-12);
    }

    #[test]
    fn zero_budget() {
        let b = assemble_budget(BudgetParts {
            p_lz: 0.0,
            p_rec: [0.0, 0.0],
            p_deph: 0.0,
            p_rabi_leak: None,
            p_rabi_fail: None,
        })
        .unwrap();
        assert_eq!(b.p_success, 1.0);
        assert_eq!(b.rows().len(), 5);
    }

    #[test]
    fn out_of_range_term() {
        let parts = BudgetParts { p_lz: 1.5, p_rec: [0.0, 0.0], p_deph: 0.0, p_rabi_leak: None, p_rabi_fail: None };
        assert!(assemble_budget(parts).is_err());
    }

    #[test]
    fn wrong_protocol_rejected() {
        let p = DeviceParams::default();
        let cfg = ProtocolConfig::singlet_triplet();
        assert!(run_single_spin(&p, &cfg, RunOptions::default()).is_err());
    }
}
