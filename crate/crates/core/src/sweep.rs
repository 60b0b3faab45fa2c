//! Adiabaticity bound and constant-speed sweep schedules.
//!
//! Sweep speeds are detuning rates in µeV/ns; inverse speeds in ns/µeV.

use crate::error::{Error, Result};
use crate::exec::{map_indexed, try_map_indexed, Execution};
use crate::spectra::{eigendecompose, BranchTrace, DEGENERACY_TOL};
use crate::CVector;

/// Landau-Zener probability for a gap `gap` (µeV) swept at `speed` (µeV/ns).
pub fn landau_zener(gap: f64, speed: f64, hbar: f64) -> f64 {
    if gap == 0.0 {
        return 1.0;
    }
    if speed <= 0.0 {
        return 0.0;
    }
    (-2.0 * std::f64::consts::PI * (0.5 * gap).powi(2) / (hbar * speed)).exp()
}

/// Gap for which [`landau_zener`] returns `p` at `speed`.
pub fn landau_zener_gap(p: f64, speed: f64, hbar: f64) -> f64 {
    2.0 * (-p.ln() * hbar * speed / (2.0 * std::f64::consts::PI)).sqrt()
}

fn sum_over(
    states: &[(f64, &CVector)],
    n: usize,
    dh: &crate::hamiltonians::HermitianMatrix,
    hbar: f64,
    eps: f64,
) -> Result<f64> {
    let (en, vn) = states[n];
    let dv = dh.matrix() * vn;
    let mut s = 0.0;
    for (m, &(em, vm)) in states.iter().enumerate() {
        if m == n {
            continue;
        }
        let c = vm.dotc(&dv).norm();
        let w = en - em;
        if w.abs() < DEGENERACY_TOL {
            if c > 1e-12 {
                return Err(Error::Singularity { eps, a: n, b: m });
            }
            continue;
        }
        s += hbar * c / (w * w);
    }
    Ok(s)
}

/// `Σ_{m≠n} ħ |⟨m|∂H/∂ε|n⟩| / (E_n − E_m)²` at node `i`, over the branches
/// in the same decoupled block as `branch` (ns/µeV).
pub fn adiabaticity_sum(trace: &BranchTrace, branch: usize, i: usize, hbar: f64) -> Result<f64> {
    let block = trace.branches[branch].block;
    let members: Vec<usize> =
        (0..trace.branches.len()).filter(|&b| trace.branches[b].block == block).collect();
    let states: Vec<(f64, &CVector)> = members
        .iter()
        .map(|&b| (trace.branches[b].energies[i], &trace.branches[b].states[i]))
        .collect();
    let n = members.iter().position(|&b| b == branch).expect("branch in its own block");
    sum_over(&states, n, trace.family().dh_deps(), hbar, trace.grid[i])
}

/// [`adiabaticity_sum`] at an arbitrary detuning inside the grid.
pub fn adiabaticity_sum_at(trace: &BranchTrace, branch: usize, eps: f64, hbar: f64) -> Result<f64> {
    if let Some(i) = trace.node(eps) {
        return adiabaticity_sum(trace, branch, i, hbar);
    }
    let sys = eigendecompose(&trace.family().at(eps))?;
    let i = trace.window(f64::NEG_INFINITY, eps).end.saturating_sub(1);
    let (_, v) = trace.match_into(branch, i, eps, &sys)?;
    let block = trace.branches[branch].block;
    let mut states: Vec<(f64, &CVector)> = Vec::new();
    let mut n = 0;
    let mut best = -1.0;
    for k in 0..sys.len() {
        if sys.blocks[k] != block {
            continue;
        }
        let o = sys.vectors[k].dotc(&v).norm();
        if o > best {
            best = o;
            n = states.len();
        }
        states.push((sys.values[k], &sys.vectors[k]));
    }
    sum_over(&states, n, trace.family().dh_deps(), hbar, eps)
}

/// Inverse of the maximal adiabatic sweep speed (ns/µeV) for a target
/// Landau-Zener probability.
pub fn inverse_speed_from_sum(sum: f64, p_lz: f64) -> f64 {
    -(4.0 * p_lz.ln() / std::f64::consts::PI) * sum
}

/// Maximal sweep speed (µeV/ns) on `branch` at node `i`.
pub fn max_sweep_speed(trace: &BranchTrace, branch: usize, i: usize, p_lz: f64, hbar: f64) -> Result<f64> {
    Ok(1.0 / inverse_speed_from_sum(adiabaticity_sum(trace, branch, i, hbar)?, p_lz))
}

/// Inverse speed (ns/µeV) on `branch` at every node.
pub fn inverse_speed_profile(
    trace: &BranchTrace,
    branch: usize,
    p_lz: f64,
    hbar: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    try_map_indexed(trace.grid.len(), exec, |i| {
        Ok(inverse_speed_from_sum(adiabaticity_sum(trace, branch, i, hbar)?, p_lz))
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSegment {
    pub start: f64,
    pub end: f64,
    /// µeV/ns.
    pub speed: f64,
}

impl SweepSegment {
    pub fn duration(&self) -> f64 {
        (self.end - self.start).abs() / self.speed
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepEvent {
    Excitation { eps: f64 },
    Drive { eps: f64, duration: f64 },
}

/// Where the bound on the speed was set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bottleneck {
    pub eps: f64,
    pub branch: usize,
    /// ns/µeV.
    pub inverse_speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSchedule {
    pub segments: Vec<SweepSegment>,
    pub events: Vec<SweepEvent>,
    pub bottleneck: Bottleneck,
}

impl SweepSchedule {
    /// Total sweep time (ns), excluding holds.
    pub fn transfer_time(&self) -> f64 {
        self.segments.iter().map(SweepSegment::duration).sum()
    }

    pub fn speed(&self) -> f64 {
        self.segments.first().map_or(f64::INFINITY, |s| s.speed)
    }

    /// Detuning at time `t` measured from the start of the first segment,
    /// with drive holds inserted at their detuning.
    pub fn detuning_at(&self, t: f64) -> f64 {
        let mut clock = 0.0;
        for seg in &self.segments {
            let d = seg.duration();
            if t <= clock + d {
                let s = if d > 0.0 { (t - clock) / d } else { 1.0 };
                return seg.start + (seg.end - seg.start) * s;
            }
            clock += d;
            for ev in &self.events {
                if let SweepEvent::Drive { eps, duration } = *ev {
                    if (eps - seg.end).abs() < 1e-9 {
                        if t <= clock + duration {
                            return eps;
                        }
                        clock += duration;
                    }
                }
            }
        }
        self.segments.last().map_or(f64::NAN, |s| s.end)
    }
}

/// Plans one constant-speed sweep over `window`, split into segments at
/// `breakpoints`.
///
/// The speed is the smallest adiabatic speed over all listed branches at
/// every grid node in the window and at both window edges.
pub fn plan_sweep(
    trace: &BranchTrace,
    branches: &[usize],
    window: (f64, f64),
    p_lz: f64,
    breakpoints: &[f64],
    hbar: f64,
) -> Result<SweepSchedule> {
    let (start, stop) = window;
    let (lo, hi) = (trace.grid[0], *trace.grid.last().expect("non-empty grid"));
    if !(start <= stop) || start < lo - 1e-9 || stop > hi + 1e-9 || branches.is_empty() {
        return Err(Error::EmptyWindow { start, stop });
    }
    let nodes = trace.window(start, stop);
    let mut points: Vec<f64> = trace.grid[nodes].to_vec();
    for e in [start, stop] {
        if trace.node(e).is_none() {
            points.push(e);
        }
    }
    let jobs: Vec<(usize, f64)> =
        branches.iter().flat_map(|&b| points.iter().map(move |&e| (b, e))).collect();
    let sums = map_indexed(jobs.len(), Execution::default(), |k| {
        let (b, e) = jobs[k];
        adiabaticity_sum_at(trace, b, e, hbar).map(|s| (b, e, inverse_speed_from_sum(s, p_lz)))
    });
    let mut bottleneck = Bottleneck { eps: start, branch: branches[0], inverse_speed: 0.0 };
    for r in sums {
        let (b, e, inv) = r?;
        if inv > bottleneck.inverse_speed {
            bottleneck = Bottleneck { eps: e, branch: b, inverse_speed: inv };
        }
    }
    if !(bottleneck.inverse_speed > 0.0) {
        return Err(Error::invalid("window", "no adiabatic constraint found; branches are uncoupled"));
    }
    let speed = 1.0 / bottleneck.inverse_speed;
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > start && b < stop).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![start];
    edges.extend(cuts);
    edges.push(stop);
    let segments =
        edges.windows(2).map(|w| SweepSegment { start: w[0], end: w[1], speed }).collect();
    Ok(SweepSchedule { segments, events: vec![SweepEvent::Excitation { eps: start }], bottleneck })
}
