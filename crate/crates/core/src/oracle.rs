//! Brute-force time-dependent Schrödinger propagation.
//!
//! Piecewise-constant midpoint stepping: `ψ ← exp(−i H(t_mid) Δt/ħ) ψ`, with
//! every step exponentiated exactly through an eigendecomposition.

use crate::error::{Error, Result};
use crate::hamiltonians::{BasisState, HermitianMatrix};
use crate::lossmodels::Which;
use crate::protocol::ProtocolRun;
use crate::rabi::unitary_from;
use crate::spectra::eigendecompose;
use crate::sweep::SweepEvent;
use crate::{CVector, C64};

/// Allowed deviation of the state norm from one.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Default step for protocol propagation (ns).
pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub state: CVector,
    /// `|‖ψ‖ − 1|` after every step.
    pub norm_drift: Vec<f64>,
}

impl PropagationResult {
    pub fn max_drift(&self) -> f64 {
        self.norm_drift.iter().copied().fold(0.0, f64::max)
    }

    /// `|⟨target|ψ⟩|²`.
    pub fn fidelity(&self, target: &CVector) -> f64 {
        target.dotc(&self.state).norm_sqr()
    }
}

/// Propagates `psi0` across `t_grid` with the midpoint exponential.
pub fn propagate(
    h_of_t: impl Fn(f64) -> HermitianMatrix,
    psi0: &CVector,
    t_grid: &[f64],
    hbar: f64,
) -> Result<PropagationResult> {
    let norm = psi0.norm();
    if (norm - 1.0).abs() > NORM_DRIFT_LIMIT {
        return Err(Error::Unnormalized { node: 0, norm });
    }
    let mut psi = psi0.clone();
    let mut norm_drift = Vec::with_capacity(t_grid.len().saturating_sub(1));
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let sys = eigendecompose(&h_of_t(0.5 * (w[0] + w[1])))?;
        psi = unitary_from(&sys, dt, hbar) * psi;
        let drift = (psi.norm() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { drift, limit: NORM_DRIFT_LIMIT });
        }
        norm_drift.push(drift);
    }
    Ok(PropagationResult { state: psi, norm_drift })
}

/// Uniform grid of `steps` intervals on `[t0, t1]`.
pub fn uniform_grid(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    let n = steps.max(1);
    (0..=n).map(|k| if k == n { t1 } else { t0 + (t1 - t0) * k as f64 / n as f64 }).collect()
}

const LZ_LABELS: [BasisState; 2] = [BasisState::Level("a"), BasisState::Level("b")];

fn lz_hamiltonian(gap: f64, speed: f64, t: f64) -> HermitianMatrix {
    let mut h = HermitianMatrix::zeros(LZ_LABELS.to_vec());
    h.set(0, 0, C64::new(0.5 * speed * t, 0.0));
    h.set(1, 1, C64::new(-0.5 * speed * t, 0.0));
    h.set(0, 1, C64::new(0.5 * gap, 0.0));
    h
}

/// Diabatic-passage probability of `[[vt/2, Δ/2], [Δ/2, −vt/2]]` swept from
/// `vt = −span·Δ` to `+span·Δ`, measured in the adiabatic basis.
pub fn landau_zener_numeric(gap: f64, speed: f64, hbar: f64, span: f64, steps: usize) -> Result<f64> {
    let t1 = span * gap / speed;
    let start = eigendecompose(&lz_hamiltonian(gap, speed, -t1))?;
    let end = eigendecompose(&lz_hamiltonian(gap, speed, t1))?;
    let grid = uniform_grid(-t1, t1, steps);
    let r = propagate(|t| lz_hamiltonian(gap, speed, t), &start.vectors[0], &grid, hbar)?;
    Ok(1.0 - r.fidelity(&end.vectors[0]))
}

/// Probability that `which` ends on its target branch after the planned
/// sweep, propagated in the full protocol Hamiltonian.
///
/// The state is carried continuously through holds while its branch stays the
/// same. Where the drive hands it to another branch the drive is taken as
/// ideal: the next segment restarts from that branch, and the result is the
/// product of the per-branch fidelities.
pub fn transfer_fidelity(run: &ProtocolRun, which: Which, step: f64) -> Result<f64> {
    let family = run.trace.family();
    let hbar = run.params.hbar;
    let segments = &run.schedule.segments;
    let mut fidelity = 1.0;
    let mut psi: Option<CVector> = None;
    for (k, seg) in segments.iter().enumerate() {
        let branch = run.target_branch(which, k);
        let state = match psi.take() {
            Some(v) => v,
            None => run.trace.state_at(branch, seg.start)?.1,
        };
        let duration = seg.duration();
        let grid = uniform_grid(0.0, duration, (duration / step).ceil().max(1.0) as usize);
        let slope = (seg.end - seg.start) / duration;
        let mut r = propagate(|t| family.at(seg.start + slope * t), &state, &grid, hbar)?;
        let Some(next) = segments.get(k + 1) else {
            fidelity *= r.fidelity(&run.trace.state_at(branch, seg.end)?.1);
            break;
        };
        if run.target_branch(which, k + 1) != branch {
            fidelity *= r.fidelity(&run.trace.state_at(branch, seg.end)?.1);
            continue;
        }
        for ev in &run.schedule.events {
            if let SweepEvent::Drive { eps, duration } = *ev {
                if (eps - next.start).abs() < 1e-9 {
                    let hold = uniform_grid(0.0, duration, 1);
                    r = propagate(|_| family.at(eps), &r.state, &hold, hbar)?;
                }
            }
        }
        psi = Some(r.state);
    }
    Ok(fidelity)
}
