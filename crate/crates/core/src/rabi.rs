//! Drive-point selection, π-pulse design, three-level leakage and
//! noise-averaged transfer failure for the singlet-triplet protocol.

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::hamiltonians::{BasisState, HermitianMatrix};
use crate::quadrature::gauss_hermite;
use crate::spectra::{eigendecompose, BranchTrace, EigenSystem};
use crate::{CMatrix, C64};

/// Branches taking part in the drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DriveBranches {
    pub t_plus: usize,
    pub singlet: usize,
    pub t0: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RabiPulse {
    /// Drive point (µeV).
    pub eps_star: f64,
    /// Node index of the drive point in the trace.
    pub node: usize,
    /// Detuning modulation amplitude (µeV).
    pub amplitude: f64,
    /// Drive angular frequency (rad/ns), resonant with the S–T₊ splitting.
    pub omega_d: f64,
    /// π-pulse duration (ns).
    pub duration: f64,
    /// `|⟨S|∂H/∂ε|T₊⟩|` at the drive point.
    pub lambda: f64,
    pub branches: DriveBranches,
}

impl RabiPulse {
    /// Rabi angular frequency `Δε λ / ħ` (rad/ns).
    pub fn rabi_frequency(&self) -> f64 {
        std::f64::consts::PI / self.duration
    }
}

/// `|⟨a|∂H/∂ε|b⟩|` at node `i`.
pub fn transition_element(trace: &BranchTrace, a: usize, b: usize, i: usize) -> f64 {
    trace.coupling(a, b, i)
}

pub fn transition_profile(trace: &BranchTrace, a: usize, b: usize) -> Vec<f64> {
    (0..trace.grid.len()).map(|i| transition_element(trace, a, b, i)).collect()
}

/// Largest half-width `Δε` around node `i` such that every node within
/// `|ε' − ε| ≤ Δε` keeps `|λ(ε') − λ(ε)| ≤ tolerance · λ(ε)`. Capped by the
/// distance to the nearer end of the grid.
pub fn choose_drive_amplitude(grid: &[f64], lambda: &[f64], i: usize, tolerance: f64) -> Result<f64> {
    let l0 = lambda[i];
    if !(l0 > 0.0) {
        return Err(Error::NoDrive(format!("transition element vanishes at {} µeV", grid[i])));
    }
    let e0 = grid[i];
    let cap = (e0 - grid[0]).min(grid[grid.len() - 1] - e0);
    let violation = grid
        .iter()
        .zip(lambda)
        .filter(|(_, &l)| (l - l0).abs() > tolerance * l0)
        .map(|(&e, _)| (e - e0).abs())
        .fold(f64::INFINITY, f64::min);
    let best = grid
        .iter()
        .map(|&e| (e - e0).abs())
        .filter(|&d| d < violation && d <= cap)
        .fold(0.0, f64::max);
    Ok(best)
}

/// Two-level Rabi formula.
pub fn rabi_probability(delta: f64, omega: f64, t: f64) -> f64 {
    let w2 = omega * omega + delta * delta;
    if w2 == 0.0 {
        return 0.0;
    }
    omega * omega / w2 * (0.5 * w2.sqrt() * t).sin().powi(2)
}

/// Minimizes `T = πħ/(Δε λ)` over the nodes in `window`.
pub fn optimize_drive_point(
    trace: &BranchTrace,
    branches: DriveBranches,
    window: (f64, f64),
    tolerance: f64,
    hbar: f64,
) -> Result<RabiPulse> {
    let lambda = transition_profile(trace, branches.t_plus, branches.singlet);
    let range = trace.window(window.0, window.1);
    if range.is_empty() {
        return Err(Error::EmptyWindow { start: window.0, stop: window.1 });
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for i in range {
        if !(lambda[i] > 0.0) {
            continue;
        }
        let amp = choose_drive_amplitude(&trace.grid, &lambda, i, tolerance)?;
        if amp <= 0.0 {
            continue;
        }
        let t = std::f64::consts::PI * hbar / (amp * lambda[i]);
        if best.map_or(true, |b| t < b.0) {
            best = Some((t, i, amp));
        }
    }
    let (duration, i, amplitude) =
        best.ok_or_else(|| Error::NoDrive("drive amplitude is zero everywhere in the window".into()))?;
    let e_s = trace.branches[branches.singlet].energies[i];
    let e_t = trace.branches[branches.t_plus].energies[i];
    Ok(RabiPulse {
        eps_star: trace.grid[i],
        node: i,
        amplitude,
        omega_d: (e_s - e_t) / hbar,
        duration,
        lambda: lambda[i],
        branches,
    })
}

/// Frequencies entering the rotating-frame Hamiltonian (rad/ns).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaInputs {
    pub omega_s_tp: f64,
    pub omega_t0_tp: f64,
    pub omega_d: f64,
    pub rabi_s_tp: f64,
    pub rabi_tp_t0: f64,
}

pub fn rwa_inputs(trace: &BranchTrace, pulse: &RabiPulse, hbar: f64) -> RwaInputs {
    let b = pulse.branches;
    let i = pulse.node;
    let e = |k: usize| trace.branches[k].energies[i];
    RwaInputs {
        omega_s_tp: (e(b.singlet) - e(b.t_plus)) / hbar,
        omega_t0_tp: (e(b.t0) - e(b.t_plus)) / hbar,
        omega_d: pulse.omega_d,
        rabi_s_tp: pulse.amplitude * trace.coupling(b.singlet, b.t_plus, i) / hbar,
        rabi_tp_t0: pulse.amplitude * trace.coupling(b.t_plus, b.t0, i) / hbar,
    }
}

pub const RWA_LABELS: [BasisState; 3] =
    [BasisState::Level("S"), BasisState::Level("T+"), BasisState::Level("T0")];

/// Rotating-frame Hamiltonian on `(S, T₊, T₀)` (µeV):
///
/// ```text
/// ħ/2 · [[2(ω_ST₊ − ω_d), Ω_ST₊,            0              ],
///        [Ω_ST₊,          0,                Ω_T₊T₀         ],
///        [0,              Ω_T₊T₀,           2(ω_T₀T₊ + ω_d)]]
/// ```
pub fn rwa_hamiltonian(x: &RwaInputs, hbar: f64) -> HermitianMatrix {
    let mut h = HermitianMatrix::zeros(RWA_LABELS.to_vec());
    let r = |v: f64| C64::new(0.5 * hbar * v, 0.0);
    h.set(0, 0, r(2.0 * (x.omega_s_tp - x.omega_d)));
    h.set(2, 2, r(2.0 * (x.omega_t0_tp + x.omega_d)));
    h.set(0, 1, r(x.rabi_s_tp));
    h.set(1, 2, r(x.rabi_tp_t0));
    h
}

/// `exp(−i H t / ħ)` from the eigendecomposition of `H`.
pub fn unitary(h: &HermitianMatrix, t: f64, hbar: f64) -> Result<CMatrix> {
    let sys = eigendecompose(h)?;
    Ok(unitary_from(&sys, t, hbar))
}

pub(crate) fn unitary_from(sys: &EigenSystem, t: f64, hbar: f64) -> CMatrix {
    let n = sys.len();
    let mut u = CMatrix::zeros(n, n);
    for (k, v) in sys.vectors.iter().enumerate() {
        let phase = C64::from_polar(1.0, -sys.values[k] * t / hbar);
        u += v * v.adjoint() * phase;
    }
    u
}

/// Populations after a rectangular pulse starting in `T₊`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RabiOutcome {
    pub transfer: f64,
    pub leakage: f64,
}

pub fn rabi_propagate(h: &HermitianMatrix, duration: f64, hbar: f64) -> Result<(CMatrix, RabiOutcome)> {
    let u = unitary(h, duration, hbar)?;
    let out = RabiOutcome { transfer: u[(0, 1)].norm_sqr(), leakage: u[(2, 1)].norm_sqr() };
    Ok((u, out))
}

/// Response of the drive to a parameter deviation: returns the S–T₊
/// angular frequency and the Rabi frequency at the displaced point.
pub type Response<'a> = Box<dyn Fn(f64) -> Result<(f64, f64)> + Send + Sync + 'a>;

pub struct RabiNoiseSource<'a> {
    pub name: &'static str,
    pub rms: f64,
    pub response: Response<'a>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RabiFailure {
    pub contributions: Vec<(&'static str, f64)>,
    pub total: f64,
}

pub const QUADRATURE_NODES: usize = 21;
const CHECK_NODES: usize = 41;

fn average_failure(src: &RabiNoiseSource<'_>, omega0: f64, duration: f64, nodes: usize) -> Result<f64> {
    let h = 0.01 * src.rms;
    let slope = ((src.response)(h)?.0 - (src.response)(-h)?.0) / (2.0 * h);
    let _ = omega0;
    let (x, w) = gauss_hermite(nodes);
    let mut p = 0.0;
    for (xk, wk) in x.iter().zip(&w) {
        let dev = xk * src.rms;
        let (_, omega) = (src.response)(dev)?;
        p += wk * rabi_probability(slope * dev, omega, duration);
    }
    Ok(1.0 - p)
}

/// `Σ_s (1 − ⟨P_T₊→S⟩_s)` over independent quasi-static sources, each
/// averaged with Gauss-Hermite quadrature. Sources with zero rms contribute
/// zero.
pub fn rabi_failure_noise(
    sources: &[RabiNoiseSource<'_>],
    omega_rabi: f64,
    duration: f64,
    exec: Execution,
) -> Result<RabiFailure> {
    let contributions = try_map_indexed(sources.len(), exec, |k| {
        let s = &sources[k];
        if s.rms == 0.0 {
            return Ok((s.name, 0.0));
        }
        let p = average_failure(s, omega_rabi, duration, QUADRATURE_NODES)?;
        let check = average_failure(s, omega_rabi, duration, CHECK_NODES)?;
        if (p - check).abs() > 1e-4 {
            return Err(Error::Quadrature { diff: (p - check).abs() });
        }
        Ok((s.name, p))
    })?;
    let total = contributions.iter().map(|c| c.1).sum();
    Ok(RabiFailure { contributions, total })
}
