//! Radiative recombination and dephasing along an ideal trajectory.
//!
//! The two protocol states are followed on their noiseless branches; noise
//! enters only through first-order energy shifts of `ΔE₁₂ = E₂ − E₁`.
//! Integrals use the composite trapezoid rule on the trajectory's time grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hamiltonians::{BasisState, HermitianMatrix};
use crate::params::DeviceParams;
use crate::spectra::ObservableSet;
use crate::CVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Sweep,
    Hold,
    Rabi,
}

/// A protocol state at one instant.
///
/// `psi` is the instantaneous state; `mixture` lists branch states with their
/// populations and is used for energy derivatives. Outside a drive the
/// mixture is the single branch state with weight one.
#[derive(Clone, Debug)]
pub struct TrajectoryState {
    pub psi: CVector,
    pub mixture: Vec<(f64, CVector)>,
}

impl TrajectoryState {
    pub fn pure(v: CVector) -> Self {
        Self { mixture: vec![(1.0, v.clone())], psi: v }
    }

    /// Population-weighted expectation over the mixture.
    pub fn mixed_expectation(&self, op: &HermitianMatrix) -> f64 {
        self.mixture.iter().map(|(w, v)| w * op.expectation(v)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryNode {
    pub t: f64,
    pub eps: f64,
    pub kind: SegmentKind,
    /// Whether the double-dot detuning is still held (and so can fluctuate).
    pub dd_held: bool,
    pub psi1: TrajectoryState,
    pub psi2: TrajectoryState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Psi1,
    Psi2,
}

impl TrajectoryNode {
    pub fn state(&self, which: Which) -> &TrajectoryState {
        match which {
            Which::Psi1 => &self.psi1,
            Which::Psi2 => &self.psi2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub labels: Vec<BasisState>,
    pub nodes: Vec<TrajectoryNode>,
}

/// Composite trapezoid rule.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2).zip(y.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum()
}

/// Running trapezoid integral, starting at zero.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..t.len() {
        acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
        out.push(acc);
    }
    out
}

const NORM_TOL: f64 = 1e-10;

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.t).collect()
    }

    pub fn duration(&self) -> f64 {
        match (self.nodes.first(), self.nodes.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Checks the time grid and state normalization.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::invalid("trajectory", "time grid must be strictly increasing"));
        }
        for (k, n) in self.nodes.iter().enumerate() {
            for s in [&n.psi1, &n.psi2] {
                let norm = s.psi.norm();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::Unnormalized { node: k, norm });
                }
                let w: f64 = s.mixture.iter().map(|m| m.0).sum();
                if (w - 1.0).abs() > NORM_TOL {
                    return Err(Error::Unnormalized { node: k, norm: w });
                }
            }
        }
        Ok(())
    }

    /// `⟨op⟩₂ − ⟨op⟩₁` over the branch mixtures at every node.
    pub fn difference(&self, op: &HermitianMatrix) -> Vec<f64> {
        self.nodes.iter().map(|n| n.psi2.mixed_expectation(op) - n.psi1.mixed_expectation(op)).collect()
    }

    /// Bright-state content of the instantaneous state.
    pub fn bright_content(&self, which: Which) -> Vec<f64> {
        let obs = ObservableSet::new(&self.labels);
        self.nodes.iter().map(|n| obs.bright().expectation(&n.state(which).psi)).collect()
    }
}

/// `1 − exp(−∫ BC/τ dt)` for one protocol state.
pub fn recombination_probability(traj: &Trajectory, which: Which, tau: f64) -> Result<f64> {
    traj.validate()?;
    let rate: Vec<f64> = traj.bright_content(which).iter().map(|b| b / tau).collect();
    Ok(1.0 - (-trapezoid(&traj.times(), &rate)).exp())
}

/// Probability of no recombination up to each node.
pub fn survival_curve(traj: &Trajectory, which: Which, tau: f64) -> Vec<f64> {
    let rate: Vec<f64> = traj.bright_content(which).iter().map(|b| b / tau).collect();
    cumulative_trapezoid(&traj.times(), &rate).iter().map(|i| (-i).exp()).collect()
}

/// `χ(t) = ∂ΔE₁₂/∂ε` by Hellmann-Feynman with the family's `∂H/∂ε`.
pub fn chi_detuning(traj: &Trajectory, dh_deps: &HermitianMatrix) -> Vec<f64> {
    traj.difference(dh_deps)
}

/// `χ_DD(t) = ∂ΔE₁₂/∂ε_DD`; zero once the double-dot detuning is released.
pub fn chi_dd_detuning(traj: &Trajectory, dh_deps_dd: &HermitianMatrix) -> Vec<f64> {
    traj.difference(dh_deps_dd)
        .into_iter()
        .zip(&traj.nodes)
        .map(|(c, n)| if n.dd_held { c } else { 0.0 })
        .collect()
}

/// `(ε_rms/ħ)² (∫χ dt)²`.
pub fn dephasing_quasistatic(t: &[f64], chi: &[f64], rms: f64, hbar: f64) -> f64 {
    (rms / hbar * trapezoid(t, chi)).powi(2)
}

/// `S/(2ħ²) ∫χ² dt` for a one-sided white spectral density `S`.
pub fn dephasing_white(t: &[f64], chi: &[f64], s: f64, hbar: f64) -> f64 {
    let sq: Vec<f64> = chi.iter().map(|c| c * c).collect();
    s / (2.0 * hbar * hbar) * trapezoid(t, &sq)
}

/// Quasi-static field noise: `(B_rms/ħ)² (∫ ∂ΔE₁₂/∂B dt)²` with the
/// derivative in µeV/T.
pub fn dephasing_spin(t: &[f64], dde_db: &[f64], b_rms: f64, hbar: f64) -> f64 {
    dephasing_quasistatic(t, dde_db, b_rms, hbar)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DephasingSource {
    ChargeQuasiStatic,
    ChargeWhite,
    DoubleDotQuasiStatic,
    DoubleDotWhite,
    OverhauserOptical,
    OverhauserGate,
    OverhauserLeft,
    OverhauserRight,
}

impl DephasingSource {
    pub fn name(self) -> &'static str {
        match self {
            DephasingSource::ChargeQuasiStatic => "charge_quasistatic",
            DephasingSource::ChargeWhite => "charge_white",
            DephasingSource::DoubleDotQuasiStatic => "dd_quasistatic",
            DephasingSource::DoubleDotWhite => "dd_white",
            DephasingSource::OverhauserOptical => "overhauser_optical",
            DephasingSource::OverhauserGate => "overhauser_gate",
            DephasingSource::OverhauserLeft => "overhauser_left",
            DephasingSource::OverhauserRight => "overhauser_right",
        }
    }
}

/// Field-noise channel: `∂H/∂B` (µeV/T) and the rms deviation (T).
#[derive(Clone, Debug)]
pub struct FieldNoise {
    pub source: DephasingSource,
    pub dh_db: HermitianMatrix,
    pub rms: f64,
}

/// Everything the dephasing model needs besides the trajectory.
#[derive(Clone, Debug)]
pub struct NoiseOperators {
    pub dh_deps: HermitianMatrix,
    pub dh_deps_dd: Option<HermitianMatrix>,
    pub fields: Vec<FieldNoise>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DephasingBreakdown {
    pub contributions: Vec<(DephasingSource, f64)>,
    pub total: f64,
    pub p_fail: f64,
}

impl DephasingBreakdown {
    pub fn from_contributions(contributions: Vec<(DephasingSource, f64)>) -> Self {
        let total = contributions.iter().map(|c| c.1).sum();
        Self { contributions, total, p_fail: dephasing_failure(total) }
    }

    pub fn get(&self, s: DephasingSource) -> Option<f64> {
        self.contributions.iter().find(|c| c.0 == s).map(|c| c.1)
    }
}

/// Depolarizing-equivalent failure probability `⟨δφ²⟩/3`.
pub fn dephasing_failure(total_variance: f64) -> f64 {
    total_variance / 3.0
}

/// Probability of completing the transfer without a dephasing event.
pub fn no_dephasing_probability(variance: f64) -> f64 {
    (-0.5 * variance).exp()
}

/// Time-resolved sensitivities, one series per source, aligned with the
/// trajectory nodes. Charge sources appear once (quasi-static and white share
/// the same `χ`).
pub fn sensitivities(traj: &Trajectory, ops: &NoiseOperators) -> Vec<(DephasingSource, Vec<f64>)> {
    let mut out = vec![(DephasingSource::ChargeQuasiStatic, chi_detuning(traj, &ops.dh_deps))];
    if let Some(dd) = &ops.dh_deps_dd {
        out.push((DephasingSource::DoubleDotQuasiStatic, chi_dd_detuning(traj, dd)));
    }
    for f in &ops.fields {
        out.push((f.source, traj.difference(&f.dh_db)));
    }
    out
}

/// Accumulated phase variance per source up to each node.
pub fn cumulative_dephasing(
    traj: &Trajectory,
    ops: &NoiseOperators,
    p: &DeviceParams,
) -> Vec<(DephasingSource, Vec<f64>)> {
    let t = traj.times();
    let noise = p.detuning_noise();
    let h2 = p.hbar * p.hbar;
    let mut out = Vec::new();
    for (src, series) in sensitivities(traj, ops) {
        let int = cumulative_trapezoid(&t, &series);
        let rms = match src {
            DephasingSource::ChargeQuasiStatic | DephasingSource::DoubleDotQuasiStatic => noise.eps_rms,
            _ => ops.fields.iter().find(|f| f.source == src).map_or(0.0, |f| f.rms),
        };
        out.push((src, int.iter().map(|i| (rms * i).powi(2) / h2).collect()));
        let white = match src {
            DephasingSource::ChargeQuasiStatic => Some(DephasingSource::ChargeWhite),
            DephasingSource::DoubleDotQuasiStatic => Some(DephasingSource::DoubleDotWhite),
            _ => None,
        };
        if let Some(w) = white {
            let sq: Vec<f64> = series.iter().map(|c| c * c).collect();
            let int2 = cumulative_trapezoid(&t, &sq);
            out.push((w, int2.iter().map(|i| noise.s_eps / (2.0 * h2) * i).collect()));
        }
    }
    out
}

/// Phase variances of all sources over the whole trajectory.
pub fn dephasing_breakdown(traj: &Trajectory, ops: &NoiseOperators, p: &DeviceParams) -> Result<DephasingBreakdown> {
    traj.validate()?;
    let contributions = cumulative_dephasing(traj, ops, p)
        .into_iter()
        .map(|(s, v)| (s, v.last().copied().unwrap_or(0.0)))
        .collect();
    Ok(DephasingBreakdown::from_contributions(contributions))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    /// Static Gaussian offset with the given rms.
    QuasiStatic { rms: f64 },
    /// Delta-correlated noise with one-sided spectral density `s`.
    White { s: f64 },
}

/// Monte-Carlo estimate of a phase channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSample {
    /// Sample mean of `δφ²`.
    pub variance: f64,
    /// Standard error of `variance`.
    pub std_error: f64,
    /// Sample mean of the average-gate infidelity `(1 − cos δφ)/3`.
    pub infidelity: f64,
}

/// Draws `δφ = (1/ħ) ∫ χ(t) δε(t) dt` for the given noise model.
///
/// White noise is sampled independently per node with the trapezoid weight
/// `w_k`: `δε_k ~ N(0, S/(2 w_k))`, which reproduces `S/(2ħ²) Σ w_k χ_k²`.
pub fn sample_phase(t: &[f64], chi: &[f64], model: NoiseModel, hbar: f64, draws: usize, seed: u64) -> PhaseSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = t.len();
    let mut w = vec![0.0; n];
    for k in 1..n {
        let h = 0.5 * (t[k] - t[k - 1]);
        w[k - 1] += h;
        w[k] += h;
    }
    let coeff: Vec<f64> = match model {
        NoiseModel::QuasiStatic { rms } => vec![rms * trapezoid(t, chi) / hbar],
        NoiseModel::White { s } => {
            (0..n).map(|k| chi[k] * (0.5 * s * w[k]).sqrt() / hbar).filter(|c| *c != 0.0).collect()
        }
    };
    let (mut sum, mut sum2, mut infid) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let phi: f64 = coeff.iter().map(|c| { let z: f64 = StandardNormal.sample(&mut rng); c * z }).sum();
        let q = phi * phi;
        sum += q;
        sum2 += q * q;
        infid += (1.0 - phi.cos()) / 3.0;
    }
    let m = draws as f64;
    let mean = sum / m;
    let var = (sum2 / m - mean * mean).max(0.0);
    PhaseSample { variance: mean, std_error: (var / m).sqrt(), infidelity: infid / m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{CVector, C64};

    /// Constant state on the x-basis exciton: `(|↓⇑⟩ ∓ |↑⇓⟩)/√2` is fully
    /// bright (BC = 1) or fully dark (BC = 0).
    fn flat(bc: f64, n: usize, dt: f64) -> Trajectory {
        let labels = crate::hamiltonians::exciton_basis(crate::hamiltonians::Axis::X);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if bc == 1.0 { -1.0 } else { 1.0 };
        let v = CVector::from_vec(vec![
            C64::new(r, 0.0),
            C64::new(sign * r, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let nodes = (0..n)
            .map(|k| TrajectoryNode {
                t: k as f64 * dt,
                eps: 0.0,
                kind: SegmentKind::Sweep,
                dd_held: false,
                psi1: TrajectoryState::pure(v.clone()),
                psi2: TrajectoryState::pure(v.clone()),
            })
            .collect();
        Trajectory { labels, nodes }
    }

    #[test]
    fn full_bright_for_one_lifetime() {
        let tr = flat(1.0, 101, 0.01);
        let p = recombination_probability(&tr, Which::Psi1, 1.0).unwrap();
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        let dark = flat(0.0, 101, 0.01);
        assert!(recombination_probability(&dark, Which::Psi2, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn unnormalized_is_rejected() {
        let mut tr = flat(1.0, 3, 0.1);
        tr.nodes[1].psi2.psi *= C64::new(1.1, 0.0);
        assert!(matches!(recombination_probability(&tr, Which::Psi2, 1.0), Err(Error::Unnormalized { node: 1, .. })));
    }

    #[test]
    fn constant_integrands() {
        let t: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let one = vec![1.0; 11];
        let h = 0.658;
        assert!((dephasing_quasistatic(&t, &one, 0.8, h) - (0.8 / h).powi(2)).abs() < 1e-12);
        assert!((dephasing_white(&t, &one, 0.5, h) - 0.5 / (2.0 * h * h)).abs() < 1e-12);
        let zero = vec![0.0; 11];
        assert_eq!(dephasing_quasistatic(&t, &zero, 0.8, h), 0.0);
        assert_eq!(dephasing_white(&t, &zero, 0.5, h), 0.0);
    }

    #[test]
    fn failure_is_a_third() {
        assert_eq!(dephasing_failure(0.0), 0.0);
        assert!((dephasing_failure(0.03) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_matches_quasistatic() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.004).collect();
        let chi: Vec<f64> = t.iter().map(|x| (3.0 * x).sin()).collect();
        let exact = dephasing_quasistatic(&t, &chi, 5.0, 0.658);
        let s = sample_phase(&t, &chi, NoiseModel::QuasiStatic { rms: 5.0 }, 0.658, 20_000, 7);
        assert!((s.variance - exact).abs() < 3.0 * s.std_error);
    }
}
