//! Device parameters and protocol configuration.
//!
//! Internal units: energies in µeV, times in ns, fields in T. Gate-referred
//! charge noise is stored in volts (V and V²/Hz) and converted to detuning
//! noise through the lever arm by [`DeviceParams::detuning_noise`].

use crate::error::{Error, Result};

/// Reduced Planck constant in µeV·ns.
pub const HBAR: f64 = 0.658_211_957;
/// Bohr magneton in µeV/T.
pub const MU_B: f64 = 57.883_818_06;

/// Ordering convention for the two doubly occupied singlets of the double dot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingletConvention {
    /// S(0,2) carries `-eps_dd + U`, S(2,0) carries `+eps_dd + U`: a negative
    /// double-dot detuning lowers S(2,0) and keeps the resident electron left.
    LeftLowForNegative,
    /// The two diagonal entries swapped.
    Mirrored,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceParams {
    /// Dark-bright exchange splitting (µeV).
    pub delta0: f64,
    /// Bright-state splitting (µeV).
    pub delta1: f64,
    /// Dark-state splitting (µeV).
    pub delta2: f64,
    /// In-plane magnetic field along x (T).
    pub b_field: f64,
    /// Electron g-factor in the optically active dot.
    pub g_e: f64,
    /// Heavy-hole g-factor.
    pub g_h: f64,
    /// Electron g-factor in the gate-defined dot(s).
    pub g_e_tilde: f64,
    /// Tunnel coupling between the optical dot and the gate-defined dot (µeV).
    pub t_c: f64,
    /// Bright-exciton recombination time (ns).
    pub tau: f64,
    /// Gate-referred quasi-static charge noise rms (V).
    pub eps_rms_gate: f64,
    /// Gate-referred white charge-noise spectral density (V²/Hz, one-sided).
    pub s_eps_gate: f64,
    /// Gate lever arm (in units of 1/e).
    pub lever_arm: f64,
    /// Overhauser-field rms in the optically active dot (T).
    pub b_of_rms: f64,
    /// Overhauser-field rms in each gate-defined dot (T).
    pub b_of_rms_tilde: f64,
    /// Ratio of hole to electron hyperfine coupling.
    pub eta: f64,
    /// Double-dot tunnel coupling (µeV).
    pub t_dd: f64,
    /// Double-dot detuning held during excitation and drive (µeV).
    pub eps_dd: f64,
    /// On-site Coulomb repulsion (µeV).
    pub u: f64,
    /// (1,1) singlet Coulomb energy (µeV).
    pub v_plus: f64,
    /// (1,1) triplet Coulomb energy (µeV).
    pub v_minus: f64,
    pub singlet_convention: SingletConvention,
    pub hbar: f64,
    pub mu_b: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            delta0: 100.0,
            delta1: 0.0,
            delta2: 0.0,
            b_field: 5.0,
            g_e: -0.44,
            g_h: 0.2,
            g_e_tilde: -0.44,
            t_c: 50.0,
            tau: 1.0,
            eps_rms_gate: 8e-6,
            s_eps_gate: 5e-20,
            lever_arm: 10.0,
            b_of_rms: 50e-3,
            b_of_rms_tilde: 5e-3,
            eta: 0.0,
            t_dd: 50.0,
            eps_dd: -2030.0,
            u: 2000.0,
            v_plus: 0.8,
            v_minus: 0.0,
            singlet_convention: SingletConvention::LeftLowForNegative,
            hbar: HBAR,
            mu_b: MU_B,
        }
    }
}

/// Detuning-referred charge noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetuningNoise {
    /// Quasi-static rms (µeV).
    pub eps_rms: f64,
    /// One-sided white spectral density (µeV²·ns).
    pub s_eps: f64,
}

// eV -> µeV and s -> ns.
const UEV_PER_EV: f64 = 1e6;
const NS_PER_S: f64 = 1e9;

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta0", self.delta0),
            ("B", self.b_field),
            ("t_c", self.t_c),
            ("tau", self.tau),
            ("t_dd", self.t_dd),
            ("U", self.u),
            ("hbar", self.hbar),
            ("mu_B", self.mu_b),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("eps_rms_gate", self.eps_rms_gate),
            ("S_eps_gate", self.s_eps_gate),
            ("lever_arm", self.lever_arm),
            ("B_of_rms", self.b_of_rms),
            ("B_of_rms_tilde", self.b_of_rms_tilde),
            ("V_minus", self.v_minus),
        ];
        for (key, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("must be non-negative, got {v}")));
            }
        }
        if self.v_plus < self.v_minus {
            return Err(Error::invalid("V_plus", "must satisfy V_plus >= V_minus"));
        }
        if self.g_e >= 0.0 {
            return Err(Error::invalid("g_e", "electron g-factor must be negative"));
        }
        if self.g_e_tilde >= 0.0 {
            return Err(Error::invalid("g_e_tilde", "electron g-factor must be negative"));
        }
        if self.g_h <= 0.0 {
            return Err(Error::invalid("g_h", "hole g-factor must be positive"));
        }
        if !(0.0..=1e-3).contains(&self.eta) {
            return Err(Error::invalid("eta", "must lie in [0, 0.001]"));
        }
        for (key, v) in [("delta1", self.delta1), ("delta2", self.delta2), ("eps_dd", self.eps_dd)] {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Converts the gate-referred charge noise into detuning noise.
    ///
    /// The gate-equivalent voltage noise is divided by the lever arm once:
    /// `eps_rms = eps_rms_gate / L`, `S_eps = S_eps_gate / L²`. A zero lever
    /// arm is treated as the noise-free limit.
    pub fn detuning_noise(&self) -> DetuningNoise {
        if self.lever_arm == 0.0 {
            return DetuningNoise { eps_rms: 0.0, s_eps: 0.0 };
        }
        let l = self.lever_arm;
        DetuningNoise {
            eps_rms: self.eps_rms_gate / l * UEV_PER_EV,
            s_eps: self.s_eps_gate / (l * l) * UEV_PER_EV * UEV_PER_EV * NS_PER_S,
        }
    }

    /// Zeeman energy scale `µ_B B / 2` (µeV).
    pub fn half_zeeman(&self) -> f64 {
        0.5 * self.mu_b * self.b_field
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolKind {
    SingleSpin,
    SingletTriplet,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::SingleSpin => "single-spin",
            ProtocolKind::SingletTriplet => "singlet-triplet",
        }
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "single-spin" | "single_spin" | "single" | "ss" => Ok(ProtocolKind::SingleSpin),
            "singlet-triplet" | "singlet_triplet" | "st" => Ok(ProtocolKind::SingletTriplet),
            other => Err(Error::invalid("protocol", format!("unknown protocol `{other}`"))),
        }
    }
}

impl std::fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetuningGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DetuningGrid {
    /// Uniform nodes from `start` to `stop`; the last node is `stop` exactly.
    pub fn nodes(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step).round().max(1.0) as usize;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.stop
                } else {
                    self.start + k as f64 * self.step
                }
            })
            .collect()
    }
}

/// Where photo-excitation happens.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExcitationPoint {
    Fixed(f64),
    /// Solved from the vertical-polarization requirement on the S-like branch.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    /// Tracking grid. Its start is the anchor detuning where branches are
    /// identified by their dominant basis state.
    pub grid: DetuningGrid,
    pub excitation: ExcitationPoint,
    pub final_detuning: f64,
    pub p_lz: f64,
    /// Search window for the drive point (µeV).
    pub drive_window: (f64, f64),
    /// Allowed relative variation of the transition element across the drive
    /// amplitude.
    pub lambda_tolerance: f64,
    /// Target excitonic-relative vertical polarization of the S-like branch at
    /// the excitation point.
    pub vp_target: f64,
    /// Time resolution used while sampling the Rabi segment (ns).
    pub rabi_time_step: f64,
}

impl ProtocolConfig {
    pub fn single_spin() -> Self {
        Self {
            kind: ProtocolKind::SingleSpin,
            grid: DetuningGrid { start: -2000.0, stop: 250.0, step: 0.5 },
            excitation: ExcitationPoint::Fixed(-35.0),
            final_detuning: 250.0,
            p_lz: 0.01,
            drive_window: (50.0, 600.0),
            lambda_tolerance: 0.5,
            vp_target: 0.2,
            rabi_time_step: 5e-4,
        }
    }

    pub fn singlet_triplet() -> Self {
        Self {
            kind: ProtocolKind::SingletTriplet,
            grid: DetuningGrid { start: -2000.0, stop: 1500.0, step: 0.5 },
            excitation: ExcitationPoint::Auto,
            final_detuning: 1500.0,
            ..Self::single_spin()
        }
    }

    pub fn for_kind(kind: ProtocolKind) -> Self {
        match kind {
            ProtocolKind::SingleSpin => Self::single_spin(),
            ProtocolKind::SingletTriplet => Self::singlet_triplet(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.step > 0.0 && g.step.is_finite()) {
            return Err(Error::invalid("grid_step", "must be positive"));
        }
        if !(g.start < g.stop) {
            return Err(Error::invalid("grid_start", "must be below grid_stop"));
        }
        if !(self.p_lz > 0.0 && self.p_lz < 1.0) {
            return Err(Error::invalid("p_lz", "must lie in (0, 1)"));
        }
        if self.final_detuning > g.stop + 1e-9 {
            return Err(Error::invalid("eps_final", "must not exceed grid_stop"));
        }
        if self.kind == ProtocolKind::SingleSpin && self.excitation == ExcitationPoint::Auto {
            return Err(Error::invalid("eps_ep", "automatic excitation point needs the singlet-triplet protocol"));
        }
        if let ExcitationPoint::Fixed(ep) = self.excitation {
            if !(g.start < ep && ep < self.final_detuning) {
                return Err(Error::invalid(
                    "eps_ep",
                    format!("need grid_start < eps_ep < eps_final, got {ep}"),
                ));
            }
        }
        let (lo, hi) = self.drive_window;
        if !(lo < hi) {
            return Err(Error::invalid("drive_start", "drive window must be non-empty"));
        }
        if !(self.lambda_tolerance > 0.0) {
            return Err(Error::invalid("lambda_tolerance", "must be positive"));
        }
        if !(self.vp_target > 0.0 && self.vp_target < 1.0) {
            return Err(Error::invalid("vp_target", "must lie in (0, 1)"));
        }
        if !(self.rabi_time_step > 0.0) {
            return Err(Error::invalid("rabi_dt", "must be positive"));
        }
        Ok(())
    }
}
