//! Labelled Hamiltonians on the fixed product bases of the model.
//!
//! Spin projections are along the in-plane field (x) unless a label says
//! otherwise. Basis orderings:
//!
//! * exciton: `↓⇑, ↑⇓, ↑⇑, ↓⇓`
//! * single-spin device: `◦ e h` (exciton in the optical dot) for the four
//!   exciton states, followed by `e ◦ h` (electron moved to the gate dot)
//! * double dot, excitonic: `{↑◦, ↓◦} ⊗ exciton`
//! * double dot, separated: `{S(0,2), S(2,0), ↑↓, ↓↑, ↑↑, ↓↓} ⊗ {◦⇑, ◦⇓}`
//!
//! Every builder fills `(i, j)` and `(j, i)` from the same value, so the
//! results are exactly Hermitian.

use std::fmt;

use nalgebra::DMatrix;

use crate::params::{DeviceParams, SingletConvention};
use crate::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn sx(self) -> f64 {
        match self {
            Spin::Up => 0.5,
            Spin::Down => -0.5,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    fn arrow(self) -> char {
        match self {
            Spin::Up => '↑',
            Spin::Down => '↓',
        }
    }
}

/// Heavy-hole pseudo-spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hole {
    Up,
    Down,
}

impl Hole {
    pub fn jx(self) -> f64 {
        match self {
            Hole::Up => 0.5,
            Hole::Down => -0.5,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Hole::Up => Hole::Down,
            Hole::Down => Hole::Up,
        }
    }

    fn arrow(self) -> char {
        match self {
            Hole::Up => '⇑',
            Hole::Down => '⇓',
        }
    }
}

/// Two-electron configurations of the double dot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pair {
    S02,
    S20,
    UpDown,
    DownUp,
    UpUp,
    DownDown,
}

impl Pair {
    pub fn from_spins(left: Spin, right: Spin) -> Self {
        match (left, right) {
            (Spin::Up, Spin::Down) => Pair::UpDown,
            (Spin::Down, Spin::Up) => Pair::DownUp,
            (Spin::Up, Spin::Up) => Pair::UpUp,
            (Spin::Down, Spin::Down) => Pair::DownDown,
        }
    }

    /// Left and right spins of a (1,1) configuration.
    pub fn spins(self) -> Option<(Spin, Spin)> {
        match self {
            Pair::UpDown => Some((Spin::Up, Spin::Down)),
            Pair::DownUp => Some((Spin::Down, Spin::Up)),
            Pair::UpUp => Some((Spin::Up, Spin::Up)),
            Pair::DownDown => Some((Spin::Down, Spin::Down)),
            Pair::S02 | Pair::S20 => None,
        }
    }

    pub fn is_doubly_occupied(self) -> bool {
        matches!(self, Pair::S02 | Pair::S20)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pair::S02 => f.write_str("S(0,2)"),
            Pair::S20 => f.write_str("S(2,0)"),
            other => {
                let (l, r) = other.spins().expect("(1,1) pair");
                write!(f, "{}{}", l.arrow(), r.arrow())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisState {
    Exciton { e: Spin, h: Hole, axis: Axis },
    /// Exciton in the optical dot, gate dot empty: `|◦ e h⟩`.
    SingleExcitonic { e: Spin, h: Hole },
    /// Electron transferred to the gate dot, hole left behind: `|e ◦ h⟩`.
    SingleSeparated { e: Spin, h: Hole },
    /// Resident electron on the left gate dot plus an exciton: `|l◦⟩|e h⟩`.
    DoubleExcitonic { left: Spin, e: Spin, h: Hole },
    /// Two electrons in the double dot, hole in the optical dot: `|pair⟩|◦h⟩`.
    DoubleSeparated { pair: Pair, h: Hole },
    TwoElectron(Pair),
    OneElectron(Spin),
    OneHole(Hole),
    Level(&'static str),
}

impl BasisState {
    /// Exciton factor (x quantization) of an excitonic basis state.
    pub fn exciton(&self) -> Option<(Spin, Hole)> {
        match *self {
            BasisState::Exciton { e, h, axis: Axis::X }
            | BasisState::SingleExcitonic { e, h }
            | BasisState::DoubleExcitonic { e, h, .. } => Some((e, h)),
            _ => None,
        }
    }

    /// Spin that is not part of the exciton (the resident double-dot electron).
    pub fn spectator(&self) -> Option<Spin> {
        match *self {
            BasisState::DoubleExcitonic { left, .. } => Some(left),
            _ => None,
        }
    }

    pub fn is_excitonic(&self) -> bool {
        self.exciton().is_some()
    }

    pub fn hole(&self) -> Option<Hole> {
        match *self {
            BasisState::Exciton { h, .. }
            | BasisState::SingleExcitonic { h, .. }
            | BasisState::SingleSeparated { h, .. }
            | BasisState::DoubleExcitonic { h, .. }
            | BasisState::DoubleSeparated { h, .. }
            | BasisState::OneHole(h) => Some(h),
            _ => None,
        }
    }

    /// Total electron spin projection.
    pub fn electron_sx(&self) -> f64 {
        match *self {
            BasisState::Exciton { e, .. }
            | BasisState::SingleExcitonic { e, .. }
            | BasisState::SingleSeparated { e, .. }
            | BasisState::OneElectron(e) => e.sx(),
            BasisState::DoubleExcitonic { left, e, .. } => left.sx() + e.sx(),
            BasisState::DoubleSeparated { pair, .. } | BasisState::TwoElectron(pair) => {
                pair.spins().map_or(0.0, |(l, r)| l.sx() + r.sx())
            }
            BasisState::OneHole(_) | BasisState::Level(_) => 0.0,
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisState::Exciton { e, h, axis } => {
                let a = if axis == Axis::X { 'x' } else { 'z' };
                write!(f, "|{}{}⟩{a}", e.arrow(), h.arrow())
            }
            BasisState::SingleExcitonic { e, h } => write!(f, "|◦{}{}⟩", e.arrow(), h.arrow()),
            BasisState::SingleSeparated { e, h } => write!(f, "|{}◦{}⟩", e.arrow(), h.arrow()),
            BasisState::DoubleExcitonic { left, e, h } => {
                write!(f, "|{}◦⟩|{}{}⟩", left.arrow(), e.arrow(), h.arrow())
            }
            BasisState::DoubleSeparated { pair, h } => write!(f, "|{pair}⟩|◦{}⟩", h.arrow()),
            BasisState::TwoElectron(pair) => write!(f, "|{pair}⟩"),
            BasisState::OneElectron(s) => write!(f, "|{}⟩", s.arrow()),
            BasisState::OneHole(h) => write!(f, "|{}⟩", h.arrow()),
            BasisState::Level(name) => write!(f, "|{name}⟩"),
        }
    }
}

/// Exciton ordering shared by both quantization axes.
pub const EXCITON_ORDER: [(Spin, Hole); 4] = [
    (Spin::Down, Hole::Up),
    (Spin::Up, Hole::Down),
    (Spin::Up, Hole::Up),
    (Spin::Down, Hole::Down),
];

pub const PAIR_ORDER: [Pair; 6] =
    [Pair::S02, Pair::S20, Pair::UpDown, Pair::DownUp, Pair::UpUp, Pair::DownDown];

pub fn exciton_basis(axis: Axis) -> Vec<BasisState> {
    EXCITON_ORDER.iter().map(|&(e, h)| BasisState::Exciton { e, h, axis }).collect()
}

pub fn single_basis() -> Vec<BasisState> {
    let es = EXCITON_ORDER.iter().map(|&(e, h)| BasisState::SingleExcitonic { e, h });
    let ss = EXCITON_ORDER.iter().map(|&(e, h)| BasisState::SingleSeparated { e, h });
    es.chain(ss).collect()
}

pub fn dd_es_basis() -> Vec<BasisState> {
    [Spin::Up, Spin::Down]
        .iter()
        .flat_map(|&left| {
            EXCITON_ORDER.iter().map(move |&(e, h)| BasisState::DoubleExcitonic { left, e, h })
        })
        .collect()
}

pub fn dd_ss_basis() -> Vec<BasisState> {
    PAIR_ORDER
        .iter()
        .flat_map(|&pair| [Hole::Up, Hole::Down].map(|h| BasisState::DoubleSeparated { pair, h }))
        .collect()
}

pub fn dd_basis() -> Vec<BasisState> {
    let mut b = dd_es_basis();
    b.extend(dd_ss_basis());
    b
}

/// One of the two decoupled sectors of the double-dot Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subspace {
    One,
    Two,
}

/// Basis of a decoupled sector. Sector two is sector one with every electron
/// and hole spin flipped.
pub fn subspace_basis(which: Subspace) -> Vec<BasisState> {
    use BasisState::{DoubleExcitonic as Ex, DoubleSeparated as Sep};
    use Hole as H;
    use Spin::{Down as D, Up as U};
    let one = vec![
        Ex { left: D, e: D, h: H::Down },
        Sep { pair: Pair::DownDown, h: H::Down },
        Ex { left: D, e: U, h: H::Up },
        Sep { pair: Pair::DownUp, h: H::Up },
        Ex { left: U, e: D, h: H::Up },
        Sep { pair: Pair::UpDown, h: H::Up },
        Ex { left: U, e: U, h: H::Down },
        Sep { pair: Pair::UpUp, h: H::Down },
        Sep { pair: Pair::S20, h: H::Up },
        Sep { pair: Pair::S02, h: H::Up },
    ];
    match which {
        Subspace::One => one,
        Subspace::Two => one
            .into_iter()
            .map(|s| match s {
                Ex { left, e, h } => Ex { left: left.flipped(), e: e.flipped(), h: h.flipped() },
                Sep { pair, h } => {
                    let pair = match pair.spins() {
                        Some((l, r)) => Pair::from_spins(l.flipped(), r.flipped()),
                        None => pair,
                    };
                    Sep { pair, h: h.flipped() }
                }
                other => other,
            })
            .collect(),
    }
}

/// Positions of a sector's basis states inside [`dd_basis`].
pub fn subspace_indices(which: Subspace) -> Vec<usize> {
    let full = dd_basis();
    subspace_basis(which)
        .iter()
        .map(|s| full.iter().position(|b| b == s).expect("sector state in full basis"))
        .collect()
}

/// Complex Hermitian operator with one label per basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    labels: Vec<BasisState>,
    data: CMatrix,
}

impl HermitianMatrix {
    pub fn zeros(labels: Vec<BasisState>) -> Self {
        let n = labels.len();
        Self { labels, data: CMatrix::zeros(n, n) }
    }

    /// Builds from a real matrix, using only its upper triangle.
    pub fn from_real_upper(labels: Vec<BasisState>, m: &DMatrix<f64>) -> Self {
        let mut h = Self::zeros(labels);
        let n = h.dim();
        assert_eq!(m.nrows(), n, "matrix size must match label count");
        for i in 0..n {
            for j in i..n {
                h.set(i, j, C64::new(m[(i, j)], 0.0));
            }
        }
        h
    }

    pub fn diagonal(labels: Vec<BasisState>, diag: &[f64]) -> Self {
        let mut h = Self::zeros(labels);
        for (i, &d) in diag.iter().enumerate() {
            h.set(i, i, C64::new(d, 0.0));
        }
        h
    }

    /// Sets `(i, j)` and its conjugate partner. Diagonal entries keep only the
    /// real part.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        if i == j {
            self.data[(i, i)] = C64::new(v.re, 0.0);
        } else {
            self.data[(i, j)] = v;
            self.data[(j, i)] = v.conj();
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: C64) {
        let cur = self.data[(i, j)];
        self.set(i, j, cur + v);
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BasisState] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn is_exactly_hermitian(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.data[(i, j)] == self.data[(j, i)].conj()))
    }

    /// Sum of two operators on the same basis.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.labels, other.labels, "operators on different bases");
        Self { labels: self.labels.clone(), data: &self.data + &other.data }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { labels: self.labels.clone(), data: &self.data * C64::new(s, 0.0) }
    }

    pub fn shifted(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            out.data[(i, i)] += C64::new(s, 0.0);
        }
        out
    }

    /// Restriction to the listed basis states, in the listed order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        let data = CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.data[(idx[r], idx[c])]);
        Self { labels, data }
    }

    /// `⟨v|H|v⟩`.
    pub fn expectation(&self, v: &crate::CVector) -> f64 {
        v.dotc(&(&self.data * v)).re
    }

    /// `⟨a|H|b⟩`.
    pub fn element(&self, a: &crate::CVector, b: &crate::CVector) -> C64 {
        a.dotc(&(&self.data * b))
    }

    /// Plain-text dump: basis labels as `#` comments, then one row per line of
    /// `re+im i` pairs.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(s, "# {i}: {l}");
        }
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.data[(i, j)];
                    format!("{:?}{:+?}i", z.re, z.im)
                })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// Zero-padded block `[[a, 0], [0, b]]` on the concatenated basis.
fn block_diag(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    let mut labels = a.labels.clone();
    labels.extend(b.labels.iter().copied());
    let (na, nb) = (a.dim(), b.dim());
    let mut data = CMatrix::zeros(na + nb, na + nb);
    data.view_mut((0, 0), (na, na)).copy_from(&a.data);
    data.view_mut((na, na), (nb, nb)).copy_from(&b.data);
    HermitianMatrix { labels, data }
}

/// Kronecker sum `A ⊗ 1 + 1 ⊗ B` on the product basis given by `labels`.
fn kron_sum(a: &DMatrix<f64>, b: &DMatrix<f64>, labels: Vec<BasisState>) -> HermitianMatrix {
    let (na, nb) = (a.nrows(), b.nrows());
    let m = a.kronecker(&DMatrix::identity(nb, nb)) + DMatrix::identity(na, na).kronecker(b);
    HermitianMatrix::from_real_upper(labels, &m)
}

/// Exchange Hamiltonian in the z basis.
pub fn exciton_h0_z(p: &DeviceParams) -> HermitianMatrix {
    let (d0, d1, d2) = (p.delta0, p.delta1, p.delta2);
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        d0, d1, 0.0, 0.0,
        d1, d0, 0.0, 0.0,
        0.0, 0.0, -d0, d2,
        0.0, 0.0, d2, -d0,
    ]) * 0.5;
    HermitianMatrix::from_real_upper(exciton_basis(Axis::Z), &m)
}

fn h0_x_real(p: &DeviceParams) -> DMatrix<f64> {
    let (d0, d1, d2) = (p.delta0, p.delta1, p.delta2);
    let a = -d1 - d2;
    let b = -2.0 * d0 + d1 - d2;
    let c = d1 + d2;
    let d = -2.0 * d0 - d1 + d2;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        a, b, 0.0, 0.0,
        b, a, 0.0, 0.0,
        0.0, 0.0, c, d,
        0.0, 0.0, d, c,
    ]) * 0.25;
    m
}

/// Exchange Hamiltonian in the x basis.
pub fn exciton_h0_x(p: &DeviceParams) -> HermitianMatrix {
    HermitianMatrix::from_real_upper(exciton_basis(Axis::X), &h0_x_real(p))
}

fn zeeman_diag(p: &DeviceParams, g_e: f64, b_extra: f64) -> [f64; 4] {
    let s = 0.5 * p.mu_b * (p.b_field + b_extra);
    let gh = p.g_h;
    [(-g_e - gh) * s, (g_e + gh) * s, (g_e - gh) * s, (-g_e + gh) * s]
}

/// Exciton Zeeman term along x; `g_e` selects the electron g-factor.
pub fn exciton_zeeman_x(p: &DeviceParams, g_e: f64, b_extra: f64) -> HermitianMatrix {
    HermitianMatrix::diagonal(exciton_basis(Axis::X), &zeeman_diag(p, g_e, b_extra))
}

/// `H_ex = H0,x + H_Ze,x` with the optical-dot electron g-factor.
fn h_ex_real(p: &DeviceParams) -> DMatrix<f64> {
    h0_x_real(p) + DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&zeeman_diag(p, p.g_e, 0.0)))
}

/// 8×8 Hamiltonian of one exciton next to an empty gate-defined dot.
pub fn single_electron_h(p: &DeviceParams, eps: f64) -> HermitianMatrix {
    let mut m = DMatrix::<f64>::zeros(8, 8);
    let es = h_ex_real(p);
    let ss = zeeman_diag(p, p.g_e_tilde, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = es[(i, j)];
        }
        m[(i, i)] += 0.5 * eps;
        m[(i + 4, i + 4)] = ss[i] - 0.5 * eps;
        m[(i, i + 4)] = p.t_c;
    }
    HermitianMatrix::from_real_upper(single_basis(), &m)
}

/// `∂H/∂ε` of [`single_electron_h`]: `+1/2` on the excitonic block, `-1/2`
/// on the separated block.
pub fn single_electron_dh_deps() -> HermitianMatrix {
    HermitianMatrix::diagonal(single_basis(), &[0.5, 0.5, 0.5, 0.5, -0.5, -0.5, -0.5, -0.5])
}

fn h1e(p: &DeviceParams) -> DMatrix<f64> {
    let s = 0.5 * p.mu_b * p.b_field;
    DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[p.g_e_tilde * s, -p.g_e_tilde * s]))
}

fn h1h(p: &DeviceParams) -> DMatrix<f64> {
    let s = 0.5 * p.mu_b * p.b_field;
    DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[-p.g_h * s, p.g_h * s]))
}

/// Excitonic block of the double-dot device: resident electron ⊗ exciton.
pub fn dd_h_es(p: &DeviceParams) -> HermitianMatrix {
    kron_sum(&h1e(p), &h_ex_real(p), dd_es_basis())
}

/// Two-electron double-dot Hamiltonian on `S(0,2), S(2,0), ↑↓, ↓↑, ↑↑, ↓↓`.
pub fn dd_h2e(p: &DeviceParams, eps_dd: f64) -> HermitianMatrix {
    let t = 0.5 * p.t_dd;
    let (vp, vm) = (p.v_plus, p.v_minus);
    let z = p.g_e_tilde * p.mu_b * p.b_field;
    let (s02, s20) = match p.singlet_convention {
        SingletConvention::LeftLowForNegative => (-eps_dd + p.u, eps_dd + p.u),
        SingletConvention::Mirrored => (eps_dd + p.u, -eps_dd + p.u),
    };
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(6, 6, &[
        s02, 0.0, -t, t, 0.0, 0.0,
        0.0, s20, -t, t, 0.0, 0.0,
        -t, -t, 0.5 * (vm + vp), 0.5 * (vm - vp), 0.0, 0.0,
        t, t, 0.5 * (vm - vp), 0.5 * (vm + vp), 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, vm + z, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, vm - z,
    ]);
    HermitianMatrix::from_real_upper(PAIR_ORDER.iter().map(|&q| BasisState::TwoElectron(q)).collect(), &m)
}

/// Separated block: two electrons in the double dot ⊗ hole in the optical dot.
pub fn dd_h_ss(p: &DeviceParams, eps_dd: f64) -> HermitianMatrix {
    let h2e = dd_h2e(p, eps_dd).into_matrix().map(|z| z.re);
    kron_sum(&h2e, &h1h(p), dd_ss_basis())
}

/// Double-dot configuration reached when the excitonic electron `e` hops next
/// to a resident electron `left`.
///
/// One hop from the optical dot lands on the right dot, so only (1,1)
/// configurations are reachable; the doubly occupied singlets get no direct
/// coupling.
fn hop_target(left: Spin, e: Spin) -> Pair {
    Pair::from_spins(left, e)
}

/// Spin-conserving tunnel coupling, rows in [`dd_es_basis`] order and columns
/// in [`dd_ss_basis`] order.
pub fn tunnel_block(p: &DeviceParams) -> DMatrix<f64> {
    let es = dd_es_basis();
    let ss = dd_ss_basis();
    let mut t = DMatrix::zeros(es.len(), ss.len());
    for (r, s) in es.iter().enumerate() {
        let BasisState::DoubleExcitonic { left, e, h } = *s else { unreachable!() };
        let target = BasisState::DoubleSeparated { pair: hop_target(left, e), h };
        let c = ss.iter().position(|x| *x == target).expect("target in separated basis");
        t[(r, c)] = p.t_c;
    }
    t
}

/// Full 20×20 double-dot Hamiltonian `[[ε + H_ES, T], [T†, H_SS]]`.
pub fn dd_full_h(p: &DeviceParams, eps: f64, eps_dd: f64) -> HermitianMatrix {
    let mut h = block_diag(&dd_h_es(p).shifted(eps), &dd_h_ss(p, eps_dd));
    let t = tunnel_block(p);
    for r in 0..t.nrows() {
        for c in 0..t.ncols() {
            if t[(r, c)] != 0.0 {
                h.set(r, 8 + c, C64::new(t[(r, c)], 0.0));
            }
        }
    }
    h
}

/// Restriction of [`dd_full_h`] to one decoupled sector.
pub fn subspace_h(p: &DeviceParams, eps: f64, eps_dd: f64, which: Subspace) -> HermitianMatrix {
    dd_full_h(p, eps, eps_dd).restrict(&subspace_indices(which))
}

/// `∂H/∂ε` of the double-dot Hamiltonian: projector on the excitonic states.
pub fn dd_dh_deps(labels: &[BasisState]) -> HermitianMatrix {
    let d: Vec<f64> = labels.iter().map(|l| if l.is_excitonic() { 1.0 } else { 0.0 }).collect();
    HermitianMatrix::diagonal(labels.to_vec(), &d)
}

/// `∂H/∂ε_DD` on the given double-dot labels.
pub fn dd_dh_deps_dd(p: &DeviceParams, labels: &[BasisState]) -> HermitianMatrix {
    let sign = match p.singlet_convention {
        SingletConvention::LeftLowForNegative => 1.0,
        SingletConvention::Mirrored => -1.0,
    };
    let d: Vec<f64> = labels
        .iter()
        .map(|l| match l {
            BasisState::DoubleSeparated { pair: Pair::S20, .. } => sign,
            BasisState::DoubleSeparated { pair: Pair::S02, .. } => -sign,
            _ => 0.0,
        })
        .collect();
    HermitianMatrix::diagonal(labels.to_vec(), &d)
}

/// Quasi-static Overhauser-field deviations (T).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldDeviation {
    /// Optical dot and the single gate-defined dot.
    SingleSpin { b_of: f64, b_gate: f64 },
    /// Optical dot and the left / right dots of the double dot.
    DoubleDot { b_of: f64, b_left: f64, b_right: f64 },
}

/// Hyperfine Hamiltonian for the given field deviations, on the labels of a
/// single-spin or double-dot basis (full or restricted).
///
/// Excitonic states: `µ_B B_OF (g_e S_x + η g_h J_x)` plus the gate-dot
/// electrons. Separated states: gate-dot electrons plus `η µ_B B_OF g_h J_x`
/// for the hole left in the optical dot.
pub fn overhauser_h(p: &DeviceParams, labels: &[BasisState], dev: FieldDeviation) -> HermitianMatrix {
    let (b_of, b_gate, b_left, b_right) = match dev {
        FieldDeviation::SingleSpin { b_of, b_gate } => (b_of, b_gate, 0.0, 0.0),
        FieldDeviation::DoubleDot { b_of, b_left, b_right } => (b_of, 0.0, b_left, b_right),
    };
    let hole = |h: Hole| p.eta * p.g_h * h.jx() * b_of;
    let gd = p.g_e_tilde;
    let d: Vec<f64> = labels
        .iter()
        .map(|l| {
            let v = match *l {
                BasisState::SingleExcitonic { e, h } => p.g_e * e.sx() * b_of + hole(h),
                BasisState::SingleSeparated { e, h } => gd * e.sx() * b_gate + hole(h),
                BasisState::DoubleExcitonic { left, e, h } => {
                    p.g_e * e.sx() * b_of + hole(h) + gd * left.sx() * b_left
                }
                BasisState::DoubleSeparated { pair, h } => {
                    let spins = pair
                        .spins()
                        .map_or(0.0, |(l, r)| gd * (l.sx() * b_left + r.sx() * b_right));
                    spins + hole(h)
                }
                BasisState::Exciton { e, h, axis: Axis::X } => p.g_e * e.sx() * b_of + hole(h),
                _ => 0.0,
            };
            p.mu_b * v
        })
        .collect();
    HermitianMatrix::diagonal(labels.to_vec(), &d)
}

/// x→z change of basis for the exciton: column `k` holds the z-basis
/// components of the k-th x-basis exciton.
///
/// Electron and hole use the same rotation, `|↑⟩x = (|↑⟩+|↓⟩)/√2` and
/// `|↓⟩x = (|↑⟩−|↓⟩)/√2`.
pub fn exciton_x_to_z() -> DMatrix<f64> {
    let r = |z: usize, x: usize| if z == 1 && x == 1 { -1.0 } else { 1.0 } * std::f64::consts::FRAC_1_SQRT_2;
    let idx = |s: Spin| if s == Spin::Up { 0 } else { 1 };
    let hidx = |h: Hole| if h == Hole::Up { 0 } else { 1 };
    DMatrix::from_fn(4, 4, |zi, xi| {
        let (ez, hz) = EXCITON_ORDER[zi];
        let (ex, hx) = EXCITON_ORDER[xi];
        r(idx(ez), idx(ex)) * r(hidx(hz), hidx(hx))
    })
}

/// Groups the excitonic components of a basis by spectator spin. Each group
/// lists the basis index of every x-basis exciton (in [`EXCITON_ORDER`]).
fn exciton_groups(labels: &[BasisState]) -> Vec<[Option<usize>; 4]> {
    let mut groups: Vec<(Option<Spin>, [Option<usize>; 4])> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let Some(ex) = l.exciton() else { continue };
        let k = EXCITON_ORDER.iter().position(|&x| x == ex).expect("exciton in order");
        let key = l.spectator();
        match groups.iter_mut().find(|(s, _)| *s == key) {
            Some((_, g)) => g[k] = Some(i),
            None => {
                let mut g = [None; 4];
                g[k] = Some(i);
                groups.push((key, g));
            }
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Projector whose expectation is the bright-state content: weight of the
/// exciton factor on the z-basis bright states `↓⇑` and `↑⇓`. Separated
/// states contribute nothing.
pub fn bright_projector(labels: &[BasisState]) -> HermitianMatrix {
    let m = exciton_x_to_z();
    // First two z states are the bright ones.
    let px = DMatrix::from_fn(4, 4, |a, b| m[(0, a)] * m[(0, b)] + m[(1, a)] * m[(1, b)]);
    let mut out = HermitianMatrix::zeros(labels.to_vec());
    for g in exciton_groups(labels) {
        for a in 0..4 {
            for b in a..4 {
                if let (Some(i), Some(j)) = (g[a], g[b]) {
                    out.set(i, j, C64::new(px[(a, b)], 0.0));
                }
            }
        }
    }
    out
}

/// Projector on excitonic states with antiparallel x spins (`↓⇑`, `↑⇓`).
pub fn vertical_projector(labels: &[BasisState]) -> HermitianMatrix {
    let d: Vec<f64> = labels
        .iter()
        .map(|l| match l.exciton() {
            Some((e, h)) if e.sx() * h.jx() < 0.0 => 1.0,
            _ => 0.0,
        })
        .collect();
    HermitianMatrix::diagonal(labels.to_vec(), &d)
}

/// Projector on all excitonic basis states.
pub fn excitonic_projector(labels: &[BasisState]) -> HermitianMatrix {
    dd_dh_deps(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> DeviceParams {
        DeviceParams::default()
    }

    #[test]
    fn h0_z_table_values() {
        let h = exciton_h0_z(&p());
        for (i, v) in [50.0, 50.0, -50.0, -50.0].iter().enumerate() {
            assert_eq!(h.entry(i, i).re, *v);
        }
        assert!(h.is_exactly_hermitian());
    }

    #[test]
    fn h0_x_entries() {
        let h = exciton_h0_x(&p());
        assert_eq!(h.entry(0, 0).re, 0.0);
        assert_eq!(h.entry(0, 1).re, -50.0);
        assert_eq!(h.entry(2, 3).re, -50.0);
        assert_eq!(h.entry(0, 2).re, 0.0);
    }

    #[test]
    fn zeeman_read_off() {
        let h = exciton_zeeman_x(&p(), -0.44, 0.0);
        let s = MU_B_T5;
        for (i, c) in [0.24, -0.24, -0.64, 0.64].iter().enumerate() {
            assert!((h.entry(i, i).re - c * s).abs() < 1e-12);
        }
        let zero = exciton_zeeman_x(&DeviceParams { b_field: 0.0, ..p() }, -0.44, 0.0);
        assert!(zero.matrix().iter().all(|z| z.norm() == 0.0));
    }

    const MU_B_T5: f64 = crate::params::MU_B * 5.0 / 2.0;

    #[test]
    fn rotation_maps_z_to_x() {
        let params = DeviceParams { delta1: 3.0, delta2: -7.0, ..p() };
        let m = exciton_x_to_z();
        let hz = exciton_h0_z(&params).into_matrix().map(|z| z.re);
        let hx = exciton_h0_x(&params).into_matrix().map(|z| z.re);
        let rotated = m.transpose() * hz * &m;
        assert!((rotated - hx).amax() < 1e-12);
    }

    #[test]
    fn tunnel_rows() {
        let t = tunnel_block(&DeviceParams { t_c: 150.0, ..p() });
        for r in 0..8 {
            let nz: Vec<_> = (0..12).filter(|&c| t[(r, c)] != 0.0).collect();
            assert_eq!(nz.len(), 1);
            assert_eq!(t[(r, nz[0])], 150.0);
        }
        // |↑◦⟩|↓⇑⟩ -> |↑↓⟩|◦⇑⟩ only.
        let es = dd_es_basis();
        let ss = dd_ss_basis();
        let r = es
            .iter()
            .position(|s| *s == BasisState::DoubleExcitonic { left: Spin::Up, e: Spin::Down, h: Hole::Up })
            .unwrap();
        let c = ss
            .iter()
            .position(|s| *s == BasisState::DoubleSeparated { pair: Pair::UpDown, h: Hole::Up })
            .unwrap();
        assert_eq!(t[(r, c)], 150.0);
        // No singlet columns.
        for c in 0..4 {
            assert!((0..8).all(|r| t[(r, c)] == 0.0));
        }
    }

    #[test]
    fn ss_read_off_without_tunnelling() {
        let params = DeviceParams { t_dd: 0.0, b_field: 0.0, ..p() };
        let h = dd_h_ss(&params, -2030.0);
        let expect = [4030.0, -30.0, 0.4, 0.4, 0.0, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((h.entry(2 * k, 2 * k).re - e).abs() < 1e-12);
            assert!((h.entry(2 * k + 1, 2 * k + 1).re - e).abs() < 1e-12);
        }
    }

    #[test]
    fn labels_unique_and_readable() {
        let b = dd_basis();
        for (i, a) in b.iter().enumerate() {
            assert!(b[i + 1..].iter().all(|x| x != a));
        }
        assert_eq!(b[0].to_string(), "|↑◦⟩|↓⇑⟩");
        assert_eq!(b[8].to_string(), "|S(0,2)⟩|◦⇑⟩");
        assert_eq!(single_basis()[4].to_string(), "|↓◦⇑⟩");
    }

    #[test]
    fn bright_content_of_basis_states() {
        let labels = exciton_basis(Axis::X);
        let pb = bright_projector(&labels);
        // |↑⇑⟩x is an equal mixture of bright and dark z excitons.
        assert!((pb.entry(2, 2).re - 0.5).abs() < 1e-15);
        let tr: f64 = (0..4).map(|i| pb.entry(i, i).re).sum();
        assert!((tr - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dump_has_header_and_rows() {
        let d = exciton_h0_x(&p()).dump();
        assert_eq!(d.lines().filter(|l| l.starts_with('#')).count(), 4);
        assert_eq!(d.lines().filter(|l| !l.starts_with('#')).count(), 4);
        assert!(d.contains("-50.0+0.0i"));
    }
}
