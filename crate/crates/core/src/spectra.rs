//! Diagonalization, continuous branch tracking and state observables.

use std::sync::Arc;

use nalgebra::linalg::SymmetricEigen;

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::hamiltonians::{
    bright_projector, dd_h2e, excitonic_projector, vertical_projector, BasisState,
    HermitianMatrix, Pair,
};
use crate::params::DeviceParams;
use crate::{CMatrix, CVector, C64};

const MAX_SWEEPS: usize = 10_000;
/// Eigenvalues closer than this (µeV) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Sorted eigenpairs of a Hermitian matrix.
///
/// `blocks[k]` names the decoupled block that eigenvector `k` lives in: the
/// smallest basis index of the connected component of the matrix's
/// off-diagonal sparsity pattern.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
    pub blocks: Vec<usize>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn components(m: &CMatrix) -> Vec<usize> {
    let n = m.nrows();
    let mut root: Vec<usize> = (0..n).collect();
    fn find(root: &mut [usize], mut i: usize) -> usize {
        while root[i] != i {
            root[i] = root[root[i]];
            i = root[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if m[(i, j)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut root, i), find(&mut root, j));
                let (lo, hi) = (a.min(b), a.max(b));
                root[hi] = lo;
            }
        }
    }
    (0..n).map(|i| find(&mut root, i)).collect()
}

/// Rotates `v` so that its largest-magnitude component is real and positive.
/// Among components equal in magnitude to within 1e-12 the first one wins.
pub fn gauge_fix(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let k = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap_or(0);
    let phase = v[k].conj() / v[k].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[k] = C64::new(v[k].re, 0.0);
}

pub fn eigendecompose(h: &HermitianMatrix) -> Result<EigenSystem> {
    let m = h.matrix();
    let n = m.nrows();
    let comp = components(m);
    let mut pairs: Vec<(f64, CVector, usize)> = Vec::with_capacity(n);
    let mut roots: Vec<usize> = comp.clone();
    roots.sort_unstable();
    roots.dedup();
    for r in roots {
        let idx: Vec<usize> = (0..n).filter(|&i| comp[i] == r).collect();
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
        let eig = SymmetricEigen::try_new(sub, f64::EPSILON, MAX_SWEEPS)
            .ok_or(Error::EigenConvergence { dim: idx.len(), iterations: MAX_SWEEPS })?;
        for k in 0..idx.len() {
            let mut v = CVector::zeros(n);
            for (a, &i) in idx.iter().enumerate() {
                v[i] = eig.eigenvectors[(a, k)];
            }
            gauge_fix(&mut v);
            pairs.push((eig.eigenvalues[k], v, r));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut out = EigenSystem { values: Vec::new(), vectors: Vec::new(), blocks: Vec::new() };
    for (e, v, b) in pairs {
        out.values.push(e);
        out.vectors.push(v);
        out.blocks.push(b);
    }
    Ok(out)
}

/// A Hamiltonian family that is affine in the detuning, together with its
/// exact detuning derivative.
#[derive(Clone)]
pub struct DetuningFamily {
    build: Arc<dyn Fn(f64) -> HermitianMatrix + Send + Sync>,
    dh: HermitianMatrix,
}

impl std::fmt::Debug for DetuningFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DetuningFamily").field("dim", &self.dh.dim()).finish()
    }
}

impl DetuningFamily {
    pub fn new(
        build: impl Fn(f64) -> HermitianMatrix + Send + Sync + 'static,
        dh_deps: HermitianMatrix,
    ) -> Self {
        Self { build: Arc::new(build), dh: dh_deps }
    }

    pub fn at(&self, eps: f64) -> HermitianMatrix {
        (self.build)(eps)
    }

    pub fn dh_deps(&self) -> &HermitianMatrix {
        &self.dh
    }

    pub fn labels(&self) -> &[BasisState] {
        self.dh.labels()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrackOptions {
    pub exec: Execution,
    /// Adjacent overlaps below this trigger local refinement.
    pub refine_below: f64,
    /// Subdivisions per refinement level.
    pub refine_factor: usize,
    pub max_depth: usize,
    /// Hard continuity floor after refinement.
    pub min_overlap: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            exec: Execution::default(),
            refine_below: 0.9,
            refine_factor: 10,
            max_depth: 3,
            min_overlap: 0.5,
        }
    }
}

/// One continuously followed eigen-branch.
#[derive(Clone, Debug)]
pub struct Branch {
    /// Dominant basis state at the first grid node.
    pub anchor: BasisState,
    pub block: usize,
    pub energies: Vec<f64>,
    pub states: Vec<CVector>,
    pub bright: Vec<f64>,
    pub vertical: Vec<f64>,
    pub excitonic: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct BranchTrace {
    pub grid: Vec<f64>,
    pub branches: Vec<Branch>,
    family: DetuningFamily,
}

/// State observables evaluated on one vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub bright: f64,
    pub vertical: f64,
    pub excitonic: f64,
}

impl Observables {
    /// Vertical polarization relative to the excitonic weight.
    pub fn vertical_relative(&self) -> f64 {
        if self.excitonic > 0.0 {
            self.vertical / self.excitonic
        } else {
            0.0
        }
    }
}

/// Projectors for [`Observables`] on one basis.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    bright: HermitianMatrix,
    vertical: HermitianMatrix,
    excitonic: HermitianMatrix,
}

impl ObservableSet {
    pub fn new(labels: &[BasisState]) -> Self {
        Self {
            bright: bright_projector(labels),
            vertical: vertical_projector(labels),
            excitonic: excitonic_projector(labels),
        }
    }

    pub fn eval(&self, v: &CVector) -> Observables {
        Observables {
            bright: self.bright.expectation(v),
            vertical: self.vertical.expectation(v),
            excitonic: self.excitonic.expectation(v),
        }
    }

    pub fn bright(&self) -> &HermitianMatrix {
        &self.bright
    }
}

/// Bright-state content of `v` on the given basis.
pub fn bright_content(labels: &[BasisState], v: &CVector) -> f64 {
    bright_projector(labels).expectation(v)
}

/// Vertical polarization of `v` on the given basis.
pub fn vertical_polarization(labels: &[BasisState], v: &CVector) -> f64 {
    vertical_projector(labels).expectation(v)
}

fn overlap2(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm_sqr()
}

/// Replaces the eigenvectors of each degenerate cluster (same block, energies
/// within [`DEGENERACY_TOL`]) by the projections of the previous branch states,
/// orthonormalized in order of decreasing projected weight.
fn align_degenerate(prev: &[CVector], sys: &mut EigenSystem) {
    let n = sys.len();
    let mut k = 0;
    while k < n {
        let mut cluster = vec![k];
        let mut j = k + 1;
        while j < n && sys.values[j] - sys.values[k] < DEGENERACY_TOL {
            if sys.blocks[j] == sys.blocks[k] {
                cluster.push(j);
            }
            j += 1;
        }
        if cluster.len() > 1 {
            let basis: Vec<CVector> = cluster.iter().map(|&c| sys.vectors[c].clone()).collect();
            let project = |v: &CVector| {
                basis.iter().fold(CVector::zeros(v.len()), |acc, b| acc + b * b.dotc(v))
            };
            let mut cands: Vec<(f64, CVector)> = prev
                .iter()
                .map(|p| {
                    let q = project(p);
                    (q.norm_squared(), q)
                })
                .collect();
            cands.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut chosen: Vec<CVector> = Vec::new();
            for (_, q) in cands.into_iter().chain(basis.iter().map(|b| (1.0, b.clone()))) {
                if chosen.len() == cluster.len() {
                    break;
                }
                let mut w = q;
                for c in &chosen {
                    w -= c * c.dotc(&w);
                }
                let norm = w.norm();
                if norm > 1e-6 {
                    let mut w = w / C64::new(norm, 0.0);
                    gauge_fix(&mut w);
                    chosen.push(w);
                }
            }
            for (slot, v) in cluster.iter().zip(chosen) {
                sys.vectors[*slot] = v;
            }
        }
        k = j.max(k + 1);
    }
}

enum Matching {
    Done { assignment: Vec<usize>, min_overlap: f64 },
    Ambiguous,
}

/// Greedy maximum-overlap assignment of previous branches onto new
/// eigenvectors, restricted to equal blocks. Ties are broken by energy.
fn match_step(prev: &[CVector], prev_e: &[f64], blocks: &[usize], sys: &EigenSystem) -> Matching {
    let n = prev.len();
    let mut cand: Vec<(f64, f64, usize, usize)> = Vec::with_capacity(n * n);
    for a in 0..n {
        let mut best = [0.0f64; 2];
        let mut best_e = [0.0f64; 2];
        for b in 0..n {
            if sys.blocks[b] != blocks[a] {
                continue;
            }
            let o = overlap2(&prev[a], &sys.vectors[b]);
            let de = (sys.values[b] - prev_e[a]).abs();
            cand.push((o, de, a, b));
            if o > best[0] {
                best = [o, best[0]];
                best_e = [sys.values[b], best_e[0]];
            } else if o > best[1] {
                best[1] = o;
                best_e[1] = sys.values[b];
            }
        }
        let degenerate = (best_e[0] - best_e[1]).abs() < DEGENERACY_TOL;
        if best[0] >= 0.25 && best[0] - best[1] < 1e-6 && !degenerate {
            return Matching::Ambiguous;
        }
    }
    cand.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    let mut assignment = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut min_overlap = 1.0f64;
    for (o, _, a, b) in cand {
        if assignment[a] == usize::MAX && !taken[b] {
            assignment[a] = b;
            taken[b] = true;
            min_overlap = min_overlap.min(o);
        }
    }
    if assignment.contains(&usize::MAX) {
        return Matching::Ambiguous;
    }
    Matching::Done { assignment, min_overlap: min_overlap.sqrt() }
}

struct Walker<'a> {
    family: &'a DetuningFamily,
    opts: TrackOptions,
    grid: Vec<f64>,
    energies: Vec<Vec<f64>>,
    states: Vec<Vec<CVector>>,
    blocks: Vec<usize>,
}

impl Walker<'_> {
    fn last(&self) -> (Vec<CVector>, Vec<f64>) {
        let k = self.grid.len() - 1;
        (
            self.states.iter().map(|s| s[k].clone()).collect(),
            self.energies.iter().map(|e| e[k]).collect(),
        )
    }

    fn push(&mut self, eps: f64, sys: &EigenSystem, assignment: &[usize]) {
        self.grid.push(eps);
        for (a, &b) in assignment.iter().enumerate() {
            self.energies[a].push(sys.values[b]);
            self.states[a].push(sys.vectors[b].clone());
        }
    }

    /// Advances from the last accepted node to `eps`, refining if needed.
    fn step(&mut self, eps: f64, sys: Option<EigenSystem>, depth: usize) -> Result<()> {
        let mut sys = match sys {
            Some(s) => s,
            None => eigendecompose(&self.family.at(eps))?,
        };
        let (prev, prev_e) = self.last();
        align_degenerate(&prev, &mut sys);
        let matched = match_step(&prev, &prev_e, &self.blocks, &sys);
        let accept = match &matched {
            Matching::Done { min_overlap, .. } => *min_overlap >= self.opts.refine_below,
            Matching::Ambiguous => false,
        };
        if accept || depth >= self.opts.max_depth {
            return match matched {
                Matching::Done { assignment, min_overlap } if min_overlap >= self.opts.min_overlap => {
                    self.push(eps, &sys, &assignment);
                    Ok(())
                }
                Matching::Done { min_overlap, .. } => Err(Error::Tracking {
                    eps,
                    reason: format!(
                        "adjacent overlap {min_overlap:.3} below {} after refinement; use a finer grid",
                        self.opts.min_overlap
                    ),
                }),
                Matching::Ambiguous => Err(Error::Tracking {
                    eps,
                    reason: "ambiguous branch matching (equal overlaps); use a finer grid".into(),
                }),
            };
        }
        let start = *self.grid.last().expect("non-empty walk");
        let f = self.opts.refine_factor.max(2);
        for k in 1..f {
            let e = start + (eps - start) * k as f64 / f as f64;
            self.step(e, None, depth + 1)?;
        }
        self.step(eps, Some(sys), depth + 1)
    }
}

/// Follows every eigen-branch of `family` across `grid` (strictly increasing).
///
/// Eigensystems at the grid nodes are computed up front (in parallel when
/// enabled); the matching pass is sequential. Where adjacent overlaps drop
/// below `refine_below`, extra nodes are inserted and kept in the trace.
pub fn track_branches(family: &DetuningFamily, grid: &[f64], opts: TrackOptions) -> Result<BranchTrace> {
    if grid.is_empty() {
        return Err(Error::EmptyWindow { start: f64::NAN, stop: f64::NAN });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid", "nodes must be strictly increasing"));
    }
    let systems = try_map_indexed(grid.len(), opts.exec, |i| eigendecompose(&family.at(grid[i])))?;
    let first = &systems[0];
    let n = first.len();
    let mut walker = Walker {
        family,
        opts,
        grid: vec![grid[0]],
        energies: first.values.iter().map(|&e| vec![e]).collect(),
        states: first.vectors.iter().map(|v| vec![v.clone()]).collect(),
        blocks: first.blocks.clone(),
    };
    for (i, sys) in systems.into_iter().enumerate().skip(1) {
        walker.step(grid[i], Some(sys), 0)?;
    }
    let labels = family.labels().to_vec();
    let obs = ObservableSet::new(&labels);
    let Walker { grid, energies, states, blocks, .. } = walker;
    let branches = (0..n)
        .map(|a| {
            let v0 = &states[a][0];
            let k = (0..v0.len()).max_by(|&i, &j| v0[i].norm().total_cmp(&v0[j].norm())).unwrap_or(0);
            let o: Vec<Observables> = states[a].iter().map(|v| obs.eval(v)).collect();
            Branch {
                anchor: labels[k],
                block: blocks[a],
                energies: energies[a].clone(),
                states: states[a].clone(),
                bright: o.iter().map(|x| x.bright).collect(),
                vertical: o.iter().map(|x| x.vertical).collect(),
                excitonic: o.iter().map(|x| x.excitonic).collect(),
            }
        })
        .collect();
    Ok(BranchTrace { grid, branches, family: family.clone() })
}

impl BranchTrace {
    pub fn family(&self) -> &DetuningFamily {
        &self.family
    }

    pub fn labels(&self) -> &[BasisState] {
        self.family.labels()
    }

    /// Branch whose first-node state has the largest weight on `anchor`.
    pub fn branch_by_anchor(&self, anchor: &BasisState) -> Result<usize> {
        let k = self
            .labels()
            .iter()
            .position(|l| l == anchor)
            .ok_or_else(|| Error::UnknownBranch(anchor.to_string()))?;
        (0..self.branches.len())
            .max_by(|&a, &b| {
                let wa = self.branches[a].states[0][k].norm_sqr();
                let wb = self.branches[b].states[0][k].norm_sqr();
                wa.total_cmp(&wb)
            })
            .ok_or_else(|| Error::UnknownBranch(anchor.to_string()))
    }

    /// Index of the node equal to `eps` (within 1e-9 µeV).
    pub fn node(&self, eps: f64) -> Option<usize> {
        let i = self.grid.partition_point(|&g| g < eps - 1e-9);
        (i < self.grid.len() && (self.grid[i] - eps).abs() <= 1e-9).then_some(i)
    }

    fn nearest(&self, eps: f64) -> usize {
        let i = self.grid.partition_point(|&g| g < eps);
        if i == 0 {
            0
        } else if i == self.grid.len() || eps - self.grid[i - 1] <= self.grid[i] - eps {
            i - 1
        } else {
            i
        }
    }

    /// Node indices with `start <= ε <= stop`.
    pub fn window(&self, start: f64, stop: f64) -> std::ops::Range<usize> {
        let a = self.grid.partition_point(|&g| g < start - 1e-9);
        let b = self.grid.partition_point(|&g| g <= stop + 1e-9);
        a..b
    }

    /// Energy and state of `branch` at an arbitrary detuning inside the grid.
    pub fn state_at(&self, branch: usize, eps: f64) -> Result<(f64, CVector)> {
        if let Some(i) = self.node(eps) {
            let b = &self.branches[branch];
            return Ok((b.energies[i], b.states[i].clone()));
        }
        let i = self.nearest(eps);
        let sys = eigendecompose(&self.family.at(eps))?;
        self.match_into(branch, i, eps, &sys)
    }

    /// Picks the eigenpair of `sys` that continues `branch` from node `i`.
    pub fn match_into(&self, branch: usize, i: usize, eps: f64, sys: &EigenSystem) -> Result<(f64, CVector)> {
        let b = &self.branches[branch];
        let reference = &b.states[i];
        let (k, o) = (0..sys.len())
            .filter(|&k| sys.blocks[k] == b.block)
            .map(|k| (k, overlap2(reference, &sys.vectors[k])))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or_else(|| Error::Tracking { eps, reason: "block vanished".into() })?;
        if o < 0.25 {
            return Err(Error::Tracking { eps, reason: format!("best overlap {:.3} too small", o.sqrt()) });
        }
        Ok((sys.values[k], sys.vectors[k].clone()))
    }

    pub fn observables(&self, v: &CVector) -> Observables {
        ObservableSet::new(self.labels()).eval(v)
    }

    /// `|⟨a|∂H/∂ε|b⟩|` at node `i`.
    pub fn coupling(&self, a: usize, b: usize, i: usize) -> f64 {
        self.family.dh_deps().element(&self.branches[a].states[i], &self.branches[b].states[i]).norm()
    }
}

/// Exchange splitting `J = E_S − E_T0` of the double dot.
///
/// `T0` sits exactly at `V_−`; `E_S` is the eigenvalue of the
/// `{S(0,2), S(2,0), ↑↓, ↓↑}` block with the largest weight on the (1,1)
/// singlet.
pub fn exchange_splitting(p: &DeviceParams, eps_dd: f64) -> Result<f64> {
    let h = dd_h2e(p, eps_dd).restrict(&[0, 1, 2, 3]);
    let sys = eigendecompose(&h)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = CVector::from_vec(vec![
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(r, 0.0),
        C64::new(-r, 0.0),
    ]);
    let k = (0..sys.len())
        .max_by(|&a, &b| overlap2(&singlet, &sys.vectors[a]).total_cmp(&overlap2(&singlet, &sys.vectors[b])))
        .expect("non-empty");
    debug_assert!(matches!(h.labels()[0], BasisState::TwoElectron(Pair::S02)));
    Ok(sys.values[k] - p.v_minus)
}
