//! Finite-dimensional states, POVM families, joint probabilities and seesaw
//! search for violating measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::scenario::{behavior_average, BellFunctional, Behavior, Scenario};
use crate::tol;

/// A density matrix on `C^{d_1} x .. x C^{d_N}`.
#[derive(Clone, Debug)]
pub struct DensityState {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityState {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        Self::with_cap(dims, matrix, tol::DEFAULT_STATE_DIM_CAP)
    }

    pub fn with_cap(dims: Vec<usize>, matrix: CMatrix, cap: usize) -> Result<Self> {
        let dim = check_dims(&dims, cap)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "state matrix is {}x{}, site dimensions give {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > tol::MATRIX {
            return Err(Error::InvalidState(format!("not self-adjoint (error {herm:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > tol::MATRIX || tr.im.abs() > tol::MATRIX {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -tol::MATRIX {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityState { dims, matrix: linalg::hermitian_part(&matrix) })
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = amplitudes / c(norm, 0.0);
        Self::new(dims, linalg::projector(&v))
    }

    /// `rho_1 x .. x rho_N`.
    pub fn product(sites: &[CMatrix]) -> Result<Self> {
        let dims = sites.iter().map(|m| m.nrows()).collect();
        Self::new(dims, linalg::kron_all(sites))
    }

    /// Convex combination of states with identical site dimensions.
    pub fn mixture(parts: &[(f64, DensityState)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let mut m = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, s) in parts {
            if s.dims != first.1.dims {
                return Err(Error::DimensionMismatch("mixture components differ in dimensions".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidState("negative mixture weight".into()));
            }
            m += s.matrix.scale(*w);
        }
        Self::new(first.1.dims.clone(), m)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::new(dims, linalg::identity(d).scale(1.0 / d as f64))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    /// Reduced state on the listed sites (ascending).
    pub fn reduced(&self, sites: &[usize]) -> CMatrix {
        linalg::partial_trace_keep(&self.matrix, &self.dims, sites)
    }

    /// Single-site reduced states when `rho` equals their tensor product
    /// within `tolerance`, otherwise `None`.
    pub fn product_factors(&self, tolerance: f64) -> Option<Vec<CMatrix>> {
        let factors: Vec<CMatrix> = (0..self.n_sites()).map(|n| self.reduced(&[n])).collect();
        let prod = linalg::kron_all(&factors);
        (linalg::max_abs_diff(&prod, &self.matrix) <= tolerance).then_some(factors)
    }
}

pub(crate) fn check_dims(dims: &[usize], cap: usize) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidState("site dimensions must be positive".into()));
    }
    let dim: u128 = dims.iter().fold(1u128, |a, &d| a.saturating_mul(d as u128));
    if dim > cap as u128 {
        return Err(Error::DimensionCapExceeded { dim, cap });
    }
    Ok(dim as usize)
}

/// The `N`-qudit GHZ state `d^{-1/2} sum_j |j>^{x N}`.
pub fn ghz_qudit(n: usize, d: usize) -> Result<DensityState> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidState("GHZ needs N >= 2 and d >= 2".into()));
    }
    let dims = vec![d; n];
    let dim = check_dims(&dims, tol::DEFAULT_STATE_DIM_CAP)?;
    let mut v = CVector::zeros(dim);
    // |j..j> sits at j * (1 + d + d^2 + ..)
    let step: usize = (0..n).map(|k| d.pow(k as u32)).sum();
    for j in 0..d {
        v[j * step] = c(1.0, 0.0);
    }
    DensityState::pure(dims, v)
}

/// `sin(phi) |1>^{x N} + cos(phi) |2>^{x N}` on qubits, with `|1>`, `|2>`
/// the first and second basis vectors.
pub fn generalized_ghz(n: usize, phi: f64) -> Result<DensityState> {
    if n < 2 {
        return Err(Error::InvalidState("generalized GHZ needs N >= 2".into()));
    }
    let dims = vec![2; n];
    let dim = check_dims(&dims, tol::DEFAULT_STATE_DIM_CAP)?;
    let mut v = CVector::zeros(dim);
    v[0] = c(phi.sin(), 0.0);
    v[dim - 1] = c(phi.cos(), 0.0);
    DensityState::pure(dims, v)
}

/// `(|01> - |10>) / sqrt 2`.
pub fn singlet() -> DensityState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = CVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
    DensityState::pure(vec![2, 2], v).expect("static state")
}

/// Reduced state of a Haar-random pure state on the doubled space
/// (equivalently a normalized Wishart matrix).
pub fn random_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<DensityState> {
    let d = check_dims(dims, tol::DEFAULT_STATE_DIM_CAP)?;
    let g = linalg::random_ginibre(d, d, rng);
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    DensityState::new(dims.to_vec(), w.scale(1.0 / tr))
}

/// POVM elements indexed `[party][setting][outcome]`, together with the
/// scenario they realize.
#[derive(Clone, Debug)]
pub struct PovmFamily {
    scenario: Scenario,
    elements: Vec<Vec<Vec<CMatrix>>>,
}

impl PovmFamily {
    /// Outcomes are labelled `0..L_n`.
    pub fn new(elements: Vec<Vec<Vec<CMatrix>>>) -> Result<Self> {
        let settings = elements.iter().map(Vec::len).collect::<Vec<_>>();
        let counts = elements
            .iter()
            .map(|p| p.first().map_or(0, Vec::len))
            .collect::<Vec<_>>();
        let scenario = Scenario::labelled(settings, &counts)?;
        Self::with_scenario(&scenario, elements)
    }

    pub fn with_scenario(scenario: &Scenario, elements: Vec<Vec<Vec<CMatrix>>>) -> Result<Self> {
        if elements.len() != scenario.n_parties() {
            return Err(Error::DimensionMismatch("one POVM list per party required".into()));
        }
        for (n, party) in elements.iter().enumerate() {
            if party.len() != scenario.settings()[n] {
                return Err(Error::DimensionMismatch(format!(
                    "party {} has {} measurements, scenario expects {}",
                    n + 1,
                    party.len(),
                    scenario.settings()[n]
                )));
            }
            let d = party[0].first().map_or(0, |m| m.nrows());
            for (s, povm) in party.iter().enumerate() {
                if povm.len() != scenario.outcomes()[n].len() {
                    return Err(Error::DimensionMismatch(format!(
                        "party {} setting {} has {} outcomes, scenario expects {}",
                        n + 1,
                        s + 1,
                        povm.len(),
                        scenario.outcomes()[n].len()
                    )));
                }
                let mut sum = CMatrix::zeros(d, d);
                for m in povm {
                    if m.nrows() != d || m.ncols() != d {
                        return Err(Error::DimensionMismatch(format!(
                            "party {} mixes element dimensions",
                            n + 1
                        )));
                    }
                    if linalg::hermiticity_error(m) > tol::MATRIX || linalg::min_eigenvalue(m) < -tol::MATRIX {
                        return Err(Error::InvalidPovm(format!(
                            "party {} setting {} has a non-positive element",
                            n + 1,
                            s + 1
                        )));
                    }
                    sum += m;
                }
                if linalg::max_abs_diff(&sum, &linalg::identity(d)) > tol::MATRIX {
                    return Err(Error::InvalidPovm(format!(
                        "party {} setting {} does not sum to the identity",
                        n + 1,
                        s + 1
                    )));
                }
            }
        }
        Ok(PovmFamily { scenario: scenario.clone(), elements })
    }

    /// Projective measurements in the eigenbases of random Hermitian
    /// matrices; basis vector `k` is assigned to outcome `k mod L`.
    pub fn random_projective<R: Rng + ?Sized>(scenario: &Scenario, dims: &[usize], rng: &mut R) -> Result<Self> {
        if dims.len() != scenario.n_parties() {
            return Err(Error::DimensionMismatch("one dimension per party required".into()));
        }
        let mut elements = Vec::new();
        for (n, &d) in dims.iter().enumerate() {
            let l = scenario.outcomes()[n].len();
            let mut party = Vec::new();
            for _ in 0..scenario.settings()[n] {
                let (_, basis) = linalg::eigh(&linalg::random_hermitian(d, rng));
                party.push(assign_basis(&basis, &(0..d).map(|k| k % l).collect::<Vec<_>>(), l));
            }
            elements.push(party);
        }
        Self::with_scenario(scenario, elements)
    }

    /// Same elements, reinterpreted in a scenario of the same shape
    /// (typically to attach numeric outcome values).
    pub fn relabel(&self, scenario: &Scenario) -> Result<Self> {
        Self::with_scenario(scenario, self.elements.clone())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn dims(&self) -> Vec<usize> {
        self.elements.iter().map(|p| p[0][0].nrows()).collect()
    }

    pub fn element(&self, party: usize, setting: usize, outcome: usize) -> &CMatrix {
        &self.elements[party][setting][outcome]
    }

    pub fn measurement(&self, party: usize, setting: usize) -> &[CMatrix] {
        &self.elements[party][setting]
    }

    pub fn elements(&self) -> &[Vec<Vec<CMatrix>>] {
        &self.elements
    }
}

fn assign_basis(basis: &CMatrix, labels: &[usize], outcomes: usize) -> Vec<CMatrix> {
    let d = basis.nrows();
    let mut out = vec![CMatrix::zeros(d, d); outcomes];
    for (k, &l) in labels.iter().enumerate() {
        out[l] += linalg::projector(&basis.column(k).into_owned());
    }
    out
}

/// `tr[op (X_1 x .. x X_N)]` for every choice of one operator per slot,
/// row-major with the first slot slowest.
pub(crate) fn product_traces(op: &CMatrix, dims: &[usize], lists: &[&[CMatrix]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lists.iter().map(|l| l.len()).product());
    product_traces_rec(op, dims, lists, &mut out);
    out
}

fn product_traces_rec(op: &CMatrix, dims: &[usize], lists: &[&[CMatrix]], out: &mut Vec<f64>) {
    match lists.split_first() {
        None => out.push(op[(0, 0)].re),
        Some((first, rest)) => {
            for x in first.iter() {
                let reduced = linalg::contract_slot(op, dims, 0, x);
                product_traces_rec(&reduced, &dims[1..], rest, out);
            }
        }
    }
}

/// Operators on `slot` obtained by contracting every other slot with one
/// operator from its list, row-major over the other slots.
fn reduce_to_slot(op: &CMatrix, dims: &[usize], slot: usize, lists: &[&[CMatrix]]) -> Vec<CMatrix> {
    let mut out = Vec::new();
    reduce_rec(op, dims.to_vec(), slot, lists, 0, &mut out);
    out
}

fn reduce_rec(op: &CMatrix, dims: Vec<usize>, slot: usize, lists: &[&[CMatrix]], party: usize, out: &mut Vec<CMatrix>) {
    if party == lists.len() {
        out.push(op.clone());
        return;
    }
    if party == slot {
        return reduce_rec(op, dims, slot, lists, party + 1, out);
    }
    // The slot being contracted sits at position 0 once earlier ones are gone,
    // or at 1 when the kept slot precedes it.
    let pos = usize::from(party > slot);
    for x in lists[party].iter() {
        let reduced = linalg::contract_slot(op, &dims, pos, x);
        let mut next = dims.clone();
        next.remove(pos);
        reduce_rec(&reduced, next, slot, lists, party + 1, out);
    }
}

/// `P(l_1..l_N | s_1..s_N) = tr[rho (M_1^{s_1}(l_1) x .. x M_N^{s_N}(l_N))]`.
pub fn joint_probabilities(state: &DensityState, povms: &PovmFamily) -> Result<Behavior> {
    if state.dims() != povms.dims().as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "state dimensions {:?} vs POVM dimensions {:?}",
            state.dims(),
            povms.dims()
        )));
    }
    let sc = povms.scenario();
    let mut tables = Vec::with_capacity(sc.table_len());
    for st in 0..sc.setting_tuples() {
        let tuple = sc.setting_tuple(st);
        let lists: Vec<&[CMatrix]> = tuple.iter().enumerate().map(|(n, &s)| povms.measurement(n, s)).collect();
        tables.extend(product_traces(state.matrix(), state.dims(), &lists));
    }
    // Clamp round-off below zero; genuine negatives cannot arise from PSD inputs.
    for p in tables.iter_mut() {
        if *p < 0.0 && *p > -tol::MATRIX {
            *p = 0.0;
        }
    }
    Behavior::new(sc, tables, false)
}

/// Outcome of a seesaw search.
#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub povms: PovmFamily,
    pub value: f64,
    /// Functional value after each sweep (nondecreasing).
    pub history: Vec<f64>,
    pub converged: bool,
    pub restart: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions { restarts: 32, max_sweeps: 200, tolerance: 1e-10, seed: 0 }
    }
}

/// Best value of `functional` over projective measurements on `state`
/// found by alternating optimization from random starting points.
pub fn seesaw_optimize(state: &DensityState, functional: &BellFunctional, options: SeesawOptions) -> Result<SeesawResult> {
    let sc = functional.scenario();
    if sc.n_parties() != state.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "functional has {} parties, state has {} sites",
            sc.n_parties(),
            state.n_sites()
        )));
    }
    let runs: Vec<Result<SeesawResult>> = (0..options.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(options.seed, r);
            let init = PovmFamily::random_projective(sc, state.dims(), &mut rng)?;
            let mut res = seesaw_from(state, functional, init, options.max_sweeps, options.tolerance)?;
            res.restart = r;
            Ok(res)
        })
        .collect();
    let mut best: Option<SeesawResult> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Generator used for every seeded draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Seesaw iterations from a given starting family.
pub fn seesaw_from(
    state: &DensityState,
    functional: &BellFunctional,
    init: PovmFamily,
    max_sweeps: usize,
    tolerance: f64,
) -> Result<SeesawResult> {
    let sc = functional.scenario().clone();
    let mut povms = init.relabel(&sc)?;
    let mut value = behavior_average(&joint_probabilities(state, &povms)?, functional)?;
    let mut history = vec![value];
    let mut converged = false;
    for _ in 0..max_sweeps {
        let before = value;
        for party in 0..sc.n_parties() {
            let (next, v) = improve_party(state, functional, &povms, party, value)?;
            povms = next;
            value = v;
        }
        history.push(value);
        if value - before <= tolerance * (1.0 + before.abs()) {
            converged = true;
            break;
        }
    }
    Ok(SeesawResult { povms, value, history, converged, restart: 0 })
}

/// Single-site coefficient operators `G[s][l]` such that the functional
/// value equals `sum_{s,l} tr[G[s][l] M_party^{s}(l)]` with the other
/// parties' measurements held fixed.
fn induced_operators(state: &DensityState, functional: &BellFunctional, povms: &PovmFamily, party: usize) -> Vec<Vec<CMatrix>> {
    let sc = functional.scenario();
    let dims = state.dims();
    let d = dims[party];
    let counts = sc.outcome_counts();
    let ot = sc.outcome_tuples();
    let mut g = vec![vec![CMatrix::zeros(d, d); counts[party]]; sc.settings()[party]];
    let other_counts: Vec<usize> = (0..sc.n_parties()).filter(|&m| m != party).map(|m| counts[m]).collect();
    let mut cache: std::collections::HashMap<Vec<usize>, Vec<CMatrix>> = Default::default();
    for st in 0..sc.setting_tuples() {
        let tuple = sc.setting_tuple(st);
        let coeffs = &functional.coeffs()[st * ot..(st + 1) * ot];
        if coeffs.iter().all(|v| *v == 0.0) {
            continue;
        }
        let key: Vec<usize> = tuple.iter().enumerate().filter(|(m, _)| *m != party).map(|(_, &s)| s).collect();
        let reduced = cache.entry(key).or_insert_with(|| {
            let lists: Vec<&[CMatrix]> = tuple
                .iter()
                .enumerate()
                .map(|(m, &s)| if m == party { &[][..] } else { povms.measurement(m, s) })
                .collect();
            reduce_to_slot(state.matrix(), dims, party, &lists)
        });
        for (o, &coef) in coeffs.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            let outcome = sc.outcome_tuple(o);
            let others: Vec<usize> = outcome.iter().enumerate().filter(|(m, _)| *m != party).map(|(_, &l)| l).collect();
            let idx = crate::scenario::mixed_radix_index(&others, &other_counts);
            g[tuple[party]][outcome[party]] += reduced[idx].scale(coef);
        }
    }
    g
}

fn measurement_value(g: &[CMatrix], m: &[CMatrix]) -> f64 {
    g.iter().zip(m).map(|(a, b)| linalg::trace_product(a, b).re).sum()
}

/// Best projective measurement found for the coefficient operators `g`,
/// starting from `current`; never returns something worse than `current`.
fn best_measurement(g: &[CMatrix], current: &[CMatrix]) -> Vec<CMatrix> {
    let l = g.len();
    let d = g[0].nrows();
    let mut best = current.to_vec();
    let mut best_value = measurement_value(g, &best);
    let consider = |cand: Vec<CMatrix>, best: &mut Vec<CMatrix>, best_value: &mut f64| {
        let v = measurement_value(g, &cand);
        if v > *best_value + 1e-14 * (1.0 + best_value.abs()) {
            *best_value = v;
            *best = cand;
        }
    };
    if l == 1 {
        return vec![linalg::identity(d)];
    }
    if l == 2 {
        let p = linalg::positive_projector(&(&g[0] - &g[1]), 0.0);
        let q = linalg::identity(d) - &p;
        consider(vec![p, q], &mut best, &mut best_value);
        return best;
    }
    // Basis candidates: eigenbases of each G_l, each vector sent to the
    // outcome that rewards it most.
    for gl in g {
        let (_, basis) = linalg::eigh(gl);
        let labels: Vec<usize> = (0..d)
            .map(|k| {
                let v = basis.column(k).into_owned();
                (0..l)
                    .map(|o| (v.adjoint() * &g[o] * &v)[(0, 0)].re)
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (o, w)| if w > acc.1 { (o, w) } else { acc })
                    .0
            })
            .collect();
        consider(assign_basis(&basis, &labels, l), &mut best, &mut best_value);
    }
    // Pairwise re-splits inside the support of two outcomes; each is optimal
    // for that pair given the rest.
    for _ in 0..4 {
        for a in 0..l {
            for b in a + 1..l {
                // orthonormal basis of the joint support, so both halves are
                // exact projectors
                let (weights, vecs) = linalg::eigh(&(&best[a] + &best[b]));
                let keep: Vec<usize> = (0..d).filter(|&k| weights[k] > 0.5).collect();
                if keep.is_empty() {
                    continue;
                }
                let u = CMatrix::from_fn(d, keep.len(), |i, k| vecs[(i, keep[k])]);
                let (split, inner) = linalg::eigh(&linalg::hermitian_part(&(u.adjoint() * (&g[a] - &g[b]) * &u)));
                let mut pa = CMatrix::zeros(d, d);
                let mut pb = CMatrix::zeros(d, d);
                for (k, w) in split.iter().enumerate() {
                    let v = &u * inner.column(k);
                    if *w > 0.0 {
                        pa += linalg::projector(&v);
                    } else {
                        pb += linalg::projector(&v);
                    }
                }
                let mut cand = best.clone();
                cand[a] = pa;
                cand[b] = pb;
                consider(cand, &mut best, &mut best_value);
            }
        }
    }
    best
}

fn improve_party(
    state: &DensityState,
    functional: &BellFunctional,
    povms: &PovmFamily,
    party: usize,
    current_value: f64,
) -> Result<(PovmFamily, f64)> {
    let g = induced_operators(state, functional, povms, party);
    let mut elements = povms.elements().to_vec();
    for (s, gs) in g.iter().enumerate() {
        elements[party][s] = best_measurement(gs, &elements[party][s]);
    }
    let next = PovmFamily::with_scenario(povms.scenario(), elements)?;
    let value = behavior_average(&joint_probabilities(state, &next)?, functional)?;
    if value + 1e-12 * (1.0 + current_value.abs()) < current_value {
        return Ok((povms.clone(), current_value));
    }
    Ok((next, value.max(current_value)))
}

/// Spin measurement along a Bloch vector: elements for outcomes `+1`, `-1`.
pub fn spin_measurement(axis: [f64; 3]) -> Vec<CMatrix> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
    let sigma = CMatrix::from_row_slice(2, 2, &[c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0)]);
    let id = linalg::identity(2);
    vec![(&id + &sigma).scale(0.5), (&id - &sigma).scale(0.5)]
}
