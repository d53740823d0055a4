//! Source operators, tensor positivity and covering-norm estimates.
//!
//! A source operator for a state `rho` on `H_1 x .. x H_N` with setting
//! counts `S_1..S_N` is a self-adjoint unit-trace operator on
//! `H_1^{x S_1} x .. x H_N^{x S_N}` whose marginal on every selection of one
//! copy per site equals `rho`. Slots are ordered site-major: all copies of
//! site 1 first, in setting order, then the copies of site 2, and so on.
//!
//! Feasible dilations form an affine space. Writing each slot's operator
//! space as `span{I}` plus its traceless complement, the constraints fix
//! exactly the components that carry traceless factors on at most one copy
//! per site; everything else is free. [`solve_source_operator`] uses this
//! to build the minimum-Frobenius dilation in closed form and to project
//! search directions onto the feasible space.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lhv::{lqhv_from_source, LqhvModel};
use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::{restart_rng, DensityState, PovmFamily};
use crate::tol;

#[derive(Clone, Debug)]
pub struct SourceOperator {
    site_dims: Vec<usize>,
    copies: Vec<usize>,
    matrix: CMatrix,
    base: DensityState,
}

impl SourceOperator {
    /// Wraps a matrix without checking the dilation property; see
    /// [`check_dilation`].
    pub fn from_matrix(base: &DensityState, copies: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let dim = copied_dim(base.dims(), &copies, usize::MAX)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "source operator must be {dim}x{dim}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(SourceOperator { site_dims: base.dims().to_vec(), copies, matrix, base: base.clone() })
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn copies(&self) -> &[usize] {
        &self.copies
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn base_state(&self) -> &DensityState {
        &self.base
    }

    /// Dimension of every slot, site-major.
    pub fn slot_dims(&self) -> Vec<usize> {
        slot_dims(&self.site_dims, &self.copies)
    }

    pub fn trace_norm(&self) -> f64 {
        linalg::trace_norm(&self.matrix)
    }
}

fn slot_dims(site_dims: &[usize], copies: &[usize]) -> Vec<usize> {
    site_dims.iter().zip(copies).flat_map(|(&d, &s)| std::iter::repeat_n(d, s)).collect()
}

fn slot_offsets(copies: &[usize]) -> Vec<usize> {
    copies
        .iter()
        .scan(0, |acc, &s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect()
}

fn copied_dim(site_dims: &[usize], copies: &[usize], cap: usize) -> Result<usize> {
    if copies.len() != site_dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} copy counts for {} sites",
            copies.len(),
            site_dims.len()
        )));
    }
    if copies.contains(&0) {
        return Err(Error::InvalidScenario("every site needs at least one copy".into()));
    }
    let mut dim: u128 = 1;
    for (&d, &s) in site_dims.iter().zip(copies) {
        for _ in 0..s {
            dim = dim.saturating_mul(d as u128);
        }
    }
    if dim > cap as u128 {
        return Err(Error::DimensionCapExceeded { dim, cap });
    }
    Ok(dim as usize)
}

/// Every selection `(s_1..s_N)` of one copy per site, row-major.
fn selections(copies: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = copies.iter().product();
    (0..total).map(|i| crate::scenario::mixed_radix_digits(i, copies)).collect()
}

/// `T = (x)_n rho_n^{x S_n}` for a product state.
pub fn product_source_operator(site_states: &[CMatrix], copies: &[usize]) -> Result<SourceOperator> {
    let base = DensityState::product(site_states)?;
    copied_dim(base.dims(), copies, tol::DEFAULT_COPIED_DIM_CAP)?;
    let factors: Vec<&CMatrix> = site_states
        .iter()
        .zip(copies)
        .flat_map(|(m, &s)| std::iter::repeat_n(m, s))
        .collect();
    let matrix = linalg::kron_all(factors);
    SourceOperator::from_matrix(&base, copies.to_vec(), matrix)
}

/// Convex mixture of product constructions for a separable state given by
/// `(weight, site states)` components.
pub fn separable_source_operator(components: &[(f64, Vec<CMatrix>)], copies: &[usize]) -> Result<SourceOperator> {
    let mut parts = Vec::with_capacity(components.len());
    let mut matrix: Option<CMatrix> = None;
    for (w, sites) in components {
        if *w < 0.0 {
            return Err(Error::InvalidState("negative mixture weight".into()));
        }
        let t = product_source_operator(sites, copies)?;
        parts.push((*w, t.base.clone()));
        let scaled = t.matrix.scale(*w);
        matrix = Some(match matrix {
            Some(m) => m + scaled,
            None => scaled,
        });
    }
    let base = DensityState::mixture(&parts)?;
    let matrix = matrix.ok_or_else(|| Error::InvalidState("empty decomposition".into()))?;
    SourceOperator::from_matrix(&base, copies.to_vec(), matrix)
}

/// Objective used by [`solve_source_operator`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum DilationObjective {
    #[default]
    MinFrobenius,
    /// Projected subgradient descent on the trace norm, started from the
    /// minimum-Frobenius solution; keeps the best iterate.
    MinTraceNorm { iterations: usize },
}

/// Applies `sum_A prod_{n in A} (1 - S_n) sum_{c} E_{K(A,c)}(marginal_K)`
/// where `K(A, c)` keeps copy `c_n` of every site outside `A`, and `E`
/// re-embeds with `I/d` on all other slots. With `marginal` taken from a
/// feasible operator this is the orthogonal projection onto the
/// constrained components; with `marginal` the state's own reduced
/// operators it yields the minimum-Frobenius dilation.
fn spread(site_dims: &[usize], copies: &[usize], marginal: impl Fn(&[usize], &[usize]) -> CMatrix) -> CMatrix {
    let slots = slot_dims(site_dims, copies);
    let offs = slot_offsets(copies);
    let dim: usize = slots.iter().product();
    let n = site_dims.len();
    let mut out = CMatrix::zeros(dim, dim);
    for mask in 0..(1usize << n) {
        // sites in `mask` are traced out entirely
        let kept_sites: Vec<usize> = (0..n).filter(|k| mask & (1 << k) == 0).collect();
        let coef: f64 = (0..n)
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| 1.0 - copies[k] as f64)
            .product();
        if coef == 0.0 {
            continue;
        }
        let kept_copies: Vec<usize> = kept_sites.iter().map(|&k| copies[k]).collect();
        for choice in selections(&kept_copies) {
            let keep: Vec<usize> = kept_sites.iter().zip(&choice).map(|(&k, &c)| offs[k] + c).collect();
            let block = marginal(&kept_sites, &keep);
            linalg::add_embedded_maximally_mixed(&mut out, &block, &slots, &keep, coef);
        }
    }
    out
}

/// Minimum-Frobenius dilation of `state`.
fn min_frobenius(state: &DensityState, copies: &[usize]) -> CMatrix {
    spread(state.dims(), copies, |sites, _| state.reduced(sites))
}

/// Orthogonal projection onto the components fixed by the dilation
/// constraints.
fn constrained_part(x: &CMatrix, site_dims: &[usize], copies: &[usize]) -> CMatrix {
    let slots = slot_dims(site_dims, copies);
    spread(site_dims, copies, |_, keep| linalg::partial_trace_keep(x, &slots, keep))
}

/// Solves the dilation constraints for `state` with `copies[n]` copies of
/// site `n`.
pub fn solve_source_operator(
    state: &DensityState,
    copies: &[usize],
    objective: DilationObjective,
) -> Result<SourceOperator> {
    solve_source_operator_with_cap(state, copies, objective, tol::DEFAULT_COPIED_DIM_CAP)
}

pub fn solve_source_operator_with_cap(
    state: &DensityState,
    copies: &[usize],
    objective: DilationObjective,
    cap: usize,
) -> Result<SourceOperator> {
    copied_dim(state.dims(), copies, cap)?;
    if copies.iter().all(|&s| s == 1) {
        return SourceOperator::from_matrix(state, copies.to_vec(), state.matrix().clone());
    }
    let mut t = min_frobenius(state, copies);
    if let DilationObjective::MinTraceNorm { iterations } = objective {
        t = descend_trace_norm(t, state.dims(), copies, iterations);
    }
    let op = SourceOperator::from_matrix(state, copies.to_vec(), t)?;
    let check = check_dilation(&op);
    if !check.passed {
        return Err(Error::DilationFailed(check.max_residual));
    }
    Ok(op)
}

fn descend_trace_norm(start: CMatrix, site_dims: &[usize], copies: &[usize], iterations: usize) -> CMatrix {
    let mut t = start;
    let mut best = t.clone();
    let mut best_norm = linalg::trace_norm(&t);
    let base_step = 0.25 * linalg::frobenius_norm(&t);
    for k in 0..iterations {
        let g = linalg::sign_matrix(&t);
        let free = &g - constrained_part(&g, site_dims, copies);
        let fnorm = linalg::frobenius_norm(&free);
        if fnorm < 1e-12 {
            break;
        }
        let step = base_step / ((k + 1) as f64).sqrt();
        t -= free.scale(step / fnorm);
        t = linalg::hermitian_part(&t);
        let norm = linalg::trace_norm(&t);
        if norm < best_norm {
            best_norm = norm;
            best = t.clone();
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilationCheck {
    pub passed: bool,
    /// Largest entrywise deviation of any selected marginal from the state.
    pub max_residual: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
}

/// Verifies every selection's partial-trace constraint.
pub fn check_dilation(t: &SourceOperator) -> DilationCheck {
    let slots = t.slot_dims();
    let offs = slot_offsets(&t.copies);
    let mut max_residual: f64 = 0.0;
    for sel in selections(&t.copies) {
        let keep: Vec<usize> = sel.iter().zip(&offs).map(|(c, o)| o + c).collect();
        let marginal = linalg::partial_trace_keep(&t.matrix, &slots, &keep);
        max_residual = max_residual.max(linalg::max_abs_diff(&marginal, t.base.matrix()));
    }
    let trace_error = (linalg::trace(&t.matrix) - linalg::c(1.0, 0.0)).norm();
    let hermiticity_error = linalg::hermiticity_error(&t.matrix);
    DilationCheck {
        passed: max_residual <= tol::FEASIBILITY && trace_error <= tol::FEASIBILITY && hermiticity_error <= tol::FEASIBILITY,
        max_residual,
        trace_error,
        hermiticity_error,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TensorPositivity {
    PsdCertified,
    NoViolationFound,
    Violated,
}

#[derive(Clone, Debug)]
pub struct TensorPositivityVerdict {
    pub status: TensorPositivity,
    /// Product unit vector attaining `value` (absent when certified by the
    /// spectrum alone).
    pub witness: Option<Vec<CVector>>,
    /// Smallest product expectation found, or the minimal eigenvalue when
    /// the operator is PSD.
    pub value: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { restarts: 32, max_sweeps: 200, tolerance: 1e-10, seed: 0 }
    }
}

/// `<phi_1 x .. x phi_m| W |phi_1 x .. x phi_m>`.
pub fn product_expectation(w: &CMatrix, dims: &[usize], vectors: &[CVector]) -> f64 {
    let projectors: Vec<CMatrix> = vectors.iter().map(linalg::projector).collect();
    let pairs: Vec<(usize, &CMatrix)> = projectors.iter().enumerate().collect();
    linalg::contract_slots(w, dims, &pairs)[(0, 0)].re
}

fn contract_all_but(w: &CMatrix, dims: &[usize], slot: usize, ops: &[CMatrix]) -> CMatrix {
    let pairs: Vec<(usize, &CMatrix)> = ops.iter().enumerate().filter(|(k, _)| *k != slot).collect();
    linalg::contract_slots(w, dims, &pairs)
}

/// Checks `tr[W (X_1 x .. x X_m)] >= 0` over positive `X_i`. Positive
/// operators are mixtures of rank-one projectors, so it suffices to look at
/// product unit vectors; the search minimizes one factor at a time via the
/// smallest eigenvector of the partially contracted operator.
pub fn tensor_positivity_check(w: &CMatrix, dims: &[usize], options: SearchOptions) -> TensorPositivityVerdict {
    let min_eig = linalg::min_eigenvalue(w);
    if min_eig >= -tol::MATRIX {
        return TensorPositivityVerdict { status: TensorPositivity::PsdCertified, witness: None, value: min_eig };
    }
    let runs: Vec<(f64, Vec<CVector>)> = (0..options.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(options.seed, r);
            minimize_product_expectation(w, dims, options, &mut rng)
        })
        .collect();
    let (value, witness) = runs
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one restart");
    let status = if value < -1e-8 { TensorPositivity::Violated } else { TensorPositivity::NoViolationFound };
    TensorPositivityVerdict { status, witness: Some(witness), value }
}

fn minimize_product_expectation<R: Rng>(w: &CMatrix, dims: &[usize], options: SearchOptions, rng: &mut R) -> (f64, Vec<CVector>) {
    let mut vectors: Vec<CVector> = dims.iter().map(|&d| linalg::random_unit_vector(d, rng)).collect();
    let mut value = product_expectation(w, dims, &vectors);
    for _ in 0..options.max_sweeps {
        let before = value;
        for k in 0..dims.len() {
            let projectors: Vec<CMatrix> = vectors.iter().map(linalg::projector).collect();
            let local = contract_all_but(w, dims, k, &projectors);
            let (_, basis) = linalg::eigh(&local);
            vectors[k] = basis.column(0).into_owned();
        }
        value = product_expectation(w, dims, &vectors);
        if before - value <= options.tolerance {
            break;
        }
    }
    (value, vectors)
}

/// A re-evaluable certificate for the lower end of a covering interval:
/// `tr[W (P x X)] - tr[W ((I - P) x Y)]` with `P` a projector on
/// `split_slot`, `X`, `Y` products of operators in `[0, I]` on the other
/// slots. For a single slot `X`, `Y` are empty.
#[derive(Clone, Debug)]
pub struct CoveringWitness {
    pub split_slot: usize,
    pub projector: CMatrix,
    pub plus: Vec<CMatrix>,
    pub minus: Vec<CMatrix>,
}

impl CoveringWitness {
    pub fn evaluate(&self, w: &CMatrix, dims: &[usize]) -> f64 {
        let d = dims[self.split_slot];
        let comp = linalg::identity(d) - &self.projector;
        let mut plus = self.plus.clone();
        plus.insert(self.split_slot, self.projector.clone());
        let mut minus = self.minus.clone();
        minus.insert(self.split_slot, comp);
        let tp = contract_with(w, dims, &plus);
        let tm = contract_with(w, dims, &minus);
        tp - tm
    }
}

fn contract_with(w: &CMatrix, dims: &[usize], ops: &[CMatrix]) -> f64 {
    let pairs: Vec<(usize, &CMatrix)> = ops.iter().enumerate().collect();
    linalg::contract_slots(w, dims, &pairs)[(0, 0)].re
}

#[derive(Clone, Debug)]
pub struct CoveringInterval {
    pub lower: f64,
    pub upper: f64,
    pub trace: f64,
    pub lower_witness: Option<CoveringWitness>,
    pub tensor_positivity: TensorPositivity,
    pub methods: Vec<String>,
}

/// Certified bracket `[lower, upper]` on the covering norm of `W`.
///
/// The upper end is the trace norm (`|W|` is PSD and dominates `+-W`). The
/// lower end comes from operators `A = P x X + (I-P) x Y` with
/// `I - A` a sum of products of positive operators: any covering `C` then
/// satisfies `tr[W (P x X)] - tr[W ((I-P) x Y)] <= tr[C A] <= tr[C]`.
/// It is floored at `|tr W|`.
pub fn covering_norm_interval(w: &CMatrix, dims: &[usize], options: SearchOptions) -> CoveringInterval {
    let upper = linalg::trace_norm(w);
    let trace = linalg::trace(w).re;
    let tp = tensor_positivity_check(w, dims, options);
    if tp.status == TensorPositivity::PsdCertified {
        return CoveringInterval {
            lower: trace.min(upper),
            upper,
            trace,
            lower_witness: None,
            tensor_positivity: tp.status,
            methods: vec!["psd: covering norm equals trace".into()],
        };
    }
    if dims.len() == 1 {
        // single factor: tensor positivity is ordinary positivity
        let p = linalg::positive_projector(w, 0.0);
        let witness = CoveringWitness { split_slot: 0, projector: p, plus: vec![], minus: vec![] };
        return CoveringInterval {
            lower: upper,
            upper,
            trace,
            lower_witness: Some(witness),
            tensor_positivity: tp.status,
            methods: vec!["single factor: covering norm equals trace norm".into()],
        };
    }
    let runs: Vec<(f64, CoveringWitness)> = (0..options.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(options.seed ^ 0x9e37_79b9_7f4a_7c15, r);
            let slot = r % dims.len();
            maximize_split(w, dims, slot, r < dims.len(), options, &mut rng)
        })
        .collect();
    let (best, witness) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one restart");
    let mut methods = vec!["upper: trace norm".to_string()];
    let (lower, lower_witness) = if best > trace.abs() {
        methods.push("lower: alternating split-product search".into());
        (best.min(upper), Some(witness))
    } else {
        methods.push("lower: |tr W|".into());
        (trace.abs().min(upper), None)
    };
    CoveringInterval { lower, upper, trace, lower_witness, tensor_positivity: tp.status, methods }
}

fn maximize_split<R: Rng>(
    w: &CMatrix,
    dims: &[usize],
    slot: usize,
    from_identity: bool,
    options: SearchOptions,
    rng: &mut R,
) -> (f64, CoveringWitness) {
    let random_projector = |d: usize, rng: &mut R| {
        let h = linalg::random_hermitian(d, rng);
        linalg::positive_projector(&h, 0.0)
    };
    let others: Vec<usize> = (0..dims.len()).filter(|&k| k != slot).collect();
    let mut witness = CoveringWitness {
        split_slot: slot,
        projector: random_projector(dims[slot], rng),
        plus: others
            .iter()
            .map(|&k| if from_identity { linalg::identity(dims[k]) } else { random_projector(dims[k], rng) })
            .collect(),
        minus: others
            .iter()
            .map(|&k| if from_identity { linalg::identity(dims[k]) } else { random_projector(dims[k], rng) })
            .collect(),
    };
    let mut value = witness.evaluate(w, dims);
    for _ in 0..options.max_sweeps {
        let before = value;
        // split slot: maximize tr[(C_plus + C_minus) P]
        {
            let mut plus = witness.plus.clone();
            plus.insert(slot, linalg::identity(dims[slot]));
            let mut minus = witness.minus.clone();
            minus.insert(slot, linalg::identity(dims[slot]));
            let cp = contract_all_but(w, dims, slot, &plus);
            let cm = contract_all_but(w, dims, slot, &minus);
            witness.projector = linalg::positive_projector(&linalg::hermitian_part(&(cp + cm)), 0.0);
        }
        for (idx, &k) in others.iter().enumerate() {
            let comp = linalg::identity(dims[slot]) - &witness.projector;
            let mut plus = witness.plus.clone();
            plus.insert(slot, witness.projector.clone());
            let mut minus = witness.minus.clone();
            minus.insert(slot, comp);
            let a = contract_all_but(w, dims, k, &plus);
            let b = contract_all_but(w, dims, k, &minus);
            witness.plus[idx] = linalg::positive_projector(&linalg::hermitian_part(&a), 0.0);
            witness.minus[idx] = linalg::negative_projector(&linalg::hermitian_part(&b), 0.0);
        }
        value = witness.evaluate(w, dims);
        if value - before <= options.tolerance {
            break;
        }
    }
    (value, witness)
}

/// Candidate families of source operators tried by [`upsilon_upper_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CandidateKind {
    /// `(x)_n rho_n^{x S_n}`; only available for product states.
    Product,
    /// Minimum-Frobenius solution of the dilation constraints.
    Solve,
    /// Trace-norm descent from the minimum-Frobenius solution.
    TraceNorm,
}

impl CandidateKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(CandidateKind::Product),
            "solve" => Ok(CandidateKind::Solve),
            "trace-norm" | "tracenorm" => Ok(CandidateKind::TraceNorm),
            _ => Err(Error::Parse(format!("unknown candidate family `{s}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CandidateKind::Product => "product",
            CandidateKind::Solve => "solve",
            CandidateKind::TraceNorm => "trace-norm",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DilationBoundOptions {
    pub candidates: Vec<CandidateKind>,
    pub search: SearchOptions,
    pub trace_norm_iterations: usize,
    pub copied_dim_cap: usize,
}

impl Default for DilationBoundOptions {
    fn default() -> Self {
        DilationBoundOptions {
            candidates: vec![CandidateKind::Product, CandidateKind::Solve, CandidateKind::TraceNorm],
            search: SearchOptions { restarts: 8, ..Default::default() },
            trace_norm_iterations: 300,
            copied_dim_cap: tol::DEFAULT_COPIED_DIM_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CandidateReport {
    /// Site carrying a single copy (0-based).
    pub site: usize,
    pub kind: CandidateKind,
    pub copies: Vec<usize>,
    pub interval: CoveringInterval,
    pub dilation_residual: f64,
}

#[derive(Clone, Debug)]
pub struct DilationBound {
    /// Upper bound on the maximal Bell violation.
    pub bound: f64,
    pub candidates: Vec<CandidateReport>,
    pub best: SourceOperator,
}

/// Upper bound on the maximal violation for `settings` from the covering
/// norms of candidate source operators with one copy at some site.
pub fn upsilon_upper_bound(state: &DensityState, settings: &[usize], options: &DilationBoundOptions) -> Result<DilationBound> {
    if settings.len() != state.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "{} setting counts for {} sites",
            settings.len(),
            state.n_sites()
        )));
    }
    let product = state.product_factors(tol::MATRIX);
    let mut reports = Vec::new();
    let mut best: Option<(f64, SourceOperator)> = None;
    let mut last_err = None;
    for site in 0..state.n_sites() {
        let mut copies = settings.to_vec();
        copies[site] = 1;
        if let Err(e) = copied_dim(state.dims(), &copies, options.copied_dim_cap) {
            last_err = Some(e);
            continue;
        }
        for &kind in &options.candidates {
            let op = match kind {
                CandidateKind::Product => match &product {
                    Some(f) => product_source_operator(f, &copies)?,
                    None => continue,
                },
                CandidateKind::Solve => solve_source_operator_with_cap(state, &copies, DilationObjective::MinFrobenius, options.copied_dim_cap)?,
                CandidateKind::TraceNorm => solve_source_operator_with_cap(
                    state,
                    &copies,
                    DilationObjective::MinTraceNorm { iterations: options.trace_norm_iterations },
                    options.copied_dim_cap,
                )?,
            };
            let check = check_dilation(&op);
            if !check.passed {
                return Err(Error::DilationFailed(check.max_residual));
            }
            let interval = covering_norm_interval(op.matrix(), &op.slot_dims(), options.search);
            let upper = interval.upper;
            reports.push(CandidateReport { site, kind, copies: copies.clone(), interval, dilation_residual: check.max_residual });
            if best.as_ref().is_none_or(|(b, _)| upper < *b) {
                best = Some((upper, op));
            }
        }
    }
    match best {
        Some((bound, op)) => Ok(DilationBound { bound: bound.max(1.0), candidates: reports, best: op }),
        None => Err(last_err.unwrap_or_else(|| Error::InvalidState("no candidate dilation available".into()))),
    }
}

/// An LHV description extracted from a source operator that is not known to
/// fail tensor positivity.
#[derive(Clone, Debug)]
pub struct LhvCertificate {
    pub model: LqhvModel,
    pub status: TensorPositivity,
    /// The source operator is PSD, so every choice of measurements yields a
    /// nonnegative hidden-variable measure.
    pub certified_all_measurements: bool,
    /// The measure for the supplied measurements is nonnegative.
    pub nonnegative: bool,
}

pub fn lhv_certificate_from_tensor_positive(t: &SourceOperator, povms: &PovmFamily, options: SearchOptions) -> Result<LhvCertificate> {
    let verdict = tensor_positivity_check(t.matrix(), &t.slot_dims(), options);
    if verdict.status == TensorPositivity::Violated {
        return Err(Error::NotTensorPositive(verdict.value));
    }
    let model = lqhv_from_source(t, povms)?;
    let nonnegative = model.nu().iter().all(|v| *v >= -tol::NONNEGATIVE);
    Ok(LhvCertificate {
        model,
        status: verdict.status,
        certified_all_measurements: verdict.status == TensorPositivity::PsdCertified,
        nonnegative,
    })
}
