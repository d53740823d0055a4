//! LHV constants, inequality checks, the maximal violation and
//! quasi hidden variable models.
//!
//! The maximal violation of a behavior `P` is computed as
//!
//! ```text
//! Upsilon(P) = min { sum_i |c_i| : sum_i c_i D_i = P }
//! ```
//!
//! over the deterministic behaviors `D_i`. Its linear-programming dual is
//! `max <psi, P>` over functionals with `|<psi, D_i>| <= 1` for every `i`,
//! which is the supremum of `|<psi, P>| / B_psi`. The dual solution is kept
//! as a witness functional.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilation::{check_dilation, SourceOperator};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::lp::{LinearProgram, LpError};
use crate::quantum::{joint_probabilities, product_traces, restart_rng, seesaw_from, DensityState, PovmFamily};
use crate::scenario::{
    behavior_average, enumerate_strategies, mixed_radix_digits, BellFunctional, Behavior, DeterministicStrategy, Scenario,
};
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct LhvConstants {
    pub b_sup: f64,
    pub b_inf: f64,
    /// `max(|b_sup|, |b_inf|)`.
    pub b_max: f64,
    pub witness_sup: DeterministicStrategy,
    pub witness_inf: DeterministicStrategy,
    /// The functional vanishes on every deterministic strategy.
    pub degenerate: bool,
}

/// Extreme values of the functional over deterministic strategies.
///
/// Strategies of all parties but the last are enumerated; the last party's
/// outputs enter additively per setting and are optimized independently.
/// Ties go to the lowest outcome index, so witnesses are reproducible.
pub fn lhv_constants(functional: &BellFunctional) -> Result<LhvConstants> {
    let sc = functional.scenario();
    sc.check_strategy_cap()?;
    let n = sc.n_parties();
    let counts = sc.outcome_counts();
    let last_l = counts[n - 1];
    let last_s = sc.settings()[n - 1];
    let ot = sc.outcome_tuples();

    // digit radices for parties 0..n-1 (excluding the last)
    let radices: Vec<usize> = (0..n - 1).flat_map(|k| std::iter::repeat_n(counts[k], sc.settings()[k])).collect();
    let partial_count: usize = radices.iter().product();
    let tuples: Vec<Vec<usize>> = (0..sc.setting_tuples()).map(|st| sc.setting_tuple(st)).collect();
    let coeffs = functional.coeffs();

    let mut best_sup: Option<(f64, Vec<Vec<usize>>)> = None;
    let mut best_inf: Option<(f64, Vec<Vec<usize>>)> = None;
    let mut score = vec![0.0; last_s * last_l];
    for p in 0..partial_count {
        let digits = mixed_radix_digits(p, &radices);
        let mut assignment: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut pos = 0;
        for k in 0..n - 1 {
            let s = sc.settings()[k];
            assignment.push(digits[pos..pos + s].to_vec());
            pos += s;
        }
        score.iter_mut().for_each(|v| *v = 0.0);
        for (st, tuple) in tuples.iter().enumerate() {
            let mut o = 0;
            for k in 0..n - 1 {
                o = o * counts[k] + assignment[k][tuple[k]];
            }
            let base = st * ot + o * last_l;
            let row = &mut score[tuple[n - 1] * last_l..(tuple[n - 1] + 1) * last_l];
            for (r, c) in row.iter_mut().zip(&coeffs[base..base + last_l]) {
                *r += c;
            }
        }
        let pick = |better: fn(f64, f64) -> bool| -> (f64, Vec<usize>) {
            let mut total = 0.0;
            let mut outs = Vec::with_capacity(last_s);
            for s in 0..last_s {
                let row = &score[s * last_l..(s + 1) * last_l];
                let mut arg = 0;
                for l in 1..last_l {
                    if better(row[l], row[arg]) {
                        arg = l;
                    }
                }
                total += row[arg];
                outs.push(arg);
            }
            (total, outs)
        };
        let (hi, hi_out) = pick(|a, b| a > b);
        let (lo, lo_out) = pick(|a, b| a < b);
        if best_sup.as_ref().is_none_or(|(v, _)| hi > *v) {
            let mut a = assignment.clone();
            a.push(hi_out);
            best_sup = Some((hi, a));
        }
        if best_inf.as_ref().is_none_or(|(v, _)| lo < *v) {
            let mut a = assignment;
            a.push(lo_out);
            best_inf = Some((lo, a));
        }
    }
    let witness_sup = DeterministicStrategy::new(sc, best_sup.expect("nonempty").1)?;
    let witness_inf = DeterministicStrategy::new(sc, best_inf.expect("nonempty").1)?;
    // Report the values as re-evaluated on the witnesses.
    let b_sup = functional.evaluate_strategy(&witness_sup);
    let b_inf = functional.evaluate_strategy(&witness_inf);
    let b_max = b_sup.abs().max(b_inf.abs());
    Ok(LhvConstants { b_sup, b_inf, b_max, witness_sup, witness_inf, degenerate: b_max == 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhvCheck {
    pub average: f64,
    pub b_inf: f64,
    pub b_sup: f64,
    pub violated: bool,
    /// `|average| / b_max`.
    pub normalized: f64,
}

/// Evaluates the functional on a behavior against its LHV range.
pub fn check_lhv_constraint(functional: &BellFunctional, behavior: &Behavior) -> Result<LhvCheck> {
    let average = behavior_average(behavior, functional)?;
    let k = lhv_constants(functional)?;
    if k.degenerate {
        return Err(Error::DegenerateFunctional);
    }
    let slack = tol::FEASIBILITY * (1.0 + k.b_max);
    Ok(LhvCheck {
        average,
        b_inf: k.b_inf,
        b_sup: k.b_sup,
        violated: average > k.b_sup + slack || average < k.b_inf - slack,
        normalized: average.abs() / k.b_max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateTerm {
    /// Index in strategy enumeration order.
    pub strategy: u64,
    pub c: f64,
}

#[derive(Clone, Debug)]
pub struct ViolationCertificate {
    pub upsilon: f64,
    /// Nonzero signed weights, ascending by strategy index.
    pub terms: Vec<CertificateTerm>,
    /// Largest entrywise deviation of `sum c_i D_i` from the behavior.
    pub residual: f64,
    /// Optimal dual functional: `|psi(D_i)| <= 1` for all `i` and
    /// `<psi, P> = upsilon`.
    pub functional: BellFunctional,
    pub iterations: usize,
}

impl ViolationCertificate {
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.c).sum()
    }

    pub fn l1_mass(&self) -> f64 {
        self.terms.iter().map(|t| t.c.abs()).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ViolationOptions {
    /// Largest number of deterministic strategies (LP columns are twice
    /// this).
    pub strategy_cap: u64,
}

impl Default for ViolationOptions {
    fn default() -> Self {
        ViolationOptions { strategy_cap: tol::DEFAULT_LP_STRATEGY_CAP }
    }
}

pub fn maximal_violation(behavior: &Behavior) -> Result<ViolationCertificate> {
    maximal_violation_with(behavior, ViolationOptions::default())
}

pub fn maximal_violation_with(behavior: &Behavior, options: ViolationOptions) -> Result<ViolationCertificate> {
    let sc = behavior.scenario();
    let count = sc.strategy_count();
    if count > options.strategy_cap as u128 {
        return Err(Error::StrategyCapExceeded { count, cap: options.strategy_cap });
    }
    let k = count as usize;
    let strategies: Vec<DeterministicStrategy> = enumerate_strategies(sc)?.collect();
    let coords = marginal_coordinates(sc);
    let rows = coords.len();
    let cols = 2 * k;
    let mut a = vec![0.0; rows * cols];
    for (r, coord) in coords.iter().enumerate() {
        for (i, s) in strategies.iter().enumerate() {
            if coord.picks.iter().all(|&(party, setting, outcome)| s.assignment()[party][setting] == outcome) {
                a[r * cols + i] = 1.0;
                a[r * cols + k + i] = -1.0;
            }
        }
    }
    let tables = behavior.tables();
    let b: Vec<f64> = coords.iter().map(|c| c.entries.iter().map(|&e| tables[e]).sum()).collect();
    let lp = LinearProgram::new(a, b, vec![1.0; cols]).map_err(lp_error)?;
    let sol = lp.solve().map_err(lp_error)?;

    let table_len = sc.table_len();
    let mut terms = Vec::new();
    let mut recon = vec![0.0; table_len];
    for (i, s) in strategies.iter().enumerate() {
        let c = sol.x[i] - sol.x[k + i];
        if c != 0.0 {
            terms.push(CertificateTerm { strategy: i as u64, c });
            for st in 0..sc.setting_tuples() {
                recon[s.table_index(sc, st)] += c;
            }
        }
    }
    let residual = recon.iter().zip(tables).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = 1.0 + tables.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if residual > SPAN_TOLERANCE * scale {
        // the marginals agree but the full tables do not: the behavior signals
        return Err(Error::Infeasible);
    }
    let upsilon = terms.iter().map(|t| t.c.abs()).sum();
    // pull the multipliers back to the full tables
    let mut dense = vec![0.0; table_len];
    for (coord, y) in coords.iter().zip(&sol.duals) {
        for &e in &coord.entries {
            dense[e] += y;
        }
    }
    let functional = BellFunctional::from_dense(sc, dense)?;
    Ok(ViolationCertificate { upsilon, terms, residual, functional, iterations: sol.iterations })
}

/// Largest full-table mismatch, relative to the table scale, tolerated for
/// a behavior in the span of the deterministic ones.
const SPAN_TOLERANCE: f64 = 1e-7;

/// One marginal probability `p(a_A | x_A)` of a party subset `A` with every
/// outcome below the party's last one. These coordinates, including the
/// empty subset, parametrize the no-signaling behaviors without redundancy.
struct MarginalCoordinate {
    /// `(party, setting, outcome)` for each party in the subset.
    picks: Vec<(usize, usize, usize)>,
    /// Full-table entries summed into the marginal; absent parties use
    /// their first setting.
    entries: Vec<usize>,
}

fn marginal_coordinates(sc: &Scenario) -> Vec<MarginalCoordinate> {
    let n = sc.n_parties();
    let counts = sc.outcome_counts();
    let mut coords = Vec::new();
    for mask in 0..1usize << n {
        let members: Vec<usize> = (0..n).filter(|p| mask >> p & 1 == 1).collect();
        let set_radices: Vec<usize> = members.iter().map(|&p| sc.settings()[p]).collect();
        let out_radices: Vec<usize> = members.iter().map(|&p| counts[p] - 1).collect();
        let set_count: usize = set_radices.iter().product();
        let out_count: usize = out_radices.iter().product();
        for xs in 0..set_count {
            let x = mixed_radix_digits(xs, &set_radices);
            let mut settings = vec![0; n];
            for (slot, &p) in members.iter().enumerate() {
                settings[p] = x[slot];
            }
            let st = sc.setting_tuple_index(&settings);
            for os in 0..out_count {
                let a = mixed_radix_digits(os, &out_radices);
                let entries = (0..sc.outcome_tuples())
                    .filter(|&ot| {
                        let tuple = sc.outcome_tuple(ot);
                        members.iter().enumerate().all(|(slot, &p)| tuple[p] == a[slot])
                    })
                    .map(|ot| st * sc.outcome_tuples() + ot)
                    .collect();
                let picks = members.iter().enumerate().map(|(slot, &p)| (p, x[slot], a[slot])).collect();
                coords.push(MarginalCoordinate { picks, entries });
            }
        }
    }
    coords
}

fn lp_error(e: LpError) -> Error {
    match e {
        LpError::Infeasible(_) => Error::Infeasible,
        other => Error::Nonconvergence(other.to_string()),
    }
}

/// A signed measure on deterministic strategies; party `n` under setting
/// `s` outputs the outcome that the strategy assigns to `(n, s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LqhvModel {
    scenario: Scenario,
    nu: Vec<f64>,
}

impl LqhvModel {
    /// `nu` is indexed in strategy enumeration order and must sum to one.
    pub fn new(scenario: &Scenario, nu: Vec<f64>) -> Result<Self> {
        let count = scenario.check_strategy_cap()?;
        if nu.len() as u64 != count {
            return Err(Error::DimensionMismatch(format!("expected {count} weights, got {}", nu.len())));
        }
        if nu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBehavior("non-finite weight".into()));
        }
        let sum: f64 = nu.iter().sum();
        if (sum - 1.0).abs() > tol::FEASIBILITY {
            return Err(Error::InvalidBehavior(format!("weights sum to {sum}")));
        }
        Ok(LqhvModel { scenario: scenario.clone(), nu })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn is_proper(&self) -> bool {
        self.nu.iter().all(|v| *v >= -tol::NONNEGATIVE)
    }

    /// `P(l | s) = sum_omega nu(omega) prod_n [omega_n^(s_n) = l_n]`.
    pub fn reconstruct(&self) -> Result<Behavior> {
        let sc = &self.scenario;
        let mut tables = vec![0.0; sc.table_len()];
        for (strategy, w) in enumerate_strategies(sc)?.zip(&self.nu) {
            for st in 0..sc.setting_tuples() {
                tables[strategy.table_index(sc, st)] += w;
            }
        }
        Behavior::new(sc, tables, !self.is_proper())
    }

    pub fn total_variation(&self) -> f64 {
        self.nu.iter().map(|v| v.abs()).sum()
    }

    pub fn negative_mass(&self) -> f64 {
        self.nu.iter().filter(|v| **v < 0.0).fold(0.0, |acc, v| acc - v)
    }
}

/// `nu(omega) = tr[T (x)_{n,s} M_n^{(s)}(omega_n^{(s)})]` with POVM elements
/// placed on the copies in site-major, setting order.
pub fn lqhv_from_source(t: &SourceOperator, povms: &PovmFamily) -> Result<LqhvModel> {
    let sc = povms.scenario();
    if t.copies() != sc.settings() {
        return Err(Error::DimensionMismatch(format!(
            "source operator copies {:?} vs settings {:?}",
            t.copies(),
            sc.settings()
        )));
    }
    if t.site_dims() != povms.dims().as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "source operator dimensions {:?} vs POVM dimensions {:?}",
            t.site_dims(),
            povms.dims()
        )));
    }
    let check = check_dilation(t);
    if !check.passed {
        return Err(Error::DilationFailed(check.max_residual));
    }
    let lists: Vec<&[CMatrix]> = (0..sc.n_parties())
        .flat_map(|n| (0..sc.settings()[n]).map(move |s| (n, s)))
        .map(|(n, s)| povms.measurement(n, s))
        .collect();
    let nu = product_traces(t.matrix(), &t.slot_dims(), &lists);
    LqhvModel::new(sc, nu)
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Outer rounds of (solve LP, seesaw on the dual functional).
    pub rounds: usize,
    pub sweeps: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub strategy_cap: u64,
    /// Functional used for the first seesaw pass; a random Gaussian one is
    /// drawn per restart when absent.
    pub start: Option<BellFunctional>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 8,
            rounds: 20,
            sweeps: 50,
            tolerance: 1e-9,
            seed: 0,
            strategy_cap: tol::DEFAULT_LP_STRATEGY_CAP,
            start: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ViolationSearch {
    pub povms: PovmFamily,
    pub behavior: Behavior,
    pub certificate: ViolationCertificate,
    /// Maximal violation after each round (nondecreasing).
    pub history: Vec<f64>,
    pub restart: usize,
}

/// Searches measurements on `state` maximizing the maximal violation in
/// `scenario`: each round solves the LP, then seesaws the measurements
/// against the optimal dual functional. Since that functional is bounded
/// by one on every deterministic strategy, the violation never decreases.
pub fn maximize_violation(state: &DensityState, scenario: &Scenario, config: &SearchConfig) -> Result<ViolationSearch> {
    if scenario.n_parties() != state.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "scenario has {} parties, state has {} sites",
            scenario.n_parties(),
            state.n_sites()
        )));
    }
    let runs: Vec<Result<ViolationSearch>> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut res = search_from_restart(state, scenario, config, r)?;
            res.restart = r;
            Ok(res)
        })
        .collect();
    let mut best: Option<ViolationSearch> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.certificate.upsilon > b.certificate.upsilon) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Random full-correlation functional: weight `w_s` times a product of
/// zero-mean outcome values, one vector per (party, setting). Marginal
/// terms are absent, so the seesaw is pushed toward genuine correlations.
fn random_functional<R: Rng>(scenario: &Scenario, rng: &mut R) -> Result<BellFunctional> {
    let counts = scenario.outcome_counts();
    let values: Vec<Vec<Vec<f64>>> = (0..scenario.n_parties())
        .map(|n| {
            (0..scenario.settings()[n])
                .map(|_| {
                    let v: Vec<f64> = (0..counts[n]).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    v.into_iter().map(|x| x - mean).collect()
                })
                .collect()
        })
        .collect();
    let mut coeffs = Vec::with_capacity(scenario.table_len());
    for st in 0..scenario.setting_tuples() {
        let tuple = scenario.setting_tuple(st);
        let w: f64 = rng.sample(StandardNormal);
        for o in 0..scenario.outcome_tuples() {
            let outcome = scenario.outcome_tuple(o);
            let prod: f64 = (0..scenario.n_parties()).map(|n| values[n][tuple[n]][outcome[n]]).product();
            coeffs.push(w * prod);
        }
    }
    BellFunctional::from_dense(scenario, coeffs)
}

fn search_from_restart(state: &DensityState, scenario: &Scenario, config: &SearchConfig, r: usize) -> Result<ViolationSearch> {
    let mut rng = restart_rng(config.seed, r);
    let init = PovmFamily::random_projective(scenario, state.dims(), &mut rng)?;
    let start = match &config.start {
        Some(f) if f.scenario() == scenario => f.clone(),
        Some(f) => f.embed_into(scenario)?,
        None => random_functional(scenario, &mut rng)?,
    };
    let lp = ViolationOptions { strategy_cap: config.strategy_cap };
    let mut povms = seesaw_from(state, &start, init, config.sweeps, config.tolerance)?.povms;
    let mut behavior = joint_probabilities(state, &povms)?;
    let mut certificate = maximal_violation_with(&behavior, lp)?;
    let mut history = vec![certificate.upsilon];
    for _ in 0..config.rounds {
        // A local behavior gives no useful dual direction; draw a fresh one.
        let local = certificate.upsilon <= 1.0 + config.tolerance;
        let direction = if local { random_functional(scenario, &mut rng)? } else { certificate.functional.clone() };
        let next = seesaw_from(state, &direction, povms.clone(), config.sweeps, config.tolerance)?.povms;
        let next_behavior = joint_probabilities(state, &next)?;
        let next_cert = maximal_violation_with(&next_behavior, lp)?;
        let gain = next_cert.upsilon - certificate.upsilon;
        if gain <= config.tolerance {
            if local {
                continue;
            }
            break;
        }
        povms = next;
        behavior = next_behavior;
        certificate = next_cert;
        history.push(certificate.upsilon);
    }
    Ok(ViolationSearch { povms, behavior, certificate, history, restart: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{product_source_operator, solve_source_operator, DilationObjective};
    use crate::functionals::{chsh, mermin};
    use crate::quantum::{random_state, singlet, spin_measurement};
    use crate::scenario::deterministic_behavior;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tsirelson_behavior() -> Behavior {
        let sc = Scenario::dichotomic(2, 2).unwrap();
        let a = [spin_measurement([0.0, 0.0, 1.0]), spin_measurement([1.0, 0.0, 0.0])];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = [spin_measurement([-s, 0.0, -s]), spin_measurement([s, 0.0, -s])];
        let povms = PovmFamily::with_scenario(&sc, vec![a.to_vec(), b.to_vec()]).unwrap();
        joint_probabilities(&singlet(), &povms).unwrap()
    }

    #[test]
    fn chsh_and_mermin_constants() {
        let k = lhv_constants(&chsh()).unwrap();
        assert_eq!((k.b_sup, k.b_inf, k.b_max), (2.0, -2.0, 2.0));
        assert_eq!(chsh().evaluate_strategy(&k.witness_sup), 2.0);
        let k = lhv_constants(&mermin(3).unwrap()).unwrap();
        assert_eq!(k.b_sup, 2.0);
        assert_eq!(k.b_inf, -2.0);
        let z = BellFunctional::zero(&Scenario::dichotomic(2, 2).unwrap());
        let k = lhv_constants(&z).unwrap();
        assert!(k.degenerate && k.b_sup == 0.0 && k.b_inf == 0.0);
    }

    #[test]
    fn constants_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sc = Scenario::labelled(vec![2, 3], &[3, 2]).unwrap();
        for _ in 0..10 {
            let f = random_functional(&sc, &mut rng).unwrap();
            let vals: Vec<f64> = enumerate_strategies(&sc).unwrap().map(|s| f.evaluate_strategy(&s)).collect();
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let k = lhv_constants(&f).unwrap();
            assert!((k.b_sup - hi).abs() < 1e-12 && (k.b_inf - lo).abs() < 1e-12);
        }
    }

    #[test]
    fn constraint_reports() {
        let sc = Scenario::dichotomic(2, 2).unwrap();
        for s in enumerate_strategies(&sc).unwrap() {
            let r = check_lhv_constraint(&chsh(), &deterministic_behavior(&sc, &s)).unwrap();
            assert!(!r.violated);
        }
        let r = check_lhv_constraint(&chsh(), &tsirelson_behavior()).unwrap();
        assert!(r.violated);
        assert!((r.average - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((r.normalized - 2f64.sqrt()).abs() < 1e-9);
        let r = check_lhv_constraint(&chsh(), &Behavior::white_noise(&sc)).unwrap();
        assert!(!r.violated && r.average.abs() < 1e-15);
        let z = BellFunctional::zero(&sc);
        assert_eq!(check_lhv_constraint(&z, &Behavior::white_noise(&sc)), Err(Error::DegenerateFunctional));
    }

    #[test]
    fn maximal_violation_examples() {
        let sc = Scenario::dichotomic(2, 2).unwrap();
        for s in enumerate_strategies(&sc).unwrap().step_by(5) {
            let cert = maximal_violation(&deterministic_behavior(&sc, &s)).unwrap();
            assert!((cert.upsilon - 1.0).abs() < 1e-12);
        }
        let cert = maximal_violation(&Behavior::white_noise(&sc)).unwrap();
        assert!((cert.upsilon - 1.0).abs() < 1e-12);

        let cert = maximal_violation(&tsirelson_behavior()).unwrap();
        assert!((cert.upsilon - 2f64.sqrt()).abs() < 1e-9, "{}", cert.upsilon);
        assert!(cert.residual < 1e-9);
        assert!((cert.weight_sum() - 1.0).abs() < 1e-9);
        // dual functional is normalized and attains the value
        let k = lhv_constants(&cert.functional).unwrap();
        assert!(k.b_max <= 1.0 + 1e-9);
        let avg = behavior_average(&tsirelson_behavior(), &cert.functional).unwrap();
        assert!((avg - cert.upsilon).abs() < 1e-9);
    }

    #[test]
    fn single_setting_scenarios_are_local() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sc = Scenario::labelled(vec![1, 1], &[2, 3]).unwrap();
        let rho = random_state(&[2, 3], &mut rng).unwrap();
        let povms = PovmFamily::random_projective(&sc, &[2, 3], &mut rng).unwrap();
        let cert = maximal_violation(&joint_probabilities(&rho, &povms).unwrap()).unwrap();
        assert!((cert.upsilon - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signaling_behavior_is_infeasible() {
        let sc = Scenario::dichotomic(2, 2).unwrap();
        let mut tables = Behavior::white_noise(&sc).tables().to_vec();
        // party 2's marginal now depends on party 1's setting
        tables[0..4].copy_from_slice(&[0.5, 0.0, 0.5, 0.0]);
        let b = Behavior::new(&sc, tables, false).unwrap();
        assert_eq!(maximal_violation(&b).unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn lqhv_from_unit_copies_is_the_behavior() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let sc = Scenario::labelled(vec![1, 1], &[2, 2]).unwrap();
        let rho = random_state(&[2, 2], &mut rng).unwrap();
        let povms = PovmFamily::random_projective(&sc, &[2, 2], &mut rng).unwrap();
        let t = solve_source_operator(&rho, &[1, 1], DilationObjective::MinFrobenius).unwrap();
        let model = lqhv_from_source(&t, &povms).unwrap();
        let p = joint_probabilities(&rho, &povms).unwrap();
        for (a, b) in model.nu().iter().zip(p.tables()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lqhv_reconstructs_singlet_behavior() {
        let t = solve_source_operator(&singlet(), &[2, 2], DilationObjective::MinFrobenius).unwrap();
        let sc = Scenario::dichotomic(2, 2).unwrap();
        let a = [spin_measurement([0.0, 0.0, 1.0]), spin_measurement([1.0, 0.0, 0.0])];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = [spin_measurement([-s, 0.0, -s]), spin_measurement([s, 0.0, -s])];
        let povms = PovmFamily::with_scenario(&sc, vec![a.to_vec(), b.to_vec()]).unwrap();
        let model = lqhv_from_source(&t, &povms).unwrap();
        let recon = model.reconstruct().unwrap();
        let direct = joint_probabilities(&singlet(), &povms).unwrap();
        for (x, y) in recon.tables().iter().zip(direct.tables()) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(!model.is_proper());
        let ups = maximal_violation(&direct).unwrap().upsilon;
        assert!(ups <= model.total_variation() + 1e-8);
    }

    #[test]
    fn product_source_gives_proper_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_state(&[2], &mut rng).unwrap().matrix().clone();
        let b = random_state(&[3], &mut rng).unwrap().matrix().clone();
        let t = product_source_operator(&[a, b], &[2, 2]).unwrap();
        let sc = Scenario::labelled(vec![2, 2], &[2, 3]).unwrap();
        let povms = PovmFamily::random_projective(&sc, &[2, 3], &mut rng).unwrap();
        let model = lqhv_from_source(&t, &povms).unwrap();
        assert!(model.is_proper());
        assert!((model.total_variation() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violation_search_finds_tsirelson() {
        let sc = Scenario::dichotomic(2, 2).unwrap();
        let config = SearchConfig { restarts: 4, ..Default::default() };
        let res = maximize_violation(&singlet(), &sc, &config).unwrap();
        assert!((res.certificate.upsilon - 2f64.sqrt()).abs() < 1e-6, "{} {:?}", res.certificate.upsilon, res.history);
        assert!(res.history.windows(2).all(|w| w[1] >= w[0]));
    }
}
