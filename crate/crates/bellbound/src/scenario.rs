//! Correlation scenarios, behaviors, Bell functionals and deterministic strategies.
//!
//! Indices are 0-based in memory and 1-based in files. Every table in this
//! module uses the same layout: setting tuples and outcome tuples are both
//! enumerated row-major with the first party as the most significant digit,
//! and a flat table index is `setting_tuple * outcome_tuples + outcome_tuple`.

use crate::error::{Error, Result};
use crate::tol;

/// A finite multipartite correlation scenario.
///
/// Party `n` chooses one of `settings[n]` measurements and observes one of the
/// numeric outcomes `outcomes[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    settings: Vec<usize>,
    outcomes: Vec<Vec<f64>>,
    strategy_cap: u64,
}

impl Scenario {
    pub fn new(n_parties: usize, settings: Vec<usize>, outcomes: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_cap(n_parties, settings, outcomes, tol::DEFAULT_STRATEGY_CAP)
    }

    /// Like [`Scenario::new`] with an explicit cap on the number of
    /// deterministic strategies.
    pub fn with_cap(
        n_parties: usize,
        settings: Vec<usize>,
        outcomes: Vec<Vec<f64>>,
        strategy_cap: u64,
    ) -> Result<Self> {
        if n_parties == 0 {
            return Err(Error::InvalidScenario("at least one party is required".into()));
        }
        if settings.len() != n_parties || outcomes.len() != n_parties {
            return Err(Error::DimensionMismatch(format!(
                "{n_parties} parties but {} setting counts and {} outcome lists",
                settings.len(),
                outcomes.len()
            )));
        }
        for (n, &s) in settings.iter().enumerate() {
            if s == 0 {
                return Err(Error::InvalidScenario(format!("party {} has zero settings", n + 1)));
            }
        }
        for (n, out) in outcomes.iter().enumerate() {
            if out.is_empty() {
                return Err(Error::InvalidScenario(format!("party {} has an empty outcome set", n + 1)));
            }
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidScenario(format!("party {} has a non-finite outcome", n + 1)));
            }
            for i in 0..out.len() {
                for j in i + 1..out.len() {
                    if out[i] == out[j] {
                        return Err(Error::InvalidScenario(format!(
                            "party {} repeats outcome value {}",
                            n + 1,
                            out[i]
                        )));
                    }
                }
            }
        }
        let scenario = Scenario { settings, outcomes, strategy_cap };
        let count = scenario.strategy_count();
        if count > strategy_cap as u128 {
            return Err(Error::StrategyCapExceeded { count, cap: strategy_cap });
        }
        Ok(scenario)
    }

    /// Every party has the same number of settings and the outcomes `{+1, -1}`.
    pub fn dichotomic(n_parties: usize, settings: usize) -> Result<Self> {
        Self::new(n_parties, vec![settings; n_parties], vec![vec![1.0, -1.0]; n_parties])
    }

    /// Outcomes labelled `0, 1, .., count-1` at every site.
    pub fn labelled(settings: Vec<usize>, outcome_counts: &[usize]) -> Result<Self> {
        let outcomes = outcome_counts
            .iter()
            .map(|&l| (0..l).map(|v| v as f64).collect())
            .collect();
        Self::new(settings.len(), settings, outcomes)
    }

    pub fn n_parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[Vec<f64>] {
        &self.outcomes
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.outcomes.iter().map(Vec::len).collect()
    }

    pub fn strategy_cap(&self) -> u64 {
        self.strategy_cap
    }

    /// `prod_n L_n^{S_n}`, saturating instead of overflowing.
    pub fn strategy_count(&self) -> u128 {
        let mut count: u128 = 1;
        for (s, out) in self.settings.iter().zip(&self.outcomes) {
            for _ in 0..*s {
                count = count.saturating_mul(out.len() as u128);
            }
        }
        count
    }

    pub fn setting_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn outcome_tuples(&self) -> usize {
        self.outcomes.iter().map(Vec::len).product()
    }

    /// Number of entries of a behavior or functional table.
    pub fn table_len(&self) -> usize {
        self.setting_tuples() * self.outcome_tuples()
    }

    pub fn setting_tuple_index(&self, tuple: &[usize]) -> usize {
        mixed_radix_index(tuple, &self.settings)
    }

    pub fn outcome_tuple_index(&self, tuple: &[usize]) -> usize {
        let mut idx = 0;
        for (l, out) in tuple.iter().zip(&self.outcomes) {
            idx = idx * out.len() + l;
        }
        idx
    }

    pub fn setting_tuple(&self, index: usize) -> Vec<usize> {
        mixed_radix_digits(index, &self.settings)
    }

    pub fn outcome_tuple(&self, index: usize) -> Vec<usize> {
        mixed_radix_digits(index, &self.outcome_counts())
    }

    /// True when `other` has the same parties and outcomes and no more
    /// settings per party than `self`.
    pub fn contains(&self, other: &Scenario) -> bool {
        self.n_parties() == other.n_parties()
            && self.outcomes == other.outcomes
            && self.settings.iter().zip(&other.settings).all(|(a, b)| b <= a)
    }

    fn same_shape(&self, other: &Scenario) -> bool {
        self.settings == other.settings && self.outcomes == other.outcomes
    }

    pub(crate) fn check_strategy_cap(&self) -> Result<u64> {
        let count = self.strategy_count();
        if count > self.strategy_cap as u128 {
            return Err(Error::StrategyCapExceeded { count, cap: self.strategy_cap });
        }
        Ok(count as u64)
    }
}

pub(crate) fn mixed_radix_index(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (d, r)| acc * r + d)
}

pub(crate) fn mixed_radix_digits(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (d, r) in digits.iter_mut().zip(radices).rev() {
        *d = index % r;
        index /= r;
    }
    digits
}

/// A linear functional on behaviors: one coefficient per (setting tuple,
/// outcome tuple) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    scenario: Scenario,
    coeffs: Vec<f64>,
}

impl BellFunctional {
    pub fn zero(scenario: &Scenario) -> Self {
        BellFunctional { scenario: scenario.clone(), coeffs: vec![0.0; scenario.table_len()] }
    }

    /// Builds a functional from sparse `(settings, outcomes, coefficient)`
    /// terms with 0-based indices. Repeated keys accumulate.
    pub fn from_terms<'a, I>(scenario: &Scenario, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [usize], &'a [usize], f64)>,
    {
        let mut f = Self::zero(scenario);
        for (s, l, c) in terms {
            f.add_term(s, l, c)?;
        }
        Ok(f)
    }

    /// Dense coefficients in the module's table layout.
    pub fn from_dense(scenario: &Scenario, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != scenario.table_len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                scenario.table_len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidFunctional("non-finite coefficient".into()));
        }
        Ok(BellFunctional { scenario: scenario.clone(), coeffs })
    }

    /// A correlation functional: each term `(settings, c)` contributes
    /// `c * <prod_n lambda_n>` under that setting tuple.
    pub fn correlator(scenario: &Scenario, terms: &[(Vec<usize>, f64)]) -> Result<Self> {
        let mut f = Self::zero(scenario);
        let ot = scenario.outcome_tuples();
        for (s, c) in terms {
            check_tuple(s, scenario.settings(), "setting")?;
            let base = scenario.setting_tuple_index(s) * ot;
            for o in 0..ot {
                let product: f64 = scenario
                    .outcome_tuple(o)
                    .iter()
                    .zip(scenario.outcomes())
                    .map(|(&l, vals)| vals[l])
                    .product();
                f.coeffs[base + o] += c * product;
            }
        }
        Ok(f)
    }

    pub fn add_term(&mut self, settings: &[usize], outcomes: &[usize], c: f64) -> Result<()> {
        check_tuple(settings, self.scenario.settings(), "setting")?;
        check_tuple(outcomes, &self.scenario.outcome_counts(), "outcome")?;
        if !c.is_finite() {
            return Err(Error::InvalidFunctional("non-finite coefficient".into()));
        }
        let idx = self.scenario.setting_tuple_index(settings) * self.scenario.outcome_tuples()
            + self.scenario.outcome_tuple_index(outcomes);
        self.coeffs[idx] += c;
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficient(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        self.coeffs[self.scenario.setting_tuple_index(settings) * self.scenario.outcome_tuples()
            + self.scenario.outcome_tuple_index(outcomes)]
    }

    /// Nonzero terms as `(settings, outcomes, coefficient)`, 0-based, in
    /// table order.
    pub fn terms(&self) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
        let ot = self.scenario.outcome_tuples();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| (self.scenario.setting_tuple(i / ot), self.scenario.outcome_tuple(i % ot), c))
            .collect()
    }

    /// The functional is identically zero.
    pub fn is_degenerate(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BellFunctional {
            scenario: self.scenario.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &BellFunctional) -> Result<Self> {
        if !self.scenario.same_shape(&other.scenario) {
            return Err(Error::ScenarioMismatch);
        }
        Ok(BellFunctional {
            scenario: self.scenario.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    /// Zero-pads the functional into a scenario with at least as many
    /// settings per party.
    pub fn embed_into(&self, larger: &Scenario) -> Result<Self> {
        if !larger.contains(&self.scenario) {
            return Err(Error::ScenarioMismatch);
        }
        let mut f = Self::zero(larger);
        let ot = self.scenario.outcome_tuples();
        for st in 0..self.scenario.setting_tuples() {
            let tuple = self.scenario.setting_tuple(st);
            let dst = larger.setting_tuple_index(&tuple) * ot;
            f.coeffs[dst..dst + ot].copy_from_slice(&self.coeffs[st * ot..(st + 1) * ot]);
        }
        Ok(f)
    }

    /// Value of the functional on a deterministic strategy, i.e. the sum of
    /// `psi(lambda_1^(s_1), .., lambda_N^(s_N))` over all setting tuples.
    pub fn evaluate_strategy(&self, strategy: &DeterministicStrategy) -> f64 {
        let sc = &self.scenario;
        let ot = sc.outcome_tuples();
        let mut total = 0.0;
        let mut outcome = vec![0; sc.n_parties()];
        for st in 0..sc.setting_tuples() {
            let tuple = sc.setting_tuple(st);
            for (n, s) in tuple.iter().enumerate() {
                outcome[n] = strategy.assignment[n][*s];
            }
            total += self.coeffs[st * ot + sc.outcome_tuple_index(&outcome)];
        }
        total
    }
}

fn check_tuple(tuple: &[usize], bounds: &[usize], what: &str) -> Result<()> {
    if tuple.len() != bounds.len() {
        return Err(Error::DimensionMismatch(format!(
            "{what} tuple has {} entries, expected {}",
            tuple.len(),
            bounds.len()
        )));
    }
    for (n, (&t, &b)) in tuple.iter().zip(bounds).enumerate() {
        if t >= b {
            return Err(Error::InvalidFunctional(format!(
                "{what} index {} out of range 1..={b} for party {}",
                t + 1,
                n + 1
            )));
        }
    }
    Ok(())
}

/// A table of joint outcome distributions, one per setting tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    tables: Vec<f64>,
    signed: bool,
}

impl Behavior {
    /// Validates normalization (and nonnegativity unless `signed`).
    pub fn new(scenario: &Scenario, tables: Vec<f64>, signed: bool) -> Result<Self> {
        let b = Behavior { scenario: scenario.clone(), tables, signed };
        b.validate()?;
        Ok(b)
    }

    /// Every entry equal: the uniform ("white noise") behavior.
    pub fn white_noise(scenario: &Scenario) -> Self {
        let ot = scenario.outcome_tuples();
        Behavior {
            scenario: scenario.clone(),
            tables: vec![1.0 / ot as f64; scenario.table_len()],
            signed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sc = &self.scenario;
        if self.tables.len() != sc.table_len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} behavior entries, got {}",
                sc.table_len(),
                self.tables.len()
            )));
        }
        let ot = sc.outcome_tuples();
        for (st, table) in self.tables.chunks(ot).enumerate() {
            if table.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidBehavior("non-finite entry".into()));
            }
            let sum: f64 = table.iter().sum();
            if (sum - 1.0).abs() > tol::FEASIBILITY {
                return Err(Error::InvalidBehavior(format!(
                    "table for settings {:?} sums to {sum}",
                    one_based(&sc.setting_tuple(st))
                )));
            }
            if !self.signed {
                if let Some(v) = table.iter().find(|v| **v < -tol::NONNEGATIVE) {
                    return Err(Error::InvalidBehavior(format!(
                        "negative probability {v} for settings {:?}",
                        one_based(&sc.setting_tuple(st))
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn tables(&self) -> &[f64] {
        &self.tables
    }

    pub fn is_signed(&self) -> bool {
        self.signed
    }

    pub fn table(&self, settings: &[usize]) -> &[f64] {
        let ot = self.scenario.outcome_tuples();
        let st = self.scenario.setting_tuple_index(settings);
        &self.tables[st * ot..(st + 1) * ot]
    }

    pub fn probability(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        self.table(settings)[self.scenario.outcome_tuple_index(outcomes)]
    }

    /// `(1 - weight) * self + weight * other`.
    pub fn mix(&self, other: &Behavior, weight: f64) -> Result<Self> {
        if !self.scenario.same_shape(&other.scenario) {
            return Err(Error::ScenarioMismatch);
        }
        let tables = self
            .tables
            .iter()
            .zip(&other.tables)
            .map(|(a, b)| (1.0 - weight) * a + weight * b)
            .collect();
        let signed = self.signed || other.signed || !(0.0..=1.0).contains(&weight);
        Behavior::new(&self.scenario, tables, signed)
    }

    /// Marginal distribution of the parties in `parties` (ascending) under
    /// the full setting tuple `settings`.
    pub fn marginal(&self, parties: &[usize], settings: &[usize]) -> Vec<f64> {
        let counts = self.scenario.outcome_counts();
        let sub: Vec<usize> = parties.iter().map(|&n| counts[n]).collect();
        let mut out = vec![0.0; sub.iter().product()];
        for (o, p) in self.table(settings).iter().enumerate() {
            let tuple = self.scenario.outcome_tuple(o);
            let key: Vec<usize> = parties.iter().map(|&n| tuple[n]).collect();
            out[mixed_radix_index(&key, &sub)] += p;
        }
        out
    }

    /// Largest change of any marginal of any party subset when the settings
    /// of the complementary parties change.
    pub fn signaling_deviation(&self) -> f64 {
        let sc = &self.scenario;
        let n = sc.n_parties();
        let mut worst: f64 = 0.0;
        for mask in 1..(1usize << n) - 1 {
            let parties: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
            let mut reference: std::collections::HashMap<Vec<usize>, Vec<f64>> = Default::default();
            for st in 0..sc.setting_tuples() {
                let tuple = sc.setting_tuple(st);
                let key: Vec<usize> = parties.iter().map(|&k| tuple[k]).collect();
                let m = self.marginal(&parties, &tuple);
                match reference.get(&key) {
                    Some(r) => {
                        for (a, b) in r.iter().zip(&m) {
                            worst = worst.max((a - b).abs());
                        }
                    }
                    None => {
                        reference.insert(key, m);
                    }
                }
            }
        }
        worst
    }
}

pub(crate) fn one_based(tuple: &[usize]) -> Vec<usize> {
    tuple.iter().map(|v| v + 1).collect()
}

/// `<psi, P>`: the sum over setting tuples of the average of `psi` under
/// the corresponding joint distribution.
pub fn behavior_average(behavior: &Behavior, functional: &BellFunctional) -> Result<f64> {
    if !behavior.scenario.same_shape(&functional.scenario) {
        return Err(Error::ScenarioMismatch);
    }
    Ok(behavior.tables.iter().zip(&functional.coeffs).map(|(p, c)| p * c).sum())
}

/// One outcome index per (party, setting) pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    assignment: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn new(scenario: &Scenario, assignment: Vec<Vec<usize>>) -> Result<Self> {
        if assignment.len() != scenario.n_parties() {
            return Err(Error::DimensionMismatch("one assignment row per party required".into()));
        }
        for (n, row) in assignment.iter().enumerate() {
            if row.len() != scenario.settings()[n] {
                return Err(Error::DimensionMismatch(format!(
                    "party {} needs {} assigned outcomes, got {}",
                    n + 1,
                    scenario.settings()[n],
                    row.len()
                )));
            }
            if let Some(l) = row.iter().find(|&&l| l >= scenario.outcomes()[n].len()) {
                return Err(Error::InvalidScenario(format!(
                    "outcome index {} out of range for party {}",
                    l + 1,
                    n + 1
                )));
            }
        }
        Ok(DeterministicStrategy { assignment })
    }

    /// `assignment()[n][s]` is the outcome index party `n` outputs under setting `s`.
    pub fn assignment(&self) -> &[Vec<usize>] {
        &self.assignment
    }

    /// Position of this strategy in [`enumerate_strategies`] order.
    pub fn index(&self, scenario: &Scenario) -> u128 {
        let mut idx: u128 = 0;
        for (n, row) in self.assignment.iter().enumerate() {
            let l = scenario.outcomes()[n].len() as u128;
            for &o in row {
                idx = idx * l + o as u128;
            }
        }
        idx
    }

    /// Flat table index hit by this strategy under setting tuple `st`.
    pub(crate) fn table_index(&self, scenario: &Scenario, st: usize) -> usize {
        let tuple = scenario.setting_tuple(st);
        let mut o = 0;
        for (n, s) in tuple.iter().enumerate() {
            o = o * scenario.outcomes()[n].len() + self.assignment[n][*s];
        }
        st * scenario.outcome_tuples() + o
    }
}

/// The point-mass behavior of a deterministic strategy.
pub fn deterministic_behavior(scenario: &Scenario, strategy: &DeterministicStrategy) -> Behavior {
    let mut tables = vec![0.0; scenario.table_len()];
    for st in 0..scenario.setting_tuples() {
        tables[strategy.table_index(scenario, st)] = 1.0;
    }
    Behavior { scenario: scenario.clone(), tables, signed: false }
}

/// Iterates over all `prod_n L_n^{S_n}` deterministic strategies.
///
/// Order is lexicographic in the digits `(party 1 setting 1, party 1 setting
/// 2, .., party N setting S_N)`, the last digit varying fastest. The first
/// strategy assigns outcome 1 everywhere.
pub fn enumerate_strategies(scenario: &Scenario) -> Result<StrategyIter> {
    scenario.check_strategy_cap()?;
    let radices: Vec<usize> = scenario
        .settings()
        .iter()
        .zip(scenario.outcomes())
        .flat_map(|(&s, out)| std::iter::repeat_n(out.len(), s))
        .collect();
    Ok(StrategyIter { scenario: scenario.clone(), digits: Some(vec![0; radices.len()]), radices })
}

pub struct StrategyIter {
    scenario: Scenario,
    radices: Vec<usize>,
    digits: Option<Vec<usize>>,
}

impl Iterator for StrategyIter {
    type Item = DeterministicStrategy;

    fn next(&mut self) -> Option<Self::Item> {
        let digits = self.digits.as_mut()?;
        let mut assignment = Vec::with_capacity(self.scenario.n_parties());
        let mut pos = 0;
        for &s in self.scenario.settings() {
            assignment.push(digits[pos..pos + s].to_vec());
            pos += s;
        }
        let mut k = digits.len();
        loop {
            if k == 0 {
                self.digits = None;
                break;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < self.radices[k] {
                break;
            }
            digits[k] = 0;
        }
        Some(DeterministicStrategy { assignment })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::chsh;

    #[test]
    fn chsh_scenario_has_sixteen_strategies() {
        let sc = Scenario::new(2, vec![2, 2], vec![vec![1.0, -1.0]; 2]).unwrap();
        assert_eq!(sc.strategy_count(), 16);
        assert_eq!(enumerate_strategies(&sc).unwrap().count(), 16);
    }

    #[test]
    fn mermin_scenario_has_sixty_four_strategies() {
        let sc = Scenario::dichotomic(3, 2).unwrap();
        assert_eq!(sc.strategy_count(), 64);
        assert_eq!(enumerate_strategies(&sc).unwrap().count(), 64);
    }

    #[test]
    fn single_party_three_outcomes() {
        let sc = Scenario::new(1, vec![1], vec![vec![0.0, 1.0, 2.0]]).unwrap();
        assert_eq!(enumerate_strategies(&sc).unwrap().count(), 3);
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(Scenario::new(2, vec![2, 0], vec![vec![1.0, -1.0]; 2]).is_err());
        assert!(matches!(
            Scenario::new(2, vec![2], vec![vec![1.0, -1.0]; 2]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(Scenario::new(1, vec![1], vec![vec![]]).is_err());
        assert!(Scenario::new(1, vec![1], vec![vec![1.0, 1.0]]).is_err());
        assert!(matches!(
            Scenario::with_cap(2, vec![10, 10], vec![vec![0.0, 1.0, 2.0]; 2], 1000),
            Err(Error::StrategyCapExceeded { .. })
        ));
    }

    #[test]
    fn enumeration_order_matches_index() {
        let sc = Scenario::labelled(vec![2, 1], &[3, 2]).unwrap();
        for (i, s) in enumerate_strategies(&sc).unwrap().enumerate() {
            assert_eq!(s.index(&sc), i as u128);
        }
        let first = enumerate_strategies(&sc).unwrap().next().unwrap();
        assert_eq!(first.assignment(), &[vec![0, 0], vec![0]]);
    }

    #[test]
    fn deterministic_behaviors_are_valid_and_distinct() {
        let sc = Scenario::dichotomic(2, 2).unwrap();
        let behaviors: Vec<Behavior> = enumerate_strategies(&sc)
            .unwrap()
            .map(|s| deterministic_behavior(&sc, &s))
            .collect();
        for b in &behaviors {
            b.validate().unwrap();
        }
        for i in 0..behaviors.len() {
            for j in i + 1..behaviors.len() {
                assert_ne!(behaviors[i], behaviors[j]);
            }
        }
        let all_plus = DeterministicStrategy::new(&sc, vec![vec![0, 0], vec![0, 0]]).unwrap();
        let b = deterministic_behavior(&sc, &all_plus);
        for s in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(b.probability(&s, &[0, 0]), 1.0);
        }
    }

    #[test]
    fn zero_functional_averages_to_zero() {
        let sc = Scenario::dichotomic(2, 2).unwrap();
        let f = BellFunctional::zero(&sc);
        assert!(f.is_degenerate());
        assert_eq!(behavior_average(&Behavior::white_noise(&sc), &f).unwrap(), 0.0);
    }

    #[test]
    fn chsh_on_deterministic_behaviors_takes_even_values() {
        let f = chsh();
        let sc = f.scenario().clone();
        for s in enumerate_strategies(&sc).unwrap() {
            let v = behavior_average(&deterministic_behavior(&sc, &s), &f).unwrap();
            assert!([-2.0, 0.0, 2.0].contains(&v), "{v}");
            assert_eq!(v, f.evaluate_strategy(&s));
        }
    }

    #[test]
    fn behavior_validation() {
        let sc = Scenario::dichotomic(1, 1).unwrap();
        assert!(Behavior::new(&sc, vec![0.5, 0.4], false).is_err());
        assert!(Behavior::new(&sc, vec![1.5, -0.5], false).is_err());
        assert!(Behavior::new(&sc, vec![1.5, -0.5], true).is_ok());
    }

    #[test]
    fn scenario_mismatch_is_reported() {
        let f = chsh();
        let other = Scenario::dichotomic(3, 2).unwrap();
        assert_eq!(
            behavior_average(&Behavior::white_noise(&other), &f),
            Err(Error::ScenarioMismatch)
        );
    }

    #[test]
    fn embedding_preserves_averages_on_sub_settings() {
        let f = chsh();
        let big = Scenario::dichotomic(2, 3).unwrap();
        let g = f.embed_into(&big).unwrap();
        assert_eq!(g.terms().len(), f.terms().len());
        assert_eq!(g.coefficient(&[1, 1], &[0, 0]), -1.0);
        assert_eq!(g.coefficient(&[2, 2], &[0, 0]), 0.0);
    }
}
