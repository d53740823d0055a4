//! Closed-form upper bounds on the maximal Bell violation and a report that
//! checks a computed violation against every bound applicable to a context.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Literature bracket for the Grothendieck constant `K_G`.
pub const KG_LOWER: f64 = 1.676;
pub const KG_UPPER: f64 = 1.782;
/// Bracket for the order-three Grothendieck constant `K_G(3)`.
pub const KG3_LOWER: f64 = std::f64::consts::SQRT_2;
pub const KG3_UPPER: f64 = 1.5163;

fn pow(base: f64, exp: usize) -> f64 {
    base.powi(exp as i32)
}

fn two_pow(exp: usize) -> f64 {
    pow(2.0, exp)
}

fn check_positive(values: &[usize], what: &str) -> Result<()> {
    if values.is_empty() || values.contains(&0) {
        return Err(Error::InvalidScenario(format!("{what} must be positive")));
    }
    Ok(())
}

/// Singlet with `S x 2` settings: `sqrt(3)` for `S >= 2`.
pub fn bound_singlet(s: usize) -> Result<f64> {
    if s < 2 {
        return Err(Error::InvalidScenario("the singlet bound is stated for S >= 2".into()));
    }
    Ok(3f64.sqrt())
}

/// Any bipartite state with two dichotomic measurements per site: `sqrt(2)`.
pub fn bound_two_by_two_dichotomic() -> f64 {
    std::f64::consts::SQRT_2
}

/// N-qudit GHZ state, `S` settings per site:
/// `min{(2S-1)^(N-1), 1 + 2^(N-1) (d-1)}`.
pub fn bound_ghz_qudit(n: usize, d: usize, s: usize) -> Result<f64> {
    if n < 2 || d < 2 || s < 1 {
        return Err(Error::InvalidScenario("need N >= 2, d >= 2, S >= 1".into()));
    }
    Ok(pow(2.0 * s as f64 - 1.0, n - 1).min(1.0 + two_pow(n - 1) * (d as f64 - 1.0)))
}

/// The weaker form `1 + 2^(N-1) [min{S^(N-1), d} - 1]`.
pub fn ghz_qudit_relaxed(n: usize, d: usize, s: usize) -> f64 {
    1.0 + two_pow(n - 1) * (pow(s as f64, n - 1).min(d as f64) - 1.0)
}

/// Generalized N-qubit GHZ state: `1 + 2^(N-1) |sin 2 phi|`.
pub fn bound_generalized_ghz(n: usize, phi: f64) -> Result<f64> {
    if n < 2 || !phi.is_finite() {
        return Err(Error::InvalidScenario("need N >= 2 and a finite angle".into()));
    }
    Ok(1.0 + two_pow(n - 1) * (2.0 * phi).sin().abs())
}

fn product_over_max(values: &[usize]) -> f64 {
    let prod: f64 = values.iter().map(|&v| v as f64).product();
    prod / *values.iter().max().expect("nonempty") as f64
}

/// Arbitrary state on `C^d_1 x .. x C^d_N` with `S_n` settings:
/// `1 + 2^(N-1) [min{prod S / max S, prod d / max d} - 1]`.
pub fn bound_general(dims: &[usize], settings: &[usize]) -> Result<f64> {
    check_positive(dims, "dimensions")?;
    check_positive(settings, "setting counts")?;
    if dims.len() != settings.len() {
        return Err(Error::DimensionMismatch("one dimension per setting count".into()));
    }
    let n = dims.len();
    Ok(1.0 + two_pow(n - 1) * (product_over_max(settings).min(product_over_max(dims)) - 1.0))
}

/// `(2S-1)^(N-1)`, valid for every state in any dimension.
pub fn universal_envelope(n: usize, s: usize) -> f64 {
    pow(2.0 * s as f64 - 1.0, n.saturating_sub(1))
}

/// Equal setting counts:
/// `min{(2S-1)^(N-1), 1 + 2^(N-1) (prod d / max d - 1)}`.
pub fn bound_equal_settings(dims: &[usize], s: usize) -> Result<f64> {
    check_positive(dims, "dimensions")?;
    if s == 0 {
        return Err(Error::InvalidScenario("setting count must be positive".into()));
    }
    let n = dims.len();
    Ok(universal_envelope(n, s).min(1.0 + two_pow(n - 1) * (product_over_max(dims) - 1.0)))
}

/// The weaker form `1 + 2^(N-1) [min{S^(N-1), prod d / max d} - 1]`.
pub fn equal_settings_relaxed(dims: &[usize], s: usize) -> f64 {
    let n = dims.len();
    1.0 + two_pow(n - 1) * (pow(s as f64, n - 1).min(product_over_max(dims)) - 1.0)
}

/// `2 min{S1, S2, d1, d2} - 1`.
pub fn bound_bipartite(s1: usize, s2: usize, d1: usize, d2: usize) -> Result<f64> {
    check_positive(&[s1, s2, d1, d2], "settings and dimensions")?;
    Ok(2.0 * s1.min(s2).min(d1).min(d2) as f64 - 1.0)
}

/// `min{(2S-1)^2, 4 d1 d2 d3 / max d - 3}`.
pub fn bound_tripartite(s: usize, dims: [usize; 3]) -> Result<f64> {
    check_positive(&dims, "dimensions")?;
    if s == 0 {
        return Err(Error::InvalidScenario("setting count must be positive".into()));
    }
    Ok(pow(2.0 * s as f64 - 1.0, 2).min(4.0 * product_over_max(&dims) - 3.0))
}

/// Equal local dimension `d`: `min{(2S-1)^2, 4 d^2 - 3}` and its relaxation
/// `4 min{S, d}^2 - 3`.
pub fn tripartite_equal_dims(s: usize, d: usize) -> (f64, f64) {
    let first = pow(2.0 * s as f64 - 1.0, 2).min(4.0 * pow(d as f64, 2) - 3.0);
    let second = 4.0 * pow(s.min(d) as f64, 2) - 3.0;
    (first, second)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorBipartite {
    /// `2 K_G + 1`, stated for two outcomes per site.
    pub bound_i: f64,
    /// `2 L1 L2 (K_G + 1) - 1`.
    pub bound_ii: f64,
    pub kg: f64,
}

/// Earlier bipartite bounds evaluated at the upper end of the `K_G` bracket.
pub fn prior_bipartite_bounds(l1: usize, l2: usize) -> PriorBipartite {
    let kg = KG_UPPER;
    PriorBipartite {
        bound_i: 2.0 * kg + 1.0,
        bound_ii: 2.0 * (l1 * l2) as f64 * (kg + 1.0) - 1.0,
        kg,
    }
}

/// Order-of-magnitude estimate `min{S, d}`, known only up to an unspecified
/// constant factor; never used as a pass/fail bound.
pub fn bipartite_estimate(s: usize, d: usize) -> f64 {
    s.min(d) as f64
}

/// Smallest `S` with `(2S-1)^2 >= sqrt(d)`, i.e. `(2S-1)^4 >= d`.
pub fn settings_growth_threshold(d: u64) -> u64 {
    let mut s: u64 = 1;
    loop {
        let t = (2 * s - 1) as u128;
        if t * t * t * t >= d as u128 {
            return s;
        }
        s += 1;
    }
}

/// Known structure of the state, which unlocks state-specific bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateFamily {
    #[default]
    Generic,
    Singlet,
    GhzQudit { d: usize },
    GeneralizedGhz { phi: f64 },
    /// A state known to be separable; every behavior is local.
    Separable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub dims: Vec<usize>,
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub family: StateFamily,
}

impl BoundContext {
    pub fn new(dims: Vec<usize>, settings: Vec<usize>, outcomes: Vec<usize>, family: StateFamily) -> Result<Self> {
        check_positive(&dims, "dimensions")?;
        check_positive(&settings, "setting counts")?;
        check_positive(&outcomes, "outcome counts")?;
        if dims.len() != settings.len() || dims.len() != outcomes.len() {
            return Err(Error::DimensionMismatch("dims, settings and outcomes need one entry per party".into()));
        }
        Ok(BoundContext { dims, settings, outcomes, family })
    }

    pub fn n_parties(&self) -> usize {
        self.dims.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    Bound,
    /// Earlier literature bound, shown for comparison.
    Reference,
    /// Not a rigorous bound.
    Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub bound_name: String,
    pub formula: String,
    pub value: f64,
    /// Counts toward `all_pass`.
    pub applicable: bool,
    pub kind: EntryKind,
    /// `Some` when a violation was supplied and the entry is applicable.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub context: BoundContext,
    pub entries: Vec<BoundEntry>,
    pub violation: Option<f64>,
    pub all_pass: bool,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Smallest applicable bound.
    pub fn tightest(&self) -> Option<&BoundEntry> {
        self.entries
            .iter()
            .filter(|e| e.applicable)
            .min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

fn entry(name: &str, formula: &str, value: f64, applicable: bool, kind: EntryKind) -> BoundEntry {
    BoundEntry {
        bound_name: name.into(),
        formula: formula.into(),
        value,
        applicable: applicable && kind == EntryKind::Bound,
        kind,
        pass: None,
    }
}

/// Evaluates every catalog formula for `context` and compares `violation`
/// against the applicable ones.
///
/// Bounds stated for `S` settings per site are evaluated at `S = max_n S_n`:
/// a scenario with fewer settings embeds into that one by zero-padding.
pub fn compare(context: &BoundContext, violation: Option<f64>) -> BoundReport {
    let c = context;
    let n = c.n_parties();
    let s_max = *c.settings.iter().max().expect("nonempty");
    let s_min = *c.settings.iter().min().expect("nonempty");
    let mut entries = Vec::new();
    let mut notes = Vec::new();

    entries.push(entry("universal-envelope", "(2S-1)^(N-1)", universal_envelope(n, s_max), true, EntryKind::Bound));
    entries.push(entry(
        "general",
        "1+2^(N-1)[min{prod S/max S, prod d/max d}-1]",
        bound_general(&c.dims, &c.settings).expect("validated context"),
        true,
        EntryKind::Bound,
    ));
    entries.push(entry(
        "equal-settings",
        "min{(2S-1)^(N-1), 1+2^(N-1)(prod d/max d-1)}",
        bound_equal_settings(&c.dims, s_max).expect("validated context"),
        true,
        EntryKind::Bound,
    ));
    if n == 2 {
        let (s1, s2, d1, d2) = (c.settings[0], c.settings[1], c.dims[0], c.dims[1]);
        let bip = bound_bipartite(s1, s2, d1, d2).expect("validated context");
        entries.push(entry("bipartite", "2min{S1,S2,d1,d2}-1", bip, true, EntryKind::Bound));
        let dichotomic = c.outcomes.iter().all(|&l| l <= 2);
        entries.push(entry(
            "two-setting-dichotomic",
            "sqrt(2)",
            bound_two_by_two_dichotomic(),
            s_max <= 2 && dichotomic,
            EntryKind::Bound,
        ));
        let prior = prior_bipartite_bounds(c.outcomes[0], c.outcomes[1]);
        entries.push(entry("prior-i", "2K_G+1", prior.bound_i, false, EntryKind::Reference));
        entries.push(entry("prior-ii", "2L1L2(K_G+1)-1", prior.bound_ii, false, EntryKind::Reference));
        if s1 == s2 && d1 == d2 {
            entries.push(entry("estimate-jp", "~min{S,d}", bipartite_estimate(s1, d1), false, EntryKind::Estimate));
        }
        if d1 == 2 && d2 == 2 && c.outcomes == [2, 2] && bip < prior.bound_i {
            notes.push(format!("bipartite bound {bip} is below 2K_G+1 = {:.6} (K_G upper endpoint)", prior.bound_i));
        }
        if d1 == d2 && (d1 as f64) <= (c.outcomes[0] * c.outcomes[1]) as f64 * (KG_UPPER + 1.0) && bip < prior.bound_ii {
            notes.push(format!(
                "bipartite bound {bip} is below 2L1L2(K_G+1)-1 = {:.6}; region d1=d2<=L1L2(K_G+1) taken as stated",
                prior.bound_ii
            ));
        }
    }
    if n == 3 {
        let dims = [c.dims[0], c.dims[1], c.dims[2]];
        entries.push(entry(
            "tripartite",
            "min{(2S-1)^2, 4 d1d2d3/max d-3}",
            bound_tripartite(s_max, dims).expect("validated context"),
            true,
            EntryKind::Bound,
        ));
    }
    match &c.family {
        StateFamily::Singlet => {
            let ok = n == 2 && c.dims == [2, 2];
            entries.push(entry("singlet", "sqrt(3)", 3f64.sqrt(), ok && s_min <= 2, EntryKind::Bound));
        }
        StateFamily::GhzQudit { d } => {
            if let Ok(v) = bound_ghz_qudit(n, *d, s_max) {
                entries.push(entry("ghz-qudit", "min{(2S-1)^(N-1), 1+2^(N-1)(d-1)}", v, true, EntryKind::Bound));
            }
        }
        StateFamily::GeneralizedGhz { phi } => {
            if let Ok(v) = bound_generalized_ghz(n, *phi) {
                entries.push(entry("generalized-ghz", "1+2^(N-1)|sin 2phi|", v, true, EntryKind::Bound));
            }
        }
        StateFamily::Separable => {
            entries.push(entry("separable", "1", 1.0, true, EntryKind::Bound));
        }
        StateFamily::Generic => {}
    }
    let mut all_pass = true;
    if let Some(v) = violation {
        for e in entries.iter_mut().filter(|e| e.applicable) {
            let ok = v <= e.value + tol::BOUND_SLACK;
            e.pass = Some(ok);
            all_pass &= ok;
        }
    }
    BoundReport { context: context.clone(), entries, violation, all_pass, notes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_examples() {
        assert!((bound_singlet(2).unwrap() - 1.7320508).abs() < 1e-7);
        assert_eq!(bound_singlet(100).unwrap(), 3f64.sqrt());
        assert!(bound_singlet(1).is_err());
        assert_eq!(bound_ghz_qudit(3, 2, 2).unwrap(), 5.0);
        assert_eq!(bound_ghz_qudit(2, 4, 2).unwrap(), 3.0);
        assert_eq!(bound_ghz_qudit(4, 3, 1).unwrap(), 1.0);
        assert_eq!(bound_generalized_ghz(3, 0.0).unwrap(), 1.0);
        assert!((bound_generalized_ghz(3, std::f64::consts::FRAC_PI_4).unwrap() - 5.0).abs() < 1e-12);
        assert!((bound_generalized_ghz(2, std::f64::consts::FRAC_PI_6).unwrap() - (1.0 + 3f64.sqrt())).abs() < 1e-12);
        assert_eq!(bound_general(&[2, 2], &[2, 2]).unwrap(), 3.0);
        assert_eq!(bound_general(&[5, 7, 2], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(bound_general(&[2, 2, 2], &[3, 3, 3]).unwrap(), 13.0);
        assert_eq!(bound_equal_settings(&[2, 2], 3).unwrap(), 3.0);
        assert_eq!(bound_equal_settings(&[1000, 1000, 1000, 1000], 2).unwrap(), 27.0);
        assert_eq!(bound_equal_settings(&[4, 4], 1).unwrap(), 1.0);
        assert_eq!(bound_bipartite(2, 2, 2, 2).unwrap(), 3.0);
        assert_eq!(bound_bipartite(5, 3, 10, 10).unwrap(), 5.0);
        assert_eq!(bound_bipartite(1, 4, 3, 3).unwrap(), 1.0);
        assert_eq!(bound_tripartite(2, [2, 2, 2]).unwrap(), 9.0);
        assert_eq!(bound_tripartite(1, [3, 3, 3]).unwrap(), 1.0);
        assert_eq!(settings_growth_threshold(16), 2);
        assert_eq!(settings_growth_threshold(1), 1);
        assert_eq!(settings_growth_threshold(10_000), 6);
    }

    #[test]
    fn prior_bounds() {
        let p = prior_bipartite_bounds(2, 2);
        assert!((p.bound_i - 4.564).abs() < 1e-12);
        assert!(p.bound_ii > p.bound_i);
        assert!(bound_bipartite(2, 2, 2, 2).unwrap() < p.bound_i);
    }

    #[test]
    fn compare_examples() {
        let ctx = BoundContext::new(vec![2, 2], vec![2, 2], vec![2, 2], StateFamily::Singlet).unwrap();
        let r = compare(&ctx, Some(2f64.sqrt()));
        assert!(r.all_pass);
        let names: Vec<&str> = r.entries.iter().filter(|e| e.applicable).map(|e| e.bound_name.as_str()).collect();
        assert!(names.contains(&"singlet") && names.contains(&"two-setting-dichotomic") && names.contains(&"bipartite"));
        assert!(compare(&ctx, Some(1.0)).all_pass);
        assert!(!compare(&ctx, Some(10.0)).all_pass);
        let est = r.entries.iter().find(|e| e.bound_name == "estimate-jp").unwrap();
        assert!(!est.applicable && est.pass.is_none());
    }
}
