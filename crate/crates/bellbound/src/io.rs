//! JSON file formats.
//!
//! Setting and outcome indices are 1-based in files. Complex matrices are
//! arrays of rows, each entry an `[re, im]` pair.
//!
//! ```json
//! {"scenario": {"parties": 2, "settings": [2, 2], "outcomes": [[1, -1], [1, -1]]},
//!  "terms": [{"s": [1, 1], "l": [1, 1], "c": 1.0}]}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::StateFamily;
use crate::error::{Error, Result};
use crate::functionals;
use crate::lhv::ViolationCertificate;
use crate::linalg::{self, CMatrix};
use crate::quantum::{generalized_ghz, ghz_qudit, singlet, DensityState, PovmFamily};
use crate::scenario::{one_based, BellFunctional, Behavior, DeterministicStrategy, Scenario};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub parties: usize,
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<f64>>,
}

impl ScenarioJson {
    pub fn from_scenario(sc: &Scenario) -> Self {
        ScenarioJson { parties: sc.n_parties(), settings: sc.settings().to_vec(), outcomes: sc.outcomes().to_vec() }
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        Scenario::new(self.parties, self.settings.clone(), self.outcomes.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub s: Vec<usize>,
    pub l: Vec<usize>,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalJson {
    pub scenario: ScenarioJson,
    pub terms: Vec<TermJson>,
}

fn zero_based(tuple: &[usize], what: &str) -> Result<Vec<usize>> {
    tuple
        .iter()
        .map(|&v| {
            v.checked_sub(1)
                .ok_or_else(|| Error::Parse(format!("{what} indices are 1-based, found 0")))
        })
        .collect()
}

impl FunctionalJson {
    pub fn from_functional(f: &BellFunctional) -> Self {
        FunctionalJson {
            scenario: ScenarioJson::from_scenario(f.scenario()),
            terms: f
                .terms()
                .into_iter()
                .map(|(s, l, c)| TermJson { s: one_based(&s), l: one_based(&l), c })
                .collect(),
        }
    }

    /// Repeated keys accumulate.
    pub fn to_functional(&self) -> Result<BellFunctional> {
        let sc = self.scenario.to_scenario()?;
        let mut f = BellFunctional::zero(&sc);
        for t in &self.terms {
            if !t.c.is_finite() {
                return Err(Error::InvalidFunctional("non-finite coefficient".into()));
            }
            f.add_term(&zero_based(&t.s, "setting")?, &zero_based(&t.l, "outcome")?, t.c)?;
        }
        Ok(f)
    }
}

fn setting_key(tuple: &[usize]) -> String {
    one_based(tuple).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorJson {
    pub scenario: ScenarioJson,
    /// Keys are 1-based setting tuples such as `"1,2"`; values are the joint
    /// distribution over outcome tuples, row-major, first party slowest.
    pub tables: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub signed: bool,
}

impl BehaviorJson {
    pub fn from_behavior(b: &Behavior) -> Self {
        let sc = b.scenario();
        let tables = (0..sc.setting_tuples())
            .map(|st| {
                let tuple = sc.setting_tuple(st);
                (setting_key(&tuple), b.table(&tuple).to_vec())
            })
            .collect();
        BehaviorJson { scenario: ScenarioJson::from_scenario(sc), tables, signed: b.is_signed() }
    }

    pub fn to_behavior(&self) -> Result<Behavior> {
        let sc = self.scenario.to_scenario()?;
        let ot = sc.outcome_tuples();
        let mut tables = vec![f64::NAN; sc.table_len()];
        let mut seen = vec![false; sc.setting_tuples()];
        for (key, values) in &self.tables {
            let tuple: Vec<usize> = key
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad setting key `{key}`"))))
                .collect::<Result<_>>()?;
            let tuple = zero_based(&tuple, "setting")?;
            if tuple.len() != sc.n_parties() || tuple.iter().zip(sc.settings()).any(|(t, s)| t >= s) {
                return Err(Error::InvalidBehavior(format!("setting key `{key}` out of range")));
            }
            if values.len() != ot {
                return Err(Error::DimensionMismatch(format!(
                    "table `{key}` has {} entries, expected {ot}",
                    values.len()
                )));
            }
            let st = sc.setting_tuple_index(&tuple);
            seen[st] = true;
            tables[st * ot..(st + 1) * ot].copy_from_slice(values);
        }
        if let Some(st) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidBehavior(format!("missing table `{}`", setting_key(&sc.setting_tuple(st)))));
        }
        Behavior::new(&sc, tables, self.signed)
    }
}

/// A complex matrix as rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexMatrixJson(pub Vec<Vec<[f64; 2]>>);

impl ComplexMatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        ComplexMatrixJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, |r| r.len());
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged complex matrix".into()));
        }
        if self.0.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| linalg::c(self.0[i][j][0], self.0[i][j][1])))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableComponentJson {
    pub weight: f64,
    pub sites: Vec<ComplexMatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dims: Vec<usize>,
    pub matrix: ComplexMatrixJson,
    /// Optional product decomposition of a separable state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separable: Option<Vec<SeparableComponentJson>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmJson {
    /// Outcome values per party; defaults to labels `1..L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<Vec<f64>>>,
    /// `elements[party][setting][outcome]`.
    pub elements: Vec<Vec<Vec<ComplexMatrixJson>>>,
}

impl PovmJson {
    pub fn from_povms(p: &PovmFamily) -> Self {
        PovmJson {
            outcomes: Some(p.scenario().outcomes().to_vec()),
            elements: p
                .elements()
                .iter()
                .map(|party| {
                    party
                        .iter()
                        .map(|m| m.iter().map(ComplexMatrixJson::from_matrix).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_povms(&self) -> Result<PovmFamily> {
        let elements: Vec<Vec<Vec<CMatrix>>> = self
            .elements
            .iter()
            .map(|party| {
                party
                    .iter()
                    .map(|m| m.iter().map(|e| e.to_matrix()).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        match &self.outcomes {
            None => PovmFamily::new(elements),
            Some(outcomes) => {
                let settings = elements.iter().map(|p| p.len()).collect();
                let sc = Scenario::new(elements.len(), settings, outcomes.clone())?;
                PovmFamily::with_scenario(&sc, elements)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateTermJson {
    /// Outcome index (1-based) per party and setting.
    pub strategy: Vec<Vec<usize>>,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub upsilon: f64,
    pub terms: Vec<CertificateTermJson>,
    pub residual: f64,
}

impl CertificateJson {
    pub fn from_certificate(cert: &ViolationCertificate) -> Self {
        let sc = cert.functional.scenario();
        let radices: Vec<usize> = sc
            .settings()
            .iter()
            .zip(sc.outcomes())
            .flat_map(|(&s, out)| std::iter::repeat_n(out.len(), s))
            .collect();
        let terms = cert
            .terms
            .iter()
            .map(|t| {
                let digits = crate::scenario::mixed_radix_digits(t.strategy as usize, &radices);
                let mut strategy = Vec::new();
                let mut pos = 0;
                for &s in sc.settings() {
                    strategy.push(one_based(&digits[pos..pos + s]));
                    pos += s;
                }
                CertificateTermJson { strategy, c: t.c }
            })
            .collect();
        CertificateJson { upsilon: cert.upsilon, terms, residual: cert.residual }
    }

    /// Strategies decoded against `scenario`, with weights.
    pub fn strategies(&self, scenario: &Scenario) -> Result<Vec<(DeterministicStrategy, f64)>> {
        self.terms
            .iter()
            .map(|t| {
                let a = t.strategy.iter().map(|row| zero_based(row, "outcome")).collect::<Result<_>>()?;
                Ok((DeterministicStrategy::new(scenario, a)?, t.c))
            })
            .collect()
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// A state together with whatever structure is known about it.
#[derive(Clone, Debug)]
pub struct StateSource {
    pub state: DensityState,
    pub family: StateFamily,
    pub separable: Option<Vec<(f64, Vec<CMatrix>)>>,
    pub description: String,
}

fn parse_params(spec: &str, args: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for part in args.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value in `{spec}`")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn param<T: std::str::FromStr>(params: &BTreeMap<String, String>, key: &str, default: Option<T>, spec: &str) -> Result<T> {
    match params.get(key) {
        Some(v) => v.parse().map_err(|_| Error::Parse(format!("bad value for `{key}` in `{spec}`"))),
        None => default.ok_or_else(|| Error::Parse(format!("`{spec}` needs `{key}=`"))),
    }
}

/// Resolves a state descriptor: `singlet`, `ghz:N=3,d=2`,
/// `gghz:N=3,phi=0.5`, `product:N=2,d=2` (all sites in the first basis
/// state), `classical:N=2,d=2` (uniform mixture of `|j..j>`), `mixed:N=2,d=2`,
/// or a path to a state JSON file.
pub fn resolve_state(spec: &str) -> Result<StateSource> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let params = parse_params(spec, args)?;
    let known = |allowed: &[&str]| -> Result<()> {
        match params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Parse(format!("unknown parameter `{k}` in `{spec}`"))),
            None => Ok(()),
        }
    };
    let source = |state, family, separable| StateSource { state, family, separable, description: spec.to_string() };
    match name {
        "singlet" => {
            known(&[])?;
            Ok(source(singlet(), StateFamily::Singlet, None))
        }
        "ghz" => {
            known(&["N", "d"])?;
            let n = param(&params, "N", Some(3), spec)?;
            let d = param(&params, "d", Some(2), spec)?;
            Ok(source(ghz_qudit(n, d)?, StateFamily::GhzQudit { d }, None))
        }
        "gghz" => {
            known(&["N", "phi"])?;
            let n = param(&params, "N", Some(3), spec)?;
            let phi: f64 = param(&params, "phi", None, spec)?;
            Ok(source(generalized_ghz(n, phi)?, StateFamily::GeneralizedGhz { phi }, None))
        }
        "product" | "classical" | "mixed" => {
            known(&["N", "d"])?;
            let n: usize = param(&params, "N", Some(2), spec)?;
            let d: usize = param(&params, "d", Some(2), spec)?;
            if n == 0 || d == 0 {
                return Err(Error::Parse(format!("`{spec}` needs N, d >= 1")));
            }
            let basis = |j: usize| {
                let mut m = CMatrix::zeros(d, d);
                m[(j, j)] = linalg::c(1.0, 0.0);
                m
            };
            let components: Vec<(f64, Vec<CMatrix>)> = match name {
                "product" => vec![(1.0, vec![basis(0); n])],
                "classical" => (0..d).map(|j| (1.0 / d as f64, vec![basis(j); n])).collect(),
                _ => vec![(1.0, vec![linalg::identity(d).scale(1.0 / d as f64); n])],
            };
            let parts = components
                .iter()
                .map(|(w, sites)| Ok((*w, DensityState::product(sites)?)))
                .collect::<Result<Vec<_>>>()?;
            let state = DensityState::mixture(&parts)?;
            Ok(source(state, StateFamily::Separable, Some(components)))
        }
        _ if spec.ends_with(".json") || std::path::Path::new(spec).is_file() => {
            let json: StateJson = read_json(std::path::Path::new(spec))?;
            let state = DensityState::new(json.dims.clone(), json.matrix.to_matrix()?)?;
            let separable = match &json.separable {
                None => None,
                Some(comps) => Some(
                    comps
                        .iter()
                        .map(|c| Ok((c.weight, c.sites.iter().map(|m| m.to_matrix()).collect::<Result<Vec<_>>>()?)))
                        .collect::<Result<Vec<_>>>()?,
                ),
            };
            let family = if separable.is_some() { StateFamily::Separable } else { StateFamily::Generic };
            Ok(source(state, family, separable))
        }
        _ => Err(Error::Parse(format!("unknown state `{spec}`"))),
    }
}

/// Resolves a functional descriptor: a shorthand (`chsh`, `mermin:N`,
/// `cglmp:d`) or a path to a functional JSON file.
pub fn resolve_functional(spec: &str) -> Result<BellFunctional> {
    if spec.ends_with(".json") || std::path::Path::new(spec).is_file() {
        let json: FunctionalJson = read_json(std::path::Path::new(spec))?;
        return json.to_functional();
    }
    functionals::named(spec)
}
