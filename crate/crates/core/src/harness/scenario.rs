//! JSON scenario schema and the built-in golden scenarios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::matalg::Matrix;
use crate::nonlinear::{ParamBox, ParamMap};
use crate::signals::{AnalyticSignal, SignalOperator, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    GradientLinear,
    DremLinear,
    OverparamNonlinear,
    DremScalarMonotone,
    DremVectorMonotone,
    LinearisedDemo,
    PeProbe,
}

/// Regressor selection: a built-in name plus its parameters.
///
/// Built-ins: `decaying`, `sin-cos` (linear); `delay-scalar`, `vector-demo`
/// (factorisable); `linearised-scalar` (needs `amplitude`); `custom` (needs `m`;
/// a factorisable custom regressor also names `psi` and `good`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorSpec {
    pub builtin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<Vec<AnalyticSignal>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good: Option<Vec<usize>>,
}

impl RegressorSpec {
    pub fn builtin(name: &str) -> Self {
        Self {
            builtin: name.into(),
            amplitude: None,
            m: None,
            psi: None,
            good: None,
        }
    }
}

/// Resolved regressor family.
#[derive(Debug, Clone)]
pub enum RegressorSource {
    Linear(Vec<AnalyticSignal>),
    Factorisable {
        m: Vec<Vec<AnalyticSignal>>,
        psi: ParamMap,
        good: Vec<usize>,
    },
    Linearised {
        amplitude: f64,
    },
}

fn param_map_by_name(name: &str) -> Result<ParamMap> {
    match name {
        "scalar-example" => Ok(ParamMap::scalar_example()),
        "vector-example" => Ok(ParamMap::vector_example()),
        other => Err(Error::UnknownBuiltin(format!("parameter map `{other}`"))),
    }
}

impl RegressorSpec {
    pub fn resolve(&self) -> Result<RegressorSource> {
        let need = |field: &str| {
            Error::Validation(vec![format!(
                "regressor `{}` needs `{field}`",
                self.builtin
            )])
        };
        match self.builtin.as_str() {
            "decaying" => Ok(RegressorSource::Linear(fixtures::decaying_regressor())),
            "sin-cos" => Ok(RegressorSource::Linear(fixtures::sin_cos_regressor())),
            "delay-scalar" => Ok(RegressorSource::Factorisable {
                m: vec![vec![
                    AnalyticSignal::slow_decaying_sine(),
                    AnalyticSignal::constant(1.0),
                ]],
                psi: ParamMap::scalar_example(),
                good: vec![0],
            }),
            "vector-demo" => Ok(RegressorSource::Factorisable {
                m: vec![
                    vec![
                        AnalyticSignal::constant(1.0),
                        AnalyticSignal::sine(),
                        AnalyticSignal::cosine(),
                    ],
                    vec![
                        AnalyticSignal::constant(0.0),
                        AnalyticSignal::cosine(),
                        AnalyticSignal::sine().scaled(-1.0),
                    ],
                ],
                psi: ParamMap::vector_example(),
                good: vec![1, 2],
            }),
            "linearised-scalar" => Ok(RegressorSource::Linearised {
                amplitude: self.amplitude.ok_or_else(|| need("amplitude"))?,
            }),
            "custom" => {
                let m = self.m.clone().ok_or_else(|| need("m"))?;
                match &self.psi {
                    None if m.len() == 1 => Ok(RegressorSource::Linear(
                        m.into_iter().next().expect("one row"),
                    )),
                    None => Err(Error::Validation(vec![
                        "a linear custom regressor has exactly one row".into(),
                    ])),
                    Some(name) => Ok(RegressorSource::Factorisable {
                        m,
                        psi: param_map_by_name(name)?,
                        good: self.good.clone().ok_or_else(|| need("good"))?,
                    }),
                }
            }
            other => Err(Error::UnknownBuiltin(format!("regressor `{other}`"))),
        }
    }
}

/// `gamma`, `[gamma_1, ..]` or a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Scalar(f64),
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

impl GainSpec {
    pub fn matrix(&self, dim: usize) -> Result<Matrix> {
        match self {
            Self::Scalar(g) => Ok(Matrix::identity(dim).scale(*g)),
            Self::Diagonal(d) if d.len() == dim => Ok(Matrix::diagonal(d)),
            Self::Full(rows) if rows.len() == dim => Matrix::from_rows(rows),
            _ => Err(Error::Dimension(format!(
                "gain does not fit dimension {dim}"
            ))),
        }
    }

    /// Per-channel gains for the decoupled linear estimators.
    pub fn per_channel(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            Self::Scalar(g) => Ok(vec![*g; dim]),
            Self::Diagonal(d) if d.len() == dim => Ok(d.clone()),
            _ => Err(Error::Dimension(format!(
                "per-channel gains need a scalar or {dim} values"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl GridSpec {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::spanning(self.t0, self.t_end, self.dt)
    }
}

/// Initial estimates spread around `theta_hat0`: on a circle of `radius`
/// for two parameters, on `[-radius, radius]` for one. `radius = 0` gives a
/// single run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub radius: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotoneSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_matrix: Option<Vec<Vec<f64>>>,
    pub domain: ParamBox,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regressor: Option<RegressorSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<SignalOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtered_rows: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_true: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_hat0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pe_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<MonotoneSpec>,
    /// Acceptance tolerance on the final reported error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Copy with the grid step halved.
    pub fn refined(&self) -> Self {
        let mut s = self.clone();
        if let Some(g) = &mut s.grid {
            g.dt *= 0.5;
        }
        s
    }

    /// Checks every kind-specific requirement and reports all violations.
    pub fn validate(&self) -> Result<()> {
        use ScenarioKind::*;
        let mut problems = Vec::new();
        let mut missing = |present: bool, field: &str| {
            if !present {
                problems.push(format!("missing `{field}`"));
            }
        };
        missing(!self.name.trim().is_empty(), "name");
        missing(self.regressor.is_some(), "regressor");
        missing(self.grid.is_some(), "grid");
        let estimator = !matches!(self.kind, LinearisedDemo | PeProbe);
        if estimator {
            missing(self.gains.is_some(), "gains");
            missing(self.theta_true.is_some(), "theta_true");
            missing(self.theta_hat0.is_some(), "theta_hat0");
        }
        if matches!(
            self.kind,
            DremLinear | DremScalarMonotone | DremVectorMonotone
        ) {
            missing(!self.operators.is_empty(), "operators");
        }
        if matches!(self.kind, DremScalarMonotone | DremVectorMonotone) {
            missing(self.monotone.is_some(), "monotone");
        }
        if self.kind == PeProbe {
            missing(self.pe_window.is_some(), "pe_window");
        }

        if let Some(g) = &self.grid {
            if let Err(e) = g.grid() {
                problems.push(e.to_string());
            }
        }
        if let Some(reg) = &self.regressor {
            match reg.resolve() {
                Ok(src) => self.check_source(&src, &mut problems),
                Err(Error::Validation(v)) => problems.extend(v),
                Err(e) => problems.push(e.to_string()),
            }
        }
        if let Some(s) = &self.sweep {
            if !(s.radius >= 0.0) || (s.radius > 0.0 && s.count == 0) {
                problems.push("sweep needs radius >= 0 and a positive count".into());
            }
            if s.radius > 0.0 && !matches!(self.theta_hat0.as_ref().map(Vec::len), Some(1 | 2)) {
                problems.push("a sweep spreads one- or two-parameter initial estimates".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    fn check_source(&self, src: &RegressorSource, problems: &mut Vec<String>) {
        use ScenarioKind::*;
        let family_ok = matches!(
            (self.kind, src),
            (
                GradientLinear | DremLinear | PeProbe,
                RegressorSource::Linear(_)
            ) | (
                OverparamNonlinear | DremScalarMonotone | DremVectorMonotone,
                RegressorSource::Factorisable { .. }
            ) | (LinearisedDemo, RegressorSource::Linearised { .. })
        );
        if !family_ok {
            problems.push(format!(
                "regressor `{}` does not fit kind {:?}",
                self.regressor.as_ref().map_or("", |r| &r.builtin),
                self.kind
            ));
            return;
        }
        let len_check =
            |field: &str, v: &Option<Vec<f64>>, want: usize, problems: &mut Vec<String>| {
                if let Some(v) = v {
                    if v.len() != want {
                        problems.push(format!("`{field}` has length {}, expected {want}", v.len()));
                    }
                }
            };
        match src {
            RegressorSource::Linear(m) => {
                let q = m.len();
                len_check("theta_true", &self.theta_true, q, problems);
                len_check("theta_hat0", &self.theta_hat0, q, problems);
                if self.kind == DremLinear
                    && !self.operators.is_empty()
                    && self.operators.len() + 1 != q
                {
                    problems.push(format!(
                        "{q} parameters need {} operators, got {}",
                        q - 1,
                        self.operators.len()
                    ));
                }
            }
            RegressorSource::Factorisable { m, psi, .. } => {
                let (n, p, q) = (m.len(), psi.p(), psi.q());
                len_check("theta_true", &self.theta_true, q, problems);
                let est_dim = if self.kind == OverparamNonlinear {
                    p
                } else {
                    q
                };
                len_check("theta_hat0", &self.theta_hat0, est_dim, problems);
                let want_ops = match self.kind {
                    DremScalarMonotone => Some(1),
                    DremVectorMonotone => Some(p.saturating_sub(n)),
                    _ => None,
                };
                if let Some(k) = want_ops {
                    if !self.operators.is_empty() && self.operators.len() != k {
                        problems.push(format!(
                            "{k} operators expected, got {}",
                            self.operators.len()
                        ));
                    }
                }
                if let Some(mono) = &self.monotone {
                    if mono.domain.dim() != q {
                        problems.push(format!(
                            "monotone domain has dimension {}, expected {q}",
                            mono.domain.dim()
                        ));
                    }
                }
            }
            RegressorSource::Linearised { .. } => {}
        }
    }
}

/// Golden scenarios shipped with the crate, by name.
pub const BUILTINS: &[(&str, &str)] = &[
    (
        "gradient-gamma3",
        include_str!("../../scenarios/gradient-gamma3.json"),
    ),
    (
        "gradient-gamma10",
        include_str!("../../scenarios/gradient-gamma10.json"),
    ),
    (
        "gradient-disk",
        include_str!("../../scenarios/gradient-disk.json"),
    ),
    (
        "drem-gamma3",
        include_str!("../../scenarios/drem-gamma3.json"),
    ),
    (
        "drem-gamma10",
        include_str!("../../scenarios/drem-gamma10.json"),
    ),
    (
        "overparam-gamma3",
        include_str!("../../scenarios/overparam-gamma3.json"),
    ),
    (
        "overparam-gamma50-5",
        include_str!("../../scenarios/overparam-gamma50-5.json"),
    ),
    ("drem-disk", include_str!("../../scenarios/drem-disk.json")),
    (
        "monotone-scalar-gamma5",
        include_str!("../../scenarios/monotone-scalar-gamma5.json"),
    ),
    (
        "vector-monotone-demo",
        include_str!("../../scenarios/vector-monotone-demo.json"),
    ),
    (
        "linearised-scalar",
        include_str!("../../scenarios/linearised-scalar.json"),
    ),
    (
        "pe-probe-decaying",
        include_str!("../../scenarios/pe-probe-decaying.json"),
    ),
];

pub fn builtin(name: &str) -> Result<Scenario> {
    let (_, text) = BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownBuiltin(format!("scenario `{name}`")))?;
    Scenario::from_json(text)
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_parses_and_validates() {
        for name in builtin_names() {
            let s = builtin(name).unwrap();
            assert_eq!(s.name, name);
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn validation_lists_every_missing_field() {
        let s = Scenario::from_json(r#"{"name": "x", "kind": "drem_scalar_monotone"}"#).unwrap();
        match s.validate() {
            Err(Error::Validation(v)) => {
                for field in [
                    "regressor",
                    "grid",
                    "gains",
                    "theta_true",
                    "theta_hat0",
                    "operators",
                    "monotone",
                ] {
                    assert!(
                        v.iter().any(|m| m.contains(field)),
                        "{field} not reported in {v:?}"
                    );
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(
            builtin("no-such-scenario"),
            Err(Error::UnknownBuiltin(_))
        ));
        assert!(matches!(
            RegressorSpec::builtin("nope").resolve(),
            Err(Error::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn mismatched_regressor_family() {
        let mut s = builtin("drem-gamma3").unwrap();
        s.regressor = Some(RegressorSpec::builtin("delay-scalar"));
        assert!(matches!(s.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn gain_shapes() {
        let g: GainSpec = serde_json::from_str("3.0").unwrap();
        assert_eq!(g.matrix(2).unwrap(), Matrix::identity(2).scale(3.0));
        let g: GainSpec = serde_json::from_str("[50.0, 5.0]").unwrap();
        assert_eq!(g.per_channel(2).unwrap(), vec![50.0, 5.0]);
        let g: GainSpec = serde_json::from_str("[[2.0, 0.5], [0.5, 1.0]]").unwrap();
        assert!(g.per_channel(2).is_err());
        assert_eq!(g.matrix(2).unwrap()[(0, 1)], 0.5);
    }
}
