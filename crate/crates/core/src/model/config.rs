use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dispersion relation `ω(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OmegaSpec {
    /// `max(1, k^p)`.
    Power { exponent: f64 },
    /// `√(k² + m²)`.
    Massive { mass: f64 },
    /// `max(1, k + k²)`.
    Kinetic,
    /// One value per grid node.
    Table { values: Vec<f64> },
}

/// Form factor `f(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FormFactorSpec {
    /// `scale · k^α`.
    Power {
        alpha: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale · k^{-1/2} · 1_{k ≥ 1}`.
    IndicatorPower {
        #[serde(default = "one")]
        scale: f64,
    },
    /// One complex value per grid node; `im` defaults to zero.
    Table {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

/// Measure `dμ(k)` on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    #[default]
    Lebesgue,
    /// `c · k^{d−1} dk`; `c` defaults to the area of the unit sphere in `d` dimensions.
    Radial {
        dim: u32,
        #[serde(default)]
        scale: Option<f64>,
    },
}

impl MeasureSpec {
    pub fn density(&self, k: f64) -> f64 {
        match self {
            MeasureSpec::Lebesgue => 1.0,
            MeasureSpec::Radial { dim, scale } => {
                let c = scale.unwrap_or(match dim {
                    1 => 2.0,
                    2 => 2.0 * std::f64::consts::PI,
                    _ => 4.0 * std::f64::consts::PI,
                });
                c * k.powi(*dim as i32 - 1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    #[default]
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "one")]
    pub k_min: f64,
    #[serde(default = "default_k_max")]
    pub k_max: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Explicit node list; overrides `k_min`, `k_max`, `nodes` and `spacing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            k_min: 1.0,
            k_max: default_k_max(),
            nodes: default_nodes(),
            spacing: Spacing::Logarithmic,
            points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    #[serde(default)]
    pub lambda: f64,
    /// Strictly increasing cutoffs; empty means an automatic geometric ladder
    /// ending at the largest grid frequency.
    #[serde(default)]
    pub cutoffs: Vec<f64>,
    /// Resolvent probe points.
    #[serde(default = "default_z")]
    pub z: Vec<f64>,
    #[serde(default = "default_tau")]
    pub tau_ladder: Vec<f64>,
    /// Exponents scanned by the divergence probe.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Coupling used by the divergence probe (must be negative).
    #[serde(default = "default_probe_lambda")]
    pub probe_lambda: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            cutoffs: Vec::new(),
            z: default_z(),
            tau_ladder: default_tau(),
            alphas: default_alphas(),
            probe_lambda: default_probe_lambda(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_nmax")]
    pub nmax: u32,
    /// Coupling for the Fock oracle; defaults to the flow coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Tolerance for the spectral comparison.
    #[serde(default = "default_fock_tolerance")]
    pub tolerance: f64,
}

impl Default for FockSpec {
    fn default() -> Self {
        Self {
            modes: default_modes(),
            nmax: default_nmax(),
            lambda: None,
            levels: default_levels(),
            thetas: default_thetas(),
            trials: default_trials(),
            tolerance: default_fock_tolerance(),
        }
    }
}

/// A complete scenario: one-body data, grid, flow and Fock settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub omega: OmegaSpec,
    pub f: FormFactorSpec,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub flow: FlowSpec,
    #[serde(default)]
    pub fock: FockSpec,
}

fn one() -> f64 {
    1.0
}
fn default_k_max() -> f64 {
    1e4
}
fn default_nodes() -> usize {
    512
}
fn default_z() -> Vec<f64> {
    vec![-1.0]
}
fn default_tau() -> Vec<f64> {
    vec![1e2, 1e3, 1e4]
}
fn default_alphas() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.25, 0.3, 0.4]
}
fn default_probe_lambda() -> f64 {
    -0.5
}
fn default_modes() -> usize {
    3
}
fn default_nmax() -> u32 {
    8
}
fn default_levels() -> usize {
    10
}
fn default_thetas() -> Vec<f64> {
    vec![std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_2]
}
fn default_trials() -> usize {
    200
}
fn default_fock_tolerance() -> f64 {
    1e-4
}
fn default_name() -> String {
    "custom".into()
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn preset_names() -> &'static [&'static str] {
        &[
            "scalar",
            "regular",
            "energy-renorm",
            "charge-renorm",
            "pauli-fierz",
            "fock",
        ]
    }

    /// Built-in scenarios.
    pub fn preset(name: &str) -> Option<Self> {
        let base = |name: &str, omega, f, grid, lambda: f64| ScenarioConfig {
            name: name.into(),
            omega,
            f,
            measure: MeasureSpec::Lebesgue,
            grid,
            flow: FlowSpec {
                lambda,
                ..FlowSpec::default()
            },
            fock: FockSpec::default(),
        };
        let id = OmegaSpec::Power { exponent: 1.0 };
        Some(match name {
            // Single mode, ω = 1, f = 1, unit weight.
            "scalar" => {
                let mut c = base(
                    name,
                    id,
                    FormFactorSpec::Power { alpha: 0.0, scale: 1.0 },
                    GridSpec {
                        k_min: 1.0,
                        k_max: 1.0,
                        nodes: 1,
                        ..GridSpec::default()
                    },
                    2.0,
                );
                c.fock = FockSpec {
                    modes: 1,
                    nmax: 60,
                    levels: 5,
                    tolerance: 1e-6,
                    ..FockSpec::default()
                };
                c
            }
            // ω = k, f = k^{-1}: f ∈ H.
            "regular" => base(
                name,
                id,
                FormFactorSpec::Power {
                    alpha: -1.0,
                    scale: 1.0,
                },
                GridSpec::default(),
                1.0,
            ),
            // ω = k, f = k^{-0.15}: ω^{-1/2}f ∈ H but ω^{-1/4}f ∉ H.
            "energy-renorm" => base(
                name,
                id,
                FormFactorSpec::Power {
                    alpha: -0.15,
                    scale: 1.0,
                },
                GridSpec {
                    k_max: 1e6,
                    ..GridSpec::default()
                },
                1.0,
            ),
            // ω = k, f = k^{1/4}: ω^{-1/2}f ∉ H, ω^{-3/2}f ∈ H.
            "charge-renorm" => base(
                name,
                id,
                FormFactorSpec::Power {
                    alpha: 0.25,
                    scale: 1.0,
                },
                GridSpec::default(),
                -0.5,
            ),
            // ω = max(1, k + k²), f = k^{-1/2}1_{k≥1}, radial measure in d = 3.
            "pauli-fierz" => {
                let mut c = base(
                    name,
                    OmegaSpec::Kinetic,
                    FormFactorSpec::IndicatorPower { scale: 1.0 },
                    GridSpec {
                        k_max: 1e4,
                        ..GridSpec::default()
                    },
                    -0.05,
                );
                c.measure = MeasureSpec::Radial { dim: 3, scale: None };
                c
            }
            // Narrow band one-body space, coarse-grained to three Fock modes.
            "fock" => {
                let mut c = base(
                    name,
                    id,
                    FormFactorSpec::Power {
                        alpha: -1.0,
                        scale: 0.5,
                    },
                    GridSpec {
                        k_min: 1.0,
                        k_max: 2.5,
                        nodes: 24,
                        spacing: Spacing::Linear,
                        points: None,
                    },
                    0.2,
                );
                c.fock = FockSpec {
                    modes: 3,
                    nmax: 8,
                    ..FockSpec::default()
                };
                c
            }
            _ => return None,
        })
    }
}
