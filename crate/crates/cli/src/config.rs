//! TOML run configuration.
//!
//! The file is strict: unknown keys are rejected, required keys per problem
//! family and architecture are enforced, and the schema version string must
//! match. `template()` returns a fully commented reference config.

use serde::{Deserialize, Serialize};

use qbsde::experiments::{ArchSpec, SweepFamily, SweepSpec};
use qbsde::problems::OptionKind;
use qbsde::solver::SolverConfig;

pub const SCHEMA_VERSION: &str = "qbsde-config/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub problem: ProblemSection,
    pub solver: SolverSection,
    pub architecture: ArchitectureSection,
    pub experiment: ExperimentSection,
    pub oracle: OracleSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// "black_scholes" | "hjb" | "constant"
    pub family: String,
    pub horizon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_options: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strikes: Option<Vec<f64>>,
    /// any of "call" / "put"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub option_types: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub num_paths: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub num_steps: usize,
    #[serde(default)]
    pub shuffle: bool,
    #[serde(default = "default_spread")]
    pub y0_init_spread: f64,
}

fn default_spread() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSection {
    /// "mlp" | "vqc"
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adapter_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub repetitions: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub mc_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        if config.schema != SCHEMA_VERSION {
            return Err(format!(
                "config schema '{}' does not match expected '{SCHEMA_VERSION}'",
                config.schema
            ));
        }
        config.validated_family()?;
        config.validated_arch()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        RunConfig::parse(&text)
    }

    /// Typed sweep family, with per-family required/forbidden keys enforced.
    pub fn validated_family(&self) -> Result<SweepFamily, String> {
        let p = &self.problem;
        let require = |name: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(format!("problem family '{}' requires key '{name}'", p.family))
            }
        };
        let forbid = |name: &str, absent: bool| {
            if absent {
                Ok(())
            } else {
                Err(format!(
                    "problem family '{}' does not accept key '{name}'",
                    p.family
                ))
            }
        };
        match p.family.as_str() {
            "black_scholes" => {
                require("rate", p.rate.is_some())?;
                require("vol", p.vol.is_some())?;
                require("spot", p.spot.is_some())?;
                require("num_options", p.num_options.is_some())?;
                require("strikes", p.strikes.is_some())?;
                require("option_types", p.option_types.is_some())?;
                forbid("dim", p.dim.is_none())?;
                forbid("lambdas", p.lambdas.is_none())?;
                forbid("value", p.value.is_none())?;
                let option_kinds = p
                    .option_types
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|t| match t.as_str() {
                        "call" => Ok(OptionKind::Call),
                        "put" => Ok(OptionKind::Put),
                        other => Err(format!("unknown option type '{other}'")),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SweepFamily::BlackScholes {
                    rate: p.rate.unwrap(),
                    vol: p.vol.unwrap(),
                    spot: p.spot.unwrap(),
                    num_options: p.num_options.unwrap(),
                    strikes: p.strikes.clone().unwrap(),
                    option_kinds,
                })
            }
            "hjb" => {
                require("dim", p.dim.is_some())?;
                require("lambdas", p.lambdas.is_some())?;
                forbid("rate", p.rate.is_none())?;
                forbid("vol", p.vol.is_none())?;
                forbid("spot", p.spot.is_none())?;
                forbid("num_options", p.num_options.is_none())?;
                forbid("strikes", p.strikes.is_none())?;
                forbid("option_types", p.option_types.is_none())?;
                forbid("value", p.value.is_none())?;
                Ok(SweepFamily::Hjb {
                    dim: p.dim.unwrap(),
                    lambdas: p.lambdas.clone().unwrap(),
                })
            }
            "constant" => {
                require("value", p.value.is_some())?;
                require("dim", p.dim.is_some())?;
                forbid("rate", p.rate.is_none())?;
                forbid("vol", p.vol.is_none())?;
                forbid("spot", p.spot.is_none())?;
                forbid("num_options", p.num_options.is_none())?;
                forbid("strikes", p.strikes.is_none())?;
                forbid("option_types", p.option_types.is_none())?;
                forbid("lambdas", p.lambdas.is_none())?;
                Ok(SweepFamily::Constant {
                    value: p.value.unwrap(),
                    dim: p.dim.unwrap(),
                })
            }
            other => Err(format!(
                "unknown problem family '{other}' (expected black_scholes, hjb or constant)"
            )),
        }
    }

    pub fn validated_arch(&self) -> Result<ArchSpec, String> {
        let a = &self.architecture;
        match a.kind.as_str() {
            "mlp" => {
                if a.n_qubits.is_some() || a.n_layers.is_some() || a.adapter_seed.is_some() {
                    return Err("architecture 'mlp' does not accept circuit keys".into());
                }
                Ok(ArchSpec::Mlp {
                    hidden_width: a
                        .hidden_width
                        .ok_or("architecture 'mlp' requires key 'hidden_width'")?,
                    hidden_layers: a
                        .hidden_layers
                        .ok_or("architecture 'mlp' requires key 'hidden_layers'")?,
                })
            }
            "vqc" => {
                if a.hidden_width.is_some() || a.hidden_layers.is_some() {
                    return Err("architecture 'vqc' does not accept dense-network keys".into());
                }
                Ok(ArchSpec::Vqc {
                    num_qubits: a
                        .n_qubits
                        .ok_or("architecture 'vqc' requires key 'n_qubits'")?,
                    num_layers: a
                        .n_layers
                        .ok_or("architecture 'vqc' requires key 'n_layers'")?,
                    adapter_seed: a
                        .adapter_seed
                        .ok_or("architecture 'vqc' requires key 'adapter_seed'")?,
                })
            }
            other => Err(format!(
                "unknown architecture kind '{other}' (expected mlp or vqc)"
            )),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            num_paths: self.solver.num_paths,
            batch_size: self.solver.batch_size,
            epochs: self.solver.epochs,
            learning_rate: self.solver.learning_rate,
            num_steps: self.solver.num_steps,
            shuffle: self.solver.shuffle,
            y0_init_spread: self.solver.y0_init_spread,
        }
    }

    /// Assemble the sweep description, optionally overriding the base seed.
    pub fn sweep_spec(&self, seed_override: Option<u64>) -> Result<SweepSpec, String> {
        Ok(SweepSpec {
            family: self.validated_family()?,
            arch: self.validated_arch()?,
            repetitions: self.experiment.repetitions,
            base_seed: seed_override.unwrap_or(self.experiment.base_seed),
            solver: self.solver_config(),
            horizon: self.problem.horizon,
            oracle_mc_samples: self.oracle.mc_samples,
            oracle_seed: self.oracle.seed,
        })
    }
}

/// Reference configuration written by `init`: the 100-option portfolio sweep
/// with the 4-qubit circuit model.
pub fn template() -> String {
    format!(
        r#"# Run configuration (schema {SCHEMA_VERSION}).
# Unknown keys are rejected; required keys depend on the problem family
# and architecture kind as documented below.
schema = "{SCHEMA_VERSION}"

[problem]
# family: "black_scholes" (rate, vol, spot, num_options, strikes,
#         option_types), "hjb" (dim, lambdas) or "constant" (value, dim)
family = "black_scholes"
horizon = 1.0
rate = 0.1
vol = 0.2
spot = 100.0
num_options = 100
strikes = [70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0]
option_types = ["call", "put"]

[solver]
num_paths = 10000
batch_size = 100
epochs = 10
learning_rate = 0.01
num_steps = 10
shuffle = false
y0_init_spread = 0.01

[architecture]
# kind: "mlp" (hidden_width, hidden_layers) or
#       "vqc" (n_qubits, n_layers, adapter_seed)
kind = "vqc"
n_qubits = 4
n_layers = 2
adapter_seed = 2718

[experiment]
repetitions = 5
base_seed = 42

[oracle]
mc_samples = 1000000
seed = 9001

[output]
dir = "runs/portfolio_vqc"
"#
    )
}

/// The parsed form of `template()`, used by the round-trip test and as the
/// canonical example in documentation.
pub fn template_config() -> RunConfig {
    RunConfig {
        schema: SCHEMA_VERSION.to_string(),
        problem: ProblemSection {
            family: "black_scholes".into(),
            horizon: 1.0,
            rate: Some(0.1),
            vol: Some(0.2),
            spot: Some(100.0),
            num_options: Some(100),
            strikes: Some(vec![70.0, 80.0, 90.0, 100.0, 110.0, 120.0, 130.0, 140.0]),
            option_types: Some(vec!["call".into(), "put".into()]),
            dim: None,
            lambdas: None,
            value: None,
        },
        solver: SolverSection {
            num_paths: 10_000,
            batch_size: 100,
            epochs: 10,
            learning_rate: 0.01,
            num_steps: 10,
            shuffle: false,
            y0_init_spread: 0.01,
        },
        architecture: ArchitectureSection {
            kind: "vqc".into(),
            hidden_width: None,
            hidden_layers: None,
            n_qubits: Some(4),
            n_layers: Some(2),
            adapter_seed: Some(2718),
        },
        experiment: ExperimentSection {
            repetitions: 5,
            base_seed: 42,
        },
        oracle: OracleSection {
            mc_samples: 1_000_000,
            seed: 9001,
        },
        output: OutputSection {
            dir: "runs/portfolio_vqc".into(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_round_trips() {
        let parsed = RunConfig::parse(&template()).unwrap();
        assert_eq!(parsed, template_config());
        // and the typed views validate
        parsed.validated_family().unwrap();
        parsed.validated_arch().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = template().replace("shuffle = false", "shuffle = false\nbogus_key = 1");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.contains("bogus_key"), "{err}");
    }

    #[test]
    fn schema_version_is_checked() {
        let text = template().replace(SCHEMA_VERSION, "qbsde-config/999");
        assert!(RunConfig::parse(&text).unwrap_err().contains("schema"));
    }

    #[test]
    fn family_key_rules_enforced() {
        // hjb with a leftover strike list
        let text = template()
            .replace("family = \"black_scholes\"", "family = \"hjb\"")
            .replace("rate = 0.1\n", "")
            .replace("vol = 0.2\n", "")
            .replace("spot = 100.0\n", "")
            .replace("num_options = 100\n", "dim = 100\nlambdas = [1.0]\n")
            .replace("option_types = [\"call\", \"put\"]\n", "");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.contains("strikes"), "{err}");
    }

    #[test]
    fn missing_required_arch_key() {
        let text = template().replace("n_qubits = 4\n", "");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.contains("n_qubits"), "{err}");
    }

    #[test]
    fn bad_option_type_rejected() {
        let text = template().replace("\"put\"", "\"straddle\"");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.contains("straddle"), "{err}");
    }
}
