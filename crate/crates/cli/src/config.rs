use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fluctlab::ensembles::EnsembleDescriptor;
use fluctlab::frechet::VariationMode;
use fluctlab::{EnsembleSpec, Polynomial, TestFunction};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A test function given by name (`sin`, `x3`, `poly:1,0,2`) or by
/// polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Name(String),
    Poly { poly: Vec<f64> },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction, CliError> {
        match self {
            FunctionSpec::Poly { poly } => Ok(TestFunction::polynomial(Polynomial::new(poly.clone()))),
            FunctionSpec::Name(name) => match name.strip_prefix("poly:") {
                Some(list) => {
                    let coeffs = list
                        .split(',')
                        .map(|c| c.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| CliError::Validation(format!("bad polynomial {name:?}: {e}")))?;
                    Ok(TestFunction::polynomial(Polynomial::new(coeffs)))
                }
                None => TestFunction::by_name(name).map_err(CliError::from),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSettings {
    pub nodes: Option<usize>,
    pub z_radius: Option<f64>,
    pub w_radius: Option<f64>,
    pub enclosed: Option<f64>,
}

/// Everything a run can be configured with. Fields left out fall back to
/// per-command defaults; command-line flags override the config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<ContourSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<VariationMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub only: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path)
            .map_err(|e| CliError::Validation(format!("cannot open config {}: {e}", path.display())))?;
        let mut de = serde_json::Deserializer::from_reader(BufReader::new(file));
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            CliError::Validation(format!("config {}: field `{}`: {}", path.display(), e.path(), e.inner()))
        })
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: Settings) -> Settings {
        Settings {
            command: over.command.or(self.command),
            ensemble: over.ensemble.or(self.ensemble),
            n: over.n.or(self.n),
            n_values: over.n_values.or(self.n_values),
            replicas: over.replicas.or(self.replicas),
            seed: over.seed.or(self.seed),
            f: over.f.or(self.f),
            g: over.g.or(self.g),
            contour: match (self.contour, over.contour) {
                (Some(a), Some(b)) => Some(ContourSettings {
                    nodes: b.nodes.or(a.nodes),
                    z_radius: b.z_radius.or(a.z_radius),
                    w_radius: b.w_radius.or(a.w_radius),
                    enclosed: b.enclosed.or(a.enclosed),
                }),
                (a, b) => b.or(a),
            },
            rho_target: over.rho_target.or(self.rho_target),
            z: over.z.or(self.z),
            w: over.w.or(self.w),
            degree: over.degree.or(self.degree),
            grid: over.grid.or(self.grid),
            grid_size: over.grid_size.or(self.grid_size),
            mesh: over.mesh.or(self.mesh),
            mode: over.mode.or(self.mode),
            kernel: over.kernel.or(self.kernel),
            matrices: over.matrices.or(self.matrices),
            only: over.only.or(self.only),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }

    /// The ensemble at the configured `n` (GUE of size 16 by default).
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec, CliError> {
        let spec = match &self.ensemble {
            Some(d) => d.build().map_err(|e| CliError::field("ensemble", e))?,
            None => EnsembleSpec::gue(16).map_err(|e| CliError::field("ensemble", e))?,
        };
        match self.n {
            Some(n) => spec.with_n(n).map_err(|e| CliError::field("n", e)),
            None => Ok(spec),
        }
    }

    pub fn function(&self, which: &str, default: &str) -> Result<TestFunction, CliError> {
        let spec = match which {
            "f" => self.f.clone(),
            _ => self.g.clone(),
        }
        .unwrap_or_else(|| FunctionSpec::Name(default.to_string()));
        spec.build().map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("field `{which}`: {msg}")),
            other => other,
        })
    }

    pub fn replicas_or(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }
}
