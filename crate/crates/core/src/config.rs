//! Run configuration: strict JSON with command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::{ErrorQuadrature, Field, Region, StudySpec};
use crate::discretization::Shape;
use crate::error::{Error, Result};
use crate::hdg::{InterfaceTau, SolverOptions, TauLength};
use crate::physics::{
    builtin_case, CaseParams, ManufacturedCase, PositiveRule, StabilizationPolicy,
};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RegionSpec {
    Named(String),
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Gamma {
    Value(f64),
    Rule(String),
}

/// The config file as written. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub case: Option<String>,
    pub m: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub dim: Option<usize>,
    pub shape: Option<Shape>,
    pub k: Option<OneOrMany<usize>>,
    pub n: Option<OneOrMany<usize>>,
    /// "upwind", "generalized", "1/h" or "constant".
    pub tau: Option<String>,
    /// Value on degenerate faces for the generalized policy: a number or "1/h".
    pub gamma: Option<Gamma>,
    /// Value for the constant policy.
    pub tau_value: Option<f64>,
    pub tau_length: Option<TauLength>,
    pub interface_tau: Option<InterfaceTau>,
    pub regions: Option<Vec<RegionSpec>>,
    pub fields: Option<Vec<String>>,
    pub quadrature_boost: Option<usize>,
    pub error_boost: Option<usize>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub sampling: Option<usize>,
}

impl RawConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Keys set in `other` replace ours.
    pub fn overridden_by(mut self, other: RawConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            case,
            m,
            alpha,
            beta,
            dim,
            shape,
            k,
            n,
            tau,
            gamma,
            tau_value,
            tau_length,
            interface_tau,
            regions,
            fields,
            quadrature_boost,
            error_boost,
            output,
            threads,
            sampling
        );
        self
    }

    pub fn validate(&self) -> Result<RunConfig> {
        let case_name = self.case.clone().unwrap_or_else(|| "nondeg2d".to_string());
        let params = CaseParams {
            m: self.m.clone(),
            alpha: self.alpha,
            beta: self.beta,
            dim: self.dim,
        };
        let case = builtin_case(&case_name, &params)?;
        let shape = self.shape.unwrap_or_else(|| case.default_shape());
        if shape.dim() != case.dim() {
            return Err(Error::Config(format!(
                "shape {shape:?} does not fit the {}-dimensional case {}",
                case.dim(),
                case.name
            )));
        }
        let ks = self.k.as_ref().map_or(vec![1, 2], |v| v.to_vec());
        let ns = self.n.as_ref().map_or(vec![8, 16], |v| v.to_vec());
        if ks.is_empty() || ks.iter().any(|&k| k < 1) {
            return Err(Error::Config("k values must be at least 1".into()));
        }
        if ns.is_empty() || ns.iter().any(|&n| n < 1) {
            return Err(Error::Config("n values must be at least 1".into()));
        }
        let policy = self.policy()?;
        policy.validate()?;
        let mut options = SolverOptions::with_policy(policy);
        if let Some(b) = self.quadrature_boost {
            options.quadrature_boost = b;
        }
        if let Some(t) = self.tau_length {
            options.tau_length = t;
        }
        if let Some(t) = self.interface_tau {
            options.interface_tau = t;
        }
        let regions = match &self.regions {
            None => vec![Region::All],
            Some(list) if list.is_empty() => {
                return Err(Error::Config("regions must not be empty".into()))
            }
            Some(list) => list
                .iter()
                .map(|r| match r {
                    RegionSpec::Named(s) if s == "all" => Ok(Region::All),
                    RegionSpec::Named(s) => Err(Error::Config(format!("unknown region {s:?}"))),
                    RegionSpec::Box { lo, hi } => {
                        if lo.len() != case.dim() || hi.len() != case.dim() {
                            return Err(Error::Config(
                                "region corners must match the case dimension".into(),
                            ));
                        }
                        Region::from_box(lo, hi)
                    }
                })
                .collect::<Result<_>>()?,
        };
        let fields = match &self.fields {
            None => vec![Field::P, Field::U],
            Some(list) if list.is_empty() => {
                return Err(Error::Config("fields must not be empty".into()))
            }
            Some(list) => list
                .iter()
                .map(|s| Field::parse(s))
                .collect::<Result<_>>()?,
        };
        let mut quadrature = ErrorQuadrature::default();
        if let Some(b) = self.error_boost {
            quadrature.boost = b;
            quadrature.rough_boost = b + 2;
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let sampling = self.sampling.unwrap_or(1);
        if sampling == 0 {
            return Err(Error::Config("sampling must be at least 1".into()));
        }
        Ok(RunConfig {
            case,
            shape,
            ks,
            ns,
            options,
            regions,
            fields,
            quadrature,
            output: self.output.clone().unwrap_or_else(|| PathBuf::from("out")),
            threads: self.threads,
            sampling,
        })
    }

    fn policy(&self) -> Result<StabilizationPolicy> {
        let gamma = match &self.gamma {
            None => PositiveRule::ReciprocalH,
            Some(Gamma::Value(v)) => PositiveRule::Fixed(*v),
            Some(Gamma::Rule(s)) if s == "1/h" => PositiveRule::ReciprocalH,
            Some(Gamma::Rule(s)) => return Err(Error::Config(format!("unknown gamma {s:?}"))),
        };
        let tau = self.tau.as_deref().unwrap_or("generalized");
        if self.gamma.is_some() && tau != "generalized" {
            return Err(Error::Config(
                "gamma only applies to the generalized policy".into(),
            ));
        }
        if self.tau_value.is_some() && tau != "constant" {
            return Err(Error::Config(
                "tau_value only applies to the constant policy".into(),
            ));
        }
        Ok(match tau {
            "upwind" => StabilizationPolicy::Upwind,
            "generalized" => StabilizationPolicy::Generalized(gamma),
            "1/h" => StabilizationPolicy::ReciprocalH,
            "constant" => StabilizationPolicy::Constant(
                self.tau_value
                    .ok_or_else(|| Error::Config("the constant policy needs tau_value".into()))?,
            ),
            other => return Err(Error::Config(format!("unknown tau policy {other:?}"))),
        })
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: ManufacturedCase,
    pub shape: Shape,
    pub ks: Vec<usize>,
    pub ns: Vec<usize>,
    pub options: SolverOptions,
    pub regions: Vec<Region>,
    pub fields: Vec<Field>,
    pub quadrature: ErrorQuadrature,
    pub output: PathBuf,
    pub threads: Option<usize>,
    /// Samples per direction per element in field dumps.
    pub sampling: usize,
}

impl RunConfig {
    pub fn study(&self, region: &Region) -> StudySpec {
        StudySpec {
            case: self.case.clone(),
            shape: self.shape,
            ks: self.ks.clone(),
            ns: self.ns.clone(),
            options: self.options.clone(),
            region: region.clone(),
            fields: self.fields.clone(),
            quadrature: self.quadrature,
        }
    }
}

/// Parses a JSON config; `overrides` (typically from flags) win.
pub fn parse_config(text: &str, overrides: RawConfig) -> Result<RunConfig> {
    RawConfig::from_json(text)?
        .overridden_by(overrides)
        .validate()
}
