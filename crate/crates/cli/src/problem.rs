//! The JSON problem file: one space, one cost, and named objects on it.

use std::collections::BTreeMap;

use krc::{CostMatrix, FiniteSpace, JointLaw, ProbVec, RandomMeasureFamily};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub version: Option<u32>,
    pub labels: Vec<String>,
    pub cost: CostSpec,
    #[serde(default)]
    pub measures: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub families: BTreeMap<String, FamilySpec>,
    #[serde(default)]
    pub joints: BTreeMap<String, JointSpec>,
    #[serde(default)]
    pub chains: BTreeMap<String, ChainSpec>,
}

/// A full matrix, `"discrete"`, `"line"` (labels read as numbers) or
/// `{"line": [positions]}`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum CostSpec {
    Matrix(Vec<Vec<f64>>),
    Named(String),
    Line { line: Vec<f64> },
}

/// Margins are listed in the order of `omega_labels`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub omega_labels: Vec<String>,
    pub weights: Vec<f64>,
    pub margins: Vec<Vec<f64>>,
}

/// Rows are atoms of `omega_labels`, columns are the labels of the space.
/// `s_labels`, when given, must repeat those labels in order.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub omega_labels: Vec<String>,
    #[serde(default)]
    pub s_labels: Option<Vec<String>>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub transition: Vec<Vec<f64>>,
    pub init: Vec<f64>,
}

/// A parsed file with its space and cost built. Named objects are validated
/// on lookup.
pub struct Problem {
    pub file: ProblemFile,
    pub space: FiniteSpace,
    pub cost: CostMatrix,
    /// Set when `--closure` replaced an untight cost.
    pub closure_applied: bool,
}

fn field<T>(path: &str, r: krc::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from(e).context(path))
}

impl Problem {
    pub fn parse(text: &str, closure: bool) -> Result<Self, CliError> {
        // serde_json errors carry their line and column
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        Self::from_file(file, closure)
    }

    pub fn from_file(file: ProblemFile, closure: bool) -> Result<Self, CliError> {
        if let Some(v) = file.version {
            if v != FORMAT_VERSION {
                return Err(CliError::Input(format!(
                    "version: unsupported format version {v}, expected {FORMAT_VERSION}"
                )));
            }
        }
        let space = field("labels", FiniteSpace::new(file.labels.iter().cloned()))?;
        let mut cost = field("cost", build_cost(&space, &file.cost))?;
        let mut closure_applied = false;
        if closure && !cost.is_tight() {
            cost = krc::path_closure(&cost);
            closure_applied = true;
        }
        Ok(Self {
            file,
            space,
            cost,
            closure_applied,
        })
    }

    pub fn measure(&self, name: &str) -> Result<ProbVec, CliError> {
        let raw = self
            .file
            .measures
            .get(name)
            .ok_or_else(|| CliError::Input(format!("unknown measure `{name}`")))?;
        field(&format!("measures.{name}"), ProbVec::new(&self.space, raw))
    }

    pub fn family(&self, name: &str) -> Result<RandomMeasureFamily, CliError> {
        let spec = self
            .file
            .families
            .get(name)
            .ok_or_else(|| CliError::Input(format!("unknown family `{name}`")))?;
        let path = format!("families.{name}");
        let omega = field(
            &format!("{path}.omega_labels"),
            FiniteSpace::new(spec.omega_labels.iter().cloned()),
        )?;
        field(
            &path,
            RandomMeasureFamily::from_raw(&omega, &spec.weights, &self.space, &spec.margins),
        )
    }

    pub fn joint(&self, name: Option<&str>) -> Result<(String, JointLaw), CliError> {
        let (name, spec) = pick("joint", &self.file.joints, name)?;
        let path = format!("joints.{name}");
        if spec.s_labels.as_ref().is_some_and(|s| s.as_slice() != self.space.labels()) {
            return Err(CliError::Input(format!(
                "{path}.s_labels: must equal the file's labels"
            )));
        }
        let omega = field(
            &format!("{path}.omega_labels"),
            FiniteSpace::new(spec.omega_labels.iter().cloned()),
        )?;
        let joint = field(
            &format!("{path}.table"),
            JointLaw::from_rows(&omega, &self.space, &spec.table),
        )?;
        Ok((name, joint))
    }

    pub fn chain(&self, name: Option<&str>) -> Result<(String, Array2<f64>, ProbVec), CliError> {
        let (name, spec) = pick("chain", &self.file.chains, name)?;
        let path = format!("chains.{name}");
        let n = self.space.len();
        if spec.transition.len() != n || spec.transition.iter().any(|r| r.len() != n) {
            return Err(CliError::Input(format!(
                "{path}.transition: expected a {n}x{n} matrix"
            )));
        }
        let p = Array2::from_shape_fn((n, n), |(i, j)| spec.transition[i][j]);
        let init = field(&format!("{path}.init"), ProbVec::new(&self.space, &spec.init))?;
        Ok((name, p, init))
    }
}

fn pick<'a, T>(
    kind: &str,
    map: &'a BTreeMap<String, T>,
    name: Option<&str>,
) -> Result<(String, &'a T), CliError> {
    match name {
        Some(n) => map
            .get(n)
            .map(|v| (n.to_string(), v))
            .ok_or_else(|| CliError::Input(format!("unknown {kind} `{n}`"))),
        None if map.len() == 1 => {
            let (k, v) = map.iter().next().expect("one entry");
            Ok((k.clone(), v))
        }
        None if map.is_empty() => Err(CliError::Input(format!("file defines no {kind}s"))),
        None => Err(CliError::Input(format!(
            "file defines several {kind}s, pick one with --{kind}"
        ))),
    }
}

fn build_cost(space: &FiniteSpace, spec: &CostSpec) -> krc::Result<CostMatrix> {
    match spec {
        CostSpec::Matrix(rows) => CostMatrix::from_rows(space, rows),
        CostSpec::Named(name) if name == "discrete" => Ok(CostMatrix::discrete(space)),
        CostSpec::Named(name) if name == "line" => {
            let positions = space
                .labels()
                .iter()
                .map(|l| {
                    l.trim().parse::<f64>().map_err(|_| {
                        krc::Error::InvalidCost(format!("label `{l}` is not a number"))
                    })
                })
                .collect::<krc::Result<Vec<f64>>>()?;
            CostMatrix::line(space, &positions)
        }
        CostSpec::Named(other) => Err(krc::Error::InvalidCost(format!(
            "unknown named cost `{other}`, expected \"discrete\" or \"line\""
        ))),
        CostSpec::Line { line } => CostMatrix::line(space, line),
    }
}
