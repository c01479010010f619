//! Assembling groups, parameter maps and the Hilbert-space construction
//! from a parsed scenario.

use std::str::FromStr;

use thiserror::Error;

use crate::group::{FiniteGroup, GroupError, Permutation};
use crate::hilbert::{
    build_w_derived, build_w_explicit, indicator_basis, AbstractRep, DerivedInputs, HilbertError, InvariantSubspace,
    RegularRep, RepCheck,
};
use crate::inference::{Apparatus, Experiment, ExperimentModel, Hypothesis, InferenceError, Sampler};
use crate::params::{
    check_assumptions, AssumptionReport, ParamError, ParameterMap, TransitionFamily, DEFAULT_FAMILY_BUDGET,
};
use crate::reduction::{DesignSpec, ReductionError};
use crate::scenario::ScenarioSpec;
use crate::states::{StateError, StateTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ToleranceProfile {
    #[default]
    Default,
    /// Every tolerance divided by 100.
    Strict,
}

impl FromStr for ToleranceProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(ToleranceProfile::Default),
            "strict" => Ok(ToleranceProfile::Strict),
            _ => Err(format!("unknown tolerance profile '{s}' (expected strict or default)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub homomorphism: f64,
    pub projective_homomorphism: f64,
    pub unitarity: f64,
    pub extension_consistency: f64,
    pub subspace_invariance: f64,
    pub subspace_transport: f64,
    pub eigen_residual: f64,
    pub self_adjoint: f64,
    pub gcs: f64,
    pub stochastic: f64,
    pub transpose: f64,
    pub symmetry: f64,
    pub projector_sum: f64,
}

impl Tolerances {
    pub fn for_profile(profile: ToleranceProfile) -> Self {
        let base = Tolerances {
            homomorphism: 1e-10,
            projective_homomorphism: 1e-8,
            unitarity: 1e-10,
            extension_consistency: 1e-8,
            subspace_invariance: 1e-10,
            subspace_transport: 1e-9,
            eigen_residual: 1e-9,
            self_adjoint: 1e-12,
            gcs: 1e-9,
            stochastic: 1e-10,
            transpose: 1e-12,
            symmetry: 1e-10,
            projector_sum: 1e-10,
        };
        match profile {
            ToleranceProfile::Default => base,
            ToleranceProfile::Strict => base.scaled(0.01),
        }
    }

    fn scaled(self, f: f64) -> Self {
        Tolerances {
            homomorphism: self.homomorphism * f,
            projective_homomorphism: self.projective_homomorphism * f,
            unitarity: self.unitarity * f,
            extension_consistency: self.extension_consistency * f,
            subspace_invariance: self.subspace_invariance * f,
            subspace_transport: self.subspace_transport * f,
            eigen_residual: self.eigen_residual * f,
            self_adjoint: self.self_adjoint * f,
            gcs: self.gcs * f,
            stochastic: self.stochastic * f,
            transpose: self.transpose * f,
            symmetry: self.symmetry * f,
            projector_sum: self.projector_sum * f,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::for_profile(ToleranceProfile::Default)
    }
}

/// How `W` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepMode {
    /// Explicit when the scenario supplies matrices, derived otherwise.
    #[default]
    Auto,
    Derived,
    Explicit,
}

impl FromStr for RepMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(RepMode::Auto),
            "derived" => Ok(RepMode::Derived),
            "explicit" => Ok(RepMode::Explicit),
            other => Err(format!("unknown representation mode '{other}' (expected auto, derived or explicit)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("scenario declares no parameters")]
    NoParameters,
    #[error("scenario declares no experiments")]
    NoExperiments,
    #[error("scenario has no [design] section")]
    NoDesign,
    #[error("scenario has no [explicit_rep] section")]
    NoExplicitRep,
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("option '{key}' has invalid value '{value}'")]
    BadOption { key: String, value: String },
    #[error("point '{point}': {message}")]
    BadHypothesis { point: String, message: String },
    #[error("cannot build W: {0}")]
    AssumptionsFailed(String),
    #[error("W fails verification: homomorphism residual {homomorphism:.3e}, unitarity residual {unitarity:.3e}")]
    RepresentationCheck { homomorphism: f64, unitarity: f64 },
}

/// The scenario's group acting on phi and its parameter maps, with the
/// structural assumptions checked.
#[derive(Debug, Clone)]
pub struct ParameterSystem {
    pub spec: ScenarioSpec,
    pub group: FiniteGroup,
    pub maps: Vec<ParameterMap>,
    pub base: usize,
    pub assumptions: AssumptionReport,
}

impl ParameterSystem {
    /// `base` overrides the scenario's base experiment.
    pub fn new(spec: ScenarioSpec, base: Option<&str>) -> Result<Self, SystemError> {
        if spec.parameters.is_empty() {
            return Err(SystemError::NoParameters);
        }
        let group = scenario_group(&spec)?;
        let maps = spec
            .parameters
            .iter()
            .map(|p| {
                let mut map = ParameterMap::new(p.name.clone(), p.values.clone(), p.assignment.clone())?;
                if !p.maximal {
                    map = map.non_maximal();
                }
                if let Some(e) = &p.eigenvalues {
                    map = map.with_eigenvalues(e.clone())?;
                }
                Ok(map)
            })
            .collect::<Result<Vec<_>, ParamError>>()?;
        let base = match base {
            Some(name) => spec.parameter_index(name).ok_or_else(|| SystemError::UnknownExperiment(name.into()))?,
            None => spec.base_index().ok_or(SystemError::NoParameters)?,
        };
        let budget = match spec.option("budget") {
            Some(v) => v.parse().map_err(|_| SystemError::BadOption { key: "budget".into(), value: v.into() })?,
            None => DEFAULT_FAMILY_BUDGET,
        };
        let assumptions = check_assumptions(&maps, &group, budget)?;
        Ok(ParameterSystem { spec, group, maps, base, assumptions })
    }

    pub fn experiment_index(&self, name: &str) -> Result<usize, SystemError> {
        self.spec.parameter_index(name).ok_or_else(|| SystemError::UnknownExperiment(name.into()))
    }

    pub fn subgroups(&self) -> Vec<FiniteGroup> {
        self.assumptions.experiments.iter().map(|e| e.subgroup.clone()).collect()
    }
}

pub fn scenario_group(spec: &ScenarioSpec) -> Result<FiniteGroup, SystemError> {
    let gens = spec
        .generators
        .iter()
        .enumerate()
        .map(|(index, g)| {
            Permutation::from_images(g.images.clone()).map_err(|reason| GroupError::NotBijective {
                index,
                degree: spec.phi.len(),
                reason,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FiniteGroup::closure(spec.phi.len(), &gens)?)
}

/// Everything downstream of `W`.
#[derive(Debug, Clone)]
pub struct QuantumSystem {
    pub params: ParameterSystem,
    pub rep: RegularRep,
    pub subspaces: Vec<InvariantSubspace>,
    pub family: TransitionFamily,
    pub w: AbstractRep,
    pub w_check: RepCheck,
    pub states: StateTable,
    pub tolerances: Tolerances,
}

impl QuantumSystem {
    /// Needs the generation and transition assumptions; a failed
    /// single-orbit check is reported but does not stop the construction.
    pub fn build(params: ParameterSystem, mode: RepMode, tolerances: Tolerances) -> Result<Self, SystemError> {
        let report = &params.assumptions;
        if !report.generation_holds() {
            return Err(SystemError::AssumptionsFailed(format!(
                "the experiment subgroups generate {} of {} elements",
                report.generated_order, report.group_order
            )));
        }
        let family = match &report.transitions {
            Ok(f) => f.clone(),
            Err(failure) => return Err(SystemError::AssumptionsFailed(failure.to_string())),
        };
        let rep = RegularRep::new(&params.group);
        let subspaces = params.maps.iter().map(indicator_basis).collect::<Result<Vec<_>, _>>()?;

        let explicit = match (mode, &params.spec.explicit_rep) {
            (RepMode::Derived, _) | (RepMode::Auto, None) => None,
            (_, Some(e)) => Some(e),
            (RepMode::Explicit, None) => return Err(SystemError::NoExplicitRep),
        };
        let w = match explicit {
            Some(e) => {
                let images: Vec<_> = params
                    .spec
                    .generators
                    .iter()
                    .map(|g| {
                        e.generators
                            .iter()
                            .find(|(n, _)| *n == g.name)
                            .map(|(_, m)| m.clone())
                            .expect("scenario validation pairs every generator with a matrix")
                    })
                    .collect();
                let tol = if e.projective { tolerances.projective_homomorphism } else { tolerances.homomorphism };
                build_w_explicit(&params.group, &images, e.projective, tol)?
            }
            None => {
                let subgroups = params.subgroups();
                build_w_derived(&DerivedInputs {
                    group: &params.group,
                    rep: &rep,
                    subspaces: &subspaces,
                    subgroups: &subgroups,
                    family: &family,
                    base: params.base,
                    consistency_tolerance: tolerances.extension_consistency,
                })?
            }
        };
        let w_check = w.verify(&params.group);
        let limit =
            if w.origin().is_projective() { tolerances.projective_homomorphism } else { tolerances.homomorphism };
        if w_check.homomorphism_residual >= limit || w_check.unitarity_residual >= tolerances.unitarity {
            return Err(SystemError::RepresentationCheck {
                homomorphism: w_check.homomorphism_residual,
                unitarity: w_check.unitarity_residual,
            });
        }
        let states = StateTable::new(&params.maps, &w, &family, params.base)?;
        Ok(QuantumSystem { params, rep, subspaces, family, w, w_check, states, tolerances })
    }

    pub fn homomorphism_tolerance(&self) -> f64 {
        if self.w.origin().is_projective() {
            self.tolerances.projective_homomorphism
        } else {
            self.tolerances.homomorphism
        }
    }
}

/// Hypotheses are the points of phi; each carries an apparatus described
/// by `sampler`, `items`, `marked` and `draws` attributes, or relies on
/// `p1` lines in every experiment.
pub fn experiment_model(spec: &ScenarioSpec) -> Result<ExperimentModel, SystemError> {
    if spec.experiments.is_empty() {
        return Err(SystemError::NoExperiments);
    }
    let hypotheses = spec
        .phi
        .iter()
        .map(|p| {
            let bad = |message: String| SystemError::BadHypothesis { point: p.label.clone(), message };
            let Some(sampler) = p.attribute("sampler") else {
                return Ok(Hypothesis { label: p.label.clone(), apparatus: None });
            };
            let sampler = match sampler {
                "replacement" => Sampler::Replacement,
                "without-replacement" => Sampler::WithoutReplacement,
                other => return Err(bad(format!("unknown sampler '{other}'"))),
            };
            let number = |key: &str| -> Result<u32, SystemError> {
                p.attribute(key)
                    .ok_or_else(|| bad(format!("missing '{key}'")))?
                    .parse()
                    .map_err(|_| bad(format!("'{key}' must be a non-negative integer")))
            };
            Ok(Hypothesis {
                label: p.label.clone(),
                apparatus: Some(Apparatus {
                    sampler,
                    items: number("items")?,
                    marked: number("marked")?,
                    draws: number("draws")?,
                }),
            })
        })
        .collect::<Result<Vec<_>, SystemError>>()?;
    let experiments = spec
        .experiments
        .iter()
        .map(|e| Experiment {
            name: e.name.clone(),
            statistic: e.statistic,
            fixed: spec.phi.iter().map(|p| e.p1.iter().find(|(l, _)| *l == p.label).map(|(_, r)| r.value)).collect(),
        })
        .collect();
    Ok(ExperimentModel::new(hypotheses, experiments)?)
}

pub fn design_spec(spec: &ScenarioSpec) -> Result<DesignSpec, SystemError> {
    let design = spec.design.as_ref().ok_or(SystemError::NoDesign)?;
    Ok(DesignSpec::new(
        spec.phi.iter().map(|p| p.label.clone()).collect(),
        design.blocks.clone(),
        design.treatments.clone(),
    )?)
}
