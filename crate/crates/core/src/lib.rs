//! Finite symmetry groups acting on a total parameter, the Hilbert spaces
//! and coherent states they induce, Born probabilities, Bayesian inference
//! on complementary experiments, and design strata.
//!
//! Groups act on the right: `φ·(gh) = (φ·g)·h`, and element products
//! `gh` mean "apply `g`, then `h`".

pub mod born;
pub mod bundled;
pub mod group;
pub mod hilbert;
pub mod inference;
pub mod linalg;
pub mod params;
pub mod pipeline;
pub mod reduction;
pub mod scenario;
pub mod states;
pub mod system;

pub use group::{FiniteGroup, GroupAction, GroupError, Partition, Permutation};
pub use hilbert::{AbstractRep, HilbertError, InvariantSubspace, RegularRep, RepOrigin};
pub use linalg::{CMatrix, CVector};
pub use params::{AssumptionReport, ParamError, ParameterMap, TransitionFamily};
pub use pipeline::{run_pipeline, Command, Outcome, PipelineOptions};
pub use scenario::{parse_scenario, serialize_scenario, ScenarioError, ScenarioSpec};
pub use states::{DensityMatrix, PureState, StateError, StateTable};
pub use system::{ParameterSystem, QuantumSystem, RepMode, SystemError, ToleranceProfile, Tolerances};
