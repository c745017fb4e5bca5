pub mod equilibrium;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod pivots;
pub mod roots;
pub mod scenarios;
pub mod special;

pub use error::{Error, Result, Violation};
pub use model::{
    Electorate, EvaluationDistribution, Party, PreferenceModel, PrizeRule, PrizeSpec, Rivalry,
    Scenario, VoteProfile,
};
pub use pivots::{Convention, PivotMethod, PivotReport};
pub use equilibrium::{EquilibriumResult, Family, FixedPointOptions, Status, ThresholdSet};
pub use montecarlo::McEstimate;
