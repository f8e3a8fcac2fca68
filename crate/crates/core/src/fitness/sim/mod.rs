pub mod engine;
pub mod params;
pub mod suspension;

pub use params::{
    BeamParams, ChassisParams, CountTerm, Excitation, FitnessWeights, ShockParams, SuspensionParams, WheelParams,
};
pub use suspension::{simulate, DivergedSimulation, SuspensionEvaluator, Trajectory};
