use serde::{Deserialize, Serialize};

use crate::error::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockParams {
    pub spring_constant: f64,
    /// Carried for completeness; the assembled length is used as the rest length.
    pub natural_length: f64,
    pub damping: f64,
    /// Read `damping` as a fraction of critical damping against a quarter of the chassis mass.
    #[serde(default)]
    pub damping_is_ratio: bool,
}

/// Bending and torsion rows are carried but unused by the axial model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    pub cross_section_area: f64,
    pub density: f64,
    pub elastic_modulus: f64,
    pub shear_modulus: f64,
    pub second_moment_y: f64,
    pub second_moment_z: f64,
    pub polar_moment: f64,
    #[serde(default = "default_beam_damping_ratio")]
    pub damping_ratio: f64,
}

fn default_beam_damping_ratio() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChassisParams {
    pub mass: f64,
    pub inertia: [f64; 3],
    pub center: [f64; 3],
    pub q1: [f64; 3],
    pub q2: [f64; 3],
    pub q3: [f64; 3],
    /// Points whose vertical motion is restrained by compliant mounts.
    pub vertical_supports: Vec<[f64; 3]>,
    pub support_stiffness: f64,
    pub support_damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    pub point: [f64; 3],
    pub amplitude: f64,
    pub angular_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WheelParams {
    pub mass: f64,
    pub inertia: [f64; 3],
    pub center: [f64; 3],
    /// Point with `d_x = 0`.
    pub fixed_x_point: [f64; 3],
    pub excitation: Excitation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub w1: f64,
    pub w2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountTerm {
    #[default]
    Components,
    Joints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspensionParams {
    pub joint_positions_front: Vec<[f64; 3]>,
    pub joint_positions_rear: Vec<[f64; 3]>,
    pub shock: ShockParams,
    pub beam: BeamParams,
    pub chassis: ChassisParams,
    pub front_wheel: WheelParams,
    pub rear_wheel: WheelParams,
    /// Lumped mass of a free joint, before adding half of each incident beam.
    pub joint_mass: f64,
    pub weld_angular_stiffness: f64,
    pub timestep: f64,
    pub duration: f64,
    pub weights: FitnessWeights,
    #[serde(default)]
    pub count_term: CountTerm,
    #[serde(default)]
    pub signed_acceleration: bool,
}

impl SuspensionParams {
    /// Reference half-car setup. Mount stiffness, joint mass, weld stiffness
    /// and the time grid are modelling choices of this simulator.
    pub fn reference() -> Self {
        let wheel = |x: f64, amplitude: f64, angular_frequency: f64| WheelParams {
            mass: 60.0,
            inertia: [0.686, 0.686, 0.972],
            center: [x, 0.4, 0.0],
            fixed_x_point: [x, 0.4, 0.0],
            excitation: Excitation { point: [x, 0.4, 0.0], amplitude, angular_frequency },
        };
        Self {
            joint_positions_front: vec![
                [0.1, 0.4, 0.3],
                [0.3, 0.4, 0.3],
                [0.1, 0.6, 0.3],
                [0.3, 0.6, 0.3],
                [0.2, 0.3, 0.05],
                [0.2, 0.5, 0.05],
                [0.2, 0.35, 0.15],
                [0.2, 0.55, 0.15],
            ],
            joint_positions_rear: vec![
                [2.38, 0.4, 0.3],
                [2.38, 0.6, 0.3],
                [2.58, 0.4, 0.3],
                [2.58, 0.6, 0.3],
                [2.48, 0.3, 0.05],
                [2.48, 0.5, 0.05],
                [2.48, 0.35, 0.15],
                [2.48, 0.55, 0.15],
            ],
            shock: ShockParams {
                spring_constant: 75000.0,
                natural_length: 0.5,
                damping: 875.0,
                damping_is_ratio: false,
            },
            beam: BeamParams {
                cross_section_area: 0.0007,
                density: 8000.0,
                elastic_modulus: 200e9,
                shear_modulus: 70e9,
                second_moment_y: 3.3e-7,
                second_moment_z: 3.3e-7,
                polar_moment: 1.6e-7,
                damping_ratio: default_beam_damping_ratio(),
            },
            chassis: ChassisParams {
                mass: 1000.0,
                inertia: [48.2, 647.0, 694.0],
                center: [1.524, 0.6, 1.025],
                q1: [1.29, 0.7, 0.65],
                q2: [0.0, 0.6, 0.3],
                q3: [2.68, 0.6, 0.3],
                vertical_supports: vec![[1.524, 0.6, 1.025], [0.0, 0.4, 1.025], [2.68, 0.4, 1.025]],
                support_stiffness: 2.0e5,
                support_damping: 5.0e3,
            },
            front_wheel: wheel(0.2, 0.050, 2.0 * std::f64::consts::PI),
            rear_wheel: wheel(2.48, 0.075, 4.0 * std::f64::consts::PI),
            joint_mass: 1.0,
            weld_angular_stiffness: 1.0e4,
            timestep: 1e-3,
            duration: 2.0,
            weights: FitnessWeights { w1: 5000.0, w2: 100.0 },
            count_term: CountTerm::Components,
            signed_acceleration: false,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let positive = [
            ("shock.spring_constant", self.shock.spring_constant),
            ("beam.cross_section_area", self.beam.cross_section_area),
            ("beam.density", self.beam.density),
            ("beam.elastic_modulus", self.beam.elastic_modulus),
            ("chassis.mass", self.chassis.mass),
            ("chassis.support_stiffness", self.chassis.support_stiffness),
            ("front_wheel.mass", self.front_wheel.mass),
            ("rear_wheel.mass", self.rear_wheel.mass),
            ("joint_mass", self.joint_mass),
            ("timestep", self.timestep),
            ("duration", self.duration),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("shock.damping", self.shock.damping),
            ("beam.damping_ratio", self.beam.damping_ratio),
            ("chassis.support_damping", self.chassis.support_damping),
            ("weld_angular_stiffness", self.weld_angular_stiffness),
            ("weights.w1", self.weights.w1),
            ("weights.w2", self.weights.w2),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, inertia) in [
            ("chassis.inertia", self.chassis.inertia),
            ("front_wheel.inertia", self.front_wheel.inertia),
            ("rear_wheel.inertia", self.rear_wheel.inertia),
        ] {
            if inertia.iter().any(|&i| !(i.is_finite() && i > 0.0)) {
                return Err(bad(format!("{name} must be positive")));
            }
        }
        if self.joint_positions_front.len() != self.joint_positions_rear.len() {
            return Err(bad("front and rear joint position lists differ in length".into()));
        }
        if self.timestep > self.duration {
            return Err(bad("timestep exceeds duration".into()));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration / self.timestep).round() as usize
    }

    pub fn with_zero_excitation(mut self) -> Self {
        self.front_wheel.excitation.amplitude = 0.0;
        self.rear_wheel.excitation.amplitude = 0.0;
        self
    }
}

fn bad(reason: String) -> EvalError {
    EvalError::Incompatible { evaluator: "suspension", reason }
}
