//! Builds a spring network for a suspension assembly and scores it.

use super::engine::{Driver, System, Vec3};
use super::params::{CountTerm, SuspensionParams, WheelParams};
use crate::error::EvalError;
use crate::fitness::Evaluator;
use crate::model::{active_component_count, active_joint_count, ProblemSpec, Solution};

pub const CHASSIS: &str = "chassis";
pub const WHEEL: &str = "wheel";

const WELDED: u8 = 1;
const BEAM: u8 = 1;
const SHOCK: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub time: Vec<f64>,
    pub a_z_q1: Vec<f64>,
    pub d_q2: Vec<f64>,
    pub d_q3: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergedSimulation {
    pub at_sample: usize,
}

/// Checks that `spec` has the joint/component codes and environment objects the model needs.
pub fn check_compatible(spec: &ProblemSpec, params: &SuspensionParams) -> Result<(), EvalError> {
    let bad = |reason: String| EvalError::Incompatible { evaluator: "suspension", reason };
    if spec.n_joint_types() != 2 || spec.n_component_types() != 2 {
        return Err(bad("expects joint codes {welded, spherical} and component codes {beam, shock}".into()));
    }
    if spec.n_joints() != params.joint_positions_front.len() {
        return Err(bad(format!(
            "{} joints but {} joint positions",
            spec.n_joints(),
            params.joint_positions_front.len()
        )));
    }
    for positions in [&params.joint_positions_front, &params.joint_positions_rear] {
        for (i, a) in positions.iter().enumerate() {
            if positions[i + 1..].contains(a) {
                return Err(bad(format!("joint {} shares its position with another joint", i + 1)));
            }
        }
    }
    for envo in spec.envos() {
        if envo.name != CHASSIS && envo.name != WHEEL {
            return Err(bad(format!("unknown environment object `{}`", envo.name)));
        }
    }
    params.validate()
}

struct End<'a> {
    positions: &'a [[f64; 3]],
    wheel: &'a WheelParams,
}

fn v(p: [f64; 3]) -> Vec3 {
    Vec3::from(p)
}

/// Spring network of one assembly, with handles to the chassis body and the q1..q3 points.
pub struct Assembled {
    pub system: System,
    pub chassis: usize,
    pub q: [usize; 3],
}

pub fn assemble(spec: &ProblemSpec, s: &Solution, p: &SuspensionParams) -> Assembled {
    let mut sys = System::new();
    let c = &p.chassis;
    let chassis = sys.add_body(c.mass, c.inertia, v(c.center));
    let q = [c.q1, c.q2, c.q3].map(|x| sys.add_body_point(chassis, v(x)));
    let center_point = sys.add_body_point(chassis, v(c.center));

    for &b in &c.vertical_supports {
        let mount = sys.add_body_point(chassis, v(b));
        let anchor = sys.add_fixed_point(v(b) - Vec3::new(0.0, 0.0, 1.0));
        sys.add_spring(anchor, mount, c.support_stiffness, c.support_damping);
    }

    let shock_damping = if p.shock.damping_is_ratio {
        p.shock.damping * 2.0 * (p.shock.spring_constant * c.mass / 4.0).sqrt()
    } else {
        p.shock.damping
    };
    let beam = &p.beam;
    let ends = [
        End { positions: &p.joint_positions_front, wheel: &p.front_wheel },
        End { positions: &p.joint_positions_rear, wheel: &p.rear_wheel },
    ];
    let index = spec.index();
    let x = s.values();

    for end in &ends {
        let driver = Driver {
            axis: Vec3::z(),
            amplitude: end.wheel.excitation.amplitude,
            angular_frequency: end.wheel.excitation.angular_frequency,
        };
        let wheel_center = sys.add_driven_point(v(end.wheel.center), driver);
        let length = |i: usize, j: usize| (v(end.positions[i]) - v(end.positions[j])).norm();

        let mut node = vec![None; spec.n_joints()];
        for joint in 0..spec.n_joints() {
            let incident = index.incident(joint);
            if incident.iter().all(|&f| x[f] == 0) {
                continue;
            }
            let pos = v(end.positions[joint]);
            let envo = spec.envo_of(joint).map(|m| spec.envos()[m].name.as_str());
            node[joint] = Some(match envo {
                Some(CHASSIS) => sys.add_body_point(chassis, pos),
                Some(_) => sys.add_driven_point(pos, driver),
                None => {
                    let beam_mass: f64 = index
                        .components()
                        .filter(|&(f, i, j)| x[f] == BEAM && (i == joint || j == joint))
                        .map(|(_, i, j)| beam.density * beam.cross_section_area * length(i, j))
                        .sum();
                    sys.add_free_point(pos, p.joint_mass + 0.5 * beam_mass)
                }
            });
        }

        for (f, i, j) in index.components() {
            let (Some(a), Some(b)) = (node[i], node[j]) else { continue };
            match x[f] {
                BEAM => {
                    let k = beam.elastic_modulus * beam.cross_section_area / length(i, j);
                    let damping = 2.0 * beam.damping_ratio * (k * p.joint_mass).sqrt();
                    sys.add_spring(a, b, k, damping);
                }
                SHOCK => sys.add_spring(a, b, p.shock.spring_constant, shock_damping),
                _ => {}
            }
        }

        if p.weld_angular_stiffness > 0.0 {
            for joint in 0..spec.n_joints() {
                let Some(center) = node[joint] else { continue };
                if x[joint] != WELDED {
                    continue;
                }
                let far: Vec<usize> = index
                    .components()
                    .filter(|&(f, i, j)| x[f] == BEAM && (i == joint || j == joint))
                    .filter_map(|(_, i, j)| node[if i == joint { j } else { i }])
                    .collect();
                for (k, &a) in far.iter().enumerate() {
                    for &b in &far[k + 1..] {
                        sys.add_angle_spring(a, center, b, p.weld_angular_stiffness);
                    }
                }
                let body_anchor = match spec.envo_of(joint).map(|m| spec.envos()[m].name.as_str()) {
                    Some(CHASSIS) => Some(center_point),
                    Some(_) => Some(wheel_center),
                    None => None,
                };
                if let Some(anchor) = body_anchor {
                    for &a in &far {
                        sys.add_angle_spring(a, center, anchor, p.weld_angular_stiffness);
                    }
                }
            }
        }
    }
    Assembled { system: sys, chassis, q }
}

/// Runs the dynamics for a feasible solution. The caller is responsible for feasibility.
pub fn simulate(spec: &ProblemSpec, s: &Solution, params: &SuspensionParams) -> Result<Trajectory, DivergedSimulation> {
    let Assembled { mut system, chassis, q } = assemble(spec, s, params);
    let start = q.map(|p| system.point_position(p));
    let n = params.n_samples();
    let mut out = Trajectory {
        time: Vec::with_capacity(n),
        a_z_q1: Vec::with_capacity(n),
        d_q2: Vec::with_capacity(n),
        d_q3: Vec::with_capacity(n),
    };
    for k in 0..n {
        system.advance(params.timestep);
        let pos = q.map(|p| system.point_position(p));
        let a = system.body_point_acceleration(chassis, pos[0]);
        let d2 = (pos[1] - start[1]).norm();
        let d3 = (pos[2] - start[2]).norm();
        if !(a.z.is_finite() && d2.is_finite() && d3.is_finite() && system.is_finite()) {
            return Err(DivergedSimulation { at_sample: k });
        }
        out.time.push(system.time());
        out.a_z_q1.push(a.z);
        out.d_q2.push(d2);
        out.d_q3.push(d3);
    }
    Ok(out)
}

/// Weighted fitness of a trajectory; `count` is the assembly-size term.
pub fn score(traj: &Trajectory, count: usize, params: &SuspensionParams) -> f64 {
    let w = params.weights;
    let mut total = 0.0;
    for k in 0..traj.time.len() {
        let a = if params.signed_acceleration { traj.a_z_q1[k] } else { traj.a_z_q1[k].abs() };
        total += a + w.w1 * (traj.d_q2[k] + traj.d_q3[k]);
    }
    total + w.w2 * count as f64
}

/// Simplified lumped-parameter suspension evaluator.
#[derive(Debug, Clone)]
pub struct SuspensionEvaluator {
    spec: ProblemSpec,
    params: SuspensionParams,
}

impl SuspensionEvaluator {
    pub fn new(spec: ProblemSpec, params: SuspensionParams) -> Result<Self, EvalError> {
        check_compatible(&spec, &params)?;
        Ok(Self { spec, params })
    }

    pub fn params(&self) -> &SuspensionParams {
        &self.params
    }

    pub fn count_term(&self, s: &Solution) -> usize {
        match self.params.count_term {
            CountTerm::Components => active_component_count(&self.spec, s),
            CountTerm::Joints => active_joint_count(&self.spec, s),
        }
    }

    pub fn simulate(&self, s: &Solution) -> Result<Trajectory, DivergedSimulation> {
        simulate(&self.spec, s, &self.params)
    }
}

impl Evaluator for SuspensionEvaluator {
    fn name(&self) -> &str {
        "suspension (simplified)"
    }

    fn evaluate(&self, s: &Solution) -> Result<f64, EvalError> {
        self.spec.check_solution(s)?;
        Ok(match self.simulate(s) {
            Ok(traj) => score(&traj, self.count_term(s), &self.params),
            Err(_) => f64::INFINITY,
        })
    }
}
