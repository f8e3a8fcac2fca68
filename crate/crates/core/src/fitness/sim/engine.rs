//! Lumped spring network with rigid bodies, integrated by semi-implicit Euler.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;

/// Prescribed sinusoidal displacement `axis · amplitude · sin(ω t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Driver {
    pub axis: Vec3,
    pub amplitude: f64,
    pub angular_frequency: f64,
}

impl Driver {
    fn offset(&self, t: f64) -> (Vec3, Vec3) {
        let (s, c) = (self.angular_frequency * t).sin_cos();
        (self.axis * (self.amplitude * s), self.axis * (self.amplitude * self.angular_frequency * c))
    }
}

#[derive(Debug, Clone)]
pub struct RigidBody {
    pub mass: f64,
    inertia: Vec3,
    pos: Vec3,
    vel: Vec3,
    orient: UnitQuaternion<f64>,
    omega: Vec3,
}

impl RigidBody {
    fn rotation(&self) -> Matrix3<f64> {
        self.orient.to_rotation_matrix().into_inner()
    }

    fn world_inertia_inv(&self) -> Matrix3<f64> {
        let r = self.rotation();
        let inv = Matrix3::from_diagonal(&self.inertia.map(|i| 1.0 / i));
        r * inv * r.transpose()
    }

    fn world_inertia(&self) -> Matrix3<f64> {
        let r = self.rotation();
        r * Matrix3::from_diagonal(&self.inertia) * r.transpose()
    }

    pub fn position(&self) -> Vec3 {
        self.pos
    }
}

#[derive(Debug, Clone)]
enum PointKind {
    Free { mass: f64, pos: Vec3, vel: Vec3 },
    Body { body: usize, local: Vec3 },
    Driven { base: Vec3, driver: Driver },
    Fixed { pos: Vec3 },
}

#[derive(Debug, Clone, Copy)]
struct Spring {
    a: usize,
    b: usize,
    stiffness: f64,
    damping: f64,
    rest: f64,
}

/// Cosine-form bending penalty on the angle `a - center - b`.
#[derive(Debug, Clone, Copy)]
struct AngleSpring {
    a: usize,
    center: usize,
    b: usize,
    stiffness: f64,
    cos0: f64,
    scale: f64,
}

fn cosine(ua: &Vec3, ub: &Vec3, la: f64, lb: f64) -> f64 {
    ua.dot(ub) / (la * lb)
}

#[derive(Debug, Clone)]
pub struct System {
    bodies: Vec<RigidBody>,
    points: Vec<PointKind>,
    springs: Vec<Spring>,
    angles: Vec<AngleSpring>,
    time: f64,
    safety: f64,
}

struct Forces {
    point: Vec<Vec3>,
    body_force: Vec<Vec3>,
    body_torque: Vec<Vec3>,
}

impl Default for System {
    fn default() -> Self {
        Self::new()
    }
}

impl System {
    pub fn new() -> Self {
        Self { bodies: Vec::new(), points: Vec::new(), springs: Vec::new(), angles: Vec::new(), time: 0.0, safety: 1.0 }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Upper bound on `h·ω` used when choosing internal substeps.
    pub fn set_substep_safety(&mut self, safety: f64) {
        assert!(safety > 0.0);
        self.safety = safety;
    }

    pub fn add_body(&mut self, mass: f64, inertia: [f64; 3], center: Vec3) -> usize {
        self.bodies.push(RigidBody {
            mass,
            inertia: Vec3::from(inertia),
            pos: center,
            vel: Vec3::zeros(),
            orient: UnitQuaternion::identity(),
            omega: Vec3::zeros(),
        });
        self.bodies.len() - 1
    }

    pub fn body(&self, b: usize) -> &RigidBody {
        &self.bodies[b]
    }

    pub fn set_body_velocity(&mut self, b: usize, vel: Vec3, omega: Vec3) {
        self.bodies[b].vel = vel;
        self.bodies[b].omega = omega;
    }

    pub fn add_free_point(&mut self, pos: Vec3, mass: f64) -> usize {
        self.points.push(PointKind::Free { mass, pos, vel: Vec3::zeros() });
        self.points.len() - 1
    }

    pub fn set_point_velocity(&mut self, p: usize, v: Vec3) {
        if let PointKind::Free { vel, .. } = &mut self.points[p] {
            *vel = v;
        }
    }

    /// Point rigidly attached to body `b`, currently at world position `pos`.
    pub fn add_body_point(&mut self, b: usize, pos: Vec3) -> usize {
        let body = &self.bodies[b];
        let local = body.rotation().transpose() * (pos - body.pos);
        self.points.push(PointKind::Body { body: b, local });
        self.points.len() - 1
    }

    pub fn add_driven_point(&mut self, base: Vec3, driver: Driver) -> usize {
        self.points.push(PointKind::Driven { base, driver });
        self.points.len() - 1
    }

    pub fn add_fixed_point(&mut self, pos: Vec3) -> usize {
        self.points.push(PointKind::Fixed { pos });
        self.points.len() - 1
    }

    /// Spring-damper whose rest length is the current distance between the endpoints.
    pub fn add_spring(&mut self, a: usize, b: usize, stiffness: f64, damping: f64) {
        let rest = (self.point_position(b) - self.point_position(a)).norm();
        self.springs.push(Spring { a, b, stiffness, damping, rest });
    }

    /// Returns false (and adds nothing) when the three points are nearly collinear.
    pub fn add_angle_spring(&mut self, a: usize, center: usize, b: usize, stiffness: f64) -> bool {
        let pc = self.point_position(center);
        let ua = self.point_position(a) - pc;
        let ub = self.point_position(b) - pc;
        let (la, lb) = (ua.norm(), ub.norm());
        if la == 0.0 || lb == 0.0 {
            return false;
        }
        let cos0 = cosine(&ua, &ub, la, lb);
        let sin0_sq = 1.0 - cos0 * cos0;
        if sin0_sq < 0.05 * 0.05 {
            return false;
        }
        // Energy k/(2 sin²θ0)·(cosθ - cosθ0)² matches k/2·(θ-θ0)² near rest.
        self.angles.push(AngleSpring { a, center, b, stiffness, cos0, scale: stiffness / sin0_sq });
        true
    }

    pub fn point_position(&self, p: usize) -> Vec3 {
        match &self.points[p] {
            PointKind::Free { pos, .. } => *pos,
            PointKind::Body { body, local } => {
                let b = &self.bodies[*body];
                b.pos + b.orient * local
            }
            PointKind::Driven { base, driver } => base + driver.offset(self.time).0,
            PointKind::Fixed { pos } => *pos,
        }
    }

    pub fn point_velocity(&self, p: usize) -> Vec3 {
        match &self.points[p] {
            PointKind::Free { vel, .. } => *vel,
            PointKind::Body { body, local } => {
                let b = &self.bodies[*body];
                b.vel + b.omega.cross(&(b.orient * local))
            }
            PointKind::Driven { driver, .. } => driver.offset(self.time).1,
            PointKind::Fixed { .. } => Vec3::zeros(),
        }
    }

    /// Acceleration of a material point of body `b` currently at `world`, from the present state.
    pub fn body_point_acceleration(&self, b: usize, world: Vec3) -> Vec3 {
        let f = self.forces();
        let body = &self.bodies[b];
        let (lin, alpha) = self.body_accelerations(b, &f);
        let r = world - body.pos;
        lin + alpha.cross(&r) + body.omega.cross(&body.omega.cross(&r))
    }

    pub fn point_acceleration(&self, p: usize) -> Vec3 {
        match &self.points[p] {
            PointKind::Free { mass, .. } => self.forces().point[p] / *mass,
            PointKind::Body { body, .. } => self.body_point_acceleration(*body, self.point_position(p)),
            PointKind::Driven { driver, .. } => -driver.offset(self.time).0 * driver.angular_frequency.powi(2),
            PointKind::Fixed { .. } => Vec3::zeros(),
        }
    }

    fn body_accelerations(&self, b: usize, f: &Forces) -> (Vec3, Vec3) {
        let body = &self.bodies[b];
        let lin = f.body_force[b] / body.mass;
        let gyro = body.omega.cross(&(body.world_inertia() * body.omega));
        let alpha = body.world_inertia_inv() * (f.body_torque[b] - gyro);
        (lin, alpha)
    }

    fn forces(&self) -> Forces {
        let pos: Vec<Vec3> = (0..self.points.len()).map(|p| self.point_position(p)).collect();
        let vel: Vec<Vec3> = (0..self.points.len()).map(|p| self.point_velocity(p)).collect();
        let mut point = vec![Vec3::zeros(); self.points.len()];

        for s in &self.springs {
            let d = pos[s.b] - pos[s.a];
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            let u = d / len;
            let f = s.stiffness * (len - s.rest) + s.damping * (vel[s.b] - vel[s.a]).dot(&u);
            point[s.a] += u * f;
            point[s.b] -= u * f;
        }

        for g in &self.angles {
            let ua = pos[g.a] - pos[g.center];
            let ub = pos[g.b] - pos[g.center];
            let (la, lb) = (ua.norm(), ub.norm());
            if la == 0.0 || lb == 0.0 {
                continue;
            }
            let (ea, eb) = (ua / la, ub / lb);
            let c = cosine(&ua, &ub, la, lb);
            let coef = g.scale * (c - g.cos0);
            // dC/dpa, dC/dpb for C = cos of the angle.
            let ga = (eb - ea * c) / la;
            let gb = (ea - eb * c) / lb;
            point[g.a] -= ga * coef;
            point[g.b] -= gb * coef;
            point[g.center] += (ga + gb) * coef;
        }

        let mut body_force = vec![Vec3::zeros(); self.bodies.len()];
        let mut body_torque = vec![Vec3::zeros(); self.bodies.len()];
        for (p, kind) in self.points.iter().enumerate() {
            if let PointKind::Body { body, .. } = kind {
                body_force[*body] += point[p];
                body_torque[*body] += (pos[p] - self.bodies[*body].pos).cross(&point[p]);
            }
        }
        Forces { point, body_force, body_torque }
    }

    /// One semi-implicit Euler step of length `h`.
    pub fn step(&mut self, h: f64) {
        let f = self.forces();
        let accs: Vec<(Vec3, Vec3)> = (0..self.bodies.len()).map(|b| self.body_accelerations(b, &f)).collect();
        for (p, kind) in self.points.iter_mut().enumerate() {
            if let PointKind::Free { mass, pos, vel } = kind {
                *vel += f.point[p] * (h / *mass);
                *pos += *vel * h;
            }
        }
        for (body, (lin, alpha)) in self.bodies.iter_mut().zip(accs) {
            body.vel += lin * h;
            body.pos += body.vel * h;
            body.omega += alpha * h;
            let rot = UnitQuaternion::from_scaled_axis(body.omega * h);
            body.orient = rot * body.orient;
            body.orient.renormalize_fast();
        }
        self.time += h;
    }

    /// Largest stable step: `h·ω_max ≤ safety` and `h·c/m ≤ 1/2` on every node.
    pub fn stable_step(&self) -> f64 {
        let n = self.points.len();
        let mut k_point = vec![0.0; n];
        let mut c_point = vec![0.0; n];
        for s in &self.springs {
            for p in [s.a, s.b] {
                k_point[p] += s.stiffness;
                c_point[p] += s.damping;
            }
        }
        for g in &self.angles {
            let pc = self.point_position(g.center);
            let la = (self.point_position(g.a) - pc).norm();
            let lb = (self.point_position(g.b) - pc).norm();
            let k = g.stiffness * (1.0 / la + 1.0 / lb).powi(2);
            for p in [g.a, g.b, g.center] {
                k_point[p] += k;
            }
        }
        let mut k_body = vec![0.0; self.bodies.len()];
        let mut c_body = vec![0.0; self.bodies.len()];
        let mut w2_max: f64 = 0.0;
        let mut rate_max: f64 = 0.0;
        for (p, kind) in self.points.iter().enumerate() {
            match kind {
                PointKind::Free { mass, .. } => {
                    w2_max = w2_max.max(2.0 * k_point[p] / mass);
                    rate_max = rate_max.max(2.0 * c_point[p] / mass);
                }
                PointKind::Body { body, local } => {
                    let b = &self.bodies[*body];
                    let i_min = b.inertia.min();
                    let mobility = 1.0 / b.mass + local.norm_squared() / i_min;
                    k_body[*body] += k_point[p] * mobility;
                    c_body[*body] += c_point[p] * mobility;
                }
                _ => {}
            }
        }
        for b in 0..self.bodies.len() {
            w2_max = w2_max.max(2.0 * k_body[b]);
            rate_max = rate_max.max(2.0 * c_body[b]);
        }
        let mut h = f64::INFINITY;
        if w2_max > 0.0 {
            h = h.min(self.safety / w2_max.sqrt());
        }
        if rate_max > 0.0 {
            h = h.min(1.0 / rate_max);
        }
        h
    }

    /// Advance by `dt` using equal internal substeps no longer than [`Self::stable_step`].
    pub fn advance(&mut self, dt: f64) {
        let hmax = self.stable_step();
        let n = if hmax.is_finite() { (dt / hmax).ceil().max(1.0) as usize } else { 1 };
        let h = dt / n as f64;
        for _ in 0..n {
            self.step(h);
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        let mut e = 0.0;
        for kind in &self.points {
            if let PointKind::Free { mass, vel, .. } = kind {
                e += 0.5 * mass * vel.norm_squared();
            }
        }
        for b in &self.bodies {
            e += 0.5 * b.mass * b.vel.norm_squared();
            e += 0.5 * b.omega.dot(&(b.world_inertia() * b.omega));
        }
        e
    }

    pub fn potential_energy(&self) -> f64 {
        let mut e = 0.0;
        for s in &self.springs {
            let len = (self.point_position(s.b) - self.point_position(s.a)).norm();
            e += 0.5 * s.stiffness * (len - s.rest).powi(2);
        }
        for g in &self.angles {
            let pc = self.point_position(g.center);
            let ua = self.point_position(g.a) - pc;
            let ub = self.point_position(g.b) - pc;
            e += 0.5 * g.scale * (cosine(&ua, &ub, ua.norm(), ub.norm()) - g.cos0).powi(2);
        }
        e
    }

    pub fn energy(&self) -> f64 {
        self.kinetic_energy() + self.potential_energy()
    }

    pub fn is_finite(&self) -> bool {
        self.bodies.iter().all(|b| {
            b.pos.iter().chain(b.vel.iter()).chain(b.omega.iter()).all(|x| x.is_finite())
                && b.orient.coords.iter().all(|x| x.is_finite())
        }) && self.points.iter().all(|p| match p {
            PointKind::Free { pos, vel, .. } => pos.iter().chain(vel.iter()).all(|x| x.is_finite()),
            _ => true,
        })
    }

    pub fn set_damping_scale(&mut self, scale: f64) {
        for s in &mut self.springs {
            s.damping *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upward_crossings(xs: &[f64], dt: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 1..xs.len() {
            if xs[k - 1] < 0.0 && xs[k] >= 0.0 {
                let frac = -xs[k - 1] / (xs[k] - xs[k - 1]);
                out.push((k - 1) as f64 * dt + frac * dt);
            }
        }
        out
    }

    #[test]
    fn damped_oscillator_matches_closed_form() {
        let (k, c, m) = (75000.0, 875.0, 50.0);
        let mut sys = System::new();
        let anchor = sys.add_fixed_point(Vec3::zeros());
        let p = sys.add_free_point(Vec3::new(0.0, 0.0, 0.5), m);
        sys.add_spring(anchor, p, k, c);
        sys.set_point_velocity(p, Vec3::new(0.0, 0.0, 1.0));
        let dt = 1e-3;
        let xs: Vec<f64> = (0..1000)
            .map(|_| {
                sys.advance(dt);
                sys.point_position(p).z - 0.5
            })
            .collect();
        let crossings = upward_crossings(&xs, dt);
        assert!(crossings.len() >= 3);
        let period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        let wd = (k / m - (c / (2.0 * m)).powi(2)).sqrt();
        let measured = 2.0 * std::f64::consts::PI / period;
        assert!((measured - wd).abs() / wd < 0.02, "{measured} vs {wd}");
    }

    #[test]
    fn rest_state_produces_no_motion() {
        let mut sys = System::new();
        let b = sys.add_body(100.0, [5.0, 6.0, 7.0], Vec3::new(0.0, 0.0, 1.0));
        let q = sys.add_body_point(b, Vec3::new(0.3, 0.2, 0.4));
        let fixed = sys.add_fixed_point(Vec3::new(0.5, -0.2, 0.0));
        let free = sys.add_free_point(Vec3::new(0.1, 0.1, 0.2), 1.0);
        sys.add_spring(q, free, 1e7, 100.0);
        sys.add_spring(free, fixed, 1e7, 100.0);
        assert!(sys.add_angle_spring(q, free, fixed, 1e3));
        let start = sys.point_position(q);
        for _ in 0..50 {
            sys.advance(1e-3);
        }
        assert_eq!(sys.point_position(q), start);
        assert_eq!(sys.point_position(free), Vec3::new(0.1, 0.1, 0.2));
        assert_eq!(sys.body_point_acceleration(b, sys.point_position(q)), Vec3::zeros());
    }

    #[test]
    fn collinear_angle_is_skipped() {
        let mut sys = System::new();
        let a = sys.add_fixed_point(Vec3::new(0.0, 0.0, 0.0));
        let c = sys.add_free_point(Vec3::new(1.0, 0.0, 0.0), 1.0);
        let b = sys.add_fixed_point(Vec3::new(2.0, 0.0, 0.001));
        assert!(!sys.add_angle_spring(a, c, b, 1.0));
    }

    #[test]
    fn angle_spring_forces_are_energy_gradient() {
        let mut sys = System::new();
        let a = sys.add_free_point(Vec3::new(1.0, 0.0, 0.0), 1.0);
        let c = sys.add_free_point(Vec3::new(0.0, 0.0, 0.0), 1.0);
        let b = sys.add_free_point(Vec3::new(0.0, 1.0, 0.0), 1.0);
        assert!(sys.add_angle_spring(a, c, b, 10.0));
        if let PointKind::Free { pos, .. } = &mut sys.points[a] {
            *pos = Vec3::new(1.0, 0.3, 0.1);
        }
        let f = sys.forces();
        let eps = 1e-6;
        for p in [a, b, c] {
            for axis in 0..3 {
                let mut plus = sys.clone();
                let mut minus = sys.clone();
                for (s, sign) in [(&mut plus, 1.0), (&mut minus, -1.0)] {
                    if let PointKind::Free { pos, .. } = &mut s.points[p] {
                        pos[axis] += sign * eps;
                    }
                }
                let grad = (plus.potential_energy() - minus.potential_energy()) / (2.0 * eps);
                assert!((f.point[p][axis] + grad).abs() < 1e-5, "point {p} axis {axis}");
            }
        }
    }

    #[test]
    fn stiff_link_tracks_driver() {
        let mut sys = System::new();
        let driver = Driver { axis: Vec3::z(), amplitude: 0.05, angular_frequency: 2.0 * std::f64::consts::PI };
        let d = sys.add_driven_point(Vec3::zeros(), driver);
        let p = sys.add_free_point(Vec3::new(0.0, 0.0, 0.3), 10.0);
        sys.add_spring(d, p, 1e8, 2.0 * 0.05 * (1e8f64 * 10.0).sqrt());
        sys.set_point_velocity(p, Vec3::z() * (0.05 * 2.0 * std::f64::consts::PI));
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            sys.advance(1e-3);
            let expected = 0.3 + 0.05 * (2.0 * std::f64::consts::PI * sys.time()).sin();
            worst = worst.max((sys.point_position(p).z - expected).abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }
}
