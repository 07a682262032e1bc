//! Overhead-crane plant model and the PD layers around it.
//!
//! The plant is a gantry of mass `m_c` driven by a horizontal force `u`,
//! carrying a payload of mass `m_p` on a rigid rod of length `L`. With
//! generalized coordinates `q = [x; theta]` (gantry position, payload angle)
//! the equations of motion are
//!
//! ```text
//! M(q) q'' + Vm(q, q') q' + G(q) = B u
//!
//! M  = | m_c + m_p          -m_p L cos(theta) |      B = | 1 |
//!      | -m_p L cos(theta)   m_p L^2          |          | 0 |
//!
//! Vm = | 0   m_p L theta' sin(theta) |     G = | 0                    |
//!      | 0   0                       |         | m_p g L sin(theta)   |
//! ```
//!
//! The model is only valid for `theta` in the open interval (-pi/2, pi/2);
//! leaving it is a hard error rather than a wrap, because the energy
//! function and the constraint set are meaningless beyond that range.
//!
//! Two PD laws share this module: the prestabilizing law `pi` that tracks a
//! virtual reference `v`, and the nominal law `kappa` that tracks the target
//! reference `r` with its own (typically stiffer) gains.

use crate::error::{Error, Result};

/// Physical parameters of the crane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraneParams {
    /// Gantry mass (kg).
    pub gantry_mass: f64,
    /// Payload mass (kg).
    pub payload_mass: f64,
    /// Rod length (m).
    pub rod_length: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
}

impl CraneParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gantry_mass > 0.0
            && self.payload_mass > 0.0
            && self.rod_length > 0.0
            && self.gravity > 0.0)
        {
            return Err(Error::Config(format!(
                "crane parameters must be positive, got m_c={}, m_p={}, L={}, g={}",
                self.gantry_mass, self.payload_mass, self.rod_length, self.gravity
            )));
        }
        Ok(())
    }

    /// Determinant of the mass matrix at payload angle `theta`:
    /// `m_p L^2 (m_c + m_p sin^2(theta))`, strictly positive on the domain.
    pub fn mass_matrix_det(&self, theta: f64) -> f64 {
        let s = theta.sin();
        self.payload_mass
            * self.rod_length
            * self.rod_length
            * (self.gantry_mass + self.payload_mass * s * s)
    }
}

/// Plant state `[x, theta, xdot, thetadot]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    /// Gantry position (m).
    pub x: f64,
    /// Payload angle (rad), valid on (-pi/2, pi/2).
    pub theta: f64,
    /// Gantry velocity (m/s).
    pub xdot: f64,
    /// Payload angular rate (rad/s).
    pub thetadot: f64,
}

/// Time derivative of [`PlantState`], ordered `[xdot, thetadot, xddot, thetaddot]`.
pub type StateDeriv = [f64; 4];

impl PlantState {
    pub fn new(x: f64, theta: f64, xdot: f64, thetadot: f64) -> Self {
        Self {
            x,
            theta,
            xdot,
            thetadot,
        }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            x: a[0],
            theta: a[1],
            xdot: a[2],
            thetadot: a[3],
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.theta, self.xdot, self.thetadot]
    }

    /// True while the payload angle stays inside the model domain.
    pub fn in_domain(&self) -> bool {
        self.theta.abs() < std::f64::consts::FRAC_PI_2
    }

    fn check_domain(&self) -> Result<()> {
        if self.in_domain() {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                theta_abs: self.theta.abs(),
            })
        }
    }
}

/// Proportional/derivative gains of a PD law on the gantry position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdGains {
    /// Proportional gain (N/m).
    pub kp: f64,
    /// Derivative gain (N s/m).
    pub kd: f64,
}

impl PdGains {
    pub fn new(kp: f64, kd: f64) -> Self {
        Self { kp, kd }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kp > 0.0 && self.kd > 0.0) {
            return Err(Error::Config(format!(
                "PD gains must be positive, got kp={}, kd={}",
                self.kp, self.kd
            )));
        }
        Ok(())
    }
}

/// Equilibrium state for reference `r`: the gantry parked at `r` with the
/// payload hanging straight down.
pub fn equilibrium_state(r: f64) -> PlantState {
    PlantState::new(r, 0.0, 0.0, 0.0)
}

/// Steady-state input at any reference. Zero force holds every equilibrium.
pub fn equilibrium_input(_r: f64) -> f64 {
    0.0
}

/// Full nonlinear dynamics: returns `[xdot, thetadot, xddot, thetaddot]`.
///
/// The accelerations solve `M(q) q'' = B u - Vm q' - G` via the closed-form
/// 2x2 cofactor inverse, which is exact up to rounding on the domain.
pub fn crane_dynamics(s: &PlantState, u: f64, p: &CraneParams) -> Result<StateDeriv> {
    s.check_domain()?;
    let (m_c, m_p, l, g) = (p.gantry_mass, p.payload_mass, p.rod_length, p.gravity);
    let (sin_t, cos_t) = s.theta.sin_cos();
    let det = m_p * l * l * (m_c + m_p * sin_t * sin_t);

    // rhs = B u - Vm q' - G
    let rhs0 = u - m_p * l * s.thetadot * s.thetadot * sin_t;
    let rhs1 = -m_p * g * l * sin_t;

    let xddot = (m_p * l * l * rhs0 + m_p * l * cos_t * rhs1) / det;
    let thetaddot = (m_p * l * cos_t * rhs0 + (m_c + m_p) * rhs1) / det;
    Ok([s.xdot, s.thetadot, xddot, thetaddot])
}

/// Control-affine split `f(x, u) = f0(x) + g_vec(x) u`.
///
/// Returns `(f0, g_vec)` so a QP row can be assembled as
/// `grad . f0 + (grad . g_vec) u`.
pub fn control_affine_split(s: &PlantState, p: &CraneParams) -> Result<(StateDeriv, [f64; 4])> {
    let f0 = crane_dynamics(s, 0.0, p)?;
    let (_, cos_t) = s.theta.sin_cos();
    let det = p.mass_matrix_det(s.theta);
    let l = p.rod_length;
    let g_vec = [
        0.0,
        0.0,
        p.payload_mass * l * l / det,
        p.payload_mass * l * cos_t / det,
    ];
    Ok((f0, g_vec))
}

/// Prestabilizing PD law `pi(x, v) = -kp (x - v) - kd xdot`.
pub fn prestab_pi(s: &PlantState, v: f64, gains: &PdGains) -> f64 {
    -gains.kp * (s.x - v) - gains.kd * s.xdot
}

/// Nominal PD law `kappa(x, r)`, same form as `pi` with its own gains.
pub fn nominal_kappa(s: &PlantState, r: f64, gains: &PdGains) -> f64 {
    -gains.kp * (s.x - r) - gains.kd * s.xdot
}

/// Closed-loop vector field of the prestabilized plant: the crane driven by
/// `pi(x, v)` for a fixed virtual reference `v`.
pub fn closed_loop_f_pi(
    s: &PlantState,
    v: f64,
    p: &CraneParams,
    gains: &PdGains,
) -> Result<StateDeriv> {
    crane_dynamics(s, prestab_pi(s, v, gains), p)
}
