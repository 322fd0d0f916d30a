use serde::{Deserialize, Serialize};

/// Deterministic schedule for the transport coefficient `sigma(t)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub enum SigmaSchedule {
    Constant([f64; 2]),
    /// Linear interpolation from `start` at `t = 0` to `end` at `t = horizon`.
    Ramp {
        start: [f64; 2],
        end: [f64; 2],
        horizon: f64,
    },
}

/// The transport coefficient `sigma(t) = (sigma^1(t), sigma^2(t))` with its
/// uniform bound `Lambda` (`|sigma^j(t)| <= Lambda`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaVector {
    schedule: SigmaSchedule,
    bound: f64,
}

impl SigmaVector {
    /// Build, checking the componentwise bound. For the ramp schedule the
    /// components are affine in `t`, so checking the endpoints suffices.
    pub fn new(schedule: SigmaSchedule, bound: f64) -> Result<Self, String> {
        if bound <= 0.0 {
            return Err("sigma bound Lambda must be positive".into());
        }
        let check = |s: [f64; 2]| s[0].abs() <= bound && s[1].abs() <= bound;
        let ok = match schedule {
            SigmaSchedule::Constant(s) => check(s),
            SigmaSchedule::Ramp { start, end, horizon } => {
                horizon > 0.0 && check(start) && check(end)
            }
        };
        if !ok {
            return Err(format!("sigma schedule exceeds the bound Lambda = {bound}"));
        }
        Ok(Self { schedule, bound })
    }

    pub fn zero() -> Self {
        Self {
            schedule: SigmaSchedule::Constant([0.0, 0.0]),
            bound: 1.0,
        }
    }

    pub fn constant(s: [f64; 2]) -> Self {
        let bound = s[0].abs().max(s[1].abs()).max(1e-12);
        Self {
            schedule: SigmaSchedule::Constant(s),
            bound,
        }
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        match self.schedule {
            SigmaSchedule::Constant(s) => s,
            SigmaSchedule::Ramp { start, end, horizon } => {
                let w = (t / horizon).clamp(0.0, 1.0);
                [
                    start[0] + w * (end[0] - start[0]),
                    start[1] + w * (end[1] - start[1]),
                ]
            }
        }
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.schedule, SigmaSchedule::Constant([0.0, 0.0]))
    }

    /// `sup_t |sigma(t)|^2`. For the ramp schedule `|sigma(t)|^2` is convex
    /// in `t`, so the supremum sits at an endpoint.
    pub fn sup_norm_sq(&self, horizon: f64) -> f64 {
        let n2 = |s: [f64; 2]| s[0] * s[0] + s[1] * s[1];
        match self.schedule {
            SigmaSchedule::Constant(s) => n2(s),
            SigmaSchedule::Ramp { .. } => n2(self.eval(0.0)).max(n2(self.eval(horizon))),
        }
    }
}
