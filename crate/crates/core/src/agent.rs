//! The explorer's drive model.
//!
//! Two drives compete on every tick. The explore drive is fuelled by the
//! fraction of the arena still unvisited; the fear drive opposes it in
//! proportion to the current fear level. Fear habituates geometrically from
//! the moment the door opens, regardless of where the agent is.
//!
//! The net move intensity `m` in `[0, 1]` is either a per-tick probability
//! (stochastic mode) or a credit rate (deterministic mode, where fractional
//! intensity accumulates and a move is taken each time the credit reaches 1).
//!
//! Random stream: stochastic mode draws exactly one `f64` uniform in
//! `[0, 1)` per tick via `Rng::random::<f64>()`, whether or not the agent
//! moves. The engine seeds `rand_chacha::ChaCha8Rng` with `seed_from_u64`.
//! Deterministic mode never touches the stream.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridworld::{GridWorld, Position, VisitedSet};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field} = {value} is out of range ({expected})")]
pub struct ParamError {
    pub field: &'static str,
    pub value: f64,
    pub expected: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyMode {
    #[default]
    Stochastic,
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    /// Fear level when the door opens, in `[0, 1]`.
    pub fear_initial: f64,
    /// Fraction of fear lost per tick, in `[0, 1]`.
    pub fear_decay: f64,
    pub w_explore: f64,
    pub w_fear: f64,
    pub mode: PolicyMode,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            fear_initial: 0.9,
            fear_decay: 0.02,
            w_explore: 1.0,
            w_fear: 1.0,
            mode: PolicyMode::Stochastic,
        }
    }
}

fn check_unit(field: &'static str, value: f64) -> Result<(), ParamError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ParamError {
            field,
            value,
            expected: "0 <= value <= 1",
        })
    }
}

fn check_weight(field: &'static str, value: f64) -> Result<(), ParamError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError {
            field,
            value,
            expected: "finite and >= 0",
        })
    }
}

impl AgentParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        check_unit("fear_initial", self.fear_initial)?;
        check_unit("fear_decay", self.fear_decay)?;
        check_weight("w_explore", self.w_explore)?;
        check_weight("w_fear", self.w_fear)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drives {
    pub explore: f64,
    pub fear: f64,
    pub move_intensity: f64,
}

/// Drive competition for one tick.
///
/// Fear is aversion to the unfamiliar, so both drives scale with the
/// unvisited fraction `u`: `explore = w_explore * u`,
/// `fear = w_fear * fear * u`, `m = clamp(explore - fear, 0, 1)`.
/// Any fear below the explore weight therefore leaves a positive intensity
/// while novel cells remain.
pub fn drives(unvisited_fraction: f64, fear: f64, params: &AgentParams) -> Drives {
    let explore = params.w_explore * unvisited_fraction;
    let fear = params.w_fear * fear * unvisited_fraction;
    Drives {
        explore,
        fear,
        move_intensity: (explore - fear).clamp(0.0, 1.0),
    }
}

pub fn habituate(fear: f64, fear_decay: f64) -> f64 {
    fear * (1.0 - fear_decay)
}

/// Fear after `ticks` habituation steps, in closed form.
pub fn fear_at(params: &AgentParams, ticks: u64) -> f64 {
    params.fear_initial * (1.0 - params.fear_decay).powf(ticks as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StepEvents {
    pub moved: bool,
    pub crossed_line: bool,
    pub novel_cell: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub pos: Position,
    pub fear: f64,
    pub visited: VisitedSet,
    pub credit: f64,
    pub tick: u64,
}

impl AgentState {
    /// The agent in the refuge at the moment the door opens.
    pub fn new(world: &GridWorld, params: &AgentParams) -> Self {
        Self {
            pos: world.start(),
            fear: params.fear_initial,
            visited: VisitedSet::new(world),
            credit: 0.0,
            tick: 0,
        }
    }

    pub fn coverage_complete(&self) -> bool {
        self.visited.unvisited_arena() == 0
    }

    /// Advances one tick: decide, maybe move, then habituate.
    ///
    /// While novel cells remain, a move heads for the nearest one. Once the
    /// arena is covered the explore drive is spent and the agent walks home
    /// at full intensity, then idles inside the refuge.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        world: &GridWorld,
        params: &AgentParams,
        rng: &mut R,
    ) -> StepEvents {
        let homing = self.coverage_complete();
        let intensity = if homing {
            1.0
        } else {
            drives(self.visited.unvisited_fraction(), self.fear, params).move_intensity
        };

        let act = match params.mode {
            PolicyMode::Stochastic => rng.random::<f64>() < intensity,
            PolicyMode::Deterministic => {
                self.credit += intensity;
                if self.credit >= 1.0 {
                    self.credit -= 1.0;
                    true
                } else {
                    false
                }
            }
        };

        let mut events = StepEvents::default();
        if act {
            let route = if homing {
                Some(world.route_home(self.pos))
            } else {
                world.nearest_unvisited(&self.visited, self.pos)
            };
            if let Some(dir) = route.and_then(|r| r.first_step) {
                self.pos = world
                    .step(self.pos, dir)
                    .expect("route steps stay on the grid");
                events.moved = true;
                events.crossed_line = true;
                events.novel_cell = self.visited.insert(world, self.pos);
            }
        }

        self.fear = habituate(self.fear, params.fear_decay);
        self.tick += 1;
        events
    }
}
