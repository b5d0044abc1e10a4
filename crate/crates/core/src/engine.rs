//! Simulation driver: runs the agent tick by tick, bins events into
//! exploration curves, and fans out replicate runs and parameter sweeps.
//!
//! With the `parallel` feature (default) replicates run on the rayon pool;
//! without it they run sequentially. Results are always collected and
//! reduced in input seed order, so both paths produce identical output.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::agent::{AgentParams, AgentState, ParamError, StepEvents};
use crate::curves::{self, ExplorationCurve, RealCurve};
use crate::gridworld::{GridWorld, Position};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid agent parameters: {0}")]
    Agent(#[from] ParamError),
    #[error("bin_width must be at least 1")]
    ZeroBinWidth,
    #[error("no seeds given")]
    NoSeeds,
    #[error("unknown sweep parameter `{0}`")]
    UnknownParam(String),
    #[error("no sweep values given")]
    EmptyValues,
    #[error("{param} = {value} is outside its legal range")]
    ValueOutOfRange { param: SweepParam, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub world: GridWorld,
    pub agent: AgentParams,
    pub bin_width: u64,
    /// Tick cap. Zero is allowed and yields an empty curve.
    pub max_ticks: u64,
    pub seed: u64,
}

pub const DEFAULT_BIN_WIDTH: u64 = 100;
pub const DEFAULT_MAX_TICKS: u64 = 200_000;

impl SimConfig {
    pub fn new(world: GridWorld, agent: AgentParams) -> Self {
        Self {
            world,
            agent,
            bin_width: DEFAULT_BIN_WIDTH,
            max_ticks: DEFAULT_MAX_TICKS,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.agent.validate()?;
        if self.bin_width == 0 {
            return Err(EngineError::ZeroBinWidth);
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub curve: ExplorationCurve,
    /// Every arena cell visited and the agent back inside the refuge.
    pub completed: bool,
    pub ticks_used: u64,
    pub final_fear: f64,
}

/// One processed tick: where the agent ended up and what happened.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TickRecord {
    pub tick: u64,
    pub pos: Position,
    pub events: StepEvents,
}

/// A single run in progress. Drive it with [`Simulation::advance`] or run it
/// to the end with [`run_sim`].
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    state: AgentState,
    rng: ChaCha8Rng,
    curve: ExplorationCurve,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self {
            state: AgentState::new(&config.world, &config.agent),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            curve: ExplorationCurve::new(config.bin_width),
            config: config.clone(),
        })
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn is_complete(&self) -> bool {
        self.state.coverage_complete() && self.config.world.in_refuge(self.state.pos)
    }

    pub fn is_finished(&self) -> bool {
        self.is_complete() || self.state.tick >= self.config.max_ticks
    }

    /// Processes one tick, or returns `None` once the run is finished.
    pub fn advance(&mut self) -> Option<TickRecord> {
        if self.is_finished() {
            return None;
        }
        let tick = self.state.tick;
        let events = self
            .state
            .step(&self.config.world, &self.config.agent, &mut self.rng);
        let bin = (tick / self.config.bin_width) as usize;
        if self.curve.novel.len() <= bin {
            self.curve.novel.resize(bin + 1, 0);
            self.curve.crossings.resize(bin + 1, 0);
        }
        self.curve.novel[bin] += u32::from(events.novel_cell);
        self.curve.crossings[bin] += u32::from(events.crossed_line);
        Some(TickRecord {
            tick,
            pos: self.state.pos,
            events,
        })
    }

    pub fn finish(mut self) -> SimResult {
        while self.advance().is_some() {}
        SimResult {
            completed: self.is_complete(),
            ticks_used: self.state.tick,
            final_fear: self.state.fear,
            curve: self.curve,
        }
    }
}

pub fn run_sim(config: &SimConfig) -> Result<SimResult, EngineError> {
    Ok(Simulation::new(config)?.finish())
}

/// Full per-tick trace of a run, for inspection and oracle checks.
pub fn run_trace(config: &SimConfig) -> Result<Vec<TickRecord>, EngineError> {
    let mut sim = Simulation::new(config)?;
    Ok(std::iter::from_fn(|| sim.advance()).collect())
}

/// Replicate-averaged curve. Shorter runs are zero-padded before averaging.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurve {
    pub curve: RealCurve,
    pub seeds: Vec<u64>,
}

impl MeanCurve {
    pub fn replicates(&self) -> usize {
        self.seeds.len()
    }

    pub fn from_runs(bin_width: u64, seeds: &[u64], runs: &[SimResult]) -> Self {
        let len = runs.iter().map(|r| r.curve.len()).max().unwrap_or(0);
        let mut novel = vec![0u64; len];
        let mut crossings = vec![0u64; len];
        for run in runs {
            for (i, (&n, &c)) in run.curve.novel.iter().zip(&run.curve.crossings).enumerate() {
                novel[i] += u64::from(n);
                crossings[i] += u64::from(c);
            }
        }
        // Integer sums make the mean independent of replicate order.
        let k = runs.len().max(1) as f64;
        MeanCurve {
            curve: RealCurve {
                bin_width,
                novel: novel.into_iter().map(|s| s as f64 / k).collect(),
                crossings: crossings.into_iter().map(|s| s as f64 / k).collect(),
            },
            seeds: seeds.to_vec(),
        }
    }
}

impl curves::NovelSeries for MeanCurve {
    fn bin_width(&self) -> u64 {
        self.curve.bin_width
    }
    fn novel_values(&self) -> Vec<f64> {
        self.curve.novel.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replicates {
    pub mean: MeanCurve,
    pub runs: Vec<SimResult>,
}

fn replicate_inputs(config: &SimConfig, seeds: &[u64]) -> Result<(), EngineError> {
    if seeds.is_empty() {
        return Err(EngineError::NoSeeds);
    }
    config.validate()
}

/// One run per seed, results in seed order. Parallel when the `parallel`
/// feature is enabled.
pub fn run_replicates(config: &SimConfig, seeds: &[u64]) -> Result<Replicates, EngineError> {
    #[cfg(feature = "parallel")]
    {
        run_replicates_par(config, seeds)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_replicates_seq(config, seeds)
    }
}

pub fn run_replicates_seq(config: &SimConfig, seeds: &[u64]) -> Result<Replicates, EngineError> {
    replicate_inputs(config, seeds)?;
    let runs = seeds
        .iter()
        .map(|&s| run_sim(&config.with_seed(s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Replicates {
        mean: MeanCurve::from_runs(config.bin_width, seeds, &runs),
        runs,
    })
}

#[cfg(feature = "parallel")]
pub fn run_replicates_par(config: &SimConfig, seeds: &[u64]) -> Result<Replicates, EngineError> {
    replicate_inputs(config, seeds)?;
    // `collect` on an indexed parallel iterator preserves input order.
    let runs = seeds
        .par_iter()
        .map(|&s| run_sim(&config.with_seed(s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Replicates {
        mean: MeanCurve::from_runs(config.bin_width, seeds, &runs),
        runs,
    })
}

/// A parameter that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    FearInitial,
    FearDecay,
    WExplore,
    WFear,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::FearInitial => "fear_initial",
            SweepParam::FearDecay => "fear_decay",
            SweepParam::WExplore => "w_explore",
            SweepParam::WFear => "w_fear",
        }
    }

    pub fn apply(self, params: &mut AgentParams, value: f64) {
        match self {
            SweepParam::FearInitial => params.fear_initial = value,
            SweepParam::FearDecay => params.fear_decay = value,
            SweepParam::WExplore => params.w_explore = value,
            SweepParam::WFear => params.w_fear = value,
        }
    }

    pub fn get(self, params: &AgentParams) -> f64 {
        match self {
            SweepParam::FearInitial => params.fear_initial,
            SweepParam::FearDecay => params.fear_decay,
            SweepParam::WExplore => params.w_explore,
            SweepParam::WFear => params.w_fear,
        }
    }

    pub fn in_range(self, value: f64) -> bool {
        match self {
            SweepParam::FearInitial | SweepParam::FearDecay => (0.0..=1.0).contains(&value),
            SweepParam::WExplore | SweepParam::WFear => value >= 0.0 && value.is_finite(),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fear_initial" => Ok(SweepParam::FearInitial),
            "fear_decay" => Ok(SweepParam::FearDecay),
            "w_explore" => Ok(SweepParam::WExplore),
            "w_fear" => Ok(SweepParam::WFear),
            other => Err(EngineError::UnknownParam(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean: MeanCurve,
    pub auc: f64,
    /// `None` when the mean curve is empty.
    pub peak_bin: Option<usize>,
    /// `None` when nothing was explored.
    pub t50: Option<usize>,
}

pub fn sweep(
    base: &SimConfig,
    param: SweepParam,
    values: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>, EngineError> {
    if values.is_empty() {
        return Err(EngineError::EmptyValues);
    }
    if let Some(&value) = values.iter().find(|&&v| !param.in_range(v)) {
        return Err(EngineError::ValueOutOfRange { param, value });
    }
    values
        .iter()
        .map(|&value| {
            let mut config = base.clone();
            param.apply(&mut config.agent, value);
            let mean = run_replicates(&config, seeds)?.mean;
            let novel = &mean.curve.novel;
            Ok(SweepRow {
                value,
                auc: curves::auc(novel),
                peak_bin: curves::peak_bin(novel).ok().map(|(i, _)| i),
                t50: curves::time_to_fraction(novel, 0.5).ok(),
                mean,
            })
        })
        .collect()
}
