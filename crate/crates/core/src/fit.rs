//! Recovers fear parameters from a target exploration curve.
//!
//! Each candidate is scored by simulating replicate runs with a fixed seed
//! list (common random numbers across candidates) and taking the mean
//! squared error between the mean novel-cell curve and the target. Search
//! is a full coarse grid followed by coordinate descent with step halving.

use std::cmp::Ordering;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curves::NovelSeries;
use crate::engine::{self, EngineError, SimConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("both series are empty")]
    BothEmpty,
    #[error("target curve has no bins")]
    EmptyTarget,
    #[error("nothing to search: no free parameters or an empty coarse grid")]
    EmptyGrid,
    #[error("coarse grid value {value} for {param} is outside [0, 1]")]
    GridOutOfRange { param: FreeParam, value: f64 },
    #[error("target bin width {target} differs from simulation bin width {sim}")]
    BinWidthMismatch { target: u64, sim: u64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParam {
    FearInitial,
    FearDecay,
}

impl FreeParam {
    pub fn name(self) -> &'static str {
        match self {
            FreeParam::FearInitial => "fear_initial",
            FreeParam::FearDecay => "fear_decay",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fear_initial" => Some(FreeParam::FearInitial),
            "fear_decay" => Some(FreeParam::FearDecay),
            _ => None,
        }
    }
}

impl std::fmt::Display for FreeParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A point in the searched parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamPoint {
    pub fear_initial: f64,
    pub fear_decay: f64,
}

impl ParamPoint {
    fn get(&self, p: FreeParam) -> f64 {
        match p {
            FreeParam::FearInitial => self.fear_initial,
            FreeParam::FearDecay => self.fear_decay,
        }
    }

    fn with(mut self, p: FreeParam, value: f64) -> Self {
        match p {
            FreeParam::FearInitial => self.fear_initial = value,
            FreeParam::FearDecay => self.fear_decay = value,
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub fear_initial: f64,
    pub fear_decay: f64,
    pub loss: f64,
}

impl TraceEntry {
    fn point(&self) -> ParamPoint {
        ParamPoint {
            fear_initial: self.fear_initial,
            fear_decay: self.fear_decay,
        }
    }

    /// Lower loss, then lower fear_initial, then lower fear_decay.
    fn rank(&self, other: &Self) -> Ordering {
        self.loss
            .total_cmp(&other.loss)
            .then(self.fear_initial.total_cmp(&other.fear_initial))
            .then(self.fear_decay.total_cmp(&other.fear_decay))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSpec {
    pub base: SimConfig,
    pub free: Vec<FreeParam>,
    pub seeds: Vec<u64>,
    pub grid_fear_initial: Vec<f64>,
    pub grid_fear_decay: Vec<f64>,
    pub refine_tol: f64,
    pub max_refine_iters: usize,
}

impl FitSpec {
    /// Evenly spaced coarse grid over `[0, 1]` for every free parameter.
    pub fn with_uniform_grid(
        base: SimConfig,
        free: Vec<FreeParam>,
        seeds: Vec<u64>,
        step: f64,
    ) -> Self {
        let n = (1.0 / step).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
        Self {
            grid_fear_initial: grid.clone(),
            grid_fear_decay: grid,
            base,
            free,
            seeds,
            refine_tol: 1e-3,
            max_refine_iters: 40,
        }
    }

    fn free_sorted(&self) -> Vec<FreeParam> {
        let mut free = self.free.clone();
        free.sort();
        free.dedup();
        free
    }

    fn grid_for(&self, p: FreeParam) -> &[f64] {
        match p {
            FreeParam::FearInitial => &self.grid_fear_initial,
            FreeParam::FearDecay => &self.grid_fear_decay,
        }
    }

    fn base_point(&self) -> ParamPoint {
        ParamPoint {
            fear_initial: self.base.agent.fear_initial,
            fear_decay: self.base.agent.fear_decay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub best_params: ParamPoint,
    pub best_loss: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

/// Mean squared error after zero-padding both series to the longer length.
pub fn curve_loss<A, B>(simulated: &[A], target: &[B]) -> Result<f64, FitError>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    let len = simulated.len().max(target.len());
    if len == 0 {
        return Err(FitError::BothEmpty);
    }
    let at = |s: &[A], i: usize| s.get(i).map_or(0.0, |&v| v.into());
    let bt = |s: &[B], i: usize| s.get(i).map_or(0.0, |&v| v.into());
    let sum: f64 = (0..len)
        .map(|i| {
            let d = at(simulated, i) - bt(target, i);
            d * d
        })
        .sum();
    Ok(sum / len as f64)
}

struct Objective<'a> {
    spec: &'a FitSpec,
    target: Vec<f64>,
}

impl Objective<'_> {
    fn eval(&self, point: ParamPoint) -> Result<TraceEntry, FitError> {
        let mut config = self.spec.base.clone();
        config.agent.fear_initial = point.fear_initial;
        config.agent.fear_decay = point.fear_decay;
        let mean = engine::run_replicates(&config, &self.spec.seeds)?.mean;
        Ok(TraceEntry {
            fear_initial: point.fear_initial,
            fear_decay: point.fear_decay,
            loss: curve_loss(&mean.curve.novel, &self.target)?,
        })
    }

    fn eval_all(&self, points: &[ParamPoint]) -> Result<Vec<TraceEntry>, FitError> {
        #[cfg(feature = "parallel")]
        let iter = points.par_iter();
        #[cfg(not(feature = "parallel"))]
        let iter = points.iter();
        iter.map(|&p| self.eval(p)).collect()
    }
}

fn cartesian(spec: &FitSpec, free: &[FreeParam]) -> Vec<ParamPoint> {
    free.iter().fold(vec![spec.base_point()], |points, &p| {
        points
            .iter()
            .flat_map(|pt| spec.grid_for(p).iter().map(move |&v| pt.with(p, v)))
            .collect()
    })
}

/// Initial refinement step: the smallest gap between distinct grid values,
/// or a quarter of the unit range for a single-value grid.
fn initial_step(grid: &[f64]) -> f64 {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(None, |acc: Option<f64>, gap| {
            Some(acc.map_or(gap, |a| a.min(gap)))
        })
        .unwrap_or(0.25)
}

pub fn fit_params<T: NovelSeries>(spec: &FitSpec, target: &T) -> Result<FitResult, FitError> {
    let target_novel = target.novel_values();
    if target_novel.is_empty() {
        return Err(FitError::EmptyTarget);
    }
    if target.bin_width() != spec.base.bin_width {
        return Err(FitError::BinWidthMismatch {
            target: target.bin_width(),
            sim: spec.base.bin_width,
        });
    }
    let free = spec.free_sorted();
    if free.is_empty() || free.iter().any(|&p| spec.grid_for(p).is_empty()) {
        return Err(FitError::EmptyGrid);
    }
    for &p in &free {
        if let Some(&value) = spec.grid_for(p).iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(FitError::GridOutOfRange { param: p, value });
        }
    }

    let objective = Objective {
        spec,
        target: target_novel,
    };

    let mut trace = objective.eval_all(&cartesian(spec, &free))?;
    let mut current = *trace
        .iter()
        .min_by(|a, b| a.rank(b))
        .expect("coarse grid is non-empty");

    let mut steps: Vec<f64> = free
        .iter()
        .map(|&p| initial_step(spec.grid_for(p)))
        .collect();
    for _ in 0..spec.max_refine_iters {
        if steps.iter().all(|&s| s < spec.refine_tol) {
            break;
        }
        for (k, &p) in free.iter().enumerate() {
            if steps[k] < spec.refine_tol {
                continue;
            }
            let here = current.point().get(p);
            let probes: Vec<ParamPoint> = [here - steps[k], here + steps[k]]
                .into_iter()
                .map(|v| v.clamp(0.0, 1.0))
                .filter(|&v| v != here)
                .map(|v| current.point().with(p, v))
                .collect();
            let scored = objective.eval_all(&probes)?;
            trace.extend_from_slice(&scored);
            match scored
                .into_iter()
                .filter(|e| e.loss < current.loss)
                .min_by(|a, b| a.rank(b))
            {
                Some(better) => current = better,
                None => steps[k] /= 2.0,
            }
        }
    }

    let best = *trace
        .iter()
        .min_by(|a, b| a.rank(b))
        .expect("trace is non-empty");
    Ok(FitResult {
        best_params: best.point(),
        best_loss: best.loss,
        evaluations: trace.len(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{AgentParams, PolicyMode};
    use crate::curves::ExplorationCurve;
    use crate::gridworld::{GridWorld, Position, RefugeRect};
    use proptest::prelude::*;

    fn small_base(mode: PolicyMode) -> SimConfig {
        let world = GridWorld::new(8, 8, RefugeRect::new(0, 0, 2, 2), Position::new(0, 0)).unwrap();
        SimConfig {
            bin_width: 20,
            max_ticks: 5_000,
            ..SimConfig::new(
                world,
                AgentParams {
                    mode,
                    ..AgentParams::default()
                },
            )
        }
    }

    #[test]
    fn loss_examples() {
        assert_eq!(curve_loss(&[1.0, 2.0], &[1.0, 2.0]), Ok(0.0));
        assert_eq!(curve_loss(&[1.0, 1.0], &[2.0, 2.0]), Ok(1.0));
        assert_eq!(curve_loss(&[1.0, 1.0], &[1.0, 1.0, 2.0]), Ok(4.0 / 3.0));
        assert_eq!(curve_loss::<f64, f64>(&[], &[]), Err(FitError::BothEmpty));
    }

    #[test]
    fn empty_free_set_is_rejected() {
        let spec =
            FitSpec::with_uniform_grid(small_base(PolicyMode::Stochastic), vec![], vec![1], 0.25);
        let target = ExplorationCurve {
            bin_width: 20,
            novel: vec![1],
            crossings: vec![1],
        };
        assert_eq!(fit_params(&spec, &target), Err(FitError::EmptyGrid));
        let empty = ExplorationCurve::new(20);
        let spec = FitSpec::with_uniform_grid(
            small_base(PolicyMode::Stochastic),
            vec![FreeParam::FearInitial],
            vec![1],
            0.25,
        );
        assert_eq!(fit_params(&spec, &empty), Err(FitError::EmptyTarget));
    }

    #[test]
    fn zero_target_picks_lowest_zero_loss_fear() {
        let mut base = small_base(PolicyMode::Deterministic);
        base.agent.fear_decay = 0.0;
        base.max_ticks = 200;
        let spec = FitSpec::with_uniform_grid(base, vec![FreeParam::FearInitial], vec![1], 0.25);
        let target = ExplorationCurve {
            bin_width: 20,
            novel: vec![0; 10],
            crossings: vec![0; 10],
        };
        let fit = fit_params(&spec, &target).unwrap();
        assert_eq!(fit.best_loss, 0.0);
        let lowest_zero = fit
            .trace
            .iter()
            .filter(|e| e.loss == 0.0)
            .map(|e| e.fear_initial)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(fit.best_params.fear_initial, lowest_zero);
        assert!(fit.best_params.fear_initial > 0.75);
    }

    #[test]
    fn refinement_improves_strictly_and_is_deterministic() {
        let mut truth = small_base(PolicyMode::Stochastic);
        truth.agent.fear_initial = 0.62;
        let seeds: Vec<u64> = (100..116).collect();
        let target = engine::run_replicates(&truth, &seeds).unwrap().mean;
        let spec = FitSpec::with_uniform_grid(
            small_base(PolicyMode::Stochastic),
            vec![FreeParam::FearInitial],
            (0..16).collect(),
            0.25,
        );
        let fit = fit_params(&spec, &target).unwrap();
        let coarse_best = fit.trace[..5]
            .iter()
            .map(|e| e.loss)
            .fold(f64::INFINITY, f64::min);
        assert!(fit.best_loss <= coarse_best);
        assert_eq!(
            fit.best_loss,
            fit.trace
                .iter()
                .map(|e| e.loss)
                .fold(f64::INFINITY, f64::min)
        );
        assert_eq!(fit, fit_params(&spec, &target).unwrap());

        // Replay the accepted points: each must beat the one before it.
        let mut accepted = vec![fit.trace[..5].iter().min_by(|a, b| a.rank(b)).unwrap().loss];
        for e in &fit.trace[5..] {
            if e.loss < *accepted.last().unwrap() {
                accepted.push(e.loss);
            }
        }
        assert!(accepted.windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        #[test]
        fn loss_symmetric_and_zero_iff_equal(
            a in prop::collection::vec(0u8..6, 0..12),
            b in prop::collection::vec(0u8..6, 0..12),
        ) {
            prop_assume!(!a.is_empty() || !b.is_empty());
            let ab = curve_loss(&a, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, curve_loss(&b, &a).unwrap());
            let len = a.len().max(b.len());
            let pad = |s: &[u8]| {
                let mut v = s.to_vec();
                v.resize(len, 0);
                v
            };
            prop_assert_eq!(ab == 0.0, pad(&a) == pad(&b));
        }
    }
}
