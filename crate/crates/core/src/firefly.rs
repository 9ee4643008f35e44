//! Binary firefly optimization of the cache placement.
//!
//! Each firefly is a full placement matrix. Brightness is the objective
//! mapped affinely onto `[0, 1]` (best = 1). A dimmer firefly `j` moves
//! towards every brighter firefly `i` with attractiveness
//! `beta = I_i exp(-gamma r_ij)`, `r_ij` being the Hamming distance, and each
//! bit is updated by the Heaviside rule
//!
//! ```text
//! x_j <- H(x_j + beta (x_i - x_j) + lambda (eps - 1/2) - 1/2)
//! ```
//!
//! After its moves every row of `X^j` is repaired back to capacity using the
//! local content popularity of that F-AP: evict the least popular cached
//! contents when over budget, add the most popular uncached contents when
//! under budget.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{EvalResult, Evaluator};
use crate::error::{invalid, Result};
use crate::matrix::{set_bits, CacheMatrix};
use crate::partition::Partition;
use crate::radio::LinkRateTable;
use crate::rng::{self, unit_f64, TAG_FA_INIT, TAG_FA_MOVE};
use crate::scenario::Scenario;

/// Offset keeping brightness finite when all objectives are equal.
pub const BRIGHTNESS_EPS: f64 = 1e-12;

/// Whether the movement noise is drawn per matrix element or once per move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonScope {
    #[default]
    Element,
    Matrix,
}

/// What the repair does with rows below capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairFill {
    /// Fill every row up to capacity with its most popular uncached contents.
    #[default]
    Full,
    /// Only evict; rows under capacity are left as they are.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaConfig {
    /// Swarm size `G`.
    pub population: usize,
    /// Iteration budget `Q`.
    pub max_iters: usize,
    /// Light absorption `gamma`.
    pub gamma: f64,
    /// Randomization weight `lambda`.
    pub lambda: f64,
    pub seed: u64,
    /// Stop after this many iterations without improving the incumbent.
    pub stall_limit: Option<usize>,
    pub epsilon_scope: EpsilonScope,
    pub repair_fill: RepairFill,
}

impl Default for FaConfig {
    fn default() -> Self {
        Self {
            population: 30,
            max_iters: 200,
            gamma: 0.001,
            lambda: 0.5,
            seed: 0,
            stall_limit: None,
            epsilon_scope: EpsilonScope::Element,
            repair_fill: RepairFill::Full,
        }
    }
}

impl FaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(invalid("firefly population must be >= 2"));
        }
        if self.max_iters == 0 {
            return Err(invalid("firefly iteration budget must be >= 1"));
        }
        if !(self.gamma >= 0.0) || !(self.lambda >= 0.0) {
            return Err(invalid("gamma and lambda must be non-negative"));
        }
        if self.stall_limit == Some(0) {
            return Err(invalid("stall_limit must be >= 1"));
        }
        Ok(())
    }
}

/// Maps objectives (lower is better) to brightness in `[0, 1]`:
/// `(f_worst - f_i) / (f_worst - f_best + eps)`.
pub fn brightness_normalize(objectives: &[f64]) -> Vec<f64> {
    let best = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = worst - best + BRIGHTNESS_EPS;
    objectives.iter().map(|f| (worst - f) / span).collect()
}

/// Attractiveness `beta = I exp(-gamma r)`.
pub fn attractiveness(brightness: f64, distance: f64, gamma: f64) -> f64 {
    brightness * (-gamma * distance).exp()
}

/// Uniform noise `eps` for one move, addressable by element index.
///
/// `eps` of element `e` is a hash of `(seed, iteration, j, i, e)`, so a move
/// that only looks at some elements sees exactly the values a full sweep
/// would.
pub struct MoveNoise {
    key: u64,
    scope: EpsilonScope,
}

impl MoveNoise {
    pub fn new(seed: u64, iteration: usize, j: usize, i: usize, scope: EpsilonScope) -> Self {
        Self {
            key: rng::derive_seed(seed, &[TAG_FA_MOVE, iteration as u64, j as u64, i as u64]),
            scope,
        }
    }

    pub fn epsilon(&mut self, element: usize) -> f64 {
        let pos = match self.scope {
            EpsilonScope::Element => element,
            EpsilonScope::Matrix => 0,
        };
        unit_f64(rng::derive_seed(self.key, &[pos as u64]))
    }
}

#[inline]
fn heaviside_move(xj: bool, xi: bool, beta: f64, lambda: f64, eps: f64) -> bool {
    let (xj, xi) = (xj as u8 as f64, xi as u8 as f64);
    xj + beta * (xi - xj) + lambda * (eps - 0.5) - 0.5 >= 0.0
}

/// Below this attractiveness no bit can change for `lambda <= 1`: a 0 needs
/// `beta + lambda (eps - 1/2) >= 1/2` to become 1, and a 1 drops only when
/// `beta - lambda (eps - 1/2) > 1/2`. The margin absorbs rounding.
fn inert_below(lambda: f64) -> f64 {
    (1.0 - lambda) / 2.0 - 1e-9
}

fn move_in_place(xj: &mut CacheMatrix, xi: &CacheMatrix, beta: f64, lambda: f64, noise: &mut MoveNoise) {
    let cols = xj.cols();
    // eps < 1, so for lambda <= 1 a bit on which both fireflies agree stays put
    let agreeing_fixed = lambda <= 1.0;
    if agreeing_fixed && beta < inert_below(lambda) {
        return;
    }
    let mut step = |xj: &mut CacheMatrix, m: usize, f: usize| {
        let a = xj.get(m, f);
        let next = heaviside_move(a, xi.get(m, f), beta, lambda, noise.epsilon(m * cols + f));
        if next != a {
            xj.set(m, f, next);
        }
    };
    for m in 0..xj.rows() {
        if agreeing_fixed {
            let diff: Vec<u64> = xj
                .row_words(m)
                .iter()
                .zip(xi.row_words(m))
                .map(|(a, b)| a ^ b)
                .collect();
            for f in set_bits(&diff) {
                step(xj, m, f);
            }
        } else {
            for f in 0..cols {
                step(xj, m, f);
            }
        }
    }
}

/// Moves firefly `xj` towards `xi`.
pub fn move_firefly(
    xj: &CacheMatrix,
    xi: &CacheMatrix,
    beta: f64,
    lambda: f64,
    noise: &mut MoveNoise,
) -> Result<CacheMatrix> {
    if xj.shape() != xi.shape() {
        return Err(invalid("fireflies have different shapes"));
    }
    let mut out = xj.clone();
    move_in_place(&mut out, xi, beta, lambda, noise);
    Ok(out)
}

/// Contents ordered by descending popularity, lowest index first on ties.
pub fn popularity_ranking(popularity: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..popularity.len()).collect();
    order.sort_by(|&a, &b| popularity[b].total_cmp(&popularity[a]));
    order
}

fn repair_row(x: &mut CacheMatrix, m: usize, ranking: &[usize], slots: usize, fill: RepairFill) {
    let mut count = x.row_count(m);
    if count > slots {
        // least popular first; ties evict the highest index first so the
        // survivors match the descending ranking
        for &f in ranking.iter().rev() {
            if count == slots {
                break;
            }
            if x.get(m, f) {
                x.set(m, f, false);
                count -= 1;
            }
        }
    } else if count < slots && fill == RepairFill::Full {
        for &f in ranking {
            if count == slots {
                break;
            }
            if !x.get(m, f) {
                x.set(m, f, true);
                count += 1;
            }
        }
    }
}

/// Popularity-guided capacity repair of one cache row.
///
/// Over budget, the least popular cached contents are evicted. Under budget
/// (with [`RepairFill::Full`]) the most popular uncached contents are added
/// until the row holds exactly `slots` contents.
pub fn repair(row: &[bool], local_popularity: &[f64], slots: usize, fill: RepairFill) -> Result<Vec<bool>> {
    if row.len() != local_popularity.len() {
        return Err(invalid("row and popularity lengths differ"));
    }
    let mut x = CacheMatrix::zeros(1, row.len());
    for (f, &b) in row.iter().enumerate() {
        x.set(0, f, b);
    }
    repair_row(
        &mut x,
        0,
        &popularity_ranking(local_popularity),
        slots.min(row.len()),
        fill,
    );
    Ok((0..row.len()).map(|f| x.get(0, f)).collect())
}

/// Population state at the end of an iteration.
#[derive(Debug, Clone)]
pub struct Swarm {
    pub fireflies: Vec<CacheMatrix>,
    pub objectives: Vec<f64>,
    pub brightness: Vec<f64>,
    pub best: CacheMatrix,
    pub best_eval: EvalResult,
    /// Incumbent after the initial population (index 0) and each iteration.
    pub history: Vec<EvalResult>,
}

#[derive(Debug, Clone)]
pub struct FaOutcome {
    pub best: CacheMatrix,
    pub best_eval: EvalResult,
    pub history: Vec<EvalResult>,
    /// Iterations executed (may be below `max_iters` with a stall limit).
    pub iterations: usize,
}

fn initial_row(rng: &mut ChaCha8Rng, popularity: &[f64], slots: usize) -> Vec<usize> {
    let f = popularity.len();
    let positive = popularity.iter().filter(|&&p| p > 0.0).count();
    let weighted = slots.min(positive);
    let mut chosen: Vec<usize> = if weighted > 0 {
        index::sample_weighted(rng, f, |i| popularity[i], weighted)
            .expect("weights are finite and non-negative")
            .into_vec()
    } else {
        Vec::new()
    };
    if chosen.len() < slots.min(f) {
        let rest: Vec<usize> = (0..f).filter(|i| !chosen.contains(i)).collect();
        let extra = index::sample(rng, rest.len(), slots.min(f) - chosen.len());
        chosen.extend(extra.into_iter().map(|k| rest[k]));
    }
    chosen
}

fn evaluate_all(evaluator: &Evaluator<'_>, fireflies: &[CacheMatrix]) -> Vec<EvalResult> {
    fireflies.par_iter().map(|x| evaluator.evaluate(x)).collect()
}

fn argmin(evals: &[EvalResult]) -> usize {
    let mut best = 0;
    for (i, e) in evals.iter().enumerate() {
        if e.objective < evals[best].objective {
            best = i;
        }
    }
    best
}

/// Optimizes the placement for a fixed partition.
pub fn run_fa(
    scenario: &Scenario,
    rates: &LinkRateTable,
    partition: &Partition,
    config: &FaConfig,
) -> Result<FaOutcome> {
    run_fa_observed(scenario, rates, partition, config, |_, _| {})
}

/// Like [`run_fa`], calling `observe(iteration, swarm)` after the initial
/// population (iteration 0) and after every iteration.
pub fn run_fa_observed(
    scenario: &Scenario,
    rates: &LinkRateTable,
    partition: &Partition,
    config: &FaConfig,
    mut observe: impl FnMut(usize, &Swarm),
) -> Result<FaOutcome> {
    config.validate()?;
    if partition.num_faps() != scenario.num_faps() {
        return Err(invalid("partition does not match the scenario"));
    }
    let evaluator = Evaluator::new(scenario, rates, partition);
    let (m_count, f_count) = (scenario.num_faps(), scenario.num_contents());
    let slots = scenario.params().capacity_slots().min(f_count);
    let popularity: Vec<Vec<f64>> = (0..m_count)
        .map(|m| scenario.local_popularity(m))
        .collect::<Result<_>>()?;
    let rankings: Vec<Vec<usize>> = popularity.iter().map(|p| popularity_ranking(p)).collect();

    let fireflies: Vec<CacheMatrix> = (0..config.population)
        .map(|g| {
            let mut rng = rng::substream(config.seed, &[TAG_FA_INIT, g as u64]);
            let mut x = CacheMatrix::zeros(m_count, f_count);
            for (m, pop) in popularity.iter().enumerate() {
                for f in initial_row(&mut rng, pop, slots) {
                    x.set(m, f, true);
                }
                repair_row(&mut x, m, &rankings[m], slots, config.repair_fill);
            }
            x
        })
        .collect();
    let evals = evaluate_all(&evaluator, &fireflies);
    let lead = argmin(&evals);
    let mut swarm = Swarm {
        objectives: evals.iter().map(|e| e.objective).collect(),
        brightness: Vec::new(),
        best: fireflies[lead].clone(),
        best_eval: evals[lead],
        history: vec![evals[lead]],
        fireflies,
    };
    swarm.brightness = brightness_normalize(&swarm.objectives);
    observe(0, &swarm);

    let mut iterations = 0;
    let mut stall = 0;
    for t in 1..=config.max_iters {
        let brightness = &swarm.brightness;
        for j in 0..config.population {
            for i in 0..config.population {
                if brightness[j] < brightness[i] {
                    let (xi, xj) = pair_mut(&mut swarm.fireflies, i, j);
                    let r = xj.hamming(xi).expect("same shape") as f64;
                    let beta = attractiveness(brightness[i], r, config.gamma);
                    let mut noise = MoveNoise::new(config.seed, t, j, i, config.epsilon_scope);
                    move_in_place(xj, xi, beta, config.lambda, &mut noise);
                }
            }
            let xj = &mut swarm.fireflies[j];
            for (m, ranking) in rankings.iter().enumerate() {
                repair_row(xj, m, ranking, slots, config.repair_fill);
            }
        }

        let evals = evaluate_all(&evaluator, &swarm.fireflies);
        swarm.objectives = evals.iter().map(|e| e.objective).collect();
        swarm.brightness = brightness_normalize(&swarm.objectives);
        let lead = argmin(&evals);
        if evals[lead].objective < swarm.best_eval.objective {
            swarm.best = swarm.fireflies[lead].clone();
            swarm.best_eval = evals[lead];
            stall = 0;
        } else {
            stall += 1;
        }
        swarm.history.push(swarm.best_eval);
        iterations = t;
        observe(t, &swarm);
        if config.stall_limit.is_some_and(|limit| stall >= limit) {
            break;
        }
    }

    Ok(FaOutcome {
        best: swarm.best,
        best_eval: swarm.best_eval,
        history: swarm.history,
        iterations,
    })
}

/// Shared reference to `v[i]` and mutable reference to `v[j]`, `i != j`.
fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = v.split_at_mut(j);
        (&lo[i], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(i);
        (&hi[0], &mut lo[j])
    }
}
