//! Broadcast erasure delivery process.
//!
//! One sender, `M` receivers behind independent erasure channels, a frame of
//! `N` source packets. Each slot the sender rebuilds the coding graph,
//! selects a clique, broadcasts the matching combination and updates every
//! receiver that got it. Feedback is instantaneous and lossless.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clique::{
    greedy_clique_search, max_weight_clique_exact_capped, ExpectedRemainingSlots, WeightPolicy,
    WeightedGraph, DEFAULT_EXACT_CAP,
};
use crate::coding::{broadcast_and_update, determine_combination, Reception};
use crate::error::{Error, Result};
use crate::gf_oracle::fresh_equation;
use crate::graph::{build_graph, EdgeRules};
use crate::model::{CodingMode, ReceiverState};
use crate::packet_set::{PacketSet, MAX_PACKETS};

// RNG stream layout under one master seed.
const STREAM_SCENARIO: u64 = 0;
const STREAM_COEFFS: u64 = 1;
const STREAM_ERASURE_BASE: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// One erasure stream per receiver, one draw per slot whether targeted or
/// not. `true` means delivered.
struct ErasureChannels {
    rngs: Vec<ChaCha8Rng>,
    epsilons: Vec<f64>,
}

impl ErasureChannels {
    fn new(seed: u64, epsilons: &[f64]) -> Self {
        Self {
            rngs: (0..epsilons.len())
                .map(|i| stream(seed, STREAM_ERASURE_BASE + i as u64))
                .collect(),
            epsilons: epsilons.to_vec(),
        }
    }

    fn next_slot(&mut self) -> Vec<bool> {
        self.rngs
            .iter_mut()
            .zip(&self.epsilons)
            .map(|(r, &e)| r.gen::<f64>() >= e)
            .collect()
    }
}

/// A concrete delivery problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub receivers: usize,
    pub packets: usize,
    pub epsilons: Vec<f64>,
    pub initial_has: Vec<PacketSet>,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.packets > MAX_PACKETS {
            return bad(format!(
                "{} packets exceed capacity {MAX_PACKETS}",
                self.packets
            ));
        }
        if self.epsilons.len() != self.receivers || self.initial_has.len() != self.receivers {
            return bad(format!(
                "{} receivers but {} erasure probabilities and {} Has sets",
                self.receivers,
                self.epsilons.len(),
                self.initial_has.len()
            ));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return bad(format!("erasure probability {e} outside [0, 1)"));
        }
        if let Some(h) = self
            .initial_has
            .iter()
            .find(|h| h.upper_bound() > self.packets)
        {
            return bad(format!("Has set {h} exceeds {} packets", self.packets));
        }
        Ok(())
    }

    /// Initial receiver states; equation bookkeeping on if `oracle`.
    pub fn receiver_states(&self, mode: CodingMode, oracle: bool) -> Result<Vec<ReceiverState>> {
        self.validate()?;
        (0..self.receivers)
            .map(|i| {
                let s = ReceiverState::new(i, self.packets, self.initial_has[i], self.epsilons[i])?
                    .with_mode(mode);
                if oracle {
                    s.with_equations(Vec::new())
                } else {
                    Ok(s)
                }
            })
            .collect()
    }

    pub fn demands(&self) -> Vec<usize> {
        self.initial_has
            .iter()
            .map(|h| self.packets - h.len())
            .collect()
    }

    /// `max_i |W_i| / (1 - eps_i)`.
    pub fn expected_optimal(&self) -> f64 {
        self.demands()
            .iter()
            .zip(&self.epsilons)
            .map(|(&w, &e)| w as f64 / (1.0 - e))
            .fold(0.0, f64::max)
    }
}

/// How scenarios are drawn per seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioTemplate {
    pub receivers: usize,
    pub packets: usize,
    /// Per-receiver erasure probabilities are uniform on
    /// `[eps_mean - eps_spread, eps_mean + eps_spread]`, clipped to `[0, 0.99]`.
    pub eps_mean: f64,
    pub eps_spread: f64,
    /// Each packet is initially held by each receiver with this probability.
    pub has_prob: f64,
    /// Fixed erasure probabilities and Has sets; when set only the erasure
    /// draws vary with the seed.
    pub fixed: Option<(Vec<f64>, Vec<PacketSet>)>,
}

impl ScenarioTemplate {
    pub fn new(receivers: usize, packets: usize, eps_mean: f64) -> Self {
        Self {
            receivers,
            packets,
            eps_mean,
            eps_spread: 0.1,
            has_prob: 0.5,
            fixed: None,
        }
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        let eps_mean = if s.receivers == 0 {
            0.0
        } else {
            s.epsilons.iter().sum::<f64>() / s.receivers as f64
        };
        Self {
            receivers: s.receivers,
            packets: s.packets,
            eps_mean,
            eps_spread: 0.0,
            has_prob: 0.0,
            fixed: Some((s.epsilons.clone(), s.initial_has.clone())),
        }
    }

    pub fn instantiate(&self, seed: u64) -> Result<Scenario> {
        let scenario = match &self.fixed {
            Some((eps, has)) => Scenario {
                receivers: self.receivers,
                packets: self.packets,
                epsilons: eps.clone(),
                initial_has: has.clone(),
                seed,
            },
            None => {
                if !(0.0..=1.0).contains(&self.has_prob) {
                    return Err(Error::InvalidScenario(format!(
                        "has probability {}",
                        self.has_prob
                    )));
                }
                let mut rng = stream(seed, STREAM_SCENARIO);
                let lo = (self.eps_mean - self.eps_spread).max(0.0);
                let hi = (self.eps_mean + self.eps_spread).min(0.99);
                let epsilons = (0..self.receivers)
                    .map(|_| if hi > lo { rng.gen_range(lo..hi) } else { lo })
                    .collect();
                let initial_has = (0..self.receivers)
                    .map(|_| {
                        (0..self.packets)
                            .filter(|_| rng.gen_bool(self.has_prob))
                            .collect()
                    })
                    .collect();
                Scenario {
                    receivers: self.receivers,
                    packets: self.packets,
                    epsilons,
                    initial_has,
                    seed,
                }
            }
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheduler {
    IdncExact,
    IdncGreedy,
    O2oncExact,
    O2oncGreedy,
}

impl Scheduler {
    pub const ALL: [Scheduler; 4] = [
        Scheduler::IdncExact,
        Scheduler::IdncGreedy,
        Scheduler::O2oncExact,
        Scheduler::O2oncGreedy,
    ];

    fn mode(self) -> CodingMode {
        match self {
            Self::IdncExact | Self::IdncGreedy => CodingMode::InstantOnly,
            Self::O2oncExact | Self::O2oncGreedy => CodingMode::Order2,
        }
    }

    fn rules(self) -> EdgeRules {
        match self.mode() {
            CodingMode::InstantOnly => EdgeRules::IdncC1C2,
            CodingMode::Order2 => EdgeRules::ConstrainedBc,
        }
    }

    fn exact(self) -> bool {
        matches!(self, Self::IdncExact | Self::O2oncExact)
    }
}

/// A batch column: a scheduler, or the erasure-only lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Schedule(Scheduler),
    OptimalLowerBound,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Schedule(Scheduler::IdncExact),
        Strategy::Schedule(Scheduler::IdncGreedy),
        Strategy::Schedule(Scheduler::O2oncExact),
        Strategy::Schedule(Scheduler::O2oncGreedy),
        Strategy::OptimalLowerBound,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Schedule(Scheduler::IdncExact) => "idnc-exact",
            Self::Schedule(Scheduler::IdncGreedy) => "idnc-greedy",
            Self::Schedule(Scheduler::O2oncExact) => "o2onc-exact",
            Self::Schedule(Scheduler::O2oncGreedy) => "o2onc-greedy",
            Self::OptimalLowerBound => "optimal-lb",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scheduler '{s}'"))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    /// Audit every reception with GF(2^8) equations.
    pub oracle: bool,
    /// Largest graph handed to the exact clique solver; bigger graphs use
    /// the greedy search.
    pub exact_cap: usize,
    pub keep_log: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            oracle: false,
            exact_cap: DEFAULT_EXACT_CAP,
            keep_log: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlotRecord {
    pub combo: PacketSet,
    pub clique_size: usize,
    pub receptions: Vec<Reception>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub completion_time: u32,
    pub per_slot_log: Vec<SlotRecord>,
    pub per_receiver_beneficial: Vec<u32>,
    pub oracle_divergences: u32,
    /// Slots whose graph exceeded the exact-search cap and fell back to the
    /// greedy search.
    pub exact_fallbacks: u32,
}

impl SimResult {
    pub fn beneficial_total(&self) -> u64 {
        self.per_receiver_beneficial
            .iter()
            .map(|&b| u64::from(b))
            .sum()
    }
}

/// Runs the delivery process to completion with the given scheduler.
pub fn run_delivery(
    scenario: &Scenario,
    scheduler: Scheduler,
    opts: &SimOptions,
) -> Result<SimResult> {
    run_delivery_with(scenario, scheduler, opts, &ExpectedRemainingSlots)
}

pub fn run_delivery_with(
    scenario: &Scenario,
    scheduler: Scheduler,
    opts: &SimOptions,
    policy: &dyn WeightPolicy,
) -> Result<SimResult> {
    let mut states = scenario.receiver_states(scheduler.mode(), opts.oracle)?;
    let mut channels = ErasureChannels::new(scenario.seed, &scenario.epsilons);
    let mut coeff_rng = stream(scenario.seed, STREAM_COEFFS);
    let limit = (10.0 * scenario.expected_optimal()).ceil().max(10.0) as u32;

    let mut result = SimResult {
        completion_time: 0,
        per_slot_log: Vec::new(),
        per_receiver_beneficial: vec![0; scenario.receivers],
        oracle_divergences: 0,
        exact_fallbacks: 0,
    };
    let mut slot = 0u32;
    while !states.iter().all(ReceiverState::is_complete) {
        if slot >= limit {
            return Err(Error::NoProgress { slots: slot, limit });
        }
        let graph = build_graph(&states, scheduler.rules())?;
        let wg = WeightedGraph::with_policy(&graph, &states, policy)?;
        let clique = if scheduler.exact() {
            match max_weight_clique_exact_capped(&wg, opts.exact_cap) {
                Ok(c) => c,
                Err(Error::SizeCapExceeded { .. }) => {
                    result.exact_fallbacks += 1;
                    greedy_clique_search(&wg)
                }
                Err(e) => return Err(e),
            }
        } else {
            greedy_clique_search(&wg)
        };
        let combo = determine_combination(&clique, &graph, &states)?;
        let equation = opts.oracle.then(|| fresh_equation(combo, &mut coeff_rng));
        let delivered = channels.next_slot();
        let receptions = broadcast_and_update(&combo, equation.as_ref(), &mut states, &delivered)?;
        for (count, r) in result.per_receiver_beneficial.iter_mut().zip(&receptions) {
            if r.is_beneficial() {
                *count += 1;
            }
        }
        slot += 1;
        if receptions.iter().any(Reception::is_beneficial) {
            result.completion_time = slot;
        }
        if opts.keep_log {
            result.per_slot_log.push(SlotRecord {
                combo,
                clique_size: clique.len(),
                receptions,
            });
        }
    }
    result.oracle_divergences = states.iter().map(ReceiverState::oracle_divergences).sum();
    Ok(result)
}

/// Slots until every receiver has had as many deliveries as it initially
/// wants, on the same erasure draws the schedulers see. No linear code can
/// finish earlier on that trace.
pub fn optimal_lower_bound(scenario: &Scenario) -> Result<u32> {
    scenario.validate()?;
    let mut channels = ErasureChannels::new(scenario.seed, &scenario.epsilons);
    let mut need = scenario.demands();
    let mut slot = 0u32;
    while need.iter().any(|&w| w > 0) {
        for (w, ok) in need.iter_mut().zip(channels.next_slot()) {
            if ok && *w > 0 {
                *w -= 1;
            }
        }
        slot += 1;
    }
    Ok(slot)
}

/// One summary row of a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchRow {
    pub strategy: Strategy,
    pub seed: u64,
    pub receivers: usize,
    pub packets: usize,
    pub eps_mean: f64,
    pub completion_time: u32,
    pub beneficial_total: u64,
    pub oracle_divergences: u32,
}

/// Runs every (seed, strategy) pair; rows come back seed-major in the
/// order given, independent of scheduling across threads.
pub fn run_batch(
    template: &ScenarioTemplate,
    seeds: &[u64],
    strategies: &[Strategy],
    opts: &SimOptions,
) -> Result<Vec<BatchRow>> {
    if seeds.is_empty() || strategies.is_empty() {
        return Err(Error::Precondition(
            "batch needs at least one seed and one scheduler".into(),
        ));
    }
    let jobs: Vec<(u64, Strategy)> = seeds
        .iter()
        .flat_map(|&s| strategies.iter().map(move |&k| (s, k)))
        .collect();
    let opts = SimOptions {
        keep_log: false,
        ..*opts
    };
    jobs.par_iter()
        .map(|&(seed, strategy)| {
            let scenario = template.instantiate(seed)?;
            let (completion_time, beneficial_total, oracle_divergences) = match strategy {
                Strategy::Schedule(s) => {
                    let r = run_delivery(&scenario, s, &opts)?;
                    (
                        r.completion_time,
                        r.beneficial_total(),
                        r.oracle_divergences,
                    )
                }
                Strategy::OptimalLowerBound => (
                    optimal_lower_bound(&scenario)?,
                    scenario.demands().iter().map(|&d| d as u64).sum(),
                    0,
                ),
            };
            Ok(BatchRow {
                strategy,
                seed,
                receivers: scenario.receivers,
                packets: scenario.packets,
                eps_mean: template.eps_mean,
                completion_time,
                beneficial_total,
                oracle_divergences,
            })
        })
        .collect()
}
