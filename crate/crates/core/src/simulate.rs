//! Seedable Monte Carlo engine for the acquisition race.
//!
//! Episodes draw raw inter-contact times from each player's exponential
//! clock, apply the threshold semantics (the clock runs at the full rate from
//! the previous contact until the stage threshold, then falls silent), decide
//! the first lock by strictly-earliest valid contact, and let the winner run
//! the remaining locks uncontested.  A player that contacts the first lock
//! late pays for its own acceleration up to that contact and stops; a player
//! that never contacts pays up to its threshold.
//!
//! Randomness comes from counter-based substreams: episode `e`, player `m`
//! reads stream `e * n + m` of a ChaCha generator keyed by the run seed, so
//! estimates are bit-reproducible regardless of scheduling, and deviation
//! tests reuse identical randomness across candidates (common random
//! numbers).

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{GameConfig, PlayerState, SampledFunction, StrategyProfile, ThresholdPolicy};
use crate::oracle::PiecewiseConstantControl;
use crate::{real, Real};

/// Why a player stopped attempting locks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Acquired every lock.
    CompletedAllLocks,
    /// Contacted the first lock in time, but someone else was strictly first.
    LostFirstLock,
    /// A stage threshold passed without a contact (or the previous contact
    /// already sat past it).
    ThresholdExpired,
    /// The horizon cut an attempt before its stage threshold did.
    HorizonExpired,
}

/// One player's realized episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerOutcome<T> {
    /// Realized rewards minus `nu` times the accumulated acceleration.
    pub payoff: T,
    /// Locks successfully acquired, `0..=M`.
    pub stage_reached: usize,
    /// Epoch of the player's own first-lock contact, if one happened in time.
    pub first_contact: Option<T>,
    pub stop: StopReason,
    /// Accumulated acceleration over the whole episode.
    pub accumulated: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome<T> {
    pub players: Vec<PlayerOutcome<T>>,
    pub first_lock_winner: Option<usize>,
    /// Set when the winner was decided by the lowest-index rule on an exact
    /// floating-point tie of contact epochs.
    pub tie_broken: bool,
}

/// Per-player payoff means and standard errors over independent episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffEstimate<T> {
    pub means: Vec<T>,
    /// Sample standard deviation divided by `sqrt(episodes)`.
    pub std_errors: Vec<T>,
    pub episodes: usize,
    pub seed: u64,
}

#[inline]
fn unit_uniform<T: Real>(rng: &mut impl RngCore) -> T {
    // 53 mantissa bits, uniform on [0, 1).
    real((rng.next_u64() >> 11) as f64 / 9007199254740992.0)
}

#[inline]
fn sample_exp<T: Real>(rng: &mut impl RngCore, rate: T) -> T {
    let u: T = unit_uniform(rng);
    -(T::one() - u).ln() / rate
}

/// The ChaCha substreams for one episode, one per player.
pub fn episode_rngs(seed: u64, episode: u64, players: usize) -> Vec<ChaCha8Rng> {
    (0..players)
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(episode * players as u64 + m as u64);
            rng
        })
        .collect()
}

/// Plays one episode of the race under `profile`, drawing from one
/// independent stream per player.
pub fn simulate_episode<T: Real, R: RngCore>(
    profile: &StrategyProfile<T>,
    cfg: &GameConfig<T>,
    rngs: &mut [R],
) -> EpisodeOutcome<T> {
    let n = cfg.num_players();
    let locks = cfg.num_locks();
    let horizon = cfg.horizon;
    let nu = cfg.cost_factor;
    debug_assert_eq!(rngs.len(), n);

    // First lock: everyone races. A contact is valid when it lands at or
    // before both the player's threshold and the horizon.
    let mut contacts: Vec<Option<T>> = Vec::with_capacity(n);
    let mut accumulated: Vec<T> = Vec::with_capacity(n);
    for (i, rng) in rngs.iter_mut().enumerate() {
        let beta = cfg.rate(i);
        let theta1 = profile.theta(i, 1);
        if theta1 <= T::zero() {
            contacts.push(None);
            accumulated.push(T::zero());
            continue;
        }
        let raw = sample_exp(rng, beta);
        let cutoff = theta1.min(horizon);
        if raw <= cutoff {
            contacts.push(Some(raw));
            accumulated.push(beta * raw);
        } else {
            contacts.push(None);
            accumulated.push(beta * cutoff);
        }
    }

    let mut winner: Option<(usize, T)> = None;
    let mut tie_broken = false;
    for (i, &contact) in contacts.iter().enumerate() {
        if let Some(t) = contact {
            match winner {
                None => winner = Some((i, t)),
                Some((_, best)) if t < best => winner = Some((i, t)),
                Some((_, best)) if t == best => tie_broken = true,
                _ => {}
            }
        }
    }

    let mut players = Vec::with_capacity(n);
    for i in 0..n {
        let beta = cfg.rate(i);
        let mut acc = accumulated[i];
        let outcome = match (contacts[i], winner) {
            (Some(t), Some((w, _))) if w == i => {
                // Winner: locks 2..=M are uncontested.
                let mut state = PlayerState { flag: true, last_contact: Some(t) };
                let mut payoff = cfg.reward(i, 1);
                let mut stage = 1usize;
                let mut stop = StopReason::CompletedAllLocks;
                for k in 2..=locks {
                    let theta_k = profile.theta(i, k);
                    let tau = state.last_contact.unwrap();
                    if tau >= theta_k {
                        stop = StopReason::ThresholdExpired;
                        break;
                    }
                    let cutoff = theta_k.min(horizon);
                    let raw = tau + sample_exp(&mut rngs[i], beta);
                    if raw <= cutoff {
                        acc += beta * (raw - tau);
                        payoff += cfg.reward(i, k);
                        stage = k;
                        state.last_contact = Some(raw);
                    } else {
                        acc += beta * (cutoff - tau);
                        stop = if theta_k < horizon {
                            StopReason::ThresholdExpired
                        } else {
                            StopReason::HorizonExpired
                        };
                        break;
                    }
                }
                PlayerOutcome {
                    payoff: payoff - nu * acc,
                    stage_reached: stage,
                    first_contact: Some(t),
                    stop,
                    accumulated: acc,
                }
            }
            (Some(t), _) => PlayerOutcome {
                // Valid but late: the contact reveals the loss, no further cost.
                payoff: -nu * acc,
                stage_reached: 0,
                first_contact: Some(t),
                stop: StopReason::LostFirstLock,
                accumulated: acc,
            },
            (None, _) => PlayerOutcome {
                payoff: -nu * acc,
                stage_reached: 0,
                first_contact: None,
                stop: if profile.theta(i, 1) < horizon {
                    StopReason::ThresholdExpired
                } else {
                    StopReason::HorizonExpired
                },
                accumulated: acc,
            },
        };
        players.push(outcome);
    }

    EpisodeOutcome { players, first_lock_winner: winner.map(|(i, _)| i), tie_broken }
}

/// Mean and standard error of each player's payoff over `episodes`
/// independent episodes; bit-reproducible for a fixed seed.
pub fn estimate_payoffs<T: Real>(
    profile: &StrategyProfile<T>,
    cfg: &GameConfig<T>,
    episodes: usize,
    seed: u64,
) -> PayoffEstimate<T> {
    assert!(episodes >= 1);
    cfg.validate().expect("valid config");
    profile.validate(cfg).expect("profile shaped for config");
    let n = cfg.num_players();

    let flat: Vec<T> = (0..episodes)
        .into_par_iter()
        .flat_map_iter(|e| {
            let mut rngs = episode_rngs(seed, e as u64, n);
            let outcome = simulate_episode(profile, cfg, &mut rngs);
            outcome.players.into_iter().map(|p| p.payoff).collect::<Vec<_>>()
        })
        .collect();

    let mut means = Vec::with_capacity(n);
    let mut std_errors = Vec::with_capacity(n);
    let count = T::from_usize(episodes).unwrap();
    for i in 0..n {
        let column: Vec<T> = (0..episodes).map(|e| flat[e * n + i]).collect();
        let mean = pairwise_sum(&column) / count;
        let se = if episodes >= 2 {
            let sq: Vec<T> = column.iter().map(|&x| (x - mean) * (x - mean)).collect();
            let var = pairwise_sum(&sq) / T::from_usize(episodes - 1).unwrap();
            (var / count).sqrt()
        } else {
            T::zero()
        };
        means.push(mean);
        std_errors.push(se);
    }
    PayoffEstimate { means, std_errors, episodes, seed }
}

/// Full per-episode outcomes, in episode order (for CSV dumps).
pub fn run_episodes<T: Real>(
    profile: &StrategyProfile<T>,
    cfg: &GameConfig<T>,
    episodes: usize,
    seed: u64,
) -> Vec<EpisodeOutcome<T>> {
    cfg.validate().expect("valid config");
    profile.validate(cfg).expect("profile shaped for config");
    let n = cfg.num_players();
    (0..episodes)
        .into_par_iter()
        .map(|e| {
            let mut rngs = episode_rngs(seed, e as u64, n);
            simulate_episode(profile, cfg, &mut rngs)
        })
        .collect()
}

/// Payoff estimates for `player` deviating to each candidate first-lock
/// threshold, holding everyone else at `profile`.  All candidates replay the
/// same per-(episode, player) substreams, so comparisons are common-random-
/// numbers paired.
pub fn deviation_test_mc<T: Real>(
    profile: &StrategyProfile<T>,
    cfg: &GameConfig<T>,
    player: usize,
    candidate_thetas: &[T],
    episodes: usize,
    seed: u64,
) -> Vec<PayoffEstimate<T>> {
    candidate_thetas
        .iter()
        .map(|&theta| {
            assert!(
                theta >= T::zero() && theta <= cfg.horizon,
                "candidate threshold outside [0, horizon]"
            );
            let mut deviated = profile.clone();
            deviated.strategies[player].thresholds[0] = theta;
            estimate_payoffs(&deviated, cfg, episodes, seed)
        })
        .collect()
}

/// Anything that accumulates contact-rate mass over time and can be sampled
/// for a first contact by inverting that mass at a unit-exponential draw.
pub trait ContactProcess<T: Real> {
    /// Accumulated rate through time `t`.
    fn accumulated_by(&self, t: T) -> T;
    /// First time the accumulated rate reaches `mass`, if it ever does.
    fn contact_time(&self, mass: T) -> Option<T>;
}

/// A [`ThresholdPolicy`] paired with the rate cap it runs at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatedPolicy<T> {
    pub policy: ThresholdPolicy<T>,
    pub rate: T,
}

impl<T: Real> ContactProcess<T> for RatedPolicy<T> {
    fn accumulated_by(&self, t: T) -> T {
        self.policy.accumulated(t, self.rate)
    }

    fn contact_time(&self, mass: T) -> Option<T> {
        if mass <= T::zero() {
            return Some(self.policy.start);
        }
        let total = self.accumulated_by(self.policy.threshold.max(self.policy.start));
        if mass > total {
            None
        } else {
            Some(self.policy.start + mass / self.rate)
        }
    }
}

impl<T: Real> ContactProcess<T> for PiecewiseConstantControl<T> {
    fn accumulated_by(&self, t: T) -> T {
        self.accumulated(t).expect("t within the control span")
    }

    fn contact_time(&self, mass: T) -> Option<T> {
        self.invert_accumulated(mass)
    }
}

/// Empirical CDF of the first-contact epoch under `process`, sampled over
/// `episodes` seeded draws onto a `grid_size` grid over `[0, horizon]`.
pub fn empirical_cdf_first_contact<T: Real>(
    process: &impl ContactProcess<T>,
    cfg: &GameConfig<T>,
    episodes: usize,
    seed: u64,
    grid_size: usize,
) -> SampledFunction<T> {
    assert!(episodes >= 1);
    let horizon = cfg.horizon;
    let mut times: Vec<T> = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(e as u64);
        let mass = sample_exp(&mut rng, T::one());
        if let Some(t) = process.contact_time(mass) {
            if t <= horizon {
                times.push(t);
            }
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let count = T::from_usize(episodes).unwrap();
    let mut seen = 0usize;
    SampledFunction::from_fn(T::zero(), horizon, grid_size, |x| {
        while seen < times.len() && times[seen] <= x {
            seen += 1;
        }
        T::from_usize(seen).unwrap() / count
    })
}

fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= 16 {
        xs.iter().copied().fold(T::zero(), |a, b| a + b)
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
