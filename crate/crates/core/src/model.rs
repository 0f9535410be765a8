//! Game primitives: configuration, threshold strategies, grid functions and
//! the shared opponent-failure probability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

/// Per-player primitives: contact-rate cap and the reward ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
#[serde(deny_unknown_fields)]
pub struct PlayerParams<T> {
    /// Maximum Poisson contact rate (contacts per unit time).
    pub rate: T,
    /// Reward for winning lock `k` is `rewards[k - 1]`; length is the lock count `M`.
    pub rewards: Vec<T>,
}

/// The full game: horizon, acceleration price and one [`PlayerParams`] per player.
///
/// The JSON form is exactly the struct layout:
/// `{"horizon": T, "cost_factor": nu, "players": [{"rate": beta, "rewards": [c_1, ..., c_M]}, ...]}`.
/// The lock count is inferred from the reward vectors and must agree across players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
#[serde(deny_unknown_fields)]
pub struct GameConfig<T> {
    /// Deadline `T` after which no contact pays out.
    pub horizon: T,
    /// Price `nu` per unit of accumulated acceleration.
    pub cost_factor: T,
    pub players: Vec<PlayerParams<T>>,
}

/// A violated [`GameConfig`] invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigViolation {
    #[error("player count must be at least 1")]
    NoPlayers,
    #[error("horizon must be positive")]
    NonPositiveHorizon,
    #[error("cost_factor must be positive")]
    NonPositiveCostFactor,
    #[error("player {0}: rate must be positive")]
    NonPositiveRate(usize),
    #[error("player {0}: rewards must not be empty")]
    EmptyRewards(usize),
    #[error("player {player}: rewards length mismatch (got {got}, expected {expected})")]
    RewardsLengthMismatch { player: usize, got: usize, expected: usize },
    #[error("player {player}: reward for lock {lock} must be non-negative")]
    NegativeReward { player: usize, lock: usize },
    #[error("player {0}: parameters must be finite")]
    NonFinite(usize),
}

/// The full list of violated invariants of one [`GameConfig`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid game config: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigError {
    pub violations: Vec<ConfigViolation>,
}

impl<T: Real> GameConfig<T> {
    pub fn new(horizon: T, cost_factor: T, players: Vec<PlayerParams<T>>) -> Self {
        Self { horizon, cost_factor, players }
    }

    /// Convenience constructor for a symmetric game (shared rate and rewards).
    pub fn symmetric(n: usize, horizon: T, cost_factor: T, rate: T, rewards: Vec<T>) -> Self {
        let players = (0..n).map(|_| PlayerParams { rate, rewards: rewards.clone() }).collect();
        Self { horizon, cost_factor, players }
    }

    /// Number of players `n`.
    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    /// Number of locks `M`, inferred from the first player's reward ladder.
    pub fn num_locks(&self) -> usize {
        self.players.first().map_or(0, |p| p.rewards.len())
    }

    pub fn rate(&self, player: usize) -> T {
        self.players[player].rate
    }

    /// Reward `c_k` of `player` for lock `k` (1-based lock index).
    pub fn reward(&self, player: usize, lock: usize) -> T {
        self.players[player].rewards[lock - 1]
    }

    /// Collects every violated invariant; an empty list means the config is valid.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut out = Vec::new();
        if self.players.is_empty() {
            out.push(ConfigViolation::NoPlayers);
        }
        if self.horizon <= T::zero() || !self.horizon.is_finite() {
            out.push(ConfigViolation::NonPositiveHorizon);
        }
        if self.cost_factor <= T::zero() || !self.cost_factor.is_finite() {
            out.push(ConfigViolation::NonPositiveCostFactor);
        }
        let expected = self.num_locks();
        for (i, p) in self.players.iter().enumerate() {
            if p.rate <= T::zero() {
                // A NaN rate slips past this comparison; the finiteness
                // check below still rejects it.
                out.push(ConfigViolation::NonPositiveRate(i));
            }
            if p.rewards.is_empty() {
                out.push(ConfigViolation::EmptyRewards(i));
            } else if p.rewards.len() != expected {
                out.push(ConfigViolation::RewardsLengthMismatch {
                    player: i,
                    got: p.rewards.len(),
                    expected,
                });
            }
            for (k, &c) in p.rewards.iter().enumerate() {
                if c < T::zero() {
                    out.push(ConfigViolation::NegativeReward { player: i, lock: k + 1 });
                }
            }
            if !p.rate.is_finite() || p.rewards.iter().any(|c| !c.is_finite()) {
                out.push(ConfigViolation::NonFinite(i));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations })
        }
    }
}

/// An argument fell outside the interval a function is defined on.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{what} = {value} outside [{lo}, {hi}]")]
pub struct DomainError {
    pub what: &'static str,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl DomainError {
    fn new<T: Real>(what: &'static str, value: T, lo: T, hi: T) -> Self {
        Self {
            what,
            value: value.to_f64().unwrap_or(f64::NAN),
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// Open-loop policy running at the full rate from `start` until `threshold`,
/// then silent; silent everywhere if `start > threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy<T> {
    pub threshold: T,
    pub start: T,
}

impl<T: Real> ThresholdPolicy<T> {
    pub fn new(threshold: T, start: T) -> Self {
        Self { threshold, start }
    }

    /// Instantaneous rate at time `t` for a player capped at `beta`.
    pub fn rate_at(&self, t: T, beta: T) -> T {
        if self.start <= t && t <= self.threshold {
            beta
        } else {
            T::zero()
        }
    }

    /// Accumulated acceleration `beta * max(0, min(t, threshold) - start)`.
    pub fn accumulated(&self, t: T, beta: T) -> T {
        let active = (t.min(self.threshold) - self.start).max(T::zero());
        beta * active
    }
}

/// One player's M-threshold strategy: one absolute time threshold per lock.
///
/// Lock `k` is attempted from the previous contact epoch until `thresholds[k-1]`;
/// a previous contact after that threshold means the lock is never attempted.
#[derive(Debug, Clone, PartialEq)]
pub struct MTStrategy<T> {
    pub thresholds: Vec<T>,
}

impl<T: Real> MTStrategy<T> {
    pub fn new(thresholds: Vec<T>) -> Self {
        Self { thresholds }
    }

    /// Threshold for lock `k` (1-based).
    pub fn theta(&self, lock: usize) -> T {
        self.thresholds[lock - 1]
    }

    fn valid_against(&self, cfg: &GameConfig<T>) -> bool {
        self.thresholds.len() == cfg.num_locks()
            && self
                .thresholds
                .iter()
                .all(|&th| th >= T::zero() && th <= cfg.horizon && th.is_finite())
    }
}

/// One [`MTStrategy`] per player.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile<T> {
    pub strategies: Vec<MTStrategy<T>>,
}

impl<T: Real> StrategyProfile<T> {
    pub fn new(strategies: Vec<MTStrategy<T>>) -> Self {
        Self { strategies }
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn theta(&self, player: usize, lock: usize) -> T {
        self.strategies[player].theta(lock)
    }

    /// First-lock thresholds of everyone but `player`.
    pub fn opponent_first_thresholds(&self, player: usize) -> Vec<T> {
        self.strategies
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != player)
            .map(|(_, s)| s.theta(1))
            .collect()
    }

    /// Shape/range check against `cfg` (player count, lock count, thresholds in `[0, T]`).
    pub fn validate(&self, cfg: &GameConfig<T>) -> Result<(), DomainError> {
        if self.strategies.len() != cfg.num_players()
            || self.strategies.iter().any(|s| !s.valid_against(cfg))
        {
            return Err(DomainError {
                what: "strategy profile shape or threshold range",
                value: f64::NAN,
                lo: 0.0,
                hi: cfg.horizon.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

/// Local information of one player: the success flag of the latest contact and
/// the epoch of the previous contact (`None` before the first one).
///
/// A cleared flag is absorbing: the player has permanently stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerState<T> {
    pub flag: bool,
    pub last_contact: Option<T>,
}

impl<T: Real> PlayerState<T> {
    /// Initial state: flagged successful at epoch zero by convention.
    pub fn initial() -> Self {
        Self { flag: true, last_contact: None }
    }
}

/// A real function on a uniform grid over `[lo, hi]`, evaluated by linear
/// interpolation.  Carrier for continuation-value curves and empirical CDFs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    lo: T,
    hi: T,
    values: Vec<T>,
}

impl<T: Real> SampledFunction<T> {
    /// Wraps `values` as samples at `grid_size` uniform abscissae over `[lo, hi]`.
    pub fn new(lo: T, hi: T, values: Vec<T>) -> Self {
        assert!(values.len() >= 2, "grid needs at least two points");
        assert!(hi > lo, "domain must have positive length");
        Self { lo, hi, values }
    }

    /// Samples `f` at `grid_size` uniform abscissae over `[lo, hi]`.
    pub fn from_fn(lo: T, hi: T, grid_size: usize, mut f: impl FnMut(T) -> T) -> Self {
        assert!(grid_size >= 2, "grid needs at least two points");
        let values = (0..grid_size).map(|i| f(Self::abscissa_for(lo, hi, grid_size, i))).collect();
        Self::new(lo, hi, values)
    }

    fn abscissa_for(lo: T, hi: T, n: usize, i: usize) -> T {
        // Exact at both endpoints: the last ratio is exactly 1.
        let frac = T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap();
        lo + (hi - lo) * frac
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn domain(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    /// Grid spacing `(hi - lo) / (grid_size - 1)`.
    pub fn spacing(&self) -> T {
        (self.hi - self.lo) / T::from_usize(self.values.len() - 1).unwrap()
    }

    /// The `i`-th abscissa; exact at both endpoints.
    pub fn abscissa(&self, i: usize) -> T {
        Self::abscissa_for(self.lo, self.hi, self.values.len(), i)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Linear interpolation between the bracketing grid points.
    pub fn eval(&self, t: T) -> Result<T, DomainError> {
        if !(t >= self.lo && t <= self.hi) {
            return Err(DomainError::new("t", t, self.lo, self.hi));
        }
        let n = self.values.len();
        let pos = (t - self.lo) / (self.hi - self.lo) * T::from_usize(n - 1).unwrap();
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        let w = pos - T::from_usize(i).unwrap();
        // At a grid abscissa the weight is 0 (or 1 at the right edge) and the
        // stored value is reproduced exactly.
        Ok(self.values[i] + (self.values[i + 1] - self.values[i]) * w)
    }
}

/// Probability that no opponent of `player` has contacted the first lock by
/// time `t`, under the first-lock thresholds in `profile`:
/// `exp(-sum_{m != player} beta^m * min(t, theta^m_1))`.
///
/// For locks beyond the first the race is already decided and callers use the
/// constant 1 instead.
pub fn eta_first_lock<T: Real>(
    t: T,
    player: usize,
    profile: &StrategyProfile<T>,
    cfg: &GameConfig<T>,
) -> Result<T, DomainError> {
    if !(t >= T::zero() && t <= cfg.horizon) {
        return Err(DomainError::new("t", t, T::zero(), cfg.horizon));
    }
    Ok(eta_from_thresholds(t, &opponent_rate_thresholds(player, profile, cfg)))
}

/// `(rate, first-lock threshold)` pairs of everyone but `player`.
pub(crate) fn opponent_rate_thresholds<T: Real>(
    player: usize,
    profile: &StrategyProfile<T>,
    cfg: &GameConfig<T>,
) -> Vec<(T, T)> {
    (0..cfg.num_players())
        .filter(|&m| m != player)
        .map(|m| (cfg.rate(m), profile.theta(m, 1)))
        .collect()
}

/// `exp(-sum_m beta^m * min(t, theta^m))` over the given opponent pairs.
pub(crate) fn eta_from_thresholds<T: Real>(t: T, opponents: &[(T, T)]) -> T {
    let exponent: T = opponents.iter().map(|&(beta, theta)| beta * t.min(theta)).sum();
    (-exponent).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_player_cfg() -> GameConfig<f64> {
        GameConfig::symmetric(2, 10.0, 0.5, 1.0, vec![1.0])
    }

    #[test]
    fn valid_config_has_no_violations() {
        assert!(two_player_cfg().violations().is_empty());
        assert!(two_player_cfg().validate().is_ok());
    }

    #[test]
    fn zero_cost_factor_is_rejected() {
        let mut cfg = two_player_cfg();
        cfg.cost_factor = 0.0;
        let errs = cfg.violations();
        assert_eq!(errs, vec![ConfigViolation::NonPositiveCostFactor]);
        assert!(errs[0].to_string().contains("cost_factor must be positive"));
    }

    #[test]
    fn rewards_length_mismatch_is_reported() {
        let cfg = GameConfig::new(
            5.0,
            1.0,
            vec![
                PlayerParams { rate: 1.0, rewards: vec![1.0, 1.0, 1.0, 1.0] },
                PlayerParams { rate: 1.0, rewards: vec![1.0, 1.0, 1.0] },
            ],
        );
        assert!(cfg
            .violations()
            .contains(&ConfigViolation::RewardsLengthMismatch { player: 1, got: 3, expected: 4 }));
    }

    #[test]
    fn violations_accumulate() {
        let cfg: GameConfig<f64> = GameConfig::new(-1.0, 0.0, vec![]);
        let errs = cfg.violations();
        assert!(errs.contains(&ConfigViolation::NoPlayers));
        assert!(errs.contains(&ConfigViolation::NonPositiveHorizon));
        assert!(errs.contains(&ConfigViolation::NonPositiveCostFactor));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = GameConfig::symmetric(2, 8.0, 1.0, 1.0, vec![1.0, 3.0]);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: GameConfig<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);

        let doc = r#"{"horizon": 8.0, "cost_factor": 1.0,
                      "players": [{"rate": 1.0, "rewards": [1, 3, 3, 3, 3]}]}"#;
        let parsed: GameConfig<f64> = serde_json::from_str(doc).unwrap();
        assert_eq!(parsed.num_locks(), 5);
        assert!(serde_json::from_str::<GameConfig<f64>>(r#"{"horizon": 1.0}"#).is_err());
    }

    #[test]
    fn eta_with_no_opponents_is_one() {
        let cfg = GameConfig::symmetric(1, 10.0, 0.5, 1.0, vec![1.0]);
        let profile = StrategyProfile::new(vec![MTStrategy::new(vec![10.0])]);
        for t in [0.0, 3.0, 10.0] {
            assert_eq!(eta_first_lock(t, 0, &profile, &cfg).unwrap(), 1.0);
        }
    }

    #[test]
    fn eta_matches_exponential_and_clamps_at_opponent_threshold() {
        let cfg = two_player_cfg();
        let profile =
            StrategyProfile::new(vec![MTStrategy::new(vec![10.0]), MTStrategy::new(vec![2.0])]);
        // Opponent of player 0 has beta = 1, theta_1 = 2.
        assert_relative_eq!(
            eta_first_lock(1.0, 0, &profile, &cfg).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eta_first_lock(5.0, 0, &profile, &cfg).unwrap(),
            (-2.0f64).exp(),
            max_relative = 1e-14
        );
        assert_eq!(eta_first_lock(0.0, 0, &profile, &cfg).unwrap(), 1.0);
        assert!(eta_first_lock(10.5, 0, &profile, &cfg).is_err());
        assert!(eta_first_lock(-0.1, 0, &profile, &cfg).is_err());
    }

    #[test]
    fn sampled_function_reproduces_grid_values_exactly() {
        let f = SampledFunction::from_fn(0.0, 8.0, 2001, |t: f64| (t * 0.37).sin());
        for i in [0usize, 1, 777, 1999, 2000] {
            let x = f.abscissa(i);
            assert_eq!(f.eval(x).unwrap(), f.values()[i]);
        }
        assert_eq!(f.abscissa(2000), 8.0);
        assert!(f.eval(8.0 + 1e-12).is_err());
        assert!(f.eval(-1e-12).is_err());
    }

    #[test]
    fn threshold_policy_silent_when_start_past_threshold() {
        let p = ThresholdPolicy::new(1.0, 2.0);
        assert_eq!(p.rate_at(2.5, 3.0), 0.0);
        assert_eq!(p.accumulated(5.0, 3.0), 0.0);
    }

    proptest! {
        #[test]
        fn eta_is_non_increasing_positive_and_flat_past_thresholds(
            theta in 0.0f64..10.0,
            beta in 0.1f64..3.0,
        ) {
            let cfg = GameConfig::new(
                10.0,
                0.5,
                vec![
                    PlayerParams { rate: 1.0, rewards: vec![1.0] },
                    PlayerParams { rate: beta, rewards: vec![1.0] },
                ],
            );
            let profile = StrategyProfile::new(vec![
                MTStrategy::new(vec![10.0]),
                MTStrategy::new(vec![theta]),
            ]);
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let t = 10.0 * i as f64 / 100.0;
                let e = eta_first_lock(t, 0, &profile, &cfg).unwrap();
                prop_assert!(e > 0.0);
                prop_assert!(e <= prev + 1e-15);
                if t >= theta {
                    prop_assert!((e - (-beta * theta).exp()).abs() < 1e-12);
                }
                prev = e;
            }
        }

        #[test]
        fn interpolation_stays_within_segment_bounds(
            vals in proptest::collection::vec(-5.0f64..5.0, 2..40),
            q in 0.0f64..1.0,
        ) {
            let f = SampledFunction::new(0.0, 1.0, vals.clone());
            let t = q;
            let y = f.eval(t).unwrap();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }

        #[test]
        fn threshold_policy_accumulation_is_exact(
            s in 0.0f64..5.0, th in 0.0f64..5.0, t in 0.0f64..5.0, beta in 0.1f64..2.0,
        ) {
            let p = ThresholdPolicy::new(th, s);
            // Riemann check of the rate function.
            let steps = 20_000;
            let dt = t / steps as f64;
            let riemann: f64 = (0..steps)
                .map(|i| p.rate_at((i as f64 + 0.5) * dt, beta) * dt)
                .sum();
            prop_assert!((riemann - p.accumulated(t, beta)).abs() < 1e-3);
        }
    }
}
