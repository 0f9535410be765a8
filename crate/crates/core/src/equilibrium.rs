//! The reduced first-lock game and its unique Nash equilibrium.
//!
//! With the thresholds for locks `2..=M` fixed per player by the backward
//! recursion, each player only chooses its first-lock threshold, with utility
//!
//! ```text
//! gamma_i(theta) = int_0^theta ((c_1 + U2_i(t)) eta_i(t) - nu) beta_i e^{-beta_i t} dt,
//! ```
//!
//! where `eta_i` is the probability that no opponent has contacted the first
//! lock yet.  The game is strictly diagonally concave, so the equilibrium is
//! the unique simultaneous solution of
//!
//! ```text
//! theta_1_i = inf { t : (U2_i(t) + c_1_i) exp(-sum_{m != i} beta_m (t ^ theta_1_m)) <= nu } ^ T,
//! ```
//!
//! which [`solve_equilibrium`] finds by Gauss-Seidel best-response sweeps
//! (each update a single-crossing bisection).  [`asymptotic_equilibrium`]
//! evaluates the large-horizon closed forms used to cross-check the solver,
//! and [`verify_equilibrium`] certifies the Nash property by brute-force
//! deviation sweeps.

use thiserror::Error;

use crate::model::{
    eta_from_thresholds, ConfigError, DomainError, GameConfig, MTStrategy, SampledFunction,
    StrategyProfile,
};
use crate::quad::{integrate_breakpoints, merge_breakpoints};
use crate::recursion::{
    backward_recursion, stage_values_given, ContinuationValues, DEFAULT_GRID_SIZE,
};
use crate::{real, Real};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;

/// Knobs for [`solve_equilibrium`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    pub grid_size: usize,
    /// Convergence threshold on the max first-lock threshold update per sweep.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID_SIZE,
            tolerance: real(DEFAULT_TOLERANCE),
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// A solved equilibrium: the profile, the per-player continuation data it was
/// built from, and convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult<T> {
    pub profile: StrategyProfile<T>,
    pub continuation: Vec<ContinuationValues<T>>,
    pub iterations: usize,
    pub final_update_norm: T,
    pub converged: bool,
}

#[derive(Debug, Error)]
pub enum SolveError<T: Real> {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// The sweep did not contract below tolerance; carries the last iterate
    /// rather than silently returning a partial answer.
    #[error("no convergence after {iterations} sweeps (last update norm {update_norm})")]
    NonConvergence { iterations: usize, update_norm: T, last: StrategyProfile<T> },
}

/// First-lock stage utility `gamma_i(theta)` against the given opponent
/// first-lock thresholds (player-index order, excluding `player`).
pub fn gamma_first_lock<T: Real>(
    theta: T,
    player: usize,
    opp_first_thresholds: &[T],
    cv: &ContinuationValues<T>,
    cfg: &GameConfig<T>,
) -> Result<T, DomainError> {
    check_theta(theta, cfg.horizon)?;
    assert_eq!(cv.player(), player, "continuation values belong to the acting player");
    let opponents = opponent_pairs(player, opp_first_thresholds, cfg);
    Ok(gamma_integral(
        theta,
        cfg.reward(player, 1),
        cfg.cost_factor,
        cfg.rate(player),
        &opponents,
        cv.upsilon2_curve(),
        cfg.horizon,
    ))
}

/// Closed-form derivative of `gamma_i` at `theta`:
/// `((c_1 + U2(theta)) eta(theta) - nu) beta e^{-beta theta}`.
pub fn gamma_derivative<T: Real>(
    theta: T,
    player: usize,
    opp_first_thresholds: &[T],
    cv: &ContinuationValues<T>,
    cfg: &GameConfig<T>,
) -> Result<T, DomainError> {
    check_theta(theta, cfg.horizon)?;
    assert_eq!(cv.player(), player, "continuation values belong to the acting player");
    let opponents = opponent_pairs(player, opp_first_thresholds, cfg);
    let beta = cfg.rate(player);
    let eta = eta_from_thresholds(theta, &opponents);
    let d = (cfg.reward(player, 1) + cv.upsilon2(theta)) * eta - cfg.cost_factor;
    Ok(d * beta * (-beta * theta).exp())
}

/// Best-response first-lock threshold: the single crossing of
/// `(U2(t) + c_1) eta(t)` with `nu`, by bisection to `1e-10`; `0` when the
/// crossing condition already holds at the origin, `T` when it never does.
pub fn best_response_first_threshold<T: Real>(
    player: usize,
    opp_first_thresholds: &[T],
    cv: &ContinuationValues<T>,
    cfg: &GameConfig<T>,
) -> T {
    assert_eq!(cv.player(), player, "continuation values belong to the acting player");
    let opponents = opponent_pairs(player, opp_first_thresholds, cfg);
    let c1 = cfg.reward(player, 1);
    let nu = cfg.cost_factor;
    let margin = |t: T| (cv.upsilon2(t) + c1) * eta_from_thresholds(t, &opponents) - nu;
    if margin(T::zero()) <= T::zero() {
        return T::zero();
    }
    if margin(cfg.horizon) > T::zero() {
        return cfg.horizon;
    }
    let tol = real::<T>(1e-10);
    let half = real::<T>(0.5);
    let mut lo = T::zero();
    let mut hi = cfg.horizon;
    let mut guard = 0;
    while hi - lo > tol && guard < 200 {
        let mid = (lo + hi) * half;
        if margin(mid) <= T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        guard += 1;
    }
    hi
}

/// Solves the fixed point by Gauss-Seidel sweeps of best responses, starting
/// from maximal aggression (`theta_1 = T` for everyone).  Damping at factor
/// one half engages automatically once the update norm has failed to decrease
/// for ten consecutive sweeps.
pub fn solve_equilibrium<T: Real>(
    cfg: &GameConfig<T>,
    opts: &SolveOptions<T>,
) -> Result<EquilibriumResult<T>, SolveError<T>> {
    cfg.validate()?;
    let n = cfg.num_players();
    let continuation: Vec<ContinuationValues<T>> =
        (0..n).map(|i| backward_recursion(cfg, i, opts.grid_size)).collect::<Result<_, _>>()?;

    let mut theta1 = vec![cfg.horizon; n];
    let half = real::<T>(0.5);
    let mut damped = false;
    let mut stall = 0usize;
    let mut prev_norm = T::infinity();

    for sweep in 1..=opts.max_iterations {
        let mut norm = T::zero();
        for i in 0..n {
            let opp: Vec<T> = (0..n).filter(|&m| m != i).map(|m| theta1[m]).collect();
            let br = best_response_first_threshold(i, &opp, &continuation[i], cfg);
            let new = if damped { theta1[i] * half + br * half } else { br };
            norm = norm.max((new - theta1[i]).abs());
            theta1[i] = new;
        }
        if norm <= opts.tolerance {
            let profile = assemble_profile(&theta1, &continuation);
            return Ok(EquilibriumResult {
                profile,
                continuation,
                iterations: sweep,
                final_update_norm: norm,
                converged: true,
            });
        }
        if norm >= prev_norm {
            stall += 1;
            if stall >= 10 {
                damped = true;
            }
        } else {
            stall = 0;
        }
        prev_norm = norm;
    }

    Err(SolveError::NonConvergence {
        iterations: opts.max_iterations,
        update_norm: prev_norm,
        last: assemble_profile(&theta1, &continuation),
    })
}

fn assemble_profile<T: Real>(
    theta1: &[T],
    continuation: &[ContinuationValues<T>],
) -> StrategyProfile<T> {
    let strategies = theta1
        .iter()
        .zip(continuation)
        .map(|(&t1, cv)| {
            let mut thresholds = Vec::with_capacity(cv.thresholds().len() + 1);
            thresholds.push(t1);
            thresholds.extend_from_slice(cv.thresholds());
            MTStrategy::new(thresholds)
        })
        .collect();
    StrategyProfile::new(strategies)
}

/// Max over players of `|best_response(theta*) - theta_1*|`: how far the
/// returned profile is from being a simultaneous fixed point.
pub fn fixed_point_residual<T: Real>(result: &EquilibriumResult<T>, cfg: &GameConfig<T>) -> T {
    let n = cfg.num_players();
    let mut worst = T::zero();
    for i in 0..n {
        let opp = result.profile.opponent_first_thresholds(i);
        let br = best_response_first_threshold(i, &opp, &result.continuation[i], cfg);
        worst = worst.max((br - result.profile.theta(i, 1)).abs());
    }
    worst
}

/// Expected utility of `player` under an arbitrary M-threshold profile: the
/// stage-utility integral with the continuation curves computed for the
/// *given* thresholds.  Semi-analytic counterpart of the Monte Carlo
/// estimator.
pub fn semi_analytic_utility<T: Real>(
    profile: &StrategyProfile<T>,
    cfg: &GameConfig<T>,
    player: usize,
    grid_size: usize,
) -> T {
    let curves = stage_values_given(cfg, player, &profile.strategies[player].thresholds, grid_size);
    let opponents: Vec<(T, T)> = (0..cfg.num_players())
        .filter(|&m| m != player)
        .map(|m| (cfg.rate(m), profile.theta(m, 1)))
        .collect();
    gamma_integral(
        profile.theta(player, 1),
        cfg.reward(player, 1),
        cfg.cost_factor,
        cfg.rate(player),
        &opponents,
        curves.first(),
        cfg.horizon,
    )
}

fn check_theta<T: Real>(theta: T, horizon: T) -> Result<(), DomainError> {
    if theta >= T::zero() && theta <= horizon {
        Ok(())
    } else {
        Err(DomainError {
            what: "theta",
            value: theta.to_f64().unwrap_or(f64::NAN),
            lo: 0.0,
            hi: horizon.to_f64().unwrap_or(f64::NAN),
        })
    }
}

fn opponent_pairs<T: Real>(
    player: usize,
    opp_first_thresholds: &[T],
    cfg: &GameConfig<T>,
) -> Vec<(T, T)> {
    let rates: Vec<T> =
        (0..cfg.num_players()).filter(|&m| m != player).map(|m| cfg.rate(m)).collect();
    assert_eq!(
        rates.len(),
        opp_first_thresholds.len(),
        "one first-lock threshold per opponent, in player-index order"
    );
    rates.into_iter().zip(opp_first_thresholds.iter().copied()).collect()
}

/// Simpson quadrature of the stage-utility integrand on `[0, theta]`, with
/// forced panel boundaries at every opponent threshold (kinks of eta) and at
/// every grid abscissa of the continuation curve.
fn gamma_integral<T: Real>(
    theta: T,
    c1: T,
    nu: T,
    beta: T,
    opponents: &[(T, T)],
    upsilon2: Option<&SampledFunction<T>>,
    horizon: T,
) -> T {
    if theta <= T::zero() {
        return T::zero();
    }
    let h_target = match upsilon2 {
        Some(curve) => curve.spacing(),
        None => horizon / T::from_usize(DEFAULT_GRID_SIZE - 1).unwrap(),
    };
    let kinks = opponents.iter().map(|&(_, th)| th);
    let breaks: Vec<T> = match upsilon2 {
        Some(curve) => {
            let n = curve.grid_size();
            merge_breakpoints(
                T::zero(),
                theta,
                kinks.chain((0..n).map(|j| curve.abscissa(j))),
            )
        }
        None => merge_breakpoints(T::zero(), theta, kinks),
    };
    let mut f = |t: T| {
        let cont = upsilon2.map_or(T::zero(), |c| c.eval(t).expect("t within horizon"));
        ((c1 + cont) * eta_from_thresholds(t, opponents) - nu) * beta * (-beta * t).exp()
    };
    integrate_breakpoints(&mut f, &breaks, h_target)
}

// ---------------------------------------------------------------------------
// Large-horizon closed forms
// ---------------------------------------------------------------------------

/// Which large-horizon closed form produced an [`AsymptoticEquilibrium`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticBranch {
    /// Identical players; handles unprofitable tail locks through the
    /// effective-lock-count recursion.
    Symmetric,
    /// Player-wise monotone rewards with every lock profitable for the
    /// weakest player.
    Monotone,
}

/// Large-horizon approximate equilibrium plus applicability flags.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticEquilibrium<T> {
    pub profile: StrategyProfile<T>,
    pub branch: AsymptoticBranch,
    /// Whether the solved first-lock thresholds are non-increasing in player
    /// index, the ordering the monotone derivation assumes.
    pub theta1_monotone: bool,
}

#[derive(Debug, Error)]
pub enum AsymptoticError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("large-horizon closed forms not applicable: {}", .reasons.join("; "))]
    Inapplicable { reasons: Vec<String> },
}

/// Evaluates the applicable large-horizon closed form: the symmetric branch
/// for identical players, otherwise the monotone branch.  Both require equal
/// contact-rate caps.
pub fn asymptotic_equilibrium<T: Real>(
    cfg: &GameConfig<T>,
) -> Result<AsymptoticEquilibrium<T>, AsymptoticError> {
    cfg.validate()?;
    let mut reasons = Vec::new();
    let beta = cfg.rate(0);
    if (1..cfg.num_players()).any(|i| cfg.rate(i) != beta) {
        reasons.push("contact-rate caps must be equal across players".to_string());
    }
    let symmetric =
        (1..cfg.num_players()).all(|i| cfg.players[i].rewards == cfg.players[0].rewards);
    if reasons.is_empty() && symmetric {
        return asymptotic_symmetric(cfg);
    }
    match asymptotic_monotone(cfg) {
        Ok(r) if reasons.is_empty() => Ok(r),
        Ok(_) => Err(AsymptoticError::Inapplicable { reasons }),
        Err(AsymptoticError::Inapplicable { reasons: mut more }) => {
            reasons.append(&mut more);
            Err(AsymptoticError::Inapplicable { reasons })
        }
        Err(e) => Err(e),
    }
}

/// Symmetric large-horizon branch.  Walking locks backward, a lock is kept
/// (threshold `T`) while the net reward of the surviving suffix stays
/// non-negative, otherwise dropped (threshold `0`); the first-lock threshold
/// then solves `(csum - (m - 1) nu) e^{-(n-1) beta t} = nu` on the surviving
/// prefix sum, clamped to `[0, T]`.
pub fn asymptotic_symmetric<T: Real>(
    cfg: &GameConfig<T>,
) -> Result<AsymptoticEquilibrium<T>, AsymptoticError> {
    cfg.validate()?;
    let mut reasons = Vec::new();
    let beta = cfg.rate(0);
    if (1..cfg.num_players()).any(|i| cfg.rate(i) != beta) {
        reasons.push("contact-rate caps must be equal across players".to_string());
    }
    if (1..cfg.num_players()).any(|i| cfg.players[i].rewards != cfg.players[0].rewards) {
        reasons.push("reward vectors must be identical across players".to_string());
    }
    if !reasons.is_empty() {
        return Err(AsymptoticError::Inapplicable { reasons });
    }

    let locks = cfg.num_locks();
    let nu = cfg.cost_factor;
    let horizon = cfg.horizon;
    let c = |k: usize| cfg.reward(0, k);
    let csum = |from: usize, to: usize| -> T { (from..=to).map(c).sum() };

    let mut thetas = vec![T::zero(); locks];
    // Last worthwhile lock seen from the lock being priced: the locks up to
    // it carry the continuation value, everything past it is dropped.
    let effective = if locks >= 2 {
        let mut eff = if c(locks) < nu { locks - 1 } else { locks };
        thetas[locks - 1] = if c(locks) > nu { horizon } else { T::zero() };
        for k in (2..locks).rev() {
            let upper = eff;
            let net = csum(k, upper) - T::from_usize(upper - k + 1).unwrap() * nu;
            if net >= T::zero() {
                thetas[k - 1] = horizon;
            } else {
                thetas[k - 1] = T::zero();
                eff = k - 1;
            }
        }
        eff
    } else {
        1
    };

    let value = csum(1, effective) - T::from_usize(effective - 1).unwrap() * nu;
    let n = cfg.num_players();
    thetas[0] = if n == 1 {
        if value > nu {
            horizon
        } else {
            T::zero()
        }
    } else if value <= T::zero() {
        T::zero()
    } else {
        let raw = (value / nu).ln() / (T::from_usize(n - 1).unwrap() * beta);
        raw.max(T::zero()).min(horizon)
    };

    let strategies = (0..n).map(|_| MTStrategy::new(thetas.clone())).collect();
    Ok(AsymptoticEquilibrium {
        profile: StrategyProfile::new(strategies),
        branch: AsymptoticBranch::Symmetric,
        theta1_monotone: true,
    })
}

/// Monotone large-horizon branch: rewards non-increasing in player index and
/// every lock profitable for the weakest player (`c_M^n >= M nu`), so all
/// later thresholds sit at `T` and the first-lock thresholds solve, from the
/// weakest player up,
/// `theta_1_p = (ln(d_p / nu) - beta sum_{j > p} theta_1_j) / ((p - 1) beta)`
/// with `d_p = sum_k c_k^p - (M - 1) nu`, clamped to `[0, T]`.
pub fn asymptotic_monotone<T: Real>(
    cfg: &GameConfig<T>,
) -> Result<AsymptoticEquilibrium<T>, AsymptoticError> {
    cfg.validate()?;
    let n = cfg.num_players();
    let locks = cfg.num_locks();
    let nu = cfg.cost_factor;
    let beta = cfg.rate(0);
    let mut reasons = Vec::new();
    if (1..n).any(|i| cfg.rate(i) != beta) {
        reasons.push("contact-rate caps must be equal across players".to_string());
    }
    for i in 0..n.saturating_sub(1) {
        for k in 1..=locks {
            if cfg.reward(i, k) < cfg.reward(i + 1, k) {
                reasons.push(format!(
                    "rewards must be non-increasing in player index (lock {k}, players {i}/{})",
                    i + 1
                ));
                break;
            }
        }
    }
    if cfg.reward(n - 1, locks) < T::from_usize(locks).unwrap() * nu {
        reasons.push("weakest player's terminal reward must cover M nu".to_string());
    }
    if !reasons.is_empty() {
        return Err(AsymptoticError::Inapplicable { reasons });
    }

    let mut theta1 = vec![T::zero(); n];
    let mut later_mass = T::zero(); // beta * sum of already-solved thresholds
    let tiny = real::<T>(1e-9);
    for p in (1..=n).rev() {
        let total: T = (1..=locks).map(|k| cfg.reward(p - 1, k)).sum();
        let d = total - T::from_usize(locks - 1).unwrap() * nu;
        let numer = (d / nu).ln() - later_mass;
        let theta = if p >= 2 {
            let raw = numer / (T::from_usize(p - 1).unwrap() * beta);
            raw.max(T::zero()).min(cfg.horizon)
        } else if numer > tiny {
            // Opponent decay saturates below the crossing: the strongest
            // player never meets the stopping condition.
            cfg.horizon
        } else if numer < -tiny {
            T::zero()
        } else {
            // Exact tie with the next player (symmetric sub-block).
            if n >= 2 {
                theta1[1]
            } else {
                T::zero()
            }
        };
        theta1[p - 1] = theta;
        later_mass += beta * theta;
    }

    let theta1_monotone = theta1.windows(2).all(|w| w[0] >= w[1] - tiny);
    let strategies = theta1
        .iter()
        .map(|&t1| {
            let mut thetas = vec![cfg.horizon; locks];
            thetas[0] = t1;
            MTStrategy::new(thetas)
        })
        .collect();
    Ok(AsymptoticEquilibrium {
        profile: StrategyProfile::new(strategies),
        branch: AsymptoticBranch::Monotone,
        theta1_monotone,
    })
}

// ---------------------------------------------------------------------------
// Deviation certification
// ---------------------------------------------------------------------------

/// Outcome of sweeping candidate first-lock deviations for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport<T> {
    pub player: usize,
    pub candidates: Vec<T>,
    pub utilities: Vec<T>,
    /// Candidate attaining the highest utility.
    pub best_candidate: T,
    /// `max utility - utility(theta_1*)`: positive means a profitable deviation.
    pub gap: T,
    pub equilibrium_utility: T,
    /// Sign changes of the stage-utility derivative along the sweep; the
    /// single-crossing structure predicts at most one.
    pub derivative_sign_changes: usize,
    /// Whether the derivative strictly decreases while it is positive.
    pub derivative_decreasing_while_positive: bool,
}

/// Sweeps `candidates` uniformly spaced first-lock deviations per player,
/// holding opponents at the solved profile, and reports the utility gap and
/// the concavity witnesses.
pub fn verify_equilibrium<T: Real>(
    result: &EquilibriumResult<T>,
    cfg: &GameConfig<T>,
    candidates: usize,
) -> Vec<DeviationReport<T>> {
    assert!(candidates >= 2);
    let n = cfg.num_players();
    let mut reports = Vec::with_capacity(n);
    for i in 0..n {
        let opp = result.profile.opponent_first_thresholds(i);
        let cv = &result.continuation[i];
        let grid: Vec<T> = (0..candidates)
            .map(|j| {
                cfg.horizon * T::from_usize(j).unwrap() / T::from_usize(candidates - 1).unwrap()
            })
            .collect();
        let utilities: Vec<T> = grid
            .iter()
            .map(|&th| gamma_first_lock(th, i, &opp, cv, cfg).expect("candidate within horizon"))
            .collect();
        let derivatives: Vec<T> = grid
            .iter()
            .map(|&th| gamma_derivative(th, i, &opp, cv, cfg).expect("candidate within horizon"))
            .collect();

        let eq_theta = result.profile.theta(i, 1);
        let equilibrium_utility =
            gamma_first_lock(eq_theta, i, &opp, cv, cfg).expect("theta within horizon");
        let (mut best_idx, mut best) = (0usize, utilities[0]);
        for (j, &u) in utilities.iter().enumerate() {
            if u > best {
                best = u;
                best_idx = j;
            }
        }

        let mut sign_changes = 0usize;
        let mut last_sign = 0i8;
        for &d in &derivatives {
            let s = if d > T::zero() {
                1i8
            } else if d < T::zero() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last_sign != 0 && s != last_sign {
                    sign_changes += 1;
                }
                last_sign = s;
            }
        }
        let decreasing_while_positive = derivatives
            .windows(2)
            .all(|w| w[0] <= T::zero() || w[1] < w[0]);

        reports.push(DeviationReport {
            player: i,
            best_candidate: grid[best_idx],
            candidates: grid,
            utilities,
            gap: best - equilibrium_utility,
            equilibrium_utility,
            derivative_sign_changes: sign_changes,
            derivative_decreasing_while_positive: decreasing_while_positive,
        });
    }
    reports
}
