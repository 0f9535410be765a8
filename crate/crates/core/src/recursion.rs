//! Backward value recursion for locks `2..=M`.
//!
//! Once the first lock is won the race is over and the winner optimizes
//! alone, so the continuation value of lock `k` started at time `t` satisfies
//!
//! ```text
//! Ubar_k(t) = 1{t < theta_k} * int_t^{theta_k} (c_k + Ubar_{k+1}(s) - nu) beta e^{-beta (s-t)} ds
//! theta_k   = inf { t >= 0 : c_k + Ubar_{k+1}(t) <= nu },    inf of the empty set := horizon,
//! ```
//!
//! with the closed-form terminal stage
//! `Ubar_M(t) = (c_M - nu)(1 - e^{-beta (T - t)})` when `c_M > nu`, else 0.
//! Each curve is strictly decreasing until its threshold and identically zero
//! after it, which is what makes every downstream root-find single-crossing.
//!
//! Curves are integrated as the equivalent terminal-value problem
//! `d/dt Ubar_k = beta Ubar_k - beta (c_k + Ubar_{k+1}(t) - nu)`, stepping
//! backward from `theta_k` with a classical fourth-order one-step method, one
//! step per grid interval.  [`quadrature_check`] re-derives curve values by
//! direct Simpson quadrature of the defining integral as an independent
//! cross-check of that integration.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ConfigError, GameConfig, SampledFunction};
use crate::quad::{integrate_breakpoints, merge_breakpoints};
use crate::{real, Real};

/// Default abscissa count for curve carriers over `[0, T]`.
pub const DEFAULT_GRID_SIZE: usize = 2001;

/// Thresholds and continuation-value curves of one player for locks `2..=M`.
///
/// `thresholds[k - 2]` and `curves[k - 2]` belong to lock `k`; both are empty
/// when the game has a single lock.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationValues<T> {
    player: usize,
    thresholds: Vec<T>,
    curves: Vec<SampledFunction<T>>,
}

impl<T: Real> ContinuationValues<T> {
    pub fn player(&self) -> usize {
        self.player
    }

    /// Lock indices covered by the recursion: `2..=M`.
    pub fn locks(&self) -> std::ops::RangeInclusive<usize> {
        2..=(self.thresholds.len() + 1)
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    /// Threshold for lock `k` (`k >= 2`).
    pub fn theta(&self, lock: usize) -> T {
        self.thresholds[lock - 2]
    }

    /// Value curve for lock `k` (`k >= 2`).
    pub fn curve(&self, lock: usize) -> &SampledFunction<T> {
        &self.curves[lock - 2]
    }

    /// Continuation value of the second lock, the quantity the first-lock
    /// game is played against; identically zero in single-lock games.
    pub fn upsilon2(&self, t: T) -> T {
        match self.curves.first() {
            Some(c) => c.eval(t).expect("t within horizon"),
            None => T::zero(),
        }
    }

    /// The second-lock curve itself, absent in single-lock games.
    pub fn upsilon2_curve(&self) -> Option<&SampledFunction<T>> {
        self.curves.first()
    }

    /// Grid spacing of the stored curves, if any.
    pub fn spacing(&self) -> Option<T> {
        self.curves.first().map(|c| c.spacing())
    }

    #[cfg(test)]
    pub(crate) fn curves_mut(&mut self) -> &mut [SampledFunction<T>] {
        &mut self.curves
    }

    /// Corruption hook: adds `delta` to one stored curve value.  Exists so
    /// tests and the CLI's hidden fault-injection flag can prove the
    /// quadrature check has teeth; never called on the solve path.
    pub fn inject_corruption(&mut self, curve_idx: usize, value_idx: usize, delta: T) {
        self.curves[curve_idx].values_mut()[value_idx] += delta;
    }

    /// Checks the structural facts the recursion guarantees: curves are
    /// non-negative, bounded by the residual net reward, strictly decreasing
    /// on the grid below their threshold and exactly zero from it onward.
    pub fn check_invariants(&self, cfg: &GameConfig<T>) -> Result<(), String> {
        let nu = cfg.cost_factor;
        for lock in self.locks() {
            let theta = self.theta(lock);
            let curve = self.curve(lock);
            let h = curve.spacing();
            let bound: T = (lock..=cfg.num_locks())
                .map(|l| (cfg.reward(self.player, l) - nu).max(T::zero()))
                .sum();
            let tol = real::<T>(1e-9) * bound.max(T::one());
            let vals = curve.values();
            for i in 0..vals.len() {
                let t = curve.abscissa(i);
                if vals[i] < T::zero() {
                    return Err(format!("lock {lock}: negative value at t={t}"));
                }
                if vals[i] > bound + tol {
                    return Err(format!("lock {lock}: value {} above bound {bound}", vals[i]));
                }
                if t >= theta && vals[i] != T::zero() {
                    return Err(format!("lock {lock}: nonzero value past threshold at t={t}"));
                }
                if i + 1 < vals.len() && curve.abscissa(i + 1) <= theta - h && vals[i + 1] >= vals[i]
                {
                    return Err(format!("lock {lock}: not strictly decreasing at t={t}"));
                }
            }
        }
        Ok(())
    }
}

/// Terminal stage of the recursion: `theta_M = T` exactly when `c_M > nu`,
/// and the closed-form curve sampled on the grid (zero at `T` exactly).
pub fn terminal_stage<T: Real>(
    cfg: &GameConfig<T>,
    player: usize,
    grid_size: usize,
) -> (T, SampledFunction<T>) {
    let horizon = cfg.horizon;
    let beta = cfg.rate(player);
    let c = cfg.reward(player, cfg.num_locks());
    let nu = cfg.cost_factor;
    if c > nu {
        let curve = SampledFunction::from_fn(T::zero(), horizon, grid_size, |t| {
            (c - nu) * (T::one() - (-beta * (horizon - t)).exp())
        });
        (horizon, curve)
    } else {
        let curve = SampledFunction::from_fn(T::zero(), horizon, grid_size, |_| T::zero());
        (T::zero(), curve)
    }
}

/// Smallest `t` with `c_k + upsilon_next(t) <= nu`, by bisection on the
/// interpolated curve to absolute tolerance `1e-10`; `horizon` when the
/// condition never holds, `0` when it already holds at the origin.
///
/// `upsilon_next` must be non-increasing on `[0, horizon]` for the infimum to
/// be a single crossing.
pub fn threshold_root<T: Real>(upsilon_next: &SampledFunction<T>, c_k: T, nu: T, horizon: T) -> T {
    let margin = |t: T| c_k + upsilon_next.eval(t).expect("curve spans [0, horizon]") - nu;
    if margin(T::zero()) <= T::zero() {
        return T::zero();
    }
    if margin(horizon) > T::zero() {
        return horizon;
    }
    let tol = real::<T>(1e-10);
    let mut lo = T::zero(); // margin(lo) > 0
    let mut hi = horizon; // margin(hi) <= 0
    let half = real::<T>(0.5);
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

/// Runs the backward recursion for `player`, producing thresholds and curves
/// for locks `M` down to `2` on a `grid_size` grid over `[0, T]`.
pub fn backward_recursion<T: Real>(
    cfg: &GameConfig<T>,
    player: usize,
    grid_size: usize,
) -> Result<ContinuationValues<T>, ConfigError> {
    cfg.validate()?;
    assert!(grid_size >= 2, "grid_size must be at least 2");
    let locks = cfg.num_locks();
    if locks < 2 {
        return Ok(ContinuationValues { player, thresholds: Vec::new(), curves: Vec::new() });
    }

    let nu = cfg.cost_factor;
    let beta = cfg.rate(player);
    let mut thresholds = vec![T::zero(); locks - 1];
    let mut curves: Vec<SampledFunction<T>> = Vec::with_capacity(locks - 1);

    let (theta_m, curve_m) = terminal_stage(cfg, player, grid_size);
    thresholds[locks - 2] = theta_m;
    curves.push(curve_m);

    for lock in (2..locks).rev() {
        let next = curves.last().unwrap();
        let c_k = cfg.reward(player, lock);
        // Threshold first, from the already-built next curve, then the curve
        // itself on [0, theta_k].
        let theta = threshold_root(next, c_k, nu, cfg.horizon);
        let curve = integrate_stage_curve(beta, c_k, nu, Some(next), theta, cfg.horizon, grid_size);
        thresholds[lock - 2] = theta;
        curves.push(curve);
    }

    curves.reverse();
    Ok(ContinuationValues { player, thresholds, curves })
}

/// Continuation-value curves for locks `2..=M` under *given* thresholds
/// rather than optimal ones (the semi-analytic counterpart of simulating an
/// arbitrary M-threshold profile).  The returned curves need not be monotone
/// or non-negative.
pub fn stage_values_given<T: Real>(
    cfg: &GameConfig<T>,
    player: usize,
    thresholds: &[T],
    grid_size: usize,
) -> Vec<SampledFunction<T>> {
    let locks = cfg.num_locks();
    assert_eq!(thresholds.len(), locks, "one threshold per lock");
    let nu = cfg.cost_factor;
    let beta = cfg.rate(player);
    let mut curves: Vec<SampledFunction<T>> = Vec::with_capacity(locks.saturating_sub(1));
    for lock in (2..=locks).rev() {
        let theta = thresholds[lock - 1];
        let c_k = cfg.reward(player, lock);
        let curve =
            integrate_stage_curve(beta, c_k, nu, curves.last(), theta, cfg.horizon, grid_size);
        curves.push(curve);
    }
    curves.reverse();
    curves
}

/// Integrates `d/dt Y = beta Y - beta (c_k + next(t) - nu)` backward from
/// `Y(theta) = 0`, one fourth-order step per grid interval, storing zeros on
/// `[theta, horizon]`.
fn integrate_stage_curve<T: Real>(
    beta: T,
    c_k: T,
    nu: T,
    next: Option<&SampledFunction<T>>,
    theta: T,
    horizon: T,
    grid_size: usize,
) -> SampledFunction<T> {
    let mut values = vec![T::zero(); grid_size];
    let zeros = SampledFunction::new(T::zero(), horizon, values.clone());
    if theta <= T::zero() {
        return zeros;
    }

    let drive = |t: T| match next {
        Some(curve) => c_k + curve.eval(t).expect("t within horizon") - nu,
        None => c_k - nu,
    };
    let rhs = |t: T, y: T| beta * (y - drive(t));

    let n1 = grid_size - 1;
    let abscissa =
        |i: usize| T::zero() + horizon * (T::from_usize(i).unwrap() / T::from_usize(n1).unwrap());
    let pos = theta / horizon * T::from_usize(n1).unwrap();
    let nearest = pos.round().to_usize().unwrap_or(0).min(n1);
    let aligned = (abscissa(nearest) - theta).abs() <= horizon * real::<T>(1e-12);

    let (mut idx, mut y) = if aligned {
        if nearest == 0 {
            return zeros;
        }
        (nearest, T::zero())
    } else {
        // theta lies strictly inside (abscissa(j), abscissa(j+1)); take a
        // partial step down to the grid.
        let j = pos.floor().to_usize().unwrap_or(0).min(n1 - 1);
        let y = rk4_step(&rhs, theta, T::zero(), abscissa(j) - theta).max(T::zero());
        values[j] = y;
        (j, y)
    };
    while idx > 0 {
        let t = abscissa(idx);
        let h = abscissa(idx - 1) - t;
        y = rk4_step(&rhs, t, y, h);
        idx -= 1;
        values[idx] = y;
    }
    SampledFunction::new(T::zero(), horizon, values)
}

fn rk4_step<T: Real>(rhs: &impl Fn(T, T) -> T, t: T, y: T, h: T) -> T {
    let half = real::<T>(0.5);
    let sixth = T::one() / real::<T>(6.0);
    let two = real::<T>(2.0);
    let k1 = rhs(t, y);
    let k2 = rhs(t + h * half, y + h * half * k1);
    let k3 = rhs(t + h * half, y + h * half * k2);
    let k4 = rhs(t + h, y + h * k3);
    y + h * sixth * (k1 + two * k2 + two * k3 + k4)
}

/// Recomputes curve values by direct composite-Simpson quadrature of the
/// defining integral (using the stored next curve) and returns the maximum
/// absolute residual against the stored values.
///
/// Checked points are grid abscissae: a deterministic uniform stride covering
/// roughly `samples` points per curve, plus `samples` seeded random draws, so
/// passing `samples >= grid_size` checks every point.  Residuals at grid
/// points isolate the integration scheme from interpolation error.
pub fn quadrature_check<T: Real>(
    cv: &ContinuationValues<T>,
    cfg: &GameConfig<T>,
    player: usize,
    samples: usize,
    seed: u64,
) -> T {
    assert_eq!(cv.player(), player, "continuation values belong to the queried player");
    let nu = cfg.cost_factor;
    let beta = cfg.rate(player);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();

    for lock in cv.locks() {
        let curve = cv.curve(lock);
        let theta = cv.theta(lock);
        let c_k = cfg.reward(player, lock);
        let next = (lock < cfg.num_locks()).then(|| cv.curve(lock + 1));
        let n = curve.grid_size();

        let stride = (n / samples.max(1)).max(1);
        let mut indices: Vec<usize> = (0..n).step_by(stride).collect();
        for _ in 0..samples {
            indices.push((rng.next_u64() % n as u64) as usize);
        }

        for &i in &indices {
            let t = curve.abscissa(i);
            let expected = if t >= theta {
                T::zero()
            } else {
                let mut f = |s: T| {
                    let cont = match next {
                        Some(c) => c.eval(s).expect("s within horizon"),
                        None => T::zero(),
                    };
                    (c_k + cont - nu) * beta * (-beta * (s - t)).exp()
                };
                let breaks = merge_breakpoints(
                    t,
                    theta,
                    (0..n).map(|j| curve.abscissa(j)).filter(move |&x| x > t && x < theta),
                );
                integrate_breakpoints(&mut f, &breaks, curve.spacing())
            };
            let residual = (expected - curve.values()[i]).abs();
            worst = worst.max(residual);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn symmetric_five_lock() -> GameConfig<f64> {
        GameConfig::symmetric(4, 8.0, 1.0, 1.0, vec![1.0, 3.0, 3.0, 3.0, 3.0])
    }

    fn descending_duel(nu: f64) -> GameConfig<f64> {
        GameConfig::symmetric(2, 5.0, nu, 1.0, vec![4.0, 3.0, 2.0, 1.0])
    }

    /// Independent oracle: trapezoid quadrature of the defining integral on a
    /// dense auxiliary grid, never touching the solver's integrator.
    fn trapezoid_upsilon(
        c_k: f64,
        nu: f64,
        beta: f64,
        next: impl Fn(f64) -> f64,
        theta: f64,
        t: f64,
        steps: usize,
    ) -> f64 {
        if t >= theta {
            return 0.0;
        }
        let h = (theta - t) / steps as f64;
        let f = |s: f64| (c_k + next(s) - nu) * beta * (-beta * (s - t)).exp();
        let mut acc = 0.5 * (f(t) + f(theta));
        for i in 1..steps {
            acc += f(t + h * i as f64);
        }
        acc * h
    }

    #[test]
    fn terminal_stage_indicator_zero_below_cost() {
        let cfg = GameConfig::symmetric(1, 8.0, 1.0, 1.0, vec![1.0, 0.5]);
        let (theta, curve) = terminal_stage(&cfg, 0, 101);
        assert_eq!(theta, 0.0);
        assert!(curve.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn terminal_stage_matches_quadrature_oracle() {
        // c_M = 3, nu = 1, beta = 1, T = 8: value at 0 is 2 (1 - e^-8).
        let cfg = GameConfig::symmetric(1, 8.0, 1.0, 1.0, vec![1.0, 3.0]);
        let (theta, curve) = terminal_stage(&cfg, 0, 2001);
        assert_eq!(theta, 8.0);
        let oracle = trapezoid_upsilon(3.0, 1.0, 1.0, |_| 0.0, 8.0, 0.0, 400_000);
        assert_relative_eq!(curve.eval(0.0).unwrap(), oracle, epsilon = 1e-9);
        assert_relative_eq!(curve.eval(0.0).unwrap(), 1.999329, epsilon = 1e-6);
        assert_eq!(curve.eval(8.0).unwrap(), 0.0);
    }

    #[test]
    fn threshold_root_empty_set_returns_horizon() {
        let cfg = GameConfig::symmetric(1, 8.0, 1.0, 1.0, vec![1.0, 3.0]);
        let (_, upsilon) = terminal_stage(&cfg, 0, 2001);
        // c_k = 3 > nu = 1, curve non-negative: condition never holds.
        assert_eq!(threshold_root(&upsilon, 3.0, 1.0, 8.0), 8.0);
    }

    #[test]
    fn threshold_root_condition_at_origin_returns_zero() {
        let upsilon = SampledFunction::from_fn(0.0, 8.0, 101, |t| 0.5 * (1.0 - t / 8.0));
        assert_eq!(threshold_root(&upsilon, 0.2, 1.0, 8.0), 0.0);
    }

    #[test]
    fn threshold_root_matches_dense_scan_of_closed_form() {
        // Ubar from terminal stage with c_M = 3, beta = 1, T = 8; root of
        // Ubar(t) = 0.5 is t = 8 - ln(4/3).
        let cfg = GameConfig::symmetric(1, 8.0, 1.0, 1.0, vec![1.0, 3.0]);
        let (_, upsilon) = terminal_stage(&cfg, 0, 2001);
        let root = threshold_root(&upsilon, 1.0, 1.5, 8.0);
        let exact = 8.0 - (4.0f64 / 3.0).ln();
        // Dense brute-force scan as an independent locator.
        let mut scan = 8.0;
        for i in 0..=4_000_000 {
            let t = 8.0 * i as f64 / 4_000_000.0;
            if 1.0 + upsilon.eval(t).unwrap() <= 1.5 {
                scan = t;
                break;
            }
        }
        assert_relative_eq!(root, exact, epsilon = 1e-4);
        assert_relative_eq!(root, scan, epsilon = 1e-5);
        assert_relative_eq!(root, 7.712, epsilon = 1e-3);
    }

    #[test]
    fn single_lock_recursion_is_empty() {
        let cfg = GameConfig::symmetric(2, 10.0, 0.5, 1.0, vec![1.0]);
        let cv = backward_recursion(&cfg, 0, 101).unwrap();
        assert!(cv.thresholds().is_empty());
        assert_eq!(cv.upsilon2(3.0), 0.0);
        assert_eq!(quadrature_check(&cv, &cfg, 0, 50, 7), 0.0);
    }

    #[test]
    fn five_lock_race_later_thresholds_hit_horizon() {
        let cfg = symmetric_five_lock();
        let cv = backward_recursion(&cfg, 0, DEFAULT_GRID_SIZE).unwrap();
        for lock in 2..=5 {
            assert_eq!(cv.theta(lock), 8.0, "lock {lock}");
        }
        cv.check_invariants(&cfg).unwrap();
    }

    #[test]
    fn race_curves_match_independent_trapezoid_oracle() {
        let cfg = symmetric_five_lock();
        let cv = backward_recursion(&cfg, 0, DEFAULT_GRID_SIZE).unwrap();
        // Check lock 4 against the oracle, feeding it the *stored* lock-5
        // curve so both integrate the same continuation.
        let next = |s: f64| cv.curve(5).eval(s).unwrap();
        for t in [0.0, 1.3, 4.0, 7.9] {
            let oracle = trapezoid_upsilon(3.0, 1.0, 1.0, next, cv.theta(4), t, 200_000);
            assert_relative_eq!(cv.curve(4).eval(t).unwrap(), oracle, epsilon = 1e-7);
        }
    }

    #[test]
    fn duel_threshold_pattern_under_rising_cost() {
        // nu = 1.5: the last lock is not worth starting (c_4 = 1 < nu) while
        // lock 3 stays profitable its whole window.
        let cv = backward_recursion(&descending_duel(1.5), 0, DEFAULT_GRID_SIZE).unwrap();
        assert_eq!(cv.theta(4), 0.0);
        assert!(cv.curve(4).values().iter().all(|&v| v == 0.0));
        assert_eq!(cv.theta(3), 5.0);
        assert_eq!(cv.theta(2), 5.0);

        // nu = 2.0: lock 3 now breaks even at the origin and is dropped too.
        let cv = backward_recursion(&descending_duel(2.0), 0, DEFAULT_GRID_SIZE).unwrap();
        assert_eq!(cv.theta(4), 0.0);
        assert_eq!(cv.theta(3), 0.0);
        assert_eq!(cv.theta(2), 5.0);
        cv.check_invariants(&descending_duel(2.0)).unwrap();
    }

    #[test]
    fn curves_decrease_on_grid_lemma_two_restriction() {
        let cfg = symmetric_five_lock();
        let cv = backward_recursion(&cfg, 0, 1001).unwrap();
        for lock in 2..=5 {
            let vals = cv.curve(lock).values();
            for w in vals.windows(2) {
                assert!(w[1] <= w[0], "lock {lock} must be non-increasing on the grid");
            }
        }
    }

    #[test]
    fn all_locks_profitable_forces_horizon_thresholds() {
        let cfg = GameConfig::symmetric(2, 6.0, 0.4, 1.3, vec![0.1, 0.5, 2.0, 0.6]);
        let cv = backward_recursion(&cfg, 1, 801).unwrap();
        for lock in 2..=4 {
            assert_eq!(cv.theta(lock), 6.0);
        }
    }

    #[test]
    fn grid_refinement_moves_thresholds_less_than_coarse_spacing() {
        for cfg in [symmetric_five_lock(), descending_duel(1.5), descending_duel(0.7)] {
            let coarse = backward_recursion(&cfg, 0, DEFAULT_GRID_SIZE).unwrap();
            let fine = backward_recursion(&cfg, 0, 2 * DEFAULT_GRID_SIZE - 1).unwrap();
            let h = cfg.horizon / (DEFAULT_GRID_SIZE - 1) as f64;
            for lock in coarse.locks() {
                assert!((coarse.theta(lock) - fine.theta(lock)).abs() < 2.0 * h);
            }
            let probe = [0.0, 0.37 * cfg.horizon, 0.81 * cfg.horizon];
            for lock in coarse.locks() {
                for &t in &probe {
                    let a = coarse.curve(lock).eval(t).unwrap();
                    let b = fine.curve(lock).eval(t).unwrap();
                    assert!((a - b).abs() < 1e-4, "lock {lock} at t={t}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn quadrature_check_residual_is_small_on_reference_configs() {
        for cfg in [symmetric_five_lock(), descending_duel(1.5)] {
            let cv = backward_recursion(&cfg, 0, DEFAULT_GRID_SIZE).unwrap();
            let residual = quadrature_check(&cv, &cfg, 0, 100, 42);
            assert!(residual < 1e-6, "residual {residual}");
        }
    }

    #[test]
    fn quadrature_check_detects_a_corrupted_curve() {
        let cfg = symmetric_five_lock();
        let mut cv = backward_recursion(&cfg, 0, DEFAULT_GRID_SIZE).unwrap();
        cv.curves_mut()[1].values_mut()[700] += 0.1;
        // Full coverage: samples >= grid size checks every abscissa.
        let residual = quadrature_check(&cv, &cfg, 0, DEFAULT_GRID_SIZE, 42);
        assert!(residual >= 0.05, "residual {residual}");
    }

    #[test]
    fn given_threshold_curves_reduce_to_optimal_at_optimum() {
        let cfg = symmetric_five_lock();
        let cv = backward_recursion(&cfg, 0, 1001).unwrap();
        let mut thetas = vec![0.5];
        thetas.extend_from_slice(cv.thresholds());
        let given = stage_values_given(&cfg, 0, &thetas, 1001);
        for (lock, w) in (2..=5).zip(&given) {
            for t in [0.0, 2.0, 7.5] {
                assert_relative_eq!(
                    w.eval(t).unwrap(),
                    cv.curve(lock).eval(t).unwrap(),
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn given_threshold_curves_can_go_negative_when_overstaying() {
        // Single continuation lock with c_2 < nu but a positive threshold:
        // the stage is pure loss, so the curve must be negative.
        let cfg = GameConfig::symmetric(1, 4.0, 1.0, 1.0, vec![1.0, 0.2]);
        let given = stage_values_given(&cfg, 0, &[4.0, 4.0], 801);
        assert!(given[0].eval(0.0).unwrap() < 0.0);
    }
}
