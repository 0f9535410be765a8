//! Discretized open-loop control laboratory.
//!
//! The solver rests on structural facts about the single-stage control
//! problem: the stage objective is maximized by bang-bang controls, bang-bang
//! maximizers are front-loaded (threshold) patterns, shifting rate mass
//! earlier never hurts, the expected acceleration cost depends on a control
//! only through its total mass (`1 - e^{-abar(T)}`), and the objective scales
//! out of the starting state as `J(s, x, a) = e^{-x} (J(s, 0, a) - nu x)`.
//! This module checks all of them at desk scale on piecewise-constant
//! controls, with the bang-bang class searched exhaustively.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{DomainError, SampledFunction};
use crate::quad::{integrate_breakpoints, merge_breakpoints};
use crate::{real, Real};

/// Cap on exhaustive bang-bang enumeration (`2^14` controls).
pub const MAX_ENUMERATION_SEGMENTS: usize = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("segment count {got} exceeds the enumeration cap {MAX_ENUMERATION_SEGMENTS}")]
    TooManySegments { got: usize },
    #[error("restart time {tau} does not sit on a segment boundary strictly inside the span")]
    MisalignedRestart { tau: f64 },
    #[error("invalid control: {0}")]
    InvalidControl(&'static str),
}

/// An open-loop rate function, constant on uniform sub-intervals of
/// `[start, end]`, with every level in `[0, cap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantControl<T> {
    start: T,
    end: T,
    cap: T,
    levels: Vec<T>,
}

impl<T: Real> PiecewiseConstantControl<T> {
    pub fn new(start: T, end: T, cap: T, levels: Vec<T>) -> Result<Self, OracleError> {
        if end <= start || !start.is_finite() || !end.is_finite() {
            return Err(OracleError::InvalidControl("time span must have positive length"));
        }
        if levels.is_empty() {
            return Err(OracleError::InvalidControl("needs at least one segment"));
        }
        if cap <= T::zero() || !cap.is_finite() {
            return Err(OracleError::InvalidControl("rate cap must be positive"));
        }
        if levels.iter().any(|&a| !(a >= T::zero() && a <= cap)) {
            return Err(OracleError::InvalidControl("segment level outside [0, cap]"));
        }
        Ok(Self { start, end, cap, levels })
    }

    /// Bang-bang control from a bit pattern, earliest segment first.
    pub fn from_bits(start: T, end: T, cap: T, bits: &[bool]) -> Self {
        let levels = bits.iter().map(|&b| if b { cap } else { T::zero() }).collect();
        Self { start, end, cap, levels }
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn end(&self) -> T {
        self.end
    }

    pub fn cap(&self) -> T {
        self.cap
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn segment_len(&self) -> T {
        (self.end - self.start) / T::from_usize(self.levels.len()).unwrap()
    }

    /// Boundary of segment `j` (`j = 0..=segments`), exact at both ends.
    pub fn boundary(&self, j: usize) -> T {
        let n = self.levels.len();
        self.start
            + (self.end - self.start) * (T::from_usize(j).unwrap() / T::from_usize(n).unwrap())
    }

    /// Accumulated acceleration `abar(t)`, the exact piecewise-linear
    /// integral of the control.
    pub fn accumulated(&self, t: T) -> Result<T, DomainError> {
        if !(t >= self.start && t <= self.end) {
            return Err(DomainError {
                what: "t",
                value: t.to_f64().unwrap_or(f64::NAN),
                lo: self.start.to_f64().unwrap_or(f64::NAN),
                hi: self.end.to_f64().unwrap_or(f64::NAN),
            });
        }
        let len = self.segment_len();
        let pos = (t - self.start) / len;
        let full = pos.floor().to_usize().unwrap_or(0).min(self.levels.len() - 1);
        let mut acc = T::zero();
        for j in 0..full {
            acc += self.levels[j] * len;
        }
        Ok(acc + self.levels[full] * (t - self.boundary(full)))
    }

    /// Total mass `abar(end)`.
    pub fn total_mass(&self) -> T {
        let len = self.segment_len();
        self.levels.iter().map(|&a| a * len).sum()
    }

    /// First `t` with `abar(t) = mass`, walking the segments; `None` when the
    /// control never accumulates that much.
    pub fn invert_accumulated(&self, mass: T) -> Option<T> {
        if mass <= T::zero() {
            return Some(self.start);
        }
        let len = self.segment_len();
        let mut remaining = mass;
        for (j, &a) in self.levels.iter().enumerate() {
            let seg_mass = a * len;
            if remaining <= seg_mass && a > T::zero() {
                return Some(self.boundary(j) + remaining / a);
            }
            remaining -= seg_mass;
        }
        None
    }

    /// No full-rate gap followed by later mass: nothing left for the
    /// mass-shift construction to improve.
    pub fn is_threshold_shaped(&self) -> bool {
        find_shift_pair(&self.levels, self.cap).is_none()
    }
}

fn find_shift_pair<T: Real>(levels: &[T], cap: T) -> Option<(usize, usize)> {
    let deficient = levels.iter().position(|&a| a < cap)?;
    let donor = (deficient + 1..levels.len()).find(|&j| levels[j] > T::zero())?;
    Some((deficient, donor))
}

/// One step of the early-shift construction: fills the earliest
/// below-cap segment from the first later segment carrying mass, preserving
/// total mass; returns the input unchanged (flagged `true`) when the control
/// is already threshold-shaped.
pub fn mass_shift<T: Real>(control: &PiecewiseConstantControl<T>) -> (PiecewiseConstantControl<T>, bool) {
    match find_shift_pair(&control.levels, control.cap) {
        None => (control.clone(), true),
        Some((i, j)) => {
            let mut levels = control.levels.clone();
            let delta = (control.cap - levels[i]).min(levels[j]);
            levels[i] += delta;
            levels[j] -= delta;
            (
                PiecewiseConstantControl {
                    start: control.start,
                    end: control.end,
                    cap: control.cap,
                    levels,
                },
                false,
            )
        }
    }
}

/// Probability of a successful contact under `control` against the
/// opponent-failure curve `eta`: `int eta(t) e^{-abar(t)} a(t) dt`.
pub fn success_probability<T: Real>(
    control: &PiecewiseConstantControl<T>,
    eta: &SampledFunction<T>,
) -> T {
    let (lo, hi) = eta.domain();
    let tol = (control.end - control.start) * real::<T>(1e-9);
    assert!(
        (lo - control.start).abs() <= tol && (hi - control.end).abs() <= tol,
        "control and eta must share a domain"
    );
    let mut total = T::zero();
    for (j, &a) in control.levels.iter().enumerate() {
        if a <= T::zero() {
            continue;
        }
        let (s0, s1) = (control.boundary(j), control.boundary(j + 1));
        let cum0 = control.accumulated(s0).expect("boundary in range");
        let mut f = |t: T| {
            let abar = cum0 + a * (t - s0);
            eta.eval(t).expect("t within eta domain") * (-abar).exp() * a
        };
        let breaks =
            merge_breakpoints(s0, s1, (0..eta.grid_size()).map(|i| eta.abscissa(i)));
        total += integrate_breakpoints(&mut f, &breaks, eta.spacing().min(s1 - s0));
    }
    total
}

/// Expected acceleration cost of `control` (in mass units; multiply by `nu`
/// for money): `abar(T) e^{-abar(T)} + int abar(s) e^{-abar(s)} a(s) ds`,
/// both terms computed directly.  Equals `1 - e^{-abar(T)}` for every
/// control, which tests assert rather than assume.
pub fn expected_cost<T: Real>(control: &PiecewiseConstantControl<T>) -> T {
    let total_mass = control.total_mass();
    let mut cost = total_mass * (-total_mass).exp();
    let seg = control.segment_len();
    let sub_h = seg / real::<T>(64.0);
    for (j, &a) in control.levels.iter().enumerate() {
        if a <= T::zero() {
            continue;
        }
        let (s0, s1) = (control.boundary(j), control.boundary(j + 1));
        let cum0 = control.accumulated(s0).expect("boundary in range");
        let mut f = |t: T| {
            let abar = cum0 + a * (t - s0);
            abar * (-abar).exp() * a
        };
        cost += integrate_breakpoints(&mut f, &[s0, s1], sub_h);
    }
    cost
}

/// A single-stage control problem: maximize
/// `int_s^T (gain(t) - nu x(t)) a(t) e^{-x(t)} dt - nu x(T) e^{-x(T)}`
/// over controls `a` with state `x' = a, x(s) = x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageProblem<T> {
    /// Stage gain function; must cover `[start, horizon]`.
    pub gain: SampledFunction<T>,
    pub nu: T,
    pub start: T,
    pub horizon: T,
    /// Admissible rate cap.
    pub cap: T,
}

impl<T: Real> StageProblem<T> {
    pub fn new(gain: SampledFunction<T>, nu: T, start: T, horizon: T, cap: T) -> Self {
        let (lo, hi) = gain.domain();
        assert!(lo <= start && hi >= horizon, "gain must cover [start, horizon]");
        assert!(horizon > start);
        Self { gain, nu, start, horizon, cap }
    }
}

/// Stage objective `J` for `control` from initial state `x0`; quadrature
/// panels are forced at every segment boundary and every gain-curve abscissa,
/// the state `x` is exact piecewise-linear.
pub fn stage_objective<T: Real>(
    problem: &StageProblem<T>,
    control: &PiecewiseConstantControl<T>,
    x0: T,
) -> T {
    let span_tol = (problem.horizon - problem.start) * real::<T>(1e-9);
    assert!(
        (control.start - problem.start).abs() <= span_tol
            && (control.end - problem.horizon).abs() <= span_tol,
        "control must span the stage"
    );
    let nu = problem.nu;
    let gain = &problem.gain;
    let mut j_total = T::zero();
    for (j, &a) in control.levels.iter().enumerate() {
        if a <= T::zero() {
            continue;
        }
        let (s0, s1) = (control.boundary(j), control.boundary(j + 1));
        let cum0 = control.accumulated(s0).expect("boundary in range");
        let mut f = |t: T| {
            let x = x0 + cum0 + a * (t - s0);
            (gain.eval(t).expect("t within gain domain") - nu * x) * a * (-x).exp()
        };
        let breaks =
            merge_breakpoints(s0, s1, (0..gain.grid_size()).map(|i| gain.abscissa(i)));
        j_total += integrate_breakpoints(&mut f, &breaks, gain.spacing().min(s1 - s0));
    }
    let x_final = x0 + control.total_mass();
    j_total - nu * x_final * (-x_final).exp()
}

/// Absolute residual of the state-scaling identity
/// `J(s, x0, a) = e^{-x0} (J(s, 0, a) - nu x0)`; both sides share quadrature
/// panels, so only the identity itself is being measured.
pub fn lemma3_residual<T: Real>(
    problem: &StageProblem<T>,
    control: &PiecewiseConstantControl<T>,
    x0: T,
) -> T {
    let with_state = stage_objective(problem, control, x0);
    let at_zero = stage_objective(problem, control, T::zero());
    (with_state - (-x0).exp() * (at_zero - problem.nu * x0)).abs()
}

/// Exhaustively enumerates all `{0, cap}`-valued controls on `segments`
/// uniform sub-intervals and returns the stage-objective maximizer from
/// `x0 = 0`, its objective, and whether it is a prefix-of-ones (threshold)
/// pattern.  Exact ties resolve toward the most front-loaded pattern.
pub fn exhaustive_bang_bang_best_response<T: Real>(
    problem: &StageProblem<T>,
    segments: usize,
) -> Result<(PiecewiseConstantControl<T>, T, bool), OracleError> {
    if segments == 0 || segments > MAX_ENUMERATION_SEGMENTS {
        return Err(OracleError::TooManySegments { got: segments });
    }
    // Rank = bits reversed so that front-loaded patterns compare higher;
    // unique per mask, making the parallel max deterministic.
    let rank = |mask: u32| -> u32 {
        (0..segments).fold(0u32, |r, j| r | (((mask >> j) & 1) << (segments - 1 - j)))
    };
    let evaluate = |mask: u32| -> (T, u32) {
        let bits: Vec<bool> = (0..segments).map(|j| (mask >> j) & 1 == 1).collect();
        let control =
            PiecewiseConstantControl::from_bits(problem.start, problem.horizon, problem.cap, &bits);
        (stage_objective(problem, &control, T::zero()), mask)
    };
    let better = |a: (T, u32), b: (T, u32)| {
        if b.0 > a.0 || (b.0 == a.0 && rank(b.1) > rank(a.1)) {
            b
        } else {
            a
        }
    };
    let best = (0u32..1 << segments)
        .into_par_iter()
        .map(evaluate)
        .reduce(|| (T::neg_infinity(), 0), better);

    let bits: Vec<bool> = (0..segments).map(|j| (best.1 >> j) & 1 == 1).collect();
    let ones = bits.iter().filter(|&&b| b).count();
    let is_threshold = bits.iter().take(ones).all(|&b| b);
    let control =
        PiecewiseConstantControl::from_bits(problem.start, problem.horizon, problem.cap, &bits);
    Ok((control, best.0, is_threshold))
}

/// Re-solves the stage from a later start `tau` (a segment boundary) and
/// reports the fraction of segments on `[tau, T]` where the restarted best
/// response disagrees with the suffix of the full one.  The scaling identity
/// makes the restart state-independent, so zero is expected up to boundary
/// ties.
pub fn suffix_consistency_check<T: Real>(
    problem: &StageProblem<T>,
    tau: T,
    segments: usize,
) -> Result<T, OracleError> {
    if segments == 0 || segments > MAX_ENUMERATION_SEGMENTS {
        return Err(OracleError::TooManySegments { got: segments });
    }
    let seg_len = (problem.horizon - problem.start) / T::from_usize(segments).unwrap();
    let pos = (tau - problem.start) / seg_len;
    let k = pos.round().to_usize().unwrap_or(0);
    let aligned = (pos - T::from_usize(k).unwrap()).abs() <= real::<T>(1e-9);
    if !aligned || k == 0 || k >= segments {
        return Err(OracleError::MisalignedRestart { tau: tau.to_f64().unwrap_or(f64::NAN) });
    }

    let (full, _, _) = exhaustive_bang_bang_best_response(problem, segments)?;
    let suffix_problem = StageProblem {
        gain: problem.gain.clone(),
        nu: problem.nu,
        start: tau,
        horizon: problem.horizon,
        cap: problem.cap,
    };
    let (restarted, _, _) = exhaustive_bang_bang_best_response(&suffix_problem, segments - k)?;

    let suffix_count = segments - k;
    let mismatches = (0..suffix_count)
        .filter(|&j| (full.levels()[k + j] > T::zero()) != (restarted.levels()[j] > T::zero()))
        .count();
    Ok(T::from_usize(mismatches).unwrap() / T::from_usize(suffix_count).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursion::threshold_root;
    use approx::assert_relative_eq;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / 9007199254740992.0
    }

    fn random_control(rng: &mut ChaCha8Rng, segments: usize, cap: f64) -> PiecewiseConstantControl<f64> {
        let levels = (0..segments)
            .map(|_| {
                let u = uniform(rng);
                // Mix in hard zeros and full-rate segments.
                if u < 0.2 {
                    0.0
                } else if u > 0.85 {
                    cap
                } else {
                    cap * uniform(rng)
                }
            })
            .collect();
        PiecewiseConstantControl::new(0.0, 2.0, cap, levels).unwrap()
    }

    fn flat_eta(n: usize) -> SampledFunction<f64> {
        SampledFunction::from_fn(0.0, 2.0, n, |_| 1.0)
    }

    fn decreasing_eta(rng: &mut ChaCha8Rng, n: usize) -> SampledFunction<f64> {
        let lambda = 0.3 + 2.0 * uniform(rng);
        SampledFunction::from_fn(0.0, 2.0, n, |t| (-lambda * t).exp())
    }

    #[test]
    fn accumulated_is_exact_piecewise_linear() {
        let zero = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![0.0, 0.0]).unwrap();
        for t in [0.0, 0.7, 2.0] {
            assert_eq!(zero.accumulated(t).unwrap(), 0.0);
        }
        let full = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![1.0, 1.0]).unwrap();
        assert_eq!(full.accumulated(1.5).unwrap(), 1.5);
        let two = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![0.0, 1.0]).unwrap();
        assert_eq!(two.accumulated(1.0).unwrap(), 0.0);
        assert_eq!(two.accumulated(2.0).unwrap(), 1.0);
        assert!(two.accumulated(2.1).is_err());
        assert!(two.accumulated(-0.1).is_err());
    }

    #[test]
    fn invert_accumulated_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let c = random_control(&mut rng, 8, 1.3);
            let total = c.total_mass();
            for q in [0.1, 0.5, 0.9] {
                let mass = q * total;
                if mass <= 0.0 {
                    continue;
                }
                let t = c.invert_accumulated(mass).unwrap();
                assert_relative_eq!(c.accumulated(t).unwrap(), mass, epsilon = 1e-12);
            }
            assert_eq!(c.invert_accumulated(total + 1e-9), None);
        }
    }

    #[test]
    fn success_probability_closed_forms() {
        let eta = flat_eta(201);
        let zero = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(success_probability(&zero, &eta), 0.0);

        // Threshold at 1 with beta = 1: P = 1 - e^{-1}.
        let theta = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(
            success_probability(&theta, &eta),
            1.0 - (-1.0f64).exp(),
            epsilon = 1e-9
        );
        assert_relative_eq!(success_probability(&theta, &eta), 0.6321, epsilon = 1e-4);

        // Any control against eta = 1 integrates to 1 - e^{-abar(T)}.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let c = random_control(&mut rng, 10, 0.8);
            assert_relative_eq!(
                success_probability(&c, &eta),
                1.0 - (-c.total_mass()).exp(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn expected_cost_identity_and_oracle() {
        let zero = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![0.0]).unwrap();
        assert_eq!(expected_cost(&zero), 0.0);

        // beta = 1 on [0, 1]: cost 1 - e^{-1}; checked against an independent
        // Riemann sum of the defining expression as well.
        let c = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![1.0, 0.0]).unwrap();
        let got = expected_cost(&c);
        assert_relative_eq!(got, 1.0 - (-1.0f64).exp(), epsilon = 1e-9);
        let riemann = {
            let steps = 2_000_000;
            let h = 2.0 / steps as f64;
            let mut acc = c.total_mass() * (-c.total_mass()).exp();
            for i in 0..steps {
                let t = (i as f64 + 0.5) * h;
                let a = if t < 1.0 { 1.0 } else { 0.0 };
                let abar = t.min(1.0);
                acc += abar * (-abar).exp() * a * h;
            }
            acc
        };
        assert_relative_eq!(got, riemann, epsilon = 1e-7);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let c = random_control(&mut rng, 12, 1.1);
            assert!(
                (expected_cost(&c) - (1.0 - (-c.total_mass()).exp())).abs() <= 1e-9,
                "cost identity"
            );
        }
    }

    #[test]
    fn mass_shift_cases() {
        // Already threshold-shaped: unchanged and flagged.
        let theta = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let (same, already) = mass_shift(&theta);
        assert!(already);
        assert_eq!(same, theta);

        // Full swap of a (0, cap) pattern.
        let swapped = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![0.0, 1.0]).unwrap();
        let (shifted, already) = mass_shift(&swapped);
        assert!(!already);
        assert_eq!(shifted.levels(), &[1.0, 0.0]);

        // Random controls: total mass preserved, abar weakly larger
        // everywhere, success probability weakly better for non-increasing eta.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let c = random_control(&mut rng, 10, 1.0);
            let (s, already) = mass_shift(&c);
            if already {
                assert!(c.is_threshold_shaped());
                continue;
            }
            assert!((s.total_mass() - c.total_mass()).abs() <= 1e-12);
            for i in 0..=200 {
                let t = 2.0 * i as f64 / 200.0;
                assert!(s.accumulated(t).unwrap() >= c.accumulated(t).unwrap() - 1e-12);
            }
            assert!((expected_cost(&s) - expected_cost(&c)).abs() <= 1e-9);
            let eta = decreasing_eta(&mut rng, 257);
            assert!(success_probability(&s, &eta) >= success_probability(&c, &eta) - 1e-12);
        }
    }

    #[test]
    fn stage_objective_zero_control_is_terminal_cost_only() {
        let gain = SampledFunction::from_fn(0.0, 2.0, 41, |_| 3.0);
        let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
        let zero = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![0.0, 0.0]).unwrap();
        assert_eq!(stage_objective(&problem, &zero, 0.0), 0.0);
        // g(x0) alone when no effort is spent.
        let (nu, x0) = (1.0, 1.3f64);
        assert_relative_eq!(
            stage_objective(&problem, &zero, x0),
            -nu * x0 * (-x0).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn stage_objective_matches_fine_riemann_oracle() {
        // Constant gain c > nu, always-on control.
        let gain = SampledFunction::from_fn(0.0, 2.0, 81, |_| 3.0);
        let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
        let on = PiecewiseConstantControl::new(0.0, 2.0, 1.0, vec![1.0; 4]).unwrap();
        let got = stage_objective(&problem, &on, 0.0);
        let steps = 2_000_000;
        let h = 2.0 / steps as f64;
        let mut oracle = 0.0;
        for i in 0..steps {
            let t = (i as f64 + 0.5) * h;
            oracle += (3.0 - 1.0 * t) * 1.0 * (-t).exp() * h;
        }
        oracle -= 1.0 * 2.0 * (-2.0f64).exp();
        assert_relative_eq!(got, oracle, epsilon = 1e-8);
    }

    #[test]
    fn lemma3_scaling_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..100 {
            let a0 = 0.5 + 3.0 * uniform(&mut rng);
            let slope = 2.0 * uniform(&mut rng);
            let gain = SampledFunction::from_fn(0.0, 2.0, 61, |t| a0 - slope * t + (t * 2.1).sin() * 0.3);
            let problem = StageProblem::new(gain, 0.4 + uniform(&mut rng), 0.0, 2.0, 1.0);
            let control = random_control(&mut rng, 9, 1.0);
            let x0 = match trial % 3 {
                0 => 0.0,
                1 => 1.3,
                _ => 5.0,
            };
            let r = lemma3_residual(&problem, &control, x0);
            if x0 == 0.0 {
                assert_eq!(r, 0.0);
            } else {
                assert!(r <= 1e-9, "trial {trial}: residual {r}");
            }
        }
    }

    #[test]
    fn bang_bang_search_constant_gains() {
        // Gain above cost everywhere: all-ones wins.
        let gain = SampledFunction::from_fn(0.0, 2.0, 41, |_| 3.0);
        let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
        let (best, _, is_threshold) = exhaustive_bang_bang_best_response(&problem, 8).unwrap();
        assert!(is_threshold);
        assert!(best.levels().iter().all(|&a| a == 1.0));

        // Zero gain: every unit of effort is pure cost.
        let gain = SampledFunction::from_fn(0.0, 2.0, 41, |_| 0.0);
        let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
        let (best, j_star, is_threshold) = exhaustive_bang_bang_best_response(&problem, 8).unwrap();
        assert!(is_threshold);
        assert_eq!(j_star, 0.0);
        assert!(best.levels().iter().all(|&a| a == 0.0));

        assert!(matches!(
            exhaustive_bang_bang_best_response(&problem, 15),
            Err(OracleError::TooManySegments { got: 15 })
        ));
    }

    #[test]
    fn bang_bang_cut_tracks_the_gain_crossing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let segments = 12;
        for trial in 0..50 {
            let nu = 0.5 + uniform(&mut rng);
            let hi = nu + 0.5 + 2.0 * uniform(&mut rng);
            let lo = (nu - 0.4 - 0.5 * uniform(&mut rng)).max(0.0);
            let p = 0.7 + 1.1 * uniform(&mut rng);
            let gain =
                SampledFunction::from_fn(0.0, 2.0, 101, |t: f64| lo + (hi - lo) * (1.0 - t / 2.0).powf(p));
            let problem = StageProblem::new(gain.clone(), nu, 0.0, 2.0, 1.0);
            let (best, _, is_threshold) = exhaustive_bang_bang_best_response(&problem, segments).unwrap();
            assert!(is_threshold, "trial {trial}: maximizer must be a prefix of ones");
            let ones = best.levels().iter().filter(|&&a| a > 0.0).count();
            let cut = best.boundary(ones);
            let root = threshold_root(&gain, 0.0, nu, 2.0);
            let seg_len = 2.0 / segments as f64;
            assert!(
                (cut - root).abs() <= seg_len + 1e-12,
                "trial {trial}: cut {cut} vs root {root}"
            );
        }
    }

    #[test]
    fn suffix_restart_agrees_with_full_solution() {
        // Constant gain above cost: both all-ones.
        let gain = SampledFunction::from_fn(0.0, 2.0, 41, |_| 3.0);
        let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
        assert_eq!(suffix_consistency_check(&problem, 0.5, 8).unwrap(), 0.0);

        // Decreasing gain crossing nu strictly inside (tau, T).
        let gain = SampledFunction::from_fn(0.0, 2.0, 101, |t| 2.0 - 0.9 * t);
        let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
        let d = suffix_consistency_check(&problem, 0.5, 8).unwrap();
        assert_eq!(d, 0.0);

        // Crossing exactly on a segment boundary: at most the tie segment.
        let gain = SampledFunction::from_fn(0.0, 2.0, 101, |t| 2.0 - t);
        let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
        let d = suffix_consistency_check(&problem, 0.5, 8).unwrap();
        assert!(d <= 1.0 / 4.0 + 1e-12, "at most one segment of disagreement, got {d}");

        assert!(matches!(
            suffix_consistency_check(&problem, 0.37, 8),
            Err(OracleError::MisalignedRestart { .. })
        ));
    }

    #[test]
    fn terminal_stage_consistency_with_recursion() {
        // Constant gain c_M: above nu enumerates to all-ones (threshold T),
        // below nu to all-zeros (threshold 0), matching the recursion's
        // terminal indicator.
        for (c_m, expect_ones) in [(3.0, true), (0.5, false)] {
            let gain = SampledFunction::from_fn(0.0, 2.0, 41, move |_| c_m);
            let problem = StageProblem::new(gain, 1.0, 0.0, 2.0, 1.0);
            let (best, _, _) = exhaustive_bang_bang_best_response(&problem, 10).unwrap();
            let all_on = best.levels().iter().all(|&a| a > 0.0);
            let all_off = best.levels().iter().all(|&a| a == 0.0);
            assert!(if expect_ones { all_on } else { all_off });
        }
    }
}
