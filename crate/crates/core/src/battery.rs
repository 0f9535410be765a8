//! Seeded instance batteries for the structural checks.
//!
//! Each battery draws a deterministic family of random stage problems or
//! controls and runs one structural check per instance: the cost identity
//! and mass-shift dominance, the state-scaling residual, front-loadedness of
//! exhaustive bang-bang maximizers, and restart consistency.  The CLI's
//! `oracle-check` and `verify` commands print these records; the acceptance
//! suite asserts them at its own instance counts.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::SampledFunction;
use crate::oracle::{
    exhaustive_bang_bang_best_response, expected_cost, lemma3_residual, mass_shift,
    success_probability, suffix_consistency_check, PiecewiseConstantControl, StageProblem,
};
use crate::recursion::threshold_root;
use crate::{real, Real};

/// One instance of one battery case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord<T> {
    pub case: &'static str,
    pub instance: usize,
    /// Case-specific residual (absolute error, normalized cut distance, or
    /// disagreement fraction).
    pub residual: T,
    pub ok: bool,
    pub note: String,
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng) -> T {
    real((rng.next_u64() >> 11) as f64 / 9007199254740992.0)
}

fn random_control<T: Real>(
    rng: &mut ChaCha8Rng,
    span: T,
    segments: usize,
    cap: T,
) -> PiecewiseConstantControl<T> {
    let levels = (0..segments)
        .map(|_| {
            let u: T = uniform(rng);
            if u < real(0.2) {
                T::zero()
            } else if u > real(0.85) {
                cap
            } else {
                cap * uniform(rng)
            }
        })
        .collect();
    PiecewiseConstantControl::new(T::zero(), span, cap, levels).expect("levels within [0, cap]")
}

/// Cost identity and the mass-shift dominance triple on random controls.
pub fn battery_lemma1<T: Real>(seed: u64, count: usize) -> Vec<CaseRecord<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = real::<T>(2.0);
    let tol_cost = real::<T>(1e-9);
    let tol_mono = real::<T>(1e-12);
    (0..count)
        .map(|instance| {
            let segments = 8 + (rng.next_u64() % 5) as usize;
            let cap = real::<T>(0.6) + uniform::<T>(&mut rng) * real(0.8);
            let control = random_control(&mut rng, span, segments, cap);
            let lambda: T = real::<T>(0.3) + uniform::<T>(&mut rng) * real(2.0);
            let eta = SampledFunction::from_fn(T::zero(), span, 257, |t| (-lambda * t).exp());

            let identity =
                (expected_cost(&control) - (T::one() - (-control.total_mass()).exp())).abs();
            let (shifted, already) = mass_shift(&control);
            let cost_drift = (expected_cost(&shifted) - expected_cost(&control)).abs();
            let success_gain =
                success_probability(&shifted, &eta) - success_probability(&control, &eta);
            let mut cdf_ok = true;
            for i in 0..=100 {
                let t = span * T::from_usize(i).unwrap() / real(100.0);
                let a = control.accumulated(t).expect("t in span");
                let b = shifted.accumulated(t).expect("t in span");
                if b < a - tol_mono {
                    cdf_ok = false;
                }
            }
            let residual = identity.max(cost_drift);
            let ok = residual <= tol_cost && success_gain >= -tol_mono && cdf_ok;
            CaseRecord {
                case: "lemma1",
                instance,
                residual,
                ok,
                note: if already { "already threshold-shaped".into() } else { String::new() },
            }
        })
        .collect()
}

/// State-scaling residual `|J(s, x0, a) - e^{-x0}(J(s, 0, a) - nu x0)|` on
/// random gains, controls and starting states.
pub fn battery_lemma3<T: Real>(seed: u64, count: usize) -> Vec<CaseRecord<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = real::<T>(2.0);
    let bound = real::<T>(1e-9);
    (0..count)
        .map(|instance| {
            let base: T = real::<T>(0.5) + uniform::<T>(&mut rng) * real(3.0);
            let slope: T = uniform::<T>(&mut rng) * real(2.0);
            let wobble: T = uniform::<T>(&mut rng) * real(0.4);
            let gain = SampledFunction::from_fn(T::zero(), span, 61, |t| {
                base - slope * t + wobble * (t * real(2.1)).sin()
            });
            let nu = real::<T>(0.3) + uniform::<T>(&mut rng);
            let problem = StageProblem::new(gain, nu, T::zero(), span, T::one());
            let control = random_control(&mut rng, span, 9, T::one());
            let x0: T = match instance % 4 {
                0 => T::zero(),
                1 => real(1.3),
                2 => real(5.0),
                _ => uniform::<T>(&mut rng) * real(3.0),
            };
            let residual = lemma3_residual(&problem, &control, x0);
            CaseRecord { case: "lemma3", instance, residual, ok: residual <= bound, note: String::new() }
        })
        .collect()
}

/// Exhaustive bang-bang search on strictly decreasing gains: the maximizer
/// must be a prefix of ones with its cut within one segment of the gain's
/// crossing of `nu`.
pub fn battery_bangbang<T: Real>(seed: u64, count: usize, segments: usize) -> Vec<CaseRecord<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = real::<T>(2.0);
    (0..count)
        .map(|instance| {
            let nu: T = real::<T>(0.5) + uniform::<T>(&mut rng);
            let hi = nu + real(0.5) + uniform::<T>(&mut rng) * real(2.0);
            let lo = (nu - real(0.4) - uniform::<T>(&mut rng) * real(0.5)).max(T::zero());
            let p: T = real::<T>(0.7) + uniform::<T>(&mut rng) * real(1.1);
            let gain = SampledFunction::from_fn(T::zero(), span, 101, |t| {
                lo + (hi - lo) * (T::one() - t / span).powf(p)
            });
            let problem = StageProblem::new(gain.clone(), nu, T::zero(), span, T::one());
            let (best, _, is_threshold) =
                exhaustive_bang_bang_best_response(&problem, segments).expect("segments in range");
            let ones = best.levels().iter().filter(|&&a| a > T::zero()).count();
            let cut = best.boundary(ones);
            let root = threshold_root(&gain, T::zero(), nu, span);
            let seg_len = span / T::from_usize(segments).unwrap();
            let residual = (cut - root).abs() / seg_len;
            CaseRecord {
                case: "bangbang",
                instance,
                residual,
                ok: is_threshold && residual <= T::one() + real(1e-9),
                note: format!("cut {:.4}, root {:.4}", cut, root),
            }
        })
        .collect()
}

/// Restart consistency: the best response recomputed from a later segment
/// boundary must agree with the suffix of the full one, up to the boundary
/// tie segment.
pub fn battery_suffix<T: Real>(seed: u64, count: usize, segments: usize) -> Vec<CaseRecord<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = real::<T>(2.0);
    (0..count)
        .map(|instance| {
            let nu: T = real::<T>(0.5) + uniform::<T>(&mut rng);
            let hi = nu + real(0.5) + uniform::<T>(&mut rng) * real(2.0);
            let lo = (nu - real(0.6) - uniform::<T>(&mut rng) * real(0.4)).max(T::zero());
            let gain = SampledFunction::from_fn(T::zero(), span, 101, |t| {
                lo + (hi - lo) * (T::one() - t / span)
            });
            let problem = StageProblem::new(gain, nu, T::zero(), span, T::one());
            let k = 1 + (rng.next_u64() % (segments as u64 - 1)) as usize;
            let seg_len = span / T::from_usize(segments).unwrap();
            let tau = seg_len * T::from_usize(k).unwrap();
            let residual =
                suffix_consistency_check(&problem, tau, segments).expect("aligned restart");
            let suffix_count = segments - k;
            let ok = residual <= T::one() / T::from_usize(suffix_count).unwrap() + real(1e-12);
            CaseRecord {
                case: "suffix",
                instance,
                residual,
                ok,
                note: format!("restart segment {k}"),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batteries_pass_and_are_deterministic() {
        let l1: Vec<CaseRecord<f64>> = battery_lemma1(9, 25);
        assert!(l1.iter().all(|r| r.ok));
        let l3: Vec<CaseRecord<f64>> = battery_lemma3(9, 25);
        assert!(l3.iter().all(|r| r.ok));
        let bb: Vec<CaseRecord<f64>> = battery_bangbang(9, 10, 10);
        assert!(bb.iter().all(|r| r.ok));
        let sf: Vec<CaseRecord<f64>> = battery_suffix(9, 10, 10);
        assert!(sf.iter().all(|r| r.ok));

        let again: Vec<CaseRecord<f64>> = battery_lemma3(9, 25);
        assert_eq!(l3, again);
    }
}
