//! Direct layer-error-rate estimation from the noise model.
//!
//! The benchmark infers ε_Ω from measured decays; this oracle computes the
//! same quantity without sampling shots. It draws K random cores per
//! depth, evaluates each core's exact polarization through the noisy
//! transfer matrices, and fits γ̄_d = A·p_rc^d. The resulting
//! ε_Ω = (4^n − 1)(1 − p_rc)/4^n is what the benchmark should converge
//! to, so it is the reference value for validating the full pipeline.

use rand::Rng as _;
use rand::SeedableRng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_decay, r_omega, DecayCurve, DecayPoint, FitOptions, RateConvention};
use crate::engines::CorePolarizer;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::sampler::OmegaSpec;

/// Knobs for [`epsilon_omega_oracle_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonOmegaOptions {
    /// Fit γ̄_d = A·p^d + B instead of forcing B = 0.
    pub fit_offset: bool,
    /// Bootstrap replicates for the ε_Ω deviation; 0 skips it.
    pub bootstrap_replicates: usize,
}

impl Default for EpsilonOmegaOptions {
    fn default() -> Self {
        EpsilonOmegaOptions {
            fit_offset: false,
            bootstrap_replicates: 200,
        }
    }
}

/// The oracle's estimate of the layer error rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonOmegaEstimate {
    pub n: usize,
    /// ε_Ω in the entanglement convention.
    pub epsilon: f64,
    /// Fitted polarization decay rate of the random core.
    pub p_rc: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Bootstrap deviation of ε over core resampling; absent for K < 2
    /// or when replicates are disabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub depths: Vec<usize>,
    /// Mean core polarization at each depth, aligned with `depths`.
    pub gamma_bar: Vec<f64>,
}

fn gamma_points(n: usize, depths: &[usize], per_depth: &[Vec<f64>]) -> DecayCurve {
    let points = depths
        .iter()
        .zip(per_depth)
        .map(|(&depth, gammas)| {
            let k = gammas.len();
            let mean = gammas.iter().sum::<f64>() / k as f64;
            let sigma = if k >= 2 {
                let var =
                    gammas.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (k - 1) as f64;
                let sem = (var / k as f64).sqrt();
                (sem > 1e-14).then_some(sem)
            } else {
                None
            };
            DecayPoint {
                depth,
                fbar: mean,
                sigma,
                circuits: k,
            }
        })
        .collect();
    DecayCurve { n, points }
}

/// Fit a decay with a free offset: γ̄_d = A·p^d + B, weighted least
/// squares with (A, B) profiled out at each trial p.
fn fit_with_offset(curve: &DecayCurve) -> Result<(f64, f64, f64)> {
    let depths: Vec<usize> = curve.points.iter().map(|pt| pt.depth).collect();
    let gbar: Vec<f64> = curve.points.iter().map(|pt| pt.fbar).collect();
    let weighted = curve.points.iter().all(|pt| pt.sigma.is_some());
    let weights: Vec<f64> = curve
        .points
        .iter()
        .map(|pt| {
            if weighted {
                let s = pt.sigma.unwrap_or(1.0);
                1.0 / (s * s)
            } else {
                1.0
            }
        })
        .collect();
    if depths.len() < 3 {
        return Err(Error::fit_failure(
            "offset fit needs three or more distinct depths",
        ));
    }

    let profile = |p: f64| -> (f64, f64) {
        let (mut sxx, mut sx, mut sw, mut sxy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&d, &g), &w) in depths.iter().zip(&gbar).zip(&weights) {
            let x = p.powi(d as i32);
            sxx += w * x * x;
            sx += w * x;
            sw += w;
            sxy += w * x * g;
            sy += w * g;
        }
        let det = sxx * sw - sx * sx;
        if det.abs() < 1e-12 * sxx.max(sw).max(1.0) {
            // x is constant in d: the split between A and B is arbitrary,
            // so put everything in A.
            return (sy / sw, 0.0);
        }
        let a = (sxy * sw - sx * sy) / det;
        let b = (sxx * sy - sx * sxy) / det;
        (a, b)
    };
    let sse = |p: f64| -> f64 {
        let (a, b) = profile(p);
        depths
            .iter()
            .zip(&gbar)
            .zip(&weights)
            .map(|((&d, &g), &w)| {
                let r = g - a * p.powi(d as i32) - b;
                w * r * r
            })
            .sum()
    };

    const CELLS: usize = 2000;
    let step = 1.0 / CELLS as f64;
    let mut best_p = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..=CELLS {
        let p = i as f64 * step;
        let s = sse(p);
        if s < best {
            best = s;
            best_p = p;
        }
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = ((best_p - step).max(0.0), (best_p + step).min(1.0));
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (sse(c), sse(d));
    while hi - lo > 1e-13 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = sse(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = sse(d);
        }
    }
    let p = 0.5 * (lo + hi);
    if p > 1.0 - 1e-9 {
        return Err(Error::fit_failure(
            "offset fit is unidentifiable on a flat decay; drop the offset",
        ));
    }
    if p < 1e-9 {
        return Err(Error::fit_failure("offset fit pinned the rate at p = 0"));
    }
    let (a, b) = profile(p);
    if !(a > 0.0 && a < 1.1) {
        return Err(Error::fit_failure(format!(
            "offset fit amplitude A = {a} outside (0, 1.1)"
        )));
    }
    Ok((a, b, p))
}

fn estimate_from_gammas(
    n: usize,
    depths: &[usize],
    per_depth: &[Vec<f64>],
    fit_offset: bool,
) -> Result<(f64, f64, f64, f64)> {
    let curve = gamma_points(n, depths, per_depth);
    let constant = curve
        .points
        .iter()
        .all(|pt| (pt.fbar - curve.points[0].fbar).abs() < 1e-12);
    if constant {
        // Flat polarization: no decay, ε = 0 regardless of offset mode.
        return Ok((curve.points[0].fbar, 0.0, 1.0, 0.0));
    }
    if fit_offset {
        let (a, b, p) = fit_with_offset(&curve)?;
        Ok((a, b, p, r_omega(p, n, RateConvention::Entanglement)))
    } else {
        let fit = fit_decay(
            &curve,
            &FitOptions {
                convention: RateConvention::Entanglement,
            },
        )?;
        Ok((fit.a, 0.0, fit.p, fit.r_omega))
    }
}

/// Estimate ε_Ω from the noise model with default options.
pub fn epsilon_omega_oracle(
    spec: &OmegaSpec,
    noise: &NoiseModel,
    depths: &[usize],
    k: usize,
    rng: &mut impl rand::Rng,
) -> Result<EpsilonOmegaEstimate> {
    epsilon_omega_oracle_with(spec, noise, depths, k, &EpsilonOmegaOptions::default(), rng)
}

/// Estimate ε_Ω from the noise model.
///
/// Draws `k` random cores per depth sequentially from `rng`, then
/// evaluates their polarizations in parallel, so the estimate does not
/// depend on the worker count.
pub fn epsilon_omega_oracle_with(
    spec: &OmegaSpec,
    noise: &NoiseModel,
    depths: &[usize],
    k: usize,
    options: &EpsilonOmegaOptions,
    rng: &mut impl rand::Rng,
) -> Result<EpsilonOmegaEstimate> {
    let n = spec.qubit_count();
    if k == 0 {
        return Err(Error::domain("need at least one core circuit per depth"));
    }
    let mut sorted = depths.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2 {
        return Err(Error::domain(
            "need two or more distinct depths to fit the core decay",
        ));
    }
    let polarizer = CorePolarizer::new(noise, n)?;

    let cores: Vec<(usize, Vec<crate::circuits::GateLayer>)> = sorted
        .iter()
        .flat_map(|&d| {
            (0..k)
                .map(|_| (d, (0..d).map(|_| spec.sample_layer(rng)).collect()))
                .collect::<Vec<_>>()
        })
        .collect();
    let gammas: Vec<f64> = cores
        .par_iter()
        .map(|(_, layers)| polarizer.polarization(layers))
        .collect::<Result<_>>()?;
    let per_depth: Vec<Vec<f64>> = sorted
        .iter()
        .enumerate()
        .map(|(i, _)| gammas[i * k..(i + 1) * k].to_vec())
        .collect();

    let (a, b, p_rc, epsilon) = estimate_from_gammas(n, &sorted, &per_depth, options.fit_offset)?;

    let sigma = if options.bootstrap_replicates >= 2 && k >= 2 {
        let seeds: Vec<u64> = (0..options.bootstrap_replicates).map(|_| rng.gen()).collect();
        let eps: Vec<f64> = seeds
            .par_iter()
            .filter_map(|&seed| {
                let mut rng = crate::rng::Rng::seed_from_u64(seed);
                let resampled: Vec<Vec<f64>> = per_depth
                    .iter()
                    .map(|g| (0..g.len()).map(|_| g[rng.gen_range(0..g.len())]).collect())
                    .collect();
                estimate_from_gammas(n, &sorted, &resampled, options.fit_offset)
                    .ok()
                    .map(|(_, _, _, e)| e)
            })
            .collect();
        if eps.len() >= 2 {
            let mean = eps.iter().sum::<f64>() / eps.len() as f64;
            let var =
                eps.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (eps.len() - 1) as f64;
            Some(var.sqrt())
        } else {
            None
        }
    } else {
        None
    };

    let gamma_bar = per_depth
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    Ok(EpsilonOmegaEstimate {
        n,
        epsilon,
        p_rc,
        a,
        b,
        sigma,
        depths: sorted,
        gamma_bar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::GateSetSpec;
    use crate::rng::SeedStream;

    fn rng_for(label: &str) -> crate::rng::Rng {
        SeedStream::new(0x09ACE).child_named(label).rng()
    }

    #[test]
    fn ideal_noise_gives_zero_epsilon() {
        let spec = OmegaSpec::new(GateSetSpec::all_to_all_default(2).unwrap(), 0.5).unwrap();
        let noise = NoiseModel::ideal(2);
        let mut rng = rng_for("ideal");
        let est = epsilon_omega_oracle(&spec, &noise, &[0, 2, 4], 3, &mut rng).unwrap();
        assert_eq!(est.epsilon, 0.0);
        assert_eq!(est.p_rc, 1.0);
        assert!(est.gamma_bar.iter().all(|&g| (g - 1.0).abs() < 1e-12));
    }

    #[test]
    fn global_depolarizing_rate_is_exact() {
        // A depolarizing layer error multiplies every non-identity
        // expectation by γ each layer, so p_rc = γ with zero scatter.
        let n = 2;
        let gamma = 0.97;
        let spec = OmegaSpec::new(GateSetSpec::all_to_all_default(n).unwrap(), 0.5).unwrap();
        let noise = NoiseModel::global_depolarizing(n, gamma).unwrap();
        let mut rng = rng_for("depol");
        let est = epsilon_omega_oracle(&spec, &noise, &[0, 1, 2, 4, 8], 4, &mut rng).unwrap();
        assert!((est.p_rc - gamma).abs() < 1e-9, "p_rc = {}", est.p_rc);
        let expect = 15.0 / 16.0 * (1.0 - gamma);
        assert!((est.epsilon - expect).abs() < 1e-9);
        assert_eq!(est.b, 0.0);
        let s = est.sigma.unwrap();
        assert!(s < 1e-9, "σ = {s}");
    }

    #[test]
    fn offset_variant_agrees_on_a_pure_decay() {
        let n = 1;
        let spec = OmegaSpec::new(GateSetSpec::all_to_all_default(n).unwrap(), 0.0).unwrap();
        let noise = NoiseModel::global_depolarizing(n, 0.9).unwrap();
        let opts = EpsilonOmegaOptions {
            fit_offset: true,
            bootstrap_replicates: 0,
        };
        let mut rng = rng_for("offset");
        let est =
            epsilon_omega_oracle_with(&spec, &noise, &[0, 1, 2, 4, 8], 3, &opts, &mut rng).unwrap();
        assert!((est.p_rc - 0.9).abs() < 1e-7, "p_rc = {}", est.p_rc);
        assert!(est.b.abs() < 1e-7, "B = {}", est.b);
        assert!(est.sigma.is_none());
    }

    #[test]
    fn depth_and_count_validation() {
        let spec = OmegaSpec::new(GateSetSpec::all_to_all_default(1).unwrap(), 0.0).unwrap();
        let noise = NoiseModel::ideal(1);
        let mut rng = rng_for("validate");
        assert!(epsilon_omega_oracle(&spec, &noise, &[2], 3, &mut rng).is_err());
        assert!(epsilon_omega_oracle(&spec, &noise, &[0, 2], 0, &mut rng).is_err());
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let spec = OmegaSpec::new(GateSetSpec::all_to_all_default(2).unwrap(), 0.5).unwrap();
        let noise = NoiseModel::ideal(3);
        let mut rng = rng_for("mismatch");
        assert!(epsilon_omega_oracle(&spec, &noise, &[0, 2], 2, &mut rng).is_err());
    }
}
