//! Decay aggregation, exponential fitting, and bootstrap uncertainty.
//!
//! The fit model is f̄_d = A·p^d with A ∈ [0, 1.1] and p ∈ [0, 1].
//! A is profiled out in closed form at fixed p, so the optimization is a
//! one-dimensional bounded search: a coarse grid seeds a golden-section
//! refinement, which is deterministic and has no free tuning knobs.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand::SeedableRng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engines::Dataset;
use crate::error::{Error, Result};

/// How a polarization maps to an error rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateConvention {
    /// r = (4^n − 1)(1 − p)/4^n: entanglement infidelity of the layer.
    #[default]
    Entanglement,
    /// r = (2^n − 1)(1 − p)/2^n: average-gate infidelity rescaling.
    AverageGate,
}

impl RateConvention {
    pub fn name(&self) -> &'static str {
        match self {
            RateConvention::Entanglement => "entanglement",
            RateConvention::AverageGate => "average-gate",
        }
    }
}

impl std::fmt::Display for RateConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RateConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entanglement" => Ok(RateConvention::Entanglement),
            "average-gate" => Ok(RateConvention::AverageGate),
            other => Err(Error::config(format!(
                "unknown rate convention {other:?}; expected entanglement or average-gate"
            ))),
        }
    }
}

/// Error rate of a layer with polarization p on n qubits.
pub fn r_omega(p: f64, n: usize, convention: RateConvention) -> f64 {
    let dim = match convention {
        RateConvention::Entanglement => 4f64.powi(n as i32),
        RateConvention::AverageGate => 2f64.powi(n as i32),
    };
    (dim - 1.0) / dim * (1.0 - p)
}

/// Rescale an n-qubit rate to the rate per qubit: the per-qubit rate of n
/// independent qubits that compounds to r.
pub fn per_qubit_rate(r: f64, n: usize) -> f64 {
    1.0 - (1.0 - r).powf(1.0 / n as f64)
}

/// One depth's aggregated mean success value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub depth: usize,
    pub fbar: f64,
    /// Standard error of the mean from circuit-to-circuit scatter; absent
    /// for single-circuit depths and scatter-free (exact) data.
    pub sigma: Option<f64>,
    pub circuits: usize,
}

/// Per-depth means ready for fitting, tagged with the register width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub n: usize,
    pub points: Vec<DecayPoint>,
}

fn mean_and_sem(values: &[f64]) -> (f64, Option<f64>) {
    let k = values.len();
    let mean = values.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    let sem = (var / k as f64).sqrt();
    if sem > 1e-14 {
        (mean, Some(sem))
    } else {
        (mean, None)
    }
}

fn depth_groups(dataset: &Dataset) -> BTreeMap<usize, Vec<f64>> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in &dataset.rows {
        groups.entry(row.d).or_default().push(row.mean());
    }
    groups
}

fn points_from_groups(groups: &BTreeMap<usize, Vec<f64>>) -> Vec<DecayPoint> {
    groups
        .iter()
        .map(|(&depth, values)| {
            let (fbar, sigma) = mean_and_sem(values);
            DecayPoint {
                depth,
                fbar,
                sigma,
                circuits: values.len(),
            }
        })
        .collect()
}

impl Dataset {
    /// Mean success value over all circuits at one benchmark depth.
    pub fn fbar(&self, depth: usize) -> Result<f64> {
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.d == depth)
            .map(|r| r.mean())
            .collect();
        if values.is_empty() {
            return Err(Error::domain(format!("no circuits at depth {depth}")));
        }
        Ok(values.iter().sum::<f64>() / values.len() as f64)
    }

    /// Aggregate per-circuit means into one decay point per depth.
    pub fn decay_points(&self) -> DecayCurve {
        DecayCurve {
            n: self.rows.first().map(|r| r.n).unwrap_or(0),
            points: points_from_groups(&depth_groups(self)),
        }
    }
}

/// Knobs for [`fit_decay`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    pub convention: RateConvention,
}

/// How the fit terminated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Converged,
    /// The data shows no decay: p = 1 exactly, so r_Ω = 0.
    ConstantPolarization,
}

/// Bootstrap standard deviations of the fitted quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSigma {
    #[serde(rename = "A")]
    pub a: f64,
    pub p: f64,
    pub r_omega: f64,
    pub replicates: usize,
    /// Replicates whose refit failed; excluded from the deviations.
    pub failures: usize,
}

/// A fitted decay f̄_d = A·p^d and the derived error rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub n: usize,
    pub depths: Vec<usize>,
    pub fbar: Vec<f64>,
    #[serde(rename = "A")]
    pub a: f64,
    pub p: f64,
    pub r_omega: f64,
    pub r_omega_per_qubit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<FitSigma>,
    pub convention: RateConvention,
    pub fit_status: FitStatus,
    pub residuals: Vec<f64>,
}

/// Least-squares amplitude at fixed p, clamped to the allowed band.
fn profiled_a(depths: &[usize], fbar: &[f64], weights: &[f64], p: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&d, &f), &w) in depths.iter().zip(fbar).zip(weights) {
        let pd = p.powi(d as i32);
        num += w * f * pd;
        den += w * pd * pd;
    }
    if den <= 0.0 {
        return 0.0;
    }
    (num / den).clamp(0.0, 1.1)
}

fn sse(depths: &[usize], fbar: &[f64], weights: &[f64], p: f64) -> f64 {
    let a = profiled_a(depths, fbar, weights, p);
    depths
        .iter()
        .zip(fbar)
        .zip(weights)
        .map(|((&d, &f), &w)| {
            let r = f - a * p.powi(d as i32);
            w * r * r
        })
        .sum()
}

/// Golden-section minimum of the profiled objective on [lo, hi].
fn golden_refine(depths: &[usize], fbar: &[f64], weights: &[f64], lo: f64, hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (lo.max(0.0), hi.min(1.0));
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = sse(depths, fbar, weights, c);
    let mut fd = sse(depths, fbar, weights, d);
    while hi - lo > 1e-13 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = sse(depths, fbar, weights, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = sse(depths, fbar, weights, d);
        }
    }
    0.5 * (lo + hi)
}

/// Minimize over p: coarse grid plus the log-linear seed, then a
/// golden-section polish around the best cell.
fn minimize_p(depths: &[usize], fbar: &[f64], weights: &[f64]) -> f64 {
    const CELLS: usize = 2000;
    let step = 1.0 / CELLS as f64;
    let mut best_p = 0.0;
    let mut best = f64::INFINITY;
    for i in 0..=CELLS {
        let p = i as f64 * step;
        let s = sse(depths, fbar, weights, p);
        if s < best {
            best = s;
            best_p = p;
        }
    }
    if let Some(seed) = log_linear_seed(depths, fbar) {
        let s = sse(depths, fbar, weights, seed);
        if s < best {
            best_p = seed;
        }
    }
    golden_refine(
        depths,
        fbar,
        weights,
        best_p - step,
        best_p + step,
    )
}

/// Slope of ln f̄ against d over the positive points, as exp(slope).
fn log_linear_seed(depths: &[usize], fbar: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = depths
        .iter()
        .zip(fbar)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&d, &f)| (d as f64, f.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let det = k * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return None;
    }
    let slope = (k * sxy - sx * sy) / det;
    let p = slope.exp();
    if p.is_finite() {
        Some(p.clamp(0.0, 1.0))
    } else {
        None
    }
}

/// Fit f̄_d = A·p^d to the aggregated decay points.
///
/// Degenerate data is an error rather than an extrapolation: fewer than
/// two distinct depths, no positive means, or an estimate pinned at A = 0,
/// A = 1.1, or p = 0 all fail. Constant data fits cleanly as p = 1.
pub fn fit_decay(curve: &DecayCurve, options: &FitOptions) -> Result<DecayFit> {
    if curve.points.is_empty() {
        return Err(Error::fit_failure("no decay points to fit"));
    }
    if curve.n == 0 {
        return Err(Error::domain("decay curve has no register width"));
    }
    let mut depths = Vec::with_capacity(curve.points.len());
    let mut fbar = Vec::with_capacity(curve.points.len());
    for pt in &curve.points {
        if !pt.fbar.is_finite() {
            return Err(Error::domain(format!(
                "mean at depth {} is not finite",
                pt.depth
            )));
        }
        if depths.contains(&pt.depth) {
            return Err(Error::domain(format!("depth {} appears twice", pt.depth)));
        }
        depths.push(pt.depth);
        fbar.push(pt.fbar);
    }
    if depths.len() < 2 {
        return Err(Error::fit_failure(
            "need means at two or more distinct depths to fit a decay",
        ));
    }
    if fbar.iter().all(|&f| f <= 0.0) {
        return Err(Error::fit_failure(
            "every depth-averaged success value is ≤ 0; no decay to fit",
        ));
    }
    let weighted = curve.points.iter().all(|pt| pt.sigma.is_some());
    let weights: Vec<f64> = if weighted {
        let w: Vec<f64> = curve
            .points
            .iter()
            .map(|pt| {
                let s = pt.sigma.unwrap_or(1.0);
                1.0 / (s * s)
            })
            .collect();
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite fit weight"));
        }
        w
    } else {
        vec![1.0; depths.len()]
    };

    let mut p = minimize_p(&depths, &fbar, &weights);
    let mut status = FitStatus::Converged;
    if p > 1.0 - 1e-9 {
        p = 1.0;
        status = FitStatus::ConstantPolarization;
    }
    if p < 1e-9 {
        return Err(Error::fit_failure(
            "decay rate pinned at p = 0; data is not an exponential decay",
        ));
    }
    let a = profiled_a(&depths, &fbar, &weights, p);
    if a <= 0.0 {
        return Err(Error::fit_failure(
            "amplitude pinned at A = 0; data is not an exponential decay",
        ));
    }
    if a >= 1.1 {
        return Err(Error::fit_failure(
            "amplitude pinned at the A = 1.1 bound; data is not a success-value decay",
        ));
    }
    let residuals: Vec<f64> = depths
        .iter()
        .zip(&fbar)
        .map(|(&d, &f)| f - a * p.powi(d as i32))
        .collect();
    let r = r_omega(p, curve.n, options.convention);
    Ok(DecayFit {
        n: curve.n,
        depths,
        fbar,
        a,
        p,
        r_omega: r,
        r_omega_per_qubit: per_qubit_rate(r, curve.n),
        sigma: None,
        convention: options.convention,
        fit_status: status,
        residuals,
    })
}

/// Bootstrap standard deviations by resampling circuits with replacement
/// within each depth and refitting.
///
/// Replicates run in parallel but draw from per-replicate seeds taken
/// sequentially from `rng`, so results do not depend on the worker count.
pub fn bootstrap(
    dataset: &Dataset,
    options: &FitOptions,
    replicates: usize,
    rng: &mut impl rand::Rng,
) -> Result<FitSigma> {
    if replicates < 100 {
        return Err(Error::domain(format!(
            "bootstrap needs at least 100 replicates, got {replicates}"
        )));
    }
    let n = dataset.rows.first().map(|r| r.n).unwrap_or(0);
    let groups: Vec<Vec<f64>> = depth_groups(dataset).into_values().collect();
    let depths: Vec<usize> = depth_groups(dataset).into_keys().collect();
    if groups.is_empty() {
        return Err(Error::domain("empty dataset"));
    }
    let seeds: Vec<u64> = (0..replicates).map(|_| rng.gen()).collect();
    let fits: Vec<Option<(f64, f64, f64)>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = crate::rng::Rng::seed_from_u64(seed);
            let mut resampled: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (d, values) in depths.iter().zip(&groups) {
                let draw: Vec<f64> = (0..values.len())
                    .map(|_| values[rng.gen_range(0..values.len())])
                    .collect();
                resampled.insert(*d, draw);
            }
            let curve = DecayCurve {
                n,
                points: points_from_groups(&resampled),
            };
            fit_decay(&curve, options)
                .ok()
                .map(|fit| (fit.a, fit.p, fit.r_omega))
        })
        .collect();
    let ok: Vec<(f64, f64, f64)> = fits.iter().flatten().copied().collect();
    let failures = replicates - ok.len();
    if ok.len() < 2 {
        return Err(Error::fit_failure(format!(
            "bootstrap refits failed in {failures} of {replicates} replicates"
        )));
    }
    let std_of = |pick: fn(&(f64, f64, f64)) -> f64| {
        let vals: Vec<f64> = ok.iter().map(pick).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vals.len() - 1) as f64)
            .sqrt()
    };
    Ok(FitSigma {
        a: std_of(|t| t.0),
        p: std_of(|t| t.1),
        r_omega: std_of(|t| t.2),
        replicates,
        failures,
    })
}

/// Fit a dataset end to end: aggregate, fit, and (optionally) attach
/// bootstrap deviations derived deterministically from `seed`.
pub fn fit_dataset(
    dataset: &Dataset,
    options: &FitOptions,
    bootstrap_replicates: Option<usize>,
    seed: u64,
) -> Result<DecayFit> {
    let mut fit = fit_decay(&dataset.decay_points(), options)?;
    if let Some(b) = bootstrap_replicates {
        let mut rng = crate::rng::SeedStream::new(seed).child_named("bootstrap").rng();
        fit.sigma = Some(bootstrap(dataset, options, b, &mut rng)?);
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::DatasetRow;

    fn curve(n: usize, pts: &[(usize, f64)]) -> DecayCurve {
        DecayCurve {
            n,
            points: pts
                .iter()
                .map(|&(depth, fbar)| DecayPoint {
                    depth,
                    fbar,
                    sigma: None,
                    circuits: 1,
                })
                .collect(),
        }
    }

    fn synthetic_rows(n: usize, a: f64, p: f64, depths: &[usize], k: usize) -> Dataset {
        // Deterministic circuit scatter around the decay curve.
        let mut rows = Vec::new();
        for &d in depths {
            for i in 0..k {
                let jitter = 0.01 * ((i as f64 * 2.399) + d as f64).sin();
                rows.push(DatasetRow {
                    schema_version: "1.0.0".into(),
                    id: format!("d{d:04}-c{i:04}"),
                    n,
                    d,
                    target: "+Z".into(),
                    shots: 0,
                    success_sum: 0,
                    exact: Some(a * p.powi(d as i32) + jitter),
                });
            }
        }
        Dataset { rows }
    }

    #[test]
    fn conventions_evaluate_the_closed_forms() {
        assert_eq!(r_omega(1.0, 3, RateConvention::Entanglement), 0.0);
        assert!((r_omega(0.9, 2, RateConvention::Entanglement) - 0.09375).abs() < 1e-15);
        assert!((r_omega(0.96, 1, RateConvention::AverageGate) - 0.02).abs() < 1e-15);
        let r = r_omega(0.9, 2, RateConvention::Entanglement);
        let per_q = per_qubit_rate(r, 2);
        assert!(((1.0 - per_q) * (1.0 - per_q) - (1.0 - r)).abs() < 1e-15);
    }

    #[test]
    fn exact_model_data_is_recovered_to_high_precision() {
        let depths = [0usize, 1, 2, 4, 8, 16, 32, 64];
        let pts: Vec<(usize, f64)> = depths.iter().map(|&d| (d, 0.98 * 0.95f64.powi(d as i32))).collect();
        let fit = fit_decay(&curve(2, &pts), &FitOptions::default()).unwrap();
        assert!((fit.a - 0.98).abs() < 1e-10, "A = {}", fit.a);
        assert!((fit.p - 0.95).abs() < 1e-10, "p = {}", fit.p);
        assert_eq!(fit.fit_status, FitStatus::Converged);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-10));
    }

    #[test]
    fn constant_data_means_no_decay() {
        let fit = fit_decay(
            &curve(1, &[(0, 1.0), (4, 1.0), (16, 1.0)]),
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(fit.p, 1.0);
        assert_eq!(fit.r_omega, 0.0);
        assert_eq!(fit.fit_status, FitStatus::ConstantPolarization);
    }

    #[test]
    fn degenerate_data_is_a_fit_failure() {
        let opts = FitOptions::default();
        assert!(fit_decay(&curve(1, &[(0, 0.0), (4, -0.2)]), &opts).is_err());
        assert!(fit_decay(&curve(1, &[(3, 0.9)]), &opts).is_err());
        assert!(fit_decay(&curve(1, &[]), &opts).is_err());
        // Data dropping to zero immediately pins p at its bound.
        assert!(fit_decay(&curve(1, &[(0, 1.0), (2, 0.0), (4, 0.0)]), &opts).is_err());
    }

    #[test]
    fn weighting_follows_the_reported_scatter() {
        // An outlier with huge σ barely moves the weighted fit.
        let mut c = curve(1, &[(0, 0.9), (2, 0.9 * 0.64), (4, 0.9 * 0.4096)]);
        for pt in &mut c.points {
            pt.sigma = Some(0.001);
        }
        c.points.push(DecayPoint {
            depth: 6,
            fbar: 0.9,
            sigma: Some(10.0),
            circuits: 2,
        });
        let fit = fit_decay(&c, &FitOptions::default()).unwrap();
        assert!((fit.p - 0.8).abs() < 1e-3, "p = {}", fit.p);
    }

    #[test]
    fn fbar_and_decay_points_aggregate_circuit_means() {
        let mut dataset = synthetic_rows(2, 1.0, 0.9, &[0, 2], 3);
        dataset.rows[0].exact = Some(0.8);
        dataset.rows[1].exact = Some(0.6);
        dataset.rows[2].exact = Some(0.7);
        assert!((dataset.fbar(0).unwrap() - 0.7).abs() < 1e-15);
        assert!(dataset.fbar(1).is_err());
        let pts = dataset.decay_points();
        assert_eq!(pts.n, 2);
        assert_eq!(pts.points.len(), 2);
        assert_eq!(pts.points[0].circuits, 3);
        assert!(pts.points[0].sigma.is_some());
    }

    #[test]
    fn bootstrap_sees_zero_variance_in_zero_scatter_data() {
        let mut dataset = synthetic_rows(1, 0.95, 0.9, &[0, 1, 2, 4, 8], 5);
        for row in &mut dataset.rows {
            row.exact = Some(0.95 * 0.9f64.powi(row.d as i32));
        }
        let mut rng = crate::rng::SeedStream::new(7).child_named("boot-zero").rng();
        let sigma = bootstrap(&dataset, &FitOptions::default(), 100, &mut rng).unwrap();
        assert!(sigma.p < 1e-12, "σ_p = {}", sigma.p);
        assert!(sigma.r_omega < 1e-12);
        assert_eq!(sigma.failures, 0);
    }

    #[test]
    fn bootstrap_requires_a_hundred_replicates() {
        let dataset = synthetic_rows(1, 0.95, 0.9, &[0, 2, 4], 4);
        let mut rng = crate::rng::SeedStream::new(8).child_named("boot-few").rng();
        assert!(bootstrap(&dataset, &FitOptions::default(), 99, &mut rng).is_err());
    }

    #[test]
    fn fit_dataset_attaches_bootstrap_sigma_deterministically() {
        let dataset = synthetic_rows(2, 0.97, 0.93, &[0, 1, 2, 4, 8], 8);
        let opts = FitOptions::default();
        let fit1 = fit_dataset(&dataset, &opts, Some(150), 42).unwrap();
        let fit2 = fit_dataset(&dataset, &opts, Some(150), 42).unwrap();
        assert_eq!(fit1.sigma, fit2.sigma);
        let s = fit1.sigma.unwrap();
        assert!(s.p > 0.0 && s.p < 0.1, "σ_p = {}", s.p);
    }
}
