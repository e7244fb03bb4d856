//! Circuit-count planning from a Hoeffding bound on the depth means.
//!
//! To pin f̄_d to within α·A·γ̄^d of its expectation with failure
//! probability ν, K = ⌈2 ln(2/ν)/(α·A·γ̄^d)²⌉ circuits suffice. The
//! two-depth plan targets the decay rate itself: measuring at d = 0 and
//! at the decay length d₁ = 1/ln(1/γ̄) equalizes the sensitivity of both
//! points, and β bounds the relative error of the fitted rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy targets and the expected decay scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerInput {
    /// Allowed failure probability of the confidence statement, in (0, 1).
    pub nu: f64,
    /// Relative half-width target for f̄_d, as a fraction of A·γ̄^d.
    pub alpha: f64,
    /// Expected fit amplitude, in (0, 1].
    #[serde(rename = "A", default = "default_a")]
    pub a: f64,
    /// Expected layer polarization, in (0, 1].
    pub gamma_bar: f64,
    /// Benchmark depth the single-depth bound is evaluated at.
    #[serde(default)]
    pub depth: usize,
}

fn default_a() -> f64 {
    1.0
}

/// A depth pair and per-depth circuit counts for estimating the rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoDepthPlan {
    pub d0: usize,
    pub d1: usize,
    pub circuits_d0: u64,
    pub circuits_d1: u64,
}

/// Planned circuit counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerOutput {
    /// Circuits at `depth` for the single-depth mean to meet the target.
    pub circuits: u64,
    /// Relative rate-error target of the two-depth plan (reuses α).
    pub beta: f64,
    /// Absent when γ̄ = 1: a flat curve carries no rate information.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_depth: Option<TwoDepthPlan>,
}

fn ceil_count(x: f64, what: &str) -> Result<u64> {
    if !x.is_finite() || x >= 9.0e18 {
        return Err(Error::domain(format!(
            "{what} would need more than 9e18 circuits; loosen the targets"
        )));
    }
    Ok(x.ceil().max(1.0) as u64)
}

/// Circuit counts meeting the requested accuracy.
pub fn plan_samples(input: &PlannerInput) -> Result<PlannerOutput> {
    if !(input.nu > 0.0 && input.nu < 1.0) {
        return Err(Error::domain(format!(
            "failure probability ν must be in (0, 1), got {}",
            input.nu
        )));
    }
    if !(input.alpha > 0.0 && input.alpha.is_finite()) {
        return Err(Error::domain(format!(
            "relative accuracy α must be positive, got {}",
            input.alpha
        )));
    }
    if !(input.a > 0.0 && input.a <= 1.0) {
        return Err(Error::domain(format!(
            "amplitude A must be in (0, 1], got {}",
            input.a
        )));
    }
    if !(input.gamma_bar > 0.0 && input.gamma_bar <= 1.0) {
        return Err(Error::domain(format!(
            "polarization γ̄ must be in (0, 1], got {}",
            input.gamma_bar
        )));
    }
    let log_term = 2.0 * (2.0 / input.nu).ln();
    let half_width = input.alpha * input.a * input.gamma_bar.powi(input.depth as i32);
    let circuits = ceil_count(log_term / (half_width * half_width), "the depth mean")?;

    let two_depth = if input.gamma_bar < 1.0 {
        let d1 = (1.0 / (1.0 / input.gamma_bar).ln()).round().max(1.0);
        let beta = input.alpha;
        let base = 4.0 * log_term / (d1 * beta * input.a).powi(2);
        let circuits_d1 = ceil_count(base / input.gamma_bar.powf(2.0 * d1), "the decay depth")?;
        let circuits_d0 = ceil_count(base, "the reference depth")?;
        Some(TwoDepthPlan {
            d0: 0,
            d1: d1 as usize,
            circuits_d0,
            circuits_d1,
        })
    } else {
        None
    };

    Ok(PlannerOutput {
        circuits,
        beta: input.alpha,
        two_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(nu: f64, alpha: f64, a: f64, gamma_bar: f64, depth: usize) -> PlannerInput {
        PlannerInput {
            nu,
            alpha,
            a,
            gamma_bar,
            depth,
        }
    }

    #[test]
    fn reference_point_needs_738_circuits() {
        let out = plan_samples(&input(0.05, 0.1, 1.0, 0.9, 0)).unwrap();
        assert_eq!(out.circuits, 738);
    }

    #[test]
    fn count_grows_with_depth_by_the_squared_decay() {
        let shallow = plan_samples(&input(0.05, 0.1, 1.0, 0.9, 0)).unwrap();
        let deep = plan_samples(&input(0.05, 0.1, 1.0, 0.9, 10)).unwrap();
        let ratio = deep.circuits as f64 / shallow.circuits as f64;
        let expect = 0.9f64.powi(-20);
        assert!((ratio / expect - 1.0).abs() < 0.01, "ratio = {ratio}");
    }

    #[test]
    fn depth_zero_count_does_not_depend_on_gamma() {
        let a = plan_samples(&input(0.05, 0.1, 1.0, 0.9, 0)).unwrap();
        let b = plan_samples(&input(0.05, 0.1, 1.0, 0.5, 0)).unwrap();
        assert_eq!(a.circuits, b.circuits);
    }

    #[test]
    fn two_depth_plan_picks_the_decay_length() {
        // Hand-computed for ν = 0.05, β = 0.1, A = 1, γ̄ = 0.9:
        // d₁ = round(1/ln(1/0.9)) = round(9.49) = 9,
        // K(0) = ⌈8 ln 40/(9·0.1)²⌉ = ⌈36.43⌉ = 37,
        // K(d₁) = ⌈36.43/0.9¹⁸⌉ = ⌈242.74⌉ = 243.
        let out = plan_samples(&input(0.05, 0.1, 1.0, 0.9, 0)).unwrap();
        let plan = out.two_depth.unwrap();
        assert_eq!(plan.d0, 0);
        assert_eq!(plan.d1, 9);
        assert_eq!(plan.circuits_d0, 37);
        assert_eq!(plan.circuits_d1, 243);
        // A slower decay pushes the measurement depth out.
        let slow = plan_samples(&input(0.05, 0.1, 1.0, 0.99, 0)).unwrap();
        assert_eq!(slow.two_depth.unwrap().d1, 99);
    }

    #[test]
    fn flat_decay_has_no_two_depth_plan() {
        let out = plan_samples(&input(0.05, 0.1, 1.0, 1.0, 0)).unwrap();
        assert!(out.two_depth.is_none());
        assert_eq!(out.circuits, 738);
    }

    #[test]
    fn invalid_targets_are_rejected() {
        assert!(plan_samples(&input(0.0, 0.1, 1.0, 0.9, 0)).is_err());
        assert!(plan_samples(&input(1.0, 0.1, 1.0, 0.9, 0)).is_err());
        assert!(plan_samples(&input(0.05, 0.0, 1.0, 0.9, 0)).is_err());
        assert!(plan_samples(&input(0.05, 0.1, 0.0, 0.9, 0)).is_err());
        assert!(plan_samples(&input(0.05, 0.1, 1.2, 0.9, 0)).is_err());
        assert!(plan_samples(&input(0.05, 0.1, 1.0, 0.0, 0)).is_err());
        assert!(plan_samples(&input(0.05, 0.1, 1.0, 1.1, 0)).is_err());
    }

    #[test]
    fn absurd_accuracy_is_an_error_not_an_overflow() {
        assert!(plan_samples(&input(0.05, 1e-12, 1.0, 0.9, 0)).is_err());
    }
}
