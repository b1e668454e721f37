use crate::error::{Error, Result};
use crate::manifold::ConstraintSubmanifold;
use crate::vec::{dist, dist2, lerp};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples of a curve `θ ↦ f(θ) ∈ N`, uniform over `[0, span]`, read as the piecewise
/// linear interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub span: f64,
    pub samples: Vec<Vec<f64>>,
    pub endpoints_on_gamma: bool,
}

impl BoundaryTrace {
    /// Trace on `[0, π]` sampled at `n + 1` points.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        Self::from_fn_on(PI, n, f)
    }

    pub fn from_fn_on(span: f64, n: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let samples = (0..=n).map(|k| f(span * k as f64 / n as f64)).collect();
        BoundaryTrace { span, samples, endpoints_on_gamma: false }
    }

    /// Marks the endpoints as lying on Γ after checking it.
    pub fn with_endpoints_on(mut self, gamma: &ConstraintSubmanifold, tol: f64) -> Result<Self> {
        for p in [self.samples.first().unwrap(), self.samples.last().unwrap()] {
            let d = gamma.distance(p);
            if d > tol {
                return Err(Error::TraceOffGamma(d));
            }
        }
        self.endpoints_on_gamma = true;
        Ok(self)
    }

    pub fn n_intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.span / self.n_intervals() as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        self.step() * k as f64
    }

    pub fn eval(&self, theta: f64) -> Vec<f64> {
        let x = (theta / self.step()).clamp(0.0, self.n_intervals() as f64);
        let k = (x.floor() as usize).min(self.n_intervals() - 1);
        lerp(&self.samples[k], &self.samples[k + 1], x - k as f64)
    }

    /// `∫|f'|`.
    pub fn length(&self) -> f64 {
        self.samples.windows(2).map(|w| dist(&w[0], &w[1])).sum()
    }

    /// `∫|f'|² dθ`.
    pub fn dirichlet(&self) -> f64 {
        self.samples.windows(2).map(|w| dist2(&w[0], &w[1])).sum::<f64>() / self.step()
    }

    /// Largest difference quotient.
    pub fn lipschitz(&self) -> f64 {
        self.samples.windows(2).map(|w| dist(&w[0], &w[1])).fold(0.0, f64::max) / self.step()
    }

    fn check_compatible(&self, other: &BoundaryTrace) {
        assert_eq!(self.samples.len(), other.samples.len(), "traces must share their sampling");
    }

    pub fn sup_distance(&self, other: &BoundaryTrace) -> f64 {
        self.check_compatible(other);
        self.samples.iter().zip(&other.samples).map(|(a, b)| dist(a, b)).fold(0.0, f64::max)
    }

    /// `∫|f - g|² dθ` (trapezoidal).
    pub fn l2_gap(&self, other: &BoundaryTrace) -> f64 {
        self.check_compatible(other);
        let n = self.samples.len();
        let s: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .enumerate()
            .map(|(k, (a, b))| if k == 0 || k + 1 == n { 0.5 } else { 1.0 } * dist2(a, b))
            .sum();
        s * self.step()
    }

    /// `∫|f' - g'|² dθ`.
    pub fn derivative_gap(&self, other: &BoundaryTrace) -> f64 {
        self.check_compatible(other);
        let h = self.step();
        (0..self.n_intervals())
            .map(|k| {
                let df: Vec<f64> = self.samples[k + 1].iter().zip(&self.samples[k]).map(|(a, b)| a - b).collect();
                let dg: Vec<f64> = other.samples[k + 1].iter().zip(&other.samples[k]).map(|(a, b)| a - b).collect();
                dist2(&df, &dg)
            })
            .sum::<f64>()
            / h
    }

    /// Index of a sample where the two traces are closest, with that distance.
    pub fn closest_common_point(&self, other: &BoundaryTrace) -> (usize, f64) {
        self.check_compatible(other);
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| dist(a, b))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, d)| if d < acc.1 { (k, d) } else { acc })
    }
}

/// The Wirtinger step of the Fermi interpolation: `∫|f - g|² ≤ π² ∫|f' - g'|²` for traces
/// that agree somewhere. Returns `(lhs, rhs)`.
pub fn wirtinger_check(f: &BoundaryTrace, g: &BoundaryTrace) -> (f64, f64) {
    (f.l2_gap(g), PI * PI * f.derivative_gap(g))
}
