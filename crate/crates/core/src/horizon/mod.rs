//! Stationary measures and horizons: the two-line measures `Z±`, joint stationary
//! processes of the extended half-space models, cadlag LPP and the exponential-Brownian
//! horizon marginals.

mod brownian;
mod cadlag;
mod stationary;
mod zplus;

use serde::{Deserialize, Serialize};

pub use brownian::{
    exp_brownian_swap_check, horizon_environment, sample_horizon_marginals, swap_coupling, swap_environment,
    two_line_passage, HorizonGrid, SwapPaths, SwapReport,
};
pub use cadlag::{BrownianPart, CadlagEnvironment, CadlagLine};
pub use stationary::{evolve, sample_joint_stationary, stationarity_check, StationaryMeasureSpec, StationaryModel};
pub use zplus::{burke_sampler, sample_zplus};

/// Jointly sampled processes `R_1, …, R_k` on a common grid `xs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSample {
    pub slopes: Vec<f64>,
    pub xs: Vec<f64>,
    /// `processes[i][n] = R_{i+1}(xs[n])`.
    pub processes: Vec<Vec<f64>>,
}

impl HorizonSample {
    pub fn value(&self, i: usize, x: f64) -> Option<f64> {
        let n = self.xs.iter().position(|&y| (y - x).abs() < 1e-9)?;
        self.processes.get(i).map(|p| p[n])
    }

    /// `R_a(x₂) - R_a(x₁) ≥ R_b(x₂) - R_b(x₁)` for all `a < b` and `x₁ < x₂`, up to `tol`.
    pub fn increments_ordered(&self, tol: f64) -> bool {
        for a in 0..self.processes.len() {
            for b in a + 1..self.processes.len() {
                // the difference R_a - R_b must be nondecreasing
                let d: Vec<f64> = self.processes[a].iter().zip(&self.processes[b]).map(|(x, y)| x - y).collect();
                let scale = d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                let mut lo = f64::NEG_INFINITY;
                for v in d {
                    if v < lo - tol * scale {
                        return false;
                    }
                    lo = lo.max(v);
                }
            }
        }
        true
    }

    /// `x,R1,…,Rk` with one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for i in 1..=self.processes.len() {
            out.push_str(&format!(",R{i}"));
        }
        out.push('\n');
        for (n, x) in self.xs.iter().enumerate() {
            out.push_str(&format!("{x}"));
            for p in &self.processes {
                out.push_str(&format!(",{}", p[n]));
            }
            out.push('\n');
        }
        out
    }
}
