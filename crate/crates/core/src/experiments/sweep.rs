use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

use super::rates::{fit_rate, RateFit};
use super::run::{run_triple, ExperimentConfig, RunResult, Sample};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Grid, profile and time stepping; `eps`/`mu` are overridden per point.
    pub base: ExperimentConfig,
    /// Strictly decreasing `mu` values.
    pub mus: Vec<f64>,
    /// `eps = eps_ratio * mu` at every point.
    pub eps_ratio: f64,
    pub workers: usize,
    /// Window of the `eta_xx + eta_xt` supremum.
    pub proof_bound_horizon: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: ExperimentConfig::default(),
            mus: vec![0.08, 0.04, 0.02, 0.01],
            eps_ratio: 1.0,
            workers: 4,
            proof_bound_horizon: 1.0,
        }
    }
}

/// How a time series is reduced to one number per sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    /// `sup_t E(t) / (1 + t)`.
    SupOverOnePlusT,
    /// `E(T)`.
    Final,
    /// `sup_{t <= proof_bound_horizon} E(t)`.
    SupWindow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRate {
    pub name: String,
    pub reduction: Reduction,
    pub fit: RateFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub runs: Vec<RunResult>,
    pub families: Vec<FamilyRate>,
}

impl SweepReport {
    pub fn family(&self, name: &str) -> Option<&FamilyRate> {
        self.families.iter().find(|f| f.name == name)
    }
}

type Column = fn(&Sample) -> f64;

/// Error families measured against `mu`, with their sample column.
pub const FAMILIES: [(&str, Column); 8] = [
    ("momentum", |s| s.e_momentum),
    ("kdv_pair_linf", |s| s.e_kdv_pair_linf),
    ("ww_pair_linf", |s| s.e_ww_pair_linf),
    ("kdv_pair_hsmu", |s| s.e_kdv_pair_hsmu),
    ("ww_pair_hsmu", |s| s.e_ww_pair_hsmu),
    ("residual_r", |s| s.residual_r_linf),
    ("residual_R", |s| s.residual_rr_linf),
    ("proofbound", |s| s.proofbound_linf),
];

pub fn validate_mus(mus: &[f64]) -> Result<()> {
    if mus.len() < 3 {
        return Err(Error::InsufficientPoints(mus.len()));
    }
    if mus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParams("mu list must be strictly decreasing".into()));
    }
    Ok(())
}

/// Config of the run at `mu` within the sweep.
pub fn point_config(sweep: &SweepConfig, mu: f64) -> ExperimentConfig {
    ExperimentConfig {
        eps: sweep.eps_ratio * mu,
        mu,
        ..sweep.base.clone()
    }
}

/// Reduces per-point runs to rate fits for every family.
pub fn fit_families(runs: &[RunResult], proof_bound_horizon: f64) -> Result<Vec<FamilyRate>> {
    let mut families = Vec::new();
    for (name, column) in FAMILIES {
        let reductions: &[Reduction] = if name == "proofbound" {
            &[Reduction::SupWindow, Reduction::Final]
        } else {
            &[Reduction::SupOverOnePlusT, Reduction::Final]
        };
        for &reduction in reductions {
            let points: Vec<(f64, f64)> = runs
                .iter()
                .map(|r| {
                    let value = match reduction {
                        Reduction::SupOverOnePlusT => r.sup_weighted(column),
                        Reduction::Final => r.last(column),
                        Reduction::SupWindow => r.sup_until(proof_bound_horizon, column),
                    };
                    (r.mu, value)
                })
                .collect();
            let label = match reduction {
                Reduction::Final => format!("{name}_final"),
                _ => name.to_string(),
            };
            families.push(FamilyRate {
                name: label,
                reduction,
                fit: fit_rate(&points)?,
            });
        }
    }
    Ok(families)
}

/// Runs every sweep point (in parallel across `workers`) and fits the
/// log-log slope of each error family against `mu`.
pub fn convergence_study(sweep: &SweepConfig) -> Result<SweepReport> {
    validate_mus(&sweep.mus)?;
    let configs: Vec<ExperimentConfig> = sweep.mus.iter().map(|&mu| point_config(sweep, mu)).collect();
    let results = par::with_workers(sweep.workers, || par::map_collect(&configs, run_triple));
    let mut runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| b.mu.total_cmp(&a.mu));
    let families = fit_families(&runs, sweep.proof_bound_horizon)?;
    Ok(SweepReport {
        config: sweep.clone(),
        runs,
        families,
    })
}
