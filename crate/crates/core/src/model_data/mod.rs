//! Planning instances for the three-echelon vaccine network.
//!
//! Index conventions used everywhere in the crate: `i` supplier, `j`
//! distribution center, `k` vaccination center, `v` vaccine type, `a` age
//! group (0 is the oldest group), `p` zero-based period. The one-based
//! period number `t = p + 1` is what the deprivation function sees.

mod generate;
mod io;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::robust::RobustConfig;

pub use generate::{generate_instance, generate_instance_with, GenerateError, GeneratorConfig, SizeSpec, PRESETS};
pub use io::{load_instance, parse_instance, save_instance, to_json, InstanceIoError, SCHEMA};
pub use validate::{validate_instance, Violation};

pub const DEFAULT_SERVICE_FLOOR: f64 = 0.3;
pub const DEFAULT_EQUITY_TOLERANCE: f64 = 0.1;
pub const DEFAULT_DEPRIVATION_SLOPE: f64 = 3.0;
pub const DEFAULT_AGE_GROUPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub n_suppliers: usize,
    pub n_dcs: usize,
    pub n_vcs: usize,
    pub n_vaccines: usize,
    pub n_age_groups: usize,
    pub n_periods: usize,
}

impl Dimensions {
    /// Case-study shape: three suppliers and ten age groups.
    pub fn case_study(n_periods: usize, n_dcs: usize, n_vcs: usize, n_vaccines: usize) -> Self {
        Self {
            n_suppliers: 3,
            n_dcs,
            n_vcs,
            n_vaccines,
            n_age_groups: DEFAULT_AGE_GROUPS,
            n_periods,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplierParams {
    pub name: String,
    /// Periods between ordering and availability at the supplier.
    pub lead_time: i64,
    pub budget: f64,
    /// Maximum order per period, per vaccine type (doses).
    pub max_order: Vec<i64>,
    /// Inventory capacity (doses).
    pub capacity: i64,
    /// Price per dose, per vaccine type.
    pub price: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// `[j]` doses.
    pub dc_capacity: Vec<i64>,
    /// `[i][j][v]` per dose.
    pub var_cost_s2d: Vec<Vec<Vec<f64>>>,
    /// `[i][j]` per shipment period.
    pub fixed_cost_s2d: Vec<Vec<f64>>,
    /// `[j][k][v]` per dose.
    pub var_cost_d2v: Vec<Vec<Vec<f64>>>,
    /// `[j][k]` per shipment period.
    pub fixed_cost_d2v: Vec<Vec<f64>>,
    /// `[j]` vaccination centers grouped under distribution center `j`.
    pub assignment: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaccineParams {
    pub name: String,
    /// Per dose per period.
    pub holding_cost: f64,
    /// Maximum holding time in periods.
    pub shelf_life: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandParams {
    /// `[k][v][p]` doses.
    pub demand: Vec<Vec<Vec<i64>>>,
    /// `[a][j]` persons.
    pub age_demand: Vec<Vec<i64>>,
    pub service_floor: f64,
    /// Optional `[k][v][p]` replacement for the scalar service floor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_floor_override: Option<Vec<Vec<Vec<f64>>>>,
    pub equity_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    /// Holding, transportation, deprivation.
    pub theta: [f64; 3],
    pub deprivation_slope: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            theta: [0.3, 0.1, 0.6],
            deprivation_slope: DEFAULT_DEPRIVATION_SLOPE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub dimensions: Dimensions,
    pub suppliers: Vec<SupplierParams>,
    pub network: NetworkParams,
    pub vaccines: Vec<VaccineParams>,
    pub demand: DemandParams,
    pub weights: ObjectiveWeights,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robust: Option<RobustConfig>,
}

impl Instance {
    pub fn dims(&self) -> &Dimensions {
        &self.dimensions
    }

    /// Service floor for `(k, v, p)`, honoring the optional override.
    pub fn service_floor(&self, k: usize, v: usize, p: usize) -> f64 {
        match &self.demand.service_floor_override {
            Some(o) => o[k][v][p],
            None => self.demand.service_floor,
        }
    }

    /// Total targeted population of distribution center `j`.
    pub fn population(&self, j: usize) -> f64 {
        self.demand.age_demand.iter().map(|row| row[j] as f64).sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.demand
            .demand
            .iter()
            .flatten()
            .flatten()
            .map(|&d| d as f64)
            .sum()
    }

    /// Demand of `(k, v)` accumulated over periods `0..=p`.
    pub fn cumulative_demand(&self, k: usize, v: usize, p: usize) -> f64 {
        self.demand.demand[k][v][..=p]
            .iter()
            .map(|&d| d as f64)
            .sum()
    }

    /// Horizon demand of vaccine `v` over all centers.
    pub fn vaccine_demand(&self, v: usize) -> f64 {
        self.demand
            .demand
            .iter()
            .map(|per_v| per_v[v].iter().map(|&d| d as f64).sum::<f64>())
            .sum()
    }

    /// Distribution center owning vaccination center `k`, if assigned.
    pub fn dc_of(&self, k: usize) -> Option<usize> {
        self.network
            .assignment
            .iter()
            .position(|members| members.contains(&k))
    }

    /// Deprivation cost rate of one backordered dose at zero-based period `p`.
    pub fn deprivation_rate(&self, p: usize) -> f64 {
        self.weights.deprivation_slope * (p + 1) as f64
    }

    /// Scales every supplier budget by `factor`.
    pub fn with_budget_factor(&self, factor: f64) -> Instance {
        let mut out = self.clone();
        for s in &mut out.suppliers {
            s.budget *= factor;
        }
        out
    }

    /// Scales every maximum order by `factor`, rounding to whole doses.
    pub fn with_max_order_factor(&self, factor: f64) -> Instance {
        let mut out = self.clone();
        for s in &mut out.suppliers {
            for m in &mut s.max_order {
                *m = (*m as f64 * factor).round() as i64;
            }
        }
        out
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("deprivation intensity is undefined for negative period {0}")]
pub struct NegativePeriod(pub f64);

/// Linear deprivation intensity `slope * t`.
pub fn deprivation_intensity(t: f64, slope: f64) -> Result<f64, NegativePeriod> {
    if t < 0.0 || t.is_nan() {
        return Err(NegativePeriod(t));
    }
    Ok(slope * t)
}

/// Published supplier figures for the case study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseStudySupplier {
    pub name: &'static str,
    pub budget: f64,
    pub average_max_order: i64,
    pub capacity: i64,
}

pub const CASE_STUDY: [CaseStudySupplier; 3] = [
    CaseStudySupplier {
        name: "IRCS",
        budget: 250_000_000.0,
        average_max_order: 3_180_000,
        capacity: 3_000_000,
    },
    CaseStudySupplier {
        name: "Private sector",
        budget: 400_000_000.0,
        average_max_order: 3_350_000,
        capacity: 2_500_000,
    },
    CaseStudySupplier {
        name: "IMHM",
        budget: 700_000_000.0,
        average_max_order: 3_350_000,
        capacity: 3_500_000,
    },
];

/// Price used for case-study suppliers when no per-vaccine price is known.
pub const CASE_STUDY_DEFAULT_PRICE: f64 = 10.0;

/// The three case-study suppliers with `n_vaccines` vaccine types.
///
/// Every vaccine type gets the published average maximum order. Prices and
/// lead times are not published; they default to
/// [`CASE_STUDY_DEFAULT_PRICE`] and one period.
pub fn case_study_suppliers(n_vaccines: usize) -> Vec<SupplierParams> {
    CASE_STUDY
        .iter()
        .map(|cs| SupplierParams {
            name: cs.name.to_string(),
            lead_time: 1,
            budget: cs.budget,
            max_order: vec![cs.average_max_order; n_vaccines],
            capacity: cs.capacity,
            price: vec![CASE_STUDY_DEFAULT_PRICE; n_vaccines],
        })
        .collect()
}
