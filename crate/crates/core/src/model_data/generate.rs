//! Seeded random instances.
//!
//! The sizes of the fifteen presets follow the experiment ladder (periods,
//! distribution centers, vaccination centers, vaccine types). Cost and
//! demand magnitudes come from [`GeneratorConfig`]; the three suppliers are
//! the case-study suppliers rescaled to the generated demand.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{
    case_study_suppliers, DemandParams, Dimensions, Instance, NetworkParams, ObjectiveWeights,
    SupplierParams, VaccineParams, CASE_STUDY, DEFAULT_EQUITY_TOLERANCE, DEFAULT_SERVICE_FLOOR,
};

/// `(periods, distribution centers, vaccination centers, vaccine types)`.
pub const PRESETS: [(usize, usize, usize, usize); 15] = [
    (5, 10, 20, 2),
    (5, 10, 30, 2),
    (10, 10, 40, 2),
    (10, 10, 40, 3),
    (15, 10, 40, 3),
    (20, 20, 50, 4),
    (20, 20, 50, 5),
    (25, 20, 50, 6),
    (25, 20, 60, 8),
    (30, 20, 60, 10),
    (35, 31, 70, 10),
    (40, 31, 80, 10),
    (45, 31, 85, 10),
    (50, 31, 90, 10),
    (100, 31, 100, 15),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeSpec {
    /// One-based preset id.
    Preset(u8),
    Explicit(Dimensions),
}

impl SizeSpec {
    pub fn dimensions(self) -> Result<Dimensions, GenerateError> {
        match self {
            SizeSpec::Preset(id) if (1..=15).contains(&id) => {
                let (t, j, k, v) = PRESETS[id as usize - 1];
                Ok(Dimensions::case_study(t, j, k, v))
            }
            SizeSpec::Preset(id) => Err(GenerateError::UnknownPreset(id)),
            SizeSpec::Explicit(d) => Ok(d),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("unknown preset id {0}, expected 1..=15")]
    UnknownPreset(u8),
    #[error("invalid dimensions: {0}")]
    BadDimensions(String),
}

/// Sampling ranges for generated instances (all inclusive).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub demand: (i64, i64),
    pub var_cost: (f64, f64),
    pub fixed_cost: (f64, f64),
    pub holding_cost: (f64, f64),
    pub price: (f64, f64),
    pub lead_time: (i64, i64),
    pub shelf_life: (i64, i64),
    /// Supplier budgets cover this multiple of the horizon demand bought at
    /// the mean price, split in the case-study budget proportions.
    pub budget_factor: f64,
    /// Summed over suppliers, per-period maximum orders of a vaccine equal
    /// this multiple of its peak per-period demand.
    pub max_order_factor: f64,
    /// Summed over suppliers, inventory capacities equal this multiple of the
    /// horizon demand.
    pub capacity_factor: f64,
    /// Distribution center capacity as a multiple of the horizon demand of
    /// its own centers.
    pub dc_capacity_factor: f64,
    pub service_floor: f64,
    pub equity_tolerance: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            demand: (50, 500),
            var_cost: (0.1, 1.0),
            fixed_cost: (100.0, 1000.0),
            holding_cost: (0.01, 0.1),
            price: (5.0, 20.0),
            lead_time: (1, 2),
            shelf_life: (3, 6),
            budget_factor: 1.0,
            max_order_factor: 1.5,
            capacity_factor: 1.0,
            dc_capacity_factor: 1.0,
            service_floor: DEFAULT_SERVICE_FLOOR,
            equity_tolerance: DEFAULT_EQUITY_TOLERANCE,
        }
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

/// Splits `total` into integer parts proportional to `weights` (largest
/// remainder), so the parts sum to `total` exactly.
fn apportion(total: i64, weights: &[f64]) -> Vec<i64> {
    let wsum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights
        .iter()
        .map(|w| total as f64 * w / wsum)
        .collect();
    let mut parts: Vec<i64> = quotas.iter().map(|q| q.floor() as i64).collect();
    let mut rest = total - parts.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &idx in order.iter().cycle() {
        if rest <= 0 {
            break;
        }
        parts[idx] += 1;
        rest -= 1;
    }
    parts
}

pub fn generate_instance(size: SizeSpec, seed: u64) -> Result<Instance, GenerateError> {
    generate_instance_with(size, seed, &GeneratorConfig::default())
}

/// Draws an instance. The result depends only on `(size, seed, cfg)`.
///
/// Periods up to the shortest supplier lead time carry no demand: nothing
/// ordered can reach a vaccination center before then, and the service
/// floor would otherwise be unsatisfiable.
pub fn generate_instance_with(
    size: SizeSpec,
    seed: u64,
    cfg: &GeneratorConfig,
) -> Result<Instance, GenerateError> {
    let dims = size.dimensions()?;
    let Dimensions {
        n_suppliers: ns,
        n_dcs: nj,
        n_vcs: nk,
        n_vaccines: nv,
        n_age_groups: na,
        n_periods: nt,
    } = dims;
    if [ns, nj, nk, nv, na, nt].contains(&0) {
        return Err(GenerateError::BadDimensions("all counts must be >= 1".into()));
    }
    if nk < nj {
        return Err(GenerateError::BadDimensions(format!(
            "{nj} distribution centers but only {nk} vaccination centers"
        )));
    }
    if nt < 2 {
        return Err(GenerateError::BadDimensions(
            "at least two periods are needed to cover a lead time".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let lead_hi = cfg.lead_time.1.min(nt as i64 - 1);
    let lead_lo = cfg.lead_time.0.min(lead_hi);
    let lead_times: Vec<i64> = (0..ns).map(|_| rng.gen_range(lead_lo..=lead_hi)).collect();
    let min_lead = *lead_times.iter().min().unwrap() as usize;

    let shelf_hi = cfg.shelf_life.1.min(nt as i64);
    let shelf_lo = cfg.shelf_life.0.min(shelf_hi);
    let vaccines: Vec<VaccineParams> = (0..nv)
        .map(|v| VaccineParams {
            name: format!("vaccine-{}", v + 1),
            holding_cost: round_to(rng.gen_range(cfg.holding_cost.0..=cfg.holding_cost.1), 3),
            shelf_life: rng.gen_range(shelf_lo..=shelf_hi),
        })
        .collect();

    let demand: Vec<Vec<Vec<i64>>> = (0..nk)
        .map(|_| {
            (0..nv)
                .map(|_| {
                    (0..nt)
                        .map(|p| {
                            let draw = rng.gen_range(cfg.demand.0..=cfg.demand.1);
                            if p < min_lead {
                                0
                            } else {
                                draw
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let assignment: Vec<Vec<usize>> = (0..nj)
        .map(|j| (j..nk).step_by(nj).collect())
        .collect();

    let dc_demand: Vec<i64> = assignment
        .iter()
        .map(|members| {
            members
                .iter()
                .map(|&k| demand[k].iter().flatten().sum::<i64>())
                .sum()
        })
        .collect();

    let mut age_demand = vec![vec![0i64; nj]; na];
    for j in 0..nj {
        let weights: Vec<f64> = (0..na).map(|_| rng.gen_range(0.5..=1.5)).collect();
        for (a, part) in apportion(dc_demand[j], &weights).into_iter().enumerate() {
            age_demand[a][j] = part;
        }
    }

    let mut draw_cost = |range: (f64, f64)| round_to(rng.gen_range(range.0..=range.1), 2);
    let var_cost_s2d: Vec<Vec<Vec<f64>>> = (0..ns)
        .map(|_| (0..nj).map(|_| (0..nv).map(|_| draw_cost(cfg.var_cost)).collect()).collect())
        .collect();
    let fixed_cost_s2d: Vec<Vec<f64>> = (0..ns)
        .map(|_| (0..nj).map(|_| draw_cost(cfg.fixed_cost)).collect())
        .collect();
    let var_cost_d2v: Vec<Vec<Vec<f64>>> = (0..nj)
        .map(|_| (0..nk).map(|_| (0..nv).map(|_| draw_cost(cfg.var_cost)).collect()).collect())
        .collect();
    let fixed_cost_d2v: Vec<Vec<f64>> = (0..nj)
        .map(|_| (0..nk).map(|_| draw_cost(cfg.fixed_cost)).collect())
        .collect();
    let prices: Vec<Vec<f64>> = (0..ns)
        .map(|_| (0..nv).map(|_| draw_cost(cfg.price)).collect())
        .collect();

    let dc_capacity: Vec<i64> = dc_demand
        .iter()
        .map(|&d| (d as f64 * cfg.dc_capacity_factor).ceil() as i64)
        .collect();

    let suppliers = scale_suppliers(
        ns,
        nv,
        &lead_times,
        &prices,
        &demand,
        cfg,
    );

    Ok(Instance {
        dimensions: dims,
        suppliers,
        network: NetworkParams {
            dc_capacity,
            var_cost_s2d,
            fixed_cost_s2d,
            var_cost_d2v,
            fixed_cost_d2v,
            assignment,
        },
        vaccines,
        demand: DemandParams {
            demand,
            age_demand,
            service_floor: cfg.service_floor,
            service_floor_override: None,
            equity_tolerance: cfg.equity_tolerance,
        },
        weights: ObjectiveWeights::default(),
        seed: Some(seed),
        robust: None,
    })
}

/// Case-study suppliers rescaled to the drawn demand. With a supplier count
/// other than three the published figures are cycled.
fn scale_suppliers(
    ns: usize,
    nv: usize,
    lead_times: &[i64],
    prices: &[Vec<f64>],
    demand: &[Vec<Vec<i64>>],
    cfg: &GeneratorConfig,
) -> Vec<SupplierParams> {
    let base = case_study_suppliers(nv);
    let pick = |i: usize| &CASE_STUDY[i % CASE_STUDY.len()];
    let budget_sum: f64 = (0..ns).map(|i| pick(i).budget).sum();
    let order_sum: f64 = (0..ns).map(|i| pick(i).average_max_order as f64).sum();
    let cap_sum: f64 = (0..ns).map(|i| pick(i).capacity as f64).sum();

    let nt = demand.first().and_then(|d| d.first()).map_or(0, Vec::len);
    let vaccine_total: Vec<f64> = (0..nv)
        .map(|v| demand.iter().map(|d| d[v].iter().sum::<i64>() as f64).sum())
        .collect();
    let vaccine_peak: Vec<f64> = (0..nv)
        .map(|v| {
            (0..nt)
                .map(|p| demand.iter().map(|d| d[v][p]).sum::<i64>() as f64)
                .fold(0.0, f64::max)
        })
        .collect();
    let total: f64 = vaccine_total.iter().sum();
    let spend: f64 = (0..nv)
        .map(|v| {
            let mean_price = (0..ns).map(|i| prices[i][v]).sum::<f64>() / ns as f64;
            vaccine_total[v] * mean_price
        })
        .sum();

    (0..ns)
        .map(|i| {
            let cs = pick(i);
            let order_share = cs.average_max_order as f64 / order_sum;
            SupplierParams {
                name: if ns == CASE_STUDY.len() {
                    base[i].name.clone()
                } else {
                    format!("{}-{}", cs.name, i + 1)
                },
                lead_time: lead_times[i],
                budget: round_to(spend * cfg.budget_factor * cs.budget / budget_sum, 2),
                max_order: (0..nv)
                    .map(|v| (vaccine_peak[v] * cfg.max_order_factor * order_share).round() as i64)
                    .collect(),
                capacity: (total * cfg.capacity_factor * cs.capacity as f64 / cap_sum).ceil()
                    as i64,
                price: prices[i].clone(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_data::{validate_instance, DEFAULT_AGE_GROUPS};

    #[test]
    fn preset_one_dimensions() {
        let inst = generate_instance(SizeSpec::Preset(1), 7).unwrap();
        let d = inst.dimensions;
        assert_eq!((d.n_periods, d.n_dcs, d.n_vcs, d.n_vaccines), (5, 10, 20, 2));
        assert_eq!((d.n_suppliers, d.n_age_groups), (3, DEFAULT_AGE_GROUPS));
    }

    #[test]
    fn preset_fifteen_dimensions() {
        let d = SizeSpec::Preset(15).dimensions().unwrap();
        assert_eq!((d.n_periods, d.n_dcs, d.n_vcs, d.n_vaccines), (100, 31, 100, 15));
    }

    #[test]
    fn unknown_preset() {
        assert_eq!(
            generate_instance(SizeSpec::Preset(16), 1).unwrap_err(),
            GenerateError::UnknownPreset(16)
        );
        assert!(generate_instance(SizeSpec::Preset(0), 1).is_err());
    }

    #[test]
    fn same_seed_same_instance() {
        let a = generate_instance(SizeSpec::Preset(1), 42).unwrap();
        let b = generate_instance(SizeSpec::Preset(1), 42).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(SizeSpec::Preset(1), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn round_robin_assignment() {
        let inst = generate_instance(SizeSpec::Preset(1), 3).unwrap();
        assert_eq!(inst.network.assignment[0], vec![0, 10]);
        assert_eq!(inst.network.assignment[9], vec![9, 19]);
    }

    #[test]
    fn age_demand_matches_dc_demand() {
        let inst = generate_instance(SizeSpec::Preset(2), 11).unwrap();
        for (j, members) in inst.network.assignment.iter().enumerate() {
            let expect: i64 = members
                .iter()
                .map(|&k| inst.demand.demand[k].iter().flatten().sum::<i64>())
                .sum();
            let got: i64 = inst.demand.age_demand.iter().map(|r| r[j]).sum();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn no_demand_before_first_arrival() {
        let inst = generate_instance(SizeSpec::Preset(3), 5).unwrap();
        let min_lead = inst.suppliers.iter().map(|s| s.lead_time).min().unwrap() as usize;
        for per_v in &inst.demand.demand {
            for per_t in per_v {
                assert!(per_t[..min_lead].iter().all(|&d| d == 0));
                assert!(per_t[min_lead..].iter().all(|&d| (50..=500).contains(&d)));
            }
        }
    }

    #[test]
    fn apportion_sums_exactly() {
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]).iter().sum::<i64>(), 10);
        assert_eq!(apportion(0, &[1.0, 2.0]), vec![0, 0]);
        assert_eq!(apportion(7, &[1.0]), vec![7]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn generated_instances_are_valid(preset in 1u8..=5, seed in 0u64..1000) {
            let inst = generate_instance(SizeSpec::Preset(preset), seed).unwrap();
            let violations = validate_instance(&inst);
            proptest::prop_assert!(violations.is_empty(), "{:?}", violations);
        }

        #[test]
        fn small_explicit_instances_are_valid(
            ns in 1usize..4, nj in 1usize..3, extra in 0usize..3, nv in 1usize..3,
            na in 1usize..4, nt in 2usize..6, seed in 0u64..1000,
        ) {
            let dims = Dimensions {
                n_suppliers: ns, n_dcs: nj, n_vcs: nj + extra, n_vaccines: nv,
                n_age_groups: na, n_periods: nt,
            };
            let inst = generate_instance(SizeSpec::Explicit(dims), seed).unwrap();
            let violations = validate_instance(&inst);
            proptest::prop_assert!(violations.is_empty(), "{:?}", violations);
        }
    }
}
