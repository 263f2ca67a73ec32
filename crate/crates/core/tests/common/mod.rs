#![allow(dead_code)]

use coldchain::builder::VariableIndex;
use coldchain::model_data::{generate_instance, Dimensions, Instance, SizeSpec};
use coldchain::solver::SolveOptions;

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Two-period network: one DC, two VCs, one vaccine, two age groups.
pub fn tiny_dims(n_suppliers: usize) -> Dimensions {
    Dimensions {
        n_suppliers,
        n_dcs: 1,
        n_vcs: 2,
        n_vaccines: 1,
        n_age_groups: 2,
        n_periods: 2,
    }
}

/// Tiny generated instance whose max orders are whole multiples of ten, so
/// a 10% cut stays integral.
pub fn tiny_instance(n_suppliers: usize, seed: u64) -> Instance {
    let mut inst = generate_instance(SizeSpec::Explicit(tiny_dims(n_suppliers)), seed).unwrap();
    for s in &mut inst.suppliers {
        for m in &mut s.max_order {
            *m = ((*m + 5) / 10).max(1) * 10;
        }
    }
    inst
}

pub fn exact() -> SolveOptions {
    SolveOptions {
        mip_gap: 1e-9,
        ..Default::default()
    }
}

/// Deprivation cost recomputed from backorders alone.
pub fn deprivation_from_backorders(inst: &Instance, index: &VariableIndex, values: &[f64]) -> f64 {
    let d = inst.dimensions;
    let mut total = 0.0;
    for p in 0..d.n_periods {
        for k in 0..d.n_vcs {
            for v in 0..d.n_vaccines {
                total += inst.deprivation_rate(p) * values[index.back[k][v][p].0];
            }
        }
    }
    total
}
