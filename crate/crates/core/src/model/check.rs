use serde::{Deserialize, Serialize};

use super::{ConstraintFamily, ModelError, ObjectiveTriple, SolutionPlan};
use crate::scenario::{Month, Scenario};

/// Absolute per-row tolerance used by [`check_plan`].
pub const CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub location: String,
    /// How far the row is from holding, always positive.
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn of(&self, family: ConstraintFamily) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.family == family)
    }

    pub fn max_residual(&self) -> f64 {
        self.violations.iter().map(|v| v.residual).fold(0.0, f64::max)
    }

    fn le(&mut self, family: ConstraintFamily, location: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        let residual = lhs - rhs;
        if residual > CHECK_TOLERANCE || residual.is_nan() {
            self.violations.push(Violation { family, location: location(), residual });
        }
    }

    fn equal(&mut self, family: ConstraintFamily, location: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        let residual = (lhs - rhs).abs();
        if residual > CHECK_TOLERANCE || residual.is_nan() {
            self.violations.push(Violation { family, location: location(), residual });
        }
    }
}

/// Checks every constraint of the planning problem directly on plan
/// quantities, without consulting any program.
pub fn check_plan(s: &Scenario, plan: &SolutionPlan) -> Result<FeasibilityReport, ModelError> {
    plan.check_dimensions(s)?;
    let mut r = FeasibilityReport::default();
    let (nf, nv, np, nm) = (s.farmers.len(), s.varieties.len(), s.periods.len(), s.markets.len());
    let fid = |f: usize| s.farmers[f].id.as_str();
    let vid = |v: usize| s.varieties[v].id.as_str();
    let pid = |p: usize| s.periods[p].id.as_str();
    let mid = |m: usize| s.markets[m].id.as_str();
    let name = |t: Month| t.index();

    let tables: [(&str, Vec<f64>); 7] = [
        ("planted_area", plan.planted_area.iter().copied().collect()),
        ("harvested", plan.harvested.iter().copied().collect()),
        ("shipped", plan.shipped.iter().copied().collect()),
        ("farm_waste", plan.farm_waste.iter().copied().collect()),
        ("market_waste", plan.market_waste.iter().copied().collect()),
        ("sold", plan.sold.iter().copied().collect()),
        ("unmet", plan.unmet.iter().copied().collect()),
    ];
    for (table, values) in &tables {
        for (i, &x) in values.iter().enumerate() {
            r.le(ConstraintFamily::NonNegativity, || format!("{table}[{i}]"), -x, 0.0);
        }
    }

    for f in 0..nf {
        let area = s.farmers[f].area;
        let planted: f64 = plan.planted_area.index_axis(ndarray::Axis(0), f).sum();
        r.le(ConstraintFamily::Area, || format!("area[{}]", fid(f)), planted, area);
        for v in 0..nv {
            for p in 0..np {
                let x = plan.planted_area[[f, v, p]];
                let at = || format!("{},{},{}", fid(f), vid(v), pid(p));
                if plan.planting_flag[[f, v, p]] {
                    r.le(ConstraintFamily::Linking, || format!("link_lo[{}]", at()), s.options.min_plot, x);
                    r.le(ConstraintFamily::Linking, || format!("link_hi[{}]", at()), x, area);
                } else {
                    r.le(ConstraintFamily::Linking, || format!("link_hi[{}]", at()), x, 0.0);
                }
            }
        }
    }

    for v in 0..nv {
        for p in 0..np {
            let count = (0..nf).filter(|&f| plan.planting_flag[[f, v, p]]).count() as f64;
            r.le(ConstraintFamily::PolicyVariety, || format!("policy_variety[{},{}]", vid(v), pid(p)), 1.0, count);
        }
    }
    for f in 0..nf {
        for p in 0..np {
            let count = (0..nv).filter(|&v| plan.planting_flag[[f, v, p]]).count() as f64;
            r.le(ConstraintFamily::PolicyFarmer, || format!("policy_farmer[{},{}]", fid(f), pid(p)), 1.0, count);
        }
    }

    for f in 0..nf {
        for v in 0..nv {
            for t in Month::all() {
                let mut unharvested = 0.0;
                let mut harvested = 0.0;
                for p in 0..np {
                    let h = plan.harvested[[f, v, p, t.offset()]];
                    let matured = s.periods[p].yield_in(t) * plan.planted_area[[f, v, p]];
                    let at = || format!("harvest[{},{},{},{}]", fid(f), vid(v), pid(p), name(t));
                    if s.periods[p].in_window(t) {
                        r.le(ConstraintFamily::Maturation, at, h, matured);
                    } else {
                        r.equal(ConstraintFamily::Maturation, at, h, 0.0);
                    }
                    unharvested += matured - h;
                    harvested += h;
                }
                let wf = plan.farm_waste[[f, v, t.offset()]];
                r.equal(ConstraintFamily::Maturation, || format!("farm_waste[{},{},{}]", fid(f), vid(v), name(t)), wf, unharvested);
                let shipped: f64 = (0..nm).map(|m| plan.shipped[[f, v, m, t.offset()]]).sum();
                r.equal(ConstraintFamily::Shipment, || format!("shipment[{},{},{}]", fid(f), vid(v), name(t)), shipped, harvested);
            }
        }
    }

    for v in 0..nv {
        for m in 0..nm {
            for t in Month::all() {
                let ix = [v, m, t.offset()];
                let at = |what: &str| format!("{what}[{},{},{}]", vid(v), mid(m), name(t));
                let delivered: f64 = (0..nf).map(|f| plan.shipped[[f, v, m, t.offset()]]).sum();
                let (sold, wm, unmet) = (plan.sold[ix], plan.market_waste[ix], plan.unmet[ix]);
                let d = s.demand(v, m, t);
                r.equal(ConstraintFamily::Market, || at("market"), delivered, sold + wm);
                r.le(ConstraintFamily::Market, || at("sales"), sold, d);
                r.equal(ConstraintFamily::Market, || at("unmet"), unmet, d - sold);
            }
        }
    }

    for f in 0..nf {
        for t in Month::all() {
            let mut hours = 0.0;
            for v in 0..nv {
                for p in 0..np {
                    let x = plan.planted_area[[f, v, p]];
                    hours += s.periods[p].care_labor_in(t) * x;
                    hours += s.varieties[v].harvest_labor * plan.harvested[[f, v, p, t.offset()]];
                }
            }
            let cap = s.farmers[f].labor_capacity.get(t);
            r.le(ConstraintFamily::Labor, || format!("labor[{},{}]", fid(f), name(t)), hours, cap);
        }
    }
    Ok(r)
}

/// Recomputes profit, waste and unmet demand from plan quantities.
pub fn evaluate_plan(s: &Scenario, plan: &SolutionPlan) -> Result<ObjectiveTriple, ModelError> {
    plan.check_dimensions(s)?;
    let (nf, nv, np, nm) = (s.farmers.len(), s.varieties.len(), s.periods.len(), s.markets.len());
    let mut income = 0.0;
    for v in 0..nv {
        for m in 0..nm {
            for t in Month::all() {
                income += s.price(v, m, t) * plan.sold[[v, m, t.offset()]];
            }
        }
    }
    let mut transport = 0.0;
    for f in 0..nf {
        for m in 0..nm {
            let tc = s.transport_cost(f, m);
            for v in 0..nv {
                for t in Month::all() {
                    transport += tc * plan.shipped[[f, v, m, t.offset()]];
                }
            }
        }
    }
    let mut planting = 0.0;
    let mut hours = 0.0;
    for f in 0..nf {
        for v in 0..nv {
            for p in 0..np {
                let x = plan.planted_area[[f, v, p]];
                planting += s.varieties[v].planting_cost * x;
                for t in Month::all() {
                    hours += s.periods[p].care_labor_in(t) * x;
                    hours += s.varieties[v].harvest_labor * plan.harvested[[f, v, p, t.offset()]];
                }
            }
        }
    }
    let profit = income - transport - planting - s.options.labor_cost * hours;
    let waste = plan.farm_waste.sum() + plan.market_waste.sum();
    let unmet = plan.unmet.sum();
    Ok(ObjectiveTriple::new(profit, waste, unmet))
}
