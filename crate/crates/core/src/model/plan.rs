use ndarray::{Array3, Array4};
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::scenario::{Month, Scenario, MONTHS};

/// A complete planting, harvesting and distribution plan.
///
/// Arrays are indexed by scenario entity position; the month axis always has
/// twelve slots (offset 0 = July).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPlan {
    /// ha, `[farmer, variety, period]`.
    pub planted_area: Array3<f64>,
    /// `[farmer, variety, period]`.
    pub planting_flag: Array3<bool>,
    /// kg, `[farmer, variety, period, month]`.
    pub harvested: Array4<f64>,
    /// kg, `[farmer, variety, market, month]`.
    pub shipped: Array4<f64>,
    /// kg matured but not harvested, `[farmer, variety, month]`.
    pub farm_waste: Array3<f64>,
    /// kg shipped but not sold, `[variety, market, month]`.
    pub market_waste: Array3<f64>,
    /// kg, `[variety, market, month]`.
    pub sold: Array3<f64>,
    /// kg, `[variety, market, month]`.
    pub unmet: Array3<f64>,
}

impl SolutionPlan {
    /// The plan with no activity at all: nothing planted, all demand unmet.
    pub fn zeros(s: &Scenario) -> Self {
        let (f, v, p, m) = (s.farmers.len(), s.varieties.len(), s.periods.len(), s.markets.len());
        let mut unmet = Array3::zeros((v, m, MONTHS));
        for vi in 0..v {
            for mi in 0..m {
                for t in Month::all() {
                    unmet[[vi, mi, t.offset()]] = s.demand(vi, mi, t);
                }
            }
        }
        SolutionPlan {
            planted_area: Array3::zeros((f, v, p)),
            planting_flag: Array3::from_elem((f, v, p), false),
            harvested: Array4::zeros((f, v, p, MONTHS)),
            shipped: Array4::zeros((f, v, m, MONTHS)),
            farm_waste: Array3::zeros((f, v, MONTHS)),
            market_waste: Array3::zeros((v, m, MONTHS)),
            sold: Array3::zeros((v, m, MONTHS)),
            unmet,
        }
    }

    pub(crate) fn check_dimensions(&self, s: &Scenario) -> Result<(), ModelError> {
        let (f, v, p, m) = (s.farmers.len(), s.varieties.len(), s.periods.len(), s.markets.len());
        let expected: [(&str, &[usize], Vec<usize>); 8] = [
            ("planted_area", self.planted_area.shape(), vec![f, v, p]),
            ("planting_flag", self.planting_flag.shape(), vec![f, v, p]),
            ("harvested", self.harvested.shape(), vec![f, v, p, MONTHS]),
            ("shipped", self.shipped.shape(), vec![f, v, m, MONTHS]),
            ("farm_waste", self.farm_waste.shape(), vec![f, v, MONTHS]),
            ("market_waste", self.market_waste.shape(), vec![v, m, MONTHS]),
            ("sold", self.sold.shape(), vec![v, m, MONTHS]),
            ("unmet", self.unmet.shape(), vec![v, m, MONTHS]),
        ];
        for (name, shape, want) in expected {
            if shape != want.as_slice() {
                return Err(ModelError::DimensionMismatch(format!("{name} has shape {shape:?}, expected {want:?}")));
            }
        }
        Ok(())
    }

    /// Planted hectares per farmer, summed over varieties and periods.
    pub fn area_by_farmer(&self) -> Vec<f64> {
        self.planted_area.outer_iter().map(|a| a.sum()).collect()
    }
}

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantingEntry {
    pub farmer: String,
    pub variety: String,
    pub period: String,
    pub area: f64,
    pub planted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarvestEntry {
    pub farmer: String,
    pub variety: String,
    pub period: String,
    pub month: Month,
    pub kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShipmentEntry {
    pub farmer: String,
    pub variety: String,
    pub market: String,
    pub month: Month,
    pub kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmWasteEntry {
    pub farmer: String,
    pub variety: String,
    pub month: Month,
    pub kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketEntry {
    pub variety: String,
    pub market: String,
    pub month: Month,
    pub kg: f64,
}

/// Plan export keyed by entity ids and month index.
///
/// `planting` lists every farmer/variety/period combination; the other
/// sections list only non-zero quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub schema_version: u32,
    pub planting: Vec<PlantingEntry>,
    pub harvested: Vec<HarvestEntry>,
    pub shipped: Vec<ShipmentEntry>,
    pub farm_waste: Vec<FarmWasteEntry>,
    pub market_waste: Vec<MarketEntry>,
    pub sold: Vec<MarketEntry>,
    pub unmet: Vec<MarketEntry>,
}

impl PlanDocument {
    pub fn from_plan(s: &Scenario, plan: &SolutionPlan) -> Result<Self, ModelError> {
        plan.check_dimensions(s)?;
        let farmer = |i: usize| s.farmers[i].id.clone();
        let variety = |i: usize| s.varieties[i].id.clone();
        let period = |i: usize| s.periods[i].id.clone();
        let market = |i: usize| s.markets[i].id.clone();
        let month = Month::from_offset;

        let planting = plan
            .planted_area
            .indexed_iter()
            .map(|((f, v, p), &area)| PlantingEntry {
                farmer: farmer(f),
                variety: variety(v),
                period: period(p),
                area,
                planted: plan.planting_flag[[f, v, p]],
            })
            .collect();
        let harvested = plan
            .harvested
            .indexed_iter()
            .filter(|(_, &kg)| kg != 0.0)
            .map(|((f, v, p, t), &kg)| HarvestEntry {
                farmer: farmer(f),
                variety: variety(v),
                period: period(p),
                month: month(t),
                kg,
            })
            .collect();
        let shipped = plan
            .shipped
            .indexed_iter()
            .filter(|(_, &kg)| kg != 0.0)
            .map(|((f, v, m, t), &kg)| ShipmentEntry {
                farmer: farmer(f),
                variety: variety(v),
                market: market(m),
                month: month(t),
                kg,
            })
            .collect();
        let farm_waste = plan
            .farm_waste
            .indexed_iter()
            .filter(|(_, &kg)| kg != 0.0)
            .map(|((f, v, t), &kg)| FarmWasteEntry { farmer: farmer(f), variety: variety(v), month: month(t), kg })
            .collect();
        let market_entries = |table: &Array3<f64>| -> Vec<MarketEntry> {
            table
                .indexed_iter()
                .filter(|(_, &kg)| kg != 0.0)
                .map(|((v, m, t), &kg)| MarketEntry { variety: variety(v), market: market(m), month: month(t), kg })
                .collect()
        };
        Ok(PlanDocument {
            schema_version: PLAN_SCHEMA_VERSION,
            planting,
            harvested,
            shipped,
            farm_waste,
            market_waste: market_entries(&plan.market_waste),
            sold: market_entries(&plan.sold),
            unmet: market_entries(&plan.unmet),
        })
    }

    /// Rebuilds the dense plan; entries absent from the document are zero.
    pub fn to_plan(&self, s: &Scenario) -> Result<SolutionPlan, ModelError> {
        let lookup = |kind: &str, ids: Vec<&str>, id: &str| -> Result<usize, ModelError> {
            ids.iter()
                .position(|x| *x == id)
                .ok_or_else(|| ModelError::DimensionMismatch(format!("plan references unknown {kind} {id:?}")))
        };
        let f = |id: &str| lookup("farmer", s.farmers.iter().map(|x| x.id.as_str()).collect(), id);
        let v = |id: &str| lookup("variety", s.varieties.iter().map(|x| x.id.as_str()).collect(), id);
        let p = |id: &str| lookup("period", s.periods.iter().map(|x| x.id.as_str()).collect(), id);
        let m = |id: &str| lookup("market", s.markets.iter().map(|x| x.id.as_str()).collect(), id);

        let mut plan = SolutionPlan::zeros(s);
        plan.unmet.fill(0.0);
        for e in &self.planting {
            let ix = [f(&e.farmer)?, v(&e.variety)?, p(&e.period)?];
            plan.planted_area[ix] = e.area;
            plan.planting_flag[ix] = e.planted;
        }
        for e in &self.harvested {
            plan.harvested[[f(&e.farmer)?, v(&e.variety)?, p(&e.period)?, e.month.offset()]] = e.kg;
        }
        for e in &self.shipped {
            plan.shipped[[f(&e.farmer)?, v(&e.variety)?, m(&e.market)?, e.month.offset()]] = e.kg;
        }
        for e in &self.farm_waste {
            plan.farm_waste[[f(&e.farmer)?, v(&e.variety)?, e.month.offset()]] = e.kg;
        }
        for (table, entries) in [
            (&mut plan.market_waste, &self.market_waste),
            (&mut plan.sold, &self.sold),
            (&mut plan.unmet, &self.unmet),
        ] {
            for e in entries {
                table[[v(&e.variety)?, m(&e.market)?, e.month.offset()]] = e.kg;
            }
        }
        Ok(plan)
    }

    /// Planted hectares per farmer id, in document order of first appearance.
    pub fn area_by_farmer(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for e in &self.planting {
            match out.iter_mut().find(|(id, _)| *id == e.farmer) {
                Some((_, a)) => *a += e.area,
                None => out.push((e.farmer.clone(), e.area)),
            }
        }
        out
    }
}
