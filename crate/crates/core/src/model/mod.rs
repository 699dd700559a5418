//! The planning MILP: building it from a [`Scenario`], decoding solver
//! assignments into a [`SolutionPlan`], and independently checking and
//! scoring any plan.
//!
//! Harvest, farm waste, market waste and unmet demand are not program
//! columns. Per farmer, variety and month the program only decides what is
//! shipped (`q`) and per variety, market and month what is sold (`s`); farm
//! waste is the slack of the maturation rows, market waste the slack of the
//! market rows and unmet demand `d - s`. Decoding restores all of them.

mod check;
mod objective;
mod plan;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use check::{check_plan, evaluate_plan, FeasibilityReport, Violation, CHECK_TOLERANCE};
pub use objective::{Objective, ObjectiveSpec, ObjectiveTriple};
pub use plan::{
    FarmWasteEntry, HarvestEntry, MarketEntry, PlanDocument, PlantingEntry, ShipmentEntry, SolutionPlan,
    PLAN_SCHEMA_VERSION,
};

use crate::scenario::{validate_scenario, Month, Scenario, ValidationReport, MONTHS};
use crate::solver::{
    solve_milp_with, MilpOptions, MixedProgram, ObjectiveSense, RowSense, SolveStatus, SolverError,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(ValidationReport),
    #[error("invalid objective spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Constraint families, shared by program rows and feasibility violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    NonNegativity,
    Area,
    Linking,
    PolicyVariety,
    PolicyFarmer,
    Maturation,
    Shipment,
    Market,
    Labor,
    ObjectiveBound,
}

impl ConstraintFamily {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintFamily::NonNegativity => "non_negativity",
            ConstraintFamily::Area => "area",
            ConstraintFamily::Linking => "linking",
            ConstraintFamily::PolicyVariety => "policy_variety",
            ConstraintFamily::PolicyFarmer => "policy_farmer",
            ConstraintFamily::Maturation => "maturation",
            ConstraintFamily::Shipment => "shipment",
            ConstraintFamily::Market => "market",
            ConstraintFamily::Labor => "labor",
            ConstraintFamily::ObjectiveBound => "objective_bound",
        }
    }
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where each decision quantity lives in the program.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelLayout {
    dims: (usize, usize, usize, usize),
    /// Harvest months of the scenario, ascending.
    pub months: Vec<Month>,
    x: Vec<usize>,
    b: Vec<usize>,
    q: Vec<Option<usize>>,
    s: Vec<Option<usize>>,
}

impl ModelLayout {
    fn fvp(&self, f: usize, v: usize, p: usize) -> usize {
        let (_, nv, np, _) = self.dims;
        (f * nv + v) * np + p
    }

    fn fvmt(&self, f: usize, v: usize, m: usize, t: Month) -> usize {
        let (_, nv, _, nm) = self.dims;
        ((f * nv + v) * nm + m) * MONTHS + t.offset()
    }

    fn vmt(&self, v: usize, m: usize, t: Month) -> usize {
        let (_, _, _, nm) = self.dims;
        (v * nm + m) * MONTHS + t.offset()
    }

    /// Column of planted area `x(f,v,p)`.
    pub fn area_column(&self, f: usize, v: usize, p: usize) -> usize {
        self.x[self.fvp(f, v, p)]
    }

    /// Column of the planting indicator `b(f,v,p)`.
    pub fn flag_column(&self, f: usize, v: usize, p: usize) -> usize {
        self.b[self.fvp(f, v, p)]
    }

    /// Column of shipment `q(f,v,m,t)`; `None` outside harvest months.
    pub fn shipment_column(&self, f: usize, v: usize, m: usize, t: Month) -> Option<usize> {
        self.q[self.fvmt(f, v, m, t)]
    }

    /// Column of sales `s(v,m,t)`; `None` where nothing can be sold.
    pub fn sales_column(&self, v: usize, m: usize, t: Month) -> Option<usize> {
        self.s[self.vmt(v, m, t)]
    }
}

/// A built program together with its column layout and row families.
#[derive(Debug, Clone)]
pub struct PlanningModel {
    pub program: MixedProgram,
    pub layout: ModelLayout,
    /// Family of each program row, aligned with `program.rows`.
    pub row_families: Vec<ConstraintFamily>,
    pub spec: ObjectiveSpec,
}

impl PlanningModel {
    pub fn rows_of(&self, family: ConstraintFamily) -> usize {
        self.row_families.iter().filter(|&&f| f == family).count()
    }
}

type Terms = Vec<(usize, f64)>;

struct ObjectiveTerms {
    profit: Terms,
    waste: Terms,
    unmet: Terms,
}

impl ObjectiveTerms {
    fn get(&self, o: Objective) -> &Terms {
        match o {
            Objective::Profit => &self.profit,
            Objective::Waste => &self.waste,
            Objective::Unmet => &self.unmet,
        }
    }
}

/// Builds the MILP optimizing `spec.optimized` subject to the bounds in `spec`.
pub fn build_model(s: &Scenario, spec: &ObjectiveSpec) -> Result<PlanningModel, ModelError> {
    let report = validate_scenario(s);
    if !report.is_empty() {
        return Err(ModelError::InvalidScenario(report));
    }
    spec.check().map_err(ModelError::InvalidSpec)?;

    let (nf, nv, np, nm) = (s.farmers.len(), s.varieties.len(), s.periods.len(), s.markets.len());
    let months = s.harvest_months();
    let sense = if spec.optimized.is_maximized() { ObjectiveSense::Maximize } else { ObjectiveSense::Minimize };
    let mut program = MixedProgram::new(sense);
    let mut layout = ModelLayout {
        dims: (nf, nv, np, nm),
        months: months.clone(),
        x: Vec::with_capacity(nf * nv * np),
        b: Vec::with_capacity(nf * nv * np),
        q: vec![None; nf * nv * nm * MONTHS],
        s: vec![None; nv * nm * MONTHS],
    };
    let fid = |f: usize| s.farmers[f].id.as_str();
    let vid = |v: usize| s.varieties[v].id.as_str();
    let pid = |p: usize| s.periods[p].id.as_str();
    let mid = |m: usize| s.markets[m].id.as_str();

    for f in 0..nf {
        for v in 0..nv {
            for p in 0..np {
                let area = s.farmers[f].area;
                layout.x.push(program.add_continuous(format!("x[{},{},{}]", fid(f), vid(v), pid(p)), 0.0, area));
            }
        }
    }
    for f in 0..nf {
        for v in 0..nv {
            for p in 0..np {
                layout.b.push(program.add_binary(format!("b[{},{},{}]", fid(f), vid(v), pid(p))));
            }
        }
    }
    for f in 0..nf {
        for v in 0..nv {
            for m in 0..nm {
                for &t in &months {
                    let name = format!("q[{},{},{},{}]", fid(f), vid(v), mid(m), t.index());
                    let col = program.add_continuous(name, 0.0, f64::INFINITY);
                    let ix = layout.fvmt(f, v, m, t);
                    layout.q[ix] = Some(col);
                }
            }
        }
    }
    for v in 0..nv {
        for m in 0..nm {
            for &t in &months {
                let d = s.demand(v, m, t);
                if d > 0.0 {
                    let col = program.add_continuous(format!("s[{},{},{}]", vid(v), mid(m), t.index()), 0.0, d);
                    let ix = layout.vmt(v, m, t);
                    layout.s[ix] = Some(col);
                }
            }
        }
    }

    let mut families = Vec::new();
    let mut row = |program: &mut MixedProgram, family, name: String, terms: Terms, sense, rhs| {
        program.add_row(name, terms, sense, rhs);
        families.push(family);
    };

    for f in 0..nf {
        let terms = (0..nv).flat_map(|v| (0..np).map(move |p| (v, p))).map(|(v, p)| (layout.area_column(f, v, p), 1.0));
        row(&mut program, ConstraintFamily::Area, format!("area[{}]", fid(f)), terms.collect(), RowSense::Le, s.farmers[f].area);
    }
    for f in 0..nf {
        for v in 0..nv {
            for p in 0..np {
                let (x, b) = (layout.area_column(f, v, p), layout.flag_column(f, v, p));
                let at = format!("{},{},{}", fid(f), vid(v), pid(p));
                let min_plot = s.options.min_plot;
                row(&mut program, ConstraintFamily::Linking, format!("link_lo[{at}]"), vec![(x, 1.0), (b, -min_plot)], RowSense::Ge, 0.0);
                let area = s.farmers[f].area;
                row(&mut program, ConstraintFamily::Linking, format!("link_hi[{at}]"), vec![(x, 1.0), (b, -area)], RowSense::Le, 0.0);
            }
        }
    }
    for v in 0..nv {
        for p in 0..np {
            let terms = (0..nf).map(|f| (layout.flag_column(f, v, p), 1.0)).collect();
            row(&mut program, ConstraintFamily::PolicyVariety, format!("policy_variety[{},{}]", vid(v), pid(p)), terms, RowSense::Ge, 1.0);
        }
    }
    for f in 0..nf {
        for p in 0..np {
            let terms = (0..nv).map(|v| (layout.flag_column(f, v, p), 1.0)).collect();
            row(&mut program, ConstraintFamily::PolicyFarmer, format!("policy_farmer[{},{}]", fid(f), pid(p)), terms, RowSense::Ge, 1.0);
        }
    }
    // Shipped produce cannot exceed what matured on the farm that month.
    for f in 0..nf {
        for v in 0..nv {
            for &t in &months {
                let mut terms: Terms = (0..nm).filter_map(|m| layout.shipment_column(f, v, m, t)).map(|c| (c, 1.0)).collect();
                for p in 0..np {
                    let y = s.periods[p].yield_in(t);
                    if y != 0.0 {
                        terms.push((layout.area_column(f, v, p), -y));
                    }
                }
                let name = format!("maturation[{},{},{}]", fid(f), vid(v), t.index());
                row(&mut program, ConstraintFamily::Maturation, name, terms, RowSense::Le, 0.0);
            }
        }
    }
    // Sales at a market cannot exceed what was delivered there.
    for v in 0..nv {
        for m in 0..nm {
            for &t in &months {
                let Some(sc) = layout.sales_column(v, m, t) else { continue };
                let mut terms = vec![(sc, 1.0)];
                terms.extend((0..nf).filter_map(|f| layout.shipment_column(f, v, m, t)).map(|c| (c, -1.0)));
                let name = format!("market[{},{},{}]", vid(v), mid(m), t.index());
                row(&mut program, ConstraintFamily::Market, name, terms, RowSense::Le, 0.0);
            }
        }
    }
    let labor_terms = |f: usize, t: Month| -> Terms {
        let mut terms = Terms::new();
        for v in 0..nv {
            for p in 0..np {
                let care = s.periods[p].care_labor_in(t);
                if care != 0.0 {
                    terms.push((layout.area_column(f, v, p), care));
                }
            }
        }
        let hl = |v: usize| s.varieties[v].harvest_labor;
        for v in 0..nv {
            if hl(v) != 0.0 {
                terms.extend((0..nm).filter_map(|m| layout.shipment_column(f, v, m, t)).map(|c| (c, hl(v))));
            }
        }
        terms
    };
    for f in 0..nf {
        for t in Month::all() {
            let terms = labor_terms(f, t);
            if !terms.is_empty() {
                let cap = s.farmers[f].labor_capacity.get(t);
                row(&mut program, ConstraintFamily::Labor, format!("labor[{},{}]", fid(f), t.index()), terms, RowSense::Le, cap);
            }
        }
    }

    let objectives = objective_terms(s, &layout, &labor_terms);
    let total_demand = s.total_demand();
    for (objective, bound) in spec.bounds() {
        let terms = objectives.get(objective).clone();
        let (sense, rhs) = match objective {
            Objective::Profit => (RowSense::Ge, bound),
            Objective::Waste => (RowSense::Le, bound),
            Objective::Unmet => (RowSense::Le, bound - total_demand),
        };
        row(&mut program, ConstraintFamily::ObjectiveBound, format!("bound[{objective}]"), terms, sense, rhs);
    }

    program.objective = objectives.get(spec.optimized).clone();
    program.objective_offset = if spec.optimized == Objective::Unmet { total_demand } else { 0.0 };
    Ok(PlanningModel { program, layout, row_families: families, spec: *spec })
}

fn objective_terms(s: &Scenario, layout: &ModelLayout, labor_terms: &dyn Fn(usize, Month) -> Terms) -> ObjectiveTerms {
    let (nf, nv, np, nm) = layout.dims;
    let mut profit = Terms::new();
    let mut waste = Terms::new();
    let mut unmet = Terms::new();
    for v in 0..nv {
        for m in 0..nm {
            for &t in &layout.months {
                if let Some(c) = layout.sales_column(v, m, t) {
                    profit.push((c, s.price(v, m, t)));
                    waste.push((c, -1.0));
                    unmet.push((c, -1.0));
                }
            }
        }
    }
    for f in 0..nf {
        for v in 0..nv {
            for m in 0..nm {
                let tc = s.transport_cost(f, m);
                if tc != 0.0 {
                    profit.extend(layout.months.iter().filter_map(|&t| layout.shipment_column(f, v, m, t)).map(|c| (c, -tc)));
                }
            }
            for p in 0..np {
                let x = layout.area_column(f, v, p);
                profit.push((x, -s.varieties[v].planting_cost));
                waste.push((x, s.periods[p].total_yield()));
            }
        }
    }
    let rate = s.options.labor_cost;
    if rate != 0.0 {
        for f in 0..nf {
            for t in Month::all() {
                profit.extend(labor_terms(f, t).into_iter().map(|(c, h)| (c, -rate * h)));
            }
        }
    }
    ObjectiveTerms { profit: merge_terms(profit), waste: merge_terms(waste), unmet: merge_terms(unmet) }
}

/// Sums duplicate columns and drops zero coefficients, keeping column order.
fn merge_terms(mut terms: Terms) -> Terms {
    terms.sort_by_key(|&(c, _)| c);
    let mut out: Terms = Vec::with_capacity(terms.len());
    for (c, a) in terms {
        match out.last_mut() {
            Some((last, sum)) if *last == c => *sum += a,
            _ => out.push((c, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}

/// Turns a solver assignment for `model` back into a full plan.
///
/// Harvest is split across planting periods in proportion to the yield each
/// period matured that month.
pub fn decode_plan(s: &Scenario, model: &PlanningModel, values: &[f64]) -> Result<SolutionPlan, ModelError> {
    if values.len() != model.program.columns.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "assignment has {} values, program has {} columns",
            values.len(),
            model.program.columns.len()
        )));
    }
    let layout = &model.layout;
    let (nf, nv, np, nm) = layout.dims;
    if (nf, nv, np, nm) != (s.farmers.len(), s.varieties.len(), s.periods.len(), s.markets.len()) {
        return Err(ModelError::DimensionMismatch("model was built for a different scenario".into()));
    }
    let mut plan = SolutionPlan::zeros(s);
    let clamp = |c: usize| {
        let col = &model.program.columns[c];
        values[c].clamp(col.lower, col.upper)
    };
    for f in 0..nf {
        for v in 0..nv {
            for p in 0..np {
                let on = clamp(layout.flag_column(f, v, p)) > 0.5;
                plan.planting_flag[[f, v, p]] = on;
                plan.planted_area[[f, v, p]] = if on { clamp(layout.area_column(f, v, p)) } else { 0.0 };
            }
        }
    }
    for f in 0..nf {
        for v in 0..nv {
            for &t in &layout.months {
                let mut shipped_total = 0.0;
                for m in 0..nm {
                    if let Some(c) = layout.shipment_column(f, v, m, t) {
                        let q = clamp(c);
                        plan.shipped[[f, v, m, t.offset()]] = q;
                        shipped_total += q;
                    }
                }
                let matured: Vec<f64> =
                    (0..np).map(|p| s.periods[p].yield_in(t) * plan.planted_area[[f, v, p]]).collect();
                let matured_total: f64 = matured.iter().sum();
                let harvested_total = shipped_total.min(matured_total);
                if matured_total > 0.0 {
                    for (p, &mp) in matured.iter().enumerate() {
                        plan.harvested[[f, v, p, t.offset()]] = harvested_total * mp / matured_total;
                    }
                }
                plan.farm_waste[[f, v, t.offset()]] = (matured_total - harvested_total).max(0.0);
            }
        }
    }
    for v in 0..nv {
        for m in 0..nm {
            for t in Month::all() {
                let delivered: f64 = (0..nf).map(|f| plan.shipped[[f, v, m, t.offset()]]).sum();
                let sold = layout.sales_column(v, m, t).map_or(0.0, |c| clamp(c).min(delivered));
                let ix = [v, m, t.offset()];
                plan.sold[ix] = sold;
                plan.market_waste[ix] = (delivered - sold).max(0.0);
                plan.unmet[ix] = (s.demand(v, m, t) - sold).max(0.0);
            }
        }
    }
    Ok(plan)
}

/// An optimized plan and its independently evaluated objectives.
#[derive(Debug, Clone)]
pub struct PlannedSolution {
    pub plan: SolutionPlan,
    pub objectives: ObjectiveTriple,
    /// Objective value reported by the solver for `spec.optimized`.
    pub solver_objective: f64,
    pub node_count: u64,
}

#[derive(Debug, Clone)]
pub enum PlanOutcome {
    Optimal(Box<PlannedSolution>),
    Infeasible { node_count: u64 },
    Unbounded { node_count: u64 },
}

impl PlanOutcome {
    pub fn solution(&self) -> Option<&PlannedSolution> {
        match self {
            PlanOutcome::Optimal(sol) => Some(sol),
            _ => None,
        }
    }

    pub fn into_solution(self) -> Option<PlannedSolution> {
        match self {
            PlanOutcome::Optimal(sol) => Some(*sol),
            _ => None,
        }
    }
}

/// Builds and solves the model for `spec`, decoding the optimum into a plan.
pub fn optimize(s: &Scenario, spec: &ObjectiveSpec, options: MilpOptions) -> Result<PlanOutcome, ModelError> {
    let model = build_model(s, spec)?;
    let outcome = solve_milp_with(&model.program, options)?;
    Ok(match outcome.status {
        SolveStatus::Infeasible => PlanOutcome::Infeasible { node_count: outcome.node_count },
        SolveStatus::Unbounded => PlanOutcome::Unbounded { node_count: outcome.node_count },
        SolveStatus::Optimal => {
            let values = outcome.assignment.as_deref().expect("optimal outcome carries an assignment");
            let plan = decode_plan(s, &model, values)?;
            let objectives = evaluate_plan(s, &plan)?;
            PlanOutcome::Optimal(Box::new(PlannedSolution {
                plan,
                objectives,
                solver_objective: outcome.objective_value.expect("optimal outcome carries a value"),
                node_count: outcome.node_count,
            }))
        }
    })
}
