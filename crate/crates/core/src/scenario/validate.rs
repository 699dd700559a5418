use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    EmptyEntitySet,
    DuplicateId,
    NonpositiveArea,
    NegativeQuantity,
    NonFinite,
    EmptyWindow,
    WindowOrder,
    YieldLength,
    CareLaborLength,
    UnknownReference,
    MinPlotExceedsFarm,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::EmptyEntitySet => "EMPTY_ENTITY_SET",
            IssueCode::DuplicateId => "DUPLICATE_ID",
            IssueCode::NonpositiveArea => "NONPOSITIVE_AREA",
            IssueCode::NegativeQuantity => "NEGATIVE_QUANTITY",
            IssueCode::NonFinite => "NON_FINITE",
            IssueCode::EmptyWindow => "EMPTY_WINDOW",
            IssueCode::WindowOrder => "WINDOW_ORDER",
            IssueCode::YieldLength => "YIELD_LENGTH",
            IssueCode::CareLaborLength => "CARE_LABOR_LENGTH",
            IssueCode::UnknownReference => "UNKNOWN_REFERENCE",
            IssueCode::MinPlotExceedsFarm => "MIN_PLOT_EXCEEDS_FARM",
        }
    }

    fn summary(self) -> &'static str {
        match self {
            IssueCode::EmptyEntitySet => "empty entity set",
            IssueCode::DuplicateId => "duplicate id",
            IssueCode::NonpositiveArea => "area must be positive",
            IssueCode::NegativeQuantity => "negative quantity",
            IssueCode::NonFinite => "non-finite quantity",
            IssueCode::EmptyWindow => "empty harvest window",
            IssueCode::WindowOrder => "harvest month not after planting month",
            IssueCode::YieldLength => "yield count differs from window length",
            IssueCode::CareLaborLength => "care labor does not span planting to window end",
            IssueCode::UnknownReference => "reference to undeclared entity",
            IssueCode::MinPlotExceedsFarm => "minimum plot exceeds a farm area",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub code: IssueCode,
    /// Where the problem is, e.g. `farmers[F1].area`.
    pub location: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} at {}", self.code.as_str(), self.code.summary(), self.location)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    fn push(&mut self, code: IssueCode, location: impl Into<String>) {
        self.issues.push(ValidationIssue { code, location: location.into() });
    }

    fn quantity(&mut self, value: f64, location: impl Into<String>) {
        if !value.is_finite() {
            self.push(IssueCode::NonFinite, location);
        } else if value < 0.0 {
            self.push(IssueCode::NegativeQuantity, location);
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

fn check_ids<'a>(report: &mut ValidationReport, kind: &str, ids: impl Iterator<Item = &'a str>) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for id in ids {
        count += 1;
        if !seen.insert(id) {
            report.push(IssueCode::DuplicateId, format!("{kind}[{id}]"));
        }
    }
    if count == 0 {
        report.push(IssueCode::EmptyEntitySet, kind);
    }
    seen
}

/// Lists every violated scenario invariant; an empty report means the
/// scenario is usable by the model builder.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let farmers = check_ids(&mut report, "farmers", s.farmers.iter().map(|f| f.id.as_str()));
    let varieties = check_ids(&mut report, "varieties", s.varieties.iter().map(|v| v.id.as_str()));
    check_ids(&mut report, "periods", s.periods.iter().map(|p| p.id.as_str()));
    let markets = check_ids(&mut report, "markets", s.markets.iter().map(|m| m.id.as_str()));

    for f in &s.farmers {
        if !f.area.is_finite() {
            report.push(IssueCode::NonFinite, format!("farmers[{}].area", f.id));
        } else if f.area < 0.0 {
            report.push(IssueCode::NegativeQuantity, format!("farmers[{}].area", f.id));
        } else if f.area == 0.0 {
            report.push(IssueCode::NonpositiveArea, format!("farmers[{}].area", f.id));
        }
        for m in super::Month::all() {
            report.quantity(f.labor_capacity.get(m), format!("farmers[{}].labor_capacity[{}]", f.id, m.index()));
        }
    }
    for v in &s.varieties {
        report.quantity(v.harvest_labor, format!("varieties[{}].harvest_labor", v.id));
        report.quantity(v.planting_cost, format!("varieties[{}].planting_cost", v.id));
    }
    for p in &s.periods {
        let at = |field: &str| format!("periods[{}].{field}", p.id);
        if p.harvest_window.is_empty() {
            report.push(IssueCode::EmptyWindow, at("harvest_window"));
        }
        let mut sorted = p.harvest_window.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != p.harvest_window.len() || sorted != p.harvest_window {
            report.push(IssueCode::WindowOrder, at("harvest_window"));
        }
        if p.harvest_window.iter().any(|&m| m <= p.planting_month) {
            report.push(IssueCode::WindowOrder, at("harvest_window"));
        }
        if p.yields.len() != p.harvest_window.len() {
            report.push(IssueCode::YieldLength, at("yield"));
        }
        for (i, &y) in p.yields.iter().enumerate() {
            report.quantity(y, format!("periods[{}].yield[{i}]", p.id));
        }
        let span = (p.last_month().index() as usize + 1).saturating_sub(p.planting_month.index() as usize);
        if p.care_labor.len() != span {
            report.push(IssueCode::CareLaborLength, at("care_labor"));
        }
        for (i, &c) in p.care_labor.iter().enumerate() {
            report.quantity(c, format!("periods[{}].care_labor[{i}]", p.id));
        }
    }

    for (table, entries) in [("demand", &s.demand), ("price", &s.price)] {
        for ((v, m), values) in entries {
            if !varieties.contains(v.as_str()) {
                report.push(IssueCode::UnknownReference, format!("{table}[{v}, {m}].variety"));
            }
            if !markets.contains(m.as_str()) {
                report.push(IssueCode::UnknownReference, format!("{table}[{v}, {m}].market"));
            }
            for month in super::Month::all() {
                report.quantity(values.get(month), format!("{table}[{v}, {m}][{}]", month.index()));
            }
        }
    }
    for ((f, m), &c) in &s.transport_cost {
        if !farmers.contains(f.as_str()) {
            report.push(IssueCode::UnknownReference, format!("transport_cost[{f}, {m}].farmer"));
        }
        if !markets.contains(m.as_str()) {
            report.push(IssueCode::UnknownReference, format!("transport_cost[{f}, {m}].market"));
        }
        report.quantity(c, format!("transport_cost[{f}, {m}]"));
    }

    report.quantity(s.options.min_plot, "options.min_plot");
    report.quantity(s.options.labor_cost, "options.labor_cost");
    let smallest = s.farmers.iter().map(|f| f.area).fold(f64::INFINITY, f64::min);
    if s.options.min_plot.is_finite() && s.options.min_plot > smallest {
        report.push(IssueCode::MinPlotExceedsFarm, "options.min_plot");
    }
    report
}
