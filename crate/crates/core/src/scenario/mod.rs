//! Problem instances: farmers, tomato varieties, planting periods, markets
//! and the monthly demand, price and transport-cost tables that link them.
//!
//! The horizon is one year of twelve [`Month`]s starting in July. Scenarios
//! are read from and written to a TOML document (see [`parse_scenario`] and
//! [`to_scenario_text`]); [`validate_scenario`] reports every violated
//! invariant as data.

mod file;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use file::{parse_scenario, to_scenario_text, ScenarioDocument};
pub use validate::{validate_scenario, IssueCode, ValidationIssue, ValidationReport};

pub const MONTHS: usize = 12;
pub const DEFAULT_MIN_PLOT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario syntax error: {0}")]
    Syntax(String),
    #[error("scenario format error: {0}")]
    Format(String),
    #[error("invalid scenario: {0}")]
    Invalid(ValidationReport),
}

/// A month of the planning year; index 1 is July and 12 is the following June.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Month(u8);

impl Month {
    pub const NAMES: [&'static str; MONTHS] =
        ["Jul", "Aug", "Sep", "Oct", "Nov", "Dec", "Jan", "Feb", "Mar", "Apr", "May", "Jun"];

    pub fn new(index: u8) -> Option<Month> {
        (1..=MONTHS as u8).contains(&index).then_some(Month(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Zero-based offset, for indexing monthly arrays.
    pub fn offset(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_offset(offset: usize) -> Month {
        assert!(offset < MONTHS, "month offset {offset} out of range");
        Month(offset as u8 + 1)
    }

    pub fn all() -> impl Iterator<Item = Month> {
        (1..=MONTHS as u8).map(Month)
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self.offset()]
    }
}

impl TryFrom<u8> for Month {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Month::new(value).ok_or_else(|| format!("month index {value} outside 1..=12"))
    }
}

impl From<Month> for u8 {
    fn from(m: Month) -> u8 {
        m.0
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.0, self.name())
    }
}

/// One value per month of the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Monthly(pub [f64; MONTHS]);

impl Monthly {
    pub fn get(&self, month: Month) -> f64 {
        self.0[month.offset()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Farmer {
    pub id: String,
    /// Plantable area in hectares.
    pub area: f64,
    /// Labor hours available in each month.
    pub labor_capacity: Monthly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variety {
    pub id: String,
    /// Harvest labor, hours per kg.
    pub harvest_labor: f64,
    /// Planting cost, currency per hectare.
    pub planting_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantingPeriod {
    pub id: String,
    pub planting_month: Month,
    /// Months in which the crop matures, ascending.
    pub harvest_window: Vec<Month>,
    /// kg per hectare maturing in each window month (aligned with `harvest_window`).
    pub yields: Vec<f64>,
    /// Care labor in hours per hectare for every month from planting to the
    /// end of the window, starting at `planting_month`.
    pub care_labor: Vec<f64>,
}

impl PlantingPeriod {
    pub fn yield_in(&self, month: Month) -> f64 {
        self.harvest_window
            .iter()
            .position(|&m| m == month)
            .and_then(|i| self.yields.get(i).copied())
            .unwrap_or(0.0)
    }

    pub fn in_window(&self, month: Month) -> bool {
        self.harvest_window.contains(&month)
    }

    pub fn last_month(&self) -> Month {
        self.harvest_window.iter().copied().max().unwrap_or(self.planting_month)
    }

    /// Care labor per hectare in `month`; zero outside planting..=window end.
    pub fn care_labor_in(&self, month: Month) -> f64 {
        if month < self.planting_month || month > self.last_month() {
            return 0.0;
        }
        self.care_labor.get(month.offset() - self.planting_month.offset()).copied().unwrap_or(0.0)
    }

    /// Total kg per hectare over the window.
    pub fn total_yield(&self) -> f64 {
        self.yields.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub id: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioOptions {
    /// Minimum planted area (ha) whenever a planting indicator is on.
    pub min_plot: f64,
    /// Optional cost per labor hour charged against profit.
    pub labor_cost: f64,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions { min_plot: DEFAULT_MIN_PLOT, labor_cost: 0.0 }
    }
}

/// `(variety id, market id)`.
pub type FlowKey = (String, String);

/// A full problem instance. Absent map entries read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub farmers: Vec<Farmer>,
    pub varieties: Vec<Variety>,
    pub periods: Vec<PlantingPeriod>,
    pub markets: Vec<Market>,
    /// kg demanded per month.
    pub demand: BTreeMap<FlowKey, Monthly>,
    /// Sale price per kg per month.
    pub price: BTreeMap<FlowKey, Monthly>,
    /// Transport cost per kg, keyed by `(farmer id, market id)`.
    pub transport_cost: BTreeMap<(String, String), f64>,
    pub options: ScenarioOptions,
}

impl Scenario {
    pub fn demand(&self, variety: usize, market: usize, month: Month) -> f64 {
        self.flow_value(&self.demand, variety, market, month)
    }

    pub fn price(&self, variety: usize, market: usize, month: Month) -> f64 {
        self.flow_value(&self.price, variety, market, month)
    }

    pub fn transport_cost(&self, farmer: usize, market: usize) -> f64 {
        let key = (self.farmers[farmer].id.clone(), self.markets[market].id.clone());
        self.transport_cost.get(&key).copied().unwrap_or(0.0)
    }

    fn flow_value(&self, table: &BTreeMap<FlowKey, Monthly>, variety: usize, market: usize, month: Month) -> f64 {
        let key = (self.varieties[variety].id.clone(), self.markets[market].id.clone());
        table.get(&key).map_or(0.0, |m| m.get(month))
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.values().map(Monthly::total).sum()
    }

    /// Months in which at least one planting period can be harvested, ascending.
    pub fn harvest_months(&self) -> Vec<Month> {
        Month::all().filter(|&m| self.periods.iter().any(|p| p.in_window(m))).collect()
    }

    /// Built-in five-farmer instance; see `fixtures/demo_scenario.toml`.
    pub fn demo() -> Scenario {
        demo_scenario()
    }
}

pub const DEMO_SCENARIO_TEXT: &str = include_str!("../../fixtures/demo_scenario.toml");

/// Five farmers (20/18/17/16/15 ha), three varieties, three planting periods
/// and two markets. Areas and harvest windows mirror a greenhouse tomato
/// cooperative; every demand, price, cost, yield and labor number is synthetic.
pub fn demo_scenario() -> Scenario {
    parse_scenario(DEMO_SCENARIO_TEXT).expect("bundled demo scenario is valid")
}
