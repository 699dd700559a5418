//! TOML scenario documents.
//!
//! ```toml
//! schema_version = 1
//!
//! [options]
//! min_plot = 0.5        # ha, optional
//! labor_cost = 0.0      # currency per hour, optional
//!
//! [[farmers]]
//! id = "F1"
//! area = 20.0                       # ha
//! labor_capacity = [ ...12 values ] # hours per month, July first
//!
//! [[varieties]]
//! id = "pear"
//! harvest_labor = 0.004             # hours per kg
//! planting_cost = 2500.0            # currency per ha
//!
//! [[periods]]
//! id = "July"
//! planting_month = 1
//! harvest_window = [5, 6, 7, 8]
//! yield = [ ...one per window month ]       # kg per ha
//! care_labor = [ ...planting..=window end ] # hours per ha, optional
//!
//! [[markets]]
//! id = "central"
//!
//! [[demand]]
//! variety = "pear"
//! market = "central"
//! kg = [ ...12 values ]
//!
//! [[price]]
//! variety = "pear"
//! market = "central"
//! per_kg = [ ...12 values ]
//!
//! [[transport_cost]]
//! farmer = "F1"
//! market = "central"
//! per_kg = 0.05
//! ```
//!
//! Demand, price and transport entries that are left out are zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    validate_scenario, Farmer, Market, Month, Monthly, PlantingPeriod, Scenario, ScenarioError, ScenarioOptions,
    Variety, DEFAULT_MIN_PLOT, MONTHS,
};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub options: OptionsDoc,
    #[serde(default)]
    pub farmers: Vec<FarmerDoc>,
    #[serde(default)]
    pub varieties: Vec<VarietyDoc>,
    #[serde(default)]
    pub periods: Vec<PeriodDoc>,
    #[serde(default)]
    pub markets: Vec<MarketDoc>,
    #[serde(default)]
    pub demand: Vec<DemandDoc>,
    #[serde(default)]
    pub price: Vec<PriceDoc>,
    #[serde(default)]
    pub transport_cost: Vec<TransportDoc>,
}

fn schema_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

fn default_min_plot() -> f64 {
    DEFAULT_MIN_PLOT
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDoc {
    #[serde(default = "default_min_plot")]
    pub min_plot: f64,
    #[serde(default)]
    pub labor_cost: f64,
}

impl Default for OptionsDoc {
    fn default() -> Self {
        OptionsDoc { min_plot: DEFAULT_MIN_PLOT, labor_cost: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarmerDoc {
    pub id: String,
    pub area: f64,
    pub labor_capacity: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietyDoc {
    pub id: String,
    #[serde(default)]
    pub harvest_labor: f64,
    #[serde(default)]
    pub planting_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodDoc {
    pub id: String,
    pub planting_month: Month,
    pub harvest_window: Vec<Month>,
    #[serde(rename = "yield")]
    pub yields: Vec<f64>,
    #[serde(default)]
    pub care_labor: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketDoc {
    pub id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandDoc {
    pub variety: String,
    pub market: String,
    pub kg: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceDoc {
    pub variety: String,
    pub market: String,
    pub per_kg: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportDoc {
    pub farmer: String,
    pub market: String,
    pub per_kg: f64,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDocument = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
    let scenario = Scenario::try_from(doc)?;
    let report = validate_scenario(&scenario);
    if report.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(report))
    }
}

/// Renders a scenario as a TOML document that [`parse_scenario`] reads back
/// into an equal value.
pub fn to_scenario_text(scenario: &Scenario) -> String {
    toml::to_string(&ScenarioDocument::from(scenario)).expect("scenario documents always serialize")
}

fn monthly(values: Vec<f64>, what: &str) -> Result<Monthly, ScenarioError> {
    let array: [f64; MONTHS] = values.try_into().map_err(|v: Vec<f64>| {
        ScenarioError::Format(format!("{what}: expected {MONTHS} monthly values, found {}", v.len()))
    })?;
    Ok(Monthly(array))
}

impl TryFrom<ScenarioDocument> for Scenario {
    type Error = ScenarioError;

    fn try_from(doc: ScenarioDocument) -> Result<Self, Self::Error> {
        if doc.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(ScenarioError::Format(format!(
                "unsupported schema_version {} (expected {SCENARIO_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let farmers = doc
            .farmers
            .into_iter()
            .map(|f| {
                let labor_capacity = monthly(f.labor_capacity, &format!("farmers[{}].labor_capacity", f.id))?;
                Ok(Farmer { id: f.id, area: f.area, labor_capacity })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let varieties = doc
            .varieties
            .into_iter()
            .map(|v| Variety { id: v.id, harvest_labor: v.harvest_labor, planting_cost: v.planting_cost })
            .collect();
        let periods = doc
            .periods
            .into_iter()
            .map(|p| {
                let mut care_labor = p.care_labor;
                if care_labor.is_empty() {
                    let last = p.harvest_window.iter().copied().max().unwrap_or(p.planting_month);
                    let span = (last.index() as usize + 1).saturating_sub(p.planting_month.index() as usize);
                    care_labor = vec![0.0; span.max(1)];
                }
                PlantingPeriod {
                    id: p.id,
                    planting_month: p.planting_month,
                    harvest_window: p.harvest_window,
                    yields: p.yields,
                    care_labor,
                }
            })
            .collect();
        let markets = doc.markets.into_iter().map(|m| Market { id: m.id }).collect();

        let mut demand = BTreeMap::new();
        for d in doc.demand {
            let values = monthly(d.kg, &format!("demand[{}, {}].kg", d.variety, d.market))?;
            let key = (d.variety, d.market);
            if demand.insert(key.clone(), values).is_some() {
                return Err(ScenarioError::Format(format!("duplicate demand entry for {key:?}")));
            }
        }
        let mut price = BTreeMap::new();
        for p in doc.price {
            let values = monthly(p.per_kg, &format!("price[{}, {}].per_kg", p.variety, p.market))?;
            let key = (p.variety, p.market);
            if price.insert(key.clone(), values).is_some() {
                return Err(ScenarioError::Format(format!("duplicate price entry for {key:?}")));
            }
        }
        let mut transport_cost = BTreeMap::new();
        for t in doc.transport_cost {
            let key = (t.farmer, t.market);
            if transport_cost.insert(key.clone(), t.per_kg).is_some() {
                return Err(ScenarioError::Format(format!("duplicate transport_cost entry for {key:?}")));
            }
        }
        Ok(Scenario {
            farmers,
            varieties,
            periods,
            markets,
            demand,
            price,
            transport_cost,
            options: ScenarioOptions { min_plot: doc.options.min_plot, labor_cost: doc.options.labor_cost },
        })
    }
}

impl From<&Scenario> for ScenarioDocument {
    fn from(s: &Scenario) -> Self {
        ScenarioDocument {
            schema_version: SCENARIO_SCHEMA_VERSION,
            options: OptionsDoc { min_plot: s.options.min_plot, labor_cost: s.options.labor_cost },
            farmers: s
                .farmers
                .iter()
                .map(|f| FarmerDoc { id: f.id.clone(), area: f.area, labor_capacity: f.labor_capacity.0.to_vec() })
                .collect(),
            varieties: s
                .varieties
                .iter()
                .map(|v| VarietyDoc {
                    id: v.id.clone(),
                    harvest_labor: v.harvest_labor,
                    planting_cost: v.planting_cost,
                })
                .collect(),
            periods: s
                .periods
                .iter()
                .map(|p| PeriodDoc {
                    id: p.id.clone(),
                    planting_month: p.planting_month,
                    harvest_window: p.harvest_window.clone(),
                    yields: p.yields.clone(),
                    care_labor: p.care_labor.clone(),
                })
                .collect(),
            markets: s.markets.iter().map(|m| MarketDoc { id: m.id.clone() }).collect(),
            demand: s
                .demand
                .iter()
                .map(|((v, m), kg)| DemandDoc { variety: v.clone(), market: m.clone(), kg: kg.0.to_vec() })
                .collect(),
            price: s
                .price
                .iter()
                .map(|((v, m), p)| PriceDoc { variety: v.clone(), market: m.clone(), per_kg: p.0.to_vec() })
                .collect(),
            transport_cost: s
                .transport_cost
                .iter()
                .map(|((f, m), &c)| TransportDoc { farmer: f.clone(), market: m.clone(), per_kg: c })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{demo_scenario, IssueCode};

    const MINIMAL: &str = r#"
[[farmers]]
id = "F1"
area = 4.0
labor_capacity = [100, 100, 100, 100, 100, 100, 100, 100, 100, 100, 100, 100]

[[varieties]]
id = "round"

[[periods]]
id = "July"
planting_month = 1
harvest_window = [5, 6]
yield = [1000, 2000]

[[markets]]
id = "central"
"#;

    #[test]
    fn omitted_tables_default_to_zero() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert!(s.demand.is_empty());
        assert_eq!(s.demand(0, 0, Month::new(5).unwrap()), 0.0);
        assert_eq!(s.price(0, 0, Month::new(5).unwrap()), 0.0);
        assert_eq!(s.transport_cost(0, 0), 0.0);
        assert_eq!(s.options.min_plot, DEFAULT_MIN_PLOT);
        assert_eq!(s.periods[0].care_labor, vec![0.0; 6]);
    }

    #[test]
    fn negative_area_is_reported() {
        let text = MINIMAL.replace("area = 4.0", "area = -1.0");
        match parse_scenario(&text) {
            Err(ScenarioError::Invalid(report)) => {
                assert!(report.has(IssueCode::NegativeQuantity));
                assert!(report.to_string().contains("negative quantity"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_scenario("[[farmers]\nid = 1").unwrap_err();
        let ScenarioError::Syntax(message) = err else { panic!("expected syntax error") };
        assert!(message.contains("line 1"), "{message}");
    }

    #[test]
    fn undeclared_reference() {
        let text = format!("{MINIMAL}\n[[demand]]\nvariety = \"plum\"\nmarket = \"central\"\nkg = [0,0,0,0,5,0,0,0,0,0,0,0]\n");
        let Err(ScenarioError::Invalid(report)) = parse_scenario(&text) else { panic!() };
        assert!(report.has(IssueCode::UnknownReference));
    }

    #[test]
    fn month_out_of_range_is_a_syntax_error() {
        let text = MINIMAL.replace("harvest_window = [5, 6]", "harvest_window = [5, 13]");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Syntax(_))));
    }

    #[test]
    fn wrong_monthly_length() {
        let text = MINIMAL.replace("100, 100, 100, 100, 100, 100]", "100]");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Format(_))));
    }

    #[test]
    fn duplicate_demand_entry() {
        let entry = "\n[[demand]]\nvariety = \"round\"\nmarket = \"central\"\nkg = [0,0,0,0,5,0,0,0,0,0,0,0]\n";
        let text = format!("{MINIMAL}{entry}{entry}");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Format(_))));
    }

    #[test]
    fn demo_round_trip() {
        let s = demo_scenario();
        assert_eq!(parse_scenario(&to_scenario_text(&s)).unwrap(), s);
    }
}
