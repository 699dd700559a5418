use std::fmt;

use serde::{Deserialize, Serialize};

/// The three supply-chain objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Sales income minus planting, transport and (optional) labor cost; maximized.
    Profit,
    /// Farm waste plus market waste in kg; minimized.
    Waste,
    /// Unfulfilled demand in kg; minimized.
    Unmet,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Profit, Objective::Waste, Objective::Unmet];

    pub fn is_maximized(self) -> bool {
        self == Objective::Profit
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Profit => "profit",
            Objective::Waste => "waste",
            Objective::Unmet => "unmet",
        }
    }

    /// True when `a` is strictly better than `b` for this objective.
    pub fn better(self, a: f64, b: f64) -> bool {
        if self.is_maximized() {
            a > b
        } else {
            a < b
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveTriple {
    pub profit: f64,
    pub waste: f64,
    pub unmet: f64,
}

impl ObjectiveTriple {
    pub fn new(profit: f64, waste: f64, unmet: f64) -> Self {
        ObjectiveTriple { profit, waste, unmet }
    }

    pub fn get(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Profit => self.profit,
            Objective::Waste => self.waste,
            Objective::Unmet => self.unmet,
        }
    }

    pub fn set(&mut self, objective: Objective, value: f64) {
        match objective {
            Objective::Profit => self.profit = value,
            Objective::Waste => self.waste = value,
            Objective::Unmet => self.unmet = value,
        }
    }

    /// Componentwise `self - other`.
    pub fn delta(&self, other: &ObjectiveTriple) -> ObjectiveTriple {
        ObjectiveTriple::new(self.profit - other.profit, self.waste - other.waste, self.unmet - other.unmet)
    }
}

impl fmt::Display for ObjectiveTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(profit {}, waste {}, unmet {})", self.profit, self.waste, self.unmet)
    }
}

/// Which objective to optimize and the bounds imposed on the other two.
///
/// Bounds are floors for profit and caps for waste and unmet demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub optimized: Objective,
    pub min_profit: Option<f64>,
    pub max_waste: Option<f64>,
    pub max_unmet: Option<f64>,
}

impl ObjectiveSpec {
    pub fn optimize(objective: Objective) -> Self {
        ObjectiveSpec { optimized: objective, min_profit: None, max_waste: None, max_unmet: None }
    }

    pub fn with_bound(mut self, objective: Objective, value: f64) -> Self {
        match objective {
            Objective::Profit => self.min_profit = Some(value),
            Objective::Waste => self.max_waste = Some(value),
            Objective::Unmet => self.max_unmet = Some(value),
        }
        self
    }

    pub fn bound(&self, objective: Objective) -> Option<f64> {
        match objective {
            Objective::Profit => self.min_profit,
            Objective::Waste => self.max_waste,
            Objective::Unmet => self.max_unmet,
        }
    }

    pub fn bounds(&self) -> impl Iterator<Item = (Objective, f64)> + '_ {
        Objective::ALL.into_iter().filter_map(|o| self.bound(o).map(|b| (o, b)))
    }

    pub fn check(&self) -> Result<(), String> {
        if self.bound(self.optimized).is_some() {
            return Err(format!("{} is optimized and cannot also be bounded", self.optimized));
        }
        if let Some((o, _)) = self.bounds().find(|(_, b)| !b.is_finite()) {
            return Err(format!("bound on {o} is not finite"));
        }
        Ok(())
    }
}
