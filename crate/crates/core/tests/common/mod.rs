//! Generators and independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use cropplan_core::group::Ballot;
use cropplan_core::model::ObjectiveTriple;
use cropplan_core::scenario::{
    parse_scenario, Farmer, Market, Month, Monthly, PlantingPeriod, Scenario, ScenarioOptions, Variety, MONTHS,
};
use cropplan_core::solver::{MixedProgram, ObjectiveSense, RowSense};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).unwrap()
}

pub fn tiny_scenario() -> Scenario {
    parse_scenario(&fixture("tiny_scenario.toml")).unwrap()
}

/// Relative closeness used throughout the suites.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Textbook dominance, written out independently of the library.
pub fn oracle_dominates(a: &ObjectiveTriple, b: &ObjectiveTriple) -> bool {
    let ge = [a.profit >= b.profit, a.waste <= b.waste, a.unmet <= b.unmet];
    let gt = [a.profit > b.profit, a.waste < b.waste, a.unmet < b.unmet];
    ge.iter().all(|&x| x) && gt.iter().any(|&x| x)
}

/// The same with an absolute slack, for solver outputs.
pub fn clearly_dominates(a: &ObjectiveTriple, b: &ObjectiveTriple, tol: f64) -> bool {
    let no_worse = a.profit >= b.profit - tol && a.waste <= b.waste + tol && a.unmet <= b.unmet + tol;
    let better = a.profit > b.profit + tol || a.waste < b.waste - tol || a.unmet < b.unmet - tol;
    no_worse && better
}

/// A random mixed program with up to `max_binaries` binaries and up to
/// `max_continuous` continuous columns. Integer data keeps optima exact
/// enough to compare; a few columns are left unbounded above.
pub fn random_program(r: &mut ChaCha8Rng, max_binaries: usize, max_continuous: usize) -> MixedProgram {
    let sense = if r.gen_bool(0.5) { ObjectiveSense::Maximize } else { ObjectiveSense::Minimize };
    let mut p = MixedProgram::new(sense);
    let nb = r.gen_range(0..=max_binaries);
    let nc = r.gen_range(1..=max_continuous);
    for j in 0..nb {
        p.add_binary(format!("b{j}"));
    }
    for j in 0..nc {
        let lower = if r.gen_bool(0.2) { -(r.gen_range(1..=5) as f64) } else { 0.0 };
        let upper = if r.gen_bool(0.1) { f64::INFINITY } else { r.gen_range(1..=10) as f64 };
        p.add_continuous(format!("x{j}"), lower, upper);
    }
    let n = nb + nc;
    // A reference point that most rows are built to accept.
    let point: Vec<f64> = p
        .columns
        .iter()
        .map(|c| {
            if c.upper.is_infinite() {
                r.gen_range(0..=4) as f64
            } else if c.upper == 1.0 && c.lower == 0.0 {
                r.gen_range(0..=1) as f64
            } else {
                r.gen_range(c.lower as i64..=c.upper as i64) as f64
            }
        })
        .collect();
    let rows = r.gen_range(1..=8);
    for i in 0..rows {
        let mut coefficients = Vec::new();
        for j in 0..n {
            if r.gen_bool(0.4) {
                let a = r.gen_range(-5..=5) as f64;
                if a != 0.0 {
                    coefficients.push((j, a));
                }
            }
        }
        if coefficients.is_empty() {
            coefficients.push((r.gen_range(0..n), 1.0));
        }
        let activity: f64 = coefficients.iter().map(|&(j, a)| a * point[j]).sum();
        let sense = [RowSense::Le, RowSense::Ge, RowSense::Eq][r.gen_range(0..3)];
        let shift = if r.gen_bool(0.1) { r.gen_range(-6..=6) as f64 } else { 0.0 };
        let rhs = match sense {
            RowSense::Le => activity + r.gen_range(0..=4) as f64 + shift,
            RowSense::Ge => activity - r.gen_range(0..=4) as f64 + shift,
            RowSense::Eq => activity + shift,
        };
        p.add_row(format!("r{i}"), coefficients, sense, rhs);
    }
    // Switch-style links so binaries matter.
    for b in 0..nb.min(nc) {
        if r.gen_bool(0.5) {
            let x = nb + b;
            let m = r.gen_range(1..=10) as f64;
            p.add_row(format!("link{b}"), vec![(x, 1.0), (b, -m)], RowSense::Le, 0.0);
        }
    }
    p.objective = (0..n).filter_map(|j| {
        let c = r.gen_range(-10..=10) as f64;
        (c != 0.0).then_some((j, c))
    }).collect();
    p.objective_offset = r.gen_range(-20..=20) as f64;
    p
}

fn monthly(f: impl FnMut(usize) -> f64) -> Monthly {
    let mut f = f;
    let mut m = [0.0; MONTHS];
    for (i, v) in m.iter_mut().enumerate() {
        *v = f(i);
    }
    Monthly(m)
}

/// A random valid scenario with at most `max_farmers` farmers and at most
/// two varieties, planting periods and markets.
pub fn random_scenario(r: &mut ChaCha8Rng, max_farmers: usize) -> Scenario {
    let nf = r.gen_range(1..=max_farmers);
    let nv = r.gen_range(1..=2);
    let np = r.gen_range(1..=2);
    let nm = r.gen_range(1..=2);
    let min_plot = [0.25, 0.5, 1.0][r.gen_range(0..3)];
    let farmers = (0..nf)
        .map(|i| Farmer {
            id: format!("f{i}"),
            area: min_plot + r.gen_range(0..=8) as f64 * 0.5,
            labor_capacity: monthly(|_| r.gen_range(200..=2000) as f64),
        })
        .collect();
    let varieties = (0..nv)
        .map(|i| Variety {
            id: format!("v{i}"),
            harvest_labor: r.gen_range(0..=5) as f64 * 0.02,
            planting_cost: r.gen_range(0..=10) as f64 * 100.0,
        })
        .collect();
    let periods = (0..np)
        .map(|i| {
            let planting = r.gen_range(1..=6u8);
            let start = planting + r.gen_range(1..=2u8);
            let len = r.gen_range(1..=3u8).min(12 - start + 1);
            let window: Vec<Month> = (start..start + len).map(|m| Month::new(m).unwrap()).collect();
            let yields = window.iter().map(|_| r.gen_range(100..=800) as f64).collect();
            let span = (start + len - planting) as usize;
            let care_labor = (0..span).map(|_| r.gen_range(0..=20) as f64).collect();
            PlantingPeriod { id: format!("p{i}"), planting_month: Month::new(planting).unwrap(), harvest_window: window, yields, care_labor }
        })
        .collect();
    let markets: Vec<Market> = (0..nm).map(|i| Market { id: format!("m{i}") }).collect();
    let mut demand = BTreeMap::new();
    let mut price = BTreeMap::new();
    for v in 0..nv {
        for m in 0..nm {
            let key = (format!("v{v}"), format!("m{m}"));
            demand.insert(key.clone(), monthly(|i| if (2..10).contains(&i) && r.gen_bool(0.6) { r.gen_range(0..=1500) as f64 } else { 0.0 }));
            price.insert(key, monthly(|_| r.gen_range(1..=8) as f64 * 0.5));
        }
    }
    let mut transport_cost = BTreeMap::new();
    for f in 0..nf {
        for m in 0..nm {
            if r.gen_bool(0.5) {
                transport_cost.insert((format!("f{f}"), format!("m{m}")), r.gen_range(0..=4) as f64 * 0.1);
            }
        }
    }
    let labor_cost = if r.gen_bool(0.3) { r.gen_range(1..=5) as f64 * 0.5 } else { 0.0 };
    Scenario { farmers, varieties, periods, markets, demand, price, transport_cost, options: ScenarioOptions { min_plot, labor_cost } }
}

/// Random complete ballots over `n` alternatives named `a0`, `a1`, ...
pub fn random_profile(r: &mut ChaCha8Rng, n: usize, voters: usize) -> (Vec<String>, Vec<Ballot>) {
    let alternatives: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let ballots = (0..voters)
        .map(|v| {
            let mut ranking = alternatives.clone();
            ranking.shuffle(r);
            Ballot { voter_id: format!("v{v}"), weight: r.gen_range(1..=5) as f64, ranking }
        })
        .collect();
    (alternatives, ballots)
}

/// Points by counting, for each ballot, how many alternatives sit below
/// each alternative.
pub fn tally_oracle(alternatives: &[String], ballots: &[Ballot]) -> BTreeMap<String, f64> {
    let mut points: BTreeMap<String, f64> = alternatives.iter().map(|a| (a.clone(), 0.0)).collect();
    for b in ballots {
        for a in alternatives {
            let at = b.ranking.iter().position(|x| x == a).unwrap();
            let below = b.ranking.iter().skip(at + 1).count();
            *points.get_mut(a).unwrap() += b.weight * below as f64;
        }
    }
    points
}

/// Dense rank: one more than the number of distinct larger totals.
pub fn dense_rank_oracle(points: &BTreeMap<String, f64>) -> BTreeMap<String, u32> {
    let mut distinct: Vec<f64> = Vec::new();
    for &p in points.values() {
        if !distinct.iter().any(|&d| close(d, p, 1e-9)) {
            distinct.push(p);
        }
    }
    points
        .iter()
        .map(|(a, &p)| (a.clone(), 1 + distinct.iter().filter(|&&d| d > p && !close(d, p, 1e-9)).count() as u32))
        .collect()
}
