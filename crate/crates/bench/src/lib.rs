//! Seeded workloads shared by the benchmarks.

use cropplan_core::group::Ballot;
use cropplan_core::model::ObjectiveTriple;
use cropplan_core::solver::{MixedProgram, ObjectiveSense, RowSense};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A feasible knapsack-style program: `binaries` switches, each gating one
/// continuous column, under a few shared capacity rows.
pub fn gated_program(r: &mut ChaCha8Rng, binaries: usize, rows: usize) -> MixedProgram {
    let mut p = MixedProgram::new(ObjectiveSense::Maximize);
    let flags: Vec<usize> = (0..binaries).map(|j| p.add_binary(format!("b{j}"))).collect();
    let amounts: Vec<usize> = (0..binaries).map(|j| p.add_continuous(format!("x{j}"), 0.0, 10.0)).collect();
    for (&b, &x) in flags.iter().zip(&amounts) {
        p.add_row(format!("gate[{x}]"), vec![(x, 1.0), (b, -10.0)], RowSense::Le, 0.0);
        p.add_row(format!("floor[{x}]"), vec![(x, 1.0), (b, -1.0)], RowSense::Ge, 0.0);
    }
    for i in 0..rows {
        let terms: Vec<(usize, f64)> = amounts.iter().map(|&x| (x, r.gen_range(1..=9) as f64)).collect();
        p.add_row(format!("cap{i}"), terms, RowSense::Le, (binaries * 20) as f64);
    }
    p.objective = amounts.iter().map(|&x| (x, r.gen_range(1..=20) as f64)).collect();
    p.objective.extend(flags.iter().map(|&b| (b, -(r.gen_range(5..=40) as f64))));
    p
}

/// Random complete ballots over `n` alternatives.
pub fn profile(r: &mut ChaCha8Rng, n: usize, voters: usize) -> (Vec<String>, Vec<Ballot>) {
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

/// Points scattered on a coarse grid, so duplicates and dominance are common.
pub fn triples(r: &mut ChaCha8Rng, n: usize) -> Vec<(usize, ObjectiveTriple)> {
    (0..n)
        .map(|i| {
            let t = ObjectiveTriple::new(r.gen_range(0..50) as f64, r.gen_range(0..50) as f64, r.gen_range(0..50) as f64);
            (i, t)
        })
        .collect()
}
