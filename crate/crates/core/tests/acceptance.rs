//! Acceptance criteria. Every criterion prints one `PASS`/`FAIL` line to
//! stderr, even while the test harness captures output.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use common::*;
use cropplan_core::group::{borda_scores, compare_rankings, rank_by_points, Ballot, GroupRanking};
use cropplan_core::model::{build_model, check_plan, evaluate_plan, optimize, Objective, ObjectiveSpec, ObjectiveTriple};
use cropplan_core::pareto::{filter_dominated, generate_front, payoff_table, FrontOptions, GridMode};
use cropplan_core::service::{SessionAlternative, SessionStore};
use cropplan_core::solver::{brute_force_milp, solve_milp, MilpOptions, SolveStatus};
use rand::seq::SliceRandom;
use rand::Rng;

fn report(name: &str, started: Instant, outcome: Result<String, String>) {
    let elapsed = started.elapsed().as_secs_f64();
    let line = match &outcome {
        Ok(detail) => format!("[acceptance] PASS {name} ({detail}; {elapsed:.2} s)"),
        Err(why) => format!("[acceptance] FAIL {name}: {why} ({elapsed:.2} s)"),
    };
    writeln!(std::io::stderr().lock(), "{line}").unwrap();
    if let Err(why) = outcome {
        panic!("{name}: {why}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reference_front() -> Vec<(String, ObjectiveTriple)> {
    let doc: cropplan_core::group::AlternativeSet = serde_json::from_str(&fixture("reference_front.json")).unwrap();
    doc.alternatives.into_iter().map(|a| (a.id, a.objectives.unwrap())).collect()
}

fn points(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

const BUSINESS_POINTS: [(&str, f64); 10] = [
    ("A", 30.0), ("B", 26.0), ("C", 17.0), ("D", 18.0), ("E", 11.0),
    ("F", 17.0), ("G", 28.0), ("H", 20.0), ("I", 29.0), ("J", 6.0),
];
const RESEARCH_POINTS: [(&str, f64); 10] = [
    ("A", 17.0), ("B", 20.0), ("C", 23.0), ("D", 24.0), ("E", 17.0),
    ("F", 16.0), ("G", 16.0), ("H", 10.0), ("I", 15.0), ("J", 8.0),
];

#[test]
fn reference_front_is_non_dominated() {
    let started = Instant::now();
    let outcome = (|| {
        let front = reference_front();
        ensure(front.len() == 10, || format!("fixture has {} points", front.len()))?;
        let kept = filter_dominated(&front);
        ensure(kept == front, || format!("kept {} of 10", kept.len()))?;
        for (label, t) in &front {
            let worse = ObjectiveTriple::new(t.profit - 1.0, t.waste + 1.0, t.unmet + 1.0);
            let mut with = front.clone();
            with.push((format!("{label}-"), worse));
            let kept = filter_dominated(&with);
            ensure(kept == front, || format!("adding a point dominated by {label} kept {:?}", kept.iter().map(|k| &k.0).collect::<Vec<_>>()))?;
        }
        ensure(started.elapsed() < Duration::from_secs(1), || "slower than 1 s".into())?;
        Ok("10 of 10 kept, each synthetic dominated point removed alone".to_string())
    })();
    report("reference front dominance", started, outcome);
}

fn ranks_of(r: &GroupRanking) -> Vec<(String, u32)> {
    r.entries.iter().map(|e| (e.alternative.clone(), e.rank)).collect()
}

#[test]
fn business_points_give_dense_ranks() {
    let started = Instant::now();
    let outcome = (|| {
        let r = rank_by_points(&points(&BUSINESS_POINTS));
        let expected: Vec<(String, u32)> = [("A", 1), ("I", 2), ("G", 3), ("B", 4), ("H", 5), ("D", 6), ("C", 7), ("F", 7), ("E", 8), ("J", 9)]
            .iter()
            .map(|&(a, k)| (a.to_string(), k))
            .collect();
        ensure(ranks_of(&r) == expected, || format!("got {:?}", ranks_of(&r)))?;
        ensure(r.is_tied("C") && r.is_tied("F"), || "C and F not tied".into())?;
        ensure(started.elapsed() < Duration::from_secs(1), || "slower than 1 s".into())?;
        Ok("ranks 1-9, C and F tied at 7, E at 8".to_string())
    })();
    report("business ranking fixture", started, outcome);
}

#[test]
fn ranking_comparison_rows() {
    let started = Instant::now();
    let outcome = (|| {
        let objectives: BTreeMap<String, ObjectiveTriple> = reference_front().into_iter().collect();
        let be = rank_by_points(&points(&BUSINESS_POINTS));
        let re = rank_by_points(&points(&RESEARCH_POINTS));
        let re_order = ["D", "C", "B", "A", "E", "F", "G", "I", "H", "J"];
        ensure(re.order() == re_order, || format!("research order {:?}", re.order()))?;
        let cmp = compare_rankings(&be, &re, &objectives).map_err(|e| e.to_string())?;
        let first = &cmp.rows[0];
        ensure((first.first.as_str(), first.second.as_str()) == ("A", "D"), || format!("row 1 pairs {} with {}", first.first, first.second))?;
        let expected = ObjectiveTriple::new(1_484_874.0, -5_877_306.0, 17_384_760.0);
        ensure(first.delta == expected, || format!("row 1 delta {}", first.delta))?;
        let last = cmp.rows.last().unwrap();
        ensure(last.first == "J" && last.second == "J" && last.delta == ObjectiveTriple::default(), || format!("last row {last:?}"))?;
        Ok(format!("row 1 delta {}, J row zero", first.delta))
    })();
    report("ranking comparison fixture", started, outcome);
}

#[test]
fn solver_matches_brute_force() {
    let started = Instant::now();
    let outcome = (|| {
        let mut r = rng(20_240_601);
        let (mut optimal, mut infeasible, mut unbounded) = (0, 0, 0);
        let cases = 600;
        for case in 0..cases {
            let p = random_program(&mut r, 12, 10);
            let fast = solve_milp(&p).map_err(|e| format!("case {case}: {e}"))?;
            let slow = brute_force_milp(&p).map_err(|e| format!("case {case}: {e}"))?;
            ensure(fast.status == slow.status, || format!("case {case}: {:?} vs brute force {:?}\n{}", fast.status, slow.status, serde_json::to_string(&p).unwrap()))?;
            match fast.status {
                SolveStatus::Optimal => {
                    optimal += 1;
                    let (a, b) = (fast.objective_value.unwrap(), slow.objective_value.unwrap());
                    ensure(close(a, b, 1e-6), || format!("case {case}: objective {a} vs brute force {b}"))?;
                    let x = fast.assignment.as_ref().unwrap();
                    ensure(p.max_violation(x) <= 1e-6, || format!("case {case}: violation {}", p.max_violation(x)))?;
                }
                SolveStatus::Infeasible => infeasible += 1,
                SolveStatus::Unbounded => unbounded += 1,
            }
        }
        ensure(started.elapsed() < Duration::from_secs(300), || "slower than 5 min".into())?;
        Ok(format!("{cases} programs: {optimal} optimal, {infeasible} infeasible, {unbounded} unbounded"))
    })();
    report("solver oracle", started, outcome);
}

#[test]
fn solver_plans_pass_the_model_checks() {
    let started = Instant::now();
    let outcome = (|| {
        let mut r = rng(7);
        let cases = 32;
        let mut solved = 0;
        for case in 0..cases {
            let s = random_scenario(&mut r, 3);
            let objective = Objective::ALL[case % 3];
            let mut spec = ObjectiveSpec::optimize(objective);
            if case % 4 == 3 {
                spec = match objective {
                    Objective::Unmet => spec.with_bound(Objective::Profit, 0.0),
                    _ => spec.with_bound(Objective::Unmet, s.total_demand() * 0.9),
                };
            }
            let outcome = optimize(&s, &spec, MilpOptions::default()).map_err(|e| format!("case {case}: {e}"))?;
            let Some(sol) = outcome.solution() else {
                let model = build_model(&s, &spec).map_err(|e| e.to_string())?;
                let brute = brute_force_milp(&model.program).map_err(|e| e.to_string())?;
                ensure(brute.status != SolveStatus::Optimal, || format!("case {case}: unsolved but brute force finds a plan"))?;
                continue;
            };
            solved += 1;
            let report = check_plan(&s, &sol.plan).map_err(|e| e.to_string())?;
            ensure(report.is_empty(), || format!("case {case}: residual {} in {:?}", report.max_residual(), report.violations.first()))?;
            let evaluated = evaluate_plan(&s, &sol.plan).map_err(|e| e.to_string())?;
            let v = evaluated.get(objective);
            ensure(close(v, sol.solver_objective, 1e-6), || format!("case {case}: evaluated {v} vs solver {}", sol.solver_objective))?;
        }
        ensure(solved >= 20, || format!("only {solved} scenarios solved"))?;
        Ok(format!("{solved} of {cases} scenarios solved and checked"))
    })();
    report("model integrity", started, outcome);
}

#[test]
fn epsilon_constraint_suite() {
    let started = Instant::now();
    let outcome = (|| {
        let s = tiny_scenario();
        let options = MilpOptions::default();
        let table = payoff_table(&s, options).map_err(|e| e.to_string())?;
        for (i, o) in Objective::ALL.into_iter().enumerate() {
            let single = optimize(&s, &ObjectiveSpec::optimize(o), options).map_err(|e| e.to_string())?;
            let v = single.solution().ok_or("single-objective run failed")?.objectives.get(o);
            let d = table.entries[i].get(o);
            ensure(close(d, v, 1e-6), || format!("payoff diagonal {o}: {d} vs single optimum {v}"))?;
        }

        let full = generate_front(&s, &FrontOptions { grid_size: 4, mode: GridMode::Full, ..FrontOptions::default() })
            .map_err(|e| e.to_string())?;
        for sol in &full.solutions {
            let cell = &full.report.cells[sol.cell];
            let model = build_model(&s, &cell.spec).map_err(|e| e.to_string())?;
            let brute = brute_force_milp(&model.program).map_err(|e| e.to_string())?;
            ensure(brute.is_optimal(), || format!("cell {} infeasible for brute force", sol.cell))?;
            let v = sol.objectives.get(cell.spec.optimized);
            let b = brute.objective_value.unwrap();
            ensure(close(v, b, 1e-6), || format!("cell {}: front {v} vs brute force {b}", sol.cell))?;
        }
        for cell in full.report.infeasible_cells() {
            let model = build_model(&s, &cell.spec).map_err(|e| e.to_string())?;
            let brute = brute_force_milp(&model.program).map_err(|e| e.to_string())?;
            ensure(brute.status == SolveStatus::Infeasible, || format!("cell {} skipped but brute force finds {:?}", cell.index, brute.status))?;
        }
        let diagonal = generate_front(&s, &FrontOptions { grid_size: 10, mode: GridMode::Diagonal, ..FrontOptions::default() })
            .map_err(|e| e.to_string())?;
        for set in [&full, &diagonal] {
            for a in &set.solutions {
                for b in &set.solutions {
                    ensure(!oracle_dominates(&b.objectives, &a.objectives), || format!("{} dominated by {}", a.label, b.label))?;
                }
            }
        }
        ensure(diagonal.solutions.len() <= 10, || format!("diagonal front has {}", diagonal.solutions.len()))?;
        Ok(format!(
            "full g=4 front of {} verified per cell, diagonal g=10 front of {}",
            full.solutions.len(),
            diagonal.solutions.len()
        ))
    })();
    report("epsilon-constraint suite", started, outcome);
}

fn same_ranking(a: &GroupRanking, b: &GroupRanking) -> bool {
    ranks_of(a) == ranks_of(b)
}

#[test]
fn borda_properties() {
    let started = Instant::now();
    let outcome = (|| {
        let mut r = rng(11);
        let profiles = 600;
        for case in 0..profiles {
            let n = r.gen_range(2..=8);
            let voters = r.gen_range(1..=6);
            let (alts, ballots) = random_profile(&mut r, n, voters);
            let scores = borda_scores(&alts, &ballots).map_err(|e| e.to_string())?;
            let ranking = rank_by_points(&scores);

            let total: f64 = scores.values().sum();
            let weights: f64 = ballots.iter().map(|b| b.weight).sum();
            let expected = weights * (n * (n - 1)) as f64 / 2.0;
            ensure(close(total, expected, 1e-9), || format!("case {case}: total {total} vs {expected}"))?;

            let c = r.gen_range(0.1..10.0);
            let scaled: Vec<Ballot> = ballots.iter().map(|b| Ballot { weight: b.weight * c, ..b.clone() }).collect();
            let scaled_scores = borda_scores(&alts, &scaled).map_err(|e| e.to_string())?;
            for a in &alts {
                ensure(close(scaled_scores[a], c * scores[a], 1e-9), || format!("case {case}: {a} did not scale by {c}"))?;
            }
            let scaled_ranking = rank_by_points(&scaled_scores);
            ensure(same_ranking(&ranking, &scaled_ranking), || format!("case {case}: scaling by {c} changed the ranking"))?;

            let mut shuffled = ballots.clone();
            shuffled.shuffle(&mut r);
            let shuffled_ranking = rank_by_points(&borda_scores(&alts, &shuffled).map_err(|e| e.to_string())?);
            ensure(same_ranking(&ranking, &shuffled_ranking), || format!("case {case}: voter order changed the ranking"))?;

            let v = r.gen_range(0..voters);
            let k = r.gen_range(0..n - 1);
            let mut swapped = ballots.clone();
            swapped[v].ranking.swap(k, k + 1);
            let raised = swapped[v].ranking[k].clone();
            let lowered = swapped[v].ranking[k + 1].clone();
            let after = borda_scores(&alts, &swapped).map_err(|e| e.to_string())?;
            let w = ballots[v].weight;
            for a in &alts {
                let delta = after[a] - scores[a];
                let want = if *a == raised { w } else if *a == lowered { -w } else { 0.0 };
                ensure(close(delta, want, 1e-9), || format!("case {case}: {a} moved by {delta}, expected {want}"))?;
            }
            let tally = tally_oracle(&alts, &ballots);
            let ranks = dense_rank_oracle(&tally);
            for e in &ranking.entries {
                ensure(close(e.points, tally[&e.alternative], 1e-9), || format!("case {case}: {} has {} points, tally {}", e.alternative, e.points, tally[&e.alternative]))?;
                ensure(e.rank == ranks[&e.alternative], || format!("case {case}: {} ranked {}, oracle {}", e.alternative, e.rank, ranks[&e.alternative]))?;
            }
            let mut oracle_order: Vec<(u32, &String)> = ranks.iter().map(|(a, &k)| (k, a)).collect();
            oracle_order.sort();
            let listed: Vec<&String> = ranking.entries.iter().map(|e| &e.alternative).collect();
            ensure(listed == oracle_order.iter().map(|(_, a)| *a).collect::<Vec<_>>(), || format!("case {case}: listing {listed:?}"))?;
        }
        ensure(started.elapsed() < Duration::from_secs(60), || "slower than 1 min".into())?;
        Ok(format!("{profiles} profiles: conservation, scaling, permutation, swap monotonicity, tally oracle"))
    })();
    report("borda properties", started, outcome);
}

const WEIGHTS: [f64; 5] = [1.0, 5.0, 5.0, 3.0, 3.0];
const TARGET: [&str; 10] = ["A", "I", "G", "B", "H", "D", "C", "F", "E", "J"];

/// Distance of the tally of `rankings` from the target order: every
/// consecutive pair strictly ordered except C and F, which must tie.
fn target_distance(rankings: &[Vec<String>]) -> f64 {
    let ballots: Vec<Ballot> = rankings
        .iter()
        .zip(WEIGHTS)
        .enumerate()
        .map(|(i, (r, w))| Ballot { voter_id: format!("u{i}"), weight: w, ranking: r.clone() })
        .collect();
    let alts: Vec<String> = TARGET.iter().map(|s| s.to_string()).collect();
    let p = tally_oracle(&alts, &ballots);
    TARGET
        .windows(2)
        .map(|w| {
            let (x, y) = (p[w[0]], p[w[1]]);
            if (w[0], w[1]) == ("C", "F") {
                (x - y).abs()
            } else {
                (y - x + 1.0).max(0.0)
            }
        })
        .sum()
}

/// Five ballots whose weighted tally orders the alternatives as the target.
fn engineered_ballots() -> Vec<Vec<String>> {
    let mut r = rng(3);
    let mut rankings: Vec<Vec<String>> = (0..5)
        .map(|_| {
            let mut v: Vec<String> = TARGET.iter().map(|s| s.to_string()).collect();
            v.shuffle(&mut r);
            v
        })
        .collect();
    let mut best = target_distance(&rankings);
    while best > 0.0 {
        let v = r.gen_range(0..5);
        let (i, j) = (r.gen_range(0..10), r.gen_range(0..10));
        rankings[v].swap(i, j);
        let d = target_distance(&rankings);
        if d <= best {
            best = d;
        } else {
            rankings[v].swap(i, j);
        }
    }
    rankings
}

/// Runs the scripted session; `restart` is called at each checkpoint and
/// may replace the store.
fn scripted_session(dir: &std::path::Path, restart: &mut dyn FnMut(SessionStore, &std::path::Path) -> SessionStore) -> (String, GroupRanking) {
    let alternatives: Vec<SessionAlternative> = reference_front()
        .into_iter()
        .map(|(id, objectives)| SessionAlternative { id, objectives, plan: None })
        .collect();
    let rankings = engineered_ballots();
    let mut store = SessionStore::open(dir).unwrap();
    let id = store.create_session("facilitator").unwrap().id;
    store.add_alternatives(&id, alternatives).unwrap();
    store = restart(store, dir);
    let tokens: Vec<String> =
        WEIGHTS.iter().enumerate().map(|(i, &w)| store.register_voter(&id, &format!("u{i}"), w).unwrap()).collect();
    store.open_voting(&id).unwrap();
    store = restart(store, dir);
    for (i, (t, ranking)) in tokens.iter().zip(&rankings).enumerate() {
        store.submit_ballot(&id, t, ranking.clone()).unwrap();
        if i == 2 {
            store = restart(store, dir);
        }
    }
    store.close_and_rank(&id, false).unwrap();
    store = restart(store, dir);
    (store.export_json(&id).unwrap(), store.result(&id).unwrap())
}

#[test]
fn service_survives_restarts() {
    let started = Instant::now();
    let outcome = (|| {
        let plain = tempfile::tempdir().unwrap();
        let (uninterrupted, result) = scripted_session(plain.path(), &mut |s, _| s);
        let crashed = tempfile::tempdir().unwrap();
        let mut restarts = 0;
        let (restarted, _) = scripted_session(crashed.path(), &mut |s, dir| {
            drop(s);
            restarts += 1;
            // Simulate a write cut short by the crash.
            let log = dir.join(cropplan_core::service::EVENT_LOG_FILE);
            let mut f = std::fs::OpenOptions::new().append(true).open(log).unwrap();
            f.write_all(br#"{"event":"voting_opened","sess"#).unwrap();
            SessionStore::open(dir).unwrap()
        });
        ensure(uninterrupted == restarted, || "exports differ after restarts".into())?;
        let order: Vec<&str> = result.order();
        ensure(order == TARGET, || format!("result order {order:?}"))?;
        ensure(result.rank_of("C") == Some(7) && result.rank_of("F") == Some(7), || "C and F not tied at 7".into())?;
        Ok(format!("{restarts} restarts with torn writes, {} byte export identical", uninterrupted.len()))
    })();
    report("service durability", started, outcome);
}
