//! Reads the emitted LP text back with an independent parser and solves it by
//! enumerating every binary assignment.

use std::collections::BTreeMap;

use rrv_core::exact::{emit_milp, exact_optimum, OracleLimits};
use rrv_core::failures::FailureScenario;
use rrv_core::instance::parse_instance;
use rrv_core::network::Network;
use rrv_core::TimeUnits;

#[derive(Debug)]
struct Row {
    terms: Vec<(i64, String)>,
    sense: String,
    rhs: i64,
}

struct Lp {
    rows: Vec<Row>,
    binaries: Vec<String>,
}

fn millis(s: &str) -> i64 {
    s.parse::<TimeUnits>().unwrap().millis()
}

fn parse_lp(text: &str) -> Lp {
    let mut section = "";
    let mut joined: Vec<String> = Vec::new();
    let mut binaries = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        match t {
            "Minimize" | "Subject To" | "Bounds" | "Binary" | "End" => {
                section = match t {
                    "Subject To" => "st",
                    "Binary" => "bin",
                    _ => "",
                };
                continue;
            }
            _ => {}
        }
        match section {
            "st" if line.starts_with("   ") => joined.last_mut().unwrap().push_str(&format!(" {t}")),
            "st" => joined.push(t.to_string()),
            "bin" => binaries.extend(t.split_whitespace().map(String::from)),
            _ => {}
        }
    }
    let rows = joined
        .iter()
        .map(|r| {
            let (_, body) = r.split_once(':').unwrap();
            let tok: Vec<&str> = body.split_whitespace().collect();
            let mut terms = Vec::new();
            let mut i = 0;
            loop {
                if matches!(tok[i], "<=" | ">=" | "=") {
                    return Row { terms, sense: tok[i].into(), rhs: millis(tok[i + 1]) };
                }
                let sign = if tok[i] == "-" { -1 } else { 1 };
                let (coef, var) = match tok[i + 1].parse::<TimeUnits>() {
                    Ok(c) => {
                        i += 3;
                        (c.millis(), tok[i - 1])
                    }
                    Err(_) => {
                        i += 2;
                        (1000, tok[i - 1])
                    }
                };
                terms.push((sign * coef, var.to_string()));
            }
        })
        .collect();
    Lp { rows, binaries }
}

/// Minimum feasible `beta` in millis over all binary assignments.
fn brute_force(lp: &Lp) -> Option<i64> {
    let n = lp.binaries.len();
    assert!(n <= 20, "{n} binaries is too many to enumerate");
    let index: BTreeMap<&str, usize> = lp.binaries.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut best: Option<i64> = None;
    for mask in 0u32..(1 << n) {
        let (mut lo, mut hi) = (0i64, i64::MAX);
        let mut ok = true;
        for row in &lp.rows {
            let mut beta = 0;
            let mut rest = 0;
            for (c, v) in &row.terms {
                if v == "beta" {
                    beta += c / 1000;
                } else if mask >> index[v.as_str()] & 1 == 1 {
                    // binary coefficients are in millis; the row is scaled by 1000
                    rest += c;
                }
            }
            // rest/1000 + beta * b (sense) rhs/1000, everything in millis
            let slack = row.rhs - rest;
            match (beta, row.sense.as_str()) {
                (0, "<=") => ok &= rest <= row.rhs,
                (0, ">=") => ok &= rest >= row.rhs,
                (0, _) => ok &= rest == row.rhs,
                (-1, "<=") => lo = lo.max(-slack),
                (1, "<=") => hi = hi.min(slack),
                (b, s) => panic!("unexpected beta coefficient {b} with {s}"),
            }
            if !ok {
                break;
            }
        }
        if ok && lo <= hi {
            best = Some(best.map_or(lo, |b| b.min(lo)));
        }
    }
    best
}

fn solve(inst_text: &str, scenario: Option<&FailureScenario>) -> (Option<i64>, i64) {
    let inst = parse_instance(inst_text).unwrap();
    let lp = parse_lp(&emit_milp(&inst, scenario).unwrap().text);
    let net = Network::new(inst);
    let oracle = exact_optimum(&net, scenario, &OracleLimits::default()).unwrap();
    (brute_force(&lp), oracle.beta.millis())
}

#[test]
fn single_edge_out_and_back() {
    let text = "NODES 2\nDEPOTS 1\nEDGES 1\n1 2 3\nREQUIRED 1\n1 2\nVEHICLES 1\nCAPACITY 10\nRECHARGE 4\n";
    let inst = parse_instance(text).unwrap();
    assert_eq!(inst.max_trips, 2);
    let (lp, oracle) = solve(text, None);
    assert_eq!(lp, Some(6000));
    assert_eq!(oracle, 6000);
}

#[test]
fn recharge_counts_between_trips() {
    // C = 5 forces two separate out-and-back trips: 4 + 2 + 4
    let text = "NODES 3\nDEPOTS 1\nEDGES 2\n1 2 2\n1 3 2\nREQUIRED 2\n1 2\n1 3\nVEHICLES 1\n\
                CAPACITY 5\nRECHARGE 2\nMAXTRIPS 2\n";
    let (lp, oracle) = solve(text, None);
    assert_eq!(lp, Some(10_000));
    assert_eq!(oracle, 10_000);
}

#[test]
fn two_vehicles_with_and_without_failure() {
    let text = "NODES 3\nDEPOTS 1 3\nEDGES 2\n1 2 2\n2 3 2.5\nREQUIRED 2\n1 2\n2 3\nVEHICLES 2\n\
                START 1 3\nCAPACITY 9\nRECHARGE 3\nMAXTRIPS 1\n";
    let (lp, oracle) = solve(text, None);
    assert_eq!(lp, Some(oracle));
    assert_eq!(oracle, 4500);

    let failed = FailureScenario::new("f").with_failure(1, TimeUnits::from_units(2));
    let (lp, oracle) = solve(text, Some(&failed));
    assert_eq!(lp, Some(oracle));
    assert_eq!(oracle, 4500);
}

#[test]
fn depot_free_loops_are_cut() {
    // the 2-3-4 triangle is cheap but unreachable from the depot within C;
    // without subtour rows a detached cycle would "cover" the required edge
    let text = "NODES 4\nDEPOTS 1\nEDGES 4\n1 2 4\n2 3 1\n3 4 1\n2 4 1\nREQUIRED 1\n3 4\nVEHICLES 1\n\
                CAPACITY 20\nRECHARGE 1\nMAXTRIPS 1\n";
    let (lp, oracle) = solve(text, None);
    assert_eq!(lp, Some(oracle));
    assert_eq!(oracle, 11_000);
}
