use heurgen::harness::{agile_score, select_best, AgileRule, EvalRecord};
use heurgen_core::search::SearchStatus;
use proptest::prelude::*;

const LIMIT: f64 = 300.0;

/// Cells are `None` for unsolved runs, else the wall time.
fn matrix() -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    (1usize..6, 1usize..7).prop_flat_map(|(c, t)| {
        prop::collection::vec(prop::collection::vec(prop::option::of(0.01f64..400.0), t..=t), c..=c)
    })
}

fn records(m: &[Vec<Option<f64>>], scale: f64) -> Vec<EvalRecord> {
    let mut out = Vec::new();
    for (c, row) in m.iter().enumerate() {
        for (t, cell) in row.iter().enumerate() {
            let wall = cell.map(|w| w * scale);
            let solved = wall.is_some_and(|w| w < LIMIT);
            out.push(EvalRecord {
                candidate: format!("c{c}"),
                task: format!("t{t}"),
                domain: "d".into(),
                status: if solved { SearchStatus::Solved } else { SearchStatus::TimeLimit },
                wall_time: wall.unwrap_or(LIMIT),
                search_time: wall.unwrap_or(LIMIT),
                expansions: 1,
                evaluations: 1,
                plan_length: solved.then_some(1),
                agile: if solved { agile_score(wall.unwrap(), LIMIT).unwrap() } else { 0.0 },
                note: None,
            });
        }
    }
    out
}

proptest! {
    #[test]
    fn agile_is_monotone_and_bounded(a in 0.0f64..500.0, b in 0.0f64..500.0, limit in 1.5f64..2000.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (agile_score(lo, limit).unwrap(), agile_score(hi, limit).unwrap());
        prop_assert!(y <= x);
        prop_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
    }

    #[test]
    fn agile_is_continuous_inside_the_interval(t in 1.0f64..299.0) {
        let eps = 1e-7;
        let d = (agile_score(t, LIMIT).unwrap() - agile_score(t + eps, LIMIT).unwrap()).abs();
        prop_assert!(d < 1e-6);
    }

    #[test]
    fn selection_ignores_record_order(m in matrix(), seed in any::<u64>()) {
        let recs = records(&m, 1.0);
        let mut shuffled = recs.clone();
        // deterministic Fisher-Yates from the seed
        let mut x = seed | 1;
        for i in (1..shuffled.len()).rev() {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            shuffled.swap(i, (x % (i as u64 + 1)) as usize);
        }
        for rule in [AgileRule::Maximize, AgileRule::Minimize] {
            prop_assert_eq!(select_best(&recs, rule).unwrap(), select_best(&shuffled, rule).unwrap());
        }
    }

    #[test]
    fn fast_runs_leave_selection_to_coverage(m in matrix(), scale in 0.01f64..1.0) {
        // squeeze every solved run below one second
        let fast: Vec<Vec<Option<f64>>> =
            m.iter().map(|row| row.iter().map(|c| c.map(|w| w / 400.0)).collect()).collect();
        let a = select_best(&records(&fast, 1.0), AgileRule::Maximize).unwrap();
        let b = select_best(&records(&fast, scale), AgileRule::Maximize).unwrap();
        prop_assert_eq!(&a.winner, &b.winner);
        let best = a.standings.iter().map(|s| s.coverage).max().unwrap();
        let first = a.standings.iter().find(|s| s.coverage == best).unwrap();
        prop_assert_eq!(&a.winner, &first.candidate);
    }

    #[test]
    fn winner_maximizes_coverage_and_agile_is_bounded(m in matrix()) {
        let tasks = m[0].len() as f64;
        let r = select_best(&records(&m, 1.0), AgileRule::Maximize).unwrap();
        let best = r.standings.iter().map(|s| s.coverage).max().unwrap();
        let w = r.standings.iter().find(|s| s.candidate == r.winner).unwrap();
        prop_assert_eq!(w.coverage, best);
        for s in &r.standings {
            prop_assert!(s.agile <= tasks);
        }
    }
}
