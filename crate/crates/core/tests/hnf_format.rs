mod common;

use common::{random_hybrid, rng};
use hybrid_sat::output::{emit_result, parse_solver_output};
use hybrid_sat::{parse_hnf, serialize_hnf, solve, SolveConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(seed in any::<u64>(), n in 1usize..30, m in 0usize..40) {
        let f = random_hybrid(n, m, 8, &mut rng(seed));
        let text = serialize_hnf(&f);
        prop_assert_eq!(parse_hnf(&text).unwrap(), f);
    }

    #[test]
    fn spacing_and_comments_do_not_matter(seed in any::<u64>(), pad in "[ \t]{1,3}") {
        let f = random_hybrid(6, 5, 4, &mut rng(seed));
        let spaced: String = serialize_hnf(&f)
            .lines()
            .map(|l| format!("{pad}{}{pad}\nc note\n\n", l.replace(' ', &pad)))
            .collect();
        prop_assert_eq!(parse_hnf(&spaced).unwrap(), f);
    }
}

#[test]
fn printed_solutions_verify_after_reparsing() {
    let mut r = rng(30);
    for _ in 0..30 {
        let f = random_hybrid(10, 12, 4, &mut r);
        let f = parse_hnf(&serialize_hnf(&f)).unwrap();
        let res = solve(&f, &SolveConfig::default()).unwrap();
        let (text, code) = emit_result(&res);
        let out = parse_solver_output(&text).unwrap();
        assert_eq!(out.status, res.status);
        if res.is_sat() {
            assert_eq!(code, 10);
            let b = out.assignment(f.num_vars()).unwrap();
            assert_eq!(f.count_violations(&b).unwrap(), 0);
        } else {
            assert_eq!((code, out.violated), (0, Some(res.violated)));
        }
    }
}

#[test]
fn rejected_documents() {
    let bad = [
        ("p hnf 2\n1 0\n", 1),
        ("p hnf 2 1\n1 -3 0\n", 2),
        ("p hnf 3 1\nx 1 2 -1 0\n", 2),
        ("p hnf 3 1\nn 1 2 3\n", 2),
        ("p hnf 3 1\nd >= 4 1 2 3 0\n", 2),
        ("p hnf 3 1\nd 1 2 3 0\n", 2),
        ("p hnf 3 2\n1 2 3 0\n", 1),
        ("p hnf 3 1\nn 1 0\n", 2),
        ("p hnf 3 1\n1 a 0\n", 2),
        ("p hnf 1 1\n1 0\np hnf 1 1\n", 3),
    ];
    for (text, line) in bad {
        let e = parse_hnf(text).unwrap_err();
        assert_eq!(e.line, line, "{text:?}: {e}");
    }
}
