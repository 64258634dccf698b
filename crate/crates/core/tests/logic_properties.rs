use cfcheck_core::logic::{
    eval_path_formula, parse_formula, parse_path_formula, Bound, Comparison, Interval, LabelOracle,
    PathFormula, Query, StateFormula,
};
use cfcheck_core::mdp::Step;
use cfcheck_core::scm::Intervention;
use cfcheck_core::{ActionId, Mdp, Path, StateId};
use proptest::prelude::*;

const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

fn interval() -> impl Strategy<Value = Interval> {
    (0u32..4, 0u32..4).prop_map(|(a, w)| Interval::new(a, a + w).unwrap())
}

fn threshold() -> impl Strategy<Value = Bound> {
    prop_oneof![
        Just(Bound::Query),
        (
            prop_oneof![Just(Comparison::Lt), Just(Comparison::Le), Just(Comparison::Gt), Just(Comparison::Ge)],
            0u32..=1000
        )
            .prop_map(|(c, k)| Bound::Cmp(c, f64::from(k) / 1000.0)),
    ]
}

fn intervention() -> impl Strategy<Value = Intervention> {
    proptest::collection::vec(prop_oneof![Just("opt"), Just("rand"), Just("x_1")], 0..3)
        .prop_map(|v| Intervention::new(v.into_iter().map(String::from).collect()))
}

fn propositional() -> impl Strategy<Value = StateFormula> {
    let leaf = prop_oneof![
        Just(StateFormula::True),
        proptest::sample::select(ATOMS.to_vec()).prop_map(StateFormula::atom),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(StateFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| StateFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| StateFormula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| StateFormula::implies(a, b)),
        ]
    })
}

/// Path formulas built through the canonicalising constructors.
fn path_formula(leaf: BoxedStrategy<StateFormula>) -> impl Strategy<Value = PathFormula> {
    leaf.prop_map(PathFormula::state).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(PathFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PathFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PathFormula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PathFormula::implies(a, b)),
            (inner.clone(), interval(), inner.clone()).prop_map(|(a, iv, b)| PathFormula::until(a, iv, b)),
            (interval(), inner.clone()).prop_map(|(iv, a)| PathFormula::eventually(iv, a)),
            (interval(), inner.clone()).prop_map(|(iv, a)| PathFormula::globally(iv, a)),
            inner.prop_map(PathFormula::next),
        ]
    })
}

fn query() -> impl Strategy<Value = Query> {
    prop_oneof![
        (threshold(), path_formula(propositional().boxed()))
            .prop_map(|(bound, p)| Query::Prob { bound, path: Box::new(p) }),
        (threshold(), interval()).prop_map(|(bound, interval)| Query::Reward { bound, interval }),
    ]
}

fn state_formula() -> impl Strategy<Value = StateFormula> {
    let leaf = prop_oneof![
        3 => propositional(),
        2 => query().prop_map(StateFormula::Query),
        1 => (intervention(), -5i64..5, query())
            .prop_map(|(intervention, offset, query)| StateFormula::Cf { intervention, offset, query }),
        1 => (intervention(), intervention(), -5i64..5, query()).prop_map(|(treated, control, offset, query)| {
            StateFormula::Delta { treated, control, offset, query }
        }),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(StateFormula::not),
            (inner.clone(), inner).prop_map(|(a, b)| StateFormula::and(a, b)),
        ]
    })
}

fn labelled_path(bits: &[u8]) -> (Mdp, Path) {
    let n = bits.len();
    let mut mdp = Mdp::new((0..n).map(|i| format!("s{i}")).collect(), vec!["a".into()]).unwrap();
    for p in ATOMS {
        mdp.declare_proposition(p);
    }
    for (i, b) in bits.iter().enumerate() {
        for (k, p) in ATOMS.iter().enumerate() {
            if b & (1 << k) != 0 {
                mdp.add_label(StateId(i), p).unwrap();
            }
        }
    }
    let path = Path::new((0..n).map(|i| Step::new(StateId(i), ActionId(0))).collect()).unwrap();
    (mdp, path)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn print_then_parse_is_identity(f in state_formula()) {
        let text = f.to_string();
        let back = parse_formula(&text);
        prop_assert_eq!(back.as_ref(), Ok(&f), "{}", text);
    }

    #[test]
    fn path_print_then_parse_is_identity(f in path_formula(propositional().boxed())) {
        prop_assert_eq!(parse_path_formula(&f.to_string()), Ok(f));
    }

    #[test]
    fn globally_is_dual_to_eventually(
        body in path_formula(propositional().boxed()),
        iv in interval(),
        bits in proptest::collection::vec(0u8..16, 30),
    ) {
        let (mdp, path) = labelled_path(&bits);
        let g = PathFormula::globally(iv, body.clone());
        let dual = PathFormula::not(PathFormula::eventually(iv, PathFormula::not(body)));
        let mut o = LabelOracle { mdp: &mdp };
        if cfcheck_core::logic::path_horizon(&g) < path.len() {
            prop_assert_eq!(
                eval_path_formula(&mut o, &path, 1, &g).unwrap(),
                eval_path_formula(&mut o, &path, 1, &dual).unwrap()
            );
        }
    }

    #[test]
    fn desugaring_preserves_truth(
        f in path_formula(propositional().boxed()),
        bits in proptest::collection::vec(0u8..16, 40),
    ) {
        let (mdp, path) = labelled_path(&bits);
        let mut o = LabelOracle { mdp: &mdp };
        if cfcheck_core::logic::path_horizon(&f) < path.len() {
            prop_assert_eq!(
                eval_path_formula(&mut o, &path, 1, &f).unwrap(),
                eval_path_formula(&mut o, &path, 1, &f.desugar()).unwrap()
            );
        }
    }

    #[test]
    fn true_until_is_monotone(
        target in propositional(),
        iv in interval(),
        bits in proptest::collection::vec(0u8..16, 8),
    ) {
        let (mdp, path) = labelled_path(&bits);
        let at_a = cfcheck_core::logic::eval_labels(&mdp, &target, StateId(iv.lo() as usize)).unwrap();
        let u = PathFormula::until(PathFormula::state(StateFormula::True), iv, PathFormula::state(target));
        if at_a {
            let holds = eval_path_formula(&mut LabelOracle { mdp: &mdp }, &path, 1, &u).unwrap();
            prop_assert!(holds);
        }
    }

    #[test]
    fn parser_is_total_on_strings(s in any::<String>(), raw in proptest::collection::vec(any::<u8>(), 0..64)) {
        let _ = parse_formula(&s);
        let _ = parse_formula(&String::from_utf8_lossy(&raw));
    }

    #[test]
    fn parser_is_total_on_grammar_soup(
        parts in proptest::collection::vec(
            proptest::sample::select(vec![
                "P", "R", "C", "D", "U", "F", "G", "X", "true", "empty", "pi", "<-", "->", "<", "<=",
                ">", ">=", "=?", "[", "]", "(", ")", ",", ".", "@", "!", "&", "|", "\"a\"", "0", "1",
                "-1", "0.5", "opt",
            ]),
            0..40,
        )
    ) {
        let _ = parse_formula(&parts.join(" "));
    }
}

#[test]
fn parse_errors_report_offsets_within_input() {
    for bad in ["P>=", "[pi<-]@0.P=? [true]", "D[pi<-a]@0.P=? [true]", "R>=1 [ C[0,2 ]", "!!!"] {
        let e = parse_formula(bad).unwrap_err();
        assert!(e.offset <= bad.len(), "{bad}: {e}");
    }
}
