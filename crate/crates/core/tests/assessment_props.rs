use numeracy_core::assessment::stats::{below_cutoff_pct, cronbach_alpha, pearson_r, two_sample_t};
use numeracy_core::assessment::*;
use numeracy_core::transcoder::{render_verbal, AnalogRepr};
use proptest::prelude::*;

const GRADES: [Grade; 3] = [Grade::Grade1, Grade::Grade2Mid, Grade::Grade2End];

// ---------------------------------------------------------------------------
// Battery
// ---------------------------------------------------------------------------

/// Expected answer worked out from the stimulus without `Stimulus::solve`.
fn evaluate(stimulus: &Stimulus) -> Answer {
    match stimulus {
        Stimulus::Dictation { spoken } => {
            Answer::Number((0..=1000).find(|n| render_verbal(*n).unwrap() == *spoken).expect("a number word"))
        }
        Stimulus::DotFlash { dots } | Stimulus::DotCount { dots } => Answer::Number(*dots),
        Stimulus::DotCollections { left, right } | Stimulus::NumeralPair { left, right } => {
            Answer::Side(if left > right { Side::Left } else { Side::Right })
        }
        Stimulus::AnalogSymbolic { analog, symbol } => {
            Answer::Same(format!("{}{}{}", analog.hundreds, analog.tens, analog.units).parse::<u32>().unwrap() == *symbol)
        }
        Stimulus::NumberLine { target, .. } => Answer::Number(*target),
        Stimulus::CountBack { start, ticks } => {
            let mut out = Vec::new();
            let mut n = *start;
            for _ in 0..*ticks {
                n -= 1;
                out.push(n);
            }
            Answer::Sequence(out)
        }
        Stimulus::Operation { operator, left, right } => Answer::Number(match operator {
            Operator::Plus => (0..*right).fold(*left, |acc, _| acc + 1),
            Operator::Minus => (0..*right).fold(*left, |acc, _| acc - 1),
            Operator::Times => (0..*right).map(|_| *left).sum(),
        }),
        Stimulus::Decompose { number } => Answer::Places(AnalogRepr {
            hundreds: number / 100,
            tens: number / 10 % 10,
            units: number % 10,
        }),
        Stimulus::Ordering { numbers, direction } => {
            // selection sort
            let mut rest = numbers.clone();
            let mut out = Vec::new();
            while !rest.is_empty() {
                let pick = match direction {
                    Direction::Ascending => *rest.iter().min().unwrap(),
                    Direction::Descending => *rest.iter().max().unwrap(),
                };
                rest.retain(|&x| x != pick);
                out.push(pick);
            }
            Answer::Sequence(out)
        }
    }
}

fn within(v: u32, lo: u32, hi: u32) -> bool {
    (lo..=hi).contains(&v)
}

fn check_ranges(set: &ItemSet) {
    let g1 = set.grade == Grade::Grade1;
    for sub in &set.subtests {
        for item in &sub.items {
            let ok = match (&sub.kind, &item.stimulus) {
                (SubtestKind::NumberWriting, Stimulus::Dictation { .. }) => {
                    let Answer::Number(n) = item.correct_answer else { unreachable!() };
                    if g1 { within(n, 1, 999) } else { within(n, 100, 1000) }
                }
                (SubtestKind::Subitizing, Stimulus::DotFlash { dots }) => {
                    if g1 { within(*dots, 2, 7) } else { within(*dots, 4, 7) }
                }
                (SubtestKind::Estimation, Stimulus::DotCollections { left, right }) => {
                    left != right && [left, right].iter().all(|v| if g1 { within(**v, 5, 20) } else { within(**v, 10, 40) })
                }
                (SubtestKind::Enumeration, Stimulus::DotCount { dots }) => within(*dots, 5, 20),
                (SubtestKind::MagnitudeJudgment, Stimulus::NumeralPair { left, right }) => {
                    left != right && [left, right].iter().all(|v| if g1 { **v <= 20 } else { within(**v, 20, 100) })
                }
                (SubtestKind::QuantityJudgment, Stimulus::AnalogSymbolic { analog, symbol }) => {
                    let shown = 10 * analog.tens + analog.units;
                    analog.hundreds == 0
                        && within(shown, 11, 89)
                        && [0, 1, 10].contains(&shown.abs_diff(*symbol))
                }
                (SubtestKind::NumberLineInsertion, Stimulus::NumberLine { start, end, tick_every, target }) => {
                    *start == 0 && *end == 20 && *tick_every == 1 && within(*target, 1, 19)
                }
                (SubtestKind::BackwardCounting, Stimulus::CountBack { start, ticks }) => {
                    *ticks == 5 && if g1 { within(*start, 6, 20) } else { within(*start, 20, 100) }
                }
                (SubtestKind::Addition, Stimulus::Operation { operator: Operator::Plus, left, right }) => {
                    if g1 { within(*left, 1, 19) && within(*right, 1, 9) } else { within(*left, 10, 79) && within(*right, 10, 19) }
                }
                (SubtestKind::Subtraction, Stimulus::Operation { operator: Operator::Minus, left, right }) => {
                    right < left && *right >= 1 && if g1 { *left <= 10 } else { within(*left, 20, 100) }
                }
                (SubtestKind::Decomposition, Stimulus::Decompose { number }) => within(*number, 100, 999),
                (SubtestKind::AscendingOrdering, Stimulus::Ordering { numbers, direction: Direction::Ascending })
                | (SubtestKind::DescendingOrdering, Stimulus::Ordering { numbers, direction: Direction::Descending }) => {
                    numbers.len() == 5
                        && numbers.iter().all(|n| within(*n, 10, 999))
                        && item.correct_answer != Answer::Sequence(numbers.clone())
                }
                (SubtestKind::Multiplication, Stimulus::Operation { operator: Operator::Times, left, right }) => {
                    within(*left, 2, 10) && within(*right, 2, 10)
                }
                _ => false,
            };
            assert!(ok, "{} {:?}", sub.kind, item.stimulus);
        }
    }
}

#[test]
fn composition_per_grade() {
    let g1 = generate_battery(Grade::Grade1, 1, BatteryConfig::default()).unwrap();
    let kinds: Vec<_> = g1.subtests.iter().map(|s| s.kind).collect();
    assert_eq!(kinds.len(), 10);
    assert!(!kinds.contains(&SubtestKind::Decomposition));
    let mid = generate_battery(Grade::Grade2Mid, 1, BatteryConfig::default()).unwrap();
    let end = generate_battery(Grade::Grade2End, 1, BatteryConfig::default()).unwrap();
    assert_eq!(mid.subtests.len(), 10);
    assert_eq!(end.subtests.len(), 11);
    assert_eq!(end.subtests.last().unwrap().kind, SubtestKind::Multiplication);
    assert_eq!(&end.subtests[..10], &mid.subtests[..]);
    for set in [&g1, &mid, &end] {
        assert_eq!(set.total_items(), set.subtests.len() * DEFAULT_ITEMS_PER_SUBTEST);
    }
}

#[test]
fn config_bounds() {
    for n in [0, 1, 2, 51] {
        let err = generate_battery(Grade::Grade1, 0, BatteryConfig { items_per_subtest: n }).unwrap_err();
        assert!(matches!(err, AssessmentError::InvalidConfig(_)));
    }
    for n in [3, 50] {
        assert!(generate_battery(Grade::Grade1, 0, BatteryConfig { items_per_subtest: n }).is_ok());
    }
}

#[test]
fn addition_has_exactly_three_carries() {
    for grade in GRADES {
        for seed in 0..200 {
            let set = generate_battery(grade, seed, BatteryConfig::default()).unwrap();
            let carries = set
                .subtest(SubtestKind::Addition)
                .unwrap()
                .items
                .iter()
                .filter(|i| matches!(i.stimulus, Stimulus::Operation { left, right, .. } if left % 10 + right % 10 >= 10))
                .count();
            assert_eq!(carries, CARRY_ADDITIONS);
        }
    }
}

#[test]
fn item_sets_roundtrip_through_json() {
    let set = generate_battery(Grade::Grade2End, 9, BatteryConfig::default()).unwrap();
    let json = serde_json::to_string(&set).unwrap();
    assert_eq!(serde_json::from_str::<ItemSet>(&json).unwrap(), set);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_items_are_in_range_and_correct(seed in any::<u64>(), g in 0usize..3, n in 3usize..=12) {
        let set = generate_battery(GRADES[g], seed, BatteryConfig { items_per_subtest: n }).unwrap();
        check_ranges(&set);
        for sub in &set.subtests {
            prop_assert_eq!(sub.items.len(), n);
            for item in &sub.items {
                prop_assert_eq!(&item.correct_answer, &evaluate(&item.stimulus));
                let text = item.correct_answer.to_text();
                prop_assert_eq!(item.correct_answer.parse_like(&text), Some(item.correct_answer.clone()));
            }
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), g in 0usize..3) {
        let a = generate_battery(GRADES[g], seed, BatteryConfig::default()).unwrap();
        let b = generate_battery(GRADES[g], seed, BatteryConfig::default()).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

// ---------------------------------------------------------------------------
// Scoring and flagging
// ---------------------------------------------------------------------------

fn item(stimulus: Stimulus) -> Item {
    Item {
        correct_answer: stimulus.solve(),
        stimulus,
    }
}

fn op(operator: Operator, left: u32, right: u32) -> Stimulus {
    Stimulus::Operation { operator, left, right }
}

fn hand_set() -> ItemSet {
    ItemSet {
        version: 1,
        grade: Grade::Grade1,
        seed: 0,
        subtests: vec![
            Subtest {
                kind: SubtestKind::Addition,
                items: vec![item(op(Operator::Plus, 7, 5)), item(op(Operator::Plus, 3, 4)), item(op(Operator::Plus, 9, 9))],
            },
            Subtest {
                kind: SubtestKind::MagnitudeJudgment,
                items: vec![
                    item(Stimulus::NumeralPair { left: 12, right: 19 }),
                    item(Stimulus::NumeralPair { left: 8, right: 3 }),
                ],
            },
            Subtest {
                kind: SubtestKind::BackwardCounting,
                items: vec![item(Stimulus::CountBack { start: 13, ticks: 5 })],
            },
            Subtest {
                kind: SubtestKind::Decomposition,
                items: vec![item(Stimulus::Decompose { number: 305 }), item(Stimulus::Decompose { number: 470 })],
            },
            Subtest {
                kind: SubtestKind::QuantityJudgment,
                items: vec![
                    item(Stimulus::AnalogSymbolic {
                        analog: AnalogRepr { hundreds: 0, tens: 4, units: 2 },
                        symbol: 42,
                    }),
                    item(Stimulus::AnalogSymbolic {
                        analog: AnalogRepr { hundreds: 0, tens: 4, units: 2 },
                        symbol: 24,
                    }),
                ],
            },
        ],
    }
}

fn resp(subtest: &str, item_index: usize, answer: &str) -> Response {
    Response {
        student_id: "s1".into(),
        subtest: subtest.into(),
        item_index,
        answer: Some(answer.into()),
    }
}

#[test]
fn ten_answers_scored_by_hand() {
    let responses = vec![
        resp("addition", 0, "12"),                // correct
        resp("addition", 1, "8"),                 // wrong
        resp("addition", 2, " "),                 // omitted
        resp("magnitude_judgment", 0, "right"),   // correct
        resp("magnitude_judgment", 1, "right"),   // wrong
        resp("backward_counting", 0, "12 11 10 9 8"), // correct
        resp("decomposition", 0, "3,0,5"),        // correct
        resp("decomposition", 1, "4 7"),          // wrong shape
        resp("quantity_judgment", 0, "sì"),       // correct
        resp("quantity_judgment", 1, "yes"),      // wrong
    ];
    let p = score_responses(&hand_set(), "s1", &responses, LowThreshold::default()).unwrap();
    let correct: Vec<u32> = p.subtests.iter().map(|s| s.correct).collect();
    assert_eq!(correct, [1, 1, 1, 1, 1]);
    assert_eq!(p.total_correct(), 5);
    assert_eq!(p.total_omitted(), 1);
    assert_eq!(p.total_max(), 10);
    // low means strictly below half: 1/3 is low, 1/2 is not
    assert_eq!(p.low, vec![SubtestKind::Addition]);
    assert!(!p.at_risk);
}

#[test]
fn duplicate_and_unknown_responses_are_errors() {
    let set = hand_set();
    let dup = vec![resp("addition", 0, "12"), resp("addition", 0, "11")];
    assert!(matches!(
        score_responses(&set, "s1", &dup, LowThreshold::default()),
        Err(AssessmentError::DuplicateResponse { .. })
    ));
    for bad in [resp("addition", 3, "1"), resp("multiplication", 0, "1"), resp("nonsense", 0, "1")] {
        assert!(matches!(
            score_responses(&set, "s1", &[bad], LowThreshold::default()),
            Err(AssessmentError::UnknownItem { .. })
        ));
    }
}

#[test]
fn responses_csv() {
    let csv = "student_id,subtest,item_index,answer\ns1,addition,0,12\ns1,addition,1,\ns2,addition,0,\"3, 4\"\n";
    let rows = read_responses(csv.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1].answer, None);
    assert_eq!(rows[2].answer.as_deref(), Some("3, 4"));
    assert!(matches!(
        read_responses("student_id,subtest,item_index,answer\ns1,addition,x,1\n".as_bytes()),
        Err(AssessmentError::MalformedResponses { .. })
    ));
}

fn profile_with(correct: &[u32], max: u32) -> Profile {
    let subtests = correct
        .iter()
        .zip(SubtestKind::ALL)
        .map(|(&c, kind)| SubtestScore {
            kind,
            max,
            correct: c,
            omitted: 0,
            outcomes: (0..max).map(|i| if i < c { Outcome::Correct } else { Outcome::Incorrect }).collect(),
        })
        .collect();
    let mut p = Profile {
        student_id: "x".into(),
        subtests,
        external_score: None,
        low_threshold: LowThreshold::default(),
        low: vec![],
        at_risk: false,
    };
    p.reflag(LowThreshold::default());
    p
}

#[test]
fn at_risk_boundary_is_four_low_subtests() {
    let four = profile_with(&[3, 3, 3, 3, 8, 8, 8, 8, 8, 8], 8);
    let three = profile_with(&[3, 3, 3, 4, 8, 8, 8, 8, 8, 8], 8);
    assert!(four.at_risk && flag_at_risk(&four, LowThreshold::default()));
    assert!(!three.at_risk && !flag_at_risk(&three, LowThreshold::default()));
    assert_eq!(three.low.len(), 3);
}

#[test]
fn threshold_validation() {
    for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
        assert!(LowThreshold::new(bad).is_err());
    }
    assert!(serde_json::from_str::<LowThreshold>("1.0").is_err());
    assert_eq!(serde_json::from_str::<LowThreshold>("0.25").unwrap().fraction(), 0.25);
}

proptest! {
    #[test]
    fn flagging_is_monotone(
        correct in prop::collection::vec(0u32..=8, 10),
        bump in 0usize..10,
        t1 in 0.05f64..0.95,
        dt in 0.0f64..0.5,
    ) {
        let p = profile_with(&correct, 8);
        let lo = LowThreshold::new(t1).unwrap();
        let hi = LowThreshold::new((t1 + dt).min(0.99)).unwrap();
        // a stricter threshold never clears a flag
        prop_assert!(!flag_at_risk(&p, lo) || flag_at_risk(&p, hi));
        // one more correct answer never raises a flag
        let mut better = correct.clone();
        better[bump] = (better[bump] + 1).min(8);
        let q = profile_with(&better, 8);
        prop_assert!(!flag_at_risk(&q, lo) || flag_at_risk(&p, lo));
        prop_assert_eq!(p.at_risk, p.low.len() >= 4);
    }

    #[test]
    fn omitted_plus_answered_is_total(seed in any::<u64>(), keep in prop::collection::vec(any::<u8>(), 80)) {
        let set = generate_battery(Grade::Grade1, seed, BatteryConfig::default()).unwrap();
        let mut responses = Vec::new();
        let mut k = 0;
        for sub in &set.subtests {
            for (i, item) in sub.items.iter().enumerate() {
                let choice = keep[k % keep.len()] % 3;
                k += 1;
                let answer = match choice {
                    0 => continue,
                    1 => Some(item.correct_answer.to_text()),
                    _ => Some("999999".into()),
                };
                responses.push(Response { student_id: "s".into(), subtest: sub.kind.name().into(), item_index: i, answer });
            }
        }
        let p = score_responses(&set, "s", &responses, LowThreshold::default()).unwrap();
        for s in &p.subtests {
            prop_assert_eq!(s.omitted + s.answered(), s.max);
            prop_assert_eq!(s.outcomes.len() as u32, s.max);
        }
        prop_assert_eq!(p.total_omitted() as usize + responses.len(), set.total_items());
    }
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

#[test]
fn hand_computed_fixtures() {
    let t = two_sample_t(&[3.0, 5.0, 4.0, 6.0, 7.0], &[2.0, 4.0, 3.0, 3.0, 5.0]).unwrap();
    assert!((t.t - 8.0 / 19f64.sqrt()).abs() < 1e-9);
    assert_eq!(t.df, 8);
    assert!(!t.significant);

    let r = pearson_r(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 5.0, 4.0, 5.0]).unwrap();
    assert!((r.r - 0.6f64.sqrt()).abs() < 1e-9);
    assert!(!r.significant);

    let m = |rows: &[[f64; 3]]| rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    let alpha = cronbach_alpha(&m(&[[1., 1., 0.], [1., 1., 1.], [0., 1., 0.], [1., 0., 0.], [1., 1., 1.]])).unwrap();
    assert!((alpha - 0.45).abs() < 1e-9);
}

#[test]
fn degenerate_statistics() {
    assert!(two_sample_t(&[1.0], &[1.0, 2.0]).is_err());
    assert!(two_sample_t(&[2.0, 2.0], &[2.0, 2.0]).is_err());
    assert!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    assert!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    assert!(cronbach_alpha(&[vec![1.0, 1.0], vec![1.0, 1.0]]).is_err());
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..=20, 3..30).prop_map(|v| v.into_iter().map(f64::from).collect())
}

proptest! {
    #[test]
    fn swapping_groups_negates_t(a in sample(), b in sample()) {
        if let (Ok(ab), Ok(ba)) = (two_sample_t(&a, &b), two_sample_t(&b, &a)) {
            prop_assert!((ab.t + ba.t).abs() < 1e-9);
            prop_assert_eq!(ab.significant, ba.significant);
        }
    }

    #[test]
    fn identical_groups_give_zero_t(a in sample()) {
        if let Ok(t) = two_sample_t(&a, &a) {
            prop_assert!(t.t.abs() < 1e-12);
            prop_assert!(!t.significant);
        }
    }

    #[test]
    fn alpha_ignores_item_order(
        rows in prop::collection::vec(prop::collection::vec(0u8..=1, 6), 4..20),
        perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let m: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let shuffled: Vec<Vec<f64>> = m.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        match (cronbach_alpha(&m), cronbach_alpha(&shuffled)) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-9),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn duplicated_items_have_alpha_one(col in prop::collection::vec(0u8..=5, 3..20), k in 2usize..6) {
        let m: Vec<Vec<f64>> = col.iter().map(|&x| vec![x as f64; k]).collect();
        if let Ok(alpha) = cronbach_alpha(&m) {
            prop_assert!((alpha - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn correlation_survives_positive_rescaling(
        pairs in prop::collection::vec((0u32..=50, 0u32..=50), 3..40),
        scale in 0.1f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let y2: Vec<f64> = y.iter().map(|v| scale * v + shift).collect();
        if let (Ok(a), Ok(b)) = (pearson_r(&x, &y), pearson_r(&x, &y2)) {
            prop_assert!((a.r - b.r).abs() < 1e-9);
            // skip pairs that sit on the critical line
            let df = (x.len() - 2) as f64;
            let t = a.r * df.sqrt() / (1.0 - a.r * a.r).sqrt();
            if (t.abs() - numeracy_core::assessment::stats::critical_t(df as u32).unwrap()).abs() > 1e-6 {
                prop_assert_eq!(a.significant, b.significant);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Cohort
// ---------------------------------------------------------------------------

/// Answers the first `k` items of the battery correctly, the rest wrong.
fn student(set: &ItemSet, id: &str, k: usize) -> Vec<Response> {
    let mut out = Vec::new();
    let mut seen = 0;
    for sub in &set.subtests {
        for (i, item) in sub.items.iter().enumerate() {
            let answer = if seen < k { item.correct_answer.to_text() } else { "999999".into() };
            seen += 1;
            out.push(Response {
                student_id: id.into(),
                subtest: sub.kind.name().into(),
                item_index: i,
                answer: Some(answer),
            });
        }
    }
    out
}

fn cohort(set: &ItemSet, prefix: &str, below: usize) -> ProfileSet {
    let line = set.total_items() / 2;
    let responses: Vec<Response> = (0..100)
        .flat_map(|i| {
            let k = if i < below { line / 2 + i % (line / 2) } else { line + i % (line / 2) };
            student(set, &format!("{prefix}{i:03}"), k)
        })
        .collect();
    score_all(set, &responses, LowThreshold::default()).unwrap()
}

#[test]
fn synthetic_cohort_below_cutoff() {
    let set = generate_battery(Grade::Grade1, 2024, BatteryConfig::default()).unwrap();
    let (a, b) = (cohort(&set, "a", 7), cohort(&set, "b", 13));
    let report = cohort_stats(&a, &b, 0.5).unwrap();
    assert_eq!(report.below_cutoff_pct_a, 7.0);
    assert_eq!(report.below_cutoff_pct_b, 13.0);
    assert_eq!((report.n_a, report.n_b), (100, 100));
    assert_eq!(report.subtests.len(), 10);
    assert!(report.total_t_test.is_some());
    assert!(report.correlation.is_none());

    let totals: Vec<u32> = a.profiles.iter().map(Profile::total_correct).collect();
    assert_eq!(below_cutoff_pct(&totals, 80, 0.5), 7.0);
    assert_eq!(below_cutoff_pct(&totals, 80, 0.0), 0.0);
}

#[test]
fn cohort_rejects_bad_input() {
    let g1 = generate_battery(Grade::Grade1, 1, BatteryConfig::default()).unwrap();
    let g2 = generate_battery(Grade::Grade2Mid, 1, BatteryConfig::default()).unwrap();
    let a = cohort(&g1, "a", 7);
    let b = cohort(&g2, "b", 7);
    assert!(matches!(cohort_stats(&a, &b, 0.5), Err(AssessmentError::IncompatibleGroups(_))));
    assert!(matches!(cohort_stats(&a, &a, 1.5), Err(AssessmentError::InvalidCutoff(_))));
    let mut one = a.clone();
    one.profiles.truncate(1);
    assert!(matches!(cohort_stats(&one, &a, 0.5), Err(AssessmentError::DegenerateInput(_))));
}

#[test]
fn external_scores_feed_the_correlation() {
    let set = generate_battery(Grade::Grade1, 5, BatteryConfig::default()).unwrap();
    let (mut a, mut b) = (cohort(&set, "a", 10), cohort(&set, "b", 20));
    let ext: std::collections::BTreeMap<String, f64> = a
        .profiles
        .iter()
        .chain(&b.profiles)
        .map(|p| (p.student_id.clone(), 2.0 * p.total_correct() as f64 + 1.0))
        .collect();
    a.attach_external(&ext);
    b.attach_external(&ext);
    let c = cohort_stats(&a, &b, 0.5).unwrap().correlation.unwrap();
    assert!((c.r - 1.0).abs() < 1e-9);
    assert_eq!(c.n, 200);
    assert!(c.significant);
}
