use gameqd::env::{evaluate_duel, EnvParams};
use gameqd::measures::{
    aqd_score, aqd_score_brute_force, coverage, coverage_clusters, elo_from_matches, elo_scores,
    expertise, percentiles, robustness, round_robin, win_rate, Aqd, EloParams, FitnessMatrix,
    Label, Match, MeasureTable, MEASURE_NAMES,
};
use gameqd::model::{derive_seed, rng_from_seed, EnvId, Genome, Side};
use proptest::prelude::*;
use rand::Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

// rows are red solutions
fn fixture() -> Vec<Vec<f64>> {
    vec![
        vec![0.6, 0.4, 0.7, 0.5],
        vec![0.9, 0.2, 0.3, 0.8],
        vec![0.1, 0.55, 0.45, 0.6],
        vec![0.5, 0.5, 0.5, 0.5],
    ]
}

#[test]
fn four_by_four_fixture() {
    let m = fixture();
    // wins (> 0.5) per row: 2, 2, 2, 0 of 4
    assert_eq!(win_rate(&m, &[0, 1]), 50.0);
    assert_eq!(win_rate(&m, &[3]), 0.0);
    assert_eq!(win_rate(&m, &[2, 3]), 50.0);
    // row minima: 0.4, 0.2, 0.1, 0.5
    assert_eq!(robustness(&m, &[0, 1]), 0.4);
    assert_eq!(robustness(&m, &[1, 2]), 0.2);
    assert_eq!(robustness(&m, &[0, 1, 2, 3]), 0.5);
    // column maxima of {0,1}: 0.9, 0.4, 0.7, 0.8; with row 2: 0.9, 0.55, 0.7, 0.8
    assert_eq!(expertise(&m, &[0, 1]), 0.4);
    assert_eq!(expertise(&m, &[0, 1, 2]), 0.55);
    assert_eq!(expertise(&m, &[3]), 0.5);
    assert_eq!(expertise(&m, &[1]), robustness(&m, &[1]));
    // losses (< 0.5): r0 {c1}, r1 {c1, c2}, r2 {c0, c2}, r3 none
    assert_eq!(aqd_score(&m, &[0, 1, 2]), Aqd::Count(2));
    assert_eq!(aqd_score(&m, &[0, 1]), Aqd::Count(1));
    assert_eq!(aqd_score(&m, &[0, 3]), Aqd::Unbounded);

    // coverage with hand-assigned clusters
    let clusters = [0, 1, 1, 2];
    assert!(close(coverage(&clusters, &[0, 1, 2]), 200.0 / 3.0));
    assert_eq!(coverage(&clusters, &[1, 2]), 50.0);
    assert_eq!(coverage(&clusters, &[0, 3]), 100.0);
}

#[test]
fn coverage_clusters_follow_rankings() {
    // rows 0,1 rank the columns increasingly, rows 2,3 decreasingly
    let m = vec![
        vec![0.1, 0.2, 0.3, 0.4],
        vec![0.2, 0.3, 0.6, 0.9],
        vec![0.9, 0.5, 0.3, 0.1],
        vec![0.8, 0.7, 0.6, 0.5],
    ];
    for seed in 0..10 {
        let c = coverage_clusters(&m, 2, seed).unwrap();
        assert_eq!(c[0], c[1]);
        assert_eq!(c[2], c[3]);
        assert_ne!(c[0], c[2]);
        assert_eq!(coverage(&c, &[0, 1]), 50.0);
        assert_eq!(coverage(&c, &[0, 2]), 100.0);
    }
    assert!(coverage_clusters(&m, 5, 0).is_err());
}

#[test]
fn coverage_formula_examples() {
    assert_eq!(coverage(&[0, 1, 2, 0, 1], &[0, 1, 2, 3, 4]), 60.0);
    assert_eq!(coverage(&[3; 5], &[0, 1, 2, 3, 4]), 20.0);
    assert_eq!(coverage(&[0, 1, 2, 3, 4], &[0, 1, 2, 3, 4]), 100.0);
}

fn expected(ra: f64, rb: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((rb - ra) / 400.0))
}

#[test]
fn elo_three_player_trace() {
    // red A (0), red B (1), blue C (0)
    let ms = [
        Match {
            red: 0,
            blue: 0,
            red_fitness: 0.8,
        },
        Match {
            red: 1,
            blue: 0,
            red_fitness: 0.3,
        },
        Match {
            red: 0,
            blue: 0,
            red_fitness: 0.5,
        },
    ];
    let mut red = vec![1000.0, 1000.0];
    let mut blue = vec![1000.0];
    elo_from_matches(&mut red, &mut blue, &ms, 16.0);

    // step 1: equal ratings, win -> +8 / -8
    let (mut a, mut b, mut c) = (1008.0, 1000.0, 992.0);
    // step 2: B loses to C
    let d = 16.0 * (0.0 - expected(b, c));
    b += d;
    c -= d;
    // step 3: A draws C
    let d = 16.0 * (0.5 - expected(a, c));
    a += d;
    c -= d;
    assert!(close(red[0], a) && close(red[1], b) && close(blue[0], c));
    assert!((b - 991.8158).abs() < 1e-3, "{b}");
    // zero-sum
    assert!(close(red.iter().sum::<f64>() + blue[0], 3000.0));
}

#[test]
fn elo_percentiles_follow_dominance() {
    // red i beats blue j iff j >= i; blue j beats red i iff i > j, so red 0
    // and blue 0 dominate their sides
    let f = |r: usize, b: usize| if b >= r { 0.8 } else { 0.2 };
    let mut ms = Vec::new();
    for r in 0..3 {
        for b in 0..3 {
            ms.push(Match {
                red: r,
                blue: b,
                red_fitness: f(r, b),
            });
        }
    }
    for seed in 0..20 {
        let t = elo_scores(3, 3, &ms, &EloParams::default(), seed);
        assert_eq!(t.red_percentiles, vec![100.0, 50.0, 0.0], "seed {seed}");
        assert_eq!(t.blue_percentiles, vec![100.0, 50.0, 0.0], "seed {seed}");
    }
}

#[test]
fn elo_all_draws_stay_equal() {
    let ms: Vec<Match> = (0..4)
        .flat_map(|r| {
            (0..2).map(move |b| Match {
                red: r,
                blue: b,
                red_fitness: 0.5,
            })
        })
        .collect();
    let t = elo_scores(4, 2, &ms, &EloParams::default(), 9);
    assert!(t
        .red_ratings
        .iter()
        .chain(&t.blue_ratings)
        .all(|&r| r == 1000.0));
    assert_eq!(
        t.red_percentiles,
        vec![0.0, 100.0 / 3.0, 200.0 / 3.0, 100.0]
    );
    assert_eq!(percentiles(&[5.0]), vec![100.0]);
}

/// Every subset of columns, smallest first; the first that covers all rows.
fn brute_cover(m: &[Vec<f64>], set: &[usize]) -> Option<usize> {
    let cols = m[0].len();
    (0u32..1 << cols)
        .filter(|mask| {
            set.iter()
                .all(|&r| (0..cols).any(|c| mask >> c & 1 == 1 && m[r][c] < 0.5))
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

#[test]
fn aqd_matches_enumeration_on_random_matrices() {
    let mut rng = rng_from_seed(derive_seed(404, &[1]));
    let mut unbounded = 0;
    for case in 0..50 {
        let rows = rng.random_range(1..=8);
        let cols = rng.random_range(1..=12);
        let p_loss = rng.random_range(0.05..0.5);
        let m: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        if rng.random_bool(p_loss) {
                            rng.random_range(0.0..0.5)
                        } else {
                            rng.random_range(0.5..=1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let set: Vec<usize> = (0..rows).collect();
        let want = match brute_cover(&m, &set) {
            Some(n) => Aqd::Count(n),
            None => Aqd::Unbounded,
        };
        assert_eq!(aqd_score(&m, &set), want, "case {case}");
        assert_eq!(aqd_score_brute_force(&m, &set), want, "case {case}");
        let never_loses = m.iter().any(|r| r.iter().all(|&x| x >= 0.5));
        assert_eq!(want == Aqd::Unbounded, never_loses, "case {case}");
        unbounded += never_loses as usize;
    }
    assert!(unbounded > 0 && unbounded < 50, "{unbounded}");
}

#[test]
fn aqd_spec_example() {
    // r1 loses only to c2, r2 to c1 and c3
    let m = vec![vec![0.7, 0.2, 0.9], vec![0.1, 0.8, 0.3]];
    assert_eq!(aqd_score(&m, &[0, 1]), Aqd::Count(2));
    assert_eq!(aqd_score(&[vec![0.5, 0.6]], &[0]), Aqd::Unbounded);
}

fn labels(variant: &str, reps: usize, per: usize) -> Vec<Label> {
    (0..reps)
        .flat_map(|r| {
            (0..per).map(move |i| Label {
                variant: variant.into(),
                replication: r,
                index: i,
            })
        })
        .collect()
}

#[test]
fn tie_only_matrix_reports_expertise_half() {
    // every column's best counter is exactly a tie
    let mut rng = rng_from_seed(5);
    let rows: Vec<Label> = labels("a", 3, 3)
        .into_iter()
        .chain(labels("b", 3, 3))
        .collect();
    let cols = rows.clone();
    let n = rows.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| 0.5).collect()).collect();
    for r in 0..n {
        for c in 0..n {
            if rng.random_bool(0.3) {
                v[r][c] = rng.random_range(0.0..0.5);
            }
        }
    }
    // keep one 0.5 per column for every red set
    for c in 0..n {
        for s in 0..6 {
            v[s * 3][c] = 0.5;
        }
    }
    let m = FitnessMatrix::from_values(rows, cols, v);
    let t = MeasureTable::build(&m, 3, &EloParams::default(), 1).unwrap();
    for variant in ["a", "b"] {
        let s = t.summary_of(Side::Red, variant, "Expertise").unwrap();
        assert_eq!((s.median, s.q1, s.q3), (0.5, 0.5, 0.5));
        assert_eq!(
            t.summary_of(Side::Red, variant, "Win rate").unwrap().median,
            0.0
        );
    }
    let text = t.to_text();
    let line = text.lines().find(|l| l.starts_with("Expertise")).unwrap();
    assert_eq!(line.matches("0.50 [0.50, 0.50]").count(), 2, "{line}");
}

#[test]
fn measure_table_layout() {
    let rows: Vec<Label> = labels("ranking", 1, 2)
        .into_iter()
        .chain(labels("random", 1, 2))
        .collect();
    let cols = rows.clone();
    let v = vec![
        vec![0.9, 0.9, 0.9, 0.9],
        vec![0.6, 0.6, 0.6, 0.6],
        vec![0.4, 0.6, 0.1, 0.7],
        vec![0.6, 0.6, 0.6, 0.6],
    ];
    let m = FitnessMatrix::from_values(rows, cols, v);
    let t = MeasureTable::build(&m, 2, &EloParams::default(), 3).unwrap();
    // single replication: quartiles equal the median
    assert!(t
        .summary
        .iter()
        .all(|s| s.q1 == s.median && s.q3 == s.median || s.median.is_nan()));
    assert_eq!(t.summary.len(), 2 * 2 * MEASURE_NAMES.len());
    // ranking never loses on the red side
    let aqd = t.summary_of(Side::Red, "ranking", "AQD-Score").unwrap();
    assert_eq!(aqd.median, f64::INFINITY);
    assert!(t
        .summary_csv()
        .contains("red,left,ranking,AQD-Score,null,null,null,1"));
    assert!(t.to_text().contains("∞ [∞, ∞]"));
    for name in MEASURE_NAMES {
        assert!(t.to_text().contains(name));
    }
    let wr = t.summary_of(Side::Red, "random", "Win rate").unwrap();
    assert_eq!(wr.median, 100.0);
    // blue view is the complement of the transpose
    let blue = m.view(Side::Blue);
    assert!(close(blue[2][0], 0.1));
}

#[test]
fn round_robin_single_duel_and_determinism() {
    let physics = EnvParams::default();
    let mut rng = rng_from_seed(8);
    let red: Vec<Genome<f64>> = (0..2)
        .map(|_| Genome::random(EnvId::CatMouse, Side::Red, &mut rng))
        .collect();
    let blue: Vec<Genome<f64>> = (0..3)
        .map(|_| Genome::random(EnvId::CatMouse, Side::Blue, &mut rng))
        .collect();
    let lr: Vec<(Label, &Genome<f64>)> = labels("x", 1, 2).into_iter().zip(&red).collect();
    let lb: Vec<(Label, &Genome<f64>)> = labels("y", 1, 3).into_iter().zip(&blue).collect();

    let one = round_robin(EnvId::CatMouse, &physics, &lr[..1], &lb[..1], 1, 77).unwrap();
    let seed = derive_seed(77, &[gameqd::model::ctx::ROUND_ROBIN, 0, 0, 0]);
    let duel = evaluate_duel(EnvId::CatMouse, &physics, &red[0], &blue[0], seed).unwrap();
    assert_eq!(one.duels, vec![vec![vec![duel.fitness.red]]]);

    let a = round_robin(EnvId::CatMouse, &physics, &lr, &lb, 3, 77).unwrap();
    let b = round_robin(EnvId::CatMouse, &physics, &lr, &lb, 3, 77).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(
        (a.duels.len(), a.duels[0].len(), a.duels[0][0].len()),
        (2, 3, 3)
    );
    let mean = a.duels[1][2].iter().sum::<f64>() / 3.0;
    assert!(close(a.mean(1, 2), mean));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    a.write_json(&p).unwrap();
    assert_eq!(FitnessMatrix::read_json(&p).unwrap(), a);

    let pong: Genome<f64> = Genome::random(EnvId::Pong, Side::Blue, &mut rng);
    let bad = [(labels("p", 1, 1).remove(0), &pong)];
    assert!(round_robin(EnvId::CatMouse, &physics, &lr, &bad, 1, 0).is_err());
}

fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..7, 1usize..8).prop_flat_map(|(r, c)| {
        prop::collection::vec(
            prop::collection::vec(
                prop::sample::select(vec![0.0, 0.2, 0.45, 0.5, 0.55, 0.8, 1.0]),
                c,
            ),
            r,
        )
    })
}

proptest! {
    #[test]
    fn permutation_invariance(m in matrix_strategy(), seed in any::<u64>()) {
        let rows = m.len();
        let cols = m[0].len();
        let mut rng = rng_from_seed(seed);
        let mut rp: Vec<usize> = (0..rows).collect();
        let mut cp: Vec<usize> = (0..cols).collect();
        rand::seq::SliceRandom::shuffle(&mut rp[..], &mut rng);
        rand::seq::SliceRandom::shuffle(&mut cp[..], &mut rng);
        // p[i] = m[rp[i]][cp[j]]
        let p: Vec<Vec<f64>> = rp.iter().map(|&r| cp.iter().map(|&c| m[r][c]).collect()).collect();
        let set: Vec<usize> = (0..rows).filter(|i| i % 2 == 0).collect();
        let pset: Vec<usize> = (0..rows).filter(|&i| rp[i] % 2 == 0).collect();
        prop_assert_eq!(win_rate(&m, &set), win_rate(&p, &pset));
        prop_assert_eq!(robustness(&m, &set), robustness(&p, &pset));
        prop_assert_eq!(expertise(&m, &set), expertise(&p, &pset));
        prop_assert_eq!(aqd_score(&m, &set), aqd_score(&p, &pset));
        let clusters: Vec<usize> = (0..rows).map(|i| i % 3).collect();
        let pclusters: Vec<usize> = rp.iter().map(|&r| clusters[r]).collect();
        prop_assert_eq!(coverage(&clusters, &set), coverage(&pclusters, &pset));
    }

    #[test]
    fn monotone_in_the_set_and_in_range(m in matrix_strategy(), cut in 0usize..6) {
        let rows = m.len();
        let small: Vec<usize> = (0..=cut.min(rows - 1)).collect();
        let all: Vec<usize> = (0..rows).collect();
        prop_assert!(expertise(&m, &all) >= expertise(&m, &small));
        prop_assert!(robustness(&m, &all) >= robustness(&m, &small));
        prop_assert!(win_rate(&m, &all) >= win_rate(&m, &small));
        let w = win_rate(&m, &all);
        prop_assert!((0.0..=100.0).contains(&w));
        prop_assert!((0.0..=1.0).contains(&robustness(&m, &all)));
        prop_assert!((0.0..=1.0).contains(&expertise(&m, &all)));
        if let Aqd::Count(n) = aqd_score(&m, &all) {
            prop_assert!(n >= 1 && n <= m[0].len());
        }
    }

    #[test]
    fn aqd_antitone_in_columns(m in matrix_strategy(), extra in prop::collection::vec(0.0f64..1.0, 6)) {
        let set: Vec<usize> = (0..m.len()).collect();
        let wider: Vec<Vec<f64>> = m.iter().enumerate().map(|(i, r)| {
            let mut r = r.clone();
            r.push(extra[i % extra.len()]);
            r
        }).collect();
        prop_assert!(aqd_score(&wider, &set).as_f64() <= aqd_score(&m, &set).as_f64());
    }
}
