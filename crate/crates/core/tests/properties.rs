use std::collections::BTreeMap;

use proptest::prelude::*;

use ghostcde::epv::{build_yac_grid, expected_value, utility_values};
use ghostcde::ghost::{evaluate_locations, pooled_percentile, GhostConfig, GhostModels, TrajectoryMode, TrajectoryPool};
use ghostcde::harness::{aggregate_players, lowo_cv, EvalSettings, ModelKind, PlayOutcome};
use ghostcde::rfcde::{decode, encode, train, FeatureMatrix, ForestConfig, Grid, Responses};
use ghostcde::synth::{generate, SynthConfig};
use ghostcde::tracking::{FeatureSet, PlayRecord, RosterEntry};
use ghostcde::utility::{DownContext, ParametricEp};

fn ctx_strategy() -> impl Strategy<Value = (f64, DownContext)> {
    (1.0f64..95.0, 1u8..=4, 1.0f64..20.0, 0.0f64..15.0).prop_map(|(catch, down, ytg, behind)| {
        (
            catch,
            DownContext {
                down,
                yards_to_go: ytg,
                los_x_adj: (catch + behind).min(99.0),
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn epv_within_utility_range((catch, ctx) in ctx_strategy(), seed in any::<u64>()) {
        let grid = build_yac_grid(catch).unwrap();
        let g = utility_values(&grid, &ctx, &ParametricEp::default());
        let mut state = seed;
        let p: Vec<f64> = (0..grid.len())
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        prop_assume!(p.iter().sum::<f64>() > 0.0);
        let epv = expected_value(&p, &g).unwrap();
        let lo = g.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(epv >= lo - 1e-12 && epv <= hi + 1e-12);
        prop_assert!(g.iter().all(|v| (-7.0..=7.0).contains(v)));
    }

    #[test]
    fn moving_mass_to_higher_g_never_lowers_epv(
        (catch, ctx) in ctx_strategy(),
        weights in prop::collection::vec(0.01f64..1.0, 120),
        from in any::<prop::sample::Index>(),
        to in any::<prop::sample::Index>(),
        share in 0.0f64..=1.0,
    ) {
        let grid = build_yac_grid(catch).unwrap();
        let g = utility_values(&grid, &ctx, &ParametricEp::default());
        let p: Vec<f64> = weights[..grid.len()].to_vec();
        let (i, j) = (from.index(grid.len()), to.index(grid.len()));
        let (lo, hi) = if g[i] <= g[j] { (i, j) } else { (j, i) };
        let mut q = p.clone();
        let moved = q[lo] * share;
        q[lo] -= moved;
        q[hi] += moved;
        prop_assert!(expected_value(&q, &g).unwrap() >= expected_value(&p, &g).unwrap() - 1e-12);
    }

    #[test]
    fn percentile_in_unit_interval(
        observed in -7.0f64..7.0,
        h in prop::collection::vec(0.01f64..1.0, 1..6),
        epv in prop::collection::vec(-7.0f64..7.0, 4),
    ) {
        let total: f64 = h.iter().sum();
        let h: Vec<f64> = h.iter().map(|v| v / total).collect();
        let ghost: Vec<Vec<f64>> = h.iter().map(|_| epv.clone()).collect();
        let p = pooled_percentile(observed, &h, &ghost);
        prop_assert!((0.0..=1.0).contains(&p));
        let ties: Vec<Vec<f64>> = h.iter().map(|_| vec![observed; 3]).collect();
        prop_assert!((pooled_percentile(observed, &h, &ties) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn two_dimensional_marginal_is_a_distribution() {
    let n = 300;
    let x: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 0.13).cos()]).collect();
    let y: Vec<(f64, f64)> = (0..n)
        .map(|i| ((i as f64 * 0.31).sin() * 4.0, (i as f64 * 0.17).cos() * 3.0))
        .collect();
    let forest = train(
        &FeatureMatrix::from_rows(&x).unwrap(),
        &Responses::bivariate(&y),
        &ForestConfig {
            n_trees: 30,
            n_basis: 6,
            ..Default::default()
        },
    )
    .unwrap();
    let xs: Vec<f64> = (0..41).map(|i| -8.0 + 0.4 * i as f64).collect();
    let ys: Vec<f64> = (0..31).map(|i| -6.0 + 0.4 * i as f64).collect();
    let d = forest
        .condition(&[0.2, -0.5], None)
        .unwrap()
        .on_grid(&Grid::Lattice {
            xs: xs.clone(),
            ys: ys.clone(),
        })
        .unwrap()
        .normalized()
        .unwrap();
    let marginal: Vec<f64> = (0..xs.len())
        .map(|a| (0..ys.len()).map(|b| d.values[a * ys.len() + b]).sum())
        .collect();
    assert!(marginal.iter().all(|v| *v >= 0.0));
    assert!((marginal.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn saved_model_predicts_identically() {
    let n = 200;
    let x: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i as f64).sqrt()]).collect();
    let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
    let forest = train(
        &FeatureMatrix::from_rows(&x).unwrap(),
        &Responses::univariate(y),
        &ForestConfig {
            n_trees: 25,
            seed: 4,
            ..Default::default()
        },
    )
    .unwrap();
    let back = decode(&encode(&forest)).unwrap();
    let grid = Grid::linspace(-2.0, 2.0, 81);
    for q in [[3.0, 1.0], [150.0, 12.0], [-5.0, 0.0]] {
        let a = forest.condition(&q, None).unwrap().on_grid(&grid).unwrap();
        let b = back.condition(&q, None).unwrap().on_grid(&grid).unwrap();
        assert_eq!(a, b);
    }
}

fn synthetic_records(n: usize, weeks: u32, seed: u64) -> Vec<PlayRecord> {
    generate(&SynthConfig {
        n_plays: n,
        weeks,
        seed,
        ..Default::default()
    })
    .unwrap()
    .records()
}

#[test]
fn ghost_linearity_and_renormalisation() {
    let records = synthetic_records(80, 3, 21);
    let refs: Vec<&PlayRecord> = records.iter().collect();
    let cfg = ForestConfig {
        n_trees: 30,
        ..Default::default()
    };
    let yac = ghostcde::harness::train_model(ModelKind::Yac, &refs, &FeatureSet::yac(), &cfg).unwrap();
    let ghost = ghostcde::harness::train_model(ModelKind::Ghost2d, &refs, &FeatureSet::ghost(), &cfg).unwrap();
    let pool = TrajectoryPool::from_records(&records);
    let utility = ParametricEp::default();
    let (ys, gs) = (FeatureSet::yac(), FeatureSet::ghost());
    let models = GhostModels {
        yac: &yac,
        yac_features: &ys,
        ghost: &ghost,
        ghost_features: &gs,
        utility: &utility,
        pool: &pool,
    };
    let config = GhostConfig {
        n_samples: 4,
        mode: TrajectoryMode::Resample,
        ..Default::default()
    };
    for (k, record) in records.iter().take(8).enumerate() {
        let r = record.receiver;
        let locations: Vec<(f64, f64)> = (0..5).map(|i| (r.x_adj - i as f64, r.y_adj + 0.5 * i as f64)).collect();
        let h: Vec<f64> = (1..=5).map(|i| i as f64 * 0.37).collect();
        let e = evaluate_locations(&models, record, &locations, &h, &config, k as u64).unwrap();
        assert!((e.h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let pooled_mean: f64 = e
            .h
            .iter()
            .zip(&e.ghost_epv)
            .map(|(hv, v)| hv * v.iter().sum::<f64>() / v.len() as f64)
            .sum();
        assert!((e.expected_delta - (e.epv_catch - pooled_mean)).abs() < 1e-12);
        let again = evaluate_locations(&models, record, &locations, &h, &config, k as u64).unwrap();
        assert_eq!(e, again);
    }
}

#[test]
fn lowo_folds_partition_the_plays() {
    let records = synthetic_records(90, 3, 31);
    let settings = EvalSettings {
        forest: ForestConfig {
            n_trees: 10,
            ..Default::default()
        },
        ghost_grid: GhostConfig::default(),
    };
    let report = lowo_cv(&records, &[FeatureSet::yac()], ModelKind::Yac, &settings).unwrap();
    assert_eq!(report.folds.len(), 3);
    assert_eq!(report.folds.iter().map(|f| f.n_test).sum::<usize>(), records.len());
    for f in &report.folds {
        assert_eq!(f.n_test + f.n_train, records.len());
        assert_eq!(f.n_test, records.iter().filter(|r| r.week == f.test_week).count());
    }
    let two = synthetic_records(40, 2, 32);
    assert_eq!(lowo_cv(&two, &[FeatureSet::yac()], ModelKind::Yac, &settings).unwrap().folds.len(), 2);
}

#[test]
fn leaderboard_matches_group_by_oracle() {
    let outcomes: Vec<PlayOutcome> = (0..60u64)
        .map(|i| PlayOutcome {
            game_id: 1,
            play_id: i,
            week: 1 + (i % 4) as u32,
            defense_team: format!("T{}", i % 3),
            def1_id: if i % 11 == 0 { None } else { Some(100 + i % 7) },
            epv_catch: 0.0,
            expected_delta: ((i * 37) % 19) as f64 / 7.0 - 1.3,
            percentile: 0.5,
            yac: ((i * 13) % 23) as f64 / 3.0 - 2.0,
        })
        .collect();
    let rosters: BTreeMap<u64, RosterEntry> = (100..107)
        .map(|id| {
            (
                id,
                RosterEntry {
                    player_id: id,
                    display_name: format!("P{id}"),
                    position: if id % 2 == 0 { "CB".into() } else { "LB".into() },
                },
            )
        })
        .collect();
    let board = aggregate_players(&outcomes, &rosters, 5);
    let mut oracle: BTreeMap<u64, (usize, f64, f64)> = BTreeMap::new();
    for o in &outcomes {
        if let Some(id) = o.def1_id {
            let e = oracle.entry(id).or_default();
            e.0 += 1;
            e.1 += o.expected_delta;
            e.2 += o.yac;
        }
    }
    assert_eq!(board.players.len(), oracle.len());
    for p in &board.players {
        let (n, d, y) = oracle[&p.player_id];
        assert_eq!(p.receptions, n);
        assert_eq!(p.total_delta, d);
        assert_eq!(p.total_yac, y);
        assert_eq!(p.avg_delta, d / n as f64);
    }
    assert!(board.players.windows(2).all(|w| w[0].total_delta <= w[1].total_delta));
}
