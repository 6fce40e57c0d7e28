use ghostcde::synth::{generate, SynthConfig, SynthData};
use ghostcde::tracking::{
    build_feature_vector, load_plays, load_tracking, select_eligible_plays, write_feature_table, Convention,
    FeatureSet, FeatureVector, PlayRecord, Role, TrackingFrame, TrackingSchema, FIELD_LENGTH, FIELD_WIDTH,
};

const TOL: f64 = 1e-9;

fn synth(n: usize, seed: u64) -> SynthData {
    generate(&SynthConfig {
        n_plays: n,
        seed,
        ..Default::default()
    })
    .unwrap()
}

fn full_set() -> FeatureSet {
    FeatureSet::new(vec![Role::Rec, Role::Qb, Role::Def(1), Role::Def(2), Role::Off(1)]).unwrap()
}

fn features(data: &SynthData) -> Vec<FeatureVector> {
    let (snaps, _) = select_eligible_plays(&data.plays, &data.frames);
    snaps
        .iter()
        .map(|s| build_feature_vector(&PlayRecord::from_snapshot(s, &Convention::default()), &full_set()).unwrap())
        .collect()
}

fn is_angular(name: &str) -> bool {
    name.ends_with("_endzone") || name.ends_with("_diff")
}

fn mirror_angle(a: f64) -> f64 {
    (180.0 - a).rem_euclid(360.0)
}

fn reflect_y(f: &mut TrackingFrame) {
    f.y = FIELD_WIDTH - f.y;
    f.o = mirror_angle(f.o);
    f.dir = mirror_angle(f.dir);
}

fn flip_direction(f: &mut TrackingFrame) {
    f.x = FIELD_LENGTH - f.x;
    f.y = FIELD_WIDTH - f.y;
    f.o = (f.o + 180.0).rem_euclid(360.0);
    f.dir = (f.dir + 180.0).rem_euclid(360.0);
    f.play_direction = f.play_direction.flipped();
}

#[test]
fn reflecting_y_negates_lateral_features_only() {
    let data = synth(40, 11);
    let base = features(&data);
    let mut mirrored = data.clone();
    mirrored.frames.iter_mut().for_each(reflect_y);
    let refl = features(&mirrored);
    assert_eq!(base.len(), refl.len());
    for (a, b) in base.iter().zip(&refl) {
        for (i, name) in a.names.iter().enumerate() {
            let expected = if name.ends_with("_y_adj") { -a.values[i] } else { a.values[i] };
            assert!(
                (b.values[i] - expected).abs() < TOL,
                "{name}: {} vs {}",
                b.values[i],
                expected
            );
        }
    }
}

#[test]
fn flipping_play_direction_leaves_features_invariant() {
    let data = synth(40, 12);
    let base = features(&data);
    let mut flipped = data.clone();
    flipped.frames.iter_mut().for_each(flip_direction);
    for p in &mut flipped.plays {
        p.absolute_yardline = FIELD_LENGTH - p.absolute_yardline;
        p.play_direction = p.play_direction.map(|d| d.flipped());
    }
    let once = features(&flipped);
    let mut twice = flipped.clone();
    twice.frames.iter_mut().for_each(flip_direction);
    for p in &mut twice.plays {
        p.absolute_yardline = FIELD_LENGTH - p.absolute_yardline;
        p.play_direction = p.play_direction.map(|d| d.flipped());
    }
    let back = features(&twice);
    for ((a, b), c) in base.iter().zip(&once).zip(&back) {
        for i in 0..a.values.len() {
            assert!((a.values[i] - b.values[i]).abs() < TOL, "{}", a.names[i]);
            assert!((a.values[i] - c.values[i]).abs() < TOL, "{}", a.names[i]);
        }
    }
}

#[test]
fn defenders_ordered_and_features_in_range() {
    let data = synth(80, 13);
    let (snaps, _) = select_eligible_plays(&data.plays, &data.frames);
    assert!(!snaps.is_empty());
    for s in &snaps {
        let d: Vec<f64> = s
            .defense_ordered
            .iter()
            .map(|f| (f.x - s.receiver.x).hypot(f.y - s.receiver.y))
            .collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        let fv = build_feature_vector(&PlayRecord::from_snapshot(s, &Convention::default()), &full_set()).unwrap();
        for (name, v) in fv.names.iter().zip(&fv.values) {
            assert!(v.is_finite(), "{name}");
            if is_angular(name) {
                assert!((0.0..=180.0).contains(v), "{name} = {v}");
            }
            if name.ends_with("dist_to_rec") {
                assert!(*v >= 0.0, "{name} = {v}");
            }
        }
    }
}

#[test]
fn reingesting_identical_files_gives_identical_tables() {
    let data = synth(60, 14);
    let dir = tempfile::tempdir().unwrap();
    let tracking = data.write(dir.path()).unwrap();
    let schema = TrackingSchema::default();
    let mut tables = Vec::new();
    for k in 0..2 {
        let (frames, report) = load_tracking(&tracking, &schema).unwrap();
        assert_eq!(report.reject_count(), 0);
        let (plays, _) = load_plays(&dir.path().join("plays.csv"), &dir.path().join("games.csv"), &schema).unwrap();
        let (snaps, _) = select_eligible_plays(&plays, &frames);
        let records: Vec<PlayRecord> = snaps
            .iter()
            .map(|s| PlayRecord::from_snapshot(s, &Convention::default()))
            .collect();
        let path = dir.path().join(format!("features_{k}.csv"));
        write_feature_table(&path, &records).unwrap();
        tables.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    assert!(!tables[0].is_empty());
}
