use swinglens::evaluation::{dataset_from_shots, generate_swings, SwingSynthConfig};
use swinglens::features::{default_schema, Standardizer, Target};
use swinglens::feedback::{
    default_density_floor, extract_curves, generate_feedback, optimal_value, render_curve_svg, write_curves_csv,
    Objective,
};
use swinglens::models::{train_nam, AdditiveModel, ShapeNet, Task, TrainingConfig};
use swinglens::pose::View;

fn trained_on_swings() -> (AdditiveModel, Vec<Vec<f64>>) {
    let swings = generate_swings(&SwingSynthConfig {
        n_swings: 150,
        seed: 31,
        ..Default::default()
    });
    let data = dataset_from_shots(&swings.shots(), &default_schema(View::FaceOn)).unwrap();
    let y: Vec<f64> = data.balls.iter().map(|b| b.ball_speed).collect();
    let cfg = TrainingConfig {
        epochs: 10,
        hidden_sizes: vec![8, 4],
        ..TrainingConfig::nam()
    };
    let model = train_nam(&data.rows, &y, Task::Regression, data.names.clone(), &cfg).unwrap();
    (model, data.rows)
}

#[test]
fn curves_cover_every_feature_and_match_contributions() {
    let (model, rows) = trained_on_swings();
    let curves = extract_curves(&model, &rows, 30).unwrap();
    assert_eq!(curves.len(), 40);
    for (i, c) in curves.iter().enumerate() {
        assert_eq!(c.feature, model.feature_names[i]);
        assert_eq!(c.xs.len(), 30);
        assert!(c.xs.windows(2).all(|w| w[0] < w[1]));
        for (&x, &y) in c.xs.iter().zip(&c.ys) {
            assert!((model.contribution(i, x).unwrap() - y).abs() <= 1e-9);
        }
        assert_eq!(c.density.total(), rows.len() - outside(&rows, i, c.xs[0], *c.xs.last().unwrap()));
    }

    let mut buf = Vec::new();
    write_curves_csv(&curves, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 40 * 30);
}

fn outside(rows: &[Vec<f64>], i: usize, lo: f64, hi: f64) -> usize {
    rows.iter().filter(|r| r[i] < lo || r[i] > hi).count()
}

#[test]
fn svg_is_well_formed_xml_with_one_marker_at_the_optimum() {
    let (model, rows) = trained_on_swings();
    let curves = extract_curves(&model, &rows, 25).unwrap();
    let floor = default_density_floor(rows.len());
    for c in &curves {
        let marker = optimal_value(c, Objective::MaximizeOutput, floor).unwrap();
        let svg = render_curve_svg(c, Some(marker));
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let root = doc.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        let markers: Vec<_> = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("marker"))
            .collect();
        assert_eq!(markers.len(), 1);
        let x0 = c.xs[0];
        let x1 = *c.xs.last().unwrap();
        let expected = 60.0 + (marker - x0) / (x1 - x0) * 400.0;
        let got: f64 = markers[0].attribute("x1").unwrap().parse().unwrap();
        assert!((got - expected).abs() <= 0.005 + 1e-9);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 1);
        let bands = doc
            .descendants()
            .find(|n| n.attribute("class") == Some("density"))
            .unwrap()
            .children()
            .filter(|n| n.has_tag_name("rect"))
            .count();
        assert_eq!(bands, c.density.counts.len());
    }
}

#[test]
fn constant_subnets_give_flat_curves_and_zero_feedback() {
    let names: Vec<String> = (0..4).map(|i| format!("f{i}")).collect();
    let model = AdditiveModel::from_parts(
        Task::Binary,
        (0..4).map(|i| ShapeNet::constant(i as f64)).collect(),
        0.3,
        Standardizer::identity(4),
        names,
    );
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 10.0; 4]).collect();
    let curves = extract_curves(&model, &rows, 10).unwrap();
    for c in &curves {
        assert!(c.ys.iter().all(|&y| y == c.ys[0]));
    }
    let report = generate_feedback(&model, &curves, "g", &rows[..5], Target::Direction, 2, 1).unwrap();
    assert_eq!(report.items.len(), 2);
    assert!(report.items.iter().all(|i| i.effect_delta == 0.0));
    assert_eq!(report.items[0].feature, "f0");
    assert_eq!(report.items[1].feature, "f1");
    assert!(report.to_text().contains("straight-class logit"));
}

#[test]
fn feedback_on_trained_swings_is_stable_under_swing_order() {
    let (model, rows) = trained_on_swings();
    let curves = extract_curves(&model, &rows, 30).unwrap();
    let floor = default_density_floor(rows.len());
    let golfer: Vec<Vec<f64>> = rows[..15].to_vec();
    let mut shuffled = golfer.clone();
    shuffled.rotate_left(7);
    let a = generate_feedback(&model, &curves, "g", &golfer, Target::Speed, 5, floor).unwrap();
    let b = generate_feedback(&model, &curves, "g", &shuffled, Target::Speed, 5, floor).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.items.len(), 5);
    assert!(a.items.windows(2).all(|w| w[0].effect_delta.abs() >= w[1].effect_delta.abs()));
}
