use serde_json::Value;
use swinglens_demo::{classify_shot, pose_metrics, train_shapes};

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

fn metric(v: &Value, name: &str) -> f64 {
    v["metrics"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["metric"] == name)
        .unwrap_or_else(|| panic!("{name} missing"))["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn pose_explorer_reports_event_metrics_and_a_figure() {
    let base = parse(pose_metrics(3, 2, 0.0, 0.0));
    assert_eq!(base["event"], "backswing");
    roxmltree::Document::parse(base["svg"].as_str().unwrap()).unwrap();
    let moved = parse(pose_metrics(3, 2, 0.1, 0.0));
    assert!(metric(&moved, "HEAD-LOC") > metric(&base, "HEAD-LOC"));
    assert_eq!(metric(&moved, "HIP-SHIFTED"), metric(&base, "HIP-SHIFTED"));
    let hips = parse(pose_metrics(3, 2, 0.0, 0.1));
    assert_eq!(metric(&hips, "HEAD-LOC"), metric(&base, "HEAD-LOC"));
    assert!(metric(&hips, "HIP-SHIFTED") > metric(&base, "HIP-SHIFTED"));
    let address = parse(pose_metrics(3, 0, 0.2, 0.2));
    assert_eq!(metric(&address, "STANCE-RATIO"), metric(&parse(pose_metrics(3, 0, 0.0, 0.0)), "STANCE-RATIO"));
    assert!(pose_metrics(3, 8, 0.0, 0.0).is_err());
    assert!(pose_metrics(3, 1, f64::NAN, 0.0).is_err());
}

#[test]
fn shape_trainer_recovers_planted_effects() {
    let out = parse(train_shapes(7, 600, 30));
    let terms = out["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 5);
    for t in terms {
        roxmltree::Document::parse(t["svg"].as_str().unwrap()).unwrap();
        match t["pearson"].as_f64() {
            Some(r) => assert!(r > 0.9, "{}: r = {r}", t["name"]),
            None => assert!(t["max_abs"].as_f64().unwrap() < 0.1),
        }
    }
    assert_eq!(train_shapes(7, 600, 30), train_shapes(7, 600, 30));
    assert!(train_shapes(7, 10, 30).is_err());
    assert!(train_shapes(7, 600, 0).is_err());
}

#[test]
fn shot_classifier_labels_boundaries_inclusively() {
    let v = parse(classify_shot(6.0, -10.0, 6.0, 10.0));
    assert_eq!(v["shape"], "straight straight");
    assert_eq!(v["direction_straight"], true);
    let v = parse(classify_shot(-6.5, 12.0, 6.0, 10.0));
    assert_eq!(v["shape"], "pull slice");
    assert_eq!(v["start"], "pull");
    assert_eq!(v["curve"], "slice");
    assert_eq!(v["spin_straight"], false);
    assert!(classify_shot(0.0, 0.0, -1.0, 10.0).is_err());
    assert!(classify_shot(f64::INFINITY, 0.0, 6.0, 10.0).is_err());
}
