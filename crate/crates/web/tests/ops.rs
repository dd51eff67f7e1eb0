use randgap_web::{appendix_json, check_json, uniform_lottery_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn appendix_matches_the_reproduction() {
    let v = parse(appendix_json(1e4, 2000).unwrap());
    let revenue = v["result"]["revenue"].as_f64().unwrap();
    assert!((revenue - 2.275).abs() < 0.02 * 2.275);
    assert_eq!(v["checks"]["passed"], true);
    assert!(appendix_json(1e4, 0).is_err());
}

#[test]
fn half_half_lottery_beats_pricing() {
    let v = parse(uniform_lottery_json(0.001, 0.5, 0.5, 5.057).unwrap());
    let p = v["symmetric_price"].as_f64().unwrap();
    assert!((5.092..=5.102).contains(&p));
    assert!(v["gain"].as_f64().unwrap() > 1e-6);
    assert!(v["lottery_mass"].as_f64().unwrap() > 0.0);
}

#[test]
fn overpriced_lottery_changes_nothing() {
    let v = parse(uniform_lottery_json(0.01, 0.5, 0.5, 9.0).unwrap());
    assert!(v["gain"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["lottery_mass"].as_f64().unwrap(), 0.0);
}

#[test]
fn check_runs_every_setting() {
    for setting in 1..=4 {
        let v = parse(check_json(setting, 5, 1, 2, 2, 2).unwrap());
        assert_eq!(v["report"]["passed"], true, "setting {setting}");
    }
    assert!(check_json(9, 5, 1, 2, 2, 2)
        .unwrap_err()
        .contains("setting"));
    assert!(check_json(3, 5, 0, 3, 3, 2)
        .unwrap_err()
        .contains("capacity"));
}
