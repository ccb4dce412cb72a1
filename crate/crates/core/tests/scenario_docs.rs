use mirelay::scenario::{Distances, Scenario};

fn documented_example() -> String {
    let doc = include_str!("../../../docs/scenario.md");
    let start = doc.find("```toml\n").expect("toml block") + "```toml\n".len();
    let end = start + doc[start..].find("```").expect("closing fence");
    doc[start..end].to_string()
}

#[test]
fn documented_example_parses_to_the_defaults() {
    let text = documented_example();
    let parsed = Scenario::parse(&text, "scenario.md").unwrap();
    let mut defaults = Scenario::new("dry-soil", parsed.distance_m.clone());
    defaults.point = parsed.point.clone();
    defaults.snr_profile = parsed.snr_profile.clone();
    assert_eq!(parsed, defaults);
}

#[test]
fn documented_example_round_trips() {
    let parsed = Scenario::parse(&documented_example(), "scenario.md").unwrap();
    let again = Scenario::parse(&parsed.to_toml_string().unwrap(), "again.toml").unwrap();
    assert_eq!(parsed, again);
}

#[test]
fn shipped_scenario_uses_the_defaults() {
    let text = include_str!("../../../fixtures/dry-soil.toml");
    let parsed = Scenario::parse(text, "dry-soil.toml").unwrap();
    let mut defaults = Scenario::new("dry-soil", Distances::Many(vec![10.0, 20.0, 30.0, 40.0, 50.0]));
    defaults.output_dir = parsed.output_dir.clone();
    assert_eq!(parsed, defaults);
}
