#![no_main]
use libfuzzer_sys::fuzz_target;
use mirelay::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scenario) = Scenario::parse(text, "fuzz.toml") {
        let written = scenario.to_toml_string().expect("valid scenario serializes");
        let again = Scenario::parse(&written, "roundtrip.toml").expect("serialized scenario parses");
        assert_eq!(scenario, again);
    }
});
