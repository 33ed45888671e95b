use bosecond::verifier::ANCHORS;

fn readme() -> String {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md");
    std::fs::read_to_string(path).expect("README.md at the workspace root")
}

#[test]
fn every_anchor_has_a_row_in_the_check_map() {
    let text = readme();
    let missing: Vec<&str> = ANCHORS.iter().copied().filter(|a| !text.contains(&format!("| `{a}` |"))).collect();
    assert!(missing.is_empty(), "README check map lacks: {missing:?}");
}

#[test]
fn check_map_lists_nothing_unknown() {
    let text = readme();
    let start = text.find("## Check map").expect("check map section");
    let rows = text[start..]
        .lines()
        .skip_while(|l| !l.starts_with("|---"))
        .skip(1)
        .take_while(|l| l.starts_with('|'));
    for row in rows {
        let cell = row.split('|').nth(1).unwrap().trim().trim_matches('`');
        assert!(ANCHORS.contains(&cell), "unknown anchor in README: {cell}");
    }
}

#[test]
fn every_preset_is_documented() {
    let text = readme();
    for p in bosecond::config::PRESETS {
        assert!(text.contains(&format!("`{p}`")), "README does not mention preset {p}");
    }
}
