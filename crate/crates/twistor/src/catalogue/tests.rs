use super::*;

#[test]
fn all_entries_build() {
    for e in entries() {
        let m = e.build().unwrap_or_else(|err| panic!("{} failed: {err}", e.id));
        let want_c = match e.construction {
            Construction::GibbonsHawking => 0.0,
            Construction::Beltrami => 2.0,
        };
        assert_eq!(m.fiber_constant(), want_c, "{}", e.id);
    }
}

#[test]
fn all_entries_have_frames() {
    for e in entries() {
        e.frame().unwrap_or_else(|err| panic!("{} frame failed: {err}", e.id));
    }
}

#[test]
fn lookup_by_id() {
    assert_eq!(entry("gh.pole2").unwrap().id, "gh.pole2");
    assert!(entry("gh.missing").is_err());
}

#[test]
fn ids_are_unique_and_sorted_by_construction() {
    let ids: Vec<&str> = entries().iter().map(|e| e.id).collect();
    assert_eq!(ids, vec!["gh.linear", "gh.pole1", "gh.pole2", "bel.planar", "bel.abc"]);
}
