mod common;

use common::equiv::*;

#[test]
fn scratch_primitives_match_published_answers() {
    common::self_check();
}

fn assert_all(name: &str, t: Tally) {
    assert!(t.total >= 20, "{name}: only {} vectors", t.total);
    assert_eq!(t.matched, t.total, "{name}");
}

#[test]
fn milenage_matches_oracle() {
    assert_all("milenage", milenage_tally());
}

#[test]
fn kdf_matches_oracle() {
    assert_all("kdf", kdf_tally());
}

#[test]
fn eap_aka_matches_oracle() {
    assert_all("eap_aka_keys", eap_aka_tally());
}

#[test]
fn eap_aka_prime_matches_oracle() {
    assert_all("eap_aka_prime_keys", eap_aka_prime_tally());
}

#[test]
fn res_star_matches_oracle() {
    assert_all("derive_res_star", res_star_tally());
}

#[test]
fn hres_star_matches_oracle() {
    assert_all("derive_hres_star", hres_star_tally());
}

#[test]
fn key_hierarchy_matches_frozen_vectors() {
    assert_all("hierarchy", hierarchy_tally());
}
