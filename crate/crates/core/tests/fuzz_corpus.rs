//! Replays the checked-in fuzz seeds through the parsers they target.

use std::fs;
use std::path::PathBuf;

use subradiance::experiment::ExperimentConfig;
use subradiance::io::{parse_couplings, parse_density_matrix, parse_field_samples, parse_pure_state};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn accepted<T, E>(target: &str, parse: impl Fn(&str) -> Result<T, E>) -> Vec<String> {
    seeds(target).into_iter().filter(|(_, text)| parse(text).is_ok()).map(|(name, _)| name).collect()
}

#[test]
fn pure_state_seeds() {
    assert_eq!(
        accepted("parse_pure_state", parse_pure_state),
        ["excitation.json", "vacuum_superposition.json"]
    );
}

#[test]
fn couplings_seeds() {
    assert_eq!(accepted("parse_couplings", parse_couplings), ["all_to_all.json"]);
}

#[test]
fn field_sample_seeds() {
    assert_eq!(accepted("parse_field_samples", parse_field_samples), ["pair.json"]);
}

#[test]
fn density_matrix_seeds() {
    assert_eq!(accepted("parse_density_matrix", parse_density_matrix), ["coherent.json", "excited.json"]);
}

#[test]
fn config_seeds() {
    assert_eq!(
        accepted("experiment_config", ExperimentConfig::from_json),
        ["default.json", "files.json", "inline.json", "scan.json"]
    );
}

#[test]
fn truncated_seeds_are_rejected_without_panicking() {
    for target in [
        "parse_pure_state",
        "parse_couplings",
        "parse_field_samples",
        "parse_density_matrix",
        "experiment_config",
    ] {
        for (_, text) in seeds(target) {
            for cut in 0..text.len() {
                let Some(prefix) = text.get(..cut) else { continue };
                let _ = parse_pure_state(prefix);
                let _ = parse_couplings(prefix);
                let _ = parse_field_samples(prefix);
                let _ = parse_density_matrix(prefix);
                let _ = ExperimentConfig::from_json(prefix);
            }
        }
    }
}

mod mutations {
    use proptest::prelude::*;

    use super::*;

    const TARGETS: [&str; 5] = [
        "parse_pure_state",
        "parse_couplings",
        "parse_field_samples",
        "parse_density_matrix",
        "experiment_config",
    ];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn spliced_seeds_never_panic(
            target in 0usize..5,
            pick in any::<prop::sample::Index>(),
            at in any::<prop::sample::Index>(),
            insert in "[-0-9.e\\[\\]{}\",: a-z]{0,12}",
            drop in 0usize..8,
        ) {
            let seeds = seeds(TARGETS[target]);
            let text = &seeds[pick.index(seeds.len())].1;
            let bytes = text.as_bytes();
            let pos = at.index(bytes.len() + 1);
            let end = (pos + drop).min(bytes.len());
            let mut mutated = bytes[..pos].to_vec();
            mutated.extend_from_slice(insert.as_bytes());
            mutated.extend_from_slice(&bytes[end..]);
            let s = String::from_utf8_lossy(&mutated);
            let _ = parse_pure_state(&s);
            let _ = parse_couplings(&s);
            let _ = parse_field_samples(&s);
            let _ = parse_density_matrix(&s);
            let _ = ExperimentConfig::from_json(&s);
        }
    }
}
