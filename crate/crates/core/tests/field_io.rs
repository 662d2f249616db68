use std::collections::BTreeMap;

use proptest::prelude::*;
use pslab::field::io::{field_from_json, field_to_json, read_field, write_field};
use pslab::field::{GridSpec, ScalarField, SolutionPair};
use pslab::PslabError;

fn pair_from(n: (usize, usize), u: Vec<f64>, v: Vec<f64>, beta: f64) -> SolutionPair {
    let grid = GridSpec::new(&[0.0, 0.0], &[(n.0 - 1) as f64 * 0.25, (n.1 - 1) as f64 * 0.25], &[n.0, n.1]).unwrap();
    SolutionPair::new(ScalarField::new(grid.clone(), u).unwrap(), ScalarField::new(grid, v).unwrap(), beta).unwrap()
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(
        (n0, n1, u, v) in (3usize..7, 3usize..7).prop_flat_map(|(a, b)| {
            let len = a * b;
            (Just(a), Just(b),
             prop::collection::vec(0.0f64..1e6, len),
             prop::collection::vec(prop_oneof![0.0f64..1e-300, 0.0f64..1.0, 1e10f64..1e300], len))
        }),
        beta in 0.0f64..1e5,
    ) {
        let pair = pair_from((n0, n1), u, v, beta);
        let text = field_to_json(&pair, &BTreeMap::new()).unwrap();
        let back = field_from_json(&text).unwrap().pair;
        let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.u().values()), bits(pair.u().values()));
        prop_assert_eq!(bits(back.v().values()), bits(pair.v().values()));
        prop_assert_eq!(back.beta().to_bits(), beta.to_bits());
        prop_assert_eq!(back.grid().n(), pair.grid().n());
    }
}

#[test]
fn file_round_trip_keeps_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let pair = pair_from((3, 3), (1..=9).map(|i| i as f64 * 0.1).collect(), vec![1.0; 9], 4.0);
    let mut meta = BTreeMap::new();
    meta.insert("sweeps".to_string(), serde_json::json!(12));
    write_field(&path, &pair, &meta).unwrap();
    let back = read_field(&path).unwrap();
    assert_eq!(back.metadata["sweeps"], 12);
    assert_eq!(back.pair.u().values(), pair.u().values());
}

fn doc(u_len: usize, beta: Option<f64>) -> String {
    let mut d = serde_json::json!({
        "version": "PSLAB-FIELD v1", "dim": 2, "n": [3, 3], "lo": [0, 0], "hi": [1, 1],
        "u": vec![0.5; u_len], "v": vec![0.1; 9],
    });
    if let Some(b) = beta {
        d["beta"] = serde_json::json!(b);
    }
    d.to_string()
}

#[test]
fn shape_mismatch_is_format_error() {
    let err = field_from_json(&doc(8, Some(1.0))).unwrap_err();
    assert!(matches!(err, PslabError::Format(_)), "{err:?}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn missing_beta_defaults_to_one() {
    let f = field_from_json(&doc(9, None)).unwrap();
    assert_eq!(f.pair.beta(), 1.0);
}

#[test]
fn wrong_version_rejected() {
    let text = doc(9, Some(1.0)).replace("PSLAB-FIELD v1", "PSLAB-FIELD v2");
    assert_eq!(field_from_json(&text).unwrap_err().exit_code(), 2);
}
