use lmlds::data_io::{load_series, save_series, write_long_format, TensorSeries};
use lmlds::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn any_finite_values_round_trip(vals in prop::collection::vec(finite(), 12)) {
        let obs: Vec<DMatrix<f64>> = vals.chunks(6).map(|c| DMatrix::from_column_slice(2, 3, c)).collect();
        let s = TensorSeries::new("p", obs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (m, d) = (dir.path().join("m.toml"), dir.path().join("d.csv"));
        save_series(&s, &m, &d, false).unwrap();
        let back = load_series(&m, &d).unwrap();
        for (a, b) in back.observations().iter().zip(s.observations()) {
            for (x, y) in a.iter().zip(b.iter()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}

#[test]
fn random_series_round_trips_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let obs: Vec<DMatrix<f64>> = (0..20)
        .map(|_| DMatrix::from_fn(5, 6, |_, _| rng.random::<f64>() * 2e3 - 1e3))
        .collect();
    let s = TensorSeries::new("", obs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (m, d) = (dir.path().join("m.toml"), dir.path().join("d.csv"));
    save_series(&s, &m, &d, false).unwrap();
    assert_eq!(load_series(&m, &d).unwrap(), s);
    assert!(matches!(save_series(&s, &m, &d, false), Err(Error::WouldOverwrite(_))));
    save_series(&s, &m, &d, true).unwrap();
}

#[test]
fn records_are_epoch_then_row_then_tube() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let y = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    write_long_format(&path, &[y], 7, false).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.rsplit_once(',').unwrap().0).collect();
    assert_eq!(keys, ["7,1,1", "7,1,2", "7,2,1", "7,2,2"]);
    assert!(text.lines().next().unwrap().ends_with(",1.0000000000000000e0"));
}
