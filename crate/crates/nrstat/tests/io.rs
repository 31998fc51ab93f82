use nrstat::io::{decode_binary, encode_binary, load_matrix, read_csv, save_matrix, write_csv, Format, IoError};
use nrstat_core::ResponseMatrix;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn any_matrix() -> impl Strategy<Value = ResponseMatrix> {
    (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
        prop::collection::vec(finite(), r * c).prop_map(move |v| ResponseMatrix::new(r, c, v).unwrap())
    })
}

fn same_bits(a: &ResponseMatrix, b: &ResponseMatrix) -> bool {
    a.rows() == b.rows()
        && a.cols() == b.cols()
        && a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

proptest! {
    #[test]
    fn binary_round_trip_is_bit_exact(m in any_matrix()) {
        let bytes = encode_binary(&m);
        prop_assert_eq!(bytes.len(), 24 + 8 * m.rows() * m.cols());
        prop_assert!(same_bits(&decode_binary(&bytes).unwrap(), &m));
    }

    #[test]
    fn csv_round_trip_is_exact(m in any_matrix()) {
        let mut buf = Vec::new();
        write_csv(&m, &mut buf).unwrap();
        prop_assert!(same_bits(&read_csv(buf.as_slice()).unwrap(), &m));
    }
}

#[test]
fn tiny_values_survive_csv() {
    let m = ResponseMatrix::new(1, 2, vec![1e-300, -5e-324]).unwrap();
    let mut buf = Vec::new();
    write_csv(&m, &mut buf).unwrap();
    assert_eq!(read_csv(buf.as_slice()).unwrap(), m);
}

#[test]
fn files_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let m = ResponseMatrix::from_rows(&[[1.0, 2.5], [3.0, -4.0], [0.1, 0.2]]).unwrap();
    for name in ["m.csv", "m.nrsm", "m.bin"] {
        let path = dir.path().join(name);
        let fmt = Format::from_path(&path);
        save_matrix(&m, &path, fmt).unwrap();
        assert_eq!(load_matrix(&path, fmt).unwrap(), m, "{name}");
    }
    assert_eq!(Format::from_path("x.CSV".as_ref()), Format::Csv);
}

#[test]
fn missing_file_names_the_path() {
    let err = load_matrix("/nonexistent/m.csv".as_ref(), Format::Csv).unwrap_err();
    assert!(matches!(err, IoError::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/m.csv"));
}

#[test]
fn csv_error_positions_are_one_based() {
    let err = read_csv("n1,n2\n1,2\n3,4\n5,oops\n".as_bytes()).unwrap_err();
    match err {
        IoError::NonNumeric { line, col, cell } => {
            assert_eq!((line, col, cell.as_str()), (4, 2, "oops"));
        }
        other => panic!("{other:?}"),
    }
    let err = read_csv("1,2\ninf,2\n".as_bytes()).unwrap_err();
    assert!(err.to_string().contains("line 2, column 1"), "{err}");
}

#[test]
fn trailing_bytes_are_rejected() {
    let m = ResponseMatrix::new(1, 2, vec![1.0, 2.0]).unwrap();
    let mut bytes = encode_binary(&m);
    bytes.push(0);
    assert!(matches!(
        decode_binary(&bytes),
        Err(IoError::PayloadSize { expected: 16, got: 17 })
    ));
}
