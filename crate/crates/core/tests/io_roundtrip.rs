use ans_core::io::{read_field, write_scalar, write_vector, CsvTable, FieldData};
use ans_core::random::{random_scalar, random_shell, trial_rng};
use ans_core::Grid;

#[test]
fn vector_file_roundtrips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new([8, 16, 4], [1.0, 2.0, 3.0]).unwrap();
    let u = random_shell(g, &mut trial_rng(5, 0), 0.0, 6.0, 0.7);
    let path = dir.path().join("u.ansf");
    write_vector(&path, &u).unwrap();
    match read_field(&path).unwrap() {
        FieldData::Vector(v) => {
            assert_eq!(v.grid().lengths(), g.lengths());
            assert_eq!(v, u);
        }
        FieldData::Scalar(_) => panic!("expected a vector field"),
    }
}

#[test]
fn scalar_file_roundtrips_and_truncation_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::cube(8).unwrap();
    let f = random_scalar(g, &mut trial_rng(6, 0), |_| true);
    let path = dir.path().join("f.ansf");
    write_scalar(&path, &f).unwrap();
    assert!(matches!(read_field(&path).unwrap(), FieldData::Scalar(s) if s == f));
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(read_field(&path).is_err());
}

#[test]
fn csv_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = CsvTable::new(["a", "b"]);
    t.push_row(vec!["1".into(), "2".into()]);
    let path = dir.path().join("t.csv");
    t.write(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,2\n");
}
