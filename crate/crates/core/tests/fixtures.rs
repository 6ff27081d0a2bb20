use std::path::{Path, PathBuf};

use grasslin::cases;
use grasslin::dense::Matrix;
use grasslin::io::{parse_matrix_file, parse_vector_file};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn fixtures_match_builders() {
    let builds = [
        cases::sylvester_case(0.6666),
        cases::bezout_case(),
        cases::division_case(),
        cases::regulator_case(),
        cases::macaulay_fixture(),
        cases::volterra_case(4.0, 16).unwrap(),
    ];
    for case in builds {
        let (a, b) = case.matrix_system().unwrap();
        let fa = parse_matrix_file(fixture(&format!("{}_A.mtx", case.name))).unwrap();
        let fb = parse_vector_file(fixture(&format!("{}_b.vec", case.name))).unwrap();
        assert_eq!(fa, a, "{}", case.name);
        assert_eq!(fb, b, "{}", case.name);
    }
}

#[test]
fn bezout_fixture_is_the_listed_matrix() {
    let rows: Vec<&[f64]> = cases::BEZOUT_MATRIX.iter().map(|r| r.as_slice()).collect();
    assert_eq!(parse_matrix_file(fixture("bezout_A.mtx")).unwrap(), Matrix::from_real_rows(&rows));
}

#[test]
fn macaulay_fixture_is_the_listed_matrix() {
    let rows: Vec<&[f64]> = cases::MACAULAY_MATRIX.iter().map(|r| r.as_slice()).collect();
    assert_eq!(parse_matrix_file(fixture("macaulay_A.mtx")).unwrap(), Matrix::from_real_rows(&rows));
}

#[test]
fn division_rhs_is_stored_verbatim() {
    let b = parse_vector_file(fixture("division_b.vec")).unwrap();
    for (x, &y) in b.iter().zip(cases::DIVISION_RHS.iter()) {
        assert_eq!(x.re, y);
        assert_eq!(x.im, 0.0);
    }
}
