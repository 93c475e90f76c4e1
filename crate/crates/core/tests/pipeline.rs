use localis::function_space::{make_grid, PairingKind, SampledFunction};
use localis::group::{GroupDescriptor, GroupElement};
use localis::io::{load_operator_field, load_symbol_field, save_operator_field, save_symbol_field};
use localis::localization::{local_equiv, symbol_field};
use localis::operator::{multiplication_operator, singular_values, WindowSpec};
use localis::synthesis::{inverse_covariant, Embedding, OperatorField};

#[test]
fn symbols_survive_disk_and_rebuild_the_operator() {
    let grid = make_grid(GroupDescriptor::euclidean(1), 0.0625, 8.0).unwrap();
    let window = WindowSpec::homogeneous_box(&grid, 1.0).unwrap();
    let a = multiplication_operator(&SampledFunction::from_fn(&grid, 2.0, |x| (2.0 * x[0]).sin()));
    let lattice: Vec<GroupElement> = grid.points().filter(|x| x[0].abs() <= 2.0).map(GroupElement).collect();
    let levels = [0.25, 0.125];
    let sf = symbol_field(&a, &window, &levels, &lattice, 2.0).unwrap();

    let dir = tempfile::tempdir().unwrap();
    save_symbol_field(&dir.path().join("symbols"), &sf).unwrap();
    let sf = load_symbol_field(&dir.path().join("symbols")).unwrap();

    let field = OperatorField::from_symbol_field(&sf, Embedding::Covariant).unwrap();
    save_operator_field(&dir.path().join("field"), &field).unwrap();
    let field = load_operator_field(&dir.path().join("field")).unwrap();

    let rec = inverse_covariant(&field, PairingKind::Hardy, false).unwrap();
    let idx = rec.covered.indices();
    assert!(idx.len() > 40);
    let err = singular_values(&(rec.operator.block(&idx, &idx) - a.block(&idx, &idx)))[0];
    assert!(err < 1e-12, "{err}");
}

#[test]
fn reconstructed_operator_is_locally_equivalent_to_the_original() {
    let grid = make_grid(GroupDescriptor::euclidean(1), 0.0625, 8.0).unwrap();
    let window = WindowSpec::homogeneous_box(&grid, 1.0).unwrap();
    let a = multiplication_operator(&SampledFunction::from_fn(&grid, 2.0, |x| x[0].cos()));
    let lattice: Vec<GroupElement> = grid.points().filter(|x| x[0].abs() <= 2.0).map(GroupElement).collect();
    let sf = symbol_field(&a, &window, &[0.25, 0.125], &lattice, 2.0).unwrap();
    let field = OperatorField::from_symbol_field(&sf, Embedding::Frozen).unwrap();
    let rec = inverse_covariant(&field, PairingKind::Hardy, false).unwrap();
    let report = local_equiv(
        &a,
        &rec.operator,
        &GroupElement(vec![0.0]),
        &window,
        &[0.5, 0.25, 0.125, 0.0625],
        0,
        0.05,
        2.0,
    )
    .unwrap();
    assert!(report.verdict, "{:?}", report.decay);
}
