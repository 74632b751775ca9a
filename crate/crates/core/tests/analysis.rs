use porox::analysis::{
    field_error, interpolant_rates, l2_error, rates, run_study, ConvergenceTable, ErrorQuadrature,
    Field, PostProcessed, Rate, Region, StudySpec,
};
use porox::discretization::Shape;
use porox::hdg::{l2_projection, HdgProblem, SolverOptions};
use porox::mesh::{build_structured_mesh, BoxDomain};
use porox::physics::{builtin_case, CaseParams};
use porox::Error;

fn value(r: Rate) -> f64 {
    r.value().unwrap()
}

#[test]
fn rate_examples() {
    let r = rates(&[1e-2, 2.5e-3], &[0.5, 0.25]).unwrap();
    assert_eq!(r[0], Rate::Absent);
    assert!((value(r[1]) - 2.0).abs() < 1e-12);
    let r = rates(&[7.534e-1, 2.188e-1], &[0.125, 0.0625]).unwrap();
    assert!((value(r[1]) - 1.784).abs() < 5e-4);
    let r = rates(&[3.0, 3.0], &[0.2, 0.1]).unwrap();
    assert_eq!(value(r[1]), 0.0);
    assert_eq!(rates(&[1.0, 0.0], &[0.2, 0.1]).unwrap()[1], Rate::Exact);
}

#[test]
fn rate_input_validation() {
    assert!(rates(&[1.0, 0.5], &[0.1, 0.2]).is_err());
    assert!(rates(&[-1.0, 0.5], &[0.2, 0.1]).is_err());
    assert!(rates(&[1.0], &[0.2, 0.1]).is_err());
}

#[test]
fn l2_error_of_shifted_field() {
    let mesh = build_structured_mesh(&BoxDomain::unit(2), Shape::Quad, 4).unwrap();
    let f = |x: &porox::discretization::Point| x[0] * x[1];
    let proj = l2_projection(&mesh, 2, f).unwrap();
    assert!(l2_error(&mesh, &proj, f, &Region::All, 8).unwrap() < 1e-14);
    for c in [0.5, -2.0] {
        let e = l2_error(&mesh, &proj, |x| f(x) + c, &Region::All, 8).unwrap();
        assert!((e - c.abs()).abs() < 1e-12);
    }
}

#[test]
fn error_scales_linearly() {
    let mesh = build_structured_mesh(&BoxDomain::unit(2), Shape::Tri, 4).unwrap();
    let f = |x: &porox::discretization::Point| (3.0 * x[0]).sin() * x[1];
    let proj = l2_projection(&mesh, 1, f).unwrap();
    let base = l2_error(&mesh, &proj, f, &Region::All, 8).unwrap();
    let mut scaled = proj.clone();
    for c in scaled.coeffs.iter_mut().flatten() {
        c.iter_mut().for_each(|v| *v *= -3.0);
    }
    let e = l2_error(&mesh, &scaled, |x| -3.0 * f(x), &Region::All, 8).unwrap();
    assert!((e - 3.0 * base).abs() < 1e-12 * e);
}

#[test]
fn regions_must_follow_element_edges() {
    let mesh = build_structured_mesh(
        &BoxDomain::new(&[-1.0, -1.0], &[1.0, 1.0]).unwrap(),
        Shape::Quad,
        8,
    )
    .unwrap();
    let good = Region::from_box(&[-0.5, -0.5], &[1.0, 1.0]).unwrap();
    assert_eq!(good.elements(&mesh).unwrap().len(), 36);
    let bad = Region::from_box(&[-0.6, -0.5], &[1.0, 1.0]).unwrap();
    assert!(matches!(
        bad.elements(&mesh),
        Err(Error::RegionNotAligned(_))
    ));
    assert_eq!(Region::All.elements(&mesh).unwrap().len(), 64);
}

#[test]
fn interpolant_rates_are_optimal() {
    let case = builtin_case("nondeg2d", &CaseParams::default()).unwrap();
    for k in 1..=3 {
        let r = interpolant_rates(&case, Shape::Quad, k, &[8, 16, 32]).unwrap();
        let last = value(*r.last().unwrap());
        assert!((last - (k as f64 + 1.0)).abs() < 0.1, "k={k}: {last}");
    }
}

#[test]
fn doubling_error_quadrature_barely_moves_smooth_errors() {
    let case = builtin_case("degSmooth", &CaseParams::default()).unwrap();
    let mesh = build_structured_mesh(&case.domain, Shape::Quad, 16).unwrap();
    let sol = HdgProblem::new(&mesh, &case, 2, SolverOptions::default())
        .unwrap()
        .solve()
        .unwrap();
    let post = PostProcessed::default();
    for f in [Field::P, Field::U] {
        let a = field_error(
            &mesh,
            &case,
            &sol,
            &post,
            f,
            &Region::All,
            ErrorQuadrature::default(),
        )
        .unwrap();
        let b = field_error(
            &mesh,
            &case,
            &sol,
            &post,
            f,
            &Region::All,
            ErrorQuadrature::default().doubled(),
        )
        .unwrap();
        assert!((a - b).abs() < 0.005 * b, "{}: {a} vs {b}", f.label());
    }
}

#[test]
fn study_rows_and_rates() {
    let case = builtin_case("nondeg2d", &CaseParams::default()).unwrap();
    let mut spec = StudySpec::new(case, &[1, 2], &[4, 8]);
    spec.options = SolverOptions::with_policy(porox::physics::StabilizationPolicy::Upwind);
    let table = run_study(&spec).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.rows[0].rates, vec![Rate::Absent; 2]);
    assert!(matches!(table.rows[1].rates[0], Rate::Value(_)));
    assert_eq!(table.rows[2].rates, vec![Rate::Absent; 2]);
    assert!(table.finest(2, Field::P).is_some());
}

#[test]
fn failed_cells_become_failed_rows() {
    let case = builtin_case("degSmooth", &CaseParams::default()).unwrap();
    // n = 10 does not align with the interface
    let spec = StudySpec::new(case, &[1], &[8, 10, 16]);
    let table = run_study(&spec).unwrap();
    assert!(table.rows[1].errors.is_err());
    assert!(table.rows[2].errors.is_ok());
    assert!(matches!(table.rows[2].rates[0], Rate::Value(_)));
}

#[test]
fn table_lookup() {
    let mut t = ConvergenceTable::new("x", &[Field::P]);
    t.push(1, 4, 0.25, Ok(vec![1e-2]));
    t.push(1, 8, 0.125, Ok(vec![2.5e-3]));
    assert_eq!(t.error(1, 8, Field::P), Some(2.5e-3));
    let (e, r) = t.finest(1, Field::P).unwrap();
    assert_eq!(e, 2.5e-3);
    assert!((value(r) - 2.0).abs() < 1e-12);
    assert!(t.finest(1, Field::U).is_none());
}
