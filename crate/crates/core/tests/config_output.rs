use porox::analysis::{ConvergenceTable, Field, Region};
use porox::config::{parse_config, RawConfig};
use porox::discretization::Shape;
use porox::hdg::{HdgProblem, SolverOptions};
use porox::mesh::build_structured_mesh;
use porox::output::{sampling_points, write_fields, write_table};
use porox::physics::{builtin_case, CaseParams, PositiveRule, StabilizationPolicy};
use porox::verify::{run_verify, VerifyOptions};

#[test]
fn degenerate_study_config() {
    let c = parse_config(
        r#"{"case":"degSmooth","k":[1,2,3,4],"n":[16,32,64,128]}"#,
        RawConfig::default(),
    )
    .unwrap();
    assert_eq!(c.case.name, "degSmooth");
    assert_eq!(c.ks, vec![1, 2, 3, 4]);
    assert_eq!(c.ns, vec![16, 32, 64, 128]);
    assert_eq!(c.shape, Shape::Quad);
    assert_eq!(
        c.options.policy,
        StabilizationPolicy::Generalized(PositiveRule::ReciprocalH)
    );
    assert_eq!(c.options.quadrature_boost, 4);
    assert_eq!(c.regions, vec![Region::All]);
}

#[test]
fn upwind_config_for_nondegenerate_case() {
    let c = parse_config(
        r#"{"case":"nondeg2d","m":[2,3],"tau":"upwind"}"#,
        RawConfig::default(),
    )
    .unwrap();
    assert_eq!(c.options.policy, StabilizationPolicy::Upwind);
}

#[test]
fn upwind_on_degenerate_case_fails_at_solve_time() {
    let c = parse_config(
        r#"{"case":"degSmooth","tau":"upwind","n":8,"k":1}"#,
        RawConfig::default(),
    )
    .unwrap();
    let mesh = build_structured_mesh(&c.case.domain, c.shape, c.ns[0]).unwrap();
    let err = HdgProblem::new(&mesh, &c.case, 1, c.options.clone())
        .err()
        .unwrap();
    assert!(err.is_validation());
    assert!(err.to_string().contains("generalized"));
}

#[test]
fn strict_keys_and_ranges() {
    for bad in [
        r#"{"cas":"degSmooth"}"#,
        r#"{"k":[0]}"#,
        r#"{"n":[]}"#,
        r#"{"case":"nope"}"#,
        r#"{"tau":"constant"}"#,
        r#"{"tau":"upwind","gamma":2}"#,
        r#"{"fields":["pressure"]}"#,
        r#"{"case":"nondeg3d","shape":"quad"}"#,
        r#"{"regions":[{"lo":[0],"hi":[1]}]}"#,
    ] {
        let err = parse_config(bad, RawConfig::default())
            .err()
            .unwrap_or_else(|| panic!("{bad}"));
        assert!(err.is_validation(), "{bad}: {err}");
    }
}

#[test]
fn flags_override_file() {
    let flags = RawConfig {
        k: Some(porox::config::OneOrMany::One(3)),
        tau: Some("constant".into()),
        tau_value: Some(10.0),
        ..Default::default()
    };
    let c = parse_config(r#"{"k":[1,2],"tau":"1/h"}"#, flags).unwrap();
    assert_eq!(c.ks, vec![3]);
    assert_eq!(c.options.policy, StabilizationPolicy::Constant(10.0));
}

#[test]
fn empty_config_uses_defaults() {
    let c = parse_config("", RawConfig::default()).unwrap();
    assert_eq!(c.case.name, "nondeg2d");
    assert_eq!(c.sampling, 1);
    let c = parse_config("{}", RawConfig::default()).unwrap();
    assert_eq!(c.fields, vec![Field::P, Field::U]);
}

#[test]
fn regions_and_fields_parse() {
    let c = parse_config(
        r#"{"case":"degSmooth","regions":["all",{"lo":[-0.5,-0.5],"hi":[1,1]}],"fields":["p","pstar","ptildestar"]}"#,
        RawConfig::default(),
    )
    .unwrap();
    assert_eq!(c.regions.len(), 2);
    assert_eq!(c.fields, vec![Field::P, Field::PStar, Field::PTildeStar]);
}

fn csv(table: &ConvergenceTable) -> String {
    let mut out = Vec::new();
    write_table(table, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn table_format() {
    let mut t = ConvergenceTable::new("nondeg2d", &[Field::P, Field::U, Field::PStar]);
    t.push(2, 32, 1.0 / 32.0, Ok(vec![1.0667e-3, 2.734e-2, 5.0e-4]));
    let text = csv(&t);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "k,h,err_p,rate_p,err_u,rate_u,err_pstar,rate_pstar"
    );
    assert_eq!(lines[1], "2,0.031250,1.067e-3,,2.734e-2,,5.000e-4,");
    t.push(
        2,
        64,
        1.0 / 64.0,
        Ok(vec![1.0667e-3 / 4.0, 2.734e-2 / 8.0, 5.0e-4 / 16.0]),
    );
    t.push(2, 128, 1.0 / 128.0, Err("singular".into()));
    let text = csv(&t);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[2],
        "2,0.015625,2.667e-4,2.000,3.417e-3,3.000,3.125e-5,4.000"
    );
    assert_eq!(lines[3], "2,0.007812,FAILED,,FAILED,,FAILED,");
    assert!(write_table(&ConvergenceTable::new("x", &[Field::P]), Vec::new()).is_err());
}

#[test]
fn sampling_density_one_is_the_centroid() {
    assert_eq!(sampling_points(Shape::Quad, 1), vec![[0.0, 0.0, 0.0]]);
    let t = sampling_points(Shape::Tri, 1);
    assert_eq!(t.len(), 1);
    assert!((t[0][0] - 1.0 / 3.0).abs() < 1e-15 && (t[0][1] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(sampling_points(Shape::Tri, 3).len(), 9);
    assert_eq!(sampling_points(Shape::Hex, 2).len(), 8);
}

#[test]
fn field_dump_of_degenerate_case() {
    let case = builtin_case("degSmooth", &CaseParams::default()).unwrap();
    let mesh = build_structured_mesh(&case.domain, Shape::Quad, 8).unwrap();
    let sol = HdgProblem::new(&mesh, &case, 2, SolverOptions::default())
        .unwrap()
        .solve()
        .unwrap();
    let mut out = Vec::new();
    write_fields(&mesh, &case, &sol, 2, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "x,y,p,u1,u2,ptilde");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 64 * 4);
    for r in &rows {
        if case.one_phase(&[r[0], r[1], 0.0]) {
            assert_eq!(r[5], 0.0);
        }
    }
}

#[test]
fn single_element_constant_dump() {
    let case = builtin_case("constPoly", &CaseParams::default()).unwrap();
    let mesh = build_structured_mesh(&case.domain, Shape::Quad, 1).unwrap();
    let problem = HdgProblem::new(&mesh, &case, 1, SolverOptions::default()).unwrap();
    let mut sol = problem.solve().unwrap();
    sol.p.iter_mut().for_each(|v| *v = 1.5);
    sol.u.iter_mut().for_each(|v| *v = -2.0);
    let mut out = Vec::new();
    write_fields(&mesh, &case, &sol, 3, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    for line in text.lines().skip(2) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(
            (v[2] - 1.5).abs() < 1e-12 && (v[3] + 2.0).abs() < 1e-12 && (v[4] + 2.0).abs() < 1e-12
        );
    }
}

#[test]
fn quick_verify_passes() {
    let results = run_verify(VerifyOptions {
        quick: true,
        flip_tau_sign: false,
    });
    assert_eq!(results.len(), 7);
    for r in &results {
        assert!(r.passed, "{}: {:e}", r.name, r.value);
    }
}

#[test]
fn flipped_tau_fails_the_energy_check() {
    let results = run_verify(VerifyOptions {
        quick: true,
        flip_tau_sign: true,
    });
    let energy = results
        .iter()
        .find(|r| r.name == "energy identity")
        .unwrap();
    assert!(!energy.passed);
}
