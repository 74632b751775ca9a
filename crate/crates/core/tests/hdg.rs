use porox::analysis::{field_error, ErrorQuadrature, Field, PostProcessed, Region};
use porox::discretization::Shape;
use porox::hdg::{
    post_process_fluid, post_process_scaled, recover_unscaled, HdgProblem, HdgSolution,
    SolverOptions, MONOLITHIC_ELEMENT_LIMIT,
};
use porox::mesh::{build_structured_mesh, BoxDomain, Mesh};
use porox::physics::{
    builtin_case, CaseParams, ManufacturedCase, PositiveRule, StabilizationPolicy,
};
use porox::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn case(name: &str) -> ManufacturedCase {
    builtin_case(name, &CaseParams::default()).unwrap()
}

fn mesh_for(case: &ManufacturedCase, shape: Shape, n: usize) -> Mesh {
    build_structured_mesh(&case.domain, shape, n).unwrap()
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a
        .iter()
        .chain(b)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

fn policies() -> Vec<StabilizationPolicy> {
    vec![
        StabilizationPolicy::Generalized(PositiveRule::ReciprocalH),
        StabilizationPolicy::Generalized(PositiveRule::Fixed(3.0)),
        StabilizationPolicy::Constant(1.0),
        StabilizationPolicy::ReciprocalH,
    ]
}

#[test]
fn monolithic_matches_condensed_for_every_case() {
    for (name, shape, n, k) in [
        ("nondeg2d", Shape::Quad, 2, 1),
        ("nondeg2d", Shape::Tri, 3, 2),
        ("degSmooth", Shape::Quad, 8, 2),
        ("degRough", Shape::Quad, 8, 1),
        ("constPoly", Shape::Quad, 3, 3),
        ("nondeg3d", Shape::Hex, 2, 1),
    ] {
        let c = case(name);
        let mesh = mesh_for(&c, shape, n);
        let problem = HdgProblem::new(&mesh, &c, k, SolverOptions::default()).unwrap();
        let sol = problem.solve().unwrap();
        let mono = problem.assemble_monolithic(None).unwrap().solve().unwrap();
        let d = max_rel_diff(&sol.to_vector(), &mono);
        assert!(d < 1e-10, "{name} {shape:?} n={n} k={k}: {d:e}");
    }
}

#[test]
fn random_rhs_gives_same_answer_on_both_paths() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 8);
    let problem = HdgProblem::new(&mesh, &c, 2, SolverOptions::default()).unwrap();
    let mut rhs = problem.zero_rhs();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for v in rhs.elements.iter_mut().chain(rhs.dirichlet.iter_mut()) {
        v.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    }
    let sol = problem.solve_with(Some(&rhs)).unwrap();
    let mono = problem
        .assemble_monolithic(Some(&rhs))
        .unwrap()
        .solve()
        .unwrap();
    assert!(max_rel_diff(&sol.to_vector(), &mono) < 1e-10);
}

#[test]
fn trace_matrix_is_the_schur_complement_of_the_monolithic_system() {
    let c = case("nondeg2d");
    let mesh = mesh_for(&c, Shape::Quad, 2);
    let problem = HdgProblem::new(&mesh, &c, 1, SolverOptions::default()).unwrap();
    let trace = problem
        .assemble_trace_system(&problem.condense_all(None).unwrap())
        .unwrap();
    let mono = problem.assemble_monolithic(None).unwrap().matrix.to_dense();
    let nf = problem.space.nf();
    let ne_dofs = mesh.elements.len() * problem.space.local_dofs();
    let interior: Vec<usize> = (0..mesh.faces.len())
        .filter(|&f| !mesh.faces[f].boundary)
        .flat_map(|f| (0..nf).map(move |m| ne_dofs + f * nf + m))
        .collect();
    let a = porox::linalg::DenseMatrix::from_fn(ne_dofs, ne_dofs, |i, j| mono[(i, j)]);
    let b =
        porox::linalg::DenseMatrix::from_fn(ne_dofs, interior.len(), |i, j| mono[(i, interior[j])]);
    let cm =
        porox::linalg::DenseMatrix::from_fn(interior.len(), ne_dofs, |i, j| mono[(interior[i], j)]);
    let ainv_b = a.lu().unwrap().solve(&b).unwrap();
    let cab = cm.matmul(&ainv_b).unwrap();
    let dense = trace.matrix.to_dense();
    for i in 0..interior.len() {
        for j in 0..interior.len() {
            let s = mono[(interior[i], interior[j])] - cab[(i, j)];
            assert!(
                (dense[(i, j)] - s).abs() < 1e-12 * (1.0 + s.abs()),
                "({i},{j})"
            );
        }
    }
}

#[test]
fn monolithic_size_guard() {
    let c = case("nondeg2d");
    let mesh = mesh_for(&c, Shape::Quad, 24);
    assert!(mesh.elements.len() > MONOLITHIC_ELEMENT_LIMIT);
    let problem = HdgProblem::new(&mesh, &c, 1, SolverOptions::default()).unwrap();
    assert!(matches!(
        problem.assemble_monolithic(None),
        Err(Error::SizeGuard { .. })
    ));
}

fn energy_gap(
    c: &ManufacturedCase,
    shape: Shape,
    n: usize,
    k: usize,
    options: SolverOptions,
    samples: usize,
) -> f64 {
    let mesh = mesh_for(c, shape, n);
    let problem = HdgProblem::new(&mesh, c, k, options).unwrap();
    let system = problem.assemble_monolithic(None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..system.rhs.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let (form, norm) = problem.energy_product(&system, &x);
        worst = worst.max((form - norm).abs() / norm);
    }
    worst
}

#[test]
fn energy_identity_holds_for_polynomial_coefficients() {
    let c = case("degSmooth");
    for policy in policies() {
        let gap = energy_gap(
            &c,
            Shape::Quad,
            8,
            2,
            SolverOptions::with_policy(policy.clone()),
            100,
        );
        assert!(gap < 1e-11, "{policy:?}: {gap:e}");
    }
    let gap = energy_gap(
        &case("constPoly"),
        Shape::Tri,
        3,
        2,
        SolverOptions::default(),
        100,
    );
    assert!(gap < 1e-11, "{gap:e}");
}

#[test]
fn energy_identity_on_exponential_porosity() {
    let c = case("nondeg2d");
    let gap = energy_gap(
        &c,
        Shape::Quad,
        4,
        2,
        SolverOptions::with_policy(StabilizationPolicy::Upwind),
        100,
    );
    assert!(gap < 1e-11, "{gap:e}");
}

#[test]
fn flipped_tau_breaks_the_energy_identity() {
    let c = case("degSmooth");
    let options = SolverOptions {
        flip_tau_sign: true,
        ..SolverOptions::default()
    };
    assert!(energy_gap(&c, Shape::Quad, 8, 1, options, 5) > 1e-3);
}

#[test]
fn zero_data_gives_zero_solution() {
    for (name, shape, n) in [
        ("degSmooth", Shape::Quad, 8),
        ("nondeg2d", Shape::Tri, 3),
        ("nondeg3d", Shape::Hex, 2),
    ] {
        let c = case(name);
        let mesh = mesh_for(&c, shape, n);
        for policy in policies() {
            let problem =
                HdgProblem::new(&mesh, &c, 2, SolverOptions::with_policy(policy)).unwrap();
            let sol = problem.solve_with(Some(&problem.zero_rhs())).unwrap();
            let size: f64 = sol.to_vector().iter().map(|v| v.abs()).sum();
            assert!(size < 1e-12, "{name}: {size:e}");
        }
    }
}

#[test]
fn polynomial_case_is_reproduced() {
    for (dim, shape, n) in [(2, Shape::Quad, 3), (2, Shape::Tri, 3), (3, Shape::Hex, 2)] {
        let c = builtin_case(
            "constPoly",
            &CaseParams {
                dim: Some(dim),
                ..Default::default()
            },
        )
        .unwrap();
        let mesh = mesh_for(&c, shape, n);
        for k in 1..=3 {
            let sol = HdgProblem::new(&mesh, &c, k, SolverOptions::default())
                .unwrap()
                .solve()
                .unwrap();
            let post =
                PostProcessed::compute(&mesh, &c, &sol, &[Field::PStar], &Region::All).unwrap();
            for f in [Field::P, Field::U, Field::PStar] {
                let e = field_error(
                    &mesh,
                    &c,
                    &sol,
                    &post,
                    f,
                    &Region::All,
                    ErrorQuadrature::default(),
                )
                .unwrap();
                assert!(e < 1e-10, "{shape:?} k={k} {}: {e:e}", f.label());
            }
        }
    }
}

#[test]
fn conservation_residual_after_solve() {
    for (name, shape, n) in [
        ("degSmooth", Shape::Quad, 16),
        ("nondeg2d", Shape::Tri, 4),
        ("degRough", Shape::Quad, 8),
    ] {
        let c = case(name);
        let mesh = mesh_for(&c, shape, n);
        let problem = HdgProblem::new(&mesh, &c, 2, SolverOptions::default()).unwrap();
        let sol = problem.solve().unwrap();
        assert!(problem.conservation_residual(&sol) < 1e-9, "{name}");
        assert!(sol.trace_residual < 1e-10);
    }
}

#[test]
fn perturbed_trace_shows_in_conservation_residual() {
    let c = case("nondeg2d");
    let mesh = mesh_for(&c, Shape::Quad, 4);
    let problem = HdgProblem::new(&mesh, &c, 1, SolverOptions::default()).unwrap();
    let mut sol = problem.solve().unwrap();
    let f = (0..mesh.faces.len())
        .find(|&f| !mesh.faces[f].boundary)
        .unwrap();
    let nf = problem.space.nf();
    for v in &mut sol.phat[f * nf..(f + 1) * nf] {
        *v += 1.0;
    }
    let r = problem.conservation_residual(&sol);
    let tau_measure = problem.tau_on(f, mesh.faces[f].owner.element)[0] * mesh.faces[f].measure;
    assert!(
        r > 0.05 * tau_measure && r < 10.0 * tau_measure,
        "{r} vs {tau_measure}"
    );
}

#[test]
fn one_phase_local_solve() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 16);
    let problem = HdgProblem::new(&mesh, &c, 2, SolverOptions::default()).unwrap();
    let e = (0..mesh.elements.len())
        .find(|&e| {
            let el = &mesh.elements[e];
            el.vertices.iter().all(|&v| c.one_phase(&mesh.vertices[v]))
                && el.faces.iter().all(|&f| !mesh.faces[f].boundary)
        })
        .unwrap();
    let mut local = problem.assemble_local(e);
    let sp = &problem.space;
    let eq = sp.element_quadrature(&mesh.elements[e]);
    let po = sp.dim * sp.nk();
    local.rhs.iter_mut().for_each(|v| *v = 0.0);
    for q in 0..eq.points.len() {
        for i in 0..sp.nk() {
            local.rhs[po + i] += eq.weights[q] * 2.0 * sp.vol_basis[(q, i)];
        }
    }
    let condensed = problem.condense(&local).unwrap();
    let lambda = vec![2.0; local.b.cols()];
    let x = condensed.recover(&lambda);
    for (i, v) in x.iter().enumerate() {
        let want = if i < po { 0.0 } else { 2.0 };
        assert!((v - want).abs() < 1e-12, "{i}: {v}");
    }
}

#[test]
fn velocity_block_is_the_mass_matrix() {
    let c = case("nondeg2d");
    let mesh = mesh_for(&c, Shape::Quad, 3);
    let problem = HdgProblem::new(&mesh, &c, 3, SolverOptions::default()).unwrap();
    let local = problem.assemble_local(4);
    let sp = &problem.space;
    let nk = sp.nk();
    let det = mesh.elements[4].map.det_abs();
    let rule = porox::discretization::make_quadrature(Shape::Quad, 10).unwrap();
    let phi = sp.element.basis_at(&rule.points);
    for d in 0..2 {
        for i in 0..nk {
            for j in 0..nk {
                let m: f64 = (0..rule.len())
                    .map(|q| rule.weights[q] * phi[(q, i)] * phi[(q, j)])
                    .sum::<f64>()
                    * det;
                assert!((local.a[(d * nk + i, d * nk + j)] - m).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn unit_coefficients_zero_data_give_zero_rhs() {
    let c = builtin_case("nondeg2d", &CaseParams::default()).unwrap();
    let mesh = build_structured_mesh(&BoxDomain::unit(2), Shape::Quad, 1).unwrap();
    let problem = HdgProblem::new(&mesh, &c, 1, SolverOptions::default()).unwrap();
    assert!(problem.zero_rhs().elements[0].iter().all(|v| *v == 0.0));
    assert_eq!(problem.trace_dofs(), 0);
    // all faces Dirichlet: nothing couples, the local solve alone determines the answer
    let sol = problem.solve().unwrap();
    assert!(sol.trace_residual == 0.0);
    assert_eq!(problem.condense_all(None).unwrap()[0].schur.rows(), 0);
}

#[test]
fn upwind_rejected_with_one_phase_faces() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 8);
    let err = HdgProblem::new(
        &mesh,
        &c,
        1,
        SolverOptions::with_policy(StabilizationPolicy::Upwind),
    )
    .err()
    .unwrap();
    assert!(matches!(err, Error::SingularStabilization { faces } if faces > 0));
    assert!(err.is_validation());
}

#[test]
fn misaligned_mesh_rejected() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 10);
    assert!(matches!(
        HdgProblem::new(&mesh, &c, 1, SolverOptions::default()),
        Err(Error::InterfaceMisaligned)
    ));
}

#[test]
fn post_processing_preserves_element_means() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 8);
    let sol = HdgProblem::new(&mesh, &c, 2, SolverOptions::default())
        .unwrap()
        .solve()
        .unwrap();
    let star = post_process_scaled(&mesh, &c, &sol).unwrap();
    let rule = porox::discretization::make_quadrature(Shape::Quad, 12).unwrap();
    let phi = sol.space.element.basis_at(&rule.points);
    for e in 0..mesh.elements.len() {
        let det = mesh.elements[e].map.det_abs();
        let mean_p: f64 = (0..rule.len())
            .map(|q| rule.weights[q] * sol.eval_with_basis(e, phi.row(q)).0)
            .sum::<f64>()
            * det;
        let mean_star = star.element_mean(&mesh, e).unwrap();
        assert!(
            (mean_star - mean_p).abs() < 1e-12 * mesh.elements[e].measure.max(1.0),
            "{e}"
        );
    }
    let region = Region::from_box(&[-0.5, -0.5], &[1.0, 1.0]).unwrap();
    let elements = region.elements(&mesh).unwrap();
    let fluid = post_process_fluid(&mesh, &c, &sol, &elements).unwrap();
    for &e in &elements {
        let pts = mesh.interior_samples(e);
        assert!(fluid.eval(&mesh, e, &pts[0]).is_some());
    }
}

#[test]
fn fluid_post_processing_refuses_degenerate_elements() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 8);
    let sol = HdgProblem::new(&mesh, &c, 1, SolverOptions::default())
        .unwrap()
        .solve()
        .unwrap();
    let all: Vec<usize> = (0..mesh.elements.len()).collect();
    assert!(matches!(
        post_process_fluid(&mesh, &c, &sol, &all),
        Err(Error::PostProcessRefused(_))
    ));
}

#[test]
fn zero_solution_post_processes_to_zero() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 8);
    let problem = HdgProblem::new(&mesh, &c, 1, SolverOptions::default()).unwrap();
    let sol = problem.solve().unwrap();
    let zero = HdgSolution::from_vector(&sol, &vec![0.0; sol.to_vector().len()]);
    let elements = Region::from_box(&[-0.5, -0.5], &[1.0, 1.0])
        .unwrap()
        .elements(&mesh)
        .unwrap();
    let fluid = post_process_fluid(&mesh, &c, &zero, &elements).unwrap();
    for &e in &elements {
        assert!(fluid.coeffs[e]
            .as_ref()
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-14));
    }
}

#[test]
fn unscaled_fields() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 8);
    let sol = HdgProblem::new(&mesh, &c, 2, SolverOptions::default())
        .unwrap()
        .solve()
        .unwrap();
    let e = (0..mesh.elements.len())
        .find(|&e| c.one_phase(&mesh.elements[e].centroid))
        .unwrap();
    let x = mesh.elements[e].centroid;
    assert_eq!(
        recover_unscaled(&mesh, &c, &sol, e, &[x])[0],
        (0.0, [0.0; 3])
    );
    // φ = 1 at (1/4, 1/4) for this porosity
    let x = [0.25, 0.25, 0.0];
    let e = (0..mesh.elements.len())
        .find(|&e| {
            let r = mesh.elements[e].map.inverse_map(&x);
            r[0].abs() <= 1.0 && r[1].abs() <= 1.0
        })
        .unwrap();
    let (pt, _) = recover_unscaled(&mesh, &c, &sol, e, &[x])[0];
    let (p, _) = sol.eval(&mesh, e, &x);
    assert!((pt - p).abs() < 1e-12);
}

#[test]
fn solves_are_deterministic() {
    let c = case("degSmooth");
    let mesh = mesh_for(&c, Shape::Quad, 8);
    let problem = HdgProblem::new(&mesh, &c, 2, SolverOptions::default()).unwrap();
    let a = problem.solve().unwrap().to_vector();
    let b = problem.solve().unwrap().to_vector();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}
