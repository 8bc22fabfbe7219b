//! Identity-level checks on the disk, where `u` is nontrivial.

use marginal_core::elliptic::{solve_for_measure, SolverOptions};
use marginal_core::identity::{
    certify, check_ibp_identities, solve_instance, term_boundary, verify_identity, Case, SolvedInstance, VerifyOptions,
};
use marginal_core::{build_measure, build_mesh, Builtin, Domain, Field, Kind, Mesh, Resolution};

fn disk(m: usize) -> Mesh {
    build_mesh(
        &Domain::disk([0.0, 0.0], 1.0).unwrap(),
        Resolution::Polar {
            radial: m,
            angular: 2 * m,
        },
    )
    .unwrap()
}

fn aniso() -> Builtin {
    Builtin::new(Kind::AnisotropicConvex { c: 1.0, v: [1.0, 0.0] }, 2).unwrap()
}

#[test]
fn three_way_spread_shrinks_under_refinement() {
    let spread = |m| {
        verify_identity(&disk(m), &aniso(), 0.0, 5.0, &VerifyOptions::default())
            .unwrap()
            .residuals
            .spread()
    };
    let (coarse, fine) = (spread(16), spread(32));
    assert!(fine <= 1e-2);
    assert!(coarse / fine >= 3.0, "{coarse} {fine}");
}

#[test]
fn ibp_residuals_shrink_under_refinement() {
    let field = aniso();
    let run = |m| {
        let mesh = disk(m);
        let inst = solve_instance(&mesh, &field, 0.0, 5.0, SolverOptions::default()).unwrap();
        check_ibp_identities(&mesh, &field, &inst).unwrap()
    };
    let (coarse, fine) = (run(16), run(32));
    for (c, f) in coarse.to_array().iter().zip(fine.to_array()) {
        assert!(f.residual < 1e-2, "{f:?}");
        assert!(c.residual / f.residual >= 3.0, "{c:?} {f:?}");
    }
}

#[test]
fn boundary_term_matches_normal_hessian_form() {
    let field = aniso();
    let beta = 5.0;
    let gap = |m| {
        let mesh = disk(m);
        let inst = solve_instance(&mesh, &field, 0.0, beta, SolverOptions::default()).unwrap();
        let t4 = term_boundary(&mesh, &inst.state, &inst.solution, beta).unwrap();
        let d = &inst.solution.derivatives.boundary;
        let flux: f64 = (0..mesh.boundary_nodes.len())
            .map(|j| inst.state.boundary_mu[j] * (d.hess[j] * d.grad[j]).dot(&mesh.normals[j]))
            .sum();
        let other = -(beta * beta / (beta - 2.0)) * flux;
        (t4 - other).abs() / t4.abs()
    };
    let (coarse, fine) = (gap(16), gap(32));
    assert!(fine < 1e-2 && coarse / fine >= 3.0, "{coarse} {fine}");
}

#[test]
fn drift_free_square_identity() {
    // With phi = 1 the drift vanishes and the identity reads
    // 0 = int (f - Lap u)^2, which the solver satisfies to discretization error.
    let mesh = disk(64);
    let one = Builtin::constant(1.0, 2).unwrap();
    let state = build_measure(&mesh, &one, 0.0, 5.0).unwrap();
    let f: Vec<f64> = mesh.interior_nodes.iter().map(|p| p[0]).collect();
    let solution = solve_for_measure(&mesh, &one, &state, &f, SolverOptions::default()).unwrap();
    let inst = SolvedInstance {
        t: 0.0,
        beta: 5.0,
        g: f.clone(),
        mean_g: 0.0,
        f,
        state,
        solution,
    };
    let r = check_ibp_identities(&mesh, &one, &inst).unwrap();
    assert_eq!(r.drift_square.lhs, 0.0);
    assert!(r.drift_square.residual <= 1e-6, "{:?}", r.drift_square);
}

#[test]
fn convex_certificate_on_disk() {
    let mesh = disk(16);
    let field = Builtin::new(
        Kind::QuadraticConvex {
            c: 1.0,
            t0: 0.0,
            x0: [0.2, -0.1],
        },
        2,
    )
    .unwrap();
    let grid: Vec<f64> = (0..11).map(|i| -0.5 + 0.1 * i as f64).collect();
    let cert = certify(Case::Convex, &mesh, &field, &grid, 5.0, &VerifyOptions::default()).unwrap();
    assert_eq!(cert.entries.len(), 11);
    for e in &cert.entries {
        assert!(e.pass(), "{e:?}");
        for v in e.terms.to_array() {
            assert!(v >= -1e-8);
        }
        assert!(e.phi2 >= 0.0);
    }
}

#[test]
fn anisotropic_field_drives_nontrivial_solution() {
    let mesh = disk(16);
    let field = aniso();
    assert_eq!(field.name(), "anisotropic_convex");
    let inst = solve_instance(&mesh, &field, 0.0, 5.0, SolverOptions::default()).unwrap();
    let max_u = inst.solution.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_u > 1e-3);
    assert!(inst.solution.diagnostics.gauge.abs() < 1e-12);
    for (h, l) in inst.solution.hess_u().iter().zip(inst.solution.lap_u()) {
        assert!((h.trace() - l).abs() < 1e-10);
    }
}
