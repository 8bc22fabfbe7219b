use marginal_core::identity::{beta_limit_sweep, Branch};
use marginal_core::{build_mesh, Builtin, Domain, Kind, Mesh, Resolution};

const BETAS: [f64; 4] = [1e2, 1e3, 1e4, 1e5];

fn unit_interval() -> Mesh {
    build_mesh(&Domain::interval(0.0, 1.0).unwrap(), Resolution::Cells(64)).unwrap()
}

#[test]
fn quadratic_field_converges_at_first_order() {
    let mesh = unit_interval();
    let field = Builtin::new(
        Kind::QuadraticConvex {
            c: 1.0,
            t0: 0.0,
            x0: [0.0; 2],
        },
        1,
    )
    .unwrap();
    let sweep = beta_limit_sweep(&mesh, &field, 0.0, &BETAS, Branch::Convex).unwrap();
    for w in sweep.points.windows(2) {
        assert!(w[1].error.abs() < w[0].error.abs());
    }
    assert!((sweep.decay_exponent + 1.0).abs() <= 0.2, "{}", sweep.decay_exponent);
}

#[test]
fn constant_field_limits() {
    let mesh = unit_interval();
    let c = 1.0;
    let field = Builtin::constant(c, 1).unwrap();
    let convex = beta_limit_sweep(&mesh, &field, 0.0, &BETAS, Branch::Convex).unwrap();
    let concave = beta_limit_sweep(&mesh, &field, 0.0, &BETAS, Branch::Concave).unwrap();
    assert!((convex.target - c).abs() < 1e-12);
    assert!((concave.target + c).abs() < 1e-12);
    for sweep in [&convex, &concave] {
        let last = sweep.points.last().unwrap();
        assert!(last.error.abs() <= 1e-3);
        // Both branches expand as e(beta) = +-c^2 n / (2 beta^2) + O(beta^-3).
        for p in &sweep.points {
            let leading = c * c / (2.0 * p.beta * p.beta);
            assert!((p.error.abs() - leading).abs() <= 0.05 * leading, "{p:?}");
        }
    }
}

#[test]
fn concave_branch_on_quadratic_field() {
    let mesh = unit_interval();
    let field = Builtin::new(
        Kind::QuadraticConvex {
            c: 1.0,
            t0: 0.0,
            x0: [0.0; 2],
        },
        1,
    )
    .unwrap();
    let sweep = beta_limit_sweep(&mesh, &field, 0.0, &BETAS, Branch::Concave).unwrap();
    assert!(sweep.points.last().unwrap().error.abs() < 1e-5);
    assert!(sweep.target < 0.0);
}
