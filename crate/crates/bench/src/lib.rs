//! Benchmark fixtures shared by the criterion benches.

use marginal_core::{build_mesh, Builtin, Domain, Kind, Mesh, Resolution};

pub fn disk(radial: usize) -> Mesh {
    build_mesh(
        &Domain::disk([0.0, 0.0], 1.0).expect("unit disk"),
        Resolution::Polar {
            radial,
            angular: 2 * radial,
        },
    )
    .expect("disk mesh")
}

pub fn anisotropic() -> Builtin {
    Builtin::new(Kind::AnisotropicConvex { c: 1.0, v: [1.0, 0.0] }, 2).expect("valid field")
}
