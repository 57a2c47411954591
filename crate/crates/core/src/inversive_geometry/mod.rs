//! Oriented circles and spheres in inversive coordinates, Descartes tuples
//! and the Möbius group acting on them.

mod coords;
mod descartes;
mod mobius;

pub use coords::{
    bilinear, circle_from_center_radius, from_center_radius, inversive_product,
    line_from_normal_offset, plane_from_normal_offset, sphere_from_center_radius, tangency_point,
    Orientation, Oriented, OrientedCircle, OrientedSphere, COCURV, CURV,
};
pub use descartes::{
    dual_of, place_curvatures, reflect_coords, reflection_factor, standard_bounded_root,
    strip_root, twice_product, Coord, DescartesQuadruple, DescartesQuintuple, DescartesTuple,
};
pub use mobius::{CircleMap, MobiusMap, SphereMap};

/// Sphere root with curvatures `(-1, 2, 2, 3, 3)`: the enclosing unit sphere,
/// spheres of radius 1/2 at `(+-1/2, 0, 0)` and spheres of radius 1/3 at
/// `(0, 1/sqrt 3, +-1/3)`.
pub fn standard_sphere_root() -> DescartesQuintuple<f64> {
    let s3 = 3f64.sqrt();
    DescartesTuple {
        members: [
            [-1.0, 1.0, 0.0, 0.0, 0.0],
            [2.0, 0.0, 1.0, 0.0, 0.0],
            [2.0, 0.0, -1.0, 0.0, 0.0],
            [3.0, 1.0, 0.0, s3, 1.0],
            [3.0, 1.0, 0.0, s3, -1.0],
        ],
        scale: 1.0,
        incoming: None,
    }
}
