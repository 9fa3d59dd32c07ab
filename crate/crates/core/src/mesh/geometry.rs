use super::Mesh;

/// Per-triangle data for P1 elements.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub area: f64,
    /// Longest edge length.
    pub diameter: f64,
    /// Gradients of the three nodal basis functions (constant on the triangle).
    pub basis_gradients: [[f64; 2]; 3],
}

/// Per-edge data.
#[derive(Debug, Clone, Copy)]
pub struct EdgeGeometry {
    pub length: f64,
    /// Unit normal pointing from `triangles[0]` towards `triangles[1]`
    /// (outward for boundary edges).
    pub normal: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Geometry {
    pub triangles: Vec<TriangleGeometry>,
    pub edges: Vec<EdgeGeometry>,
}

/// Area and basis gradients of a triangle given by its corners.
pub(crate) fn triangle_geometry(c: &[[f64; 2]; 3]) -> TriangleGeometry {
    let [p0, p1, p2] = *c;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let len = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let diameter = len(p0, p1).max(len(p1, p2)).max(len(p2, p0));
    let basis_gradients = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    TriangleGeometry {
        area: 0.5 * det,
        diameter,
        basis_gradients,
    }
}

impl Geometry {
    pub(crate) fn new(mesh: &Mesh) -> Geometry {
        let triangles: Vec<TriangleGeometry> = crate::exec::map_elements(mesh.num_triangles(), |t| {
            let g = triangle_geometry(&mesh.corners(t));
            assert!(g.area > 0.0, "degenerate triangle {t}");
            g
        });
        let v = mesh.vertices();
        let edges = mesh
            .edges()
            .iter()
            .map(|e| {
                let a = v[e.vertices[0]];
                let b = v[e.vertices[1]];
                let d = [b[0] - a[0], b[1] - a[1]];
                let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let mut normal = [d[1] / length, -d[0] / length];
                // orient away from the first triangle's barycenter
                let c = mesh.barycenter(e.triangles[0]);
                if normal[0] * (a[0] - c[0]) + normal[1] * (a[1] - c[1]) < 0.0 {
                    normal = [-normal[0], -normal[1]];
                }
                EdgeGeometry { length, normal }
            })
            .collect();
        Geometry { triangles, edges }
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(mesh: &Mesh) -> f64 {
        (0..mesh.num_triangles())
            .map(|t| {
                let c = mesh.corners(t);
                (0..3)
                    .map(|k| {
                        let o = c[k];
                        let a = c[(k + 1) % 3];
                        let b = c[(k + 2) % 3];
                        let u = [a[0] - o[0], a[1] - o[1]];
                        let w = [b[0] - o[0], b[1] - o[1]];
                        let cos = (u[0] * w[0] + u[1] * w[1])
                            / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (w[0] * w[0] + w[1] * w[1]).sqrt());
                        cos.clamp(-1.0, 1.0).acos()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}
