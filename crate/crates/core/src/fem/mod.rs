//! P1 Lagrange finite elements on [`Mesh`]: functions, exact assembly of the
//! mass and regularized total-variation operators, norms, the discrete energy
//! and transfer between meshes of one hierarchy.

mod sparse;

pub use sparse::{Pattern, SparseOperator};

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// The regularized Euclidean norm `sqrt(|v|² + ε²)`.
#[inline]
pub fn reg_norm(v: [f64; 2], eps: f64) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + eps * eps).sqrt()
}

/// Nodal coefficients of a continuous piecewise linear function, tagged with
/// the mesh instance they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct FeFunction {
    values: Vec<f64>,
    generation: u64,
    mesh_id: u64,
}

impl FeFunction {
    pub fn zeros(mesh: &Mesh) -> FeFunction {
        FeFunction::from_values(mesh, vec![0.0; mesh.num_vertices()])
            .expect("length matches by construction")
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<FeFunction> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a mesh with {} nodes",
                values.len(),
                mesh.num_vertices()
            )));
        }
        Ok(FeFunction {
            values,
            generation: mesh.generation(),
            mesh_id: mesh.id(),
        })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> FeFunction {
        let values = mesh.vertices().iter().map(|p| f(p[0], p[1])).collect();
        FeFunction::from_values(mesh, values).expect("length matches by construction")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Errors unless this function was built on `mesh`.
    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_id != mesh.id() || self.values.len() != mesh.num_vertices() {
            return Err(Error::MeshMismatch {
                expected: mesh.generation(),
                expected_len: mesh.num_vertices(),
                found: self.generation,
                found_len: self.values.len(),
            });
        }
        Ok(())
    }

    fn check_same(&self, other: &FeFunction) -> Result<()> {
        if self.mesh_id != other.mesh_id || self.values.len() != other.values.len() {
            return Err(Error::MeshMismatch {
                expected: self.generation,
                expected_len: self.values.len(),
                found: other.generation,
                found_len: other.values.len(),
            });
        }
        Ok(())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &FeFunction) -> Result<FeFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect();
        Ok(FeFunction { values, ..*self })
    }

    pub fn scaled(&self, alpha: f64) -> FeFunction {
        FeFunction {
            values: self.values.iter().map(|v| alpha * v).collect(),
            ..*self
        }
    }

    /// Sets all boundary coefficients to zero.
    pub fn zero_boundary(&mut self, mesh: &Mesh) {
        for (v, b) in self.values.iter_mut().zip(mesh.boundary_flags()) {
            if *b {
                *v = 0.0;
            }
        }
    }

    /// Constant gradient on triangle `t`.
    #[inline]
    pub fn gradient(&self, mesh: &Mesh, t: usize) -> [f64; 2] {
        let g = &mesh.geometry().triangles[t];
        let tri = mesh.triangles()[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            let u = self.values[tri[k]];
            out[0] += u * g.basis_gradients[k][0];
            out[1] += u * g.basis_gradients[k][1];
        }
        out
    }
}

/// `∫ φ_i φ_j` on one triangle.
#[inline]
pub fn local_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// Exact P1 mass matrix.
pub fn assemble_mass(mesh: &Mesh) -> SparseOperator {
    let geo = mesh.geometry();
    mesh.pattern().assemble(mesh, |t| local_mass(geo.triangles[t].area))
}

/// Exact P1 stiffness matrix weighted per triangle by `coef(t)`.
fn assemble_weighted_stiffness(mesh: &Mesh, coef: impl Fn(usize) -> f64 + Sync) -> SparseOperator {
    let geo = mesh.geometry();
    mesh.pattern().assemble(mesh, |t| {
        let g = &geo.triangles[t];
        let w = g.area * coef(t);
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let gi = g.basis_gradients[i];
                let gj = g.basis_gradients[j];
                k[i][j] = w * (gi[0] * gj[0] + gi[1] * gj[1]);
            }
        }
        k
    })
}

/// Standard Laplace stiffness `∫ ∇φ_i·∇φ_j`.
pub fn assemble_laplace(mesh: &Mesh) -> SparseOperator {
    assemble_weighted_stiffness(mesh, |_| 1.0)
}

/// Frozen-coefficient total-variation operator
/// `A(w)_ij = Σ_T |T| ∇φ_i·∇φ_j / |∇w|_T|_ε`.
pub fn assemble_tv_stiffness(mesh: &Mesh, w: &FeFunction, eps: f64) -> Result<SparseOperator> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("regularization must be positive, got {eps}")));
    }
    w.check_mesh(mesh)?;
    Ok(assemble_weighted_stiffness(mesh, |t| 1.0 / reg_norm(w.gradient(mesh, t), eps)))
}

/// Discrete regularized energy `Σ_T |T| |∇u|_ε + λ/2 ‖u − g‖²`.
pub fn energy(mesh: &Mesh, u: &FeFunction, g: &FeFunction, eps: f64, lambda: f64) -> Result<f64> {
    u.check_mesh(mesh)?;
    g.check_mesh(mesh)?;
    let geo = mesh.geometry();
    let tv: f64 = (0..mesh.num_triangles())
        .map(|t| geo.triangles[t].area * reg_norm(u.gradient(mesh, t), eps))
        .sum();
    let d = u.axpy(-1.0, g)?;
    Ok(tv + 0.5 * lambda * l2_norm_squared(mesh, &d)?)
}

/// `‖f‖²_{L²}` computed element by element.
pub fn l2_norm_squared(mesh: &Mesh, f: &FeFunction) -> Result<f64> {
    f.check_mesh(mesh)?;
    Ok(l2_squared_per_element(mesh, f.values()).iter().sum())
}

/// Exact `‖f‖²_{L²(T)}` for every triangle, from nodal values.
pub fn l2_squared_per_element(mesh: &Mesh, values: &[f64]) -> Vec<f64> {
    let geo = mesh.geometry();
    mesh.triangles()
        .iter()
        .zip(&geo.triangles)
        .map(|(tri, g)| {
            let [a, b, c] = tri.map(|v| values[v]);
            g.area / 12.0 * (a * a + b * b + c * c + (a + b + c).powi(2))
        })
        .collect()
}

pub fn l2_norm(mesh: &Mesh, f: &FeFunction) -> Result<f64> {
    Ok(l2_norm_squared(mesh, f)?.sqrt())
}

/// `‖∇f‖_{L²}`.
pub fn h1_seminorm(mesh: &Mesh, f: &FeFunction) -> Result<f64> {
    f.check_mesh(mesh)?;
    let geo = mesh.geometry();
    let s: f64 = (0..mesh.num_triangles())
        .map(|t| {
            let g = f.gradient(mesh, t);
            geo.triangles[t].area * (g[0] * g[0] + g[1] * g[1])
        })
        .sum();
    Ok(s.sqrt())
}

/// Nodal maximum of `|f − g|`, which is the exact sup-norm for P1.
pub fn linf_diff(f: &FeFunction, g: &FeFunction) -> Result<f64> {
    f.check_same(g)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Nodal interpolation of `f` (living on `from`) at the nodes of `to`.
///
/// Both meshes must come from the same macro mesh. A node of `to` missing
/// from `from` is the midpoint of an edge contained in one triangle of
/// `from`, so its value is the mean of the edge endpoint values, applied
/// recursively. This is exact whenever `to` refines `from`.
pub fn transfer(f: &FeFunction, from: &Mesh, to: &Mesh) -> Result<FeFunction> {
    f.check_mesh(from)?;
    if from.id() == to.id() {
        return Ok(f.clone());
    }
    if !from.shares_hierarchy(to) {
        return Err(Error::Internal("transfer between unrelated meshes".into()));
    }
    let mut cache: std::collections::HashMap<u32, f64> = std::collections::HashMap::new();
    let mut values = Vec::with_capacity(to.num_vertices());
    for v in 0..to.num_vertices() {
        let pool = to.pool_id(v);
        values.push(value_at_pool(f, from, to, pool, &mut cache)?);
    }
    FeFunction::from_values(to, values)
}

fn value_at_pool(
    f: &FeFunction,
    from: &Mesh,
    to: &Mesh,
    pool: u32,
    cache: &mut std::collections::HashMap<u32, f64>,
) -> Result<f64> {
    if let Some(n) = from.pool_node(pool) {
        return Ok(f.values[n]);
    }
    if let Some(&v) = cache.get(&pool) {
        return Ok(v);
    }
    // the newer mesh knows about every vertex either of them uses
    let parent = to
        .pool_parent(pool)
        .or_else(|| from.pool_parent(pool))
        .ok_or_else(|| Error::Internal(format!("vertex {pool} has no location in source mesh")))?;
    let a = value_at_pool(f, from, to, parent[0], cache)?;
    let b = value_at_pool(f, from, to, parent[1], cache)?;
    let v = 0.5 * (a + b);
    cache.insert(pool, v);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_function(mesh: &Mesh, seed: u64) -> FeFunction {
        let mut s = seed;
        let mut f = FeFunction::from_values(mesh, (0..mesh.num_vertices()).map(|_| lcg(&mut s)).collect()).unwrap();
        f.zero_boundary(mesh);
        f
    }

    #[test]
    fn local_mass_on_reference_triangle() {
        let m = local_mass(0.5);
        let expected = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - expected[i][j] / 24.0).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn mass_partition_of_unity() {
        let mesh = Mesh::macro_mesh(3).unwrap().refine(&[0, 7, 20]);
        let m = assemble_mass(&mesh);
        let ones = vec![1.0; mesh.num_vertices()];
        let total: f64 = m.matvec(&ones).iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        assert!((m.quadratic_form(&ones) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tv_stiffness_at_zero_is_scaled_laplace() {
        let mesh = Mesh::macro_mesh(2).unwrap();
        let eps = 0.1;
        let a = assemble_tv_stiffness(&mesh, &FeFunction::zeros(&mesh), eps).unwrap();
        let k = assemble_laplace(&mesh);
        for (x, y) in a.values().iter().zip(k.values()) {
            assert!((x - y / eps).abs() < 1e-12);
        }
        assert!(assemble_tv_stiffness(&mesh, &FeFunction::zeros(&mesh), 0.0).is_err());
    }

    #[test]
    fn large_eps_limit() {
        let mesh = Mesh::macro_mesh(2).unwrap();
        let w = random_function(&mesh, 3);
        let eps = 1e8;
        let a = assemble_tv_stiffness(&mesh, &w, eps).unwrap();
        let k = assemble_laplace(&mesh);
        for (x, y) in a.values().iter().zip(k.values()) {
            assert!((x * eps - y).abs() < 1e-10 * y.abs().max(1.0));
        }
    }

    #[test]
    fn energy_simple_values() {
        let mesh = Mesh::macro_mesh(2).unwrap();
        let z = FeFunction::zeros(&mesh);
        let eps = 0.25;
        assert!((energy(&mesh, &z, &z, eps, 7.0).unwrap() - eps).abs() < 1e-14);
        let g = random_function(&mesh, 11);
        let expected = eps + 3.5 * l2_norm_squared(&mesh, &g).unwrap();
        assert!((energy(&mesh, &z, &g, eps, 7.0).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn norms_of_simple_functions() {
        let mesh = Mesh::macro_mesh(4).unwrap();
        let one = FeFunction::interpolate(&mesh, |_, _| 1.0);
        assert!((l2_norm(&mesh, &one).unwrap() - 1.0).abs() < 1e-13);
        assert!(h1_seminorm(&mesh, &one).unwrap().abs() < 1e-13);
        let x = FeFunction::interpolate(&mesh, |x, _| x);
        assert!((h1_seminorm(&mesh, &x).unwrap() - 1.0).abs() < 1e-13);
        let y = FeFunction::interpolate(&mesh, |_, y| 2.0 * y);
        assert!((linf_diff(&x, &y).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn l2_matches_quadrature() {
        let mesh = Mesh::macro_mesh(3).unwrap().refine(&[1, 2, 30]);
        let f = random_function(&mesh, 5);
        let mut quad = 0.0;
        for t in 0..mesh.num_triangles() {
            let tri = mesh.triangles()[t];
            let area = mesh.geometry().triangles[t].area;
            for (b, w) in quadrature::DEGREE2 {
                let v: f64 = (0..3).map(|k| b[k] * f.values()[tri[k]]).sum();
                quad += area * w * v * v;
            }
        }
        let exact = l2_norm_squared(&mesh, &f).unwrap();
        assert!((quad - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn mismatched_meshes_are_rejected() {
        let a = Mesh::macro_mesh(2).unwrap();
        let b = a.refine(&[0]);
        let fa = FeFunction::zeros(&a);
        let fb = FeFunction::zeros(&b);
        assert!(linf_diff(&fa, &fb).is_err());
        assert!(l2_norm(&b, &fa).is_err());
    }

    #[test]
    fn transfer_identity_and_refinement() {
        let a = Mesh::macro_mesh(3).unwrap();
        let f = random_function(&a, 9);
        assert_eq!(transfer(&f, &a, &a).unwrap(), f);
        let b = a.refine(&[0, 4, 8, 17]).refine(&[2, 3]);
        let fb = transfer(&f, &a, &b).unwrap();
        let la = l2_norm(&a, &f).unwrap();
        let lb = l2_norm(&b, &fb).unwrap();
        assert!((la - lb).abs() < 1e-12);
        let ha = h1_seminorm(&a, &f).unwrap();
        let hb = h1_seminorm(&b, &fb).unwrap();
        assert!((ha - hb).abs() < 1e-12);
        // and back again
        let all: Vec<usize> = (0..b.num_triangles()).collect();
        let c = b.coarsen(&all);
        let c = c.coarsen(&(0..c.num_triangles()).collect::<Vec<_>>());
        assert_eq!(c.leaf_signature(), a.leaf_signature());
        let fc = transfer(&fb, &b, &c).unwrap();
        assert_eq!(fc.values(), f.values());
    }
}
