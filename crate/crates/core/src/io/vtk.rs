//! Legacy ASCII VTK unstructured grids.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

const VTK_TRIANGLE: u32 = 5;

/// Writes the mesh with nodal `solution` and per-cell `eta_t`.
pub fn write_vtk(path: &Path, title: &str, mesh: &Mesh, solution: &[f64], eta_t: &[f64]) -> Result<()> {
    if solution.len() != mesh.num_vertices() || eta_t.len() != mesh.num_triangles() {
        return Err(Error::InvalidArgument(format!(
            "VTK fields of length {}/{} do not fit a mesh with {} nodes and {} cells",
            solution.len(),
            eta_t.len(),
            mesh.num_vertices(),
            mesh.num_triangles()
        )));
    }
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let mut s = String::new();
    let nt = mesh.num_triangles();
    let _ = writeln!(s, "# vtk DataFile Version 2.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "{VTK_TRIANGLE}");
    }
    let _ = writeln!(s, "POINT_DATA {}\nSCALARS solution double 1\nLOOKUP_TABLE default", mesh.num_vertices());
    for v in solution {
        let _ = writeln!(s, "{v:.16e}");
    }
    let _ = writeln!(s, "CELL_DATA {nt}\nSCALARS eta_T double 1\nLOOKUP_TABLE default");
    for v in eta_t {
        let _ = writeln!(s, "{v:.16e}");
    }
    fs::write(path, s)?;
    Ok(())
}

/// Contents of a file written by [`write_vtk`].
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub solution: Vec<f64>,
    pub eta_t: Vec<f64>,
}

/// Reads back the subset of legacy VTK produced by [`write_vtk`].
pub fn read_vtk(path: &Path) -> Result<VtkData> {
    let text = fs::read_to_string(path)?;
    let bad = |what: &str| Error::InvalidArgument(format!("malformed VTK file {}: {what}", path.display()));
    let mut lines = text.lines().skip(4);
    let mut next = || lines.next().ok_or_else(|| bad("unexpected end"));
    let count = |line: &str, key: &str| -> Result<usize> {
        let mut it = line.split_whitespace();
        if it.next() != Some(key) {
            return Err(bad(&format!("expected {key}")));
        }
        it.next().and_then(|n| n.parse().ok()).ok_or_else(|| bad("bad count"))
    };
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad("bad number")) };

    let np = count(next()?, "POINTS")?;
    let mut points = Vec::with_capacity(np);
    for _ in 0..np {
        let v: Vec<&str> = next()?.split_whitespace().collect();
        if v.len() != 3 {
            return Err(bad("point"));
        }
        points.push([num(v[0])?, num(v[1])?]);
    }
    let nt = count(next()?, "CELLS")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let v: Vec<usize> = next()?
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| bad("cell")))
            .collect::<Result<_>>()?;
        if v.len() != 4 || v[0] != 3 {
            return Err(bad("cell"));
        }
        triangles.push([v[1], v[2], v[3]]);
    }
    if count(next()?, "CELL_TYPES")? != nt {
        return Err(bad("cell type count"));
    }
    for _ in 0..nt {
        if next()?.trim() != "5" {
            return Err(bad("cell type"));
        }
    }
    let mut scalars = |key: &str, n: usize| -> Result<Vec<f64>> {
        if count(next()?, key)? != n {
            return Err(bad("data count"));
        }
        next()?;
        next()?;
        (0..n).map(|_| num(next()?.trim())).collect()
    };
    let solution = scalars("POINT_DATA", np)?;
    let eta_t = scalars("CELL_DATA", nt)?;
    Ok(VtkData {
        points,
        triangles,
        solution,
        eta_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mesh = Mesh::macro_mesh(2).unwrap().refine(&[0]);
        let sol: Vec<f64> = (0..mesh.num_vertices()).map(|i| (i as f64).sin() / 3.0).collect();
        let eta: Vec<f64> = (0..mesh.num_triangles()).map(|i| 1e-7 * i as f64).collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.vtk");
        write_vtk(&p, "test", &mesh, &sol, &eta).unwrap();
        let d = read_vtk(&p).unwrap();
        assert_eq!(d.points, mesh.vertices());
        assert_eq!(d.triangles, mesh.triangles());
        assert_eq!(d.solution, sol);
        assert_eq!(d.eta_t, eta);
        assert!(write_vtk(&p, "x", &mesh, &sol[1..], &eta).is_err());
    }
}
