use crate::mesh::Mesh;

/// CSR sparsity of the P1 node graph of one mesh, plus the CSR slot of every
/// local (triangle, i, j) pair.
#[derive(Debug, Clone)]
pub struct Pattern {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    slots: Vec<[usize; 9]>,
}

impl Pattern {
    pub(crate) fn new(mesh: &Mesh) -> Pattern {
        let n = mesh.num_vertices();
        let mut adj: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for e in mesh.edges() {
            let [a, b] = e.vertices;
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for row in &mut adj {
            row.sort_unstable();
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let find = |i: usize, j: usize| -> usize {
            let r = &cols[row_ptr[i]..row_ptr[i + 1]];
            row_ptr[i] + r.binary_search(&j).expect("node pair missing from pattern")
        };
        let slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [0; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        s[3 * i + j] = find(tri[i], tri[j]);
                    }
                }
                s
            })
            .collect();
        Pattern { row_ptr, cols, slots }
    }

    /// Sums per-triangle 3×3 blocks into a CSR matrix. Local blocks may be
    /// computed in parallel; the scatter is sequential so the result does not
    /// depend on the thread count.
    pub(crate) fn assemble(
        &self,
        mesh: &Mesh,
        local: impl Fn(usize) -> [[f64; 3]; 3] + Sync + Send,
    ) -> SparseOperator {
        let blocks = crate::exec::map_elements(mesh.num_triangles(), local);
        let mut values = vec![0.0; self.cols.len()];
        for (block, slot) in blocks.iter().zip(&self.slots) {
            for i in 0..3 {
                for j in 0..3 {
                    values[slot[3 * i + j]] += block[i][j];
                }
            }
        }
        SparseOperator {
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            values,
        }
    }
}

/// Square sparse matrix in compressed row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Builds a CSR matrix from (row, col, value) triplets; duplicates add up.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> SparseOperator {
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols: Vec<usize> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &sorted {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside {dim}×{dim}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator { row_ptr, cols, values }
    }

    pub fn identity(dim: usize) -> SparseOperator {
        SparseOperator {
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            values: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        r.binary_search(&j)
            .map(|k| self.values[self.row_ptr[i] + k])
            .unwrap_or(0.0)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `alpha * self + beta * other`; both must share a sparsity pattern.
    pub fn linear_combination(&self, alpha: f64, other: &SparseOperator, beta: f64) -> SparseOperator {
        assert_eq!(self.cols, other.cols, "operators do not share a pattern");
        SparseOperator {
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        }
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.dim())
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        d
    }
}
