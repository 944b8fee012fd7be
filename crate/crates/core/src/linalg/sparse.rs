use crate::error::{Error, Result};

/// Symmetric sparse matrix in compressed-row form. The full pattern is
/// stored; the value at `(j, i)` is a copy of the value at `(i, j)`, so the
/// matrix is exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    max_norm: f64,
}

/// Accumulates upper-triangle contributions `(i <= j)` in insertion order.
#[derive(Debug, Clone, Default)]
pub struct SymTriplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymTriplets {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    /// Adds `v` at `(i, j)` and implicitly at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((a, b, v));
    }

    pub fn build(mut self) -> SparseSym {
        // stable sort: duplicates are summed in insertion order
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for (i, j, v) in self.entries {
            match upper.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => upper.push((i, j, v)),
            }
        }
        SparseSym::from_upper(self.n, &upper)
    }
}

impl SparseSym {
    /// Builds from unique, sorted upper-triangle entries.
    fn from_upper(n: usize, upper: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n];
        for &(i, j, _) in upper {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let nnz = row_ptr[n];
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        let mut fill = row_ptr[..n].to_vec();
        // Lower entries of row j come from (i, j) with i < j, visited in
        // increasing i; upper entries of row i come in increasing j. Emitting
        // lower before upper per row keeps columns sorted.
        for &(i, j, v) in upper {
            if i != j {
                cols[fill[j]] = i;
                vals[fill[j]] = v;
                fill[j] += 1;
            }
        }
        for &(i, j, v) in upper {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
        }
        let max_norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            n,
            row_ptr,
            cols,
            vals,
            max_norm,
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut upper = Vec::new();
        let mut asym = 0.0f64;
        for i in 0..n {
            if a[i].len() != n {
                return Err(Error::DimensionMismatch("matrix is not square".into()));
            }
            for j in i..n {
                asym = asym.max((a[i][j] - a[j][i]).abs());
                if a[i][j] != 0.0 {
                    upper.push((i, j, a[i][j]));
                }
            }
        }
        if asym > 0.0 {
            return Err(Error::Asymmetric(asym));
        }
        Ok(Self::from_upper(n, &upper))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_upper(n, &[])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Upper-triangle entries in row-major order.
    fn upper_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz() / 2 + self.n);
        for i in 0..self.n {
            out.extend(self.row(i).filter(|&(j, _)| j >= i).map(|(j, v)| (i, j, v)));
        }
        out
    }

    /// `self + s * other` on the union pattern.
    pub fn add_scaled(&self, other: &SparseSym, s: f64) -> Result<SparseSym> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, other.n)));
        }
        let mut t = SymTriplets::new(self.n);
        t.entries = self.upper_entries();
        t.entries
            .extend(other.upper_entries().into_iter().map(|(i, j, v)| (i, j, s * v)));
        Ok(t.build())
    }

    /// Appends one row and column holding `c`, with a zero corner.
    pub fn bordered(&self, c: &[f64]) -> Result<SparseSym> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "border of length {} for matrix of size {}",
                c.len(),
                self.n
            )));
        }
        let n = self.n + 1;
        let mut t = SymTriplets::new(n);
        t.entries = self.upper_entries();
        t.entries.extend(
            c.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, &v)| (i, self.n, v)),
        );
        Ok(t.build())
    }

    /// `diag(s) * A * diag(s)`.
    pub fn scale_symmetric(&self, s: &[f64]) -> SparseSym {
        let upper: Vec<_> = self
            .upper_entries()
            .into_iter()
            .map(|(i, j, v)| (i, j, s[i] * v * s[j]))
            .collect();
        SparseSym::from_upper(self.n, &upper)
    }

    /// Leading `m x m` block.
    pub fn leading_block(&self, m: usize) -> SparseSym {
        let upper: Vec<_> = self
            .upper_entries()
            .into_iter()
            .filter(|&(i, j, _)| i < m && j < m)
            .collect();
        SparseSym::from_upper(m.min(self.n), &upper)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// Largest `|a_ij - a_ji|`; zero by construction, kept for verification.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Coordinate text dump, one `row col value` triple per line.
    pub fn write_coordinate<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}
