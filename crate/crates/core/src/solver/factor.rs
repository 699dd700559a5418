//! Basis factorization for the revised simplex.
//!
//! Basic slack columns are unit vectors, so only the block of structural
//! basic columns restricted to rows without a basic slack (the kernel) needs
//! an LU factorization. Basis changes after a refactorization are kept as
//! product-form eta vectors.

use super::simplex::Matrix;

const SINGULAR_TOLERANCE: f64 = 1e-11;
const ETA_DROP: f64 = 1e-14;

/// Dense LU with partial pivoting: `P K = L U`, unit lower `L`.
#[derive(Debug, Clone)]
struct DenseLu {
    k: usize,
    /// Row-major; strictly lower part holds `L`, the rest `U`.
    lu: Vec<f64>,
    /// `perm[i]` is the row of `K` moved to position `i`.
    perm: Vec<usize>,
}

impl DenseLu {
    fn factor(k: usize, mut a: Vec<f64>) -> Option<DenseLu> {
        let mut perm: Vec<usize> = (0..k).collect();
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        for s in 0..k {
            let (mut best, mut best_abs) = (s, a[s * k + s].abs());
            for i in s + 1..k {
                let v = a[i * k + s].abs();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if best_abs <= SINGULAR_TOLERANCE * scale {
                return None;
            }
            if best != s {
                for c in 0..k {
                    a.swap(s * k + c, best * k + c);
                }
                perm.swap(s, best);
            }
            let pivot = a[s * k + s];
            for i in s + 1..k {
                let f = a[i * k + s] / pivot;
                if f == 0.0 {
                    continue;
                }
                a[i * k + s] = f;
                let (upper, lower) = a.split_at_mut(i * k);
                let src = &upper[s * k + s + 1..s * k + k];
                let dst = &mut lower[s + 1..k];
                for (d, &u) in dst.iter_mut().zip(src) {
                    *d -= f * u;
                }
            }
        }
        Some(DenseLu { k, lu: a, perm })
    }

    /// Solves `K x = b` in place.
    fn solve(&self, b: &mut [f64]) {
        let k = self.k;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..k {
            let row = &self.lu[i * k..i * k + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..k).rev() {
            let row = &self.lu[i * k + i + 1..(i + 1) * k];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * k + i];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `K^T w = c` in place.
    fn solve_transpose(&self, c: &mut [f64]) {
        let k = self.k;
        let mut v = c.to_vec();
        // U^T v' = c, forward.
        for i in 0..k {
            let vi = v[i] / self.lu[i * k + i];
            v[i] = vi;
            if vi != 0.0 {
                for j in i + 1..k {
                    v[j] -= self.lu[i * k + j] * vi;
                }
            }
        }
        // L^T z = v', backward.
        for i in (0..k).rev() {
            let zi = v[i];
            if zi != 0.0 {
                for j in 0..i {
                    v[j] -= self.lu[i * k + j] * zi;
                }
            }
        }
        for (i, &p) in self.perm.iter().enumerate() {
            c[p] = v[i];
        }
    }
}

#[derive(Debug, Clone)]
struct Eta {
    position: usize,
    pivot: f64,
    /// Off-pivot entries of the entering column, by basis position.
    entries: Vec<(usize, f64)>,
}

/// Factorization of a basis given as the variable held at each position.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    m: usize,
    kernel: DenseLu,
    kernel_rows: Vec<usize>,
    /// Positions of structural basics, in kernel column order.
    kernel_positions: Vec<usize>,
    kernel_vars: Vec<usize>,
    /// Basis position of the slack of each row, if that slack is basic.
    slack_position: Vec<Option<usize>>,
    etas: Vec<Eta>,
}

impl Factor {
    /// `None` when the basis matrix is numerically singular.
    pub(crate) fn new(matrix: &Matrix, basis: &[usize]) -> Option<Factor> {
        let m = matrix.rows;
        let n = matrix.structural;
        let mut slack_position = vec![None; m];
        let mut kernel_positions = Vec::new();
        let mut kernel_vars = Vec::new();
        for (p, &var) in basis.iter().enumerate() {
            if var >= n {
                slack_position[var - n] = Some(p);
            } else {
                kernel_positions.push(p);
                kernel_vars.push(var);
            }
        }
        let kernel_rows: Vec<usize> = (0..m).filter(|&i| slack_position[i].is_none()).collect();
        let k = kernel_rows.len();
        if k != kernel_vars.len() {
            return None;
        }
        let mut row_to_kernel = vec![usize::MAX; m];
        for (a, &i) in kernel_rows.iter().enumerate() {
            row_to_kernel[i] = a;
        }
        let mut dense = vec![0.0; k * k];
        for (b, &var) in kernel_vars.iter().enumerate() {
            for (i, v) in matrix.column(var) {
                let a = row_to_kernel[i];
                if a != usize::MAX {
                    dense[a * k + b] = v;
                }
            }
        }
        let kernel = DenseLu::factor(k, dense)?;
        Some(Factor { m, kernel, kernel_rows, kernel_positions, kernel_vars, slack_position, etas: Vec::new() })
    }

    pub(crate) fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// `B^-1 a` for a row-space vector `a`; result indexed by basis position.
    pub(crate) fn ftran(&self, matrix: &Matrix, a: &[f64]) -> Vec<f64> {
        let mut zk: Vec<f64> = self.kernel_rows.iter().map(|&i| a[i]).collect();
        self.kernel.solve(&mut zk);
        let mut z = vec![0.0; self.m];
        let mut acc = vec![0.0; self.m];
        for (b, &var) in self.kernel_vars.iter().enumerate() {
            z[self.kernel_positions[b]] = zk[b];
            if zk[b] != 0.0 {
                for (i, v) in matrix.column(var) {
                    acc[i] += v * zk[b];
                }
            }
        }
        for (i, pos) in self.slack_position.iter().enumerate() {
            if let Some(p) = *pos {
                // Slack columns are -e_i.
                z[p] = acc[i] - a[i];
            }
        }
        for eta in &self.etas {
            let zr = z[eta.position] / eta.pivot;
            z[eta.position] = zr;
            if zr != 0.0 {
                for &(i, v) in &eta.entries {
                    z[i] -= v * zr;
                }
            }
        }
        z
    }

    /// `c^T B^-1` for a position-space vector `c`; result indexed by row.
    pub(crate) fn btran(&self, matrix: &Matrix, c: &[f64]) -> Vec<f64> {
        let mut c = c.to_vec();
        for eta in self.etas.iter().rev() {
            let s: f64 = eta.entries.iter().map(|&(i, v)| c[i] * v).sum();
            c[eta.position] = (c[eta.position] - s) / eta.pivot;
        }
        let mut w = vec![0.0; self.m];
        for (i, pos) in self.slack_position.iter().enumerate() {
            if let Some(p) = *pos {
                w[i] = -c[p];
            }
        }
        let mut rhs: Vec<f64> = self
            .kernel_vars
            .iter()
            .zip(&self.kernel_positions)
            .map(|(&var, &p)| {
                let covered: f64 = matrix
                    .column(var)
                    .filter(|&(i, _)| self.slack_position[i].is_some())
                    .map(|(i, v)| v * w[i])
                    .sum();
                c[p] - covered
            })
            .collect();
        self.kernel.solve_transpose(&mut rhs);
        for (a, &i) in self.kernel_rows.iter().enumerate() {
            w[i] = rhs[a];
        }
        w
    }

    /// Records that the variable whose `ftran` column is `alpha` replaced the
    /// basic variable at `position`.
    pub(crate) fn update(&mut self, position: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, v)| i != position && v.abs() > ETA_DROP)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta { position, pivot: alpha[position], entries });
    }
}
