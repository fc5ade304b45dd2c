//! Symmetric banded matrices with half-bandwidth 3 and their LDLᵀ solve.
//!
//! The kinetic form of the fourth-order radial stencil couples each node to
//! its three neighbours on either side, so every implicit flow step is a
//! heptadiagonal symmetric positive-definite solve.

/// Half-bandwidth of the kinetic operator.
pub const BAND: usize = 3;

/// Symmetric matrix stored by upper diagonals: `rows[i][k] = A[i][i+k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSym {
    rows: Vec<[f64; BAND + 1]>,
}

impl BandedSym {
    pub fn zeros(n: usize) -> Self {
        BandedSym { rows: vec![[0.0; BAND + 1]; n] }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Entry `A[i][j]` for `|i-j| ≤ BAND`, zero otherwise.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        if b - a > BAND {
            0.0
        } else {
            self.rows[a][b - a]
        }
    }

    /// Adds `v` to `A[i][j]` (and implicitly `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        assert!(b - a <= BAND, "entry ({i},{j}) outside band");
        self.rows[a][b - a] += v;
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.rows[i][0]
    }

    /// `self * alpha + diag(d)` as a new matrix.
    pub fn scaled_plus_diag(&self, alpha: f64, d: &[f64]) -> BandedSym {
        assert_eq!(d.len(), self.dim());
        let rows = self
            .rows
            .iter()
            .zip(d)
            .map(|(r, &di)| [alpha * r[0] + di, alpha * r[1], alpha * r[2], alpha * r[3]])
            .collect();
        BandedSym { rows }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let r = &self.rows[i];
            y[i] += r[0] * x[i];
            for k in 1..=BAND {
                if i + k < n {
                    y[i] += r[k] * x[i + k];
                    y[i + k] += r[k] * x[i];
                }
            }
        }
        y
    }

    /// In-place LDLᵀ factorisation; `None` if a pivot is not strictly positive.
    #[allow(clippy::needless_range_loop)]
    pub fn factor(&self) -> Option<Ldl> {
        let n = self.dim();
        // l[i][k] = L[i+k][i] for k = 1..=BAND; d[i] = D[i]
        let mut l = vec![[0.0; BAND + 1]; n];
        let mut d = vec![0.0; n];
        for j in 0..n {
            // D_j = A_jj - Σ_{k<j} L_jk² D_k
            let mut dj = self.rows[j][0];
            for m in 1..=BAND.min(j) {
                let k = j - m;
                let ljk = l[k][m];
                dj -= ljk * ljk * d[k];
            }
            if !(dj > 0.0) || !dj.is_finite() {
                return None;
            }
            d[j] = dj;
            // L_ij = (A_ij - Σ_{k<j} L_ik L_jk D_k) / D_j for i = j+1..j+BAND
            for off in 1..=BAND {
                let i = j + off;
                if i >= n {
                    break;
                }
                let mut v = self.rows[j][off];
                for m in 1..=BAND {
                    if m > j {
                        break;
                    }
                    let k = j - m;
                    let dik = i - k;
                    if dik > BAND {
                        continue;
                    }
                    v -= l[k][dik] * l[k][m] * d[k];
                }
                l[j][off] = v / dj;
            }
        }
        Some(Ldl { l, d })
    }
}

/// Factorisation `A = L D Lᵀ` of a [`BandedSym`].
#[derive(Debug, Clone)]
pub struct Ldl {
    l: Vec<[f64; BAND + 1]>,
    d: Vec<f64>,
}

impl Ldl {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut v = x[i];
            for m in 1..=BAND.min(i) {
                v -= self.l[i - m][m] * x[i - m];
            }
            x[i] = v;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for m in 1..=BAND {
                if i + m < n {
                    v -= self.l[i][m] * x[i + m];
                }
            }
            x[i] = v;
        }
        x
    }
}
