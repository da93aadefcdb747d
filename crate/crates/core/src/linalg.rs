//! Banded direct solvers used by every discretization in the crate.
//!
//! All radial and 1-D operators here are three-point stencils, so the linear
//! systems are tridiagonal (scalar problems) or block tridiagonal with 2x2
//! blocks (the coupled `(u, v)` problems with unknowns interleaved per node).

/// Pivot magnitude below which a system is treated as singular.
const PIVOT_FLOOR: f64 = 1e-300;

/// Tridiagonal matrix stored by diagonals.
///
/// Row `i` reads `lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1]`;
/// `lower[0]` and `upper[len-1]` are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(len: usize) -> Self {
        Self {
            lower: vec![0.0; len],
            diag: vec![0.0; len],
            upper: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let len = self.len();
        assert_eq!(x.len(), len);
        (0..len)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < len {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Thomas algorithm. Returns `None` when a pivot vanishes.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let len = self.len();
        assert_eq!(rhs.len(), len);
        if len == 0 {
            return Some(Vec::new());
        }
        let mut c = vec![0.0; len];
        let mut d = vec![0.0; len];
        let mut pivot = self.diag[0];
        if pivot.abs() < PIVOT_FLOOR {
            return None;
        }
        c[0] = self.upper[0] / pivot;
        d[0] = rhs[0] / pivot;
        for i in 1..len {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot.abs() < PIVOT_FLOOR || !pivot.is_finite() {
                return None;
            }
            c[i] = if i + 1 < len { self.upper[i] / pivot } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        for i in (0..len - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Some(d)
    }
}

/// Row-major 2x2 block.
pub type Block = [[f64; 2]; 2];

fn block_mul(a: &Block, b: &Block) -> Block {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn block_vec(a: &Block, x: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1],
        a[1][0] * x[0] + a[1][1] * x[1],
    ]
}

fn block_sub(a: &Block, b: &Block) -> Block {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

fn block_inverse(a: &Block) -> Option<Block> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !det.is_finite() || det.abs() <= PIVOT_FLOOR.max(1e-14 * scale * scale) {
        return None;
    }
    Some([
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ])
}

/// Block tridiagonal matrix with 2x2 blocks.
#[derive(Clone, Debug)]
pub struct BlockTridiagonal {
    pub lower: Vec<Block>,
    pub diag: Vec<Block>,
    pub upper: Vec<Block>,
}

impl BlockTridiagonal {
    pub fn zeros(len: usize) -> Self {
        let z = [[0.0; 2]; 2];
        Self {
            lower: vec![z; len],
            diag: vec![z; len],
            upper: vec![z; len],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Block Thomas elimination. `rhs` holds `len` node pairs.
    pub fn solve(&self, rhs: &[[f64; 2]]) -> Option<Vec<[f64; 2]>> {
        let len = self.len();
        assert_eq!(rhs.len(), len);
        if len == 0 {
            return Some(Vec::new());
        }
        let mut c: Vec<Block> = vec![[[0.0; 2]; 2]; len];
        let mut d: Vec<[f64; 2]> = vec![[0.0; 2]; len];
        let inv = block_inverse(&self.diag[0])?;
        c[0] = block_mul(&inv, &self.upper[0]);
        d[0] = block_vec(&inv, rhs[0]);
        for i in 1..len {
            let pivot = block_sub(&self.diag[i], &block_mul(&self.lower[i], &c[i - 1]));
            let inv = block_inverse(&pivot)?;
            if i + 1 < len {
                c[i] = block_mul(&inv, &self.upper[i]);
            }
            let ld = block_vec(&self.lower[i], d[i - 1]);
            d[i] = block_vec(&inv, [rhs[i][0] - ld[0], rhs[i][1] - ld[1]]);
        }
        for i in (0..len - 1).rev() {
            let cd = block_vec(&c[i], d[i + 1]);
            d[i] = [d[i][0] - cd[0], d[i][1] - cd[1]];
        }
        Some(d)
    }
}
