//! Real standard-form cone program data structures.
//!
//! The pair solved by the interior-point method:
//!
//! ```text
//! (P)  min <C, X>   s.t.  <A_k, X> = b_k  (k = 1..m),   X in K
//! (D)  max b'y      s.t.  S = C - sum_k y_k A_k in K
//! ```
//!
//! where `K` is a product of dense PSD blocks and a nonnegative orthant.
//! Constraint matrices can be given per block as sparse entry lists, dense
//! matrices, or congruence images `K' E K` of a sparse matrix `E` through a
//! fixed map `K`; the Schur complement assembly exploits each form so that
//! problems with many sparse/congruence coefficients stay cheap.

use nalgebra::{DMatrix, DVector};

/// One cone factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Dense real symmetric PSD block of the given side length.
    Psd(usize),
    /// Nonnegative orthant of the given dimension (treated as a diagonal block).
    NonNeg(usize),
}

impl BlockKind {
    pub fn dim(&self) -> usize {
        match *self {
            BlockKind::Psd(n) | BlockKind::NonNeg(n) => n,
        }
    }

    /// Barrier degree contributed by this block.
    pub fn degree(&self) -> usize {
        self.dim()
    }
}

/// Symmetric coefficient of one constraint on one block.
///
/// Sparse entries use the upper-triangle convention: an entry `(i, j, v)` with
/// `i <= j` denotes the value `v` at `(i, j)` and, when `i != j`, also at
/// `(j, i)`. For `NonNeg` blocks only diagonal entries `(i, i, v)` are valid.
#[derive(Debug, Clone)]
pub enum SymCoeff {
    Sparse(Vec<(usize, usize, f64)>),
    Dense(DMatrix<f64>),
    /// `K' E K` where `K` is `maps[map]` of the block (`n_pre x n_block`) and
    /// `E` is sparse in the pre-space (upper-triangle convention).
    Congr {
        map: usize,
        entries: Vec<(usize, usize, f64)>,
    },
}

/// Per-constraint coefficients: at most one per block, indexed by block.
#[derive(Debug, Clone, Default)]
pub struct ConstraintMatrix {
    pub blocks: Vec<(usize, SymCoeff)>,
}

impl ConstraintMatrix {
    pub fn new() -> Self {
        Self { blocks: Vec::new() }
    }

    pub fn with(mut self, block: usize, coeff: SymCoeff) -> Self {
        self.blocks.push((block, coeff));
        self
    }
}

/// Standard-form cone program.
#[derive(Debug, Clone)]
pub struct ConeProgram {
    pub blocks: Vec<BlockKind>,
    /// Congruence maps per block (`maps[b][i]` is `n_pre x n_b`).
    pub maps: Vec<Vec<DMatrix<f64>>>,
    pub objective: ConstraintMatrix,
    pub constraints: Vec<ConstraintMatrix>,
    pub rhs: Vec<f64>,
}

impl ConeProgram {
    pub fn new(blocks: Vec<BlockKind>) -> Self {
        let maps = vec![Vec::new(); blocks.len()];
        Self {
            blocks,
            maps,
            objective: ConstraintMatrix::new(),
            constraints: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_map(&mut self, block: usize, k: DMatrix<f64>) -> usize {
        assert_eq!(k.ncols(), self.blocks[block].dim(), "map column mismatch");
        self.maps[block].push(k);
        self.maps[block].len() - 1
    }

    pub fn add_constraint(&mut self, a: ConstraintMatrix, b: f64) {
        self.constraints.push(a);
        self.rhs.push(b);
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Materialize a coefficient as a dense symmetric matrix (for residual
    /// computation, debugging, and tests).
    pub fn coeff_dense(&self, block: usize, coeff: &SymCoeff) -> DMatrix<f64> {
        let n = self.blocks[block].dim();
        match coeff {
            SymCoeff::Dense(m) => m.clone(),
            SymCoeff::Sparse(entries) => {
                let mut m = DMatrix::<f64>::zeros(n, n);
                for &(i, j, v) in entries {
                    m[(i, j)] += v;
                    if i != j {
                        m[(j, i)] += v;
                    }
                }
                m
            }
            SymCoeff::Congr { map, entries } => {
                let k = &self.maps[block][*map];
                let pre = k.nrows();
                let mut e = DMatrix::<f64>::zeros(pre, pre);
                for &(i, j, v) in entries {
                    e[(i, j)] += v;
                    if i != j {
                        e[(j, i)] += v;
                    }
                }
                k.transpose() * e * k
            }
        }
    }

    /// `<A, X>` for one constraint against block-diagonal `X`.
    pub fn inner(&self, a: &ConstraintMatrix, x: &[BlockMat]) -> f64 {
        let mut acc = 0.0;
        for (block, coeff) in &a.blocks {
            acc += match (&x[*block], coeff) {
                (BlockMat::Dense(xm), SymCoeff::Sparse(entries)) => sparse_inner(entries, xm),
                (BlockMat::Dense(xm), SymCoeff::Dense(am)) => am.dot(xm),
                (BlockMat::Dense(xm), SymCoeff::Congr { map, entries }) => {
                    // <K'EK, X> = <E, K X K'>
                    let k = &self.maps[*block][*map];
                    let kxk = k * xm * k.transpose();
                    sparse_inner(entries, &kxk)
                }
                (BlockMat::Diag(xv), SymCoeff::Sparse(entries)) => {
                    let mut s = 0.0;
                    for &(i, j, v) in entries {
                        debug_assert_eq!(i, j, "off-diagonal entry on NonNeg block");
                        s += v * xv[i];
                    }
                    s
                }
                (BlockMat::Diag(_), _) => panic!("NonNeg blocks take sparse diagonal coefficients"),
            };
        }
        acc
    }

    /// Accumulate `sum_k y_k A_k` as dense block matrices.
    pub fn adjoint(&self, y: &[f64]) -> Vec<BlockMat> {
        let mut out: Vec<BlockMat> = self
            .blocks
            .iter()
            .map(|b| match b {
                BlockKind::Psd(n) => BlockMat::Dense(DMatrix::zeros(*n, *n)),
                BlockKind::NonNeg(n) => BlockMat::Diag(DVector::zeros(*n)),
            })
            .collect();
        // congruence coefficients accumulate in pre-space first
        let mut pre_acc: Vec<Vec<Option<DMatrix<f64>>>> = self
            .maps
            .iter()
            .map(|ms| ms.iter().map(|_| None).collect())
            .collect();

        for (k, a) in self.constraints.iter().enumerate() {
            let yk = y[k];
            if yk == 0.0 {
                continue;
            }
            for (block, coeff) in &a.blocks {
                match (&mut out[*block], coeff) {
                    (BlockMat::Dense(m), SymCoeff::Sparse(entries)) => {
                        for &(i, j, v) in entries {
                            m[(i, j)] += yk * v;
                            if i != j {
                                m[(j, i)] += yk * v;
                            }
                        }
                    }
                    (BlockMat::Dense(m), SymCoeff::Dense(am)) => {
                        m.zip_apply(am, |x, a| *x += yk * a);
                    }
                    (BlockMat::Dense(_), SymCoeff::Congr { map, entries }) => {
                        let pre = self.maps[*block][*map].nrows();
                        let acc = pre_acc[*block][*map]
                            .get_or_insert_with(|| DMatrix::zeros(pre, pre));
                        for &(i, j, v) in entries {
                            acc[(i, j)] += yk * v;
                            if i != j {
                                acc[(j, i)] += yk * v;
                            }
                        }
                    }
                    (BlockMat::Diag(dv), SymCoeff::Sparse(entries)) => {
                        for &(i, j, v) in entries {
                            debug_assert_eq!(i, j);
                            dv[i] += yk * v;
                        }
                    }
                    (BlockMat::Diag(_), _) => {
                        panic!("NonNeg blocks take sparse diagonal coefficients")
                    }
                }
            }
        }
        for (b, accs) in pre_acc.into_iter().enumerate() {
            for (mi, acc) in accs.into_iter().enumerate() {
                if let Some(e) = acc {
                    let k = &self.maps[b][mi];
                    if let BlockMat::Dense(m) = &mut out[b] {
                        *m += k.transpose() * e * k;
                    }
                }
            }
        }
        out
    }
}

/// Block-diagonal symmetric matrix value: dense PSD block or diagonal.
#[derive(Debug, Clone)]
pub enum BlockMat {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl BlockMat {
    pub fn zeros_like(kind: BlockKind) -> Self {
        match kind {
            BlockKind::Psd(n) => BlockMat::Dense(DMatrix::zeros(n, n)),
            BlockKind::NonNeg(n) => BlockMat::Diag(DVector::zeros(n)),
        }
    }

    pub fn identity_scaled(kind: BlockKind, s: f64) -> Self {
        match kind {
            BlockKind::Psd(n) => BlockMat::Dense(DMatrix::identity(n, n) * s),
            BlockKind::NonNeg(n) => BlockMat::Diag(DVector::from_element(n, s)),
        }
    }

    pub fn dot(&self, other: &BlockMat) -> f64 {
        match (self, other) {
            (BlockMat::Dense(a), BlockMat::Dense(b)) => a.dot(b),
            (BlockMat::Diag(a), BlockMat::Diag(b)) => a.dot(b),
            _ => panic!("block kind mismatch"),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            BlockMat::Dense(a) => a.norm(),
            BlockMat::Diag(a) => a.norm(),
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &BlockMat) {
        match (self, other) {
            (BlockMat::Dense(a), BlockMat::Dense(b)) => a.zip_apply(b, |x, v| *x += alpha * v),
            (BlockMat::Diag(a), BlockMat::Diag(b)) => a.axpy(alpha, b, 1.0),
            _ => panic!("block kind mismatch"),
        }
    }

    pub fn scale(&mut self, s: f64) {
        match self {
            BlockMat::Dense(a) => *a *= s,
            BlockMat::Diag(a) => *a *= s,
        }
    }

    /// Minimum eigenvalue (exact for Diag, symmetric eigensolve for Dense).
    pub fn min_eig(&self) -> f64 {
        match self {
            BlockMat::Dense(a) => a
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
            BlockMat::Diag(a) => a.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

pub(crate) fn sparse_inner(entries: &[(usize, usize, f64)], x: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for &(i, j, v) in entries {
        s += if i == j { v * x[(i, i)] } else { 2.0 * v * x[(i, j)] };
    }
    s
}

/// Expand upper-triangle entries into a full list including mirrored entries.
pub(crate) fn full_entries(entries: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(entries.len() * 2);
    for &(i, j, v) in entries {
        out.push((i, j, v));
        if i != j {
            out.push((j, i, v));
        }
    }
    out
}
