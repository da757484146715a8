//! Declarative SDP description over named scalar and Hermitian variables.
//!
//! A problem holds a linear objective (maximized), affine-Hermitian PSD
//! blocks, linear equalities and inequalities. Lowering to the real
//! standard-form [`ConeProgram`]:
//!
//! 1. every variable becomes real parameters (a Hermitian variable of
//!    dimension n contributes n diagonal + n(n-1) off-diagonal re/im params),
//! 2. equalities are eliminated by sparse Gaussian substitution,
//! 3. complex blocks are embedded as real symmetric blocks,
//! 4. sign constraints and inequalities join a shared nonnegative block,
//!
//! and the surviving parameters are the `y` side of the standard pair.

use crate::cone::{BlockKind, ConeProgram, ConstraintMatrix, SymCoeff};
use crate::embed::{embed_map, hermitian_defect};
use crate::ipm::{self, IpmOptions, IpmStatus};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("constant block {0} is not Hermitian (defect {1:.3e})")]
    NotHermitian(usize, f64),
    #[error("dimension mismatch in block {0}: {1}")]
    Dimension(usize, String),
    #[error("equality system is inconsistent (residual {0:.3e})")]
    InconsistentEqualities(f64),
    #[error("unknown variable reference")]
    UnknownVariable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarId {
    Scalar(usize),
    Herm(usize),
}

/// Addressable real parameter of a variable for linear terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffRef {
    Scalar(usize),
    /// Real part of entry (i, j), i <= j (diagonal for i == j).
    HermRe(usize, usize, usize),
    /// Imaginary part of entry (i, j), i < j.
    HermIm(usize, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Free,
    NonNeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    /// sum of terms <= rhs
    Le,
    /// sum of terms >= rhs
    Ge,
}

#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub terms: Vec<(CoeffRef, f64)>,
    pub rhs: f64,
    pub rel: Rel,
}

/// One term of an affine-Hermitian PSD block.
#[derive(Debug, Clone)]
enum BlockTerm {
    /// `coeff * matrix` added for a scalar variable; sparse upper-triangle
    /// complex entries (diagonal entries must be real).
    Scalar {
        var: usize,
        entries: Vec<(usize, usize, Complex64)>,
    },
    /// Hermitian variable embedded at diagonal offset, scaled.
    HermEmbed { var: usize, offset: usize, scale: f64 },
    /// `scale * K^H V K` for a Hermitian variable through a fixed complex
    /// map (`K` is `dim_v x dim_block`).
    HermCongr {
        var: usize,
        k: DMatrix<Complex64>,
        scale: f64,
    },
}

/// Affine-Hermitian PSD block under construction.
#[derive(Debug, Clone)]
pub struct AffineBlock {
    dim: usize,
    constant: DMatrix<Complex64>,
    terms: Vec<BlockTerm>,
}

impl AffineBlock {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            constant: DMatrix::zeros(dim, dim),
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_constant(&mut self, h: &DMatrix<Complex64>) -> &mut Self {
        self.constant += h;
        self
    }

    pub fn set_constant_entry(&mut self, i: usize, j: usize, v: Complex64) -> &mut Self {
        self.constant[(i, j)] = v;
        if i != j {
            self.constant[(j, i)] = v.conj();
        }
        self
    }

    /// Sparse Hermitian coefficient for a scalar variable; entries are
    /// upper-triangle `(i, j, value)` with `i <= j`.
    pub fn scalar_coeff(&mut self, var: VarId, entries: Vec<(usize, usize, Complex64)>) {
        let VarId::Scalar(v) = var else {
            panic!("scalar_coeff takes a scalar variable")
        };
        self.terms.push(BlockTerm::Scalar { var: v, entries });
    }

    /// Place a Hermitian variable (times `scale`) on the block diagonal at
    /// `offset`.
    pub fn herm_embed(&mut self, var: VarId, offset: usize, scale: f64) {
        let VarId::Herm(v) = var else {
            panic!("herm_embed takes a Hermitian variable")
        };
        self.terms.push(BlockTerm::HermEmbed { var: v, offset, scale });
    }

    /// Add `scale * K^H V K` to the block for Hermitian variable `V`.
    pub fn herm_congr(&mut self, var: VarId, k: DMatrix<Complex64>, scale: f64) {
        let VarId::Herm(v) = var else {
            panic!("herm_congr takes a Hermitian variable")
        };
        self.terms.push(BlockTerm::HermCongr { var: v, k, scale });
    }
}

struct ScalarVar {
    name: String,
    sign: Sign,
}

struct HermVar {
    name: String,
    dim: usize,
}

/// Declarative SDP: maximize a linear objective subject to affine-Hermitian
/// PSD blocks, linear equalities/inequalities and scalar sign constraints.
pub struct SdpProblem {
    scalars: Vec<ScalarVar>,
    herms: Vec<HermVar>,
    objective: Vec<(CoeffRef, f64)>,
    blocks: Vec<AffineBlock>,
    linear: Vec<LinearConstraint>,
}

impl Default for SdpProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl SdpProblem {
    pub fn new() -> Self {
        Self {
            scalars: Vec::new(),
            herms: Vec::new(),
            objective: Vec::new(),
            blocks: Vec::new(),
            linear: Vec::new(),
        }
    }

    pub fn scalar_var(&mut self, name: &str, sign: Sign) -> VarId {
        self.scalars.push(ScalarVar {
            name: name.to_string(),
            sign,
        });
        VarId::Scalar(self.scalars.len() - 1)
    }

    pub fn herm_var(&mut self, name: &str, dim: usize) -> VarId {
        self.herms.push(HermVar {
            name: name.to_string(),
            dim,
        });
        VarId::Herm(self.herms.len() - 1)
    }

    /// Add a linear objective term (the objective is maximized).
    pub fn objective_term(&mut self, r: CoeffRef, coeff: f64) {
        self.objective.push((r, coeff));
    }

    /// Convenience: add `weight * Tr(V)` to the objective.
    pub fn objective_trace(&mut self, var: VarId, weight: f64) {
        let VarId::Herm(v) = var else {
            panic!("objective_trace takes a Hermitian variable")
        };
        for i in 0..self.herms[v].dim {
            self.objective.push((CoeffRef::HermRe(v, i, i), weight));
        }
    }

    pub fn psd_block(&mut self, block: AffineBlock) {
        self.blocks.push(block);
    }

    /// Constrain a Hermitian variable itself to be PSD.
    pub fn psd_var(&mut self, var: VarId) {
        let VarId::Herm(v) = var else {
            panic!("psd_var takes a Hermitian variable")
        };
        let mut b = AffineBlock::new(self.herms[v].dim);
        b.herm_embed(var, 0, 1.0);
        self.psd_block(b);
    }

    pub fn linear_constraint(&mut self, terms: Vec<(CoeffRef, f64)>, rel: Rel, rhs: f64) {
        self.linear.push(LinearConstraint { terms, rhs, rel });
    }

    fn herm_dim(&self, v: usize) -> usize {
        self.herms[v].dim
    }

    // ---- real parameter layout ------------------------------------------

    fn param_count(&self) -> usize {
        self.scalars.len() + self.herms.iter().map(|h| h.dim * h.dim).sum::<usize>()
    }

    fn herm_base(&self, var: usize) -> usize {
        self.scalars.len()
            + self
                .herms
                .iter()
                .take(var)
                .map(|h| h.dim * h.dim)
                .sum::<usize>()
    }

    fn param_of(&self, r: CoeffRef) -> usize {
        match r {
            CoeffRef::Scalar(v) => v,
            CoeffRef::HermRe(v, i, j) => {
                assert!(i <= j);
                let n = self.herm_dim(v);
                let base = self.herm_base(v);
                if i == j {
                    base + i
                } else {
                    base + n + 2 * offdiag_index(n, i, j)
                }
            }
            CoeffRef::HermIm(v, i, j) => {
                assert!(i < j);
                let n = self.herm_dim(v);
                base_im(self.herm_base(v), n, i, j)
            }
        }
    }

    /// Solve with the embedded interior-point backend.
    pub fn solve(&self, tol: f64) -> Result<SdpSolution, ProblemError> {
        self.solve_with_acceptable(tol, (tol * 200.0).clamp(1e-7, 1e-5))
    }

    /// Solve with an explicit stall-acceptance tolerance. Phase-I margin
    /// problems whose optimal faces are flat can stop with a primal residual
    /// around 1e-5 while the duality gap is tight; callers that only need a
    /// sign decision on the objective pass a looser bound here.
    pub fn solve_with_acceptable(
        &self,
        tol: f64,
        tol_acceptable: f64,
    ) -> Result<SdpSolution, ProblemError> {
        let lowered = self.lower()?;
        let opts = IpmOptions {
            tol: tol.max(1e-12),
            tol_acceptable,
            // every SdpProblem output (params, objective) lives on the dual
            // side of the standard pair
            accept_dual_only: true,
            verbose: std::env::var("RHA_CONIC_VERBOSE").is_ok(),
            ..Default::default()
        };
        let res = ipm::solve(&lowered.prog, &opts);

        // reconstruct parameter vector
        let mut params = lowered.x0.clone();
        for (zi, &p) in lowered.survivors.iter().enumerate() {
            params[p] = res.y[zi];
        }
        // substituted params
        let mut order: Vec<usize> = lowered.subst.keys().copied().collect();
        order.sort();
        // substitution expressions only reference survivors, one pass is enough
        for p in order {
            let expr = &lowered.subst[&p];
            let mut v = expr.constant;
            for &(q, c) in &expr.terms {
                v += c * params[q];
            }
            params[p] = v;
        }

        let objective: f64 = self
            .objective
            .iter()
            .map(|(r, c)| c * params[self.param_of(*r)])
            .sum();

        // violations
        let mut psd_violation = 0.0f64;
        for (bi, block) in self.blocks.iter().enumerate() {
            let h = self.block_value(block, &params);
            let defect = hermitian_defect(&h);
            if defect > 1e-9 {
                return Err(ProblemError::NotHermitian(bi, defect));
            }
            let min_eig = h
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            psd_violation = psd_violation.max((-min_eig).max(0.0));
        }
        let mut lin_violation = 0.0f64;
        for lc in &self.linear {
            let lhs: f64 = lc
                .terms
                .iter()
                .map(|(r, c)| c * params[self.param_of(*r)])
                .sum();
            let v = match lc.rel {
                Rel::Eq => (lhs - lc.rhs).abs(),
                Rel::Le => (lhs - lc.rhs).max(0.0),
                Rel::Ge => (lc.rhs - lhs).max(0.0),
            };
            lin_violation = lin_violation.max(v);
        }
        for (vi, sv) in self.scalars.iter().enumerate() {
            if sv.sign == Sign::NonNeg {
                lin_violation = lin_violation.max(-params[vi]);
            }
        }

        let status = match res.status {
            IpmStatus::Optimal => SolveStatus::Optimal,
            IpmStatus::DualInfeasible => SolveStatus::Infeasible,
            IpmStatus::PrimalInfeasible
            | IpmStatus::MaxIterations
            | IpmStatus::NumericalFailure => SolveStatus::NumericalFailure,
        };

        Ok(SdpSolution {
            status,
            params,
            objective,
            psd_violation,
            lin_violation,
            iterations: res.iterations,
            scalar_names: self.scalars.iter().map(|s| s.name.clone()).collect(),
            herm_names: self.herms.iter().map(|h| h.name.clone()).collect(),
            herm_dims: self.herms.iter().map(|h| h.dim).collect(),
            scalar_count: self.scalars.len(),
        })
    }

    /// Dense complex value of a block at a parameter assignment.
    fn block_value(&self, block: &AffineBlock, params: &[f64]) -> DMatrix<Complex64> {
        let mut h = block.constant.clone();
        for term in &block.terms {
            match term {
                BlockTerm::Scalar { var, entries } => {
                    let x = params[*var];
                    for &(i, j, z) in entries {
                        h[(i, j)] += z * x;
                        if i != j {
                            h[(j, i)] += z.conj() * x;
                        }
                    }
                }
                BlockTerm::HermEmbed { var, offset, scale } => {
                    let v = self.herm_value_from(params, *var);
                    let n = v.nrows();
                    for i in 0..n {
                        for j in 0..n {
                            h[(offset + i, offset + j)] += v[(i, j)] * *scale;
                        }
                    }
                }
                BlockTerm::HermCongr { var, k, scale } => {
                    let v = self.herm_value_from(params, *var);
                    h += k.adjoint() * v * k * Complex64::new(*scale, 0.0);
                }
            }
        }
        h
    }

    pub(crate) fn herm_value_from(&self, params: &[f64], var: usize) -> DMatrix<Complex64> {
        let n = self.herm_dim(var);
        let base = self.herm_base(var);
        let mut v = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            v[(i, i)] = Complex64::new(params[base + i], 0.0);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let re = params[base + n + 2 * offdiag_index(n, i, j)];
                let im = params[base_im(base, n, i, j)];
                v[(i, j)] = Complex64::new(re, im);
                v[(j, i)] = Complex64::new(re, -im);
            }
        }
        v
    }

    // ---- lowering ---------------------------------------------------------

    fn lower(&self) -> Result<Lowered, ProblemError> {
        let np = self.param_count();

        // 1. eliminate equalities by sparse Gaussian substitution
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for lc in &self.linear {
            if lc.rel == Rel::Eq {
                let mut terms: HashMap<usize, f64> = HashMap::new();
                for (r, c) in &lc.terms {
                    *terms.entry(self.param_of(*r)).or_insert(0.0) += c;
                }
                rows.push((terms.into_iter().collect(), lc.rhs));
            }
        }
        let mut subst: HashMap<usize, Expr> = HashMap::new();
        for _pass in 0..rows.len() + 1 {
            let mut progressed = false;
            let mut remaining = Vec::new();
            for (terms, rhs) in rows.drain(..) {
                // substitute known params
                let mut acc: HashMap<usize, f64> = HashMap::new();
                let mut c = -rhs;
                for (p, v) in terms {
                    if let Some(e) = subst.get(&p) {
                        c += v * e.constant;
                        for &(q, cq) in &e.terms {
                            *acc.entry(q).or_insert(0.0) += v * cq;
                        }
                    } else {
                        *acc.entry(p).or_insert(0.0) += v;
                    }
                }
                acc.retain(|_, v| v.abs() > 1e-14);
                if acc.is_empty() {
                    if c.abs() > 1e-9 {
                        return Err(ProblemError::InconsistentEqualities(c.abs()));
                    }
                    progressed = true;
                    continue;
                }
                // pivot on the largest coefficient
                let (&pivot, &pc) = acc
                    .iter()
                    .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                    .unwrap();
                let mut e = Expr {
                    constant: -c / pc,
                    terms: Vec::new(),
                };
                for (&q, &cq) in &acc {
                    if q != pivot {
                        e.terms.push((q, -cq / pc));
                    }
                }
                subst.insert(pivot, e);
                progressed = true;
                // fully re-resolve previously inserted expressions referencing pivot
                let keys: Vec<usize> = subst.keys().copied().collect();
                for k in keys {
                    if k == pivot {
                        continue;
                    }
                    let e = subst[&k].clone();
                    if e.terms.iter().any(|(q, _)| *q == pivot) {
                        let mut ne = Expr {
                            constant: e.constant,
                            terms: Vec::new(),
                        };
                        for (q, cq) in e.terms {
                            if q == pivot {
                                let pe = subst[&pivot].clone();
                                ne.constant += cq * pe.constant;
                                for (r, cr) in pe.terms {
                                    push_term(&mut ne.terms, r, cq * cr);
                                }
                            } else {
                                push_term(&mut ne.terms, q, cq);
                            }
                        }
                        ne.terms.retain(|(_, v)| v.abs() > 1e-14);
                        subst.insert(k, ne);
                    }
                }
                remaining.clear(); // all rows processed one at a time below
            }
            rows = remaining;
            if !progressed || rows.is_empty() {
                break;
            }
        }

        // survivors in parameter order
        let survivors: Vec<usize> = (0..np).filter(|p| !subst.contains_key(p)).collect();
        let z_of: HashMap<usize, usize> = survivors
            .iter()
            .enumerate()
            .map(|(z, p)| (*p, z))
            .collect();
        let m = survivors.len();

        // baseline parameter values (constants of substituted params)
        let mut x0 = vec![0.0; np];
        {
            let mut order: Vec<usize> = subst.keys().copied().collect();
            order.sort();
            for p in order {
                x0[p] = subst[&p].constant;
            }
        }

        // expand a param into (constant, [(z, coeff)])
        let expand = |p: usize| -> (f64, Vec<(usize, f64)>) {
            if let Some(e) = subst.get(&p) {
                (
                    e.constant,
                    e.terms
                        .iter()
                        .map(|&(q, c)| (*z_of.get(&q).expect("expr references survivor"), c))
                        .collect(),
                )
            } else {
                (0.0, vec![(z_of[&p], 1.0)])
            }
        };

        // 2. cone blocks
        let mut prog_blocks: Vec<BlockKind> = Vec::new();
        let mut f0: Vec<DMatrix<f64>> = Vec::new();
        // per cone-block coefficient accumulators, keyed by z
        let mut coeffs: Vec<HashMap<usize, CoeffAcc>> = Vec::new();
        let mut maps_per_block: Vec<Vec<DMatrix<f64>>> = Vec::new();

        for (bi, block) in self.blocks.iter().enumerate() {
            let defect = hermitian_defect(&block.constant);
            if defect > 1e-9 {
                return Err(ProblemError::NotHermitian(bi, defect));
            }
            let dim2 = 2 * block.dim;
            prog_blocks.push(BlockKind::Psd(dim2));
            let mut constant = embed_map(&block.constant);
            let mut acc: HashMap<usize, CoeffAcc> = HashMap::new();
            let mut block_maps: Vec<DMatrix<f64>> = Vec::new();

            for term in &block.terms {
                match term {
                    BlockTerm::Scalar { var, entries } => {
                        for &(i, j, _z) in entries {
                            if i > j || i >= block.dim || j >= block.dim {
                                return Err(ProblemError::Dimension(
                                    bi,
                                    "scalar coefficient entry out of range".into(),
                                ));
                            }
                        }
                        let real_entries = embed_entries(entries, block.dim);
                        let (c0, zs) = expand(*var);
                        if c0 != 0.0 {
                            add_sparse(&mut constant, &real_entries, c0);
                        }
                        for (z, c) in zs {
                            acc.entry(z)
                                .or_default()
                                .sparse
                                .extend(real_entries.iter().map(|&(i, j, v)| (i, j, v * c)));
                        }
                    }
                    BlockTerm::HermEmbed { var, offset, scale } => {
                        let n = self.herm_dim(*var);
                        if offset + n > block.dim {
                            return Err(ProblemError::Dimension(
                                bi,
                                "embedded variable exceeds block".into(),
                            ));
                        }
                        let base = self.herm_base(*var);
                        for pi in 0..n * n {
                            let p = base + pi;
                            let entries =
                                herm_param_entries(n, pi, *offset, block.dim, *scale);
                            let (c0, zs) = expand(p);
                            if c0 != 0.0 {
                                add_sparse(&mut constant, &entries, c0);
                            }
                            for (z, c) in zs {
                                acc.entry(z)
                                    .or_default()
                                    .sparse
                                    .extend(entries.iter().map(|&(i, j, v)| (i, j, v * c)));
                            }
                        }
                    }
                    BlockTerm::HermCongr { var, k, scale } => {
                        let n = self.herm_dim(*var);
                        if k.nrows() != n || k.ncols() != block.dim {
                            return Err(ProblemError::Dimension(
                                bi,
                                format!("congruence map is {}x{}", k.nrows(), k.ncols()),
                            ));
                        }
                        let k_real = embed_map(k);
                        block_maps.push(k_real);
                        let map_idx = block_maps.len() - 1;
                        let base = self.herm_base(*var);
                        for pi in 0..n * n {
                            let p = base + pi;
                            // pre-space entries of the embedded elementary Hermitian
                            let entries = herm_param_entries(n, pi, 0, n, *scale);
                            let (c0, zs) = expand(p);
                            if c0 != 0.0 {
                                // fold pinned part into the constant via dense congruence
                                let k_t = block_maps[map_idx].transpose();
                                let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
                                for &(i, j, v) in &entries {
                                    e[(i, j)] += v * c0;
                                    if i != j {
                                        e[(j, i)] += v * c0;
                                    }
                                }
                                constant += &k_t * e * &block_maps[map_idx];
                            }
                            for (z, c) in zs {
                                acc.entry(z).or_default().congr.push((
                                    map_idx,
                                    entries.iter().map(|&(i, j, v)| (i, j, v * c)).collect(),
                                ));
                            }
                        }
                    }
                }
            }
            f0.push(constant);
            coeffs.push(acc);
            maps_per_block.push(block_maps);
        }

        // 3. one nonnegative block for sign constraints and inequalities
        let mut diag_const: Vec<f64> = Vec::new();
        let mut diag_coeffs: Vec<HashMap<usize, f64>> = Vec::new();
        for (vi, sv) in self.scalars.iter().enumerate() {
            if sv.sign == Sign::NonNeg {
                let (c0, zs) = expand(vi);
                let mut cc = HashMap::new();
                for (z, c) in zs {
                    *cc.entry(z).or_insert(0.0) += c;
                }
                diag_const.push(c0);
                diag_coeffs.push(cc);
            }
        }
        for lc in &self.linear {
            if lc.rel == Rel::Eq {
                continue;
            }
            // slack = rhs - lhs >= 0 for Le;  lhs - rhs >= 0 for Ge
            let sgn = match lc.rel {
                Rel::Le => -1.0,
                Rel::Ge => 1.0,
                Rel::Eq => unreachable!(),
            };
            let mut c0 = -lc.rhs * sgn;
            let mut cc: HashMap<usize, f64> = HashMap::new();
            for (r, c) in &lc.terms {
                let p = self.param_of(*r);
                let (pc, zs) = expand(p);
                c0 += sgn * c * pc;
                for (z, zc) in zs {
                    *cc.entry(z).or_insert(0.0) += sgn * c * zc;
                }
            }
            diag_const.push(c0);
            diag_coeffs.push(cc);
        }
        let nn_block = if diag_const.is_empty() {
            None
        } else {
            prog_blocks.push(BlockKind::NonNeg(diag_const.len()));
            maps_per_block.push(Vec::new());
            Some(prog_blocks.len() - 1)
        };

        // 4. assemble the ConeProgram as the dual side: maximize c~'z subject
        //    to F0 + sum_z z_i F_i >= 0  =>  C := F0, A_i := -F_i, b := c~.
        let mut prog = ConeProgram::new(prog_blocks);
        prog.maps = maps_per_block;

        let mut c_obj = ConstraintMatrix::new();
        for (bi, f) in f0.iter().enumerate() {
            c_obj = c_obj.with(bi, SymCoeff::Dense(upper_sym(f)));
        }
        if let Some(nb) = nn_block {
            let entries: Vec<(usize, usize, f64)> = diag_const
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, i, *v))
                .collect();
            c_obj = c_obj.with(nb, SymCoeff::Sparse(entries));
        }
        prog.objective = c_obj;

        // objective vector over z
        let mut b_obj = vec![0.0; m];
        let mut obj_const = 0.0;
        for (r, c) in &self.objective {
            let p = self.param_of(*r);
            let (c0, zs) = expand(p);
            obj_const += c * c0;
            for (z, zc) in zs {
                b_obj[z] += c * zc;
            }
        }

        for z in 0..m {
            let mut a = ConstraintMatrix::new();
            for (bi, acc) in coeffs.iter().enumerate() {
                if let Some(ca) = acc.get(&z) {
                    if !ca.sparse.is_empty() {
                        let neg: Vec<_> =
                            ca.sparse.iter().map(|&(i, j, v)| (i, j, -v)).collect();
                        a = a.with(bi, SymCoeff::Sparse(neg));
                    }
                    for (map, entries) in &ca.congr {
                        let neg: Vec<_> = entries.iter().map(|&(i, j, v)| (i, j, -v)).collect();
                        a = a.with(
                            bi,
                            SymCoeff::Congr {
                                map: *map,
                                entries: neg,
                            },
                        );
                    }
                }
            }
            if let Some(nb) = nn_block {
                let entries: Vec<(usize, usize, f64)> = diag_coeffs
                    .iter()
                    .enumerate()
                    .filter_map(|(i, cc)| cc.get(&z).map(|c| (i, i, -c)))
                    .collect();
                if !entries.is_empty() {
                    a = a.with(nb, SymCoeff::Sparse(entries));
                }
            }
            prog.add_constraint(a, b_obj[z]);
        }

        Ok(Lowered {
            prog,
            survivors,
            subst,
            x0,
            obj_const,
        })
    }

    /// Self-describing JSON dump of the problem (dense re/im block data).
    pub fn dump_json(&self) -> serde_json::Value {
        let zero = vec![0.0; self.param_count()];
        let blocks: Vec<serde_json::Value> = self
            .blocks
            .iter()
            .map(|b| {
                let h = self.block_value(b, &zero);
                serde_json::json!({
                    "dim": b.dim,
                    "constant_re": mat_rows(&h, true),
                    "constant_im": mat_rows(&h, false),
                    "terms": b.terms.len(),
                })
            })
            .collect();
        serde_json::json!({
            "scalars": self.scalars.iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
            "herms": self.herms.iter().map(|h| serde_json::json!({"name": h.name, "dim": h.dim})).collect::<Vec<_>>(),
            "objective_terms": self.objective.len(),
            "psd_blocks": blocks,
            "linear_constraints": self.linear.len(),
        })
    }
}

fn mat_rows(h: &DMatrix<Complex64>, re: bool) -> Vec<Vec<f64>> {
    (0..h.nrows())
        .map(|i| {
            (0..h.ncols())
                .map(|j| if re { h[(i, j)].re } else { h[(i, j)].im })
                .collect()
        })
        .collect()
}

fn push_term(terms: &mut Vec<(usize, f64)>, q: usize, c: f64) {
    if let Some(t) = terms.iter_mut().find(|(p, _)| *p == q) {
        t.1 += c;
    } else {
        terms.push((q, c));
    }
}

#[derive(Debug, Clone)]
struct Expr {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

#[derive(Default)]
struct CoeffAcc {
    sparse: Vec<(usize, usize, f64)>,
    congr: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

struct Lowered {
    prog: ConeProgram,
    survivors: Vec<usize>,
    subst: HashMap<usize, Expr>,
    x0: Vec<f64>,
    #[allow(dead_code)]
    obj_const: f64,
}

fn offdiag_index(n: usize, i: usize, j: usize) -> usize {
    // index of (i, j), i < j, in row-major upper-triangle order
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn base_im(base: usize, n: usize, i: usize, j: usize) -> usize {
    base + n + 2 * offdiag_index(n, i, j) + 1
}

/// Real symmetric entries (upper-triangle) of the embedding of a sparse
/// complex Hermitian matrix given by upper-triangle entries.
fn embed_entries(
    entries: &[(usize, usize, Complex64)],
    n: usize,
) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(entries.len() * 4);
    for &(i, j, z) in entries {
        if i == j {
            out.push((i, i, z.re));
            out.push((i + n, i + n, z.re));
        } else {
            out.push((i, j, z.re));
            out.push((i + n, j + n, z.re));
            out.push((i, j + n, -z.im));
            out.push((j, i + n, z.im));
        }
    }
    out.retain(|&(_, _, v)| v != 0.0);
    out
}

/// Embedded real entries for the pi-th real parameter of an n-dim Hermitian
/// variable placed at `offset` in a block of complex dimension `block_dim`.
fn herm_param_entries(
    n: usize,
    pi: usize,
    offset: usize,
    block_dim: usize,
    scale: f64,
) -> Vec<(usize, usize, f64)> {
    let d = block_dim;
    let mut out = Vec::with_capacity(4);
    if pi < n {
        // diagonal entry (pi, pi)
        let i = offset + pi;
        out.push((i, i, scale));
        out.push((i + d, i + d, scale));
    } else {
        let k = pi - n;
        let od = k / 2;
        let is_im = k % 2 == 1;
        let (i, j) = offdiag_from_index(n, od);
        let (bi, bj) = (offset + i, offset + j);
        if !is_im {
            out.push((bi, bj, scale));
            out.push((bi + d, bj + d, scale));
        } else {
            out.push((bi, bj + d, -scale));
            out.push((bj, bi + d, scale));
        }
    }
    out
}

fn offdiag_from_index(n: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - i - 1;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    panic!("off-diagonal index out of range");
}

fn add_sparse(m: &mut DMatrix<f64>, entries: &[(usize, usize, f64)], scale: f64) {
    for &(i, j, v) in entries {
        m[(i, j)] += v * scale;
        if i != j {
            m[(j, i)] += v * scale;
        }
    }
}

fn upper_sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Result of one [`SdpProblem::solve`] call.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    params: Vec<f64>,
    pub objective: f64,
    pub psd_violation: f64,
    pub lin_violation: f64,
    pub iterations: usize,
    scalar_names: Vec<String>,
    herm_names: Vec<String>,
    herm_dims: Vec<usize>,
    scalar_count: usize,
}

impl SdpSolution {
    pub fn scalar(&self, var: VarId) -> f64 {
        let VarId::Scalar(v) = var else {
            panic!("scalar() takes a scalar variable")
        };
        self.params[v]
    }

    pub fn herm(&self, var: VarId) -> DMatrix<Complex64> {
        let VarId::Herm(v) = var else {
            panic!("herm() takes a Hermitian variable")
        };
        let n = self.herm_dims[v];
        let base = self.scalar_count
            + self
                .herm_dims
                .iter()
                .take(v)
                .map(|d| d * d)
                .sum::<usize>();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = Complex64::new(self.params[base + i], 0.0);
        }
        let mut k = base + n;
        for i in 0..n {
            for j in (i + 1)..n {
                let re = self.params[k];
                let im = self.params[k + 1];
                out[(i, j)] = Complex64::new(re, im);
                out[(j, i)] = Complex64::new(re, -im);
                k += 2;
            }
        }
        out
    }

    pub fn scalar_names(&self) -> &[String] {
        &self.scalar_names
    }

    pub fn herm_names(&self) -> &[String] {
        &self.herm_names
    }
}
