//! Mehrotra predictor-corrector interior-point method with Nesterov-Todd
//! scaling over a product of PSD blocks and a nonnegative orthant.
//!
//! Solves the standard pair
//!
//! ```text
//! (P)  min <C, X>   s.t.  <A_k, X> = b_k,  X in K
//! (D)  max b'y      s.t.  S = C - sum_k y_k A_k in K
//! ```
//!
//! with an infeasible start. The Schur complement `M[i,j] = <A_i, W A_j W>`
//! is assembled per block from the sparse / dense / congruence structure of
//! the coefficients, so constraint matrices of the form `K' E K` with sparse
//! `E` cost O(nnz^2) per pair instead of a dense triple product.

use crate::cone::{full_entries, BlockKind, BlockMat, ConeProgram, SymCoeff};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct IpmOptions {
    /// Relative tolerance on primal/dual feasibility and duality gap.
    pub tol: f64,
    /// Fallback tolerance: when progress stalls before `tol` is met (late
    /// Schur-complement conditioning can floor the primal residual around
    /// sqrt(machine epsilon)), the best iterate satisfying this bound is
    /// still reported as optimal.
    pub tol_acceptable: f64,
    /// Stall acceptance ignores the primal residual: for callers whose
    /// answer lives entirely in `y` (the LMI-form variables), dual
    /// feasibility plus a small gap already certify the returned objective
    /// as a valid bound.
    pub accept_dual_only: bool,
    pub max_iter: usize,
    /// Fraction of the step to the cone boundary taken each iteration.
    pub step_frac: f64,
    pub verbose: bool,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            tol_acceptable: 2e-6,
            accept_dual_only: false,
            max_iter: 100,
            step_frac: 0.98,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Optimal,
    /// The dual side (max b'y over PSD slack) is infeasible: the primal
    /// objective diverges to -inf along primal-feasible iterates.
    DualInfeasible,
    /// The primal side is infeasible / the dual is unbounded.
    PrimalInfeasible,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub status: IpmStatus,
    pub x: Vec<BlockMat>,
    pub y: DVector<f64>,
    pub s: Vec<BlockMat>,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub rel_primal_infeas: f64,
    pub rel_dual_infeas: f64,
    pub rel_gap: f64,
}

enum ItemForm {
    /// Full (mirrored) entry list in block space.
    Sparse(Vec<(usize, usize, f64)>),
    /// Index into the block's dense coefficient list.
    Dense(usize),
    /// Map index plus full entry list in pre-space: coefficient is K' E K.
    Congr(usize, Vec<(usize, usize, f64)>),
}

struct Item {
    con: usize,
    form: ItemForm,
}

struct BlockCtx {
    kind: BlockKind,
    maps: Vec<DMatrix<f64>>,
    items: Vec<Item>,
    dense: Vec<DMatrix<f64>>,
    c_dense: BlockMat,
}

enum Scaling {
    Psd {
        w: DMatrix<f64>,
        r: DMatrix<f64>,
        r_inv: DMatrix<f64>,
        sigma: DVector<f64>,
    },
    Diag {
        w: DVector<f64>,
        sigma: DVector<f64>,
    },
}

pub fn solve(prog: &ConeProgram, opts: &IpmOptions) -> IpmResult {
    let m = prog.num_constraints();
    let nu: f64 = prog
        .blocks
        .iter()
        .map(|b| b.degree() as f64)
        .sum::<f64>()
        .max(1.0);

    // row equilibration: scale each constraint to unit coefficient norm
    let mut row_scale = vec![1.0f64; m];
    for (k, a) in prog.constraints.iter().enumerate() {
        row_scale[k] = 1.0 / coeff_norm(prog, a).max(1e-12);
    }
    let obj_norm = coeff_norm(prog, &prog.objective).max(1.0);

    let ctxs = build_contexts(prog, &row_scale, obj_norm);
    let b_scaled: DVector<f64> =
        DVector::from_iterator(m, prog.rhs.iter().zip(&row_scale).map(|(b, s)| b * s));

    let init = (1.0 + b_scaled.norm() / (m as f64 + 1.0).sqrt()).max(1.0);
    let mut x: Vec<BlockMat> = prog
        .blocks
        .iter()
        .map(|k| BlockMat::identity_scaled(*k, init))
        .collect();
    let mut s: Vec<BlockMat> = prog
        .blocks
        .iter()
        .map(|k| BlockMat::identity_scaled(*k, init))
        .collect();
    let mut y = DVector::<f64>::zeros(m);

    let b_norm = 1.0 + b_scaled.norm();
    let c_norm = 1.0
        + ctxs
            .iter()
            .map(|c| c.c_dense.norm().powi(2))
            .sum::<f64>()
            .sqrt();

    let mut best: Option<IpmResult> = None;
    let mut status = IpmStatus::MaxIterations;
    let mut iterations = opts.max_iter;

    for iter in 0..opts.max_iter {
        let ax = apply_a(&ctxs, &x, m);
        let r_p = &b_scaled - &ax;
        let asy = adjoint_blocks(&ctxs, y.as_slice());
        let r_d: Vec<BlockMat> = ctxs
            .iter()
            .enumerate()
            .map(|(bi, c)| {
                let mut rd = c.c_dense.clone();
                rd.axpy(-1.0, &asy[bi]);
                rd.axpy(-1.0, &s[bi]);
                rd
            })
            .collect();

        let gap: f64 = x.iter().zip(&s).map(|(xb, sb)| xb.dot(sb)).sum();
        let mu = gap / nu;
        let pobj: f64 = ctxs.iter().zip(&x).map(|(c, xb)| c.c_dense.dot(xb)).sum();
        let dobj = b_scaled.dot(&y);

        let rel_p = r_p.norm() / b_norm;
        let rel_d = r_d.iter().map(|r| r.norm().powi(2)).sum::<f64>().sqrt() / c_norm;
        let rel_gap = gap.abs() / (1.0 + pobj.abs().max(dobj.abs()));

        if opts.verbose {
            eprintln!(
                "ipm {iter:3}  mu {mu:9.2e}  rp {rel_p:8.2e}  rd {rel_d:8.2e}  gap {rel_gap:8.2e}  pobj {:+.6e}",
                pobj * obj_norm
            );
        }

        let snapshot = |st: IpmStatus, it: usize| IpmResult {
            status: st,
            x: x.clone(),
            y: unscale_y(&y, &row_scale, obj_norm),
            s: s.iter().map(|sb| scaled_block(sb, obj_norm)).collect(),
            iterations: it,
            primal_objective: pobj * obj_norm,
            dual_objective: dobj * obj_norm,
            rel_primal_infeas: rel_p,
            rel_dual_infeas: rel_d,
            rel_gap,
        };

        let score_of = |p: f64, d: f64, g: f64| {
            if opts.accept_dual_only {
                d + g
            } else {
                p.max(d) + g
            }
        };
        let score = score_of(rel_p, rel_d, rel_gap);
        if best
            .as_ref()
            .map(|b| score < score_of(b.rel_primal_infeas, b.rel_dual_infeas, b.rel_gap))
            .unwrap_or(true)
        {
            best = Some(snapshot(IpmStatus::Optimal, iter));
        }

        if rel_p < opts.tol && rel_d < opts.tol && rel_gap < opts.tol {
            status = IpmStatus::Optimal;
            iterations = iter;
            break;
        }
        if pobj * obj_norm < -1e9 && rel_p < 1e-6 {
            status = IpmStatus::DualInfeasible;
            iterations = iter;
            break;
        }
        if dobj * obj_norm > 1e9 && rel_d < 1e-6 {
            status = IpmStatus::PrimalInfeasible;
            iterations = iter;
            break;
        }

        let scalings: Option<Vec<Scaling>> = x
            .iter()
            .zip(&s)
            .map(|(xb, sb)| nt_scaling(xb, sb))
            .collect();
        let Some(scalings) = scalings else {
            status = IpmStatus::NumericalFailure;
            iterations = iter;
            break;
        };

        let schur = assemble_schur(&ctxs, &scalings, m);
        let mut chol = None;
        let mut reg = 1e-13 * (1.0 + schur_diag_max(&schur));
        for _ in 0..8 {
            let mut m_reg = schur.clone();
            for i in 0..m {
                m_reg[(i, i)] += reg;
            }
            if let Some(c) = m_reg.cholesky() {
                chol = Some(c);
                break;
            }
            reg *= 100.0;
        }
        let Some(chol) = chol else {
            status = IpmStatus::NumericalFailure;
            iterations = iter;
            break;
        };

        let wrdw: Vec<BlockMat> = scalings
            .iter()
            .zip(&r_d)
            .map(|(sc, rd)| congruence_w(sc, rd))
            .collect();

        // predictor: R3 = -X
        let r3_aff: Vec<BlockMat> = x
            .iter()
            .map(|xb| {
                let mut t = xb.clone();
                t.scale(-1.0);
                t
            })
            .collect();
        let rhs_aff = schur_rhs(&ctxs, &r_p, &r3_aff, &wrdw, m);
        let dy_aff = chol.solve(&rhs_aff);
        let (dx_aff, ds_aff) = recover_directions(&ctxs, &scalings, &r_d, &r3_aff, &dy_aff);

        let ap_aff = max_step(&x, &dx_aff, &scalings, true).min(1.0);
        let ad_aff = max_step(&s, &ds_aff, &scalings, false).min(1.0);
        let gap_aff: f64 = (0..ctxs.len())
            .map(|bi| {
                let mut xn = x[bi].clone();
                xn.axpy(ap_aff, &dx_aff[bi]);
                let mut sn = s[bi].clone();
                sn.axpy(ad_aff, &ds_aff[bi]);
                xn.dot(&sn)
            })
            .sum();
        let mu_aff = (gap_aff / nu).max(0.0);
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-8, 1.0);

        // corrector
        let r3: Vec<BlockMat> = (0..ctxs.len())
            .map(|bi| corrector_r3(&scalings[bi], &dx_aff[bi], &ds_aff[bi], sigma * mu))
            .collect();
        let rhs = schur_rhs(&ctxs, &r_p, &r3, &wrdw, m);
        let dy = chol.solve(&rhs);
        let (dx, ds) = recover_directions(&ctxs, &scalings, &r_d, &r3, &dy);

        let alpha_p = (opts.step_frac * max_step(&x, &dx, &scalings, true)).min(1.0);
        let alpha_d = (opts.step_frac * max_step(&s, &ds, &scalings, false)).min(1.0);

        if alpha_p < 1e-10 && alpha_d < 1e-10 {
            status = IpmStatus::NumericalFailure;
            iterations = iter;
            break;
        }

        for bi in 0..ctxs.len() {
            x[bi].axpy(alpha_p, &dx[bi]);
            s[bi].axpy(alpha_d, &ds[bi]);
        }
        y.axpy(alpha_d, &dy, 1.0);
    }

    let mut out = best.expect("at least one iterate recorded");
    out.status = status;
    out.iterations = iterations;
    if status == IpmStatus::Optimal {
        out.x = x;
        out.y = unscale_y(&y, &row_scale, obj_norm);
        out.s = s.iter().map(|sb| scaled_block(sb, obj_norm)).collect();
    } else if matches!(status, IpmStatus::MaxIterations | IpmStatus::NumericalFailure) {
        let feas = if opts.accept_dual_only {
            out.rel_dual_infeas
        } else {
            out.rel_primal_infeas.max(out.rel_dual_infeas)
        };
        if feas < opts.tol_acceptable && out.rel_gap < opts.tol_acceptable {
            // converged to reduced precision before stalling
            out.status = IpmStatus::Optimal;
        }
    }
    out
}

fn scaled_block(s: &BlockMat, factor: f64) -> BlockMat {
    let mut out = s.clone();
    out.scale(factor);
    out
}

fn unscale_y(y: &DVector<f64>, row_scale: &[f64], obj_norm: f64) -> DVector<f64> {
    DVector::from_iterator(
        y.len(),
        y.iter().zip(row_scale).map(|(yi, s)| yi * s * obj_norm),
    )
}

fn coeff_norm(prog: &ConeProgram, a: &crate::cone::ConstraintMatrix) -> f64 {
    let mut sq = 0.0;
    for (bi, coeff) in &a.blocks {
        sq += prog.coeff_dense(*bi, coeff).norm_squared();
    }
    sq.sqrt()
}

fn build_contexts(prog: &ConeProgram, row_scale: &[f64], obj_norm: f64) -> Vec<BlockCtx> {
    let mut ctxs: Vec<BlockCtx> = prog
        .blocks
        .iter()
        .enumerate()
        .map(|(bi, k)| BlockCtx {
            kind: *k,
            maps: prog.maps[bi].clone(),
            items: Vec::new(),
            dense: Vec::new(),
            c_dense: BlockMat::zeros_like(*k),
        })
        .collect();

    for (k, a) in prog.constraints.iter().enumerate() {
        for (bi, coeff) in &a.blocks {
            let ctx = &mut ctxs[*bi];
            let scale = row_scale[k];
            let form = match coeff {
                SymCoeff::Sparse(e) => {
                    let scaled: Vec<_> = e.iter().map(|&(i, j, v)| (i, j, v * scale)).collect();
                    ItemForm::Sparse(full_entries(&scaled))
                }
                SymCoeff::Dense(d) => {
                    ctx.dense.push(d * scale);
                    ItemForm::Dense(ctx.dense.len() - 1)
                }
                SymCoeff::Congr { map, entries } => {
                    let scaled: Vec<_> =
                        entries.iter().map(|&(i, j, v)| (i, j, v * scale)).collect();
                    ItemForm::Congr(*map, full_entries(&scaled))
                }
            };
            ctx.items.push(Item { con: k, form });
        }
    }
    for (bi, coeff) in &prog.objective.blocks {
        let dense = prog.coeff_dense(*bi, coeff);
        match &mut ctxs[*bi].c_dense {
            BlockMat::Dense(c) => *c += dense / obj_norm,
            BlockMat::Diag(c) => {
                for i in 0..c.len() {
                    c[i] += dense[(i, i)] / obj_norm;
                }
            }
        }
    }
    ctxs
}

/// `<A_k, T>` for every constraint, with per-map caching of `K T K'`.
fn apply_a(ctxs: &[BlockCtx], t: &[BlockMat], m: usize) -> DVector<f64> {
    let mut out = DVector::<f64>::zeros(m);
    for (bi, ctx) in ctxs.iter().enumerate() {
        match &t[bi] {
            BlockMat::Dense(tm) => {
                let cache: Vec<DMatrix<f64>> = ctx
                    .maps
                    .iter()
                    .map(|k| k * tm * k.transpose())
                    .collect();
                for item in &ctx.items {
                    let v = match &item.form {
                        ItemForm::Sparse(full) => full_inner(full, tm),
                        ItemForm::Dense(di) => ctx.dense[*di].dot(tm),
                        ItemForm::Congr(map, full) => full_inner(full, &cache[*map]),
                    };
                    out[item.con] += v;
                }
            }
            BlockMat::Diag(tv) => {
                for item in &ctx.items {
                    if let ItemForm::Sparse(full) = &item.form {
                        let mut svals = 0.0;
                        for &(i, j, v) in full {
                            if i == j {
                                svals += v * tv[i];
                            }
                        }
                        out[item.con] += svals;
                    }
                }
            }
        }
    }
    out
}

fn adjoint_blocks(ctxs: &[BlockCtx], y: &[f64]) -> Vec<BlockMat> {
    let mut out: Vec<BlockMat> = ctxs.iter().map(|c| BlockMat::zeros_like(c.kind)).collect();
    for (bi, ctx) in ctxs.iter().enumerate() {
        let mut pre: Vec<Option<DMatrix<f64>>> = ctx.maps.iter().map(|_| None).collect();
        for item in &ctx.items {
            let yk = y[item.con];
            if yk == 0.0 {
                continue;
            }
            match (&mut out[bi], &item.form) {
                (BlockMat::Dense(acc), ItemForm::Sparse(full)) => {
                    for &(i, j, v) in full {
                        acc[(i, j)] += yk * v;
                    }
                }
                (BlockMat::Dense(acc), ItemForm::Dense(di)) => {
                    acc.zip_apply(&ctx.dense[*di], |x, a| *x += yk * a);
                }
                (BlockMat::Dense(_), ItemForm::Congr(map, full)) => {
                    let n_pre = ctx.maps[*map].nrows();
                    let acc = pre[*map].get_or_insert_with(|| DMatrix::zeros(n_pre, n_pre));
                    for &(i, j, v) in full {
                        acc[(i, j)] += yk * v;
                    }
                }
                (BlockMat::Diag(acc), ItemForm::Sparse(full)) => {
                    for &(i, j, v) in full {
                        debug_assert_eq!(i, j);
                        acc[i] += yk * v;
                    }
                }
                _ => panic!("invalid coefficient on diagonal block"),
            }
        }
        for (mi, p) in pre.into_iter().enumerate() {
            if let Some(e) = p {
                if let BlockMat::Dense(acc) = &mut out[bi] {
                    let k = &ctx.maps[mi];
                    *acc += k.transpose() * e * k;
                }
            }
        }
    }
    out
}

fn nt_scaling(x: &BlockMat, s: &BlockMat) -> Option<Scaling> {
    match (x, s) {
        (BlockMat::Dense(xm), BlockMat::Dense(sm)) => {
            let lx = xm.clone().cholesky()?;
            let ls = sm.clone().cholesky()?;
            let prod = ls.l().transpose() * lx.l();
            let svd = prod.svd(true, true);
            let u = svd.u?;
            let vt = svd.v_t?;
            let sigma = svd.singular_values;
            if sigma.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return None;
            }
            let sig_inv_half = DMatrix::from_diagonal(&sigma.map(|v| 1.0 / v.sqrt()));
            let r = lx.l() * vt.transpose() * &sig_inv_half;
            let r_inv = sig_inv_half * u.transpose() * ls.l().transpose();
            let w = &r * r.transpose();
            Some(Scaling::Psd { w, r, r_inv, sigma })
        }
        (BlockMat::Diag(xv), BlockMat::Diag(sv)) => {
            if xv.iter().any(|&v| v <= 0.0) || sv.iter().any(|&v| v <= 0.0) {
                return None;
            }
            let w = xv.zip_map(sv, |xi, si| (xi / si).sqrt());
            let sigma = xv.zip_map(sv, |xi, si| (xi * si).sqrt());
            Some(Scaling::Diag { w, sigma })
        }
        _ => None,
    }
}

fn congruence_w(sc: &Scaling, t: &BlockMat) -> BlockMat {
    match (sc, t) {
        (Scaling::Psd { w, .. }, BlockMat::Dense(tm)) => BlockMat::Dense(w * tm * w),
        (Scaling::Diag { w, .. }, BlockMat::Diag(tv)) => {
            BlockMat::Diag(tv.zip_map(w, |t, wi| t * wi * wi))
        }
        _ => panic!("block kind mismatch"),
    }
}

fn schur_diag_max(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max)
}

fn assemble_schur(ctxs: &[BlockCtx], scalings: &[Scaling], m: usize) -> DMatrix<f64> {
    let mut schur = DMatrix::<f64>::zeros(m, m);
    for (bi, ctx) in ctxs.iter().enumerate() {
        match &scalings[bi] {
            Scaling::Psd { w, .. } => {
                let waw: Vec<DMatrix<f64>> = ctx.dense.iter().map(|a| w * a * w).collect();
                let kw: Vec<DMatrix<f64>> = ctx.maps.iter().map(|k| k * w).collect();
                let cross: Vec<Vec<DMatrix<f64>>> = ctx
                    .maps
                    .iter()
                    .enumerate()
                    .map(|(i, _)| {
                        ctx.maps
                            .iter()
                            .map(|kj| &kw[i] * kj.transpose())
                            .collect()
                    })
                    .collect();
                let mut kwawk: Vec<Vec<Option<DMatrix<f64>>>> =
                    vec![vec![None; waw.len()]; ctx.maps.len()];

                for (ii, a) in ctx.items.iter().enumerate() {
                    for b in ctx.items.iter().take(ii + 1) {
                        let val = match (&a.form, &b.form) {
                            (ItemForm::Sparse(fa), ItemForm::Sparse(fb)) => pair_sparse(fa, fb, w),
                            (ItemForm::Sparse(fa), ItemForm::Dense(di))
                            | (ItemForm::Dense(di), ItemForm::Sparse(fa)) => {
                                full_inner(fa, &waw[*di])
                            }
                            (ItemForm::Dense(da), ItemForm::Dense(db)) => {
                                waw[*da].dot(&ctx.dense[*db])
                            }
                            (ItemForm::Congr(ma, fa), ItemForm::Congr(mb, fb)) => {
                                pair_sparse_rect(fa, fb, &cross[*ma][*mb])
                            }
                            (ItemForm::Congr(ma, fa), ItemForm::Sparse(fb))
                            | (ItemForm::Sparse(fb), ItemForm::Congr(ma, fa)) => {
                                pair_sparse_rect(fa, fb, &kw[*ma])
                            }
                            (ItemForm::Congr(ma, fa), ItemForm::Dense(db))
                            | (ItemForm::Dense(db), ItemForm::Congr(ma, fa)) => {
                                let k = &ctx.maps[*ma];
                                let cached = kwawk[*ma][*db]
                                    .get_or_insert_with(|| k * &waw[*db] * k.transpose());
                                full_inner(fa, cached)
                            }
                        };
                        schur[(a.con, b.con)] += val;
                        if a.con != b.con {
                            schur[(b.con, a.con)] += val;
                        }
                    }
                }
            }
            Scaling::Diag { w, .. } => {
                let lists: Vec<(usize, Vec<(usize, f64)>)> = ctx
                    .items
                    .iter()
                    .map(|it| {
                        let ItemForm::Sparse(full) = &it.form else {
                            panic!("diagonal block expects sparse items")
                        };
                        (
                            it.con,
                            full.iter()
                                .filter(|(i, j, _)| i == j)
                                .map(|&(i, _, v)| (i, v))
                                .collect(),
                        )
                    })
                    .collect();
                for (ii, (ca, la)) in lists.iter().enumerate() {
                    for (cb, lb) in lists.iter().take(ii + 1) {
                        let mut val = 0.0;
                        for &(i, va) in la {
                            for &(j, vb) in lb {
                                if i == j {
                                    val += va * vb * w[i] * w[i];
                                }
                            }
                        }
                        if val != 0.0 {
                            schur[(*ca, *cb)] += val;
                            if ca != cb {
                                schur[(*cb, *ca)] += val;
                            }
                        }
                    }
                }
            }
        }
    }
    schur
}

/// tr(A W B W) for sparse full lists A, B in block space.
fn pair_sparse(
    fa: &[(usize, usize, f64)],
    fb: &[(usize, usize, f64)],
    w: &DMatrix<f64>,
) -> f64 {
    let mut acc = 0.0;
    for &(p, q, va) in fa {
        for &(r, s, vb) in fb {
            acc += va * vb * w[(q, r)] * w[(s, p)];
        }
    }
    acc
}

/// tr(Ea G Eb G') for sparse pre-space lists against a rectangular product
/// matrix G (`G = Ka W Kb'`, or `K W` when Eb lives in block space).
fn pair_sparse_rect(
    fa: &[(usize, usize, f64)],
    fb: &[(usize, usize, f64)],
    g: &DMatrix<f64>,
) -> f64 {
    let mut acc = 0.0;
    for &(p, q, va) in fa {
        for &(r, s, vb) in fb {
            acc += va * vb * g[(q, r)] * g[(p, s)];
        }
    }
    acc
}

fn full_inner(full: &[(usize, usize, f64)], x: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for &(i, j, v) in full {
        s += v * x[(j, i)];
    }
    s
}

/// rhs_k = r_p[k] - <A_k, R3 - W R_d W>
fn schur_rhs(
    ctxs: &[BlockCtx],
    r_p: &DVector<f64>,
    r3: &[BlockMat],
    wrdw: &[BlockMat],
    m: usize,
) -> DVector<f64> {
    let t: Vec<BlockMat> = r3
        .iter()
        .zip(wrdw)
        .map(|(a, b)| {
            let mut t = a.clone();
            t.axpy(-1.0, b);
            t
        })
        .collect();
    let at = apply_a(ctxs, &t, m);
    r_p - at
}

fn recover_directions(
    ctxs: &[BlockCtx],
    scalings: &[Scaling],
    r_d: &[BlockMat],
    r3: &[BlockMat],
    dy: &DVector<f64>,
) -> (Vec<BlockMat>, Vec<BlockMat>) {
    let ady = adjoint_blocks(ctxs, dy.as_slice());
    let mut ds = Vec::with_capacity(ctxs.len());
    let mut dx = Vec::with_capacity(ctxs.len());
    for bi in 0..ctxs.len() {
        let mut dsb = r_d[bi].clone();
        dsb.axpy(-1.0, &ady[bi]);
        let wdsw = congruence_w(&scalings[bi], &dsb);
        let mut dxb = r3[bi].clone();
        dxb.axpy(-1.0, &wdsw);
        dx.push(dxb);
        ds.push(dsb);
    }
    (dx, ds)
}

/// Largest step keeping the block in the cone, computed in the scaled space
/// where the current point is the diagonal matrix Sigma.
fn max_step(vals: &[BlockMat], dirs: &[BlockMat], scalings: &[Scaling], primal: bool) -> f64 {
    let mut alpha = f64::INFINITY;
    for ((v, d), sc) in vals.iter().zip(dirs).zip(scalings) {
        let a = match (v, d, sc) {
            (BlockMat::Dense(_), BlockMat::Dense(dm), Scaling::Psd { r, r_inv, sigma, .. }) => {
                let h = if primal {
                    r_inv * dm * r_inv.transpose()
                } else {
                    r.transpose() * dm * r
                };
                let mut hs = h;
                for i in 0..hs.nrows() {
                    for j in 0..hs.ncols() {
                        hs[(i, j)] /= (sigma[i] * sigma[j]).sqrt();
                    }
                }
                let min_eig = hs
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                if min_eig >= 0.0 {
                    f64::INFINITY
                } else {
                    -1.0 / min_eig
                }
            }
            (BlockMat::Diag(xv), BlockMat::Diag(dv), _) => {
                let mut a = f64::INFINITY;
                for i in 0..xv.len() {
                    if dv[i] < 0.0 {
                        a = a.min(-xv[i] / dv[i]);
                    }
                }
                a
            }
            _ => panic!("block kind mismatch"),
        };
        alpha = alpha.min(a);
    }
    alpha
}

/// Corrector right-hand side for one block:
/// `R3 = R L_Sigma^{-1}(sigma_mu I - Sigma^2 - sym(dLp dLd)) R'`
/// with `dLp = R^-1 dX R^-T`, `dLd = R' dS R`.
fn corrector_r3(sc: &Scaling, dx_aff: &BlockMat, ds_aff: &BlockMat, sigma_mu: f64) -> BlockMat {
    match (sc, dx_aff, ds_aff) {
        (Scaling::Psd { r, r_inv, sigma, .. }, BlockMat::Dense(dxm), BlockMat::Dense(dsm)) => {
            let dlp = r_inv * dxm * r_inv.transpose();
            let dld = r.transpose() * dsm * r;
            let prod = &dlp * &dld;
            let n = sigma.len();
            let mut rhs = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let hot = 0.5 * (prod[(i, j)] + prod[(j, i)]);
                    let mut v = -hot;
                    if i == j {
                        v += sigma_mu - sigma[i] * sigma[i];
                    }
                    rhs[(i, j)] = 2.0 * v / (sigma[i] + sigma[j]);
                }
            }
            BlockMat::Dense(r * rhs * r.transpose())
        }
        (Scaling::Diag { w, sigma }, BlockMat::Diag(dxv), BlockMat::Diag(dsv)) => {
            let n = sigma.len();
            let mut out = DVector::<f64>::zeros(n);
            for i in 0..n {
                let dlp = dxv[i] / w[i];
                let dld = dsv[i] * w[i];
                let rhs = (sigma_mu - sigma[i] * sigma[i] - dlp * dld) / sigma[i];
                out[i] = w[i] * rhs;
            }
            BlockMat::Diag(out)
        }
        _ => panic!("block kind mismatch"),
    }
}
