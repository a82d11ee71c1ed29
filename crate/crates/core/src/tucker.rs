//! Tucker tensors, RHOSVD compression of canonical tensors and the
//! canonical-Tucker-canonical rank reduction.
//!
//! The compression runs in two stages. A column-pivoted Gram–Schmidt pass per
//! mode finds an orthonormal basis `Q_d` that captures every weighted column
//! up to a residual whose effect on the tensor is bounded by
//! `ν_d = Σ_k |w_k|·‖e_k‖`. The tensor is then expressed in the coordinates of
//! those bases, where the truncated SVDs of the weighted side matrices and
//! the exact error certification cost `O(R²·q)` instead of `O(R²·n)`.
//!
//! Both stages are orthogonal to each other, so the certified error is
//! `sqrt(Σ_d ν_d² + e²)` with `e` the exactly computed error of the second
//! stage.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalTensor3;
use crate::cp_fit::{als, Core};
use crate::error::{Error, Result};
use crate::grid::{Axis, Index3};

/// How aggressively to truncate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    /// Relative Frobenius error bound.
    Relative(f64),
    /// Upper bound on every mode rank, with no error target.
    RankCap(usize),
}

impl Tolerance {
    fn validate(self) -> Result<Self> {
        match self {
            Tolerance::Relative(e) if !(e > 0.0) || !e.is_finite() => Err(Error::InvalidArgument(
                format!("tolerance must be positive and finite, got {e}"),
            )),
            Tolerance::RankCap(0) => Err(Error::InvalidArgument("rank cap must be at least 1".into())),
            t => Ok(t),
        }
    }
}

/// `core ×₁ F₁ ×₂ F₂ ×₃ F₃` with column-orthonormal factors.
#[derive(Clone, Debug)]
pub struct TuckerTensor3 {
    axes: [Axis; 3],
    ranks: Index3,
    /// `core[(a·r₂ + b)·r₃ + c]`.
    core: Vec<f64>,
    factors: [DMatrix<f64>; 3],
    certified_error: f64,
    norm_lower: f64,
}

impl TuckerTensor3 {
    pub fn new(axes: [Axis; 3], core: Vec<f64>, factors: [DMatrix<f64>; 3]) -> Result<Self> {
        let ranks = [factors[0].ncols(), factors[1].ncols(), factors[2].ncols()];
        for d in 0..3 {
            if factors[d].nrows() != axes[d].len {
                return Err(Error::InvalidArgument(format!("factor {d} has wrong length")));
            }
        }
        if core.len() != ranks.iter().product::<usize>() {
            return Err(Error::InvalidArgument("core size does not match ranks".into()));
        }
        let norm = core.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Self {
            axes,
            ranks,
            core,
            factors,
            certified_error: 0.0,
            norm_lower: norm,
        })
    }

    pub fn ranks(&self) -> Index3 {
        self.ranks
    }

    pub fn axes(&self) -> &[Axis; 3] {
        &self.axes
    }

    pub fn core(&self) -> &[f64] {
        &self.core
    }

    pub fn factor(&self, d: usize) -> &DMatrix<f64> {
        &self.factors[d]
    }

    /// Certified absolute Frobenius distance to the tensor it was built from.
    pub fn certified_error(&self) -> f64 {
        self.certified_error
    }

    /// Lower bound on the Frobenius norm of the source tensor.
    pub fn source_norm(&self) -> f64 {
        self.norm_lower
    }

    pub fn relative_error(&self) -> f64 {
        if self.norm_lower > 0.0 {
            self.certified_error / self.norm_lower
        } else {
            0.0
        }
    }

    pub fn eval_at_index(&self, idx: Index3) -> f64 {
        let [r1, r2, r3] = self.ranks;
        let mut s = 0.0;
        for a in 0..r1 {
            let fa = self.factors[0][(idx[0], a)];
            for b in 0..r2 {
                let fb = self.factors[1][(idx[1], b)];
                let base = (a * r2 + b) * r3;
                for c in 0..r3 {
                    s += self.core[base + c] * fa * fb * self.factors[2][(idx[2], c)];
                }
            }
        }
        s
    }

    /// `max |FᵀF − I|` over the three factors.
    pub fn orthonormality_defect(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let g = f.tr_mul(f);
                let mut m: f64 = 0.0;
                for i in 0..g.nrows() {
                    for j in 0..g.ncols() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        m = m.max((g[(i, j)] - e).abs());
                    }
                }
                m
            })
            .fold(0.0, f64::max)
    }
}

/// Incremental column-pivoted Gram–Schmidt with an explicit residual.
struct PivotedBasis {
    q: Vec<DVector<f64>>,
    /// Row `j` holds `⟨q_j, a_k⟩` for every column `k`.
    coef: Vec<DVector<f64>>,
    resid: DMatrix<f64>,
    rnorm: Vec<f64>,
}

impl PivotedBasis {
    fn new(unit_cols: DMatrix<f64>) -> Self {
        let rnorm = unit_cols.column_iter().map(|c| c.norm()).collect();
        Self {
            q: Vec::new(),
            coef: Vec::new(),
            resid: unit_cols,
            rnorm,
        }
    }

    fn weighted_residual(&self, w: &[f64]) -> f64 {
        self.rnorm.iter().zip(w).map(|(r, w)| r * w.abs()).sum()
    }

    /// Adds one basis vector; returns false when nothing is left to capture.
    fn step(&mut self, w: &[f64], floor: f64) -> bool {
        let n = self.resid.nrows();
        if self.q.len() >= n {
            return false;
        }
        let (p, score) = self
            .rnorm
            .iter()
            .zip(w)
            .map(|(r, w)| r * w.abs())
            .enumerate()
            .fold((0, -1.0), |acc, (k, s)| if s > acc.1 { (k, s) } else { acc });
        if score <= floor {
            return false;
        }
        let mut v: DVector<f64> = self.resid.column(p).into_owned();
        for _ in 0..2 {
            for qj in &self.q {
                let c = qj.dot(&v);
                v.axpy(-c, qj, 1.0);
            }
        }
        let nv = v.norm();
        if !(nv > 1e-3 * self.rnorm[p]) || nv == 0.0 {
            // The pivot is numerically inside the current span already.
            self.rnorm[p] = 0.0;
            self.resid.column_mut(p).fill(0.0);
            return true;
        }
        v /= nv;
        let c = self.resid.tr_mul(&v);
        self.resid.ger(-1.0, &v, &c, 1.0);
        for (k, col) in self.resid.column_iter().enumerate() {
            self.rnorm[k] = col.norm();
        }
        // Accumulated coefficients use the full columns: since v ⟂ Q the
        // projection of the residual equals the projection of the column.
        self.q.push(v);
        self.coef.push(c);
        true
    }

    fn run(&mut self, w: &[f64], tau: f64, max_q: usize, floor: f64) {
        while self.q.len() < max_q && self.weighted_residual(w) > tau {
            if !self.step(w, floor) {
                break;
            }
        }
    }

    fn q_matrix(&self) -> DMatrix<f64> {
        let n = self.resid.nrows();
        if self.q.is_empty() {
            return DMatrix::zeros(n, 0);
        }
        DMatrix::from_columns(&self.q)
    }

    fn coef_matrix(&self) -> DMatrix<f64> {
        let r = self.resid.ncols();
        let mut c = DMatrix::zeros(self.coef.len(), r);
        for (j, row) in self.coef.iter().enumerate() {
            c.row_mut(j).copy_from(&row.transpose());
        }
        c
    }
}

/// `wᵀ (A ∘ B ∘ C) w`.
fn hadamard_form(w: &DVector<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> f64 {
    let r = w.len();
    let mut s = 0.0;
    for j in 0..r {
        let mut col = 0.0;
        for i in 0..r {
            col += w[i] * a[(i, j)] * b[(i, j)] * c[(i, j)];
        }
        s += col * w[j];
    }
    s
}

fn tail_rank(sv: &[f64], tau: f64) -> usize {
    // smallest r with sqrt(Σ_{j ≥ r} σ_j²) ≤ tau
    let mut tail = 0.0;
    let mut r = sv.len();
    while r > 0 {
        let t = tail + sv[r - 1] * sv[r - 1];
        if t.sqrt() > tau {
            break;
        }
        tail = t;
        r -= 1;
    }
    r
}

/// Left singular vectors and singular values of a `q × R` matrix.
fn left_svd(s: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let q = s.nrows();
    if q == 0 {
        return (DMatrix::zeros(0, 0), Vec::new());
    }
    // Work with the tall orientation so that U is the small factor.
    let svd = s.transpose().svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut u = DMatrix::zeros(q, order.len());
    let mut sv = Vec::with_capacity(order.len());
    for (j, &o) in order.iter().enumerate() {
        u.column_mut(j).copy_from(&vt.row(o).transpose());
        sv.push(svd.singular_values[o]);
    }
    (u, sv)
}

pub fn rhosvd_tucker(t: &CanonicalTensor3, tol: Tolerance) -> Result<TuckerTensor3> {
    let tol = tol.validate()?;
    if t.rank() == 0 {
        return Err(Error::InvalidArgument("cannot compress a rank-0 tensor".into()));
    }
    let axes = *t.axes();

    // Unit columns with the norms folded into the weights.
    let mut mats: [DMatrix<f64>; 3] = std::array::from_fn(|d| t.mode_matrix(d));
    let mut w: Vec<f64> = t.weights().to_vec();
    for m in mats.iter_mut() {
        for (k, mut col) in m.column_iter_mut().enumerate() {
            let nrm = col.norm();
            if nrm > 0.0 {
                col /= nrm;
            }
            w[k] *= nrm;
        }
    }
    let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] != 0.0 && w[k].is_finite()).collect();
    if keep.is_empty() {
        let factors = std::array::from_fn(|d| DMatrix::zeros(axes[d].len, 0));
        return TuckerTensor3::new(axes, Vec::new(), factors);
    }
    if keep.len() < w.len() {
        mats = std::array::from_fn(|d| mats[d].select_columns(&keep));
        w = keep.iter().map(|&k| w[k]).collect();
    }
    let r = w.len();
    let wv = DVector::from_column_slice(&w);
    let upper: f64 = w.iter().map(|x| x.abs()).sum();

    let (alpha, eps) = match tol {
        Tolerance::Relative(e) => (0.1 / 3f64.sqrt(), e),
        Tolerance::RankCap(_) => (0.0, 0.0),
    };
    let floor = 1e-15 * upper;
    let max_q: [usize; 3] = std::array::from_fn(|d| axes[d].len.min(r));
    let mut bases: Vec<PivotedBasis> = mats.into_iter().map(PivotedBasis::new).collect();

    // Tighten the first stage until its tolerance is tied to the actual norm.
    let mut scale = upper;
    let (coefs, grams, norm_lower) = loop {
        let tau = match tol {
            Tolerance::Relative(_) => alpha * eps * scale,
            Tolerance::RankCap(_) => 1e-13 * scale,
        };
        for (d, b) in bases.iter_mut().enumerate() {
            b.run(&w, tau, max_q[d], floor);
        }
        let coefs: [DMatrix<f64>; 3] = std::array::from_fn(|d| bases[d].coef_matrix());
        let grams: [DMatrix<f64>; 3] = std::array::from_fn(|d| coefs[d].tr_mul(&coefs[d]));
        let n2 = hadamard_form(&wv, &grams[0], &grams[1], &grams[2]).max(0.0);
        let nq = n2.sqrt();
        if scale <= 1.05 * nq || nq == 0.0 || matches!(tol, Tolerance::RankCap(_)) {
            break (coefs, grams, nq);
        }
        scale = nq;
    };
    let nu: [f64; 3] = std::array::from_fn(|d| bases[d].weighted_residual(&w));
    let nu2: f64 = nu.iter().map(|v| v * v).sum();

    // Second stage: truncated SVDs of the weighted side matrices C_d·diag(w).
    let svds: Vec<(DMatrix<f64>, Vec<f64>)> = coefs
        .iter()
        .map(|c| {
            let mut s = c.clone();
            for (k, mut col) in s.column_iter_mut().enumerate() {
                col *= w[k];
            }
            left_svd(&s)
        })
        .collect();

    let budget = match tol {
        Tolerance::Relative(e) => ((e * norm_lower).powi(2) - nu2).max(0.0).sqrt(),
        Tolerance::RankCap(_) => f64::INFINITY,
    };
    let mut tau = budget / 3f64.sqrt();
    let mut attempt = 0;
    let (ranks, projected, err_small) = loop {
        let ranks: [usize; 3] = std::array::from_fn(|d| {
            let sv = &svds[d].1;
            let rr = match tol {
                Tolerance::RankCap(cap) => cap.min(sv.len()),
                Tolerance::Relative(_) => tail_rank(sv, tau),
            };
            rr.max(1).min(svds[d].0.ncols())
        });
        let projected: [DMatrix<f64>; 3] =
            std::array::from_fn(|d| svds[d].0.columns(0, ranks[d]).tr_mul(&coefs[d]));
        let p: [DMatrix<f64>; 3] = std::array::from_fn(|d| projected[d].tr_mul(&projected[d]));
        let h: [DMatrix<f64>; 3] = std::array::from_fn(|d| {
            let res = &coefs[d] - svds[d].0.columns(0, ranks[d]) * &projected[d];
            res.tr_mul(&res)
        });
        let e2 = hadamard_form(&wv, &h[0], &grams[1], &grams[2])
            + hadamard_form(&wv, &p[0], &h[1], &grams[2])
            + hadamard_form(&wv, &p[0], &p[1], &h[2]);
        let e = e2.max(0.0).sqrt();
        let full = (0..3).all(|d| ranks[d] == svds[d].0.ncols());
        attempt += 1;
        if e <= budget || full || attempt > 40 {
            if e > budget && !full && matches!(tol, Tolerance::Relative(_)) {
                return Err(Error::ConstructionFailure(format!(
                    "rank selection did not certify: error {e:.3e} > budget {budget:.3e}"
                )));
            }
            break (ranks, projected, e);
        }
        tau *= 0.5;
    };

    // Core in the final bases.
    let [r1, r2, r3] = ranks;
    let mut core = vec![0.0; r1 * r2 * r3];
    for k in 0..r {
        let x = projected[0].column(k);
        let y = projected[1].column(k);
        let z = projected[2].column(k);
        for a in 0..r1 {
            let wa = w[k] * x[a];
            for b in 0..r2 {
                let wab = wa * y[b];
                let base = (a * r2 + b) * r3;
                for c in 0..r3 {
                    core[base + c] += wab * z[c];
                }
            }
        }
    }
    let factors: [DMatrix<f64>; 3] =
        std::array::from_fn(|d| bases[d].q_matrix() * svds[d].0.columns(0, ranks[d]));

    Ok(TuckerTensor3 {
        axes,
        ranks,
        core,
        factors,
        certified_error: (nu2 + err_small * err_small).sqrt(),
        norm_lower,
    })
}

struct OrthoTerm {
    weight: f64,
    vecs: [DVector<f64>; 3],
}

/// Mutually orthogonal unit rank-one terms of the core, largest first.
///
/// The core is unfolded along its mode of smallest rank; every singular
/// vector of that unfolding is a matrix over the two other modes, which is
/// split by a second SVD.
fn core_terms(tk: &TuckerTensor3) -> Vec<OrthoTerm> {
    let r = tk.ranks;
    if r[0] * r[1] * r[2] == 0 {
        return Vec::new();
    }
    let p = (0..3).min_by_key(|&d| (r[d], d)).expect("three modes");
    let (q, s) = match p {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let at = |i: [usize; 3]| tk.core[(i[0] * r[1] + i[1]) * r[2] + i[2]];
    let unf = DMatrix::from_fn(r[p], r[q] * r[s], |a, bc| {
        let mut i = [0; 3];
        i[p] = a;
        i[q] = bc / r[s];
        i[s] = bc % r[s];
        at(i)
    });
    let svd = unf.svd(true, true);
    let u = svd.u.expect("left vectors");
    let vt = svd.v_t.expect("right vectors");
    let mut terms = Vec::new();
    for j in 0..svd.singular_values.len() {
        let sv = svd.singular_values[j];
        if sv == 0.0 {
            continue;
        }
        let v = vt.row(j);
        let slice = DMatrix::from_fn(r[q], r[s], |b, c| v[b * r[s] + c]);
        let inner = slice.svd(true, true);
        let xu = inner.u.expect("left vectors");
        let yv = inner.v_t.expect("right vectors");
        for i in 0..inner.singular_values.len() {
            let l = inner.singular_values[i];
            if l == 0.0 {
                continue;
            }
            let mut vecs: [DVector<f64>; 3] = std::array::from_fn(|_| DVector::zeros(0));
            vecs[p] = u.column(j).into_owned();
            vecs[q] = xu.column(i).into_owned();
            vecs[s] = yv.row(i).transpose();
            terms.push(OrthoTerm { weight: sv * l, vecs });
        }
    }
    terms.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()));
    terms
}

fn terms_to_canonical(tk: &TuckerTensor3, terms: &[OrthoTerm]) -> CanonicalTensor3 {
    let rank = terms.len();
    let mats: [DMatrix<f64>; 3] = std::array::from_fn(|d| {
        let f = &tk.factors[d];
        let mut m = DMatrix::zeros(f.nrows(), rank);
        for (k, t) in terms.iter().enumerate() {
            m.column_mut(k).copy_from(&(f * &t.vecs[d]));
        }
        m
    });
    let w = terms.iter().map(|t| t.weight).collect();
    CanonicalTensor3::from_matrices(tk.axes, [&mats[0], &mats[1], &mats[2]], w)
}

/// Exact canonical re-expression with rank at most `r_min·r_mid`, the two
/// smallest Tucker ranks.
pub fn tucker_to_canonical(tk: &TuckerTensor3) -> CanonicalTensor3 {
    terms_to_canonical(tk, &core_terms(tk))
}

/// Canonical re-expression dropping the smallest orthogonal terms while the
/// dropped norm stays within `budget`; returns the tensor and the dropped norm.
pub fn tucker_to_canonical_truncated(
    tk: &TuckerTensor3,
    budget: f64,
    max_rank: Option<usize>,
) -> (CanonicalTensor3, f64) {
    let mut terms = core_terms(tk);
    let mut dropped2 = 0.0;
    while let Some(last) = terms.last() {
        let w2 = last.weight * last.weight;
        let over_cap = max_rank.is_some_and(|m| terms.len() > m);
        if over_cap || dropped2 + w2 <= budget * budget {
            dropped2 += w2;
            terms.pop();
        } else {
            break;
        }
    }
    (terms_to_canonical(tk, &terms), dropped2.sqrt())
}

/// Canonical re-expression of the lowest rank found by alternating least
/// squares within `budget`, started from the leading orthogonal terms and
/// bisecting on the rank. Falls back to the truncated orthogonal terms.
pub fn tucker_to_canonical_fitted(tk: &TuckerTensor3, budget: f64) -> (CanonicalTensor3, f64) {
    let (base, base_err) = tucker_to_canonical_truncated(tk, budget, None);
    let terms = core_terms(tk);
    let core = Core {
        data: &tk.core,
        dims: tk.ranks,
    };
    let init = |r: usize| -> [DMatrix<f64>; 3] {
        std::array::from_fn(|d| {
            let mut m = DMatrix::zeros(tk.ranks[d], r);
            for (k, t) in terms.iter().take(r).enumerate() {
                let s = if d == 0 { t.weight } else { 1.0 };
                m.column_mut(k).copy_from(&(&t.vecs[d] * s));
            }
            m
        })
    };
    let mut best: Option<([DMatrix<f64>; 3], f64)> = None;
    // A canonical rank below about the largest mode rank is rarely
    // reachable, so the bisection starts there.
    let floor = tk.ranks.iter().max().copied().unwrap_or(1) * 3 / 4;
    let (mut lo, mut hi) = (floor.max(1), base.rank().saturating_sub(1));
    while lo <= hi {
        let mid = (lo + hi) / 2;
        let (f, err) = als(&core, init(mid), 200, budget);
        if err <= budget {
            best = Some((f, err));
            hi = mid - 1;
        } else {
            lo = mid + 1;
        }
    }
    let Some((f, err)) = best else {
        return (base, base_err);
    };
    let rank = f[0].ncols();
    let mut weights = vec![1.0; rank];
    let mats: [DMatrix<f64>; 3] = std::array::from_fn(|d| {
        let mut m = &tk.factors[d] * &f[d];
        for k in 0..rank {
            let nrm = f[d].column(k).norm();
            if nrm > 0.0 {
                m.column_mut(k).scale_mut(1.0 / nrm);
            }
            weights[k] *= nrm;
        }
        m
    });
    (
        CanonicalTensor3::from_matrices(tk.axes, [&mats[0], &mats[1], &mats[2]], weights),
        err,
    )
}

/// Like [`reduce_rank`], with the canonical rank minimized by least-squares
/// fitting of the Tucker core. Slower, lower ranks.
pub fn reduce_rank_fitted(t: &CanonicalTensor3, eps: f64) -> Result<(CanonicalTensor3, CompressionReport)> {
    Tolerance::Relative(eps).validate()?;
    if t.rank() == 0 {
        return Err(Error::InvalidArgument("cannot compress a rank-0 tensor".into()));
    }
    let tk = rhosvd_tucker(t, Tolerance::Relative(eps * 0.7))?;
    let total = eps * tk.source_norm();
    let budget = (total * total - tk.certified_error().powi(2)).max(0.0).sqrt();
    let (c, dropped) = tucker_to_canonical_fitted(&tk, budget);
    finish(t, tk, c, dropped)
}

/// Outcome of a rank reduction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub input_rank: usize,
    pub output_rank: usize,
    pub tucker_ranks: Index3,
    /// Certified absolute Frobenius error.
    pub abs_error: f64,
    /// Lower bound on the input norm used to state the relative error.
    pub input_norm: f64,
}

impl CompressionReport {
    pub fn relative_error(&self) -> f64 {
        if self.input_norm > 0.0 {
            self.abs_error / self.input_norm
        } else {
            0.0
        }
    }
}

/// RHOSVD followed by canonical re-expression, never increasing the rank.
pub fn reduce_rank(t: &CanonicalTensor3, eps: f64) -> Result<(CanonicalTensor3, CompressionReport)> {
    Tolerance::Relative(eps).validate()?;
    if t.rank() == 0 {
        return Err(Error::InvalidArgument("cannot compress a rank-0 tensor".into()));
    }
    let tk = rhosvd_tucker(t, Tolerance::Relative(eps * 0.7))?;
    let total = eps * tk.source_norm();
    let budget = (total * total - tk.certified_error().powi(2)).max(0.0).sqrt();
    let (c, dropped) = tucker_to_canonical_truncated(&tk, budget, None);
    finish(t, tk, c, dropped)
}

/// Best-effort reduction to at most `max_rank` terms with a certified error.
pub fn reduce_rank_to(t: &CanonicalTensor3, max_rank: usize) -> Result<(CanonicalTensor3, CompressionReport)> {
    if max_rank == 0 {
        return Err(Error::InvalidArgument("rank cap must be at least 1".into()));
    }
    if t.rank() == 0 {
        return Err(Error::InvalidArgument("cannot compress a rank-0 tensor".into()));
    }
    let tk = rhosvd_tucker(t, Tolerance::RankCap(max_rank))?;
    let (c, dropped) = tucker_to_canonical_truncated(&tk, 0.0, Some(max_rank));
    finish(t, tk, c, dropped)
}

fn finish(
    t: &CanonicalTensor3,
    tk: TuckerTensor3,
    c: CanonicalTensor3,
    dropped: f64,
) -> Result<(CanonicalTensor3, CompressionReport)> {
    let abs_error = (tk.certified_error().powi(2) + dropped * dropped).sqrt();
    if c.rank() >= t.rank() {
        return Ok((
            t.clone(),
            CompressionReport {
                input_rank: t.rank(),
                output_rank: t.rank(),
                tucker_ranks: tk.ranks(),
                abs_error: 0.0,
                input_norm: tk.source_norm(),
            },
        ));
    }
    let report = CompressionReport {
        input_rank: t.rank(),
        output_rank: c.rank(),
        tucker_ranks: tk.ranks(),
        abs_error,
        input_norm: tk.source_norm(),
    };
    Ok((c, report))
}
