//! Alternating least squares for small dense cores: finds a lower canonical
//! rank than the orthogonal splitting when the tolerance allows it.

use nalgebra::DMatrix;

/// Dense `r₀ × r₁ × r₂` array, index `(a·r₁ + b)·r₂ + c`.
pub(crate) struct Core<'a> {
    pub data: &'a [f64],
    pub dims: [usize; 3],
}

impl Core<'_> {
    fn norm2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `(r₀·r₁) × r₂` view as an owned matrix.
    fn as_ab_c(&self) -> DMatrix<f64> {
        let [a, b, c] = self.dims;
        DMatrix::from_row_slice(a * b, c, self.data)
    }
}

/// Khatri–Rao product with rows `(i·rows(y) + j)`.
fn khatri_rao(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let r = x.ncols();
    DMatrix::from_fn(x.nrows() * y.nrows(), r, |ij, k| {
        x[(ij / y.nrows(), k)] * y[(ij % y.nrows(), k)]
    })
}

fn gram(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.transpose() * m
}

fn solve_normal(m: &DMatrix<f64>, gram: DMatrix<f64>) -> DMatrix<f64> {
    let r = gram.nrows();
    let scale = (0..r).map(|i| gram[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let reg = gram + DMatrix::identity(r, r) * (1e-13 * scale);
    match reg.clone().cholesky() {
        Some(ch) => ch.solve(&m.transpose()).transpose(),
        None => m * reg.pseudo_inverse(1e-14 * scale).expect("pseudo-inverse"),
    }
}

/// Squared Frobenius distance between the core and the canonical tensor
/// with factor matrices `f` (weights folded in), computed by materializing
/// the difference.
pub(crate) fn residual2(core: &Core, f: &[DMatrix<f64>; 3]) -> f64 {
    let ab = khatri_rao(&f[0], &f[1]);
    let full = ab * f[2].transpose();
    let x = core.as_ab_c();
    (x - full).norm_squared()
}

/// Runs ALS from `f` until the residual drops to `target` or `iters` sweeps
/// pass. Returns the factors and their exact residual norm.
pub(crate) fn als(core: &Core, mut f: [DMatrix<f64>; 3], iters: usize, target: f64) -> ([DMatrix<f64>; 3], f64) {
    let x = core.as_ab_c();
    let [d0, d1, _] = core.dims;
    let xn2 = core.norm2();
    let target2 = target * target;
    let mut last = f64::INFINITY;
    for _ in 0..iters {
        // Y[(a,b),k] = Σ_c X[a,b,c] C[c,k]
        let y = &x * &f[2];
        let r = f[0].ncols();
        let mut m0 = DMatrix::zeros(d0, r);
        for a in 0..d0 {
            for k in 0..r {
                let mut s = 0.0;
                for b in 0..d1 {
                    s += y[(a * d1 + b, k)] * f[1][(b, k)];
                }
                m0[(a, k)] = s;
            }
        }
        f[0] = solve_normal(&m0, gram(&f[1]).component_mul(&gram(&f[2])));
        let mut m1 = DMatrix::zeros(d1, r);
        for b in 0..d1 {
            for k in 0..r {
                let mut s = 0.0;
                for a in 0..d0 {
                    s += y[(a * d1 + b, k)] * f[0][(a, k)];
                }
                m1[(b, k)] = s;
            }
        }
        f[1] = solve_normal(&m1, gram(&f[0]).component_mul(&gram(&f[2])));
        let m2 = x.transpose() * khatri_rao(&f[0], &f[1]);
        f[2] = solve_normal(&m2, gram(&f[0]).component_mul(&gram(&f[1])));
        // ‖X − CP‖² = ‖X‖² − 2⟨X, CP⟩ + ‖CP‖², with ⟨X, CP⟩ read off m2.
        let inner: f64 = m2.component_mul(&f[2]).sum();
        let cp2: f64 = gram(&f[0]).component_mul(&gram(&f[1])).component_mul(&gram(&f[2])).sum();
        let est = (xn2 - 2.0 * inner + cp2).max(0.0);
        // Stop with some margin below the target, or once progress stalls.
        if est <= 0.81 * target2 || est > (1.0 - 1e-4) * last {
            break;
        }
        last = est;
    }
    let err = residual2(core, &f).sqrt();
    (f, err)
}
