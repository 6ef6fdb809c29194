//! Conley-Zehnder and Robbin-Salamon indices of paths of symplectic matrices.
//!
//! A path `Phi(t)`, `t in [0, T]`, starting at the identity is graded by
//! locating its crossings (parameters where `det(Phi(t) - I) = 0`), restricting
//! the quadratic form `v -> omega0(v, Phi'(t) v)` to `ker(Phi(t) - I)` at each
//! crossing, and summing the signatures: half the signature at `t = 0`, the
//! full signature at interior crossings, and (for the Robbin-Salamon index)
//! half the signature at a terminal crossing.

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;

use crate::{Error, Result};

/// Numeric tolerances for the index engine.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Symplecticity check threshold for `|M^T J0 M - J0|`.
    pub tau_sym: f64,
    /// A parameter counts as a crossing when `|det(Phi(t) - I)|` refines below this.
    pub tau_cross: f64,
    /// Bisection / minimization resolution in `t`.
    pub tau_t: f64,
    /// Singular values below this span the kernel.
    pub tau_ker: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_sym: 1e-8,
            tau_cross: 1e-8,
            tau_t: 1e-10,
            tau_ker: 1e-6,
        }
    }
}

/// The standard complex structure `J0 = (0 -I; I 0)` on `R^{2n}`.
pub fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// The standard symplectic form `omega0(u, v) = <J0 u, v>`.
pub fn omega0(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let n = u.len() / 2;
    let mut acc = 0.0;
    for i in 0..n {
        // (J0 u) has -u[n+i] in slot i and u[i] in slot n+i.
        acc += -u[n + i] * v[i] + u[i] * v[n + i];
    }
    acc
}

/// A single symplectic matrix with its half-dimension.
#[derive(Debug, Clone)]
pub struct SymplecticMatrix {
    pub entries: DMatrix<f64>,
    pub n: usize,
}

impl SymplecticMatrix {
    /// Wraps a `2n x 2n` matrix, verifying `M^T J0 M = J0` and `det M = 1`.
    pub fn new(entries: DMatrix<f64>, tau: f64) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::Input(format!(
                "symplectic matrix must be square of even dimension, got {r}x{c}"
            )));
        }
        let n = r / 2;
        if !check_symplectic(&entries, tau) {
            return Err(Error::Input(
                "matrix is not symplectic within tolerance".into(),
            ));
        }
        Ok(SymplecticMatrix { entries, n })
    }
}

/// True iff `|M^T J0 M - J0|_inf <= tau`. Errors on odd or mismatched dimensions.
pub fn check_symplectic(m: &DMatrix<f64>, tau: f64) -> bool {
    let (r, c) = m.shape();
    if r != c || r == 0 || r % 2 != 0 {
        return false;
    }
    let j = standard_j(r / 2);
    let residual = m.transpose() * &j * m - &j;
    residual.iter().all(|x| x.abs() <= tau)
}

type EvalFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;

/// A parameterized family of symplectic matrices `Phi(t)`, `t in [0, T]`,
/// with `Phi(0) = I`.
pub struct SymplecticPath {
    pub n: usize,
    pub t_end: f64,
    pub grid_points: usize,
    eval: Box<EvalFn>,
    deriv: Option<Box<EvalFn>>,
    pub tol: Tolerances,
}

impl SymplecticPath {
    pub fn new<F>(n: usize, t_end: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if n == 0 || t_end <= 0.0 {
            return Err(Error::Input(
                "path requires n >= 1 and a positive terminal time".into(),
            ));
        }
        let p = SymplecticPath {
            n,
            t_end,
            grid_points: 256,
            eval: Box::new(eval),
            deriv: None,
            tol: Tolerances::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_deriv<F>(mut self, deriv: F) -> Self
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.deriv = Some(Box::new(deriv));
        self
    }

    pub fn with_grid(mut self, grid_points: usize) -> Result<Self> {
        if grid_points < 2 {
            return Err(Error::Input("grid_points must be >= 2".into()));
        }
        self.grid_points = grid_points;
        Ok(self)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// `Phi(t) = exp(t A)` for a constant generator `A` with `A^T J0 + J0 A = 0`.
    pub fn from_generator(gen: DMatrix<f64>, t_end: f64) -> Result<Self> {
        let (r, c) = gen.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::Input(format!(
                "generator must be square of even dimension, got {r}x{c}"
            )));
        }
        let n = r / 2;
        let j = standard_j(n);
        let lie_residual = gen.transpose() * &j + &j * &gen;
        if lie_residual.iter().any(|x| x.abs() > 1e-8) {
            return Err(Error::Input(
                "generator is not in the symplectic Lie algebra (A^T J0 + J0 A != 0)".into(),
            ));
        }
        let g = gen.clone();
        let gd = gen;
        SymplecticPath::new(n, t_end, move |t| (g.clone() * t).exp()).map(|p| {
            p.with_deriv(move |t| {
                let e = (gd.clone() * t).exp();
                &gd * e
            })
        })
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        (self.eval)(t)
    }

    /// `Phi'(t)`: analytic when supplied, else a second-order finite difference
    /// with step `h = T / (10 * grid_points)`, one-sided at the endpoints.
    pub fn deriv(&self, t: f64) -> DMatrix<f64> {
        if let Some(d) = &self.deriv {
            return d(t);
        }
        let h = self.t_end / (10.0 * self.grid_points as f64);
        if t - h < 0.0 {
            (self.eval(t) * -3.0 + self.eval(t + h) * 4.0 - self.eval(t + 2.0 * h)) / (2.0 * h)
        } else if t + h > self.t_end {
            (self.eval(t) * 3.0 - self.eval(t - h) * 4.0 + self.eval(t - 2.0 * h)) / (2.0 * h)
        } else {
            (self.eval(t + h) - self.eval(t - h)) / (2.0 * h)
        }
    }

    fn validate(&self) -> Result<()> {
        let id = DMatrix::identity(2 * self.n, 2 * self.n);
        let start = self.eval(0.0);
        if (&start - &id).iter().any(|x| x.abs() > self.tol.tau_sym * 10.0) {
            return Err(Error::Input("path must start at the identity".into()));
        }
        // Spot-check symplecticity along the path.
        for k in 0..=8 {
            let t = self.t_end * k as f64 / 8.0;
            if !check_symplectic(&self.eval(t), self.tol.tau_sym * 100.0) {
                return Err(Error::Input(format!(
                    "path leaves the symplectic group near t = {t}"
                )));
            }
        }
        Ok(())
    }

    /// The catenation `p * q`: runs `p` on `[0, T_p]`, then `Phi_p(T_p) * q(t - T_p)`.
    pub fn then(self, q: SymplecticPath) -> Result<SymplecticPath> {
        if self.n != q.n {
            return Err(Error::Input("catenation requires equal dimensions".into()));
        }
        let t1 = self.t_end;
        let end = self.eval(t1);
        let total = t1 + q.t_end;
        let n = self.n;
        let grid = self.grid_points.max(q.grid_points) * 2;
        SymplecticPath::new(n, total, move |t| {
            if t <= t1 {
                self.eval(t)
            } else {
                &end * q.eval(t - t1)
            }
        })?
        .with_grid(grid)
    }

    /// Block-diagonal direct sum of two paths over the same time interval.
    pub fn direct_sum(p: SymplecticPath, q: SymplecticPath) -> Result<SymplecticPath> {
        if (p.t_end - q.t_end).abs() > 1e-12 {
            return Err(Error::Input(
                "direct sum requires equal terminal times".into(),
            ));
        }
        let n = p.n + q.n;
        let t_end = p.t_end;
        let grid = p.grid_points.max(q.grid_points);
        let (np, nq) = (p.n, q.n);
        SymplecticPath::new(n, t_end, move |t| {
            let a = p.eval(t);
            let b = q.eval(t);
            // Interleave so that the (p, q) block split respects the
            // standard J0 on R^{2(np+nq)}: positions 0..np and n..n+np
            // belong to p, the rest to q.
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            let idx_p: Vec<usize> = (0..np).chain(n..n + np).collect();
            let idx_q: Vec<usize> = (np..np + nq).chain(n + np..2 * n).collect();
            for (bi, &gi) in idx_p.iter().enumerate() {
                for (bj, &gj) in idx_p.iter().enumerate() {
                    m[(gi, gj)] = a[(bi, bj)];
                }
            }
            for (bi, &gi) in idx_q.iter().enumerate() {
                for (bj, &gj) in idx_q.iter().enumerate() {
                    m[(gi, gj)] = b[(bi, bj)];
                }
            }
            m
        })?
        .with_grid(grid)
    }

    /// Conjugated path `A Phi(t) A^{-1}` for a fixed symplectic `A`.
    pub fn conjugate(self, a: DMatrix<f64>) -> Result<SymplecticPath> {
        if !check_symplectic(&a, 1e-6) {
            return Err(Error::Input("conjugating matrix must be symplectic".into()));
        }
        let a_inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Input("conjugating matrix is singular".into()))?;
        let grid = self.grid_points;
        SymplecticPath::new(self.n, self.t_end, move |t| &a * self.eval(t) * &a_inv)?
            .with_grid(grid)
    }
}

/// One crossing of the path: a parameter where `det(Phi(t) - I) = 0`,
/// together with the kernel, the crossing form, and its signature.
#[derive(Debug, Clone)]
pub struct Crossing {
    pub t: f64,
    pub kernel_basis: Vec<DVector<f64>>,
    pub form: DMatrix<f64>,
    pub signature: i64,
}

/// Signature of a symmetric matrix: eigenvalues in `[-tau, tau]` count as zero.
pub fn signature(s: &DMatrix<f64>, tau: f64) -> Result<i64> {
    let (r, c) = s.shape();
    if r != c {
        return Err(Error::Input("signature requires a square matrix".into()));
    }
    let asym = (s - s.transpose()).amax();
    if asym > tau.max(1e-12) * 10.0 {
        return Err(Error::Input(format!(
            "matrix is not symmetric within tolerance (max asymmetry {asym:.3e})"
        )));
    }
    if r == 0 {
        return Ok(0);
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut sig = 0i64;
    for lambda in eig.eigenvalues.iter() {
        if *lambda > tau {
            sig += 1;
        } else if *lambda < -tau {
            sig -= 1;
        }
    }
    Ok(sig)
}

fn det_shifted(p: &SymplecticPath, t: f64) -> f64 {
    let m = p.eval(t) - DMatrix::identity(2 * p.n, 2 * p.n);
    m.determinant()
}

fn bisect_zero(p: &SymplecticPath, mut lo: f64, mut hi: f64, tau_t: f64) -> f64 {
    let mut flo = det_shifted(p, lo);
    while hi - lo > tau_t {
        let mid = 0.5 * (lo + hi);
        let fm = det_shifted(p, mid);
        if (flo <= 0.0) == (fm <= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization of `|det(Phi(t) - I)|` on `[lo, hi]`.
fn minimize_abs(p: &SymplecticPath, mut lo: f64, mut hi: f64, tau_t: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INVPHI * (hi - lo);
    let mut b = lo + INVPHI * (hi - lo);
    let mut fa = det_shifted(p, a).abs();
    let mut fb = det_shifted(p, b).abs();
    while hi - lo > tau_t {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INVPHI * (hi - lo);
            fa = det_shifted(p, a).abs();
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INVPHI * (hi - lo);
            fb = det_shifted(p, b).abs();
        }
    }
    0.5 * (lo + hi)
}

fn kernel_basis(p: &SymplecticPath, t: f64) -> Vec<DVector<f64>> {
    let dim = 2 * p.n;
    let m = p.eval(t) - DMatrix::identity(dim, dim);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut basis = Vec::new();
    for (i, sv) in svd.singular_values.iter().enumerate() {
        if *sv < p.tol.tau_ker {
            basis.push(vt.row(i).transpose());
        }
    }
    basis
}

fn crossing_at(p: &SymplecticPath, t: f64) -> Result<Crossing> {
    let basis = kernel_basis(p, t);
    let d = p.deriv(t);
    let k = basis.len();
    let mut form = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let dv_j = &d * &basis[j];
            let dv_i = &d * &basis[i];
            form[(i, j)] = 0.5 * (omega0(&basis[i], &dv_j) + omega0(&basis[j], &dv_i));
        }
    }
    let sig = signature(&form, p.tol.tau_cross)?;
    Ok(Crossing {
        t,
        kernel_basis: basis,
        form,
        signature: sig,
    })
}

/// All isolated zeros of `t -> det(Phi(t) - I)` on `[0, T]`.
///
/// Sign changes on the sample grid are refined by bisection; touching zeros
/// (the determinant is nonnegative along rotation blocks) are caught by
/// refining every local minimum of `|det|`. `t = 0` is always a crossing.
/// A determinant vanishing on an interval wider than three grid cells is a
/// degenerate path and errors, unless the path is constant there (zero
/// crossing form), in which case the interval collapses to its endpoints.
pub fn find_crossings(p: &SymplecticPath) -> Result<Vec<Crossing>> {
    let num = p.grid_points.max(2);
    let dt = p.t_end / num as f64;
    let ts: Vec<f64> = (0..=num).map(|i| i as f64 * dt).collect();
    let gs: Vec<f64> = ts.iter().map(|&t| det_shifted(p, t)).collect();

    // Degenerate-interval scan. The run must span a fixed fraction of the
    // grid before it counts as degenerate: near t = 0 the determinant of a
    // 2n-dimensional path vanishes to order 2n, so a handful of sub-tolerance
    // cells around an honest crossing is expected, while a genuinely flat
    // determinant (e.g. a shear) stays below tolerance over a macroscopic
    // interval.
    let flat_len = (num / 16).max(3);
    let mut run_start = None;
    let mut flat_intervals: Vec<(usize, usize)> = Vec::new();
    for i in 0..=num {
        if gs[i].abs() < p.tol.tau_cross {
            if run_start.is_none() {
                run_start = Some(i);
            }
        } else if let Some(s) = run_start.take() {
            if i - s > flat_len {
                flat_intervals.push((s, i - 1));
            }
        }
    }
    if let Some(s) = run_start {
        if num + 1 - s > flat_len {
            flat_intervals.push((s, num));
        }
    }
    let mut flat_crossing_ts: Vec<f64> = Vec::new();
    for &(s, e) in &flat_intervals {
        // Tolerate a locally constant path; anything else must be perturbed.
        let mid = 0.5 * (ts[s] + ts[e]);
        let moving = [ts[s], mid, ts[e]]
            .iter()
            .any(|&t| p.deriv(t).amax() > p.tol.tau_cross.sqrt());
        if moving {
            return Err(Error::DegeneratePath { t: mid });
        }
        flat_crossing_ts.push(ts[s]);
        if e == num {
            flat_crossing_ts.push(p.t_end);
        }
    }
    let in_flat = |t: f64| {
        flat_intervals
            .iter()
            .any(|&(s, e)| t >= ts[s] - 0.5 * dt && t <= ts[e] + 0.5 * dt)
    };

    let mut zeros: Vec<f64> = vec![0.0];
    zeros.extend(flat_crossing_ts);

    // Sign changes.
    for i in 0..num {
        if gs[i] == 0.0 || gs[i + 1] == 0.0 {
            continue; // handled by the local-minimum pass / endpoints
        }
        if (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
            let t = bisect_zero(p, ts[i], ts[i + 1], p.tol.tau_t);
            if !in_flat(t) {
                zeros.push(t);
            }
        }
    }

    // Touching zeros: refine every local minimum of |det|.
    for i in 1..num {
        if gs[i].abs() <= gs[i - 1].abs() && gs[i].abs() <= gs[i + 1].abs() {
            let t = minimize_abs(p, ts[i - 1], ts[i + 1], p.tol.tau_t);
            if det_shifted(p, t).abs() < p.tol.tau_cross && !in_flat(t) {
                zeros.push(t);
            }
        }
    }
    // Terminal sample.
    if gs[num].abs() < p.tol.tau_cross && !in_flat(p.t_end) {
        zeros.push(p.t_end);
    } else if num >= 2 && gs[num].abs() <= gs[num - 1].abs() {
        let t = minimize_abs(p, ts[num - 1], p.t_end, p.tol.tau_t);
        if det_shifted(p, t).abs() < p.tol.tau_cross && !in_flat(t) {
            zeros.push(t);
        }
    }

    // Merge candidates closer than half a grid cell; snap near-endpoint hits.
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let merge_dist = 0.5 * dt;
    let mut merged: Vec<f64> = Vec::new();
    for t in zeros {
        let t = if t < merge_dist {
            0.0
        } else if p.t_end - t < merge_dist {
            p.t_end
        } else {
            t
        };
        match merged.last() {
            Some(&last) if (t - last).abs() < merge_dist => {}
            _ => merged.push(t),
        }
    }

    merged.into_iter().map(|t| crossing_at(p, t)).collect()
}

fn has_terminal(crossings: &[Crossing], p: &SymplecticPath) -> bool {
    crossings
        .last()
        .is_some_and(|c| (c.t - p.t_end).abs() < 1e-9 * p.t_end.max(1.0))
}

/// Conley-Zehnder index: `sign(Gamma(0))/2 + sum of interior signatures`.
/// Requires a nondegenerate endpoint (`det(Phi(T) - I) != 0`).
pub fn conley_zehnder(p: &SymplecticPath) -> Result<i64> {
    let crossings = find_crossings(p)?;
    if has_terminal(&crossings, p) {
        return Err(Error::DegenerateEndpoint);
    }
    let total = index_sum(&crossings, p, false);
    integral(total)
}

/// Robbin-Salamon index: the Conley-Zehnder sum plus half the terminal
/// signature when `T` is a crossing. A half-integer in general.
pub fn rs_index(p: &SymplecticPath) -> Result<Rational64> {
    let crossings = find_crossings(p)?;
    Ok(index_sum(&crossings, p, true))
}

/// Maslov index of a loop (`Phi(0) = Phi(T) = I`); always an integer.
pub fn loop_maslov(p: &SymplecticPath) -> Result<i64> {
    let id = DMatrix::identity(2 * p.n, 2 * p.n);
    if (p.eval(p.t_end) - &id).amax() > 1e-7 {
        return Err(Error::Input(
            "loop_maslov requires a loop: Phi(T) must equal the identity".into(),
        ));
    }
    integral(rs_index(p)?)
}

fn index_sum(crossings: &[Crossing], p: &SymplecticPath, include_terminal: bool) -> Rational64 {
    let mut total = Rational64::new(0, 1);
    for c in crossings {
        let terminal = (c.t - p.t_end).abs() < 1e-9 * p.t_end.max(1.0);
        if c.t == 0.0 || (terminal && include_terminal) {
            total += Rational64::new(c.signature, 2);
        } else if !terminal {
            total += Rational64::from_integer(c.signature);
        }
    }
    total
}

fn integral(r: Rational64) -> Result<i64> {
    if !r.is_integer() {
        return Err(Error::Input(format!(
            "index {r} is not an integer; the path is degenerate"
        )));
    }
    Ok(r.to_integer())
}
