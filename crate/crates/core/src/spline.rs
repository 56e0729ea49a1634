//! Bicubic spline interpolation of velocity-grid tables.
//!
//! Tensor-product natural cubic splines, stored in Hermite form: node values
//! plus spline slopes `fx`, `fy` and the cross derivative `fxy`. A cubic on a
//! cell is fixed by its corner values and slopes, so per-point evaluation is a
//! 16-term dot product, independent of the grid size.

use ndarray::Array2;

use crate::grid::{ScalarFieldV, VelocityGrid};

/// Tridiagonal solve for natural-spline slopes at one fixed length. The
/// system is constant-coefficient, so the Thomas elimination factors depend
/// only on `n`; a table build runs 3n solves and shares one of these.
struct SlopeSolver {
    diag: Vec<f64>,
    rhs: Vec<f64>,
    m: Vec<f64>,
}

impl SlopeSolver {
    fn new(n: usize) -> Self {
        assert!(n >= 3);
        let mut diag = vec![4.0; n];
        for i in 2..n - 1 {
            diag[i] = 4.0 - 1.0 / diag[i - 1];
        }
        Self {
            diag,
            rhs: vec![0.0; n],
            m: vec![0.0; n],
        }
    }

    /// First derivatives of the natural cubic spline through `y` at uniform
    /// spacing `h`. Natural end conditions: zero second derivative at both
    /// ends, i.e. second derivatives m[1..n-1] solve
    /// `m[i-1] + 4 m[i] + m[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]) / h^2`.
    fn slopes(&mut self, y: &[f64], h: f64, out: &mut [f64]) {
        let n = self.diag.len();
        assert!(y.len() == n && out.len() == n);
        let (diag, rhs, m) = (&self.diag, &mut self.rhs, &mut self.m);
        let inv_h2 = 1.0 / (h * h);
        rhs[1] = 6.0 * (y[2] - 2.0 * y[1] + y[0]) * inv_h2;
        for i in 2..n - 1 {
            rhs[i] =
                6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) * inv_h2 - rhs[i - 1] / diag[i - 1];
        }
        m[0] = 0.0;
        m[n - 1] = 0.0;
        m[n - 2] = rhs[n - 2] / diag[n - 2];
        for i in (1..n - 2).rev() {
            m[i] = (rhs[i] - m[i + 1]) / diag[i];
        }
        for i in 0..n - 1 {
            out[i] = (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
        }
        out[n - 1] = (y[n - 1] - y[n - 2]) / h + h * (2.0 * m[n - 1] + m[n - 2]) / 6.0;
    }
}

#[cfg(test)]
fn natural_spline_slopes(y: &[f64], h: f64, out: &mut [f64]) {
    SlopeSolver::new(y.len()).slopes(y, h, out);
}

#[derive(Clone, Debug)]
pub struct BicubicTable {
    g: VelocityGrid,
    f: Array2<f64>,
    fx: Array2<f64>,
    fy: Array2<f64>,
    fxy: Array2<f64>,
}

/// Precomputed cell index and Hermite basis products for one evaluation
/// point. Moment assembly interpolates six tables per basis function at the
/// same `u(x)`, so the location work is shared through this struct.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    k: usize,
    l: usize,
    /// Products `bx[a] * by[b]` for the value/slope/cross blocks, with the
    /// spacing factors `h`, `h^2` already folded in.
    wf: [[f64; 2]; 2],
    wfx: [[f64; 2]; 2],
    wfy: [[f64; 2]; 2],
    wfxy: [[f64; 2]; 2],
}

fn hermite_basis(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        2.0 * t3 - 3.0 * t2 + 1.0, // H0: value at left corner
        -2.0 * t3 + 3.0 * t2,      // H1: value at right corner
        t3 - 2.0 * t2 + t,         // G0: slope at left corner
        t3 - t2,                   // G1: slope at right corner
    ]
}

impl Stencil {
    /// The point must lie in the covered range `[av, bv - dv]` in both
    /// coordinates; moment evaluation enforces a wider margin before calling.
    pub fn new(g: &VelocityGrid, u1: f64, u2: f64) -> Self {
        let n = g.nv;
        let h = g.dv();
        let locate = |u: f64| -> (usize, f64) {
            let s = (u - g.av) / h;
            assert!(
                s >= 0.0 && s <= (n - 1) as f64,
                "spline evaluation outside table range"
            );
            let k = (s.floor() as usize).min(n - 2);
            (k, s - k as f64)
        };
        let (k, tx) = locate(u1);
        let (l, ty) = locate(u2);
        let bx = hermite_basis(tx);
        let by = hermite_basis(ty);
        let mut wf = [[0.0; 2]; 2];
        let mut wfx = [[0.0; 2]; 2];
        let mut wfy = [[0.0; 2]; 2];
        let mut wfxy = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                wf[a][b] = bx[a] * by[b];
                wfx[a][b] = h * bx[2 + a] * by[b];
                wfy[a][b] = h * bx[a] * by[2 + b];
                wfxy[a][b] = h * h * bx[2 + a] * by[2 + b];
            }
        }
        Self {
            k,
            l,
            wf,
            wfx,
            wfy,
            wfxy,
        }
    }
}

impl BicubicTable {
    pub fn build(f: ScalarFieldV, g: &VelocityGrid) -> Self {
        let n = g.nv;
        assert_eq!(f.dim(), (n, n), "grid mismatch in BicubicTable::build");
        let h = g.dv();
        let mut fx = Array2::zeros((n, n));
        let mut fy = Array2::zeros((n, n));
        let mut fxy = Array2::zeros((n, n));
        let mut solver = SlopeSolver::new(n);
        let mut col = vec![0.0; n];
        let mut slo = vec![0.0; n];
        // Slopes along the first velocity coordinate (columns of axis 0).
        for l in 0..n {
            for k in 0..n {
                col[k] = f[[k, l]];
            }
            solver.slopes(&col, h, &mut slo);
            for k in 0..n {
                fx[[k, l]] = slo[k];
            }
        }
        // Slopes along the second coordinate (rows), then the cross term as
        // the row-spline of fx; for tensor-product splines the order of the
        // two passes does not matter.
        for k in 0..n {
            for l in 0..n {
                col[l] = f[[k, l]];
            }
            solver.slopes(&col, h, &mut slo);
            for l in 0..n {
                fy[[k, l]] = slo[l];
            }
            for l in 0..n {
                col[l] = fx[[k, l]];
            }
            solver.slopes(&col, h, &mut slo);
            for l in 0..n {
                fxy[[k, l]] = slo[l];
            }
        }
        Self {
            g: *g,
            f,
            fx,
            fy,
            fxy,
        }
    }

    /// Interpolate at `(u1, u2)`; see `Stencil::new` for the range contract.
    pub fn eval(&self, u1: f64, u2: f64) -> f64 {
        self.eval_at(&Stencil::new(&self.g, u1, u2))
    }

    pub fn eval_at(&self, st: &Stencil) -> f64 {
        // Flat-slice corner access: moment assembly calls this a quarter
        // million times per step, and per-element 2D indexing dominates the
        // straightforward version.
        let n = self.g.nv;
        let f = self.f.as_slice().expect("table storage is owned");
        let fx = self.fx.as_slice().expect("table storage is owned");
        let fy = self.fy.as_slice().expect("table storage is owned");
        let fxy = self.fxy.as_slice().expect("table storage is owned");
        let mut s = 0.0;
        for a in 0..2 {
            let row = (st.k + a) * n + st.l;
            for b in 0..2 {
                let p = row + b;
                s += f[p] * st.wf[a][b]
                    + fx[p] * st.wfx[a][b]
                    + fy[p] * st.wfy[a][b]
                    + fxy[p] * st.wfxy[a][b];
            }
        }
        s
    }
}
