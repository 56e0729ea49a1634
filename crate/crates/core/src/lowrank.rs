//! Low-rank representation of the distribution correction g.
//!
//! `g(x,v) = sum_ij X_i(x) S_ij V_j(v)` with X and V orthonormal under the
//! quadrature inner products. Orthonormalization is modified Gram-Schmidt with
//! a second reorthogonalization pass; numerically dependent columns are
//! replaced by deterministic Fourier-mode candidates so reruns are
//! bit-identical and small singular values never force a failure.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{inner_v, inner_x, ScalarFieldV, ScalarFieldX, SpatialGrid, VelocityGrid};

#[derive(Clone, Debug)]
pub struct LowRankState {
    pub sgrid: SpatialGrid,
    pub vgrid: VelocityGrid,
    pub r: usize,
    /// Spatial basis, orthonormal under `inner_x`.
    pub x: Vec<ScalarFieldX>,
    /// Coupling coefficients; `K_j = sum_i X_i S[(i,j)]`.
    pub s: DMatrix<f64>,
    /// Velocity basis, orthonormal under `inner_v`.
    pub v: Vec<ScalarFieldV>,
}

/// One product term `fx(x) * fv(v)` of a separable initial condition.
#[derive(Clone, Debug)]
pub struct SeparableTerm {
    pub fx: ScalarFieldX,
    pub fv: ScalarFieldV,
}

fn wdot(a: &Array2<f64>, b: &Array2<f64>, w: f64) -> f64 {
    crate::grid::dot(a, b) * w
}

fn wnorm(a: &Array2<f64>, w: f64) -> f64 {
    wdot(a, a, w).sqrt()
}

/// `f -= c * q` on contiguous storage when available.
fn axpy_sub(f: &mut Array2<f64>, q: &Array2<f64>, c: f64) {
    match (f.as_slice_mut(), q.as_slice()) {
        (Some(sf), Some(sq)) => {
            for (pf, pq) in sf.iter_mut().zip(sq) {
                *pf -= c * pq;
            }
        }
        _ => f.zip_mut_with(q, |pf, pq| *pf -= c * pq),
    }
}

/// Deterministic completion candidates: low Fourier modes in the normalized
/// grid coordinates, arranged so that every prefix of the sequence is closed
/// under swapping the two axes (symmetric initial data then stays symmetric
/// to truncation accuracy regardless of how many padding vectors are used).
fn candidate(idx: usize, shape: (usize, usize)) -> Array2<f64> {
    use std::f64::consts::TAU;
    let (n0, n1) = shape;
    if idx == 0 {
        return Array2::ones(shape);
    }
    let m = 1 + (idx - 1) / 8;
    let kind = (idx - 1) % 8;
    Array2::from_shape_fn(shape, |(i, j)| {
        let a = TAU * m as f64 * i as f64 / n0 as f64;
        let b = TAU * m as f64 * j as f64 / n1 as f64;
        match kind {
            0 => a.cos() + b.cos(),
            1 => a.cos() - b.cos(),
            2 => a.sin() + b.sin(),
            3 => a.sin() - b.sin(),
            4 => a.cos() * b.cos(),
            5 => a.sin() * b.sin(),
            6 => a.cos() * b.sin() + a.sin() * b.cos(),
            _ => a.cos() * b.sin() - a.sin() * b.cos(),
        }
    })
}

/// In-place weighted QR. On return `fields` is orthonormal (w.r.t. the cell
/// weight `w`) and the result R is upper triangular with nonnegative diagonal
/// such that `input_j = sum_i fields_i R[(i,j)]`. Columns that are linear
/// combinations of earlier ones (relative residual below 1e-12) keep their
/// projection coefficients, get `R[(j,j)] = 0` and are replaced by the next
/// usable completion candidate.
fn mgs_weighted(fields: &mut [Array2<f64>], w: f64) -> DMatrix<f64> {
    let r = fields.len();
    let shape = fields[0].dim();
    let mut rmat = DMatrix::zeros(r, r);
    let mut cand_idx = 0usize;
    for j in 0..r {
        let norm0 = wnorm(&fields[j], w);
        for _pass in 0..2 {
            for i in 0..j {
                let c = wdot(&fields[i], &fields[j], w);
                rmat[(i, j)] += c;
                let (qi, fj) = {
                    let (head, tail) = fields.split_at_mut(j);
                    (&head[i], &mut tail[0])
                };
                axpy_sub(fj, qi, c);
            }
        }
        let nrm = wnorm(&fields[j], w);
        if nrm > 1e-12 * norm0 && nrm > 0.0 {
            rmat[(j, j)] = nrm;
            fields[j].mapv_inplace(|v| v / nrm);
        } else {
            rmat[(j, j)] = 0.0;
            let mut tries = 0;
            'search: loop {
                assert!(
                    tries < 64 * (r + 8),
                    "completion candidates exhausted during orthonormalization"
                );
                tries += 1;
                let mut c = candidate(cand_idx, shape);
                cand_idx += 1;
                let cn = wnorm(&c, w);
                c.mapv_inplace(|v| v / cn);
                for _pass in 0..2 {
                    for i in 0..j {
                        let p = wdot(&fields[i], &c, w);
                        axpy_sub(&mut c, &fields[i], p);
                    }
                }
                let rn = wnorm(&c, w);
                if rn > 0.5 {
                    c.mapv_inplace(|v| v / rn);
                    fields[j] = c;
                    break 'search;
                }
            }
        }
    }
    rmat
}

/// Orthonormalize K fields in place; returns S with `K_j = sum_i X_i S[(i,j)]`.
pub fn qr_orthonormalize_x(fields: &mut [ScalarFieldX], g: &SpatialGrid) -> DMatrix<f64> {
    mgs_weighted(fields, g.cell_area())
}

/// Orthonormalize L fields in place; returns S with `L_i = sum_j S[(i,j)] V_j`
/// (the transpose of the triangular factor, matching how S couples X and V).
pub fn qr_orthonormalize_v(fields: &mut [ScalarFieldV], g: &VelocityGrid) -> DMatrix<f64> {
    mgs_weighted(fields, g.cell_area()).transpose()
}

fn combine_fields(fields: &[Array2<f64>], coef: &[f64]) -> Array2<f64> {
    let mut out = Array2::zeros(fields[0].dim());
    for (f, &c) in fields.iter().zip(coef) {
        if c != 0.0 {
            out.zip_mut_with(f, |o, v| *o += c * v);
        }
    }
    out
}

/// Build a rank-r state from a sum of separable terms: orthonormalize both
/// factor lists, rotate with the SVD of the small coupling matrix, truncate
/// to the r largest singular values or pad with completion vectors.
pub fn init_from_separable(
    terms: &[SeparableTerm],
    r: usize,
    sgrid: &SpatialGrid,
    vgrid: &VelocityGrid,
) -> Result<LowRankState> {
    if terms.is_empty() || r == 0 {
        return Err(Error::Config(
            "separable initialization needs at least one term and rank >= 1".into(),
        ));
    }
    let t = terms.len();
    let mut qx: Vec<ScalarFieldX> = terms.iter().map(|tm| tm.fx.clone()).collect();
    let mut qv: Vec<ScalarFieldV> = terms.iter().map(|tm| tm.fv.clone()).collect();
    let rx = mgs_weighted(&mut qx, sgrid.cell_area());
    let rv = mgs_weighted(&mut qv, vgrid.cell_area());
    // g = sum_ab Qx_a C_ab Qv_b with C = Rx Rv^T.
    let c = &rx * rv.transpose();
    let svd = c.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd");
    let vt = svd.v_t.as_ref().expect("svd");
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let keep = r.min(t);
    let mut x: Vec<ScalarFieldX> = Vec::with_capacity(r);
    let mut v: Vec<ScalarFieldV> = Vec::with_capacity(r);
    let mut s = DMatrix::zeros(r, r);
    for (i, &oi) in order.iter().take(keep).enumerate() {
        let cu: Vec<f64> = (0..t).map(|a| u[(a, oi)]).collect();
        let cv: Vec<f64> = (0..t).map(|b| vt[(oi, b)]).collect();
        x.push(combine_fields(&qx, &cu));
        v.push(combine_fields(&qv, &cv));
        s[(i, i)] = svd.singular_values[oi];
    }
    // Pad with zero fields; the orthonormalizer swaps them for completions.
    for _ in keep..r {
        x.push(Array2::zeros((sgrid.nx, sgrid.ny)));
        v.push(Array2::zeros((vgrid.nv, vgrid.nv)));
    }
    if keep < r {
        mgs_weighted(&mut x, sgrid.cell_area());
        mgs_weighted(&mut v, vgrid.cell_area());
        // The first `keep` fields were already orthonormal, so the triangular
        // factors are identity blocks there and S is unaffected.
    }
    Ok(LowRankState {
        sgrid: *sgrid,
        vgrid: *vgrid,
        r,
        x,
        s,
        v,
    })
}

impl LowRankState {
    /// K fields of the current state: `K_j = sum_i X_i S[(i,j)]`.
    pub fn k_fields(&self) -> Vec<ScalarFieldX> {
        (0..self.r)
            .map(|j| {
                let coef: Vec<f64> = (0..self.r).map(|i| self.s[(i, j)]).collect();
                combine_fields(&self.x, &coef)
            })
            .collect()
    }

    /// Coefficients `w_j(x) = sum_i X_i(x) S_ij` at one spatial node.
    fn w_at(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.r)
            .map(|jj| {
                let mut acc = 0.0;
                for ii in 0..self.r {
                    acc += self.x[ii][[i, j]] * self.s[(ii, jj)];
                }
                acc
            })
            .collect()
    }

    /// g restricted to one spatial node, as a field over velocity.
    pub fn g_slice_at_x(&self, i: usize, j: usize) -> ScalarFieldV {
        let w = self.w_at(i, j);
        combine_fields(&self.v, &w)
    }

    /// g restricted to one velocity node, as a field over space.
    pub fn g_slice_at_v(&self, k: usize, l: usize) -> ScalarFieldX {
        let coef: Vec<f64> = (0..self.r)
            .map(|i| {
                let mut acc = 0.0;
                for jj in 0..self.r {
                    acc += self.s[(i, jj)] * self.v[jj][[k, l]];
                }
                acc
            })
            .collect();
        combine_fields(&self.x, &coef)
    }

    /// max |g - 1| over the phase-space nodes, streaming row by row so the
    /// dense nx*ny x nv^2 array is never formed.
    pub fn deviation_from_equilibrium(&self) -> f64 {
        let mut buf = Array2::zeros((self.vgrid.nv, self.vgrid.nv));
        let mut worst = 0.0f64;
        for i in 0..self.sgrid.nx {
            for j in 0..self.sgrid.ny {
                worst = worst.max(self.deviation_at(i, j, &mut buf));
            }
        }
        worst
    }

    /// Per-spatial-node max |g - 1|.
    pub fn deviation_profile_x(&self) -> ScalarFieldX {
        let mut buf = Array2::zeros((self.vgrid.nv, self.vgrid.nv));
        let mut out = self.sgrid.zeros();
        for i in 0..self.sgrid.nx {
            for j in 0..self.sgrid.ny {
                out[[i, j]] = self.deviation_at(i, j, &mut buf);
            }
        }
        out
    }

    fn deviation_at(&self, i: usize, j: usize, buf: &mut ScalarFieldV) -> f64 {
        let w = self.w_at(i, j);
        let bs = buf.as_slice_mut().expect("deviation scratch is owned");
        bs.fill(0.0);
        for (vj, &c) in self.v.iter().zip(&w) {
            if c != 0.0 {
                let vs = vj.as_slice().expect("velocity basis is owned");
                for (b, v) in bs.iter_mut().zip(vs) {
                    *b += c * v;
                }
            }
        }
        bs.iter().fold(0.0f64, |m, g| m.max((g - 1.0).abs()))
    }

    /// Gram matrix of the spatial basis (identity up to round-off).
    pub fn gram_x(&self) -> DMatrix<f64> {
        let r = self.r;
        DMatrix::from_fn(r, r, |i, k| inner_x(&self.sgrid, &self.x[i], &self.x[k]))
    }

    pub fn gram_v(&self) -> DMatrix<f64> {
        let r = self.r;
        DMatrix::from_fn(r, r, |i, k| inner_v(&self.vgrid, &self.v[i], &self.v[k]))
    }
}
