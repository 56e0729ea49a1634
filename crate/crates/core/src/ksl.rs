//! Projector-splitting step for the low-rank factors.
//!
//! One time step advances K = XS (explicit transport, implicit relaxation),
//! then S (the backward substep of the splitting, which flips every sign
//! including the relaxation's), then L = SV, re-orthonormalizing after the K
//! and L updates. The macroscopic moments advance alongside on the frozen
//! kinetic fluxes; everything on the right-hand sides uses the state at the
//! beginning of the step, so substeps can be reasoned about independently.
//!
//! Transport inside the K step is either spectral (periodic, smooth data) or
//! characteristic-wise finite differences: the symmetric coefficient matrices
//! `<v V V>` are diagonalized and each eigen-line is advected with an upwind
//! or flux-limited Lax-Wendroff difference at its own signal speed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fft::DerivativeKind;
use crate::grid::{inner_v, inner_x, ScalarFieldV, ScalarFieldX, SpatialGrid, TensorFieldX, VectorFieldX, VelocityGrid};
use crate::lowrank::{qr_orthonormalize_x, qr_orthonormalize_v, LowRankState};
use crate::moment_solver::{
    euler_moment_step, moment_rhs, nt_staggered_full_step, ConservedState,
};
use crate::moments::{
    build_conv_tables, combine_xs, maxwellian_flux_fields, Knudsen, MomentState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discretization {
    Spectral,
    Scfd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScfdFlux {
    Upwind,
    /// Unlimited Lax-Wendroff; second order but oscillatory at shocks.
    LaxWendroff,
    LaxWendroffVanLeer,
}

/// Velocity-space projections of the transport coefficients.
pub struct VelocityCoeffs {
    /// `c1[a][(j,l)] = <v_a V_j V_l>`.
    pub c1: [DMatrix<f64>; 2],
    /// `cstar[..] = <v_a v_b V_j V_l>` for ab = xx, xy, yy.
    pub cstar: [DMatrix<f64>; 3],
    /// `vbar[j] = <V_j>`.
    pub vbar: DVector<f64>,
}

pub fn velocity_coeffs(v: &[ScalarFieldV], g: &VelocityGrid) -> VelocityCoeffs {
    let r = v.len();
    let weights = [
        g.coord_pow(1, 0),
        g.coord_pow(0, 1),
        g.coord_pow(2, 0),
        g.coord_pow(1, 1),
        g.coord_pow(0, 2),
    ];
    let mut mats: Vec<DMatrix<f64>> = (0..5).map(|_| DMatrix::zeros(r, r)).collect();
    for j in 0..r {
        for l in j..r {
            let prod = &v[j] * &v[l];
            for (m, w) in weights.iter().enumerate() {
                let val = inner_v(g, w, &prod);
                mats[m][(j, l)] = val;
                mats[m][(l, j)] = val;
            }
        }
    }
    let ones = g.from_fn(|_, _| 1.0);
    let vbar = DVector::from_fn(r, |j, _| inner_v(g, &v[j], &ones));
    let cyy = mats.pop().unwrap();
    let cxy = mats.pop().unwrap();
    let cxx = mats.pop().unwrap();
    let c1y = mats.pop().unwrap();
    let c1x = mats.pop().unwrap();
    VelocityCoeffs {
        c1: [c1x, c1y],
        cstar: [cxx, cxy, cyy],
        vbar,
    }
}

/// The three macroscopic combinations that drive the basis evolution:
/// `M1 = (I1 - u . (I2 - I1 u)) / rho`,
/// `M2 = (grad rho + I2 - I1 u) / rho - grad(|u|^2)/2`,
/// `M3 = grad u` (full Jacobian, `M3[a][b] = d u_a / d x_b`).
pub struct MScript {
    pub m1: ScalarFieldX,
    pub m2: VectorFieldX,
    pub m3: TensorFieldX,
}

pub fn mscript_fields(
    mom: &MomentState,
    i1: &ScalarFieldX,
    i2: &VectorFieldX,
    g: &SpatialGrid,
    kind: DerivativeKind,
) -> MScript {
    let (rho, u1, u2) = (&mom.rho, &mom.u.x, &mom.u.y);
    let jx = &i2.x - &(i1 * u1);
    let jy = &i2.y - &(i1 * u2);
    let m1 = (i1 - &(u1 * &jx) - &(u2 * &jy)) / rho;
    let usq = &(u1 * u1) + &(u2 * u2);
    let (rho_x, usq_x) = crate::fft::deriv_x_pair(rho, &usq, g, kind);
    let (rho_y, usq_y) = crate::fft::deriv_y_pair(rho, &usq, g, kind);
    let (u1x, u2x) = crate::fft::deriv_x_pair(u1, u2, g, kind);
    let (u1y, u2y) = crate::fft::deriv_y_pair(u1, u2, g, kind);
    let m2 = VectorFieldX {
        x: &((&rho_x + &jx) / rho) - &(usq_x * 0.5),
        y: &((&rho_y + &jy) / rho) - &(usq_y * 0.5),
    };
    let m3 = TensorFieldX {
        xx: u1x,
        xy: u1y,
        yx: u2x,
        yy: u2y,
    };
    MScript { m1, m2, m3 }
}

/// Pointwise coefficients `c2[j*r+l](x)` coupling K fields through the
/// low-order moments; the xy and yx parts of M3 enter only as their sum, so
/// they pair with the single mixed entry of `cstar`.
pub fn c2_coeffs(vc: &VelocityCoeffs, ms: &MScript, r: usize) -> Vec<ScalarFieldX> {
    let mixed = &ms.m3.xy + &ms.m3.yx;
    let mut out = Vec::with_capacity(r * r);
    for j in 0..r {
        for l in 0..r {
            let mut f = &(&ms.m2.x * vc.c1[0][(j, l)]) + &(&ms.m2.y * vc.c1[1][(j, l)]);
            if j == l {
                f += &ms.m1;
            }
            f += &(&ms.m3.xx * vc.cstar[0][(j, l)]);
            f += &(&mixed * vc.cstar[1][(j, l)]);
            f += &(&ms.m3.yy * vc.cstar[2][(j, l)]);
            out.push(f);
        }
    }
    out
}

/// Symmetric eigendecomposition with a deterministic ordering: eigenvalues
/// ascending, each eigenvector's largest-magnitude entry made positive.
fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let se = m.clone().symmetric_eigen();
    let r = m.nrows();
    let mut idx: Vec<usize> = (0..r).collect();
    idx.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let lam = DVector::from_fn(r, |i, _| se.eigenvalues[idx[i]]);
    let mut q = DMatrix::zeros(r, r);
    for (i, &src) in idx.iter().enumerate() {
        let col = se.eigenvectors.column(src);
        let mut best = 0;
        for k in 1..r {
            if col[k].abs() > col[best].abs() {
                best = k;
            }
        }
        let sign = if col[best] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..r {
            q[(k, i)] = sign * col[k];
        }
    }
    (lam, q)
}

/// Flux-difference slope of one periodic line at signal speed `lambda`:
/// `out ~ lambda dq/ds` plus the scheme's dissipation.
fn scfd_delta_line(q: &[f64], lambda: f64, d: f64, dt: f64, flux: ScfdFlux, out: &mut [f64]) {
    let n = q.len();
    let lp = lambda.max(0.0);
    let lm = lambda.min(0.0);
    let half_disp = 0.5 * lambda.abs() * (1.0 - lambda.abs() * dt / d);
    let mut f = vec![0.0; n];
    for m in 0..n {
        let mp = (m + 1) % n;
        let dq = q[mp] - q[m];
        let corr = match flux {
            ScfdFlux::Upwind => 0.0,
            ScfdFlux::LaxWendroff => half_disp * dq,
            ScfdFlux::LaxWendroffVanLeer => {
                let upw = if lambda >= 0.0 {
                    q[m] - q[(m + n - 1) % n]
                } else {
                    q[(m + 2) % n] - q[mp]
                };
                let theta = if dq != 0.0 { upw / dq } else { 0.0 };
                let phi = (theta + theta.abs()) / (1.0 + theta.abs());
                half_disp * phi * dq
            }
        };
        f[m] = lp * q[m] + lm * q[mp] + corr;
    }
    for m in 0..n {
        out[m] = (f[m] - f[(m + n - 1) % n]) / d;
    }
}

fn combine_matrix_fields(fields: &[ScalarFieldX], coef: impl Fn(usize) -> f64) -> ScalarFieldX {
    let mut out = ScalarFieldX::zeros(fields[0].dim());
    for (k, f) in fields.iter().enumerate() {
        let c = coef(k);
        if c != 0.0 {
            out.zip_mut_with(f, |o, v| *o += c * v);
        }
    }
    out
}

/// `T_j = sum_l c1x_jl dK_l/dx + c1y_jl dK_l/dy`, spectral derivatives.
pub fn k_transport_spectral(
    k: &[ScalarFieldX],
    vc: &VelocityCoeffs,
    g: &SpatialGrid,
) -> Vec<ScalarFieldX> {
    let dkx = crate::fft::deriv_x_spectral_many(k, g);
    let dky = crate::fft::deriv_y_spectral_many(k, g);
    let r = k.len();
    (0..r)
        .map(|j| {
            &combine_matrix_fields(&dkx, |l| vc.c1[0][(j, l)])
                + &combine_matrix_fields(&dky, |l| vc.c1[1][(j, l)])
        })
        .collect()
}

/// Characteristic-wise finite-difference transport: diagonalize each
/// direction's coefficient matrix and advect the eigen-combinations line by
/// line at their signal speeds.
pub fn k_transport_scfd(
    k: &[ScalarFieldX],
    vc: &VelocityCoeffs,
    g: &SpatialGrid,
    dt: f64,
    flux: ScfdFlux,
) -> Vec<ScalarFieldX> {
    let r = k.len();
    let mut t = vec![g.zeros(); r];
    for axis in 0..2 {
        let (lam, q) = symmetric_eigen_sorted(&vc.c1[axis]);
        let khat: Vec<ScalarFieldX> =
            (0..r).map(|i| combine_matrix_fields(k, |j| q[(j, i)])).collect();
        let d = if axis == 0 { g.dx() } else { g.dy() };
        let (n_line, n_sweep) = if axis == 0 { (g.nx, g.ny) } else { (g.ny, g.nx) };
        let mut line = vec![0.0; n_line];
        let mut delta = vec![0.0; n_line];
        for i in 0..r {
            let mut dfield = g.zeros();
            for s in 0..n_sweep {
                for m in 0..n_line {
                    line[m] = if axis == 0 { khat[i][[m, s]] } else { khat[i][[s, m]] };
                }
                scfd_delta_line(&line, lam[i], d, dt, flux, &mut delta);
                for m in 0..n_line {
                    if axis == 0 {
                        dfield[[m, s]] = delta[m];
                    } else {
                        dfield[[s, m]] = delta[m];
                    }
                }
            }
            for j in 0..r {
                let c = q[(j, i)];
                if c != 0.0 {
                    t[j].zip_mut_with(&dfield, |o, v| *o += c * v);
                }
            }
        }
    }
    t
}

/// K update: explicit transport and moment coupling, implicit relaxation.
/// `relax` is the pointwise `rho^n / eps`.
#[allow(clippy::too_many_arguments)]
pub fn k_step(
    k: &[ScalarFieldX],
    vc: &VelocityCoeffs,
    c2: &[ScalarFieldX],
    relax: &ScalarFieldX,
    dt: f64,
    g: &SpatialGrid,
    disc: Discretization,
    flux: ScfdFlux,
) -> Vec<ScalarFieldX> {
    let r = k.len();
    let transport = match disc {
        Discretization::Spectral => k_transport_spectral(k, vc, g),
        Discretization::Scfd => k_transport_scfd(k, vc, g, dt, flux),
    };
    (0..r)
        .map(|j| {
            let mut coupling = g.zeros();
            for l in 0..r {
                ndarray::Zip::from(&mut coupling)
                    .and(&c2[j * r + l])
                    .and(&k[l])
                    .for_each(|o, &c, &kl| *o += c * kl);
            }
            let vb = vc.vbar[j];
            let mut out = g.zeros();
            ndarray::Zip::from(&mut out)
                .and(&k[j])
                .and(&transport[j])
                .and(&coupling)
                .and(relax)
                .for_each(|o, &kj, &tj, &cj, &a| {
                    let da = dt * a;
                    *o = (kj - dt * (tj + cj)) / (1.0 + da) + da / (1.0 + da) * vb;
                });
            out
        })
        .collect()
}

/// Spatial projections of the transport and moment couplings, plus the
/// relaxation projections (with `rho / eps` folded in).
pub struct SpatialCoeffs {
    /// `d1[a][(i,k)] = <X_i dX_k/dx_a>`.
    pub d1: [DMatrix<f64>; 2],
    /// `<X_i X_k M1>`.
    pub dstar: DMatrix<f64>,
    /// `<X_i X_k M2_a>`.
    pub dstar2: [DMatrix<f64>; 2],
    /// `<X_i X_k M3_ab>` for ab = xx, xy + yx, yy.
    pub dstar3: [DMatrix<f64>; 3],
    /// `<(rho/eps) X_i>`.
    pub xbar: DVector<f64>,
    /// `<(rho/eps) X_i X_k>`.
    pub rmat: DMatrix<f64>,
}

pub fn spatial_coeffs(
    x: &[ScalarFieldX],
    ms: &MScript,
    relax: &ScalarFieldX,
    g: &SpatialGrid,
    disc: Discretization,
) -> SpatialCoeffs {
    let r = x.len();
    let (dx, dy): (Vec<ScalarFieldX>, Vec<ScalarFieldX>) = match disc {
        Discretization::Spectral => (
            crate::fft::deriv_x_spectral_many(x, g),
            crate::fft::deriv_y_spectral_many(x, g),
        ),
        // The finite-difference path pairs with one-sided derivatives here.
        Discretization::Scfd => (
            x.iter().map(|f| crate::fft::deriv_x_forward(f, g)).collect(),
            x.iter().map(|f| crate::fft::deriv_y_forward(f, g)).collect(),
        ),
    };
    let d1 = [
        DMatrix::from_fn(r, r, |i, k| inner_x(g, &x[i], &dx[k])),
        DMatrix::from_fn(r, r, |i, k| inner_x(g, &x[i], &dy[k])),
    ];
    let mixed = &ms.m3.xy + &ms.m3.yx;
    let mut dstar = DMatrix::zeros(r, r);
    let mut dstar2 = [DMatrix::zeros(r, r), DMatrix::zeros(r, r)];
    let mut dstar3 = [
        DMatrix::zeros(r, r),
        DMatrix::zeros(r, r),
        DMatrix::zeros(r, r),
    ];
    let mut rmat = DMatrix::zeros(r, r);
    let mut prod = g.zeros();
    for i in 0..r {
        for k in i..r {
            prod.assign(&x[i]);
            prod *= &x[k];
            let set = |m: &mut DMatrix<f64>, val: f64| {
                m[(i, k)] = val;
                m[(k, i)] = val;
            };
            set(&mut dstar, inner_x(g, &prod, &ms.m1));
            set(&mut dstar2[0], inner_x(g, &prod, &ms.m2.x));
            set(&mut dstar2[1], inner_x(g, &prod, &ms.m2.y));
            set(&mut dstar3[0], inner_x(g, &prod, &ms.m3.xx));
            set(&mut dstar3[1], inner_x(g, &prod, &mixed));
            set(&mut dstar3[2], inner_x(g, &prod, &ms.m3.yy));
            set(&mut rmat, inner_x(g, &prod, relax));
        }
    }
    let xbar = DVector::from_fn(r, |i, _| inner_x(g, &x[i], relax));
    SpatialCoeffs {
        d1,
        dstar,
        dstar2,
        dstar3,
        xbar,
        rmat,
    }
}

/// Backward substep for the coupling matrix: solve `(I - dt R) S2 = B` with
/// `B = S + dt (d1x S c1x + d1y S c1y + dstar S + dstar2 . S c1 + dstar3 : S cstar)
///      - dt xbar vbar^T`.
pub fn s_step(
    s: &DMatrix<f64>,
    sc: &SpatialCoeffs,
    vc: &VelocityCoeffs,
    dt: f64,
) -> Result<DMatrix<f64>> {
    let r = s.nrows();
    let mut b = s.clone();
    b += (&sc.d1[0] * s * &vc.c1[0]) * dt;
    b += (&sc.d1[1] * s * &vc.c1[1]) * dt;
    b += (&sc.dstar * s) * dt;
    b += (&sc.dstar2[0] * s * &vc.c1[0]) * dt;
    b += (&sc.dstar2[1] * s * &vc.c1[1]) * dt;
    b += (&sc.dstar3[0] * s * &vc.cstar[0]) * dt;
    b += (&sc.dstar3[1] * s * &vc.cstar[1]) * dt;
    b += (&sc.dstar3[2] * s * &vc.cstar[2]) * dt;
    b -= (&sc.xbar * vc.vbar.transpose()) * dt;
    let lhs = DMatrix::identity(r, r) - &sc.rmat * dt;
    let (lo, hi) = {
        let sv = lhs.clone().svd(false, false).singular_values;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for v in sv.iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    };
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    // The natural scale of `I - dt R` is one, so a tiny smallest singular
    // value means dt rho/eps sits on a unit eigenvalue of the relaxation
    // Gram matrix; the LU may still "solve" such a system into large finite
    // garbage, which is why this is an absolute floor and not a cond test.
    if lo < 1e-10 {
        return Err(Error::SStepSingular { cond });
    }
    if cond > 1e10 {
        log::warn!("coupling solve is ill-conditioned (cond ~ {cond:.3e}); dt rho/eps may be too close to 1");
    }
    match lhs.lu().solve(&b) {
        Some(s2) if s2.iter().all(|v| v.is_finite()) => Ok(s2),
        _ => Err(Error::SStepSingular { cond }),
    }
}

/// L update: `(I + dt R) L+ = L - dt A(v) L + dt xbar`, with the monomial
/// expansion `A_ik(v) = dstar + (d1 + dstar2) . v + dstar3 : (v x v)`.
pub fn l_step(
    s2: &DMatrix<f64>,
    v: &[ScalarFieldV],
    sc: &SpatialCoeffs,
    gv: &VelocityGrid,
    dt: f64,
) -> Result<Vec<ScalarFieldV>> {
    let r = v.len();
    let l: Vec<ScalarFieldV> = (0..r)
        .map(|i| combine_matrix_fields(v, |j| s2[(i, j)]))
        .collect();
    // Pointwise monomials of the raw node velocities; these multiply fields,
    // they are not quadrature weights, so no seam averaging here.
    let v1 = gv.from_fn(|a, _| a);
    let v2 = gv.from_fn(|_, b| b);
    let v11 = gv.from_fn(|a, _| a * a);
    let v12 = gv.from_fn(|a, b| a * b);
    let v22 = gv.from_fn(|_, b| b * b);
    let cx = &sc.d1[0] + &sc.dstar2[0];
    let cy = &sc.d1[1] + &sc.dstar2[1];
    let mut rhs: Vec<ScalarFieldV> = Vec::with_capacity(r);
    for i in 0..r {
        let p0 = combine_matrix_fields(&l, |k| sc.dstar[(i, k)]);
        let px = combine_matrix_fields(&l, |k| cx[(i, k)]);
        let py = combine_matrix_fields(&l, |k| cy[(i, k)]);
        let pxx = combine_matrix_fields(&l, |k| sc.dstar3[0][(i, k)]);
        let pxy = combine_matrix_fields(&l, |k| sc.dstar3[1][(i, k)]);
        let pyy = combine_matrix_fields(&l, |k| sc.dstar3[2][(i, k)]);
        let mut f = l[i].clone();
        ndarray::Zip::from(&mut f)
            .and(&p0)
            .for_each(|o, &p| *o -= dt * p);
        for (mono, part) in [(&v1, &px), (&v2, &py), (&v11, &pxx), (&v12, &pxy), (&v22, &pyy)] {
            ndarray::Zip::from(&mut f)
                .and(mono)
                .and(part)
                .for_each(|o, &m, &p| *o -= dt * m * p);
        }
        f += dt * sc.xbar[i];
        rhs.push(f);
    }
    let lhs = DMatrix::identity(r, r) + &sc.rmat * dt;
    let inv = lhs
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SStepSingular { cond: f64::INFINITY })?;
    Ok((0..r)
        .map(|i| combine_matrix_fields(&rhs, |k| inv[(i, k)]))
        .collect())
}

#[derive(Clone, Copy, Debug)]
pub struct StepParams {
    pub dt: f64,
    pub t: f64,
    pub disc: Discretization,
    pub scfd_flux: ScfdFlux,
}

fn check_finite(s: &DMatrix<f64>, mom: &MomentState, context: &'static str) -> Result<()> {
    if s.iter().any(|v| !v.is_finite())
        || mom.rho.iter().any(|v| !v.is_finite())
        || mom.u.x.iter().any(|v| !v.is_finite())
        || mom.u.y.iter().any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite { context });
    }
    Ok(())
}

/// One full step of the coupled system. All right-hand-side quantities are
/// evaluated on the state at time `t`; the moment fields advance with their
/// own conservative update before the factors do.
pub fn full_step(
    state: &mut LowRankState,
    mom: &mut MomentState,
    eps: &Knudsen,
    p: &StepParams,
) -> Result<()> {
    let g = state.sgrid;
    let gv = state.vgrid;
    let dt = p.dt;
    let kind = match p.disc {
        Discretization::Spectral => DerivativeKind::Spectral,
        Discretization::Scfd => DerivativeKind::Central,
    };

    let w = combine_xs(&state.x, &state.s);
    let tables = build_conv_tables(&state.v, &gv);
    let (phi1, phi2) = maxwellian_flux_fields(&w, mom, &tables, &g)?;
    let (i1, i2) = moment_rhs(&phi1, &phi2, &g, kind);
    let vc = velocity_coeffs(&state.v, &gv);
    let ms = mscript_fields(mom, &i1, &i2, &g, kind);
    let relax = {
        let mut f = mom.rho.clone();
        for i in 0..g.nx {
            for j in 0..g.ny {
                f[[i, j]] /= eps.at(i, j);
            }
        }
        f
    };

    // Moment update on the frozen kinetic closure.
    let mom_next = match p.disc {
        Discretization::Spectral => euler_moment_step(mom, &i1, &i2, dt, p.t)?,
        Discretization::Scfd => {
            let mut flux_full =
                |c: &ConservedState| kinetic_flux_triples(c, &w, &tables, &g, p.t);
            let w_half: Vec<ScalarFieldX> =
                w.iter().map(crate::grid::average_to_half_grid).collect();
            let mut flux_half =
                |c: &ConservedState| kinetic_flux_triples(c, &w_half, &tables, &g, p.t);
            let cons = ConservedState::from_moments(mom);
            nt_staggered_full_step(&cons, &mut flux_full, &mut flux_half, dt, &g)?
                .into_moments_checked(p.t + dt)?
        }
    };

    // K step.
    let c2 = c2_coeffs(&vc, &ms, state.r);
    let mut k = w;
    k = k_step(&k, &vc, &c2, &relax, dt, &g, p.disc, p.scfd_flux);
    let s2 = qr_orthonormalize_x(&mut k, &g);
    state.x = k;

    // S step (backward), then L step on the same projections.
    let sc = spatial_coeffs(&state.x, &ms, &relax, &g, p.disc);
    let s25 = s_step(&s2, &sc, &vc, dt)?;
    let mut l = l_step(&s25, &state.v, &sc, &gv, dt)?;
    state.s = qr_orthonormalize_v(&mut l, &gv);
    state.v = l;

    *mom = mom_next;
    check_finite(&state.s, mom, "low-rank step")?;
    Ok(())
}

/// Kinetic closure for the staggered moment scheme: x- and y-fluxes of
/// (rho, m) from the frozen low-rank coefficients, with rho and u taken from
/// the conserved state being advanced.
fn kinetic_flux_triples(
    cons: &ConservedState,
    w: &[ScalarFieldX],
    tables: &crate::moments::ConvTables,
    g: &SpatialGrid,
    t: f64,
) -> Result<([ScalarFieldX; 3], [ScalarFieldX; 3])> {
    let mom = cons.clone().into_moments_checked(t)?;
    let (phi1, phi2) = maxwellian_flux_fields(w, &mom, tables, g)?;
    Ok((
        [phi1.x, phi2.xx.clone(), phi2.xy.clone()],
        [phi1.y, phi2.xy, phi2.yy],
    ))
}
