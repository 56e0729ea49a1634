//! FFT plumbing: cached plans, spectral derivatives, periodic convolution.
//!
//! rustfft plans are cached process-wide behind a mutex; the returned plan
//! handles are `Arc`s and execution itself takes no lock, so concurrent use
//! from tests is safe.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use ndarray::{Array2, Axis};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::{ScalarFieldV, ScalarFieldX, SpatialGrid, VelocityGrid};

type Plan = Arc<dyn Fft<f64>>;

static PLANS: LazyLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>> =
    LazyLock::new(|| Mutex::new((FftPlanner::new(), HashMap::new())));

fn plan(n: usize, forward: bool) -> Plan {
    let mut guard = PLANS.lock().unwrap();
    let (planner, cache) = &mut *guard;
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// In-place 1D transforms along `axis` of a complex array.
fn transform_axis(a: &mut Array2<Complex<f64>>, axis: Axis, forward: bool) {
    let n = a.len_of(axis);
    let p = plan(n, forward);
    let mut scratch = vec![Complex::default(); p.get_outofplace_scratch_len().max(p.get_inplace_scratch_len())];
    let (n0, n1) = a.dim();
    match a.as_slice_mut() {
        Some(s) if axis == Axis(1) => {
            for row in s.chunks_exact_mut(n1) {
                p.process_with_scratch(row, &mut scratch);
            }
        }
        // Column lanes are strided; gather/scatter through a contiguous
        // buffer with plain index math.
        Some(s) => {
            let mut buf = vec![Complex::default(); n0];
            for col in 0..n1 {
                for (i, b) in buf.iter_mut().enumerate() {
                    *b = s[i * n1 + col];
                }
                p.process_with_scratch(&mut buf, &mut scratch);
                for (i, b) in buf.iter().enumerate() {
                    s[i * n1 + col] = *b;
                }
            }
        }
        None => {
            let mut buf = vec![Complex::default(); n];
            for mut lane in a.lanes_mut(axis) {
                for (b, v) in buf.iter_mut().zip(lane.iter()) {
                    *b = *v;
                }
                p.process_with_scratch(&mut buf, &mut scratch);
                for (v, b) in lane.iter_mut().zip(buf.iter()) {
                    *v = *b;
                }
            }
        }
    }
}

/// Two circular convolutions for the price of one complex round trip: `f`
/// rides in the real parts, `g` in the imaginary parts. Sound only for an
/// even kernel, whose spectrum is real and so never mixes the two planes;
/// the caller passes that spectrum's real part. Results carry the factor
/// `scale` (the quadrature weight).
pub fn conv2_packed(
    f: &Array2<f64>,
    g: &Array2<f64>,
    khat_re: &Array2<f64>,
    scale: f64,
) -> (Array2<f64>, Array2<f64>) {
    let mut c = pack_complex(f, g);
    transform_axis(&mut c, Axis(1), true);
    transform_axis(&mut c, Axis(0), true);
    c.zip_mut_with(khat_re, |z, k| *z = *z * *k);
    transform_axis(&mut c, Axis(1), false);
    transform_axis(&mut c, Axis(0), false);
    let norm = scale / (f.nrows() * f.ncols()) as f64;
    (c.mapv(|z| z.re * norm), c.mapv(|z| z.im * norm))
}

/// Unnormalized 2D forward transform of a real field.
pub fn fft2(a: &Array2<f64>) -> Array2<Complex<f64>> {
    let mut c = a.mapv(|x| Complex::new(x, 0.0));
    transform_axis(&mut c, Axis(1), true);
    transform_axis(&mut c, Axis(0), true);
    c
}

/// Inverse 2D transform, normalized, returning the real part.
pub fn ifft2_re(mut c: Array2<Complex<f64>>) -> Array2<f64> {
    transform_axis(&mut c, Axis(1), false);
    transform_axis(&mut c, Axis(0), false);
    let scale = 1.0 / (c.nrows() * c.ncols()) as f64;
    c.mapv(|z| z.re * scale)
}

/// Signed wavenumber multipliers `i*k` for a periodic axis of `n` points and
/// physical length `l`. The Nyquist mode is zeroed, the standard choice for
/// odd-order spectral derivatives of real data.
fn ik_multipliers(n: usize, l: f64) -> Vec<Complex<f64>> {
    let base = 2.0 * std::f64::consts::PI / l;
    (0..n)
        .map(|m| {
            let k = if m < n / 2 {
                m as f64
            } else if m == n / 2 {
                0.0
            } else {
                m as f64 - n as f64
            };
            Complex::new(0.0, base * k)
        })
        .collect()
}

fn apply_ik(c: &mut Array2<Complex<f64>>, ik: &[Complex<f64>], axis: Axis) {
    match axis {
        Axis(0) => {
            for (m, mut row) in c.outer_iter_mut().enumerate() {
                for z in row.iter_mut() {
                    *z *= ik[m];
                }
            }
        }
        _ => {
            for mut row in c.outer_iter_mut() {
                for (m, z) in row.iter_mut().enumerate() {
                    *z *= ik[m];
                }
            }
        }
    }
}

fn spectral_deriv_axis(a: &Array2<f64>, l: f64, axis: Axis) -> Array2<f64> {
    let mut c = a.mapv(|x| Complex::new(x, 0.0));
    transform_axis(&mut c, axis, true);
    apply_ik(&mut c, &ik_multipliers(a.len_of(axis), l), axis);
    transform_axis(&mut c, axis, false);
    let scale = 1.0 / a.len_of(axis) as f64;
    c.mapv(|z| z.re * scale)
}

/// Pack two real fields into one complex plane: `c = a + i b`.
fn pack_complex(a: &Array2<f64>, b: &Array2<f64>) -> Array2<Complex<f64>> {
    assert_eq!(a.dim(), b.dim());
    match (a.as_slice(), b.as_slice()) {
        (Some(sa), Some(sb)) => {
            let mut c = Array2::default(a.dim());
            let cs = c.as_slice_mut().unwrap();
            for ((z, pa), pb) in cs.iter_mut().zip(sa).zip(sb) {
                *z = Complex::new(*pa, *pb);
            }
            c
        }
        _ => Array2::from_shape_fn(a.dim(), |ij| Complex::new(a[ij], b[ij])),
    }
}

/// Spectral derivative of two fields in one complex round trip. The `ik`
/// symbol maps real data to real data, so by linearity the real and
/// imaginary planes never mix.
fn spectral_deriv_axis_pair(
    a: &Array2<f64>,
    b: &Array2<f64>,
    l: f64,
    axis: Axis,
) -> (Array2<f64>, Array2<f64>) {
    let mut c = pack_complex(a, b);
    transform_axis(&mut c, axis, true);
    apply_ik(&mut c, &ik_multipliers(a.len_of(axis), l), axis);
    transform_axis(&mut c, axis, false);
    let scale = 1.0 / a.len_of(axis) as f64;
    (c.mapv(|z| z.re * scale), c.mapv(|z| z.im * scale))
}

/// Derivative operator used for smooth fields.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DerivativeKind {
    Spectral,
    /// Second-order central differences, periodic.
    Central,
}

fn central_axis(a: &Array2<f64>, d: f64, axis: usize) -> Array2<f64> {
    let (n0, n1) = a.dim();
    let inv2d = 1.0 / (2.0 * d);
    Array2::from_shape_fn((n0, n1), |(i, j)| match axis {
        0 => (a[[(i + 1) % n0, j]] - a[[(i + n0 - 1) % n0, j]]) * inv2d,
        _ => (a[[i, (j + 1) % n1]] - a[[i, (j + n1 - 1) % n1]]) * inv2d,
    })
}

/// d/dx of a spatial field.
pub fn deriv_x(a: &ScalarFieldX, g: &SpatialGrid, kind: DerivativeKind) -> ScalarFieldX {
    match kind {
        DerivativeKind::Spectral => spectral_deriv_axis(a, g.lx(), Axis(0)),
        DerivativeKind::Central => central_axis(a, g.dx(), 0),
    }
}

/// d/dy of a spatial field.
pub fn deriv_y(a: &ScalarFieldX, g: &SpatialGrid, kind: DerivativeKind) -> ScalarFieldX {
    match kind {
        DerivativeKind::Spectral => spectral_deriv_axis(a, g.ly(), Axis(1)),
        DerivativeKind::Central => central_axis(a, g.dy(), 1),
    }
}

/// d/dx of two fields at once; the spectral kind shares one transform.
pub fn deriv_x_pair(
    a: &ScalarFieldX,
    b: &ScalarFieldX,
    g: &SpatialGrid,
    kind: DerivativeKind,
) -> (ScalarFieldX, ScalarFieldX) {
    match kind {
        DerivativeKind::Spectral => spectral_deriv_axis_pair(a, b, g.lx(), Axis(0)),
        DerivativeKind::Central => (central_axis(a, g.dx(), 0), central_axis(b, g.dx(), 0)),
    }
}

/// d/dy of two fields at once; the spectral kind shares one transform.
pub fn deriv_y_pair(
    a: &ScalarFieldX,
    b: &ScalarFieldX,
    g: &SpatialGrid,
    kind: DerivativeKind,
) -> (ScalarFieldX, ScalarFieldX) {
    match kind {
        DerivativeKind::Spectral => spectral_deriv_axis_pair(a, b, g.ly(), Axis(1)),
        DerivativeKind::Central => (central_axis(a, g.dy(), 1), central_axis(b, g.dy(), 1)),
    }
}

/// Spectral d/dx of a whole basis, two fields per transform.
pub fn deriv_x_spectral_many(fields: &[ScalarFieldX], g: &SpatialGrid) -> Vec<ScalarFieldX> {
    deriv_axis_spectral_many(fields, g.lx(), Axis(0))
}

/// Spectral d/dy of a whole basis, two fields per transform.
pub fn deriv_y_spectral_many(fields: &[ScalarFieldX], g: &SpatialGrid) -> Vec<ScalarFieldX> {
    deriv_axis_spectral_many(fields, g.ly(), Axis(1))
}

fn deriv_axis_spectral_many(fields: &[ScalarFieldX], l: f64, axis: Axis) -> Vec<ScalarFieldX> {
    let mut out = Vec::with_capacity(fields.len());
    let mut pairs = fields.chunks_exact(2);
    for p in &mut pairs {
        let (da, db) = spectral_deriv_axis_pair(&p[0], &p[1], l, axis);
        out.push(da);
        out.push(db);
    }
    if let [last] = pairs.remainder() {
        out.push(spectral_deriv_axis(last, l, axis));
    }
    out
}

/// One-sided first-order forward differences, used for the basis-gradient
/// coefficients in the shock-capturing discretization.
pub fn deriv_x_forward(a: &ScalarFieldX, g: &SpatialGrid) -> ScalarFieldX {
    let (n0, n1) = a.dim();
    let inv = 1.0 / g.dx();
    Array2::from_shape_fn((n0, n1), |(i, j)| (a[[(i + 1) % n0, j]] - a[[i, j]]) * inv)
}

pub fn deriv_y_forward(a: &ScalarFieldX, g: &SpatialGrid) -> ScalarFieldX {
    let (n0, n1) = a.dim();
    let inv = 1.0 / g.dy();
    Array2::from_shape_fn((n0, n1), |(i, j)| (a[[i, (j + 1) % n1]] - a[[i, j]]) * inv)
}

pub fn deriv_x_backward(a: &ScalarFieldX, g: &SpatialGrid) -> ScalarFieldX {
    let (n0, n1) = a.dim();
    let inv = 1.0 / g.dx();
    Array2::from_shape_fn((n0, n1), |(i, j)| (a[[i, j]] - a[[(i + n0 - 1) % n0, j]]) * inv)
}

pub fn deriv_y_backward(a: &ScalarFieldX, g: &SpatialGrid) -> ScalarFieldX {
    let (n0, n1) = a.dim();
    let inv = 1.0 / g.dy();
    Array2::from_shape_fn((n0, n1), |(i, j)| (a[[i, j]] - a[[i, (j + n1 - 1) % n1]]) * inv)
}

/// Periodic (circular) convolution on the velocity grid, scaled by the
/// quadrature weight: `(a*b)[m] = sum_k a[k] b[(m-k) mod n] dv^2`.
pub fn fft_convolve_v(a: &ScalarFieldV, b: &ScalarFieldV, g: &VelocityGrid) -> ScalarFieldV {
    let fa = fft2(a);
    let fb = fft2(b);
    ifft2_re(fa * fb) * g.cell_area()
}
