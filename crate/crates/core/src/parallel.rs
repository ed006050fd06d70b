//! Deterministic data-parallel kernels.
//!
//! Reductions use a fixed-shape pairwise tree over fixed-width chunks, so the
//! result is bit-identical regardless of thread count or scheduling. Elementwise
//! maps write disjoint indices and are deterministic under any schedule.

use rayon::prelude::*;

/// Chunk width for partial sums. The reduction shape depends only on the input
/// length, never on the worker count.
const CHUNK: usize = 4096;

/// Below this length the parallel dispatch overhead dominates; run serially.
/// Serial and parallel paths produce identical bits.
const PAR_MIN: usize = 8192;

/// Pairwise tree fold of partial sums, in place. Fixed shape for a given length.
fn tree_fold(parts: &mut [f64]) -> f64 {
    if parts.is_empty() {
        return 0.0;
    }
    let mut m = parts.len();
    while m > 1 {
        let half = m / 2;
        for k in 0..half {
            parts[k] = parts[2 * k] + parts[2 * k + 1];
        }
        if m % 2 == 1 {
            parts[half] = parts[m - 1];
        }
        m = half + m % 2;
    }
    parts[0]
}

/// Dot product with the fixed-shape pairwise reduction.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "dot operand lengths differ");
    let serial_chunk = |(xs, ys): (&[f64], &[f64])| -> f64 {
        let mut acc = 0.0;
        for (a, b) in xs.iter().zip(ys) {
            acc += a * b;
        }
        acc
    };
    let mut parts: Vec<f64> = if x.len() >= PAR_MIN {
        x.par_chunks(CHUNK)
            .zip(y.par_chunks(CHUNK))
            .map(serial_chunk)
            .collect()
    } else {
        x.chunks(CHUNK).zip(y.chunks(CHUNK)).map(serial_chunk).collect()
    };
    tree_fold(&mut parts)
}

/// Sum of `K`-component terms over `0..len`, with the same fixed-shape
/// reduction per component. Used for multi-component quadratures.
pub fn sum_terms<const K: usize>(len: usize, term: impl Fn(usize) -> [f64; K] + Sync) -> [f64; K] {
    let serial_chunk = |start: usize, end: usize| -> [f64; K] {
        let mut acc = [0.0; K];
        for idx in start..end {
            let t = term(idx);
            for c in 0..K {
                acc[c] += t[c];
            }
        }
        acc
    };
    let n_chunks = len.div_ceil(CHUNK).max(1);
    let parts: Vec<[f64; K]> = if len >= PAR_MIN {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| serial_chunk(c * CHUNK, ((c + 1) * CHUNK).min(len)))
            .collect()
    } else {
        (0..n_chunks)
            .map(|c| serial_chunk(c * CHUNK, ((c + 1) * CHUNK).min(len)))
            .collect()
    };
    let mut out = [0.0; K];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut col: Vec<f64> = parts.iter().map(|p| p[c]).collect();
        *slot = tree_fold(&mut col);
    }
    out
}

/// Fill `out[i] = f(i)` in parallel.
pub fn fill(out: &mut [f64], f: impl Fn(usize) -> f64 + Sync) {
    if out.len() >= PAR_MIN {
        out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
    } else {
        for (i, v) in out.iter_mut().enumerate() {
            *v = f(i);
        }
    }
}

/// `y[i] -= a * x[i]`.
pub fn sub_scaled(y: &mut [f64], a: f64, x: &[f64]) {
    assert_eq!(y.len(), x.len());
    if y.len() >= PAR_MIN {
        y.par_iter_mut().zip(x).for_each(|(yv, &xv)| *yv -= a * xv);
    } else {
        for (yv, &xv) in y.iter_mut().zip(x) {
            *yv -= a * xv;
        }
    }
}

/// `u[i] = z[i] + b * u[i]` (search-direction update).
pub fn xpby(u: &mut [f64], z: &[f64], b: f64) {
    assert_eq!(u.len(), z.len());
    if u.len() >= PAR_MIN {
        u.par_iter_mut().zip(z).for_each(|(uv, &zv)| *uv = zv + b * *uv);
    } else {
        for (uv, &zv) in u.iter_mut().zip(z) {
            *uv = zv + b * *uv;
        }
    }
}
