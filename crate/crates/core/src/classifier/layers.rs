//! Layer kernels on position-major `[length][channels]` buffers.
//!
//! Backward functions accumulate into their gradient outputs so per-sample
//! gradients can be summed without extra copies.

/// Output channels accumulated together in registers.
const LANES: usize = 8;

/// Same-length 1D convolution with zero padding `k / 2`.
///
/// `w` is `[k][c_in][c_out]`, so the innermost loops run over contiguous
/// output channels.
pub fn conv1d_forward(
    input: &[f64],
    c_in: usize,
    len: usize,
    w: &[f64],
    b: &[f64],
    c_out: usize,
    k: usize,
    out: &mut [f64],
) {
    for t in 0..len {
        out[t * c_out..(t + 1) * c_out].copy_from_slice(b);
    }
    conv1d_accumulate(input, c_in, len, w, c_out, k, out);
}

/// Output positions computed together by the interior kernel.
const ROWS: usize = 4;

/// `out += conv(input, w)` without bias.
fn conv1d_accumulate(
    input: &[f64],
    c_in: usize,
    len: usize,
    w: &[f64],
    c_out: usize,
    k: usize,
    out: &mut [f64],
) {
    let pad = k / 2;
    let mut t = 0;
    while t < len {
        let interior = t >= pad && t + ROWS + k - 1 - pad <= len;
        if interior && c_out % LANES == 0 {
            conv_rows_kernel(input, c_in, w, c_out, k, t - pad, &mut out[t * c_out..(t + ROWS) * c_out]);
            t += ROWS;
        } else {
            conv_single_row(input, c_in, len, w, c_out, k, t, &mut out[t * c_out..(t + 1) * c_out]);
            t += 1;
        }
    }
}

/// ROWS consecutive outputs whose taps all fall inside the input; `s0` is the first tap position.
#[inline]
fn conv_rows_kernel(input: &[f64], c_in: usize, w: &[f64], c_out: usize, k: usize, s0: usize, out: &mut [f64]) {
    for c0 in (0..c_out).step_by(LANES) {
        let mut acc = [[0.0f64; LANES]; ROWS];
        for j in 0..k {
            for ci in 0..c_in {
                let base = (j * c_in + ci) * c_out + c0;
                let wv: &[f64; LANES] = w[base..base + LANES].try_into().unwrap();
                for (r, row) in acc.iter_mut().enumerate() {
                    let xv = input[(s0 + r + j) * c_in + ci];
                    for l in 0..LANES {
                        row[l] += xv * wv[l];
                    }
                }
            }
        }
        for (r, row) in acc.iter().enumerate() {
            for (o, a) in out[r * c_out + c0..r * c_out + c0 + LANES].iter_mut().zip(row) {
                *o += a;
            }
        }
    }
}

fn conv_single_row(
    input: &[f64],
    c_in: usize,
    len: usize,
    w: &[f64],
    c_out: usize,
    k: usize,
    t: usize,
    out: &mut [f64],
) {
    let pad = k / 2;
    let j_lo = pad.saturating_sub(t);
    let j_hi = k.min(len + pad - t);
    for (co, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in j_lo..j_hi {
            let s = t + j - pad;
            for (ci, &xv) in input[s * c_in..(s + 1) * c_in].iter().enumerate() {
                acc += xv * w[(j * c_in + ci) * c_out + co];
            }
        }
        *o += acc;
    }
}

/// Gradients of [`conv1d_forward`]. `d_input` may be `None` for the first layer.
pub fn conv1d_backward(
    input: &[f64],
    c_in: usize,
    len: usize,
    w: &[f64],
    c_out: usize,
    k: usize,
    d_out: &[f64],
    d_w: &mut [f64],
    d_b: &mut [f64],
    d_input: Option<&mut [f64]>,
) {
    let pad = k / 2;
    for g in d_out.chunks_exact(c_out).take(len) {
        for (db, gv) in d_b.iter_mut().zip(g) {
            *db += gv;
        }
    }
    for j in 0..k {
        // output positions t whose tap j reads a real input sample
        let t_lo = pad.saturating_sub(j);
        let t_hi = (len + pad).saturating_sub(j).min(len);
        let mut ci = 0;
        while ci < c_in {
            if ci + ROWS <= c_in && c_out % LANES == 0 {
                for c0 in (0..c_out).step_by(LANES) {
                    let mut acc = [[0.0f64; LANES]; ROWS];
                    for t in t_lo..t_hi {
                        let x = &input[(t + j - pad) * c_in + ci..(t + j - pad) * c_in + ci + ROWS];
                        let g: &[f64; LANES] = d_out[t * c_out + c0..t * c_out + c0 + LANES].try_into().unwrap();
                        for (row, &xv) in acc.iter_mut().zip(x) {
                            for l in 0..LANES {
                                row[l] += xv * g[l];
                            }
                        }
                    }
                    for (r, row) in acc.iter().enumerate() {
                        let base = (j * c_in + ci + r) * c_out + c0;
                        for (dw, a) in d_w[base..base + LANES].iter_mut().zip(row) {
                            *dw += a;
                        }
                    }
                }
                ci += ROWS;
            } else {
                for co in 0..c_out {
                    let mut acc = 0.0;
                    for t in t_lo..t_hi {
                        acc += input[(t + j - pad) * c_in + ci] * d_out[t * c_out + co];
                    }
                    d_w[(j * c_in + ci) * c_out + co] += acc;
                }
                ci += 1;
            }
        }
    }
    if let Some(dx) = d_input {
        // the input gradient is a convolution of d_out with the flipped, transposed kernel
        let mut flipped = vec![0.0; w.len()];
        for j in 0..k {
            for ci in 0..c_in {
                for co in 0..c_out {
                    flipped[((k - 1 - j) * c_out + co) * c_in + ci] = w[(j * c_in + ci) * c_out + co];
                }
            }
        }
        conv1d_accumulate(d_out, c_out, len, &flipped, c_in, k, dx);
    }
}

pub fn relu_in_place(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Zeroes `grad` wherever the ReLU output `activated` is not positive.
pub fn relu_backward_in_place(activated: &[f64], grad: &mut [f64]) {
    for (g, a) in grad.iter_mut().zip(activated) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Mean over the length axis.
pub fn global_avg_pool(x: &[f64], channels: usize, len: usize, out: &mut [f64]) {
    out[..channels].fill(0.0);
    for row in x.chunks_exact(channels).take(len) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    out[..channels].iter_mut().for_each(|o| *o /= len as f64);
}

pub fn global_avg_pool_backward(d_out: &[f64], channels: usize, len: usize, d_x: &mut [f64]) {
    for row in d_x.chunks_exact_mut(channels).take(len) {
        for (d, g) in row.iter_mut().zip(d_out) {
            *d += g / len as f64;
        }
    }
}

/// `out = W·x + b` with `W` as `[n_out][n_in]`.
pub fn dense_forward(x: &[f64], w: &[f64], b: &[f64], out: &mut [f64]) {
    let n_in = x.len();
    for (o, (row, bo)) in out.iter_mut().zip(w.chunks_exact(n_in).zip(b)) {
        *o = bo + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

pub fn dense_backward(
    x: &[f64],
    w: &[f64],
    d_out: &[f64],
    d_w: &mut [f64],
    d_b: &mut [f64],
    d_x: &mut [f64],
) {
    let n_in = x.len();
    for (o, &g) in d_out.iter().enumerate() {
        d_b[o] += g;
        let row = &w[o * n_in..(o + 1) * n_in];
        for i in 0..n_in {
            d_w[o * n_in + i] += g * x[i];
            d_x[i] += g * row[i];
        }
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64], out: &mut [f64]) {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (o, l) in out.iter_mut().zip(logits) {
        *o = (l - m).exp();
        z += *o;
    }
    out.iter_mut().for_each(|o| *o /= z);
}

/// Cross-entropy of `label` under the softmax of `logits`, and its gradient.
pub fn softmax_cross_entropy(logits: &[f64], label: usize, probs: &mut [f64], d_logits: &mut [f64]) -> f64 {
    softmax(logits, probs);
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    for (i, (d, p)) in d_logits.iter_mut().zip(probs.iter()).enumerate() {
        *d = p - if i == label { 1.0 } else { 0.0 };
    }
    lse - logits[label]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn close(a: f64, n: f64) -> bool {
        (a - n).abs() <= 1e-4 * a.abs().max(n.abs()) + 1e-9
    }

    /// Central difference of `f` with respect to `v[i]`.
    fn fd(v: &mut Vec<f64>, i: usize, f: &dyn Fn(&[f64]) -> f64) -> f64 {
        let h = 1e-5;
        let orig = v[i];
        v[i] = orig + h;
        let up = f(v);
        v[i] = orig - h;
        let down = f(v);
        v[i] = orig;
        (up - down) / (2.0 * h)
    }

    #[test]
    fn conv_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (ci, co, len, k) = (2, 3, 7, 3);
        let x = rand_vec(ci * len, &mut rng);
        let w = rand_vec(co * ci * k, &mut rng);
        let b = rand_vec(co, &mut rng);
        let mut out = vec![0.0; co * len];
        conv1d_forward(&x, ci, len, &w, &b, co, k, &mut out);
        for o in 0..co {
            for t in 0..len {
                let mut s = b[o];
                for c in 0..ci {
                    for j in 0..k {
                        let src = t as isize + j as isize - 1;
                        if (0..len as isize).contains(&src) {
                            s += w[(j * ci + c) * co + o] * x[src as usize * ci + c];
                        }
                    }
                }
                assert!((s - out[t * co + o]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn conv_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (ci, co, len, k) = (3, 4, 9, 3);
        let x = rand_vec(ci * len, &mut rng);
        let w = rand_vec(co * ci * k, &mut rng);
        let b = rand_vec(co, &mut rng);
        let r = rand_vec(co * len, &mut rng);
        // scalar objective: <r, conv(x)>
        let obj = |x: &[f64], w: &[f64], b: &[f64]| {
            let mut out = vec![0.0; co * len];
            conv1d_forward(x, ci, len, w, b, co, k, &mut out);
            out.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut dw = vec![0.0; w.len()];
        let mut db = vec![0.0; b.len()];
        let mut dx = vec![0.0; x.len()];
        conv1d_backward(&x, ci, len, &w, co, k, &r, &mut dw, &mut db, Some(&mut dx));
        let (mut xv, mut wv, mut bv) = (x.clone(), w.clone(), b.clone());
        for i in 0..w.len() {
            let n = fd(&mut wv, i, &|v| obj(&x, v, &b));
            assert!(close(dw[i], n), "w{i}");
        }
        for i in 0..b.len() {
            let n = fd(&mut bv, i, &|v| obj(&x, &w, v));
            assert!(close(db[i], n), "b{i}");
        }
        for i in 0..x.len() {
            let n = fd(&mut xv, i, &|v| obj(v, &w, &b));
            assert!(close(dx[i], n), "x{i}");
        }
    }

    #[test]
    fn relu_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = rand_vec(50, &mut rng).into_iter().map(|v| v + 0.01f64.copysign(v)).collect();
        let r = rand_vec(50, &mut rng);
        let obj = |x: &[f64]| {
            let mut y = x.to_vec();
            relu_in_place(&mut y);
            y.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut y = x.clone();
        relu_in_place(&mut y);
        let mut g = r.clone();
        relu_backward_in_place(&y, &mut g);
        let mut xv = x.clone();
        for i in 0..x.len() {
            assert!(close(g[i], fd(&mut xv, i, &obj)));
        }
    }

    #[test]
    fn pool_and_dense_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (c, len, n_out) = (4, 6, 5);
        let x = rand_vec(c * len, &mut rng);
        let w = rand_vec(n_out * c, &mut rng);
        let b = rand_vec(n_out, &mut rng);
        let label = 2;
        let obj = |x: &[f64], w: &[f64], b: &[f64]| {
            let mut p = vec![0.0; c];
            global_avg_pool(x, c, len, &mut p);
            let mut l = vec![0.0; n_out];
            dense_forward(&p, w, b, &mut l);
            let mut pr = vec![0.0; n_out];
            let mut dl = vec![0.0; n_out];
            softmax_cross_entropy(&l, label, &mut pr, &mut dl)
        };
        let mut p = vec![0.0; c];
        global_avg_pool(&x, c, len, &mut p);
        let mut l = vec![0.0; n_out];
        dense_forward(&p, &w, &b, &mut l);
        let mut pr = vec![0.0; n_out];
        let mut dl = vec![0.0; n_out];
        softmax_cross_entropy(&l, label, &mut pr, &mut dl);
        let (mut dw, mut db, mut dp) = (vec![0.0; w.len()], vec![0.0; n_out], vec![0.0; c]);
        dense_backward(&p, &w, &dl, &mut dw, &mut db, &mut dp);
        let mut dx = vec![0.0; x.len()];
        global_avg_pool_backward(&dp, c, len, &mut dx);
        let (mut xv, mut wv, mut bv) = (x.clone(), w.clone(), b.clone());
        for i in 0..w.len() {
            assert!(close(dw[i], fd(&mut wv, i, &|v| obj(&x, v, &b))));
        }
        for i in 0..n_out {
            assert!(close(db[i], fd(&mut bv, i, &|v| obj(&x, &w, v))));
        }
        for i in 0..x.len() {
            assert!(close(dx[i], fd(&mut xv, i, &|v| obj(v, &w, &b))));
        }
    }

    #[test]
    fn softmax_is_stable_and_normalized() {
        let mut p = vec![0.0; 3];
        softmax(&[1000.0, 1000.0, -1000.0], &mut p);
        assert!((p[0] - 0.5).abs() < 1e-15 && p[2] == 0.0);
        let mut d = vec![0.0; 5];
        let mut q = vec![0.0; 5];
        let loss = softmax_cross_entropy(&[0.0; 5], 3, &mut q, &mut d);
        assert!((loss - 5f64.ln()).abs() < 1e-15);
        assert!((d.iter().sum::<f64>()).abs() < 1e-15);
    }
}
