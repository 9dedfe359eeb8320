//! Dense compute kernels for the network: 3x3 convolution, ReLU, 2x2 max
//! pooling, global average pooling, and the linear classifier, each with its
//! backward pass.
//!
//! Stride-1 convolutions run over zero-padded planes so every output row is
//! one branch-free 9-tap pass, and reductions accumulate in 8 fixed lanes;
//! both shapes vectorize while keeping the summation order deterministic.

use alloc::vec::Vec;

use super::Real;

/// Output spatial size of a 3x3 convolution with zero padding 1.
pub(crate) fn conv_out_size(n: usize, stride: usize) -> usize {
    (n - 1) / stride + 1
}

/// Copy `planes` CHW planes into buffers padded by one zero pixel per side.
fn pad_planes<T: Real>(input: &[T], planes: usize, h: usize, w: usize, out: &mut Vec<T>) {
    let (ph, pw) = (h + 2, w + 2);
    out.clear();
    out.resize(planes * ph * pw, T::zero());
    for c in 0..planes {
        let src = &input[c * h * w..(c + 1) * h * w];
        let dst_plane = c * ph * pw;
        for y in 0..h {
            let dst = dst_plane + (y + 1) * pw + 1;
            out[dst..dst + w].copy_from_slice(&src[y * w..(y + 1) * w]);
        }
    }
}

/// Accumulate one 3x3-correlation output row from three padded input rows.
#[inline]
fn row_conv9<T: Real>(out_row: &mut [T], r0: &[T], r1: &[T], r2: &[T], w: &[T; 9]) {
    let n = out_row.len();
    let r0 = &r0[..n + 2];
    let r1 = &r1[..n + 2];
    let r2 = &r2[..n + 2];
    for x in 0..n {
        let acc = w[0] * r0[x]
            + w[1] * r0[x + 1]
            + w[2] * r0[x + 2]
            + w[3] * r1[x]
            + w[4] * r1[x + 1]
            + w[5] * r1[x + 2]
            + w[6] * r2[x]
            + w[7] * r2[x + 1]
            + w[8] * r2[x + 2];
        out_row[x] = out_row[x] + acc;
    }
}

/// Dot product with eight fixed accumulator lanes.
#[inline]
fn dot_lanes<T: Real>(a: &[T], b: &[T]) -> T {
    let mut lanes = [T::zero(); 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            lanes[k] = lanes[k] + x[k] * y[k];
        }
    }
    let mut total = T::zero();
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        total = total + x * y;
    }
    for lane in lanes {
        total = total + lane;
    }
    total
}

/// Sum with eight fixed accumulator lanes.
#[inline]
fn sum_lanes<T: Real>(a: &[T]) -> T {
    let mut lanes = [T::zero(); 8];
    let mut chunks = a.chunks_exact(8);
    for x in (&mut chunks).by_ref() {
        for k in 0..8 {
            lanes[k] = lanes[k] + x[k];
        }
    }
    let mut total = T::zero();
    for &x in chunks.remainder() {
        total = total + x;
    }
    for lane in lanes {
        total = total + lane;
    }
    total
}

pub(crate) fn conv3x3_forward<T: Real>(
    input: &[T],
    ic: usize,
    ih: usize,
    iw: usize,
    weights: &[T],
    bias: &[T],
    oc: usize,
    stride: usize,
    output: &mut Vec<T>,
) -> (usize, usize) {
    let oh = conv_out_size(ih, stride);
    let ow = conv_out_size(iw, stride);
    output.clear();
    output.resize(oc * oh * ow, T::zero());
    for o in 0..oc {
        output[o * oh * ow..(o + 1) * oh * ow].fill(bias[o]);
    }
    if stride == 1 {
        let pw = iw + 2;
        let mut padded = Vec::new();
        pad_planes(input, ic, ih, iw, &mut padded);
        for o in 0..oc {
            let obase = o * oh * ow;
            for i in 0..ic {
                let pin = &padded[i * (ih + 2) * pw..(i + 1) * (ih + 2) * pw];
                let wbase = (o * ic + i) * 9;
                let w: &[T; 9] = weights[wbase..wbase + 9].try_into().unwrap();
                for oy in 0..oh {
                    let (out_row, rest) = output[obase + oy * ow..].split_at_mut(ow);
                    let _ = rest;
                    row_conv9(
                        out_row,
                        &pin[oy * pw..],
                        &pin[(oy + 1) * pw..],
                        &pin[(oy + 2) * pw..],
                        w,
                    );
                }
            }
        }
    } else {
        for o in 0..oc {
            let obase = o * oh * ow;
            for i in 0..ic {
                let ibase = i * ih * iw;
                for ky in 0..3 {
                    let dy = ky as isize - 1;
                    for kx in 0..3 {
                        let dx = kx as isize - 1;
                        let w = weights[((o * ic + i) * 3 + ky) * 3 + kx];
                        for oy in 0..oh {
                            let iy = (oy * stride) as isize + dy;
                            if iy < 0 || iy >= ih as isize {
                                continue;
                            }
                            for ox in 0..ow {
                                let ix = (ox * stride) as isize + dx;
                                if ix < 0 || ix >= iw as isize {
                                    continue;
                                }
                                let iv = input[ibase + iy as usize * iw + ix as usize];
                                output[obase + oy * ow + ox] =
                                    output[obase + oy * ow + ox] + w * iv;
                            }
                        }
                    }
                }
            }
        }
    }
    (oh, ow)
}

/// Accumulate weight/bias gradients and (optionally) the input gradient.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv3x3_backward<T: Real>(
    input: &[T],
    ic: usize,
    ih: usize,
    iw: usize,
    weights: &[T],
    oc: usize,
    stride: usize,
    dout: &[T],
    dweights: &mut [T],
    dbias: &mut [T],
    mut dinput: Option<&mut Vec<T>>,
) {
    let oh = conv_out_size(ih, stride);
    let ow = conv_out_size(iw, stride);
    for o in 0..oc {
        let plane = &dout[o * oh * ow..(o + 1) * oh * ow];
        dbias[o] = dbias[o] + sum_lanes(plane);
    }
    if stride == 1 {
        // Stride 1 keeps the padded input and output planes at the same row
        // stride, so each kernel tap's weight gradient collapses to one long
        // dot product: dW[o][i][ky][kx] = dot(core rows of padded dout,
        // padded input offset by (ky, kx)). Padding positions pair with a
        // zero on at least one side.
        let pw = iw + 2;
        let mut pin = Vec::new();
        pad_planes(input, ic, ih, iw, &mut pin);
        let mut pdout = Vec::new();
        pad_planes(dout, oc, oh, ow, &mut pdout);

        let plane_len = (ih + 2) * pw;
        // Real dout values sit at flat offset pw + 1 + (oy * pw + ox) in the
        // padded plane; pairing that window against the padded input at flat
        // offset ky * pw + kx aligns tap (ky, kx) for every (oy, ox), and the
        // interleaved padding positions are zero on the dout side.
        let core_len = oh * pw - 2;
        for o in 0..oc {
            let abase = o * plane_len + pw + 1;
            let a = &pdout[abase..abase + core_len];
            for i in 0..ic {
                let ibase = i * plane_len;
                let wbase = (o * ic + i) * 9;
                for ky in 0..3 {
                    for kx in 0..3 {
                        let b = &pin[ibase + ky * pw + kx..ibase + ky * pw + kx + core_len];
                        let idx = wbase + ky * 3 + kx;
                        dweights[idx] = dweights[idx] + dot_lanes(a, b);
                    }
                }
            }
        }

        // dInput is the correlation of the padded output gradient with the
        // kernel flipped in both axes; same row kernel as the forward pass.
        if let Some(di) = dinput.as_deref_mut() {
            di.clear();
            di.resize(ic * ih * iw, T::zero());
            for i in 0..ic {
                let dibase = i * ih * iw;
                for o in 0..oc {
                    let pd = &pdout[o * plane_len..(o + 1) * plane_len];
                    let wbase = (o * ic + i) * 9;
                    let mut flipped = [T::zero(); 9];
                    for k in 0..9 {
                        flipped[k] = weights[wbase + 8 - k];
                    }
                    for iy in 0..ih {
                        let (row, _) = di[dibase + iy * iw..].split_at_mut(iw);
                        row_conv9(
                            row,
                            &pd[iy * pw..],
                            &pd[(iy + 1) * pw..],
                            &pd[(iy + 2) * pw..],
                            &flipped,
                        );
                    }
                }
            }
        }
    } else {
        if let Some(di) = dinput.as_deref_mut() {
            di.clear();
            di.resize(ic * ih * iw, T::zero());
        }
        for o in 0..oc {
            let obase = o * oh * ow;
            for i in 0..ic {
                let ibase = i * ih * iw;
                for ky in 0..3 {
                    let dy = ky as isize - 1;
                    for kx in 0..3 {
                        let dx = kx as isize - 1;
                        let widx = ((o * ic + i) * 3 + ky) * 3 + kx;
                        let w = weights[widx];
                        let mut wacc = T::zero();
                        for oy in 0..oh {
                            let iy = (oy * stride) as isize + dy;
                            if iy < 0 || iy >= ih as isize {
                                continue;
                            }
                            for ox in 0..ow {
                                let ix = (ox * stride) as isize + dx;
                                if ix < 0 || ix >= iw as isize {
                                    continue;
                                }
                                let g = dout[obase + oy * ow + ox];
                                let iidx = ibase + iy as usize * iw + ix as usize;
                                wacc = wacc + g * input[iidx];
                                if let Some(di) = dinput.as_deref_mut() {
                                    di[iidx] = di[iidx] + w * g;
                                }
                            }
                        }
                        dweights[widx] = dweights[widx] + wacc;
                    }
                }
            }
        }
    }
}

pub(crate) fn relu_inplace<T: Real>(data: &mut [T]) {
    for v in data.iter_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Zero the gradient where the forward activation was clamped; `post` is the
/// post-ReLU buffer, which has the same sign pattern as the pre-activation.
pub(crate) fn relu_backward_inplace<T: Real>(grad: &mut [T], post: &[T]) {
    for (g, &y) in grad.iter_mut().zip(post) {
        if y <= T::zero() {
            *g = T::zero();
        }
    }
}

/// 2x2 max pooling with stride 2; trailing odd rows/columns are dropped.
/// Ties resolve to the first element in scan order so training stays
/// deterministic.
pub(crate) fn maxpool2_forward<T: Real>(
    input: &[T],
    channels: usize,
    h: usize,
    w: usize,
    output: &mut Vec<T>,
    argmax: &mut Vec<usize>,
) -> (usize, usize) {
    let ph = h / 2;
    let pw = w / 2;
    output.clear();
    output.reserve(channels * ph * pw);
    argmax.clear();
    argmax.reserve(channels * ph * pw);
    for c in 0..channels {
        let plane = c * h * w;
        for py in 0..ph {
            for px in 0..pw {
                let i00 = plane + (2 * py) * w + 2 * px;
                let i01 = i00 + 1;
                let i10 = i00 + w;
                let i11 = i10 + 1;
                let mut best = i00;
                if input[i01] > input[best] {
                    best = i01;
                }
                if input[i10] > input[best] {
                    best = i10;
                }
                if input[i11] > input[best] {
                    best = i11;
                }
                output.push(input[best]);
                argmax.push(best);
            }
        }
    }
    (ph, pw)
}

pub(crate) fn maxpool2_backward<T: Real>(
    dout: &[T],
    argmax: &[usize],
    input_len: usize,
    dinput: &mut Vec<T>,
) {
    dinput.clear();
    dinput.resize(input_len, T::zero());
    for (&g, &idx) in dout.iter().zip(argmax) {
        dinput[idx] = dinput[idx] + g;
    }
}

/// Spatial mean per channel.
pub(crate) fn global_avg_pool<T: Real>(
    input: &[T],
    channels: usize,
    h: usize,
    w: usize,
    output: &mut Vec<T>,
) {
    output.clear();
    output.reserve(channels);
    let inv = T::one() / T::from(h * w).unwrap();
    for c in 0..channels {
        output.push(sum_lanes(&input[c * h * w..(c + 1) * h * w]) * inv);
    }
}

pub(crate) fn global_avg_pool_backward<T: Real>(
    dfeature: &[T],
    channels: usize,
    h: usize,
    w: usize,
    dinput: &mut Vec<T>,
) {
    dinput.clear();
    dinput.reserve(channels * h * w);
    let inv = T::one() / T::from(h * w).unwrap();
    for c in 0..channels {
        let g = dfeature[c] * inv;
        for _ in 0..h * w {
            dinput.push(g);
        }
    }
}

/// y = W x + b with W stored row-major [out][in].
pub(crate) fn linear_forward<T: Real>(
    x: &[T],
    weights: &[T],
    bias: &[T],
    out_dim: usize,
    in_dim: usize,
    y: &mut Vec<T>,
) {
    y.clear();
    y.reserve(out_dim);
    for o in 0..out_dim {
        let row = &weights[o * in_dim..(o + 1) * in_dim];
        y.push(bias[o] + dot_lanes(row, x));
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn linear_backward<T: Real>(
    x: &[T],
    weights: &[T],
    dy: &[T],
    out_dim: usize,
    in_dim: usize,
    dweights: &mut [T],
    dbias: &mut [T],
    dx: &mut Vec<T>,
) {
    dx.clear();
    dx.resize(in_dim, T::zero());
    for o in 0..out_dim {
        let g = dy[o];
        dbias[o] = dbias[o] + g;
        let wrow = &weights[o * in_dim..(o + 1) * in_dim];
        let dwrow = &mut dweights[o * in_dim..(o + 1) * in_dim];
        for i in 0..in_dim {
            dwrow[i] = dwrow[i] + g * x[i];
            dx[i] = dx[i] + g * wrow[i];
        }
    }
}
