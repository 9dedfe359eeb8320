//! Multi-scale convolutional classifier with shared weights.
//!
//! One fully-convolutional trunk and one linear classifier are applied to
//! several resized copies of the same action image; global average pooling
//! makes the per-scale features equal length, and a softmax loss attaches to
//! every scale's logits as well as to their average. There is exactly one
//! parameter vector regardless of the number of scales.

mod gradcheck;
mod layers;
mod train;

pub use gradcheck::{grad_check, GradCheckConfig, GradCheckReport, LayerCheck};
pub use train::{train, EpochMetrics, LrSchedule, OptimizerConfig, OptimizerState, TrainOptions};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;
use rand_distr::{Distribution, Normal};

use crate::mapping::FloatImage;
use crate::rng;

/// Scalar type for network parameters and activations.
pub trait Real: Float + core::fmt::Debug + 'static {}
impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn cast<T: Real>(v: f64) -> T {
    T::from(v).expect("finite f64 fits any Real")
}

/// Action images always carry three channels.
pub const IN_CHANNELS: usize = 3;

/// Row-major dense value container with an explicit shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Self {
        let count: usize = shape.iter().product();
        assert_eq!(count, data.len(), "tensor shape/value count mismatch");
        Tensor { shape, data }
    }

    /// CHW tensor from an HWC float image.
    pub fn chw_from_image(img: &FloatImage<T>) -> Self {
        let (h, w) = (img.height(), img.width());
        let mut data = Vec::with_capacity(3 * h * w);
        for c in 0..IN_CHANNELS {
            for y in 0..h {
                for x in 0..w {
                    data.push(img.get(y, x, c));
                }
            }
        }
        Tensor {
            shape: alloc::vec![IN_CHANNELS, h, w],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

/// One convolutional block: 3x3 kernel, zero padding 1, ReLU, and an
/// optional 2x2 max pool.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvBlock {
    pub out_channels: usize,
    pub stride: usize,
    pub pool: bool,
}

/// The shared fully-convolutional trunk.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrunkConfig {
    pub blocks: Vec<ConvBlock>,
}

impl TrunkConfig {
    /// Desk-scale default: four blocks with channels [16, 32, 64, 64], all
    /// stride 1 with pooling.
    pub fn desk_default() -> Self {
        TrunkConfig {
            blocks: [16, 32, 64, 64]
                .into_iter()
                .map(|out_channels| ConvBlock {
                    out_channels,
                    stride: 1,
                    pool: true,
                })
                .collect(),
        }
    }

    /// Channel count of the trunk output (and of every pooled feature).
    pub fn feature_len(&self) -> usize {
        self.blocks.last().map(|b| b.out_channels).unwrap_or(0)
    }

    /// Spatial size after running the trunk on a `size`x`size` input, or
    /// `None` if some layer collapses it to nothing.
    pub fn output_size(&self, size: usize) -> Option<usize> {
        let mut n = size;
        for block in &self.blocks {
            if n == 0 || block.stride == 0 {
                return None;
            }
            n = layers::conv_out_size(n, block.stride);
            if block.pool {
                n /= 2;
                if n == 0 {
                    return None;
                }
            }
        }
        Some(n)
    }
}

/// How the extra head combines the per-scale outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AvgHeadMode {
    /// Mean of per-scale logits, fed through one softmax (default).
    Logits,
    /// Mean of per-scale softmax probabilities.
    Probabilities,
}

/// Full network shape: trunk, input scales, classifier, and head wiring.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetConfig {
    pub trunk: TrunkConfig,
    /// Square input sizes, one per scale.
    pub scales: Vec<usize>,
    pub class_count: usize,
    pub avg_head: AvgHeadMode,
    /// One classifier shared by all scales (default), or one per scale.
    pub shared_classifier: bool,
}

impl NetConfig {
    /// Desk-scale default: three scales [64, 48, 32] over the default trunk.
    pub fn desk_default(class_count: usize) -> Self {
        NetConfig {
            trunk: TrunkConfig::desk_default(),
            scales: alloc::vec![64, 48, 32],
            class_count,
            avg_head: AvgHeadMode::Logits,
            shared_classifier: true,
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.class_count < 2 {
            return Err(NetError::TooFewClasses(self.class_count));
        }
        if self.trunk.blocks.is_empty() {
            return Err(NetError::EmptyTrunk);
        }
        for block in &self.trunk.blocks {
            if block.stride == 0 {
                return Err(NetError::ZeroStride);
            }
            if block.out_channels == 0 {
                return Err(NetError::ZeroChannels);
            }
        }
        if self.scales.is_empty() {
            return Err(NetError::NoScales);
        }
        for &scale in &self.scales {
            if scale < 4 {
                return Err(NetError::ScaleTooSmall(scale));
            }
            if self.trunk.output_size(scale).is_none() {
                return Err(NetError::ScaleCollapses(scale));
            }
        }
        Ok(())
    }
}

/// Range of one named parameter group in the flat vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamGroup {
    pub name: String,
    pub offset: usize,
    pub len: usize,
    /// Fan-in used for initialization.
    fan_in: usize,
    /// True for bias groups (zero-initialized).
    is_bias: bool,
}

fn param_groups(config: &NetConfig) -> Vec<ParamGroup> {
    let mut groups = Vec::new();
    let mut offset = 0;
    let mut push = |name: String, len: usize, fan_in: usize, is_bias: bool| {
        groups.push(ParamGroup {
            name,
            offset,
            len,
            fan_in,
            is_bias,
        });
        offset += len;
    };
    let mut ic = IN_CHANNELS;
    for (b, block) in config.trunk.blocks.iter().enumerate() {
        let oc = block.out_channels;
        push(format!("block{b}.weight"), oc * ic * 9, ic * 9, false);
        push(format!("block{b}.bias"), oc, ic * 9, true);
        ic = oc;
    }
    let feature = config.trunk.feature_len();
    let m = config.class_count;
    if config.shared_classifier {
        push(String::from("classifier.weight"), m * feature, feature, false);
        push(String::from("classifier.bias"), m, feature, true);
    } else {
        for s in 0..config.scales.len() {
            push(format!("classifier{s}.weight"), m * feature, feature, false);
            push(format!("classifier{s}.bias"), m, feature, true);
        }
    }
    groups
}

/// The classifier network. All scales read the same flat parameter vector;
/// there are no per-scale copies to fall out of sync.
#[derive(Clone, Debug)]
pub struct MultiScaleNet<T> {
    config: NetConfig,
    groups: Vec<ParamGroup>,
    params: Vec<T>,
}

/// Per-scale logits plus the combined head.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOutput<T> {
    pub per_scale_logits: Vec<Vec<T>>,
    /// Mean of per-scale logits (or of probabilities, per `AvgHeadMode`).
    pub averaged: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction<T> {
    pub class: usize,
    pub probabilities: Vec<T>,
}

/// Input image pre-resized to every scale, as CHW tensors.
#[derive(Clone, Debug)]
pub struct PreparedImage<T> {
    tensors: Vec<Tensor<T>>,
}

impl<T: Real> PreparedImage<T> {
    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }
}

/// Aggregate result of one minibatch pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchStats<T> {
    pub loss: T,
    pub correct: usize,
}

struct BlockRecord<T> {
    /// Post-ReLU activation before pooling.
    pre_pool: Vec<T>,
    pre_dims: (usize, usize, usize),
    /// Pooled output and argmax indices, when the block pools.
    pooled: Option<(Vec<T>, (usize, usize, usize), Vec<usize>)>,
}

impl<T: Real> BlockRecord<T> {
    fn output(&self) -> (&[T], (usize, usize, usize)) {
        match &self.pooled {
            Some((data, dims, _)) => (data.as_slice(), *dims),
            None => (self.pre_pool.as_slice(), self.pre_dims),
        }
    }
}

struct ScaleCache<T> {
    /// Spatial side length of the scale's input tensor.
    input_side: usize,
    blocks: Vec<BlockRecord<T>>,
    feature: Vec<T>,
    logits: Vec<T>,
}

impl<T: Real> MultiScaleNet<T> {
    /// Validate the config and initialize parameters with fan-in scaled
    /// Gaussians (biases zero) from a fixed seed.
    pub fn new(config: NetConfig, seed: u64) -> Result<Self, NetError> {
        config.validate()?;
        let groups = param_groups(&config);
        let count = groups.iter().map(|g| g.len).sum();
        let mut params = Vec::with_capacity(count);
        for (gi, group) in groups.iter().enumerate() {
            if group.is_bias {
                params.extend(core::iter::repeat(T::zero()).take(group.len));
            } else {
                let std = libm::sqrt(2.0 / group.fan_in as f64);
                let normal = Normal::new(0.0, std).expect("positive std");
                let mut rng = rng::stream(seed, &[0x6e65_74, gi as u64]);
                params.extend((0..group.len).map(|_| cast::<T>(normal.sample(&mut rng))));
            }
        }
        Ok(MultiScaleNet {
            config,
            groups,
            params,
        })
    }

    /// Rebuild a network around an existing flat parameter vector.
    pub fn from_params(config: NetConfig, params: Vec<T>) -> Result<Self, NetError> {
        config.validate()?;
        let groups = param_groups(&config);
        let expected: usize = groups.iter().map(|g| g.len).sum();
        if params.len() != expected {
            return Err(NetError::ParamCountMismatch {
                expected,
                actual: params.len(),
            });
        }
        Ok(MultiScaleNet {
            config,
            groups,
            params,
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn param_groups(&self) -> &[ParamGroup] {
        &self.groups
    }

    fn group_slice(&self, index: usize) -> &[T] {
        let g = &self.groups[index];
        &self.params[g.offset..g.offset + g.len]
    }

    /// (weight group index, bias group index) of block `b`.
    fn block_groups(&self, b: usize) -> (usize, usize) {
        (2 * b, 2 * b + 1)
    }

    fn classifier_groups(&self, scale_index: usize) -> (usize, usize) {
        let base = 2 * self.config.trunk.blocks.len();
        if self.config.shared_classifier {
            (base, base + 1)
        } else {
            (base + 2 * scale_index, base + 2 * scale_index + 1)
        }
    }

    /// Resize the input once per scale.
    pub fn prepare(&self, image: &FloatImage<T>) -> PreparedImage<T> {
        let tensors = self
            .config
            .scales
            .iter()
            .map(|&s| Tensor::chw_from_image(&image.resize(s, s)))
            .collect();
        PreparedImage { tensors }
    }

    fn scale_forward(&self, input: &Tensor<T>, scale_index: usize) -> ScaleCache<T> {
        let shape = input.shape();
        let (mut c, mut h, mut w) = (shape[0], shape[1], shape[2]);
        let input_side = h;
        let mut blocks: Vec<BlockRecord<T>> = Vec::with_capacity(self.config.trunk.blocks.len());
        for (b, block) in self.config.trunk.blocks.iter().enumerate() {
            let current: &[T] = match blocks.last() {
                None => input.data(),
                Some(prev) => prev.output().0,
            };
            let (wg, bg) = self.block_groups(b);
            let mut conv_out = Vec::new();
            let (oh, ow) = layers::conv3x3_forward(
                current,
                c,
                h,
                w,
                self.group_slice(wg),
                self.group_slice(bg),
                block.out_channels,
                block.stride,
                &mut conv_out,
            );
            layers::relu_inplace(&mut conv_out);
            let pre_dims = (block.out_channels, oh, ow);
            let pooled = if block.pool {
                let mut pool_out = Vec::new();
                let mut argmax = Vec::new();
                let (ph, pw) = layers::maxpool2_forward(
                    &conv_out,
                    block.out_channels,
                    oh,
                    ow,
                    &mut pool_out,
                    &mut argmax,
                );
                Some((pool_out, (block.out_channels, ph, pw), argmax))
            } else {
                None
            };
            let record = BlockRecord {
                pre_pool: conv_out,
                pre_dims,
                pooled,
            };
            let (_, dims) = record.output();
            (c, h, w) = dims;
            blocks.push(record);
        }
        let (final_map, (fc, fh, fw)) = blocks.last().unwrap().output();
        let mut feature = Vec::new();
        layers::global_avg_pool(final_map, fc, fh, fw, &mut feature);
        let (cwg, cbg) = self.classifier_groups(scale_index);
        let mut logits = Vec::new();
        layers::linear_forward(
            &feature,
            self.group_slice(cwg),
            self.group_slice(cbg),
            self.config.class_count,
            feature.len(),
            &mut logits,
        );
        ScaleCache {
            input_side,
            blocks,
            feature,
            logits,
        }
    }

    fn combine_heads(&self, per_scale: &[Vec<T>]) -> Vec<T> {
        let m = self.config.class_count;
        let inv = T::one() / cast::<T>(per_scale.len() as f64);
        let mut avg = alloc::vec![T::zero(); m];
        match self.config.avg_head {
            AvgHeadMode::Logits => {
                for logits in per_scale {
                    for (a, &l) in avg.iter_mut().zip(logits) {
                        *a = *a + l;
                    }
                }
            }
            AvgHeadMode::Probabilities => {
                for logits in per_scale {
                    let p = softmax(logits);
                    for (a, &v) in avg.iter_mut().zip(&p) {
                        *a = *a + v;
                    }
                }
            }
        }
        for a in avg.iter_mut() {
            *a = *a * inv;
        }
        avg
    }

    /// Run every scale on a prepared image.
    pub fn forward_prepared(&self, prepared: &PreparedImage<T>) -> ForwardOutput<T> {
        let per_scale_logits: Vec<Vec<T>> = prepared
            .tensors
            .iter()
            .enumerate()
            .map(|(s, t)| self.scale_forward(t, s).logits)
            .collect();
        let averaged = self.combine_heads(&per_scale_logits);
        ForwardOutput {
            per_scale_logits,
            averaged,
        }
    }

    /// Resize and run; image values are expected in [0, 1].
    pub fn forward(&self, image: &FloatImage<T>) -> ForwardOutput<T> {
        self.forward_prepared(&self.prepare(image))
    }

    /// Class probabilities of the combined head.
    pub fn head_probabilities(&self, output: &ForwardOutput<T>) -> Vec<T> {
        match self.config.avg_head {
            AvgHeadMode::Logits => softmax(&output.averaged),
            AvgHeadMode::Probabilities => output.averaged.clone(),
        }
    }

    /// Predicted class by the combined head; ties break to the lowest index.
    pub fn predict_prepared(&self, prepared: &PreparedImage<T>) -> Prediction<T> {
        let output = self.forward_prepared(prepared);
        let probabilities = self.head_probabilities(&output);
        Prediction {
            class: argmax(&probabilities),
            probabilities,
        }
    }

    pub fn predict(&self, image: &FloatImage<T>) -> Prediction<T> {
        self.predict_prepared(&self.prepare(image))
    }

    fn check_label(&self, label: usize) -> Result<(), NetError> {
        if label >= self.config.class_count {
            return Err(NetError::InvalidLabel {
                label,
                class_count: self.config.class_count,
            });
        }
        Ok(())
    }

    fn sample_loss(&self, output: &ForwardOutput<T>, label: usize) -> T {
        let mut loss = T::zero();
        for logits in &output.per_scale_logits {
            loss = loss + cross_entropy(logits, label);
        }
        loss = loss
            + match self.config.avg_head {
                AvgHeadMode::Logits => cross_entropy(&output.averaged, label),
                AvgHeadMode::Probabilities => -output.averaged[label].ln(),
            };
        loss / cast::<T>((output.per_scale_logits.len() + 1) as f64)
    }

    /// Forward-only loss of a labeled batch: mean over samples of the mean
    /// over the S+1 heads.
    pub fn batch_loss(&self, batch: &[(&PreparedImage<T>, usize)]) -> Result<T, NetError> {
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let mut total = T::zero();
        for &(prepared, label) in batch {
            self.check_label(label)?;
            let output = self.forward_prepared(prepared);
            total = total + self.sample_loss(&output, label);
        }
        Ok(total / cast::<T>(batch.len() as f64))
    }

    /// Loss, gradients (accumulated into `grads`, which the caller zeroes),
    /// and correct-prediction count for one minibatch.
    pub fn batch_loss_and_grad(
        &self,
        batch: &[(&PreparedImage<T>, usize)],
        grads: &mut [T],
    ) -> Result<BatchStats<T>, NetError> {
        assert_eq!(grads.len(), self.params.len(), "gradient buffer size");
        if batch.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let s_count = self.config.scales.len();
        let heads = cast::<T>((s_count + 1) as f64);
        let inv_batch = T::one() / cast::<T>(batch.len() as f64);
        let head_scale = inv_batch / heads;
        let inv_s = T::one() / cast::<T>(s_count as f64);
        let mut total_loss = T::zero();
        let mut correct = 0usize;

        for &(prepared, label) in batch {
            self.check_label(label)?;
            let caches: Vec<ScaleCache<T>> = prepared
                .tensors
                .iter()
                .enumerate()
                .map(|(s, t)| self.scale_forward(t, s))
                .collect();
            let per_scale_logits: Vec<Vec<T>> =
                caches.iter().map(|c| c.logits.clone()).collect();
            let averaged = self.combine_heads(&per_scale_logits);
            let output = ForwardOutput {
                per_scale_logits,
                averaged,
            };
            total_loss = total_loss + self.sample_loss(&output, label);
            if argmax(&self.head_probabilities(&output)) == label {
                correct += 1;
            }

            // Per-head gradients on each scale's logits, averaged over the
            // S+1 heads and the batch.
            let mut dlogits: Vec<Vec<T>> = Vec::with_capacity(s_count);
            match self.config.avg_head {
                AvgHeadMode::Logits => {
                    let g_avg = softmax_minus_onehot(&output.averaged, label);
                    for logits in &output.per_scale_logits {
                        let mut g = softmax_minus_onehot(logits, label);
                        for (gv, &ga) in g.iter_mut().zip(&g_avg) {
                            *gv = (*gv + ga * inv_s) * head_scale;
                        }
                        dlogits.push(g);
                    }
                }
                AvgHeadMode::Probabilities => {
                    let p_bar = &output.averaged;
                    for logits in &output.per_scale_logits {
                        let p = softmax(logits);
                        let mut g = softmax_minus_onehot(logits, label);
                        // d(-ln pbar[k])/dx_i = (p[k]/pbar[k]) * (p_i - d_ik) / S
                        let ratio = p[label] / p_bar[label];
                        for (i, gv) in g.iter_mut().enumerate() {
                            let delta = if i == label { T::one() } else { T::zero() };
                            *gv = (*gv + ratio * (p[i] - delta) * inv_s) * head_scale;
                        }
                        dlogits.push(g);
                    }
                }
            }

            for (s, cache) in caches.iter().enumerate() {
                self.scale_backward(prepared.tensors[s].data(), s, cache, &dlogits[s], grads);
            }
        }
        let loss = total_loss * inv_batch;
        if !loss.is_finite() {
            return Err(NetError::NonFiniteLoss);
        }
        Ok(BatchStats { loss, correct })
    }

    fn scale_backward(
        &self,
        input: &[T],
        scale_index: usize,
        cache: &ScaleCache<T>,
        dlogits: &[T],
        grads: &mut [T],
    ) {
        let feature_len = cache.feature.len();
        let (cwg, cbg) = self.classifier_groups(scale_index);

        let mut dfeature = Vec::new();
        {
            let (dw, db) = two_slices(grads, &self.groups[cwg], &self.groups[cbg]);
            layers::linear_backward(
                &cache.feature,
                self.group_slice(cwg),
                dlogits,
                self.config.class_count,
                feature_len,
                dw,
                db,
                &mut dfeature,
            );
        }

        let blocks = &self.config.trunk.blocks;
        let (_, (fc, fh, fw)) = cache.blocks.last().unwrap().output();
        let mut dcurrent = Vec::new();
        layers::global_avg_pool_backward(&dfeature, fc, fh, fw, &mut dcurrent);

        for b in (0..blocks.len()).rev() {
            let record = &cache.blocks[b];
            let mut dpre = if let Some((_, _, argmax)) = &record.pooled {
                let mut buf = Vec::new();
                layers::maxpool2_backward(&dcurrent, argmax, record.pre_pool.len(), &mut buf);
                buf
            } else {
                core::mem::take(&mut dcurrent)
            };
            layers::relu_backward_inplace(&mut dpre, &record.pre_pool);

            let (conv_in, (ic, ih, iw)) = if b == 0 {
                (input, (IN_CHANNELS, cache.input_side, cache.input_side))
            } else {
                cache.blocks[b - 1].output()
            };

            let (wg, bg) = self.block_groups(b);
            let mut dinput = Vec::new();
            {
                let (dw, db) = two_slices(grads, &self.groups[wg], &self.groups[bg]);
                layers::conv3x3_backward(
                    conv_in,
                    ic,
                    ih,
                    iw,
                    self.group_slice(wg),
                    blocks[b].out_channels,
                    blocks[b].stride,
                    &dpre,
                    dw,
                    db,
                    if b > 0 { Some(&mut dinput) } else { None },
                );
            }
            dcurrent = dinput;
        }
    }
}

/// Two disjoint mutable views into the gradient buffer.
fn two_slices<'a, T>(
    grads: &'a mut [T],
    a: &ParamGroup,
    b: &ParamGroup,
) -> (&'a mut [T], &'a mut [T]) {
    debug_assert!(a.offset + a.len <= b.offset);
    let (left, right) = grads.split_at_mut(b.offset);
    (&mut left[a.offset..a.offset + a.len], &mut right[..b.len])
}

/// Numerically stable softmax: exponentials are taken after subtracting the
/// maximum logit.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let mut max = T::neg_infinity();
    for &v in logits {
        if v > max {
            max = v;
        }
    }
    let mut out: Vec<T> = logits.iter().map(|&v| (v - max).exp()).collect();
    let mut sum = T::zero();
    for &v in &out {
        sum = sum + v;
    }
    for v in out.iter_mut() {
        *v = *v / sum;
    }
    out
}

/// Cross-entropy -log p[label], computed in log-sum-exp form.
pub fn cross_entropy<T: Real>(logits: &[T], label: usize) -> T {
    let mut max = T::neg_infinity();
    for &v in logits {
        if v > max {
            max = v;
        }
    }
    let mut sum = T::zero();
    for &v in logits {
        sum = sum + (v - max).exp();
    }
    sum.ln() + max - logits[label]
}

/// Gradient of the cross-entropy w.r.t. the logits: softmax(x) - onehot(k).
pub fn softmax_minus_onehot<T: Real>(logits: &[T], label: usize) -> Vec<T> {
    let mut g = softmax(logits);
    g[label] = g[label] - T::one();
    g
}

/// Index of the largest value; ties break to the lowest index.
pub fn argmax<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetError {
    TooFewClasses(usize),
    EmptyTrunk,
    ZeroStride,
    ZeroChannels,
    NoScales,
    ScaleTooSmall(usize),
    /// The trunk reduces this input scale to an empty feature map.
    ScaleCollapses(usize),
    ParamCountMismatch {
        expected: usize,
        actual: usize,
    },
    InvalidLabel {
        label: usize,
        class_count: usize,
    },
    EmptyBatch,
    EmptyTrainingSet,
    NonFiniteLoss,
    /// Training aborted on a non-finite loss.
    Diverged {
        epoch: usize,
        batch: usize,
    },
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetError::TooFewClasses(m) => write!(f, "need at least 2 classes, got {m}"),
            NetError::EmptyTrunk => write!(f, "trunk needs at least one block"),
            NetError::ZeroStride => write!(f, "conv stride must be >= 1"),
            NetError::ZeroChannels => write!(f, "conv out_channels must be >= 1"),
            NetError::NoScales => write!(f, "need at least one input scale"),
            NetError::ScaleTooSmall(s) => write!(f, "input scale {s} must be >= 4"),
            NetError::ScaleCollapses(s) => {
                write!(f, "trunk collapses a {s}x{s} input to an empty map")
            }
            NetError::ParamCountMismatch { expected, actual } => {
                write!(f, "expected {expected} parameters, got {actual}")
            }
            NetError::InvalidLabel { label, class_count } => {
                write!(f, "label {label} out of range for {class_count} classes")
            }
            NetError::EmptyBatch => write!(f, "empty minibatch"),
            NetError::EmptyTrainingSet => write!(f, "empty training set"),
            NetError::NonFiniteLoss => write!(f, "loss is not finite"),
            NetError::Diverged { epoch, batch } => {
                write!(f, "training diverged at epoch {epoch}, batch {batch}")
            }
        }
    }
}

impl core::error::Error for NetError {}
