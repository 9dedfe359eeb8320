//! Finite-difference verification of the analytic gradients.
//!
//! Central differences (E(p+h) - E(p-h)) / 2h are compared against the
//! backward pass on a sampled subset of parameters covering every layer.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use super::{cast, MultiScaleNet, NetError, Real};
use crate::mapping::FloatImage;
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckConfig {
    /// Central-difference step.
    pub h: f64,
    /// Maximum allowed relative error.
    pub tolerance: f64,
    /// Total parameters to sample, spread over all layers.
    pub target_samples: usize,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            h: 1e-5,
            tolerance: 1e-4,
            target_samples: 200,
            seed: 0,
        }
    }
}

/// Worst relative error observed within one parameter group.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCheck {
    pub name: String,
    pub checked: usize,
    pub max_rel_error: f64,
    /// Flat index of the worst parameter.
    pub worst_param: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub layers: Vec<LayerCheck>,
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "gradient check: {} ({} params, max rel error {:.3e}, tolerance {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.checked,
            self.max_rel_error,
            self.tolerance,
        )?;
        for layer in &self.layers {
            writeln!(
                f,
                "  {:<22} checked {:>4}  max rel {:.3e}  (param {}, analytic {:.6e}, numeric {:.6e})",
                layer.name,
                layer.checked,
                layer.max_rel_error,
                layer.worst_param,
                layer.analytic,
                layer.numeric,
            )?;
        }
        Ok(())
    }
}

/// Spread `target` samples over groups of the given sizes. Small groups are
/// taken whole and their shortfall is redistributed, so the total reaches
/// `min(target, sum of sizes)` while every group is sampled.
fn allocate_quotas(sizes: &[usize], target: usize) -> Vec<usize> {
    let mut quotas = alloc::vec![0usize; sizes.len()];
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| sizes[i]);
    let mut remaining = target;
    for (rank, &i) in order.iter().enumerate() {
        let groups_left = order.len() - rank;
        let share = remaining.div_ceil(groups_left).max(1);
        quotas[i] = share.min(sizes[i]);
        remaining = remaining.saturating_sub(quotas[i]);
    }
    quotas
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-12 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// Compare analytic and central-difference gradients of the single-sample
/// loss on a deterministic parameter sample spanning every layer.
pub fn grad_check<T: Real>(
    net: &mut MultiScaleNet<T>,
    image: &FloatImage<T>,
    label: usize,
    config: &GradCheckConfig,
) -> Result<GradCheckReport, NetError> {
    let prepared = net.prepare(image);
    let batch = [(&prepared, label)];

    let mut analytic = alloc::vec![T::zero(); net.param_count()];
    net.batch_loss_and_grad(&batch, &mut analytic)?;

    let groups: Vec<_> = net.param_groups().to_vec();
    let quotas = allocate_quotas(
        &groups.iter().map(|g| g.len).collect::<Vec<_>>(),
        config.target_samples,
    );
    let h = cast::<T>(config.h);

    let mut layers = Vec::with_capacity(groups.len());
    let mut max_rel = 0.0f64;
    let mut checked_total = 0usize;

    for (gi, group) in groups.iter().enumerate() {
        let mut indices: Vec<usize> = (0..group.len).collect();
        indices.shuffle(&mut rng::stream(config.seed, &[0x6764_63, gi as u64]));
        indices.truncate(quotas[gi]);

        let mut layer = LayerCheck {
            name: group.name.clone(),
            checked: indices.len(),
            max_rel_error: 0.0,
            worst_param: group.offset,
            analytic: 0.0,
            numeric: 0.0,
        };
        for local in indices {
            let idx = group.offset + local;
            let original = net.params()[idx];
            net.params_mut()[idx] = original + h;
            let loss_plus = net.batch_loss(&batch)?;
            net.params_mut()[idx] = original - h;
            let loss_minus = net.batch_loss(&batch)?;
            net.params_mut()[idx] = original;

            let numeric =
                (loss_plus - loss_minus).to_f64().unwrap() / (2.0 * config.h);
            let ga = analytic[idx].to_f64().unwrap();
            let rel = relative_error(ga, numeric);
            if rel > layer.max_rel_error {
                layer.max_rel_error = rel;
                layer.worst_param = idx;
                layer.analytic = ga;
                layer.numeric = numeric;
            }
        }
        checked_total += layer.checked;
        max_rel = max_rel.max(layer.max_rel_error);
        layers.push(layer);
    }

    Ok(GradCheckReport {
        max_rel_error: max_rel,
        checked: checked_total,
        tolerance: config.tolerance,
        passed: max_rel < config.tolerance,
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::test_support::{test_image, tiny_config};
    use crate::net::{ConvBlock, MultiScaleNet, NetConfig, TrunkConfig};
    use alloc::vec;

    #[test]
    fn analytic_gradients_match_central_differences() {
        let mut net: MultiScaleNet<f64> =
            MultiScaleNet::new(tiny_config(3, vec![8, 6]), 3).unwrap();
        let img = test_image::<f64>(50, 8, 8);
        let report = grad_check(&mut net, &img, 1, &GradCheckConfig::default()).unwrap();
        assert!(report.checked >= 200 || report.checked == net.param_count());
        assert!(
            report.passed,
            "max rel error {:.3e}\n{report}",
            report.max_rel_error
        );
        // Every layer was sampled.
        assert_eq!(report.layers.len(), net.param_groups().len());
        for layer in &report.layers {
            assert!(layer.checked > 0, "layer {} unchecked", layer.name);
        }
    }

    #[test]
    fn params_are_restored_after_checking() {
        let mut net: MultiScaleNet<f64> =
            MultiScaleNet::new(tiny_config(3, vec![8]), 5).unwrap();
        let before = net.params().to_vec();
        let img = test_image::<f64>(51, 8, 8);
        grad_check(&mut net, &img, 0, &GradCheckConfig::default()).unwrap();
        assert_eq!(net.params(), &before[..]);
    }

    #[test]
    fn symmetric_parameters_receive_symmetric_gradients() {
        // One block with two output channels initialized identically, a
        // classifier that weights both feature channels identically, and a
        // constant image: the two filters must receive equal gradients.
        let config = NetConfig {
            trunk: TrunkConfig {
                blocks: vec![ConvBlock {
                    out_channels: 2,
                    stride: 1,
                    pool: true,
                }],
            },
            scales: vec![8],
            class_count: 2,
            avg_head: crate::net::AvgHeadMode::Logits,
            shared_classifier: true,
        };
        // block0.weight: 2 * 3 * 9 = 54, block0.bias: 2,
        // classifier.weight: 2 * 2 = 4, classifier.bias: 2.
        let kernel: Vec<f64> = (0..27).map(|i| 0.01 * (i as f64 - 13.0)).collect();
        let mut params = Vec::new();
        params.extend(&kernel);
        params.extend(&kernel);
        params.extend([0.05, 0.05]); // conv biases
        params.extend([0.3, 0.3, -0.2, -0.2]); // classifier rows weight both channels equally
        params.extend([0.0, 0.0]);
        let net: MultiScaleNet<f64> = MultiScaleNet::from_params(config, params).unwrap();

        let img = crate::mapping::FloatImage::constant(8, 8, 0.42f64);
        let prepared = net.prepare(&img);
        let mut grads = vec![0.0; net.param_count()];
        net.batch_loss_and_grad(&[(&prepared, 1)], &mut grads).unwrap();
        for i in 0..27 {
            assert!(
                (grads[i] - grads[27 + i]).abs() < 1e-9,
                "kernel grad asymmetry at {i}: {} vs {}",
                grads[i],
                grads[27 + i]
            );
        }
        assert!((grads[54] - grads[55]).abs() < 1e-9, "conv bias grads");
    }

    #[test]
    fn double_precision_beats_single_precision() {
        let config = tiny_config(3, vec![8]);
        let check = GradCheckConfig {
            target_samples: 60,
            ..GradCheckConfig::default()
        };

        let mut net64: MultiScaleNet<f64> = MultiScaleNet::new(config.clone(), 7).unwrap();
        let img64 = test_image::<f64>(52, 8, 8);
        let report64 = grad_check(&mut net64, &img64, 2, &check).unwrap();

        let mut net32: MultiScaleNet<f32> = MultiScaleNet::new(config, 7).unwrap();
        let img32 = test_image::<f32>(52, 8, 8);
        let report32 = grad_check(&mut net32, &img32, 2, &check).unwrap();

        assert!(
            report64.max_rel_error < report32.max_rel_error,
            "f64 {:.3e} vs f32 {:.3e}",
            report64.max_rel_error,
            report32.max_rel_error
        );
        assert!(report64.passed);
    }

    #[test]
    fn impossible_tolerance_fails() {
        let mut net: MultiScaleNet<f64> =
            MultiScaleNet::new(tiny_config(3, vec![8]), 9).unwrap();
        let img = test_image::<f64>(53, 8, 8);
        let config = GradCheckConfig {
            tolerance: 0.0,
            target_samples: 20,
            ..GradCheckConfig::default()
        };
        let report = grad_check(&mut net, &img, 0, &config).unwrap();
        assert!(!report.passed);
    }
}
