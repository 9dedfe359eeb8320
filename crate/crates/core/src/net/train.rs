//! SGD training with momentum, weight decay, and the step learning-rate
//! schedule.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{cast, MultiScaleNet, NetError, PreparedImage, Real};
use crate::mapping::FloatImage;
use crate::rng;

const TAG_SHUFFLE: u64 = 0x7368_7566;

/// Step schedule: a fixed rate for the first `constant_epochs`, then divided
/// by `decay_factor` every `decay_every` epochs.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LrSchedule {
    pub base: f64,
    pub constant_epochs: usize,
    pub decay_every: usize,
    pub decay_factor: f64,
}

impl LrSchedule {
    /// 0.001 for the first 8 epochs, then divided by 10 every 5 epochs.
    pub fn step_default() -> Self {
        LrSchedule {
            base: 0.001,
            constant_epochs: 8,
            decay_every: 5,
            decay_factor: 10.0,
        }
    }

    /// Learning rate for a 0-based epoch index.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if epoch < self.constant_epochs {
            self.base
        } else {
            let steps = 1 + (epoch - self.constant_epochs) / self.decay_every;
            self.base / libm::pow(self.decay_factor, steps as f64)
        }
    }
}

/// Momentum-SGD hyperparameters.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerConfig {
    pub schedule: LrSchedule,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl OptimizerConfig {
    /// Momentum 0.9, weight decay 0.0004, step schedule.
    pub fn sgd_default() -> Self {
        OptimizerConfig {
            schedule: LrSchedule::step_default(),
            momentum: 0.9,
            weight_decay: 0.0004,
        }
    }
}

/// Mutable optimizer state: velocity buffers and the epoch counter, both
/// persisted in checkpoints so training can resume exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<T> {
    pub config: OptimizerConfig,
    pub velocity: Vec<T>,
    pub epochs_done: usize,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(config: OptimizerConfig, param_count: usize) -> Self {
        OptimizerState {
            config,
            velocity: alloc::vec![T::zero(); param_count],
            epochs_done: 0,
        }
    }

    /// v <- momentum * v - lr * (g + weight_decay * theta); theta <- theta + v.
    pub fn step(&mut self, params: &mut [T], grads: &[T], lr: f64) {
        let momentum = cast::<T>(self.config.momentum);
        let wd = cast::<T>(self.config.weight_decay);
        let lr = cast::<T>(lr);
        for ((v, p), &g) in self.velocity.iter_mut().zip(params.iter_mut()).zip(grads) {
            *v = momentum * *v - lr * (g + wd * *p);
            *p = *p + *v;
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

/// One row of training metrics; `epoch` is 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub eval_accuracy: Option<f64>,
}

/// Train in place from `state.epochs_done` up to `options.epochs`.
///
/// Each epoch shuffles with a stream derived from (seed, epoch), so resuming
/// from a checkpoint replays exactly the batches a straight run would see.
/// Loss and accuracy are accumulated from the training batches themselves;
/// eval accuracy is measured after each epoch when an eval set is given.
pub fn train<T: Real>(
    net: &mut MultiScaleNet<T>,
    state: &mut OptimizerState<T>,
    train_set: &[(FloatImage<T>, usize)],
    eval_set: Option<&[(FloatImage<T>, usize)]>,
    options: &TrainOptions,
) -> Result<Vec<EpochMetrics>, NetError> {
    if train_set.is_empty() {
        return Err(NetError::EmptyTrainingSet);
    }
    if options.batch_size == 0 {
        return Err(NetError::EmptyBatch);
    }
    assert_eq!(state.velocity.len(), net.param_count(), "optimizer size");

    let prepared: Vec<(PreparedImage<T>, usize)> = train_set
        .iter()
        .map(|(img, label)| (net.prepare(img), *label))
        .collect();
    let eval_prepared: Option<Vec<(PreparedImage<T>, usize)>> = eval_set.map(|set| {
        set.iter()
            .map(|(img, label)| (net.prepare(img), *label))
            .collect()
    });

    let mut metrics = Vec::new();
    let mut grads = alloc::vec![T::zero(); net.param_count()];

    for epoch in state.epochs_done..options.epochs {
        let lr = state.config.schedule.lr_at(epoch);
        // The visit order must be a pure function of (seed, epoch) so that a
        // resumed run replays a straight run exactly.
        let mut order: Vec<usize> = (0..prepared.len()).collect();
        order.shuffle(&mut rng::stream(options.seed, &[TAG_SHUFFLE, epoch as u64]));

        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for (batch_index, chunk) in order.chunks(options.batch_size).enumerate() {
            let batch: Vec<(&PreparedImage<T>, usize)> =
                chunk.iter().map(|&i| (&prepared[i].0, prepared[i].1)).collect();
            grads.fill(T::zero());
            let stats = match net.batch_loss_and_grad(&batch, &mut grads) {
                Ok(stats) => stats,
                Err(NetError::NonFiniteLoss) => {
                    return Err(NetError::Diverged {
                        epoch: epoch + 1,
                        batch: batch_index,
                    })
                }
                Err(e) => return Err(e),
            };
            state.step(net.params_mut(), &grads, lr);
            loss_sum += stats.loss.to_f64().unwrap() * batch.len() as f64;
            correct += stats.correct;
        }

        let eval_accuracy = eval_prepared.as_ref().map(|set| {
            let hits = set
                .iter()
                .filter(|(img, label)| net.predict_prepared(img).class == *label)
                .count();
            hits as f64 / set.len() as f64
        });

        state.epochs_done = epoch + 1;
        metrics.push(EpochMetrics {
            epoch: epoch + 1,
            lr,
            train_loss: loss_sum / prepared.len() as f64,
            train_accuracy: correct as f64 / prepared.len() as f64,
            eval_accuracy,
        });
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::test_support::{test_image, tiny_config};
    use crate::net::NetConfig;
    use alloc::vec;

    fn tiny_net(seed: u64) -> crate::net::MultiScaleNet<f64> {
        crate::net::MultiScaleNet::new(tiny_config(3, vec![8, 6]), seed).unwrap()
    }

    fn tiny_set(count: usize) -> Vec<(crate::mapping::FloatImage<f64>, usize)> {
        (0..count)
            .map(|i| {
                // Class-dependent brightness makes the set trivially learnable.
                let img = test_image::<f64>(1000 + i as u64, 10, 10);
                let label = i % 3;
                let shifted = crate::mapping::FloatImage::new(
                    10,
                    10,
                    img.data()
                        .iter()
                        .map(|v| (v * 0.2 + 0.3 * label as f64).min(1.0))
                        .collect(),
                );
                (shifted, label)
            })
            .collect()
    }

    #[test]
    fn schedule_matches_stated_table() {
        let s = LrSchedule::step_default();
        // 1-based epochs 1-8 hold 1e-3, 9-13 hold 1e-4, 14-18 hold 1e-5.
        for e in 0..8 {
            assert_eq!(s.lr_at(e), 0.001);
        }
        for e in 8..13 {
            assert!((s.lr_at(e) - 1e-4).abs() < 1e-18, "epoch {e}");
        }
        for e in 13..18 {
            assert!((s.lr_at(e) - 1e-5).abs() < 1e-19, "epoch {e}");
        }
        // Monotone non-increasing.
        for e in 1..40 {
            assert!(s.lr_at(e) <= s.lr_at(e - 1));
        }
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_unchanged() {
        let mut net = tiny_net(1);
        let before = net.params().to_vec();
        let mut state = OptimizerState::new(
            OptimizerConfig {
                schedule: LrSchedule {
                    base: 0.0,
                    ..LrSchedule::step_default()
                },
                ..OptimizerConfig::sgd_default()
            },
            net.param_count(),
        );
        let set = tiny_set(9);
        train(
            &mut net,
            &mut state,
            &set,
            None,
            &TrainOptions {
                epochs: 2,
                batch_size: 4,
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!(net.params(), &before[..]);
    }

    #[test]
    fn training_is_bit_deterministic_for_fixed_seed() {
        let run = || {
            let mut net = tiny_net(7);
            let mut state =
                OptimizerState::new(OptimizerConfig::sgd_default(), net.param_count());
            let set = tiny_set(12);
            let metrics = train(
                &mut net,
                &mut state,
                &set,
                None,
                &TrainOptions {
                    epochs: 3,
                    batch_size: 4,
                    seed: 11,
                },
            )
            .unwrap();
            (net.params().to_vec(), metrics)
        };
        let (params_a, metrics_a) = run();
        let (params_b, metrics_b) = run();
        assert_eq!(params_a, params_b);
        assert_eq!(metrics_a, metrics_b);
    }

    #[test]
    fn resumed_training_matches_straight_run_bit_exactly() {
        let set = tiny_set(12);
        let options = |epochs| TrainOptions {
            epochs,
            batch_size: 4,
            seed: 13,
        };

        let mut straight = tiny_net(9);
        let mut straight_state =
            OptimizerState::new(OptimizerConfig::sgd_default(), straight.param_count());
        train(&mut straight, &mut straight_state, &set, None, &options(4)).unwrap();

        let mut resumed = tiny_net(9);
        let mut resumed_state =
            OptimizerState::new(OptimizerConfig::sgd_default(), resumed.param_count());
        train(&mut resumed, &mut resumed_state, &set, None, &options(3)).unwrap();
        assert_eq!(resumed_state.epochs_done, 3);
        train(&mut resumed, &mut resumed_state, &set, None, &options(4)).unwrap();

        assert_eq!(straight.params(), resumed.params());
        assert_eq!(straight_state.velocity, resumed_state.velocity);
    }

    #[test]
    fn loss_decreases_over_first_epochs_on_learnable_data() {
        let mut net = tiny_net(21);
        let mut state = OptimizerState::new(
            OptimizerConfig {
                schedule: LrSchedule {
                    base: 0.05,
                    ..LrSchedule::step_default()
                },
                ..OptimizerConfig::sgd_default()
            },
            net.param_count(),
        );
        let set = tiny_set(30);
        let metrics = train(
            &mut net,
            &mut state,
            &set,
            None,
            &TrainOptions {
                epochs: 5,
                batch_size: 8,
                seed: 17,
            },
        )
        .unwrap();
        for pair in metrics.windows(2) {
            assert!(
                pair[1].train_loss < pair[0].train_loss,
                "loss must strictly decrease: {:?}",
                metrics.iter().map(|m| m.train_loss).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn weight_decay_alone_shrinks_weight_norm_monotonically() {
        // A zero image silences every gradient except the classifier bias
        // (ReLU gates are closed), so the remaining parameters only feel
        // weight decay.
        let mut net = tiny_net(23);
        let zero_img = crate::mapping::FloatImage::constant(8, 8, 0.0f64);
        let prepared = net.prepare(&zero_img);
        let mut state = OptimizerState::new(
            OptimizerConfig {
                schedule: LrSchedule {
                    base: 0.01,
                    ..LrSchedule::step_default()
                },
                momentum: 0.9,
                weight_decay: 0.01,
            },
            net.param_count(),
        );
        let bias_group = net
            .param_groups()
            .iter()
            .position(|g| g.name == "classifier.bias")
            .unwrap();
        let bias_range = {
            let g = &net.param_groups()[bias_group];
            g.offset..g.offset + g.len
        };
        let norm_excl_bias = |params: &[f64]| -> f64 {
            params
                .iter()
                .enumerate()
                .filter(|(i, _)| !bias_range.contains(i))
                .map(|(_, v)| v * v)
                .sum::<f64>()
                .sqrt()
        };
        let mut grads = vec![0.0; net.param_count()];
        let mut last = norm_excl_bias(net.params());
        for _ in 0..10 {
            grads.fill(0.0);
            net.batch_loss_and_grad(&[(&prepared, 0)], &mut grads).unwrap();
            // All non-bias gradients must be exactly zero.
            for (i, g) in grads.iter().enumerate() {
                if !bias_range.contains(&i) {
                    assert_eq!(*g, 0.0, "param {i} should see no gradient");
                }
            }
            state.step(net.params_mut(), &grads, 0.01);
            let now = norm_excl_bias(net.params());
            assert!(now < last, "norm must shrink: {now} !< {last}");
            last = now;
        }
    }

    #[test]
    fn divergence_aborts_with_diagnostic() {
        let mut net = tiny_net(29);
        let mut state = OptimizerState::new(
            OptimizerConfig {
                schedule: LrSchedule {
                    base: 1e18,
                    ..LrSchedule::step_default()
                },
                ..OptimizerConfig::sgd_default()
            },
            net.param_count(),
        );
        let set = tiny_set(8);
        let result = train(
            &mut net,
            &mut state,
            &set,
            None,
            &TrainOptions {
                epochs: 5,
                batch_size: 4,
                seed: 31,
            },
        );
        assert!(matches!(result, Err(NetError::Diverged { .. })));
    }

    #[test]
    fn eval_accuracy_is_reported_when_eval_set_given() {
        let mut net = tiny_net(37);
        let mut state = OptimizerState::new(OptimizerConfig::sgd_default(), net.param_count());
        let set = tiny_set(9);
        let metrics = train(
            &mut net,
            &mut state,
            &set,
            Some(&set),
            &TrainOptions {
                epochs: 1,
                batch_size: 4,
                seed: 41,
            },
        )
        .unwrap();
        assert_eq!(metrics.len(), 1);
        let acc = metrics[0].eval_accuracy.unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }

    #[test]
    fn desk_default_config_round_trips_through_validation() {
        assert!(NetConfig::desk_default(5).validate().is_ok());
    }
}
