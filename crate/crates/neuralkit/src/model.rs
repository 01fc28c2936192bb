//! HeadingNet: two convolutional heads (body-frame inertial rows and
//! navigation-frame reference rows), a fusion head over their height-wise
//! concatenation, and a fully connected regressor to a single heading angle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::layers::{
    conv2d, conv2d_backward, dropout, dropout_backward, leaky_relu, leaky_relu_backward, linear, linear_backward,
    maxpool2d, maxpool2d_backward, tanh, tanh_backward,
};
use crate::rng::{keyed_rng, Purpose};
use crate::tensor::Tensor;
use crate::windows::NormStats;

/// The alignment times a HeadingNet can be built for, in seconds.
pub const VARIATIONS: [u32; 5] = [10, 30, 60, 90, 120];

/// Rows per head input: three gyro/frame-rate rows and three force/gravity rows.
pub const INPUT_ROWS: usize = 6;

/// Architecture of one HeadingNet variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadingNetConfig {
    /// Alignment time, s.
    pub t_align: u32,
    /// Input columns per head (aiding rate × alignment time).
    pub input_width: usize,
    /// Kernels (height, width) of the three per-head convolutions.
    pub head_kernels: [(usize, usize); 3],
    /// Channel progression of each head, `1 → 16 → 32 → 64`.
    pub head_channels: [usize; 4],
    /// Whether the third head convolution is followed by a (1×2) max pool.
    pub pool_after_third: bool,
    /// Kernels of the fusion convolutions (one or two layers).
    pub fusion_kernels: Vec<(usize, usize)>,
    pub fusion_channels: usize,
    pub leaky_alpha: f64,
    /// `[h_in, 512, 128, 32, 1]` with `h_in` the realized flatten size.
    pub fc_dims: [usize; 5],
    /// Flatten size listed for this variation in the reference hyperparameter table.
    pub reference_h_in: usize,
    pub dropout_p: f64,
    /// Rate-matching pool factor applied to the inertial rows when windows are built.
    pub avgpool_k: usize,
}

impl HeadingNetConfig {
    pub fn for_variation(t_align: u32) -> Result<Self> {
        let (head_kernels, fusion_kernels, pool_after_third, leaky_alpha, reference_h_in, dropout_p) = match t_align {
            10 => ([(2, 10), (2, 7), (2, 5)], vec![(3, 3)], false, 0.05, 512, 0.2),
            30 => ([(2, 30), (2, 22), (2, 15)], vec![(2, 3), (2, 3)], false, 0.05, 512, 0.2),
            60 => ([(2, 60), (2, 45), (2, 30)], vec![(2, 6), (2, 3)], false, 0.05, 1024, 0.2),
            90 => ([(2, 90), (2, 67), (2, 45)], vec![(2, 4), (2, 3)], true, 0.1, 512, 0.2),
            120 => ([(2, 120), (2, 90), (2, 60)], vec![(2, 5), (2, 3)], true, 0.05, 1024, 0.3),
            other => return Err(NnError::UnknownVariation(other)),
        };
        let mut cfg = HeadingNetConfig {
            t_align,
            input_width: 5 * t_align as usize,
            head_kernels,
            head_channels: [1, 16, 32, 64],
            pool_after_third,
            fusion_kernels,
            fusion_channels: 128,
            leaky_alpha,
            fc_dims: [0, 512, 128, 32, 1],
            reference_h_in,
            dropout_p,
            avgpool_k: 20,
        };
        cfg.fc_dims[0] = cfg.flatten_size()?;
        if cfg.fc_dims[0] != cfg.reference_h_in {
            log::warn!(
                "HeadingNet{t_align}: realized flatten size {} differs from the tabulated {}",
                cfg.fc_dims[0],
                cfg.reference_h_in
            );
        }
        Ok(cfg)
    }

    /// Shape `(C, H, W)` after each head, then after fusion; the product of
    /// the latter is the first FC layer's input size.
    pub fn flatten_size(&self) -> Result<usize> {
        let (c, h, w) = self.fusion_output_shape()?;
        Ok(c * h * w)
    }

    fn fusion_output_shape(&self) -> Result<(usize, usize, usize)> {
        let (mut h, mut w) = (INPUT_ROWS, self.input_width);
        for (i, &(kh, kw)) in self.head_kernels.iter().enumerate() {
            if kh > h || kw > w {
                return Err(NnError::Shape(format!(
                    "head conv{}: kernel {kh}x{kw} larger than {h}x{w} input",
                    i + 1
                )));
            }
            h -= kh - 1;
            w -= kw - 1;
            if i < 2 || self.pool_after_third {
                w /= 2;
            }
        }
        // Two heads stacked along the height axis.
        h *= 2;
        for (i, &(kh, kw)) in self.fusion_kernels.iter().enumerate() {
            if kh > h || kw > w {
                return Err(NnError::Shape(format!(
                    "fusion conv{}: kernel {kh}x{kw} larger than {h}x{w} input",
                    i + 1
                )));
            }
            h -= kh - 1;
            w -= kw - 1;
        }
        Ok((self.fusion_channels, h, w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Conv { w: usize, b: usize },
    Leaky,
    MaxPool,
    Linear { w: usize, b: usize },
    Tanh,
    Dropout,
}

#[derive(Debug, Clone)]
struct Layer {
    name: String,
    op: Op,
}

/// What a layer keeps from its forward pass for the backward pass.
#[derive(Debug, Clone)]
enum Saved {
    Input(Tensor),
    Output(Tensor),
    Argmax(Vec<usize>, Vec<usize>),
    Mask(Vec<f64>),
}

/// Named parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
}

/// A HeadingNet instance: parameters, layer graph, input statistics and mode.
#[derive(Debug, Clone)]
pub struct Model {
    config: HeadingNetConfig,
    params: Vec<Param>,
    head1: Vec<Layer>,
    head2: Vec<Layer>,
    trunk: Vec<Layer>,
    norm: Option<NormStats>,
    training: bool,
}

/// Per-sample record of one forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    head1: Vec<Saved>,
    head2: Vec<Saved>,
    trunk: Vec<Saved>,
    head_height: usize,
}

struct Builder {
    params: Vec<Param>,
}

impl Builder {
    fn param(&mut self, name: String, shape: Vec<usize>) -> usize {
        self.params.push(Param {
            name,
            value: Tensor::zeros(&shape),
        });
        self.params.len() - 1
    }

    fn conv(&mut self, layers: &mut Vec<Layer>, name: &str, cin: usize, cout: usize, k: (usize, usize)) {
        let w = self.param(format!("{name}.weight"), vec![cout, cin, k.0, k.1]);
        let b = self.param(format!("{name}.bias"), vec![cout]);
        layers.push(Layer {
            name: name.into(),
            op: Op::Conv { w, b },
        });
    }

    fn linear(&mut self, layers: &mut Vec<Layer>, name: &str, inp: usize, out: usize) {
        let w = self.param(format!("{name}.weight"), vec![out, inp]);
        let b = self.param(format!("{name}.bias"), vec![out]);
        layers.push(Layer {
            name: name.into(),
            op: Op::Linear { w, b },
        });
    }
}

fn plain(layers: &mut Vec<Layer>, name: String, op: Op) {
    layers.push(Layer { name, op });
}

/// Builds the network for `t_align` with He-uniform weights drawn from `seed`
/// and zero biases.
pub fn build_headingnet(t_align: u32, seed: u64) -> Result<(Model, HeadingNetConfig)> {
    let config = HeadingNetConfig::for_variation(t_align)?;
    let model = Model::from_config(config.clone(), seed)?;
    Ok((model, config))
}

impl Model {
    pub fn from_config(config: HeadingNetConfig, seed: u64) -> Result<Self> {
        let expected = config.flatten_size()?;
        if config.fc_dims[0] != expected {
            return Err(NnError::Shape(format!(
                "fc input {} does not match the flatten size {expected}",
                config.fc_dims[0]
            )));
        }
        let mut b = Builder { params: Vec::new() };
        let mut heads = [Vec::new(), Vec::new()];
        for (h, layers) in heads.iter_mut().enumerate() {
            let prefix = format!("head{}", h + 1);
            for (i, &k) in config.head_kernels.iter().enumerate() {
                let name = format!("{prefix}.conv{}", i + 1);
                b.conv(layers, &name, config.head_channels[i], config.head_channels[i + 1], k);
                plain(layers, format!("{name}.leaky"), Op::Leaky);
                if i < 2 || config.pool_after_third {
                    plain(layers, format!("{name}.pool"), Op::MaxPool);
                }
            }
        }
        let mut trunk = Vec::new();
        let mut cin = config.head_channels[3];
        for (i, &k) in config.fusion_kernels.iter().enumerate() {
            let name = format!("fusion.conv{}", i + 1);
            b.conv(&mut trunk, &name, cin, config.fusion_channels, k);
            plain(&mut trunk, format!("{name}.leaky"), Op::Leaky);
            cin = config.fusion_channels;
        }
        for i in 0..4 {
            let name = format!("fc{}", i + 1);
            b.linear(&mut trunk, &name, config.fc_dims[i], config.fc_dims[i + 1]);
            if i < 3 {
                plain(&mut trunk, format!("{name}.tanh"), Op::Tanh);
                plain(&mut trunk, format!("{name}.dropout"), Op::Dropout);
            }
        }
        let [head1, head2] = heads;
        let mut model = Model {
            config,
            params: b.params,
            head1,
            head2,
            trunk,
            norm: None,
            training: true,
        };
        model.init_params(seed);
        Ok(model)
    }

    fn init_params(&mut self, seed: u64) {
        for (i, p) in self.params.iter_mut().enumerate() {
            if p.name.ends_with(".bias") {
                p.value.data_mut().fill(0.0);
                continue;
            }
            let fan_in: usize = p.value.shape()[1..].iter().product();
            let bound = (6.0 / fan_in as f64).sqrt();
            let mut rng = keyed_rng(seed, 0, i as u64, Purpose::Init);
            for v in p.value.data_mut() {
                *v = rng.gen_range(-bound..bound);
            }
        }
    }

    pub fn config(&self) -> &HeadingNetConfig {
        &self.config
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Parameter values as one block per tensor, in manifest order.
    pub fn param_blocks(&self) -> Vec<Vec<f64>> {
        self.params.iter().map(|p| p.value.data().to_vec()).collect()
    }

    pub fn set_param_blocks(&mut self, blocks: Vec<Vec<f64>>) -> Result<()> {
        if blocks.len() != self.params.len() {
            return Err(NnError::Shape(format!(
                "{} parameter blocks for a model with {}",
                blocks.len(),
                self.params.len()
            )));
        }
        for (p, b) in self.params.iter_mut().zip(blocks) {
            p.value = Tensor::new(p.value.shape().to_vec(), b)
                .map_err(|e| NnError::Shape(format!("parameter {}: {e}", p.name)))?;
        }
        Ok(())
    }

    pub fn norm(&self) -> Option<&NormStats> {
        self.norm.as_ref()
    }

    pub fn set_norm(&mut self, norm: NormStats) {
        self.norm = Some(norm);
    }

    pub fn is_training(&self) -> bool {
        self.training
    }

    pub fn train_mode(&mut self) {
        self.training = true;
    }

    pub fn eval_mode(&mut self) {
        self.training = false;
    }

    fn tensor(&self, idx: usize) -> &Tensor {
        &self.params[idx].value
    }

    fn run(&self, layers: &[Layer], mut x: Tensor, rng: &mut ChaCha8Rng, saved: &mut Vec<Saved>) -> Result<Tensor> {
        for layer in layers {
            let y = match layer.op {
                Op::Conv { w, b } => {
                    let y = conv2d(&x, self.tensor(w), self.tensor(b))
                        .map_err(|e| NnError::Shape(format!("layer {}: {e}", layer.name)))?;
                    saved.push(Saved::Input(x));
                    y
                }
                Op::Linear { w, b } => {
                    let y = linear(&x, self.tensor(w), self.tensor(b))
                        .map_err(|e| NnError::Shape(format!("layer {}: {e}", layer.name)))?;
                    saved.push(Saved::Input(x));
                    y
                }
                Op::Leaky => {
                    let y = leaky_relu(&x, self.config.leaky_alpha);
                    saved.push(Saved::Input(x));
                    y
                }
                Op::MaxPool => {
                    let (y, arg) = maxpool2d(&x).map_err(|e| NnError::Shape(format!("layer {}: {e}", layer.name)))?;
                    saved.push(Saved::Argmax(arg, x.shape().to_vec()));
                    y
                }
                Op::Tanh => {
                    let y = tanh(&x);
                    saved.push(Saved::Output(y.clone()));
                    y
                }
                Op::Dropout => {
                    let (y, mask) = dropout(&x, self.config.dropout_p, self.training, rng)?;
                    saved.push(Saved::Mask(mask));
                    y
                }
            };
            if !y.all_finite() {
                return Err(NnError::NonFinite {
                    epoch: 0,
                    batch: 0,
                    layer: layer.name.clone(),
                    loss: f64::NAN,
                });
            }
            x = y;
        }
        Ok(x)
    }

    fn run_backward(&self, layers: &[Layer], saved: &[Saved], mut dy: Tensor, grads: &mut [Vec<f64>]) -> Result<Tensor> {
        for (layer, s) in layers.iter().zip(saved).rev() {
            dy = match (layer.op, s) {
                (Op::Conv { w, b }, Saved::Input(x)) => {
                    let g = conv2d_backward(x, self.tensor(w), &dy)?;
                    add_into(&mut grads[w], g.dw.data());
                    add_into(&mut grads[b], g.db.data());
                    g.dx
                }
                (Op::Linear { w, b }, Saved::Input(x)) => {
                    let g = linear_backward(x, self.tensor(w), &dy)?;
                    add_into(&mut grads[w], g.dw.data());
                    add_into(&mut grads[b], g.db.data());
                    g.dx
                }
                (Op::Leaky, Saved::Input(x)) => leaky_relu_backward(x, &dy, self.config.leaky_alpha),
                (Op::MaxPool, Saved::Argmax(arg, shape)) => maxpool2d_backward(&dy, arg, shape)?,
                (Op::Tanh, Saved::Output(y)) => tanh_backward(y, &dy),
                (Op::Dropout, Saved::Mask(mask)) => dropout_backward(&dy, mask),
                _ => unreachable!("tape does not match layer {}", layer.name),
            };
        }
        Ok(dy)
    }

    fn check_input(&self, x: &Tensor, which: &str) -> Result<()> {
        let want = [INPUT_ROWS, self.config.input_width];
        if x.shape() != want {
            return Err(NnError::Shape(format!(
                "{which} input must be {want:?} for HeadingNet{}, got {:?}",
                self.config.t_align,
                x.shape()
            )));
        }
        Ok(())
    }

    /// Raw network output (radians, unwrapped) for one window, plus the tape
    /// needed by [`Model::backward`]. `rng` drives dropout in training mode.
    pub fn forward(&self, head1: &Tensor, head2: &Tensor, rng: &mut ChaCha8Rng) -> Result<(f64, Tape)> {
        self.check_input(head1, "head 1")?;
        self.check_input(head2, "head 2")?;
        let shape = [1, INPUT_ROWS, self.config.input_width];
        let mut tape = Tape {
            head1: Vec::with_capacity(self.head1.len()),
            head2: Vec::with_capacity(self.head2.len()),
            trunk: Vec::with_capacity(self.trunk.len()),
            head_height: 0,
        };
        let a = self.run(&self.head1, head1.clone().reshape(&shape)?, rng, &mut tape.head1)?;
        let b = self.run(&self.head2, head2.clone().reshape(&shape)?, rng, &mut tape.head2)?;
        let (c, h, w) = a.chw()?;
        tape.head_height = h;
        let fused = concat_height(&a, &b, c, h, w)?;
        let out = self.run(&self.trunk, fused, rng, &mut tape.trunk)?;
        Ok((out.data()[0], tape))
    }

    /// Accumulates `∂L/∂θ` into `grads` given `∂L/∂output`.
    pub fn backward(&self, tape: &Tape, d_out: f64, grads: &mut [Vec<f64>]) -> Result<()> {
        let d = self.run_backward(&self.trunk, &tape.trunk, Tensor::vector(vec![d_out]), grads)?;
        let (c, h2, w) = d.chw()?;
        let h = tape.head_height;
        debug_assert_eq!(h2, 2 * h);
        let (da, db) = split_height(&d, c, h, w)?;
        self.run_backward(&self.head1, &tape.head1, da, grads)?;
        self.run_backward(&self.head2, &tape.head2, db, grads)?;
        Ok(())
    }

    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.params.iter().map(|p| vec![0.0; p.value.len()]).collect()
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Stacks two `(C, H, W)` maps into `(C, 2H, W)`, first map on top.
fn concat_height(a: &Tensor, b: &Tensor, c: usize, h: usize, w: usize) -> Result<Tensor> {
    if b.shape() != [c, h, w] {
        return Err(NnError::Shape(format!("head outputs differ: {:?} vs {:?}", a.shape(), b.shape())));
    }
    let plane = h * w;
    let mut out = Vec::with_capacity(2 * c * plane);
    for ch in 0..c {
        out.extend_from_slice(&a.data()[ch * plane..(ch + 1) * plane]);
        out.extend_from_slice(&b.data()[ch * plane..(ch + 1) * plane]);
    }
    Tensor::new(vec![c, 2 * h, w], out)
}

fn split_height(d: &Tensor, c: usize, h: usize, w: usize) -> Result<(Tensor, Tensor)> {
    let plane = h * w;
    let mut a = Vec::with_capacity(c * plane);
    let mut b = Vec::with_capacity(c * plane);
    for ch in 0..c {
        let base = ch * 2 * plane;
        a.extend_from_slice(&d.data()[base..base + plane]);
        b.extend_from_slice(&d.data()[base + plane..base + 2 * plane]);
    }
    Ok((Tensor::new(vec![c, h, w], a)?, Tensor::new(vec![c, h, w], b)?))
}

/// A throwaway generator for callers that run in evaluation mode.
pub fn eval_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_sizes_match_reference_table() {
        for t in VARIATIONS {
            let cfg = HeadingNetConfig::for_variation(t).unwrap();
            assert_eq!(cfg.fc_dims[0], cfg.reference_h_in, "variation {t}");
        }
    }

    #[test]
    fn table_kernels() {
        let c10 = HeadingNetConfig::for_variation(10).unwrap();
        assert_eq!(c10.head_kernels[0], (2, 10));
        assert_eq!(c10.head_channels[..2], [1, 16]);
        assert_eq!(c10.fusion_kernels, [(3, 3)]);
        let c120 = HeadingNetConfig::for_variation(120).unwrap();
        assert_eq!(c120.head_kernels[2], (2, 60));
        assert!(c120.pool_after_third);
        assert_eq!(c120.fusion_kernels.len(), 2);
        assert_eq!(HeadingNetConfig::for_variation(90).unwrap().leaky_alpha, 0.1);
        assert!(matches!(HeadingNetConfig::for_variation(45), Err(NnError::UnknownVariation(45))));
    }

    #[test]
    fn same_seed_same_parameters() {
        let (a, _) = build_headingnet(10, 3).unwrap();
        let (b, _) = build_headingnet(10, 3).unwrap();
        let (c, _) = build_headingnet(10, 4).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn weights_within_he_bound_and_biases_zero() {
        let (m, _) = build_headingnet(30, 1).unwrap();
        for p in m.params() {
            if p.name.ends_with(".bias") {
                assert!(p.value.data().iter().all(|&v| v == 0.0));
            } else {
                let bound = (6.0 / p.value.shape()[1..].iter().product::<usize>() as f64).sqrt();
                assert!(p.value.data().iter().all(|v| v.abs() < bound), "{}", p.name);
            }
        }
    }

    #[test]
    fn wrong_input_shape_is_rejected() {
        let (m, _) = build_headingnet(10, 0).unwrap();
        let bad = Tensor::zeros(&[6, 49]);
        let good = Tensor::zeros(&[6, 50]);
        assert!(matches!(m.forward(&bad, &good, &mut eval_rng()), Err(NnError::Shape(_))));
    }

    #[test]
    fn concat_split_round_trip() {
        let a = Tensor::from_fn(&[2, 3, 4], |i| i as f64);
        let b = Tensor::from_fn(&[2, 3, 4], |i| -(i as f64));
        let ab = concat_height(&a, &b, 2, 3, 4).unwrap();
        assert_eq!(ab.shape(), [2, 6, 4]);
        assert_eq!(ab.data()[12], 0.0);
        assert_eq!(ab.data()[13], -1.0);
        let (a2, b2) = split_height(&ab, 2, 3, 4).unwrap();
        assert_eq!((a2, b2), (a, b));
    }
}
