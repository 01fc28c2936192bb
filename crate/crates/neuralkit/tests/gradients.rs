//! Analytic backward passes against central finite differences.
//!
//! Each check contracts a layer's output with a fixed random vector `r`, so the
//! scalar `L = Σ r·y` has `∂L/∂y = r`, and compares the backward pass fed `r`
//! with `(L(x+h) − L(x−h)) / 2h` for every input and parameter entry.

use neuralkit::layers::*;
use neuralkit::loss::cmse_loss;
use neuralkit::model::{build_headingnet, INPUT_ROWS};
use neuralkit::rng::{keyed_rng, Purpose};
use neuralkit::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::from_fn(shape, |_| rng.gen_range(-1.0..1.0))
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-12 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// Max relative error of `analytic` against finite differences of `f` over
/// every entry of `x`.
fn fd_max_rel(x: &Tensor, analytic: &Tensor, f: impl Fn(&Tensor) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut xp = x.clone();
        xp.data_mut()[i] += H;
        let mut xm = x.clone();
        xm.data_mut()[i] -= H;
        let numeric = (f(&xp) - f(&xm)) / (2.0 * H);
        worst = worst.max(rel_err(analytic.data()[i], numeric));
    }
    worst
}

#[test]
fn conv2d_gradients() {
    for seed in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&[2, 5, 9], &mut rng);
        let w = random(&[3, 2, 2, 4], &mut rng);
        let b = random(&[3], &mut rng);
        let r = random(&[3, 4, 6], &mut rng);
        let g = conv2d_backward(&x, &w, &r).unwrap();
        let ex = fd_max_rel(&x, &g.dx, |x| dot(&conv2d(x, &w, &b).unwrap(), &r));
        let ew = fd_max_rel(&w, &g.dw, |w| dot(&conv2d(&x, w, &b).unwrap(), &r));
        let eb = fd_max_rel(&b, &g.db, |b| dot(&conv2d(&x, &w, b).unwrap(), &r));
        assert!(ex.max(ew).max(eb) < 1e-6, "seed {seed}: dx {ex:e} dw {ew:e} db {eb:e}");
    }
}

#[test]
fn linear_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random(&[7], &mut rng);
    let w = random(&[4, 7], &mut rng);
    let b = random(&[4], &mut rng);
    let r = random(&[4], &mut rng);
    let g = linear_backward(&x, &w, &r).unwrap();
    let ex = fd_max_rel(&x, &g.dx, |x| dot(&linear(x, &w, &b).unwrap(), &r));
    let ew = fd_max_rel(&w, &g.dw, |w| dot(&linear(&x, w, &b).unwrap(), &r));
    let eb = fd_max_rel(&b, &g.db, |b| dot(&linear(&x, &w, b).unwrap(), &r));
    assert!(ex.max(ew).max(eb) < 1e-6, "dx {ex:e} dw {ew:e} db {eb:e}");
}

#[test]
fn tanh_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = Tensor::from_fn(&[40], |_| rng.gen_range(-3.0..3.0));
    let r = random(&[40], &mut rng);
    let dx = tanh_backward(&tanh(&x), &r);
    let e = fd_max_rel(&x, &dx, |x| dot(&tanh(x), &r));
    assert!(e < 1e-6, "{e:e}");
}

#[test]
fn leaky_relu_gradient() {
    for alpha in [0.05, 0.1] {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // Keep every point well clear of the kink.
        let x = Tensor::from_fn(&[2, 3, 8], |_| {
            let v: f64 = rng.gen_range(0.01..2.0);
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        });
        let r = random(&[2, 3, 8], &mut rng);
        let dx = leaky_relu_backward(&x, &r, alpha);
        let e = fd_max_rel(&x, &dx, |x| dot(&leaky_relu(x, alpha), &r));
        assert!(e < 1e-4, "alpha {alpha}: {e:e}");
    }
}

#[test]
fn maxpool_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    // Distinct values so no pair is within the step of a tie.
    let mut vals: Vec<f64> = (0..2 * 3 * 9).map(|i| i as f64 * 0.1).collect();
    for i in (1..vals.len()).rev() {
        vals.swap(i, rng.gen_range(0..=i));
    }
    let x = Tensor::new(vec![2, 3, 9], vals).unwrap();
    let r = random(&[2, 3, 4], &mut rng);
    let (_, arg) = maxpool2d(&x).unwrap();
    let dx = maxpool2d_backward(&r, &arg, x.shape()).unwrap();
    let e = fd_max_rel(&x, &dx, |x| dot(&maxpool2d(x).unwrap().0, &r));
    assert!(e < 1e-4, "{e:e}");
}

#[test]
fn dropout_gradient_with_fixed_mask() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let x = random(&[64], &mut rng);
    let r = random(&[64], &mut rng);
    let (_, mask) = dropout(&x, 0.3, true, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
    let dx = dropout_backward(&r, &mask);
    let e = fd_max_rel(&x, &dx, |x| {
        dot(&dropout(x, 0.3, true, &mut ChaCha8Rng::seed_from_u64(99)).unwrap().0, &r)
    });
    assert!(e < 1e-6, "{e:e}");
}

#[test]
fn cmse_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let target: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let pred: Vec<f64> = target.iter().map(|t| t + rng.gen_range(-2.5..2.5)).collect();
    let (_, g) = cmse_loss(&pred, &target, 10.0).unwrap();
    for i in 0..pred.len() {
        let mut p = pred.clone();
        p[i] += H;
        let lp = cmse_loss(&p, &target, 10.0).unwrap().0;
        p[i] -= 2.0 * H;
        let lm = cmse_loss(&p, &target, 10.0).unwrap().0;
        let e = rel_err(g[i], (lp - lm) / (2.0 * H));
        assert!(e < 1e-6, "entry {i}: {e:e}");
    }
}

/// Whole-network check: loss of one window through HeadingNet10 in training
/// mode (dropout mask pinned by the generator key) against 25 parameters
/// picked at random across all tensors.
#[test]
fn headingnet10_end_to_end() {
    let (mut model, cfg) = build_headingnet(10, 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let shape = [INPUT_ROWS, cfg.input_width];
    let head1 = Tensor::from_fn(&shape, |_| rng.gen_range(-1.5..1.5));
    let head2 = Tensor::from_fn(&shape, |_| rng.gen_range(-1.5..1.5));
    let label = 0.4;
    let loss = |m: &neuralkit::Model| {
        let (y, _) = m.forward(&head1, &head2, &mut keyed_rng(5, 0, 0, Purpose::Dropout)).unwrap();
        cmse_loss(&[y], &[label], 10.0).unwrap().0
    };

    let (y, tape) = model.forward(&head1, &head2, &mut keyed_rng(5, 0, 0, Purpose::Dropout)).unwrap();
    let (_, d) = cmse_loss(&[y], &[label], 10.0).unwrap();
    let mut grads = model.zero_grads();
    model.backward(&tape, d[0], &mut grads).unwrap();

    let mut picks = 0;
    let mut tries = 0;
    while picks < 25 {
        tries += 1;
        assert!(tries < 1000, "too many probes landed on inactive parameters");
        let pi = rng.gen_range(0..model.params().len());
        let k = rng.gen_range(0..model.params()[pi].value.len());
        let analytic = grads[pi][k];
        let orig = model.params()[pi].value.data()[k];
        model.params_mut()[pi].value.data_mut()[k] = orig + H;
        let lp = loss(&model);
        model.params_mut()[pi].value.data_mut()[k] = orig - H;
        let lm = loss(&model);
        model.params_mut()[pi].value.data_mut()[k] = orig;
        let numeric = (lp - lm) / (2.0 * H);
        // Parameters behind a dropped unit have exactly zero gradient; they
        // say nothing about the backward pass, so probe another one.
        if analytic == 0.0 && numeric.abs() < 1e-12 {
            continue;
        }
        let e = rel_err(analytic, numeric);
        assert!(e < 1e-3, "{}[{k}]: analytic {analytic:e} numeric {numeric:e}", model.params()[pi].name);
        picks += 1;
    }
}
