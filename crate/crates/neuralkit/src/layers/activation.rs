use crate::tensor::Tensor;

/// `x` for positive inputs, `α·x` otherwise.
pub fn leaky_relu(x: &Tensor, alpha: f64) -> Tensor {
    let mut y = x.clone();
    for v in y.data_mut() {
        if *v <= 0.0 {
            *v *= alpha;
        }
    }
    y
}

/// Slope 1 where the forward input was positive, `α` elsewhere.
pub fn leaky_relu_backward(x: &Tensor, dy: &Tensor, alpha: f64) -> Tensor {
    let mut dx = dy.clone();
    for (d, &xi) in dx.data_mut().iter_mut().zip(x.data()) {
        if xi <= 0.0 {
            *d *= alpha;
        }
    }
    dx
}

pub fn tanh(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    for v in y.data_mut() {
        *v = v.tanh();
    }
    y
}

/// Takes the forward *output* `y = tanh(x)`: `dx = (1 − y²)·dy`.
pub fn tanh_backward(y: &Tensor, dy: &Tensor) -> Tensor {
    let mut dx = dy.clone();
    for (d, &yi) in dx.data_mut().iter_mut().zip(y.data()) {
        *d *= 1.0 - yi * yi;
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaky_values() {
        let x = Tensor::vector(vec![-2.0, 0.0, 3.0]);
        assert_eq!(leaky_relu(&x, 0.05).data(), [-0.1, 0.0, 3.0]);
        let dx = leaky_relu_backward(&x, &Tensor::filled(&[3], 1.0), 0.05);
        assert_eq!(dx.data(), [0.05, 0.05, 1.0]);
    }

    #[test]
    fn tanh_values() {
        let y = tanh(&Tensor::vector(vec![0.0, 1.0]));
        assert_eq!(y.data()[0], 0.0);
        assert_eq!(y.data()[1], 1f64.tanh());
        let dx = tanh_backward(&y, &Tensor::filled(&[2], 2.0));
        assert_eq!(dx.data()[0], 2.0);
    }
}
