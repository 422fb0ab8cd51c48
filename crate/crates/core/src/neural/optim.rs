use serde::{Deserialize, Serialize};

use super::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

/// Gradient-descent step on a flat parameter vector.
pub trait Optimizer<F: Scalar> {
    /// Moves `params` against `grads`.
    fn step(&mut self, params: &mut [F], grads: &[F]);
}

#[derive(Debug, Clone)]
pub struct Sgd {
    pub lr: f64,
}

impl<F: Scalar> Optimizer<F> for Sgd {
    fn step(&mut self, params: &mut [F], grads: &[F]) {
        let lr = F::from_f64(self.lr);
        for (p, &g) in params.iter_mut().zip(grads) {
            *p -= lr * g;
        }
    }
}

/// Adam with the usual bias correction.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<F>,
    v: Vec<F>,
    t: i32,
}

impl<F: Scalar> Adam<F> {
    pub fn new(lr: f64, len: usize) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![F::zero(); len], v: vec![F::zero(); len], t: 0 }
    }

    pub fn steps_taken(&self) -> i32 {
        self.t
    }
}

impl<F: Scalar> Optimizer<F> for Adam<F> {
    fn step(&mut self, params: &mut [F], grads: &[F]) {
        self.t += 1;
        let (b1, b2) = (F::from_f64(self.beta1), F::from_f64(self.beta2));
        let one = F::one();
        let step = F::from_f64(self.lr * (1.0 - self.beta2.powi(self.t)).sqrt() / (1.0 - self.beta1.powi(self.t)));
        let eps = F::from_f64(self.eps);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            *p -= step * *m / (v.sqrt() + eps);
        }
    }
}

/// Either optimizer behind one type.
#[derive(Debug, Clone)]
pub enum AnyOptimizer<F> {
    Adam(Adam<F>),
    Sgd(Sgd),
}

impl<F: Scalar> AnyOptimizer<F> {
    pub fn new(kind: OptimizerKind, lr: f64, len: usize) -> Self {
        match kind {
            OptimizerKind::Adam => Self::Adam(Adam::new(lr, len)),
            OptimizerKind::Sgd => Self::Sgd(Sgd { lr }),
        }
    }
}

impl<F: Scalar> Optimizer<F> for AnyOptimizer<F> {
    fn step(&mut self, params: &mut [F], grads: &[F]) {
        match self {
            Self::Adam(a) => a.step(params, grads),
            Self::Sgd(s) => s.step(params, grads),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = vec![3.0f64, -2.0];
        let mut opt = Adam::new(0.1, 2);
        for _ in 0..500 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
            opt.step(&mut p, &g);
        }
        assert!(p.iter().all(|x| x.abs() < 1e-2), "{p:?}");
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![1.5f32, -0.25];
        let mut opt = AnyOptimizer::new(OptimizerKind::Adam, 0.001, 2);
        opt.step(&mut p, &[0.0, 0.0]);
        assert_eq!(p, vec![1.5, -0.25]);
        let mut sgd = AnyOptimizer::new(OptimizerKind::Sgd, 0.5, 2);
        sgd.step(&mut p, &[1.0, 0.0]);
        assert_eq!(p, vec![1.0, -0.25]);
    }
}
