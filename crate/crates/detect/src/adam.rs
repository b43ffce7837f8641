//! Minimal Adam optimizer over a flat parameter vector.

use crate::Real;

pub struct Adam {
    lr: Real,
    beta1: Real,
    beta2: Real,
    eps: Real,
    m: Vec<Real>,
    v: Vec<Real>,
    t: u32,
}

impl Adam {
    pub fn new(n: usize, lr: Real) -> Adam {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn set_lr(&mut self, lr: Real) {
        self.lr = lr;
    }

    pub fn step(&mut self, params: &mut [Real], grad: &[Real]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / bc1;
            let vh = self.v[i] / bc2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}
