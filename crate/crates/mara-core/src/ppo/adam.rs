//! Adaptive moment estimation over a flat parameter vector.

/// First/second-moment adaptive optimizer with bias correction. Moment
/// decays 0.9/0.999, epsilon 1e-8; the step size is supplied per call so a
/// learning-rate schedule can drive it.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Adam {
    pub fn new(n_params: usize) -> Adam {
        Adam {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// Number of steps taken so far.
    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Apply one update: `params[i] -= lr · m̂ᵢ / (√v̂ᵢ + ε)`.
    ///
    /// `params` yields mutable references in the same fixed order every call;
    /// `grads` must align with it.
    pub fn step<'a, P, G>(&mut self, params: P, grads: G, lr: f64)
    where
        P: Iterator<Item = &'a mut f64>,
        G: Iterator<Item = f64>,
    {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let mut i = 0;
        for (p, g) in params.zip(grads) {
            assert!(i < self.m.len(), "more parameters than optimizer slots");
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
            i += 1;
        }
        assert_eq!(i, self.m.len(), "fewer parameters than optimizer slots");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gradient_steps_are_frozen() {
        let mut adam = Adam::new(1);
        let mut theta = [0.0];
        let expected = [
            -0.09999999900000002,
            -0.19999999799999935,
            -0.29999999699999935,
        ];
        for want in expected {
            adam.step(theta.iter_mut(), [1.0].into_iter(), 0.1);
            assert!((theta[0] - want).abs() < 1e-12, "got {}", theta[0]);
        }
        assert_eq!(adam.steps(), 3);
    }

    #[test]
    fn descends_a_quadratic_to_its_analytic_optimum() {
        // f(θ) = (θ − 3)², optimum θ* = 3.
        let mut adam = Adam::new(1);
        let mut theta = [0.0];
        for _ in 0..1000 {
            let g = 2.0 * (theta[0] - 3.0);
            adam.step(theta.iter_mut(), [g].into_iter(), 0.05);
        }
        assert!((theta[0] - 3.0).abs() < 1e-3, "got {}", theta[0]);
    }

    #[test]
    fn per_parameter_scaling_is_independent() {
        // Two decoupled quadratics with very different curvatures still both
        // converge — the per-parameter second moment equalizes step sizes.
        let mut adam = Adam::new(2);
        let mut theta = [0.0, 0.0];
        for _ in 0..2000 {
            let g = [200.0 * (theta[0] - 1.0), 0.02 * (theta[1] + 2.0)];
            adam.step(theta.iter_mut(), g.into_iter(), 0.01);
        }
        assert!((theta[0] - 1.0).abs() < 1e-3);
        assert!((theta[1] + 2.0).abs() < 1e-2);
    }

    #[test]
    #[should_panic(expected = "optimizer slots")]
    fn parameter_count_mismatch_panics() {
        let mut adam = Adam::new(2);
        let mut theta = [0.0];
        adam.step(theta.iter_mut(), [1.0].into_iter(), 0.1);
    }
}
