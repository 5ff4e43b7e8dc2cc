use super::OptimizerKind;

/// First-order update rule over a flat parameter vector.
pub trait Optimizer {
    fn step(&mut self, params: &mut [f64], grad: &[f64]);
}

#[derive(Debug, Clone)]
pub struct GradientDescent {
    pub learning_rate: f64,
}

impl Optimizer for GradientDescent {
    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for (p, g) in params.iter_mut().zip(grad) {
            *p -= self.learning_rate * g;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(learning_rate: f64, n_params: usize) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

pub(crate) fn make_optimizer(kind: OptimizerKind, learning_rate: f64, n_params: usize) -> Box<dyn Optimizer> {
    match kind {
        OptimizerKind::Adam => Box::new(Adam::new(learning_rate, n_params)),
        OptimizerKind::GradientDescent => Box::new(GradientDescent { learning_rate }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_descent_step() {
        let mut p = vec![1.0, -2.0];
        GradientDescent { learning_rate: 0.5 }.step(&mut p, &[2.0, -2.0]);
        assert_eq!(p, vec![0.0, -1.0]);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        // bias correction makes the first step lr * sign(g)
        let mut p = vec![0.0, 0.0, 0.0];
        let mut opt = Adam::new(0.01, 3);
        opt.step(&mut p, &[3.0, -0.2, 0.0]);
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[1] - 0.01).abs() < 1e-9);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = vec![5.0, -3.0];
        let mut opt = Adam::new(0.1, 2);
        for _ in 0..2000 {
            let g = vec![2.0 * (p[0] - 1.0), 2.0 * (p[1] + 2.0)];
            opt.step(&mut p, &g);
        }
        assert!((p[0] - 1.0).abs() < 1e-3 && (p[1] + 2.0).abs() < 1e-3);
    }
}
