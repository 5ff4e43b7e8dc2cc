use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{clamp_probability, sample_bce, sigmoid, Classifier, ModelKind};
use crate::{Error, Result};

/// Gated recurrent unit over the history rows followed by a sigmoid output
/// unit on the final hidden state. The initial hidden state is zero.
///
/// ```text
/// z  = sigmoid(Wz x + Uz h + bz)
/// r  = sigmoid(Wr x + Ur h + br)
/// c  = tanh(Wh x + Uh (r * h) + bh)
/// h' = (1 - z) * h + z * c
/// p  = sigmoid(wo . h_k + bo)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct GruModel {
    input: usize,
    hidden: usize,
    params: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Offsets {
    wz: usize,
    uz: usize,
    bz: usize,
    wr: usize,
    ur: usize,
    br: usize,
    wh: usize,
    uh: usize,
    bh: usize,
    wo: usize,
    bo: usize,
    len: usize,
}

impl Offsets {
    fn new(input: usize, hidden: usize) -> Offsets {
        let ih = input * hidden;
        let hh = hidden * hidden;
        let wz = 0;
        let uz = wz + ih;
        let bz = uz + hh;
        let wr = bz + hidden;
        let ur = wr + ih;
        let br = ur + hh;
        let wh = br + hidden;
        let uh = wh + ih;
        let bh = uh + hh;
        let wo = bh + hidden;
        let bo = wo + hidden;
        Offsets {
            wz,
            uz,
            bz,
            wr,
            ur,
            br,
            wh,
            uh,
            bh,
            wo,
            bo,
            len: bo + 1,
        }
    }
}

/// Intermediate values of one time step, kept for backpropagation.
struct Step {
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    c: Vec<f64>,
}

/// `out = W x + U h + b` for row-major `W` (hidden x input) and `U` (hidden x hidden).
#[allow(clippy::too_many_arguments)]
fn affine(p: &[f64], w: usize, u: usize, b: usize, x: &[f64], h: &[f64], hidden: usize, out: &mut [f64]) {
    let input = x.len();
    for i in 0..hidden {
        let wrow = &p[w + i * input..w + (i + 1) * input];
        let urow = &p[u + i * hidden..u + (i + 1) * hidden];
        let mut acc = p[b + i];
        for (a, v) in wrow.iter().zip(x) {
            acc += a * v;
        }
        for (a, v) in urow.iter().zip(h) {
            acc += a * v;
        }
        out[i] = acc;
    }
}

impl GruModel {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruModel {
            input,
            hidden,
            params: vec![0.0; Offsets::new(input, hidden).len],
        }
    }

    /// Every parameter uniform in `[-1/sqrt(hidden), 1/sqrt(hidden)]`.
    pub fn init(input: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (hidden as f64).sqrt();
        GruModel {
            input,
            hidden,
            params: (0..Offsets::new(input, hidden).len)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect(),
        }
    }

    pub fn from_params(input: usize, hidden: usize, params: Vec<f64>) -> Result<Self> {
        let len = Offsets::new(input, hidden).len;
        if params.len() != len {
            return Err(Error::ShapeMismatch {
                expected: len,
                actual: params.len(),
            });
        }
        Ok(GruModel { input, hidden, params })
    }

    pub fn input_size(&self) -> usize {
        self.input
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    fn offsets(&self) -> Offsets {
        Offsets::new(self.input, self.hidden)
    }

    fn steps(&self, history: &[f64]) -> Result<usize> {
        if self.input == 0 || history.is_empty() || !history.len().is_multiple_of(self.input) {
            return Err(Error::ShapeMismatch {
                expected: self.input,
                actual: history.len(),
            });
        }
        Ok(history.len() / self.input)
    }

    /// Hidden states after each step (the first entry is the zero state).
    pub fn hidden_states(&self, history: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (_, states) = self.forward(history)?;
        let mut out: Vec<Vec<f64>> = states.iter().map(|s| s.h_prev.clone()).collect();
        let last = states.last().expect("at least one step");
        out.push(
            (0..self.hidden)
                .map(|i| (1.0 - last.z[i]) * last.h_prev[i] + last.z[i] * last.c[i])
                .collect(),
        );
        Ok(out)
    }

    fn forward(&self, history: &[f64]) -> Result<(Vec<f64>, Vec<Step>)> {
        let k = self.steps(history)?;
        let o = self.offsets();
        let p = &self.params;
        let hs = self.hidden;
        let mut h = vec![0.0; hs];
        let mut steps = Vec::with_capacity(k);
        let mut z = vec![0.0; hs];
        let mut r = vec![0.0; hs];
        let mut c = vec![0.0; hs];
        let mut rh = vec![0.0; hs];
        for t in 0..k {
            let x = &history[t * self.input..(t + 1) * self.input];
            affine(p, o.wz, o.uz, o.bz, x, &h, hs, &mut z);
            affine(p, o.wr, o.ur, o.br, x, &h, hs, &mut r);
            z.iter_mut().for_each(|v| *v = sigmoid(*v));
            r.iter_mut().for_each(|v| *v = sigmoid(*v));
            for i in 0..hs {
                rh[i] = r[i] * h[i];
            }
            affine(p, o.wh, o.uh, o.bh, x, &rh, hs, &mut c);
            c.iter_mut().for_each(|v| *v = v.tanh());
            let h_next: Vec<f64> = (0..hs).map(|i| (1.0 - z[i]) * h[i] + z[i] * c[i]).collect();
            steps.push(Step {
                h_prev: std::mem::replace(&mut h, h_next),
                z: z.clone(),
                r: r.clone(),
                c: c.clone(),
            });
        }
        Ok((h, steps))
    }

    fn output_logit(&self, h: &[f64]) -> f64 {
        let o = self.offsets();
        self.params[o.wo..o.wo + self.hidden]
            .iter()
            .zip(h)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.params[o.bo]
    }

    fn output(&self, h: &[f64]) -> f64 {
        sigmoid(self.output_logit(h))
    }
}

impl Classifier for GruModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Gru
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn predict(&self, history: &[f64]) -> Result<f64> {
        let (h, _) = self.forward(history)?;
        Ok(clamp_probability(self.output(&h)))
    }

    fn logit(&self, history: &[f64]) -> Result<f64> {
        let (h, _) = self.forward(history)?;
        Ok(self.output_logit(&h))
    }

    fn accumulate_gradient(&self, history: &[f64], label: u8, grad: &mut [f64]) -> Result<f64> {
        let (h_final, steps) = self.forward(history)?;
        let prob = self.output(&h_final);
        let o = self.offsets();
        let p = &self.params;
        let hs = self.hidden;
        let n_in = self.input;

        let dlogit = prob - f64::from(label);
        for i in 0..hs {
            grad[o.wo + i] += dlogit * h_final[i];
        }
        grad[o.bo] += dlogit;
        let mut dh: Vec<f64> = (0..hs).map(|i| dlogit * p[o.wo + i]).collect();

        let mut dz = vec![0.0; hs];
        let mut dah = vec![0.0; hs];
        let mut daz = vec![0.0; hs];
        let mut dar = vec![0.0; hs];
        let mut drh = vec![0.0; hs];
        for (t, s) in steps.iter().enumerate().rev() {
            let x = &history[t * n_in..(t + 1) * n_in];
            let mut dh_prev: Vec<f64> = (0..hs).map(|i| dh[i] * (1.0 - s.z[i])).collect();
            for i in 0..hs {
                dz[i] = dh[i] * (s.c[i] - s.h_prev[i]);
                let dc = dh[i] * s.z[i];
                dah[i] = dc * (1.0 - s.c[i] * s.c[i]);
                daz[i] = dz[i] * s.z[i] * (1.0 - s.z[i]);
            }
            // candidate block
            drh.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..hs {
                let d = dah[i];
                if d == 0.0 {
                    continue;
                }
                for (j, xv) in x.iter().enumerate() {
                    grad[o.wh + i * n_in + j] += d * xv;
                }
                for j in 0..hs {
                    grad[o.uh + i * hs + j] += d * s.r[j] * s.h_prev[j];
                    drh[j] += p[o.uh + i * hs + j] * d;
                }
                grad[o.bh + i] += d;
            }
            for j in 0..hs {
                dar[j] = drh[j] * s.h_prev[j] * s.r[j] * (1.0 - s.r[j]);
                dh_prev[j] += drh[j] * s.r[j];
            }
            // update and reset gates
            for (da, w, u, b) in [(&daz, o.wz, o.uz, o.bz), (&dar, o.wr, o.ur, o.br)] {
                for i in 0..hs {
                    let d = da[i];
                    if d == 0.0 {
                        continue;
                    }
                    for (j, xv) in x.iter().enumerate() {
                        grad[w + i * n_in + j] += d * xv;
                    }
                    for j in 0..hs {
                        grad[u + i * hs + j] += d * s.h_prev[j];
                        dh_prev[j] += p[u + i * hs + j] * d;
                    }
                    grad[b + i] += d;
                }
            }
            dh = dh_prev;
        }
        Ok(sample_bce(prob, label))
    }

    fn layout(&self) -> Vec<(&'static str, usize, usize, usize)> {
        let o = self.offsets();
        let (i, h) = (self.input, self.hidden);
        vec![
            ("update_input", h, i, o.wz),
            ("update_hidden", h, h, o.uz),
            ("update_bias", 1, h, o.bz),
            ("reset_input", h, i, o.wr),
            ("reset_hidden", h, h, o.ur),
            ("reset_bias", 1, h, o.br),
            ("candidate_input", h, i, o.wh),
            ("candidate_hidden", h, h, o.uh),
            ("candidate_bias", 1, h, o.bh),
            ("output_weights", 1, h, o.wo),
            ("output_bias", 1, 1, o.bo),
        ]
    }
}
