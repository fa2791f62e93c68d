use rand::Rng;

use super::{check_learning_rate, check_target, QFunction};
use crate::error::{Error, Result};
use crate::State;

/// One-hidden-layer ReLU network, `Q(x) = W2 · relu(W1 x + b1) + b2`.
///
/// Weights are row-major: `w1[j * input_dim + i]`, `w2[a * hidden_dim + j]`.
/// The flat parameter order used by [`MlpQ::parameters`] is `W1, b1, W2, b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpQ {
    input_dim: usize,
    hidden_dim: usize,
    num_actions: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    learning_rate: f64,
}

struct Forward {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    q: Vec<f64>,
}

impl MlpQ {
    pub const DEFAULT_HIDDEN: usize = 64;

    /// Uniform init in `±1/√fan_in` for each layer.
    pub fn new<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_dim: usize,
        num_actions: usize,
        learning_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(input_dim, hidden_dim, num_actions, learning_rate)?;
        let k1 = 1.0 / (input_dim as f64).sqrt();
        let k2 = 1.0 / (hidden_dim as f64).sqrt();
        for w in net.w1.iter_mut().chain(net.b1.iter_mut()) {
            *w = rng.gen_range(-k1..=k1);
        }
        for w in net.w2.iter_mut().chain(net.b2.iter_mut()) {
            *w = rng.gen_range(-k2..=k2);
        }
        Ok(net)
    }

    pub fn zeros(
        input_dim: usize,
        hidden_dim: usize,
        num_actions: usize,
        learning_rate: f64,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || num_actions < 2 {
            return Err(Error::invalid(format!(
                "bad MLP shape {input_dim}-{hidden_dim}-{num_actions}"
            )));
        }
        check_learning_rate(learning_rate)?;
        Ok(Self {
            input_dim,
            hidden_dim,
            num_actions,
            w1: vec![0.0; hidden_dim * input_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; num_actions * hidden_dim],
            b2: vec![0.0; num_actions],
            learning_rate,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn num_parameters(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_parameters() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.num_parameters(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite parameter"));
        }
        let (w1, rest) = params.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, b2) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2.copy_from_slice(b2);
        Ok(())
    }

    fn features<'a>(&self, state: &'a State) -> Result<&'a [f64]> {
        let x = state
            .as_features()
            .ok_or_else(|| Error::invalid("MLP needs a feature vector"))?;
        if x.len() != self.input_dim {
            return Err(Error::invalid(format!(
                "expected {} features, got {}",
                self.input_dim,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature"));
        }
        Ok(x)
    }

    fn forward(&self, x: &[f64]) -> Forward {
        let mut pre = self.b1.clone();
        for (j, p) in pre.iter_mut().enumerate() {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            *p += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        let hidden: Vec<f64> = pre.iter().map(|p| p.max(0.0)).collect();
        let mut q = self.b2.clone();
        for (a, out) in q.iter_mut().enumerate() {
            let row = &self.w2[a * self.hidden_dim..(a + 1) * self.hidden_dim];
            *out += row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
        }
        Forward { pre, hidden, q }
    }

    /// Squared error `(y − Q(x, a))²`.
    pub fn loss(&self, state: &State, action: usize, target: f64) -> Result<f64> {
        let q = self.predict(state)?;
        let qa = q
            .get(action)
            .ok_or_else(|| Error::invalid(format!("action {action} out of range")))?;
        Ok((target - qa).powi(2))
    }

    /// Loss and its gradient with respect to the flat parameter vector.
    pub fn loss_gradient(&self, state: &State, action: usize, target: f64) -> Result<(f64, Vec<f64>)> {
        check_target(target)?;
        if action >= self.num_actions {
            return Err(Error::invalid(format!("action {action} out of range")));
        }
        let x = self.features(state)?;
        let fwd = self.forward(x);
        let err = fwd.q[action] - target;
        let g = 2.0 * err;

        let mut grad = vec![0.0; self.num_parameters()];
        let (gw1, rest) = grad.split_at_mut(self.w1.len());
        let (gb1, rest) = rest.split_at_mut(self.b1.len());
        let (gw2, gb2) = rest.split_at_mut(self.w2.len());

        gb2[action] = g;
        let w2_row = &self.w2[action * self.hidden_dim..(action + 1) * self.hidden_dim];
        let gw2_row = &mut gw2[action * self.hidden_dim..(action + 1) * self.hidden_dim];
        for j in 0..self.hidden_dim {
            gw2_row[j] = g * fwd.hidden[j];
            if fwd.pre[j] > 0.0 {
                let d = g * w2_row[j];
                gb1[j] = d;
                for (gw, xi) in gw1[j * self.input_dim..(j + 1) * self.input_dim]
                    .iter_mut()
                    .zip(x)
                {
                    *gw = d * xi;
                }
            }
        }
        Ok((err * err, grad))
    }
}

impl QFunction for MlpQ {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn predict(&self, state: &State) -> Result<Vec<f64>> {
        let x = self.features(state)?;
        Ok(self.forward(x).q)
    }

    fn train_step(&mut self, state: &State, action: usize, target: f64) -> Result<f64> {
        let (loss, grad) = self.loss_gradient(state, action, target)?;
        // The step is lr · (Q − y) · ∇Q, i.e. half the gradient of the squared error.
        let scale = 0.5 * self.learning_rate;
        let mut params = self.parameters();
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= scale * g;
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("MLP update produced non-finite parameters"));
        }
        self.set_parameters(&params)?;
        Ok(loss)
    }
}
