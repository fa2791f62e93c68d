//! Action-value functions and the online/target pair.

mod mlp;
mod snapshot;
mod tabular;

pub use mlp::MlpQ;
pub use snapshot::{decode_snapshot, encode_snapshot, SNAPSHOT_MAGIC};
pub use tabular::TabularQ;

use crate::error::{Error, Result};
use crate::State;

pub trait QFunction {
    fn num_actions(&self) -> usize;

    /// `Q(x, ·)`.
    fn predict(&self, state: &State) -> Result<Vec<f64>>;

    /// Writes `Q(x, ·)` into `out`, reusing its allocation where possible.
    fn predict_into(&self, state: &State, out: &mut Vec<f64>) -> Result<()> {
        *out = self.predict(state)?;
        Ok(())
    }

    /// One gradient step on `(y − Q(x, a))²` with step `lr · (Q − y) · ∇Q`.
    ///
    /// Returns the squared error measured before the update.
    fn train_step(&mut self, state: &State, action: usize, target: f64) -> Result<f64>;
}

pub(crate) fn check_target(target: f64) -> Result<()> {
    if !target.is_finite() {
        return Err(Error::invalid(format!("non-finite regression target {target}")));
    }
    Ok(())
}

pub(crate) fn check_learning_rate(lr: f64) -> Result<()> {
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(Error::domain(format!("learning rate {lr} must be finite and >= 0")));
    }
    Ok(())
}

/// Either approximator behind one type, so agents and snapshots need not be generic.
#[derive(Debug, Clone, PartialEq)]
pub enum QNet {
    Tabular(TabularQ),
    Mlp(MlpQ),
}

impl QFunction for QNet {
    fn num_actions(&self) -> usize {
        match self {
            QNet::Tabular(q) => q.num_actions(),
            QNet::Mlp(q) => q.num_actions(),
        }
    }

    fn predict(&self, state: &State) -> Result<Vec<f64>> {
        match self {
            QNet::Tabular(q) => q.predict(state),
            QNet::Mlp(q) => q.predict(state),
        }
    }

    fn predict_into(&self, state: &State, out: &mut Vec<f64>) -> Result<()> {
        match self {
            QNet::Tabular(q) => q.predict_into(state, out),
            QNet::Mlp(q) => q.predict_into(state, out),
        }
    }

    fn train_step(&mut self, state: &State, action: usize, target: f64) -> Result<f64> {
        match self {
            QNet::Tabular(q) => q.train_step(state, action, target),
            QNet::Mlp(q) => q.train_step(state, action, target),
        }
    }
}

/// Online network θ plus a periodically synchronised target copy θ⁻.
#[derive(Debug, Clone)]
pub struct TargetPair<Q = QNet> {
    online: Q,
    target: Q,
    sync_period: u64,
}

impl<Q: QFunction + Clone> TargetPair<Q> {
    pub fn new(online: Q, sync_period: u64) -> Result<Self> {
        if sync_period == 0 {
            return Err(Error::domain("sync period must be positive"));
        }
        Ok(Self {
            target: online.clone(),
            online,
            sync_period,
        })
    }

    pub fn online(&self) -> &Q {
        &self.online
    }

    pub fn target(&self) -> &Q {
        &self.target
    }

    pub fn sync_period(&self) -> u64 {
        self.sync_period
    }

    /// Updates the online parameters only.
    pub fn train_step(&mut self, state: &State, action: usize, target: f64) -> Result<f64> {
        self.online.train_step(state, action, target)
    }

    /// Copies online into target when `global_step` is a multiple of the period.
    pub fn maybe_sync(&mut self, global_step: u64) -> bool {
        if global_step % self.sync_period == 0 {
            self.target.clone_from(&self.online);
            true
        } else {
            false
        }
    }
}
