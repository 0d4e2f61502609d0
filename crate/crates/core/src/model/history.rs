use std::collections::VecDeque;

use crate::{Error, Result};

use super::Field;

/// Ring of fields spaced `dt` apart, newest last, covering at least the
/// delay horizon `[anchor_time - 1, anchor_time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    dt: f64,
    anchor_time: f64,
    snapshots: VecDeque<Field>,
}

/// Number of snapshots needed to cover a window of length one.
pub(crate) fn ring_len(dt: f64) -> usize {
    (1.0 / dt - 1e-9).ceil() as usize + 1
}

impl HistoryBuffer {
    /// Samples `phi(θ)` at `θ = -k·dt` for `k = 0..ring_len-1`.
    pub fn from_fn(dt: f64, anchor_time: f64, mut phi: impl FnMut(f64) -> Field) -> Result<Self> {
        if !(dt > 0.0 && dt <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "history spacing must lie in (0, 1], got {dt}"
            )));
        }
        let len = ring_len(dt);
        let mut snapshots = VecDeque::with_capacity(len);
        for k in (0..len).rev() {
            snapshots.push_back(phi(-(k as f64) * dt));
        }
        Ok(Self {
            dt,
            anchor_time,
            snapshots,
        })
    }

    /// History that is the same field at every lag.
    pub fn constant(dt: f64, anchor_time: f64, field: &Field) -> Result<Self> {
        Self::from_fn(dt, anchor_time, |_| field.clone())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn anchor_time(&self) -> f64 {
        self.anchor_time
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Length of the time window spanned by the stored snapshots.
    pub fn span(&self) -> f64 {
        (self.snapshots.len().saturating_sub(1)) as f64 * self.dt
    }

    pub fn newest(&self) -> &Field {
        self.snapshots.back().expect("history is never empty")
    }

    /// Snapshot `k` steps back from the anchor.
    pub fn lagged(&self, k: usize) -> &Field {
        &self.snapshots[self.snapshots.len() - 1 - k]
    }

    /// Appends the state at `anchor_time + dt` and drops the oldest snapshot.
    pub fn push(&mut self, field: Field) {
        self.snapshots.push_back(field);
        if self.snapshots.len() > ring_len(self.dt) {
            self.snapshots.pop_front();
        }
        self.anchor_time += self.dt;
    }

    /// Replaces the newest snapshot without advancing time.
    pub fn replace_newest(&mut self, field: Field) {
        *self.snapshots.back_mut().expect("history is never empty") = field;
    }

    /// Field at `anchor_time + θ`, linear in time between snapshots.
    pub fn query(&self, theta: f64) -> Result<Field> {
        let (lo, w) = self.locate(theta)?;
        if w == 0.0 {
            return Ok(self.lagged(lo).clone());
        }
        // lagged(lo) is the later snapshot, lagged(lo + 1) the earlier one
        Ok(self.lagged(lo).combine(1.0 - w, self.lagged(lo + 1), w))
    }

    /// Spatial mean at `anchor_time + θ`.
    pub fn query_mean(&self, theta: f64) -> Result<Vec<f64>> {
        let (lo, w) = self.locate(theta)?;
        let a = self.lagged(lo).mean();
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.lagged(lo + 1).mean();
        Ok(a.iter()
            .zip(&b)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect())
    }

    fn locate(&self, theta: f64) -> Result<(usize, f64)> {
        if theta > 0.0 || -theta > self.span() + 1e-12 {
            return Err(Error::HistoryGap(format!(
                "lag {theta} outside the stored window [-{}, 0]",
                self.span()
            )));
        }
        let k = -theta / self.dt;
        let r = k.round();
        if (k - r).abs() < 1e-9 {
            return Ok(((r as usize).min(self.len() - 1), 0.0));
        }
        let lo = k.floor() as usize;
        Ok((lo, k - lo as f64))
    }
}
