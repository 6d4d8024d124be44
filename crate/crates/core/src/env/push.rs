use rand::Rng;

use super::config::PushConfig;
use crate::model::ExternalDisturbance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushEvent {
    /// s since episode start
    pub start: f64,
    /// s
    pub duration: f64,
    /// N, `[fx, fy]`; `fy` stays 0 in the sagittal plane
    pub force: [f64; 2],
    /// N·m, `[τx, τy, τz]`; only the pitch component is drawn
    pub torque: [f64; 3],
}

impl PushEvent {
    pub fn is_active(&self, t: f64) -> bool {
        t >= self.start && t < self.start + self.duration
    }
}

/// Push events covering `[0, horizon)` seconds, with onsets spaced by uniform
/// draws from the configured interval.
pub fn schedule_pushes<R: Rng + ?Sized>(rng: &mut R, cfg: &PushConfig, horizon: f64) -> Vec<PushEvent> {
    let mut events = Vec::new();
    if !cfg.enabled {
        return events;
    }
    let draw = |rng: &mut R, lo: f64, hi: f64| if lo == hi { lo } else { rng.random_range(lo..=hi) };
    let mut t = 0.0;
    loop {
        t += draw(rng, cfg.interval_min, cfg.interval_max);
        if t >= horizon {
            break;
        }
        let fx = draw(rng, -cfg.max_force, cfg.max_force);
        let ty = draw(rng, -cfg.max_torque, cfg.max_torque);
        events.push(PushEvent {
            start: t,
            duration: cfg.duration,
            force: [fx, 0.0],
            torque: [0.0, ty, 0.0],
        });
    }
    events
}

/// The disturbance in effect at time `t` (zero when no push is active).
pub fn active_disturbance(events: &[PushEvent], t: f64) -> ExternalDisturbance<f64> {
    events
        .iter()
        .find(|e| e.is_active(t))
        .map(|e| ExternalDisturbance {
            push_force: e.force,
            push_torque: e.torque,
        })
        .unwrap_or_default()
}
