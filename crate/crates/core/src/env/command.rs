use rand::Rng;

use super::config::CommandConfig;

/// Velocity command `[vx, vy, yaw rate]`; the sagittal model only commands `vx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    /// m/s
    pub vx: f64,
    /// m/s
    pub vy: f64,
    /// rad/s
    pub yaw_rate: f64,
}

impl Command {
    pub fn forward(vx: f64) -> Self {
        Self {
            vx,
            vy: 0.0,
            yaw_rate: 0.0,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.vx, self.vy, self.yaw_rate]
    }
}

pub fn sample_command<R: Rng + ?Sized>(rng: &mut R, cfg: &CommandConfig) -> Command {
    if let Some(vx) = cfg.fixed_vx {
        return Command::forward(vx);
    }
    let vx = if cfg.vx_min == cfg.vx_max {
        cfg.vx_min
    } else {
        rng.random_range(cfg.vx_min..=cfg.vx_max)
    };
    Command::forward(vx)
}
