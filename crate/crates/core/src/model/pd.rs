use crate::error::{Error, Result};
use crate::scalar::Real;

/// `τ_i = clamp(Kp_i (θ*_i − θ_i) − Kd_i θ̇_i, ±τmax_i)`.
pub fn pd_torques<T: Real>(
    kp: &[T],
    kd: &[T],
    torque_limit: &[T],
    theta_target: &[T],
    theta: &[T],
    theta_dot: &[T],
) -> Result<Vec<T>> {
    let n = theta.len();
    for (name, len) in [
        ("kp", kp.len()),
        ("kd", kd.len()),
        ("torque_limit", torque_limit.len()),
        ("theta_target", theta_target.len()),
        ("theta_dot", theta_dot.len()),
    ] {
        if len != n {
            return Err(Error::contract(format!(
                "pd_torques: {name} has length {len}, expected {n}"
            )));
        }
    }
    Ok((0..n)
        .map(|i| {
            let raw = kp[i] * (theta_target[i] - theta[i]) - kd[i] * theta_dot[i];
            raw.max(-torque_limit[i]).min(torque_limit[i])
        })
        .collect())
}
