use crate::error::{Error, Result};

/// Closed-form space-invariant solution (gas u, particles u_l) at time `t`:
/// both relax at rate (1 + kappa) / tau_p toward (kappa u_l0 + u0) / (1 + kappa).
pub fn homogeneous_solution(
    t: f64,
    u0_gas: f64,
    u0_particles: f64,
    kappa: f64,
    tau_p: f64,
) -> Result<(f64, f64)> {
    if !(kappa >= 0.0) {
        return Err(Error::invalid("kappa", "must be >= 0"));
    }
    if !(tau_p > 0.0) {
        return Err(Error::invalid("tau_p", "must be > 0"));
    }
    let eq = (kappa * u0_particles + u0_gas) / (1.0 + kappa);
    let decay = (-(1.0 + kappa) / tau_p * t).exp();
    // u_l0 - eq = -(u0 - eq) / kappa, written so that kappa = 0 is regular
    Ok((eq + (u0_gas - eq) * decay, eq + (u0_particles - eq) * decay))
}

/// Exact Godunov flux for f(u) = u^2 / 2.
pub fn godunov_flux(ul: f64, ur: f64) -> f64 {
    if ul > ur {
        // shock, speed (ul + ur) / 2
        if ul + ur > 0.0 {
            0.5 * ul * ul
        } else {
            0.5 * ur * ur
        }
    } else if ul > 0.0 {
        0.5 * ul * ul
    } else if ur < 0.0 {
        0.5 * ur * ur
    } else {
        0.0
    }
}
