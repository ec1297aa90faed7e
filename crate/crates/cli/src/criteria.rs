//! Pass bands of the reproduction checks. The CLI reports them in sidecars;
//! the acceptance suite asserts them.

/// Band for the log-log slope of a quantity expected to decay like 1/N.
pub const RATE_BAND: (f64, f64) = (-1.3, -0.7);
/// Band for the inertial-range slope of the shell spectrum.
pub const SPECTRUM_SLOPE_BAND: (f64, f64) = (-2.0, -1.4);
/// Shell-spectrum range in units of k0, and number of log shells.
pub const INERTIAL_RANGE: (f64, f64) = (10.0, 1000.0);
pub const INERTIAL_SHELLS: usize = 8;

/// Rank correlation of (t, variance) required for diffusive 3D spreading.
pub const SPEARMAN_3D_MIN: f64 = 0.95;
/// Required rank-correlation gap between 3D and 1D.
pub const SPEARMAN_GAP_MIN: f64 = 0.2;
/// Start of the window used for rank correlations and decreases (s).
pub const LATE_WINDOW_START: f64 = 10.0;
/// 1D variance must stay below this multiple of its value at t = 1 s.
pub const BOUNDED_RATIO_MAX: f64 = 100.0;

/// Slack on the absorbing speed band of the reduced one-sine system.
pub const SPEED_BAND_SLACK: f64 = 1e-3;
/// Transient excluded from band checks, in relaxation times.
pub const TRANSIENT_TAUS: f64 = 20.0;

/// tau_eff closure: minimum R^2 and relative intercept error.
pub const TAU_FIT_R2_MIN: f64 = 0.95;
pub const TAU_INTERCEPT_REL: f64 = 0.1;
/// Eulerian vs Lagrangian ensemble curves, relative L2 in time.
pub const EULER_LAGRANGE_REL_L2: f64 = 0.05;

pub fn in_band(v: f64, band: (f64, f64)) -> bool {
    v >= band.0 && v <= band.1
}
