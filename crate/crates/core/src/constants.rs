//! Physical constants (CODATA 2018) and isotope presets.

/// Vacuum permeability μ0 in N A⁻².
pub const MU0: f64 = 1.256_637_062_12e-6;

/// μ0 / 4π.
pub const MU0_OVER_4PI: f64 = MU0 / (4.0 * std::f64::consts::PI);

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Magic angle arccos(1/√3), where 3cos²θ − 1 vanishes.
pub const MAGIC_ANGLE: f64 = 0.955_316_618_124_509_3;

/// ²⁹Si gyromagnetic ratio, rad s⁻¹ T⁻¹.
pub const GAMMA_SI29: f64 = -5.3190e7;

/// ¹³C gyromagnetic ratio, rad s⁻¹ T⁻¹.
pub const GAMMA_C13: f64 = 6.7283e7;

/// Silicon lattice constant in meters.
pub const A0_SILICON: f64 = 5.43e-10;

/// Diamond lattice constant in meters.
pub const A0_DIAMOND: f64 = 3.567e-10;
