//! Physical constants (SI, CODATA 2018) and rubidium vapor data.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380649e-23;
/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.8541878128e-12;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.66053906660e-27;
/// Planck constant, J·s.
pub const H_PLANCK: f64 = 6.62607015e-34;

/// Mass of ⁸⁷Rb, kg.
pub const M_RB87: f64 = 86.909180531 * AMU;
/// Natural abundance of ⁸⁷Rb in a natural-rubidium cell.
pub const RB87_FRACTION: f64 = 0.2783;
/// Rubidium melting point, K (vapor-pressure model switches solid/liquid here).
pub const RB_MELTING_K: f64 = 312.46;

/// Rubidium vapor pressure, Pa, from the standard Nesmeyanov-style fit
/// log10 P[torr] = 2.881 + 4.857 − 4215/T (solid), 2.881 + 4.312 − 4040/T (liquid).
pub fn rb_vapor_pressure_pa(temperature_k: f64) -> f64 {
    let log10_torr = if temperature_k < RB_MELTING_K {
        2.881 + 4.857 - 4215.0 / temperature_k
    } else {
        2.881 + 4.312 - 4040.0 / temperature_k
    };
    133.322368 * 10f64.powf(log10_torr)
}

/// Number density of ⁸⁷Rb in a natural-abundance vapor cell, m⁻³.
pub fn rb87_number_density(temperature_k: f64) -> f64 {
    RB87_FRACTION * rb_vapor_pressure_pa(temperature_k) / (KB * temperature_k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_temperature_density_is_mid_e15() {
        // Room-temperature Rb cells sit around 10¹⁵–10¹⁶ m⁻³ total; the ⁸⁷Rb
        // share at 293.15 K lands near 2×10¹⁵.
        let n = rb87_number_density(293.15);
        assert!(n > 1e15 && n < 4e15, "n = {n:e}");
    }

    #[test]
    fn vapor_pressure_continuous_at_melting_point() {
        let below = rb_vapor_pressure_pa(RB_MELTING_K - 1e-6);
        let above = rb_vapor_pressure_pa(RB_MELTING_K + 1e-6);
        // The two fit branches agree to a few percent at the melting point.
        assert!((below / above - 1.0).abs() < 0.05, "{below:e} vs {above:e}");
    }
}
