//! Analytic transforms of free stable laws and related densities.

mod cauchy;
mod density;
mod mp;
mod stable;

pub use cauchy::{cauchy_power_r, cauchy_power_r_boundary};
pub use density::{
    quantile, quantile_abs_xi, s_target, stable_cdf, stable_density, xi_squared_law,
    DensityTable, XiQuantiles,
};
pub use mp::{mp_cdf, mp_density};
pub use stable::{
    alpha_tilde, pow_slit, s_mp, s_mp_inv, s_stable, stable_b, StableLaw, StableVariant,
};
