//! Special functions.

/// Gamma function.
///
/// Wraps the libm port of the musl `tgamma`, which is accurate to a couple of
/// ulp over the range used here (arguments in (0, 6]: weight prefactors
/// 1/Gamma(2-alpha), 1/Gamma(3-alpha) and Caputo factors up to Gamma(6)).
/// The unit tests pin known values to 1e-13 relative.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}
