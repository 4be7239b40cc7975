//! Complex special functions backing the evaluation engine and the
//! density predictions: log-gamma, digamma, Riemann zeta with its
//! logarithmic derivative, the upper incomplete gamma function, the
//! kernel G(s,x) = x^{-s} Gamma(s,x) with its derivative sequence, and
//! the Taylor remainder bounds used by planning.

mod gamma_hp;
mod incgamma;
mod log_gamma;
mod zeta;

pub use gamma_hp::{gamma_complete_dd, gamma_hp};
pub(crate) use incgamma::ln_gamma_real;
pub use incgamma::{
    g_kernel, g_kernel_dd, g_kernel_hp, kernel_derivative_sequence, kernel_re_sequence_hp,
    ln_upper_gamma_real, taylor_remainder_bound, taylor_remainder_bound_shifted,
    taylor_remainder_bound_weak, upper_incomplete_gamma,
};
pub use log_gamma::{digamma, gamma_fn, log_gamma};
pub use zeta::{riemann_zeta, riemann_zeta_deriv, zeta_log_derivative};

/// Bernoulli numbers B_{2n} for n = 1..=20 as exact (numerator, denominator)
/// pairs. Shared by the Stirling series, the digamma asymptotic and the
/// Euler-Maclaurin zeta tail.
pub(crate) const BERNOULLI_2N: [(i128, i128); 20] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
    (854513, 138),
    (-236364091, 2730),
    (8553103, 6),
    (-23749461029, 870),
    (8615841276005, 14322),
    (-7709321041217, 510),
    (2577687858367, 6),
    (-26315271553053477373, 1919190),
    (2929993913841559, 6),
    (-261082718496449122051, 13530),
];
