//! Special functions for the radial and angular parts of the modal series.
//!
//! Every routine here is a pure function of its arguments.

mod bessel;
mod legendre;

pub use bessel::{
    fill_spherical_j, fill_spherical_y, hankel1_explicit, hankel_abs_sq_oracle,
    large_order_envelope, large_order_envelope_nu, radial_seq, riccati_derivative,
    riccati_from_seq, spherical_bessel_j, ScaledHankel, spherical_bessel_y, spherical_h1_seq,
    spherical_hankel1, spherical_j_seq, spherical_j_upper_bound, spherical_y_seq, EnvelopeKind,
    RadialKind,
};
pub use legendre::{
    azimuthal, legendre_p, legendre_poly_derivs, neumann_prefactor, scalar_sph_harm,
    NormalizedLegendre,
};
