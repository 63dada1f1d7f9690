pub mod error;
pub mod lattice;
pub mod numeric;
pub mod params;
pub mod special;
pub mod quadrature;
pub mod moments;
pub mod exact;
pub mod approx;
pub mod metrics;
pub mod bounds;
pub mod coupling;
