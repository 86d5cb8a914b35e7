pub mod par;
pub mod spectral;
pub mod besov;
pub mod random;
pub mod model;
pub mod timestep;
pub mod diagnostics;
pub mod experiment;
