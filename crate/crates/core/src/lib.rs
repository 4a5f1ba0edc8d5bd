//! Spectral solver and estimate checker for a horizontally filtered
//! Navier–Stokes model on the periodic box `(-πL, πL)³`.

pub mod estimates;
pub mod fields;
pub mod io;
pub mod model;
pub mod numerics;
pub mod pathspace;
pub mod pressure;
pub mod spectral;
