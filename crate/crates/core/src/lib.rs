//! Periodic profile curves of rotational minimal hypersurfaces in spheres and
//! the Laplace and Jacobi (stability) spectra they generate.
//!
//! A hypersurface `{(f(u) y, f2(u) z, f1(u)) : y ∈ S^k, z ∈ S^l}` of `S^{n+1}`,
//! `n = k + l + 1`, is minimal exactly when its arc-length profile `(f1, f2, θ)`
//! solves a three-dimensional ODE ([`profile`]). Closed profiles come from a
//! one-parameter shooting problem; separation of variables then reduces both
//! spectra to periodic Hill-type equations, one per pair of spherical-harmonic
//! levels, solved through their Floquet discriminants ([`spectrum`]).

pub mod checks;
pub mod cli;
pub mod geometry;
pub mod ivp;
pub mod output;
pub mod profile;
pub mod spectrum;
