//! Congruence classes of point configurations in F_q^d.
//!
//! The crate enumerates the orthogonal group of a small finite vector
//! space, classifies (k+1)-point configurations up to rigid motion with an
//! exact invariant, counts classes for whole spaces and for subsets, and
//! checks the Fourier-analytic counting identities that control how many
//! classes a set determines.

pub mod congruence;
pub mod geometry;
pub mod gfarith;
pub mod harness;
pub mod isogroup;
pub mod linalg;
pub mod spectral;
