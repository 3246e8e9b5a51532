pub mod adversary;
pub mod error;
pub mod hermitian;
pub mod loss;
pub mod rng;
pub mod spectrahedron;
pub mod variational;
pub mod learner;
pub mod harness;
