//! Representational similarity analysis for contextual embeddings.
//!
//! The pipeline: generate a role-annotated corpus from a template grammar
//! ([`grammar`]), load per-(sentence, role) embeddings written by an external
//! extractor ([`embedstore`]), assemble reference and hypothesis models
//! ([`models`]), compare their representational geometries over repeated
//! sentence samples ([`geometry`], [`rsa`]) and decide between hypotheses with
//! an exact sign test. [`stats`] holds the shared statistical kernel and
//! [`diagnostic`] the logistic-regression probe baseline.

pub mod diagnostic;
pub mod embedstore;
pub mod error;
pub mod fingerprint;
pub mod geometry;
pub mod grammar;
pub mod models;
pub mod role;
pub mod rsa;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use fingerprint::Fingerprint;
pub use role::Role;
