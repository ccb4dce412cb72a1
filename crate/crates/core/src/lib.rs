//! Magnetic-induction relaying simulator.
//!
//! Builds the coupled-circuit channel of a source, relay and destination
//! coil buried in soil, evaluates amplify-, filter- and decode-and-forward
//! rates in half- and full-duplex mode, and searches resonance frequency,
//! winding count, relay position and power split for the best rate.

pub mod error;
pub mod experiment;
pub mod link;
pub mod medium;
pub mod optimizer;
pub mod relaying;
pub mod scenario;
pub mod spectrum;

pub use error::{Error, Result};
pub use link::{build_direct_link, build_link_model, BandConfig, DirectLink, LinkModel};
pub use medium::{CircuitParams, CoilDesign, PhysicsModels, RelayGeometry, SoilMedium};
pub use relaying::{evaluate, Duplex, RateResult, Scheme, SchemeConfig};
pub use spectrum::{waterfill, FrequencyGrid, PowerAllocation, Spectrum};
