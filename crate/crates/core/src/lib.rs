//! Discrete-event simulator of buffered asynchronous federated learning over a
//! LEO constellation that talks to a single ground station.
//!
//! Satellite visibility drives everything: [`orbital`] propagates circular
//! orbits, [`contact`] turns visibility into an ordered stream of visits,
//! [`flcore`] replays those visits through the ground-station/satellite state
//! machines using an update rule from [`strategies`], and [`learn`] supplies
//! the local training. [`experiment`] wires a config file to all of it.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to a concrete precision.

pub mod contact;
pub mod error;
pub mod experiment;
pub mod flcore;
pub mod learn;
pub mod orbital;
pub mod params;
pub mod scalar;
pub mod strategies;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use scalar::Scalar;

pub type Vec3d = orbital::Vec3<f64>;
pub type Elements = orbital::OrbitalElements<f64>;
pub type Station = orbital::GroundStation<f64>;
pub type Window = contact::ContactEvent<f64>;
pub type VisitF64 = contact::Visit<f64>;
pub type Params = ModelParams<f64>;
pub type Params32 = ModelParams<f32>;
pub type Data = learn::Dataset<f64>;
pub type Data32 = learn::Dataset<f32>;
pub type Server = flcore::ServerState<f64>;
pub type Client = flcore::ClientState<f64>;
