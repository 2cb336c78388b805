pub mod apps;
pub mod bench;
pub mod engine;
pub mod model;
pub mod num;
pub mod partition;
pub mod store;
pub mod synth;

pub use num::Scalar;

pub type Sssp = apps::SsspApp<f64>;
pub type PageRank = apps::PageRankApp<f64>;
pub type NHop = apps::NHopApp<f64>;
