pub mod bench;
pub mod bnb;
pub mod env;
pub mod generators;
pub mod lp;
pub mod model;
pub mod observations;
pub mod policies;
pub mod rewards;
