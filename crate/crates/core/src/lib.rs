//! Country-level citation preference networks: preference scoring, signed
//! network construction, community structure, structural balance, regression
//! and idea diffusion.

pub mod balance;
pub mod community;
pub mod country;
pub mod error;
pub mod graph;
pub mod ideas;
pub mod ingest;
pub mod netbuild;
pub mod netmetrics;
pub mod par;
pub mod pipeline;
pub mod preference;
pub mod regress;
pub mod scimetrics;
pub mod tsv;

pub use country::Country;
pub use error::{Error, Result};
pub use par::Execution;
