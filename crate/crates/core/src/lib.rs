//! Numerical laboratory for the alpha-deformed continued fraction maps
//! attached to an infinite family of triangle Fuchsian groups: explicit
//! planar natural-extension domains, bijectivity certification, invariant
//! mass, Rohlin entropy, and the entropy-times-mass volume identity.

pub mod error;
pub mod interval;
pub mod mobius;
pub mod words;

pub use error::{Error, Result};
pub use interval::{Digit, IntervalSpec, OrbitRecord};
pub use mobius::{group_params, GroupParams, Mobius};
pub use words::{DigitWord, Word};
pub mod sync;
pub use sync::{SyncInterval, SyncReport};
pub mod domain;
pub mod geom;
pub mod quad;
pub use domain::{Domain, DomainKind, Rect};
pub mod measure;
pub use measure::{EntropyResult, MassResult};
pub mod planar;
pub use planar::{BijectivityOptions, BijectivityReport, BlockSet};
pub mod sweep;
pub use sweep::SweepOptions;
pub mod expansive;
pub use expansive::ExpansivePartition;
pub mod atlas;
pub use atlas::{Atlas, AtlasOptions, ScanRow};
pub mod xprec;
