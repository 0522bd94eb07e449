//! Statevector simulation of single-photon template recognition: point-state
//! preparation, Fourier-space noise filtering, Grover rotation onto the
//! uniform state, a second-hypothesis extension, discrimination bounds and
//! the linear-optics QFT layout.

pub mod circuit;
pub mod discrimination;
pub mod error;
pub mod glyphs;
pub mod image;
pub mod optics;
pub mod pipeline;
pub mod state;

pub use circuit::{Aliasing, Direction, FilterProfile, FilterSpec, GroverOracle};
pub use discrimination::{DiscriminationReport, Projector};
pub use error::{Error, Result};
pub use image::{AmplitudeMap, BinaryImage, PnmEncoding};
pub use optics::{OpticalNetwork, PhaseSchedule, ResourceCounts};
pub use pipeline::{
    Classification, Label, MatchOptions, MatchOutcome, Mode, Pair, SampledResult, SecondTryOutcome, SweepRow,
    SweepTable,
};
pub use state::{BasisIndex, StateVector};
