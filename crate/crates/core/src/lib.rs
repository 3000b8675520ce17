//! A software protection relay for IEC 61850 digital substations.
//!
//! The crate is organised the way the relay processes data:
//!
//! - [`codec`]: Sampled Values and GOOSE frames, BER encoding and PRP
//!   redundancy handling on the process bus.
//! - [`dsp`]: SOGI-FLL frequency tracking and adaptive Kalman phasor
//!   estimation, turning raw samples into a [`dsp::PhasorSet`].
//! - [`protection`]: PIOC, PTOC, PDIS, PDIR, PTOV and PTUV.
//! - [`runtime`]: the relay pipeline, GOOSE publication, the station-bus
//!   protocol and the daemon loop behind the `vied` binary.
//!
//! ```
//! use vied_core::dsp::{Phasor, PhasorSet};
//! use vied_core::protection::{FunctionSettings, ProtectionSuite};
//! use vied_core::Channel;
//!
//! let settings = FunctionSettings::default();
//! let mut suite = ProtectionSuite::new();
//! let mut set = PhasorSet::default();
//! set[Channel::IA] = Phasor::new(3000.0, 0.0);
//! set[Channel::VA] = Phasor::new(288_675.0, 0.0);
//! let out = suite.step(&settings, &set, 1.0 / 4800.0);
//! assert!(out.pioc.trip);
//! ```

pub mod channel;
pub mod codec;
pub mod dsp;
pub mod protection;
pub mod runtime;

pub use channel::Channel;
