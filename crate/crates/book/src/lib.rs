//! The guide under `book/`, compiled so its examples run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/codec.md")]
pub mod codec {}
#[doc = include_str!("../../../book/src/dsp.md")]
pub mod dsp {}
#[doc = include_str!("../../../book/src/protection.md")]
pub mod protection {}
#[doc = include_str!("../../../book/src/relay.md")]
pub mod relay {}
#[doc = include_str!("../../../book/src/testset.md")]
pub mod testset {}
#[doc = include_str!("../../../book/src/campaign.md")]
pub mod campaign {}
