//! The guide's chapters, compiled as doctests so their listings can't rot.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/hafnian.md")]
pub mod hafnian {}
#[doc = include_str!("../../../book/src/gbs.md")]
pub mod gbs {}
#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}
#[doc = include_str!("../../../book/src/optimizers.md")]
pub mod optimizers {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
