//! Deterministic slide deck evaluation: aesthetic metrics over rendered
//! slide images, editability analysis of native packages, alignment with
//! human rankings and multiple-choice content tests.

pub mod alignment;
pub mod engagement;
pub mod error;
pub mod harmony;
pub mod imaging;
pub mod layout;
pub mod pei;
pub mod quiz;
pub mod report;
pub mod rhythm;
pub mod stats;
pub mod usability;

pub use error::{Error, Result};
pub use imaging::SlideImage;
