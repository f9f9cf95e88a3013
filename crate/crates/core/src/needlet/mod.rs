//! Needlet window, frame construction, localization and norm audits, and
//! exact analysis/synthesis of bandlimited functions.

mod analysis;
mod frame;
mod window;
pub mod zonal;

pub use analysis::{analyze, synthesize, NeedletCoefficients, SampledFunction};
pub use frame::{
    min_pairwise_distance, FrameDiagnostics, LocalizationFit, NeedletFrame, NormConstants, Scale,
    ScaleDiagnostics, DEFAULT_WINDOW_GRID, MAX_SCALE,
};
pub use window::{NeedletWindow, WindowAudit};
pub use zonal::{ScaleProfile, ZonalTable};
