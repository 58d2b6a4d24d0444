//! Exact Pisot sequences `E_r(x, y)`, minimal linear recurrence guessing, and
//! certified decisions on whether a guessed recurrence holds forever.
//!
//! ```
//! use pisot_core::{end_to_end, DecideOptions, Offset, PisotParams};
//!
//! let params = PisotParams::new(4, 7, Offset::half()).unwrap();
//! let (prefix, report) = end_to_end(&params, 12, 11, &DecideOptions::default()).unwrap();
//! assert_eq!(prefix.terms[..6], [4, 7, 12, 21, 37, 65].map(Into::into));
//! assert!(report.verdict.is_proved());
//! ```

pub mod ball;
pub mod bareiss;
pub mod decision;
pub mod family;
pub mod poly;
pub mod recurrence;
pub mod roots;
pub mod scan;
pub mod sequence;
mod serde_big;

pub use ball::{CBall, Dyadic};
pub use decision::{
    binet_coefficients, compute_n0, decide, decide_with, discrepancy, end_to_end, ratio_bound, BinetData,
    DecideOptions, DecisionError, DecisionReport, InconclusiveReason, RatioBound, UnsupportedReason, Verdict,
};
pub use family::{builtin_templates, verify_family, FamilyRow, FamilyTemplate};
pub use poly::CharPoly;
pub use recurrence::{eval_recurrence, guess_recurrence, LinearRecurrence, RecurrenceError};
pub use roots::{certify_roots, classify_spectrum, RootEnclosure, RootError, Spectrum, SpectrumKind};
pub use scan::{scan, ScanConfig, ScanRecord};
pub use sequence::{generate, hankel_step, next_term, Offset, PisotParams, SequenceError, SequencePrefix};
