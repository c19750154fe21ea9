//! Scans toward the boundary, exponent fits, chain checks, property
//! campaigns and report output.

pub mod chain;
pub mod fit;
pub mod report;
pub mod scan;
pub mod verify;

pub use chain::{chain_check, Violation, CHAIN_TOLERANCE};
pub use fit::{fit_exponent, fit_power_law, Field, FitResult};
pub use report::{emit_report, read_rows, report_to_json, rows_from_csv, rows_to_csv, Format, LabeledFit, Report};
pub use scan::{estimate_point, log_spaced, run_scan, DirectionSpec, PointBracket, PointOptions, ScanConfig, ScanRow};
pub use verify::{verify_lemma, Lemma, VerifyReport};
