//! Lead-time distribution analytics for short-term rental bookings.
//!
//! The crate turns raw booking records into nights-weighted lead-time
//! distributions, measures how those distributions drift (normalized L1
//! distance, year over year, against a baseline year, or on partially
//! observed windows), decomposes the drift series with STL, and quantifies
//! what the drift does to pickup forecasts.
//!
//! ```
//! use leadtime_core::pickup::{error_bound, pickup_forecast};
//!
//! let forecast = pickup_forecast(723.0, 0.69).unwrap();
//! assert!((forecast - 1047.83).abs() < 0.01);
//! let bound = error_bound(0.2156, 17, 30, 0.69).unwrap();
//! assert!((bound - 0.2708).abs() < 5e-4);
//! ```

pub mod decompose;
pub mod distribution;
pub mod divergence;
pub mod error;
pub mod exec;
pub mod ingest;
pub mod market;
pub mod pickup;
pub mod pipeline;
pub mod simulate;
pub mod stats;

pub use error::{Error, FieldError, Result, RowError};
pub use exec::Execution;
pub use ingest::BookingRecord;
pub use market::{Corridor, Market, TravelType, YearMonth};
