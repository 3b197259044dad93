//! Annotation back-end: serves uncertain words with candidate lemmas,
//! records choices in an append-only event log and exports labels.

pub mod http;
pub mod store;

pub use http::{router, AppState, ServerConfig};
pub use store::{replay, task_from_analysis, task_from_prediction, Candidate, Event, Stats, Status, Store, Task};
