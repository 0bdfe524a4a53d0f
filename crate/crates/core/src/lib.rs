//! Community-informed conference scheduling.
//!
//! Author-sourced interest and attendee bookmarks become pairwise affinity
//! matrices; affinity drives session formation and conflict-minimizing
//! timeslot assignment, while popularity drives room fit.

pub mod affinity;
pub mod corpus;
pub mod recommend;
pub mod records;
pub mod scheduler;
pub mod sessionizer;
pub mod synth;
pub mod textsim;
