//! Command line and HTTP front end for the scheduling engine, plus the
//! editable schedule draft they share.

pub mod cli;
pub mod draft;
pub mod server;
