//! File formats, parallel drivers and the command-line front end for
//! `nrstat-core`.

pub mod cli;
pub mod export;
pub mod io;
pub mod parallel;
