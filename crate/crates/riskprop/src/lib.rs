//! IO, file formats, pipeline drivers, and benchmarking for the riskprop
//! rating engine. The algorithmic core lives in `riskprop-core`; this crate
//! adds everything that needs the standard library: files, threads, and
//! wall-clock timing.

pub mod bench;
pub mod cli;
pub mod exec;
pub mod io;
pub mod pipeline;
