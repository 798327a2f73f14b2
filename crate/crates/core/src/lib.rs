//! Opinion dynamics with silence: DeGroot averaging and two spiral-of-silence
//! variants on weighted influence graphs.

pub mod analysis;
pub mod dynamics;
pub mod engine;
pub mod graph;
pub mod scenarios;
pub mod config;
pub mod cli;
