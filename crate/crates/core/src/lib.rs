pub mod actionshape;
pub mod agents;
pub mod automata;
pub mod builtin;
pub mod cli;
pub mod config;
pub mod constraint;
pub mod envs;
pub mod kv;
pub mod monitor;
pub mod shaping;
