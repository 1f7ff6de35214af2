//! Front end for the guaranteed PIVP solver: `.pivp` system files, built-in
//! reference problems and the `solve`, `params` and `bench` commands.

pub mod commands;
pub mod parser;
pub mod reference;
