//! Building blocks of the `ni-stab` command-line tool.

pub mod commands;
pub mod plant_file;
pub mod report;

pub use commands::{cmd_check, cmd_demo, cmd_sweep, cmd_synth, demo_plant, load_plant, CliError, SweepOutput};
pub use plant_file::{parse_plant, plant_to_json, ParseError, PlantFile, PlantFormat};
