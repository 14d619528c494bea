//! Collective-intelligence measurement for multi-agent systems.

pub mod agents;
pub mod cli;
pub mod error;
pub mod game;
pub mod info;
pub mod io;
pub mod scenarios;
pub mod tom;

pub use error::{Error, Result};
