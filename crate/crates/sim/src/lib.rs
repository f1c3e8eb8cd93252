//! Sensor-network simulation, file formats and CLI plumbing around the
//! core labeled-RFS fusion library.

use std::fmt;

pub mod cli;
pub mod density_fmt;
pub mod engine;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod testkit;
pub mod validate_suites;

#[derive(Debug)]
pub enum SimError {
    Config(String),
    Io(std::io::Error),
    Core(rfs_fusion_core::Error),
    Format(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Config(msg) => write!(f, "config error: {msg}"),
            SimError::Io(e) => write!(f, "io error: {e}"),
            SimError::Core(e) => write!(f, "{e}"),
            SimError::Format(msg) => write!(f, "format error: {msg}"),
        }
    }
}

impl std::error::Error for SimError {}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e)
    }
}

impl From<rfs_fusion_core::Error> for SimError {
    fn from(e: rfs_fusion_core::Error) -> Self {
        SimError::Core(e)
    }
}

impl From<serde_json::Error> for SimError {
    fn from(e: serde_json::Error) -> Self {
        SimError::Format(e.to_string())
    }
}

/// FNV-1a of the canonical config text; recorded in run metadata.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Log levels driven by the RFS_FUSION_LOG environment variable
/// (off | info | debug).
pub fn log_level() -> u8 {
    match std::env::var("RFS_FUSION_LOG").as_deref() {
        Ok("debug") => 2,
        Ok("info") => 1,
        _ => 0,
    }
}

#[macro_export]
macro_rules! log_info {
    ($($arg:tt)*) => {
        if $crate::log_level() >= 1 {
            eprintln!($($arg)*);
        }
    };
}
