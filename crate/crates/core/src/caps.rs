//! Enumeration limits shared across the crate.

use serde::{Deserialize, Serialize};

/// Default maximum number of poset points.
pub const DEFAULT_MAX_POINTS: usize = 8;
/// Default maximum size of a single derived stalk (function sheaves blow up fast).
pub const DEFAULT_MAX_STALK: usize = 512;
/// Default maximum number of sections a single quantifier may range over.
pub const DEFAULT_MAX_QUANTIFIER_SECTIONS: usize = 4096;

/// Points are stored in a fixed-width bitmask; this bound is structural.
pub const HARD_MAX_POINTS: usize = 32;

/// Enumeration limits. Exceeding a cap is a reported condition, never a panic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Maximum number of points accepted at poset construction.
    #[serde(default = "default_points")]
    pub max_points: usize,
    /// Maximum number of elements in any single stalk of a derived sheaf.
    #[serde(default = "default_stalk")]
    pub max_stalk: usize,
    /// Maximum number of sections a quantifier may enumerate.
    #[serde(default = "default_quant")]
    pub max_quantifier_sections: usize,
}

fn default_points() -> usize {
    DEFAULT_MAX_POINTS
}
fn default_stalk() -> usize {
    DEFAULT_MAX_STALK
}
fn default_quant() -> usize {
    DEFAULT_MAX_QUANTIFIER_SECTIONS
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_points: DEFAULT_MAX_POINTS,
            max_stalk: DEFAULT_MAX_STALK,
            max_quantifier_sections: DEFAULT_MAX_QUANTIFIER_SECTIONS,
        }
    }
}

impl std::fmt::Display for Caps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "max_points={} max_stalk={} max_quantifier_sections={}",
            self.max_points, self.max_stalk, self.max_quantifier_sections
        )
    }
}
