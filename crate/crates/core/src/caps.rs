use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Hard limits for the exhaustive routines (cycle/path enumeration, vertex
/// enumeration, tree unrolling) and for breakpoint growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeCaps {
    pub enum_vertices: usize,
    pub enum_objects: usize,
    pub oracle_edges: usize,
    pub tree_nodes: usize,
    pub breakpoints: usize,
}

impl Default for SizeCaps {
    fn default() -> Self {
        SizeCaps {
            enum_vertices: 12,
            enum_objects: 1_000_000,
            oracle_edges: 16,
            tree_nodes: 100_000,
            breakpoints: 100_000,
        }
    }
}

pub const SIZE_CAPS_ENV: &str = "GMNF_SIZE_CAPS";

impl SizeCaps {
    /// Parses a `key=value,key=value` override list on top of the defaults.
    ///
    /// Recognized keys: `vertices`, `objects`, `oracle_edges`, `tree_nodes`,
    /// `breakpoints`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut caps = SizeCaps::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("size cap entry `{item}` is not key=value")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("size cap `{key}` has a non-integer value")))?;
            match key.trim() {
                "vertices" => caps.enum_vertices = value,
                "objects" => caps.enum_objects = value,
                "oracle_edges" => caps.oracle_edges = value,
                "tree_nodes" => caps.tree_nodes = value,
                "breakpoints" => caps.breakpoints = value,
                other => return Err(Error::Parse(format!("unknown size cap `{other}`"))),
            }
        }
        Ok(caps)
    }

    /// Process-wide caps: defaults, overridden by `GMNF_SIZE_CAPS` if set.
    /// A malformed variable falls back to the defaults.
    pub fn global() -> &'static SizeCaps {
        static CAPS: OnceLock<SizeCaps> = OnceLock::new();
        CAPS.get_or_init(|| match std::env::var(SIZE_CAPS_ENV) {
            Ok(spec) => SizeCaps::parse(&spec).unwrap_or_default(),
            Err(_) => SizeCaps::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides_only_named_keys() {
        let caps = SizeCaps::parse("vertices=8, breakpoints=50").unwrap();
        assert_eq!(caps.enum_vertices, 8);
        assert_eq!(caps.breakpoints, 50);
        assert_eq!(caps.oracle_edges, SizeCaps::default().oracle_edges);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(SizeCaps::parse("vertices").is_err());
        assert!(SizeCaps::parse("vertices=x").is_err());
        assert!(SizeCaps::parse("colors=3").is_err());
    }
}
