//! Optional TOML configuration for layout and rendering.
//!
//! ```toml
//! [layout]
//! spring_constant = 100.0   # K
//! max_iterations = 1000     # C
//! epsilon = 0.1
//! display_diameter = 72.11  # L0 in cm; defaults to the sheet diagonal
//! seed = 7
//!
//! [render]
//! width = 800.0
//! height = 600.0
//! stroke_min = 0.5
//! stroke_max = 6.0
//! opacity_min = 0.15
//! opacity_max = 1.0
//! ```

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;
use sensograph::{LayoutParams, RenderStyle, Sheet};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutOverrides {
    pub spring_constant: Option<f64>,
    pub max_iterations: Option<usize>,
    pub epsilon: Option<f64>,
    pub display_diameter: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub layout: LayoutOverrides,
    #[serde(default)]
    pub render: RenderStyle,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Defaults for `sheet`, then file overrides, then the command-line seed.
    pub fn layout_params(&self, sheet: &Sheet, seed: Option<u64>) -> LayoutParams {
        let base = LayoutParams::for_sheet(sheet);
        let o = &self.layout;
        LayoutParams {
            spring_constant: o.spring_constant.unwrap_or(base.spring_constant),
            max_iterations: o.max_iterations.unwrap_or(base.max_iterations),
            epsilon: o.epsilon.unwrap_or(base.epsilon),
            display_diameter: o.display_diameter.unwrap_or(base.display_diameter),
            seed: seed.or(o.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_merge_over_sheet_defaults() {
        let cfg: Config = toml::from_str("[layout]\nepsilon = 0.01\nseed = 3\n[render]\nwidth = 400.0\n").unwrap();
        let sheet = Sheet::new(30.0, 40.0).unwrap();
        let p = cfg.layout_params(&sheet, None);
        assert_eq!(p.epsilon, 0.01);
        assert_eq!(p.display_diameter, 50.0);
        assert_eq!(p.spring_constant, 100.0);
        assert_eq!(p.seed, Some(3));
        assert_eq!(cfg.layout_params(&sheet, Some(9)).seed, Some(9));
        assert_eq!(cfg.render.width, 400.0);
        assert_eq!(cfg.render.height, RenderStyle::default().height);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[layout]\nspring = 1.0\n").is_err());
    }
}
