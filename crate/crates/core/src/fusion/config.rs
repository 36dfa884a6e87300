use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    /// Attach at the top midpoint of the front or rear face.
    HeadTailSide,
    /// Attach at the top midpoint of the facing lateral face.
    BodySide,
    /// Attach a copy at both facing faces.
    TwoSides,
    /// Attach at the top corner shared by the two facing faces.
    CornerPoint,
}

impl FusionMode {
    pub const ALL: [FusionMode; 4] = [
        FusionMode::TwoSides,
        FusionMode::BodySide,
        FusionMode::HeadTailSide,
        FusionMode::CornerPoint,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FusionMode::HeadTailSide => "head_tail_side",
            FusionMode::BodySide => "body_side",
            FusionMode::TwoSides => "two_sides",
            FusionMode::CornerPoint => "corner_point",
        }
    }
}

impl fmt::Display for FusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "head_tail_side" | "head_tail" => Ok(FusionMode::HeadTailSide),
            "body_side" | "body" => Ok(FusionMode::BodySide),
            "two_sides" => Ok(FusionMode::TwoSides),
            "corner_point" | "corner" => Ok(FusionMode::CornerPoint),
            other => Err(Error::InvalidConfig(format!("unknown fusion mode {other:?}"))),
        }
    }
}

pub const MAX_DENSITY: f64 = 0.5;
pub const MAX_SPRAY_ANGLE_DEG: f64 = 40.0;

/// The attack's decision variables: fusion mode, horizontal and vertical
/// density limits (fractions of the angular bin pitch) and spray angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub mode: FusionMode,
    pub d_h: f64,
    pub d_v: f64,
    pub spray_angle_deg: f64,
}

pub fn check_density(name: &str, d: f64) -> Result<()> {
    if !(0.0..=MAX_DENSITY).contains(&d) {
        return Err(Error::InvalidConfig(format!("{name} = {d} outside [0, {MAX_DENSITY}]")));
    }
    Ok(())
}

pub fn check_angle(angle: f64) -> Result<()> {
    if !(-MAX_SPRAY_ANGLE_DEG..=MAX_SPRAY_ANGLE_DEG).contains(&angle) {
        return Err(Error::InvalidConfig(format!(
            "spray angle {angle} deg outside [-{MAX_SPRAY_ANGLE_DEG}, {MAX_SPRAY_ANGLE_DEG}]"
        )));
    }
    Ok(())
}

impl FusionConfig {
    pub fn new(mode: FusionMode, d_h: f64, d_v: f64, spray_angle_deg: f64) -> Result<Self> {
        let cfg = Self {
            mode,
            d_h,
            d_v,
            spray_angle_deg,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_density("d_h", self.d_h)?;
        check_density("d_v", self.d_v)?;
        check_angle(self.spray_angle_deg)
    }

    /// Parses `key = value` lines (`mode`, `d_h`, `d_v`, `spray_angle_deg`).
    /// Values may be quoted; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut mode = None;
        let (mut d_h, mut d_v, mut angle) = (None, None, 0.0);
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected key = value, got {line:?}")))?;
            let value = value.trim().trim_matches('"');
            let number = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("{}: bad number {value:?}", key.trim())))
            };
            match key.trim() {
                "mode" => mode = Some(value.parse()?),
                "d_h" => d_h = Some(number()?),
                "d_v" => d_v = Some(number()?),
                "spray_angle_deg" => angle = number()?,
                other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::InvalidConfig(format!("missing {k}"));
        Self::new(
            mode.ok_or_else(|| missing("mode"))?,
            d_h.ok_or_else(|| missing("d_h"))?,
            d_v.ok_or_else(|| missing("d_v"))?,
            angle,
        )
    }

    pub fn render(&self) -> String {
        format!(
            "mode = \"{}\"\nd_h = {}\nd_v = {}\nspray_angle_deg = {}\n",
            self.mode, self.d_h, self.d_v, self.spray_angle_deg
        )
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::malformed(path, e.to_string()))
    }
}

/// Dataset-specific density ceilings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetProfile {
    /// `d_v` in `[0, 0.004]`, `d_h` in `[0, 0.5]`.
    Kitti,
    /// Both in `[0, 0.5]`.
    NuScenes,
}

impl DatasetProfile {
    pub fn max_d_v(&self) -> f64 {
        match self {
            DatasetProfile::Kitti => 0.004,
            DatasetProfile::NuScenes => MAX_DENSITY,
        }
    }

    pub fn max_d_h(&self) -> f64 {
        MAX_DENSITY
    }

    pub fn clamp(&self, cfg: FusionConfig) -> FusionConfig {
        FusionConfig {
            d_h: cfg.d_h.min(self.max_d_h()),
            d_v: cfg.d_v.min(self.max_d_v()),
            ..cfg
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_roundtrip() {
        let cfg = FusionConfig::new(FusionMode::TwoSides, 0.5, 0.004, -10.0).unwrap();
        assert_eq!(FusionConfig::parse(&cfg.render()).unwrap(), cfg);
        let loose = FusionConfig::parse("mode=body_side\nd_h=0.25 # comment\nd_v=0.002\n").unwrap();
        assert_eq!(loose.mode, FusionMode::BodySide);
        assert_eq!(loose.spray_angle_deg, 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(FusionConfig::new(FusionMode::BodySide, 0.6, 0.0, 0.0).is_err());
        assert!(FusionConfig::new(FusionMode::BodySide, 0.1, -0.1, 0.0).is_err());
        assert!(FusionConfig::new(FusionMode::BodySide, 0.1, 0.1, 45.0).is_err());
        assert!(FusionConfig::parse("mode = sideways\nd_h = 0\nd_v = 0").is_err());
        assert!(FusionConfig::parse("mode = body_side\nd_h = 0").is_err());
        assert!(FusionConfig::parse("mode = body_side\nd_h = 0\nd_v = 0\ncolor = red").is_err());
    }

    #[test]
    fn kitti_clamps_vertical_density() {
        let cfg = FusionConfig::new(FusionMode::TwoSides, 0.5, 0.08, 0.0).unwrap();
        assert_eq!(DatasetProfile::Kitti.clamp(cfg).d_v, 0.004);
        assert_eq!(DatasetProfile::NuScenes.clamp(cfg).d_v, 0.08);
    }
}
