use serde::{Deserialize, Serialize};

use super::{DataError, SportConfig};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginConvention {
    /// Source origin at a field corner, axes pointing into the field.
    Corner,
    /// Source origin at the field center.
    Center,
}

/// How a provider lays out its coordinates.
///
/// The source extent spans the whole field in source units, so the map to
/// meters is `x' = x * L / extent_x - offset` (and likewise for `y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderSpec {
    pub id: String,
    pub extent: (f64, f64),
    pub origin: OriginConvention,
    /// Negate the `y` axis after scaling.
    #[serde(default)]
    pub flip_y: bool,
    /// Whether away-team coordinates arrive already mirrored per period.
    #[serde(default)]
    pub away_preflipped: bool,
}

impl ProviderSpec {
    /// Built-in providers: `metric`/`ufa`/`nba` (already centered meters),
    /// `statsbomb` (100 x 100 from a corner), `metric_corner`, `yards`.
    pub fn builtin(id: &str, config: &SportConfig) -> Result<ProviderSpec, DataError> {
        let field = (config.field_length, config.field_width);
        let (extent, origin) = match id.to_ascii_lowercase().as_str() {
            "metric" | "space" | "ufa" | "nba" => (field, OriginConvention::Center),
            "statsbomb" | "fifa_wc_2022" => ((100.0, 100.0), OriginConvention::Corner),
            "metric_corner" => (field, OriginConvention::Corner),
            "yards" | "ufa_yards" => (
                (config.field_length / 0.9144, config.field_width / 0.9144),
                OriginConvention::Corner,
            ),
            other => {
                return Err(DataError::Config(format!("unknown provider `{other}`")));
            }
        };
        Ok(ProviderSpec {
            id: id.to_string(),
            extent,
            origin,
            flip_y: false,
            away_preflipped: false,
        })
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let (ex, ey) = self.extent;
        if ex > 0.0 && ey > 0.0 && ex.is_finite() && ey.is_finite() {
            Ok(())
        } else {
            Err(DataError::Config(format!(
                "provider `{}` has a degenerate extent {:?}",
                self.id, self.extent
            )))
        }
    }

    pub fn normalize(&self, p: Vec2, config: &SportConfig) -> Vec2 {
        let sx = config.field_length / self.extent.0;
        let sy = config.field_width / self.extent.1;
        let (ox, oy) = match self.origin {
            OriginConvention::Corner => (config.half_length(), config.half_width()),
            OriginConvention::Center => (0.0, 0.0),
        };
        let y = p.y * sy - oy;
        Vec2::new(p.x * sx - ox, if self.flip_y { -y } else { y })
    }
}

/// Maps provider coordinates to meters, centered, `x` along the length.
pub fn normalize_coordinates(
    positions: &[Vec2],
    provider: &ProviderSpec,
    config: &SportConfig,
) -> Result<Vec<Vec2>, DataError> {
    provider.validate()?;
    Ok(positions.iter().map(|&p| provider.normalize(p, config)).collect())
}
