use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Vec2;
use crate::space_data::SportConfig;

/// Regular lattice of cells tiling the field, row-major (`index = iy * nx + ix`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// meters covered along x
    pub length: f64,
    /// meters covered along y
    pub width: f64,
    /// `true` marks a cell that is skipped.
    pub mask: Option<Vec<bool>>,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, length: f64, width: f64) -> Result<Self, ModelError> {
        if nx == 0 || ny == 0 {
            return Err(ModelError::Config(format!("grid {nx}x{ny} has no cells")));
        }
        if !(length > 0.0 && width > 0.0) {
            return Err(ModelError::Config("grid extent must be positive".into()));
        }
        Ok(GridSpec {
            nx,
            ny,
            length,
            width,
            mask: None,
        })
    }

    pub fn for_field(config: &SportConfig, nx: usize, ny: usize) -> Result<Self, ModelError> {
        Self::new(nx, ny, config.field_length, config.field_width)
    }

    /// The sport's default resolution.
    pub fn default_for(config: &SportConfig) -> Result<Self, ModelError> {
        Self::for_field(config, config.grid.0, config.grid.1)
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self, ModelError> {
        if mask.len() != self.len() {
            return Err(ModelError::GridMismatch(format!(
                "mask has {} entries for {} cells",
                mask.len(),
                self.len()
            )));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_width(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.width / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_width() * self.cell_height()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    /// Cell center. Computed from the offset to the lattice midpoint, so the
    /// centers of point-mirrored cells are exact negations of each other.
    pub fn center(&self, index: usize) -> Vec2 {
        let (ix, iy) = self.coords(index);
        Vec2::new(
            (ix as f64 + 0.5 - self.nx as f64 / 2.0) * self.cell_width(),
            (iy as f64 + 0.5 - self.ny as f64 / 2.0) * self.cell_height(),
        )
    }

    pub fn centers(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.len()).map(|i| self.center(i))
    }

    /// Index of the cell reflected through the field center.
    pub fn mirror_index(&self, index: usize) -> usize {
        let (ix, iy) = self.coords(index);
        self.index(self.nx - 1 - ix, self.ny - 1 - iy)
    }

    /// Index of the cell reflected across the long axis (`y -> -y`).
    pub fn reflect_y_index(&self, index: usize) -> usize {
        let (ix, iy) = self.coords(index);
        self.index(ix, self.ny - 1 - iy)
    }

    pub fn is_masked(&self, index: usize) -> bool {
        self.mask.as_ref().is_some_and(|m| m[index])
    }

    pub fn unmasked(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| !self.is_masked(i))
    }

    /// Cell containing `p`, clamped to the lattice.
    pub fn locate(&self, p: Vec2) -> usize {
        let fx = (p.x / self.cell_width() + self.nx as f64 / 2.0).floor();
        let fy = (p.y / self.cell_height() + self.ny as f64 / 2.0).floor();
        let ix = fx.clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = fy.clamp(0.0, (self.ny - 1) as f64) as usize;
        self.index(ix, iy)
    }

    pub fn same_geometry(&self, other: &GridSpec) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.length == other.length && self.width == other.width
    }
}
