//! Air/solid voxelization of a labeled point set.

use crate::grid::{GridError, GridSpec, Vec3};
use crate::material::MaterialTable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub position: Vec3,
    pub opacity: f32,
    pub material_id: u32,
}

/// Per-cell solid labels. A combustible cell is always occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    spec: GridSpec,
    material: Vec<Option<u32>>,
    combustible: Vec<bool>,
}

impl OccupancyGrid {
    /// All-air grid.
    pub fn empty(spec: GridSpec) -> Self {
        let n = spec.cell_count();
        Self { spec, material: vec![None; n], combustible: vec![false; n] }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn is_occupied(&self, idx: usize) -> bool {
        self.material[idx].is_some()
    }

    #[inline]
    pub fn is_combustible(&self, idx: usize) -> bool {
        self.combustible[idx]
    }

    #[inline]
    pub fn material(&self, idx: usize) -> Option<u32> {
        self.material[idx]
    }

    /// Marks a cell solid. `combustible` is taken as given.
    pub fn set_solid(&mut self, idx: usize, material_id: u32, combustible: bool) {
        self.material[idx] = Some(material_id);
        self.combustible[idx] = combustible;
    }

    pub fn occupied_count(&self) -> usize {
        self.material.iter().filter(|m| m.is_some()).count()
    }

    pub fn combustible_count(&self) -> usize {
        self.combustible.iter().filter(|&&c| c).count()
    }
}

/// Voxelizes `points`: a cell is occupied iff it contains at least one point
/// with opacity strictly above `opacity_threshold`.
///
/// The cell takes the material of its most opaque qualifying point (ties go
/// to the lowest material id) and is combustible iff any qualifying point's
/// material is burnable. Points outside the grid are ignored.
pub fn build_occupancy(
    points: &[LabeledPoint],
    spec: GridSpec,
    materials: &MaterialTable,
    opacity_threshold: f32,
) -> Result<OccupancyGrid, GridError> {
    if !(0.0..=1.0).contains(&opacity_threshold) {
        return Err(GridError::Threshold(opacity_threshold));
    }
    let n = spec.cell_count();
    let mut grid = OccupancyGrid::empty(spec);
    let mut best: Vec<f32> = vec![f32::NEG_INFINITY; n];

    for (index, p) in points.iter().enumerate() {
        if !p.position.iter().all(|c| c.is_finite()) {
            return Err(GridError::NonFinitePoint { index });
        }
        if !(0.0..=1.0).contains(&p.opacity) {
            return Err(GridError::Opacity { index, opacity: p.opacity });
        }
        let Some(material) = materials.get(p.material_id) else {
            return Err(GridError::UnknownMaterial { index, material_id: p.material_id });
        };
        if p.opacity <= opacity_threshold {
            continue;
        }
        let Some([i, j, k]) = spec.cell_of(&p.position) else { continue };
        let idx = spec.index(i, j, k);

        let replace = match grid.material[idx] {
            None => true,
            Some(cur) => p.opacity > best[idx] || (p.opacity == best[idx] && p.material_id < cur),
        };
        if replace {
            grid.material[idx] = Some(p.material_id);
            best[idx] = p.opacity;
        }
        if material.burnable {
            grid.combustible[idx] = true;
        }
    }
    Ok(grid)
}
