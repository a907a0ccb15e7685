//! Per-material combustion properties and their per-cell resolution.

use std::collections::BTreeMap;

use crate::charring::CharParams;
use crate::occupancy::OccupancyGrid;

/// Combustion properties of one material class.
///
/// `beta`, `eps_c` and `t_ign` are optional; unset values fall back to the
/// global [`CharParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub burnable: bool,
    /// Thermal diffusivity, m²/s.
    pub beta: Option<f32>,
    /// Charring rate, 1/s.
    pub eps_c: Option<f32>,
    /// Ignition temperature, K.
    pub t_ign: Option<f32>,
    /// Linear RGB smoke color in [0, 1]³.
    pub smoke_color: [f32; 3],
}

impl Material {
    pub fn inert(name: &str) -> Self {
        Self {
            name: name.to_string(),
            burnable: false,
            beta: None,
            eps_c: None,
            t_ign: None,
            smoke_color: [0.5, 0.5, 0.5],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialTable {
    entries: BTreeMap<u32, Material>,
}

impl MaterialTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `material` under `id`, returning the previous entry if any.
    pub fn insert(&mut self, id: u32, material: Material) -> Option<Material> {
        self.entries.insert(id, material)
    }

    pub fn get(&self, id: u32) -> Option<&Material> {
        self.entries.get(&id)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Material)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }
}

/// Occupancy plus material properties resolved onto every cell.
///
/// Built once per scene so the solid-phase kernels never touch the table.
#[derive(Debug, Clone)]
pub struct SolidProps {
    pub occupancy: OccupancyGrid,
    /// Diffusivity per cell; 0 in air.
    pub beta: Vec<f32>,
    /// Charring rate per cell; 0 unless combustible.
    pub eps_c: Vec<f32>,
    /// Ignition threshold per cell; +inf unless combustible.
    pub t_ign: Vec<f32>,
    /// Smoke color per cell; meaningful on combustible cells.
    pub smoke_color: Vec<[f32; 3]>,
    pub beta_max: f32,
}

impl SolidProps {
    pub fn new(occupancy: OccupancyGrid, materials: &MaterialTable, params: &CharParams) -> Self {
        let n = occupancy.spec().cell_count();
        let mut beta = vec![0.0; n];
        let mut eps_c = vec![0.0; n];
        let mut t_ign = vec![f32::INFINITY; n];
        let mut smoke_color = vec![[0.0; 3]; n];
        for idx in 0..n {
            let Some(id) = occupancy.material(idx) else { continue };
            let m = materials.get(id);
            beta[idx] = m.and_then(|m| m.beta).unwrap_or(params.beta);
            if occupancy.is_combustible(idx) {
                eps_c[idx] = m.and_then(|m| m.eps_c).unwrap_or(params.eps_c);
                t_ign[idx] = m.and_then(|m| m.t_ign).unwrap_or(params.t_ign);
                smoke_color[idx] = m.map(|m| m.smoke_color).unwrap_or([0.5; 3]);
            }
        }
        let beta_max = beta.iter().copied().fold(0.0, f32::max);
        Self { occupancy, beta, eps_c, t_ign, smoke_color, beta_max }
    }
}
