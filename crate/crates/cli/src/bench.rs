//! Data-reduction ratios for a configured geometry.

use std::fmt;

use foveate_core::cortex::cortical_size;
use foveate_core::retina::{field_of_view_ratio, reduction_ratio};

use crate::config::PipelineConfig;
use crate::error::Result;

/// Subsampling factor reported when none is configured.
pub const BENCH_SUBSAMPLE_FACTOR: usize = 2;
/// Gridded size reported when none is configured.
pub const BENCH_GRID_DIMS: (usize, usize) = (230, 345);

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub crop_size: usize,
    pub node_count: usize,
    pub cortical_dims: (usize, usize),
    pub crop_to_cortical: f64,
    /// Crop pixels per retina node.
    pub crop_to_nodes: f64,
    /// Inscribed-circle pixels per retina node.
    pub fov_to_nodes: f64,
    pub subsample_factor: usize,
    pub subsampled_dims: (usize, usize),
    pub crop_to_subsampled: f64,
    pub grid_dims: (usize, usize),
    pub crop_to_gridded: f64,
}

pub fn bench_reduction(cfg: &PipelineConfig) -> Result<BenchReport> {
    let crop = cfg.crop_size * cfg.crop_size;
    let ratio = |dims: (usize, usize)| crop as f64 / cortical_size(dims, 1) as f64;
    let factor = cfg.subsample_factor.unwrap_or(BENCH_SUBSAMPLE_FACTOR);
    let subsampled_dims = (cfg.cortical_dims.0 / factor, cfg.cortical_dims.1 / factor);
    let grid_dims = cfg.grid_dims.unwrap_or(BENCH_GRID_DIMS);
    Ok(BenchReport {
        crop_size: cfg.crop_size,
        node_count: cfg.node_count,
        cortical_dims: cfg.cortical_dims,
        crop_to_cortical: ratio(cfg.cortical_dims),
        crop_to_nodes: reduction_ratio((cfg.crop_size, cfg.crop_size, 3), cfg.node_count, 3)?,
        fov_to_nodes: field_of_view_ratio(cfg.retina_radius_px, cfg.node_count)?,
        subsample_factor: factor,
        subsampled_dims,
        crop_to_subsampled: ratio(subsampled_dims),
        grid_dims,
        crop_to_gridded: ratio(grid_dims),
    })
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let crop = self.crop_size * self.crop_size;
        let size = |(r, c): (usize, usize)| r * c;
        writeln!(f, "crop {0}x{0} = {1} px, retina {2} nodes", self.crop_size, crop, self.node_count)?;
        writeln!(
            f,
            "crop/cortical    {}/{} = {:.3}  ({}x{})",
            crop,
            size(self.cortical_dims),
            self.crop_to_cortical,
            self.cortical_dims.0,
            self.cortical_dims.1
        )?;
        writeln!(f, "crop/nodes       {}/{} = {:.2}", crop, self.node_count, self.crop_to_nodes)?;
        writeln!(f, "fov/nodes        {:.2}  (inscribed circle)", self.fov_to_nodes)?;
        writeln!(
            f,
            "crop/subsampled  {}/{} = {:.2}  (factor {}, {}x{})",
            crop,
            size(self.subsampled_dims),
            self.crop_to_subsampled,
            self.subsample_factor,
            self.subsampled_dims.0,
            self.subsampled_dims.1
        )?;
        write!(
            f,
            "crop/gridded     {}/{} = {:.2}  ({}x{})",
            crop,
            size(self.grid_dims),
            self.crop_to_gridded,
            self.grid_dims.0,
            self.grid_dims.1
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry() {
        let r = bench_reduction(&PipelineConfig::default()).unwrap();
        assert_eq!(r.crop_to_cortical, 857_476.0 / 300_048.0);
        assert_eq!(r.subsampled_dims, (199, 376));
        assert_eq!(r.crop_to_subsampled, 857_476.0 / 74_824.0);
        assert_eq!(r.crop_to_nodes, 857_476.0 / 50_000.0);
        assert_eq!(r.crop_to_gridded, 857_476.0 / 79_350.0);
        let text = r.to_string();
        assert!(text.contains("2.858"), "{text}");
        assert!(text.contains("11.46"), "{text}");
        assert!(text.contains("10.81"), "{text}");
        assert!(text.contains("17.15"), "{text}");
        assert!(text.contains("13.47"), "{text}");
    }
}
