//! Multi-threaded grid and surface evaluation.
//!
//! Every cell derives its own seeds from the run seed and its sizes, so
//! results are identical for any thread count, including one.

use nrstat_core::dimension::{assemble_surface, surface_cell, validate_surface, IdSurface, SurfaceParams};
use nrstat_core::moments::{assemble_grid, selectivity_cell, sparseness_cell, validate_grid, GridParams, KurtosisGrid};
use nrstat_core::{ResponseMatrix, Result};
use rayon::prelude::*;

/// Builds a pool with `threads` workers; `0` uses rayon's default.
pub fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction")
}

pub fn kurtosis_grid(m: &ResponseMatrix, p: &GridParams, threads: usize) -> Result<KurtosisGrid> {
    validate_grid(m, p)?;
    pool(threads).install(|| {
        let selectivity = p
            .image_sizes
            .par_iter()
            .map(|&s| selectivity_cell(m, s, p.repeats, p.seed))
            .collect::<Result<Vec<_>>>()?;
        let sparseness = p
            .neuron_sizes
            .par_iter()
            .map(|&n| sparseness_cell(m, n, p.repeats, p.seed, p.normalized))
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble_grid(p, selectivity, sparseness))
    })
}

pub fn id_surface(m: &ResponseMatrix, p: &SurfaceParams, threads: usize) -> Result<IdSurface> {
    validate_surface(m, p)?;
    let pairs: Vec<(usize, usize)> = p
        .image_sizes
        .iter()
        .flat_map(|&s| p.neuron_sizes.iter().map(move |&n| (s, n)))
        .collect();
    let cells = pool(threads).install(|| {
        pairs
            .par_iter()
            .map(|&(s, n)| surface_cell(m, s, n, p))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(assemble_surface(p, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nrstat_core::dimension::IdConfig;
    use nrstat_core::synthetic::{generate, SyntheticKind, SyntheticSpec};

    #[test]
    fn matches_serial_core() {
        let m = generate(&SyntheticSpec::new(
            SyntheticKind::PlantedRank { rank: 3, noise: 0.05 },
            60,
            30,
            2,
        ))
        .unwrap();
        let p = SurfaceParams {
            image_sizes: vec![20, 40, 60],
            neuron_sizes: vec![10, 30],
            repeats: 3,
            seed: 9,
            config: IdConfig::default(),
        };
        let serial = nrstat_core::dimension::id_surface(&m, &p).unwrap();
        assert_eq!(id_surface(&m, &p, 1).unwrap(), serial);
        assert_eq!(id_surface(&m, &p, 4).unwrap(), serial);

        let g = GridParams {
            image_sizes: vec![10, 60],
            neuron_sizes: vec![5, 30],
            repeats: 4,
            seed: 1,
            normalized: true,
        };
        let serial = nrstat_core::moments::kurtosis_grid(&m, &g).unwrap();
        assert_eq!(kurtosis_grid(&m, &g, 3).unwrap(), serial);
    }
}
