use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ScenarioParams;
use crate::error::Result;

/// A point in the deployment square, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// UBS and UE positions of a single drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub ubs_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub params: ScenarioParams,
}

impl Topology {
    pub fn num_ubs(&self) -> usize {
        self.ubs_positions.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ue_positions.len()
    }
}

/// Drops `M` UBSs and then `K` UEs uniformly over the square.
///
/// The ChaCha stream 0 of `params.seed` drives the positions, so equal seeds
/// produce identical topologies.
pub fn generate_topology(params: &ScenarioParams) -> Result<Topology> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let side = params.area_side;
    let draw = |rng: &mut ChaCha8Rng| Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side));
    let ubs_positions = (0..params.m).map(|_| draw(&mut rng)).collect();
    let ue_positions = (0..params.k).map(|_| draw(&mut rng)).collect();
    Ok(Topology {
        ubs_positions,
        ue_positions,
        params: params.clone(),
    })
}

/// Distance on the torus obtained by wrapping the square around both axes.
pub fn wrap_distance(a: Point, b: Point, side: f64) -> f64 {
    let wrap = |d: f64| {
        let d = d.abs() % side;
        d.min(side - d)
    };
    wrap(a.x - b.x).hypot(wrap(a.y - b.y))
}
