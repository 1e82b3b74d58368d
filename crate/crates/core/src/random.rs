//! Random connected ribbon graphs for property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ribbon::{build_graph, RibbonGraph};

#[derive(Clone, Copy, Debug)]
pub struct RandomGraphParams {
    pub max_vertices: usize,
    pub max_extra_edges: usize,
    pub max_legs: usize,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        RandomGraphParams {
            max_vertices: 4,
            max_extra_edges: 3,
            max_legs: 3,
        }
    }
}

/// A connected graph with at least one leg. Self-loops, multi-edges and
/// low-valence vertices are all allowed; rotations are uniformly shuffled.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, params: RandomGraphParams) -> RibbonGraph {
    let nv = rng.gen_range(1..=params.max_vertices.max(1));
    let mut ends: Vec<(usize, usize)> = Vec::new();
    for v in 1..nv {
        ends.push((rng.gen_range(0..v), v));
    }
    for _ in 0..rng.gen_range(0..=params.max_extra_edges) {
        ends.push((rng.gen_range(0..nv), rng.gen_range(0..nv)));
    }
    let nlegs = rng.gen_range(1..=params.max_legs.max(1));

    let mut rot: Vec<Vec<u32>> = vec![Vec::new(); nv];
    let mut next = 0u32;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut pairs = Vec::new();
    for (a, b) in ends {
        let (da, db) = (fresh(), fresh());
        rot[a].push(da);
        rot[b].push(db);
        pairs.push((da, db));
    }
    let mut legs = Vec::new();
    for k in 1..=nlegs {
        let d = fresh();
        rot[rng.gen_range(0..nv)].push(d);
        legs.push((k, d));
    }
    for cyc in rot.iter_mut() {
        cyc.shuffle(rng);
    }
    build_graph("random", &rot, &pairs, &legs).expect("generator produces valid graphs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_graphs_are_connected() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let g = random_graph(&mut rng, RandomGraphParams::default());
            assert_eq!(g.vertex_components().1, 1);
            assert!(g.num_legs() >= 1);
        }
    }
}
