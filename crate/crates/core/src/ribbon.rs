//! Ribbon graphs as rotation systems, face tracing and index numbers.
//!
//! Darts are stored densely. External leg `k` gets a marker dart `D + k - 1`
//! which is paired with the leg's dart and fixed by the rotation, so the face
//! permutation `phi = sigma . theta` passes through the marker exactly where the
//! leg leaves the graph.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Dart(pub u32);

impl fmt::Display for Dart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("dart {0} appears more than once")]
    DuplicateDart(Dart),
    #[error("dart {0} is neither in an internal edge nor an external leg")]
    UnpairedDart(Dart),
    #[error("dart {0} is paired with itself")]
    SelfPairedDart(Dart),
    #[error("dart {0} is paired but does not occur at any vertex")]
    UnknownDart(Dart),
    #[error("external leg numbers must be 1..n without gaps; leg {0} is missing")]
    LegNumberGap(usize),
    #[error("external leg {0} is declared twice")]
    DuplicateLeg(usize),
    #[error("vertex {0} has no darts")]
    EmptyVertex(usize),
    #[error("index number {0} is not an unbroken face")]
    NotUnbrokenFace(u32),
    #[error("face tracing inconsistency in component {component}: 2g = {two_g}")]
    NonOrientableInconsistency { component: usize, two_g: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pairing {
    Edge(usize),
    Leg(usize),
}

#[derive(Clone, Debug)]
pub struct RibbonGraph {
    pub name: String,
    vertices: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    legs: Vec<usize>,
    dart_ids: Vec<u32>,
    vertex_of: Vec<usize>,
    pos_in_vertex: Vec<usize>,
    pairing: Vec<Pairing>,
    pub dart_labels: Vec<String>,
    pub vertex_labels: Vec<String>,
}

/// Validate rotation and pairing data. `external_legs` holds `(leg number, dart)`.
pub fn build_graph(
    name: &str,
    rotation: &[Vec<u32>],
    internal_pairs: &[(u32, u32)],
    external_legs: &[(usize, u32)],
) -> Result<RibbonGraph, GraphError> {
    let mut dense: HashMap<u32, usize> = HashMap::new();
    let mut dart_ids = Vec::new();
    let mut vertices = Vec::with_capacity(rotation.len());
    let mut vertex_of = Vec::new();
    let mut pos_in_vertex = Vec::new();
    for (v, cyc) in rotation.iter().enumerate() {
        if cyc.is_empty() {
            return Err(GraphError::EmptyVertex(v));
        }
        let mut darts = Vec::with_capacity(cyc.len());
        for (i, &id) in cyc.iter().enumerate() {
            if dense.contains_key(&id) {
                return Err(GraphError::DuplicateDart(Dart(id)));
            }
            let h = dart_ids.len();
            dense.insert(id, h);
            dart_ids.push(id);
            vertex_of.push(v);
            pos_in_vertex.push(i);
            darts.push(h);
        }
        vertices.push(darts);
    }

    let nd = dart_ids.len();
    let mut pairing: Vec<Option<Pairing>> = vec![None; nd];
    let lookup = |id: u32| dense.get(&id).copied().ok_or(GraphError::UnknownDart(Dart(id)));

    let mut edges = Vec::with_capacity(internal_pairs.len());
    for &(a, b) in internal_pairs {
        if a == b {
            return Err(GraphError::SelfPairedDart(Dart(a)));
        }
        let (ha, hb) = (lookup(a)?, lookup(b)?);
        for (h, id) in [(ha, a), (hb, b)] {
            if pairing[h].is_some() {
                return Err(GraphError::DuplicateDart(Dart(id)));
            }
            pairing[h] = Some(Pairing::Edge(edges.len()));
        }
        edges.push((ha, hb));
    }

    let n = external_legs.len();
    let mut legs = vec![usize::MAX; n];
    for &(k, d) in external_legs {
        if k == 0 || k > n {
            // a number outside 1..n means some number inside is missing
            let missing = (1..=n).find(|j| !external_legs.iter().any(|&(x, _)| x == *j));
            return Err(GraphError::LegNumberGap(missing.unwrap_or(k)));
        }
        if legs[k - 1] != usize::MAX {
            return Err(GraphError::DuplicateLeg(k));
        }
        let h = lookup(d)?;
        if pairing[h].is_some() {
            return Err(GraphError::DuplicateDart(Dart(d)));
        }
        pairing[h] = Some(Pairing::Leg(k - 1));
        legs[k - 1] = h;
    }

    let pairing = pairing
        .into_iter()
        .enumerate()
        .map(|(h, p)| p.ok_or(GraphError::UnpairedDart(Dart(dart_ids[h]))))
        .collect::<Result<Vec<_>, _>>()?;

    let dart_labels = dart_ids.iter().map(|d| format!("d{d}")).collect();
    let vertex_labels = (0..vertices.len()).map(|v| format!("v{v}")).collect();
    Ok(RibbonGraph {
        name: name.to_string(),
        vertices,
        edges,
        legs,
        dart_ids,
        vertex_of,
        pos_in_vertex,
        pairing,
        dart_labels,
        vertex_labels,
    })
}

impl RibbonGraph {
    pub fn num_darts(&self) -> usize {
        self.dart_ids.len()
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }
    pub fn degree(&self, v: usize) -> usize {
        self.vertices[v].len()
    }
    /// Dense darts of vertex `v` in counterclockwise order.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.vertices[v]
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    /// Dense dart of leg `k` (1-based).
    pub fn leg_dart(&self, k: usize) -> usize {
        self.legs[k - 1]
    }
    pub fn dart_id(&self, h: usize) -> Dart {
        Dart(self.dart_ids[h])
    }
    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_of[h]
    }
    /// Edge containing dart `h`, if internal.
    pub fn edge_of(&self, h: usize) -> Option<usize> {
        match self.pairing[h] {
            Pairing::Edge(e) => Some(e),
            Pairing::Leg(_) => None,
        }
    }
    /// Leg number (1-based) of dart `h`, if external.
    pub fn leg_of(&self, h: usize) -> Option<usize> {
        match self.pairing[h] {
            Pairing::Leg(k) => Some(k + 1),
            Pairing::Edge(_) => None,
        }
    }
    pub fn sigma(&self, h: usize) -> usize {
        let v = &self.vertices[self.vertex_of[h]];
        v[(self.pos_in_vertex[h] + 1) % v.len()]
    }
    pub fn sigma_inv(&self, h: usize) -> usize {
        let v = &self.vertices[self.vertex_of[h]];
        v[(self.pos_in_vertex[h] + v.len() - 1) % v.len()]
    }
    /// Partner of a dart in the augmented graph (markers included).
    fn theta_aug(&self, h: usize) -> usize {
        let nd = self.num_darts();
        if h >= nd {
            return self.legs[h - nd];
        }
        match self.pairing[h] {
            Pairing::Edge(e) => {
                let (a, b) = self.edges[e];
                if a == h {
                    b
                } else {
                    a
                }
            }
            Pairing::Leg(k) => nd + k,
        }
    }
    fn sigma_aug(&self, h: usize) -> usize {
        if h >= self.num_darts() {
            h
        } else {
            self.sigma(h)
        }
    }
    /// Face permutation on the augmented dart set.
    fn phi(&self, h: usize) -> usize {
        self.sigma_aug(self.theta_aug(h))
    }

    /// Connected component of every vertex (through internal edges).
    pub fn vertex_components(&self) -> (Vec<usize>, usize) {
        let nv = self.num_vertices();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, self.vertex_of[a]), find(&mut parent, self.vertex_of[b]));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut label = vec![usize::MAX; nv];
        let mut comp = vec![0; nv];
        let mut count = 0;
        for v in 0..nv {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            comp[v] = label[r];
        }
        (comp, count)
    }

    /// Rebuild with darts renamed by `f`; rotation, pairing and leg order are kept.
    pub fn relabeled(&self, f: impl Fn(u32) -> u32) -> Result<RibbonGraph, GraphError> {
        let rot: Vec<Vec<u32>> = self
            .vertices
            .iter()
            .map(|c| c.iter().map(|&h| f(self.dart_ids[h])).collect())
            .collect();
        let pairs: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(a, b)| (f(self.dart_ids[a]), f(self.dart_ids[b])))
            .collect();
        let legs: Vec<(usize, u32)> = self
            .legs
            .iter()
            .enumerate()
            .map(|(k, &h)| (k + 1, f(self.dart_ids[h])))
            .collect();
        build_graph(&self.name, &rot, &pairs, &legs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Slot {
    External { leg: usize },
    Running { face: usize },
    Fixed { face: usize, value: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaceKind {
    Broken,
    Unbroken { index: u32 },
    ArtificiallyBroken { index: u32, value: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    /// Real darts in orbit order.
    pub darts: Vec<usize>,
    /// Legs whose marker lies on this face.
    pub legs: Vec<usize>,
    pub kind: FaceKind,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceStructure {
    pub n: usize,
    pub faces: Vec<Face>,
    pub face_of_dart: Vec<usize>,
    /// Index number of the corner preceding each dart, which is also the
    /// index on that dart's side of its edge.
    pub index_of_dart: Vec<u32>,
    /// `slots[i - 1]` describes index number `i`.
    pub slots: Vec<Slot>,
}

impl FaceStructure {
    pub fn slot(&self, index: u32) -> Slot {
        self.slots[index as usize - 1]
    }
    pub fn num_indices(&self) -> usize {
        self.slots.len()
    }
    /// Index numbers still summed over, ascending.
    pub fn running_indices(&self) -> Vec<u32> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Slot::Running { .. }))
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }
    pub fn u(&self) -> usize {
        self.faces
            .iter()
            .filter(|f| matches!(f.kind, FaceKind::Unbroken { .. }))
            .count()
    }
    pub fn b(&self) -> usize {
        self.faces.len() - self.u()
    }
    pub fn is_running(&self, index: u32) -> bool {
        matches!(self.slot(index), Slot::Running { .. })
    }
    /// Face carrying an unbroken or artificially broken index number.
    pub fn face_of_index(&self, index: u32) -> Option<usize> {
        match self.slot(index) {
            Slot::Running { face } | Slot::Fixed { face, .. } => Some(face),
            Slot::External { .. } => None,
        }
    }
}

pub fn trace_faces(g: &RibbonGraph) -> FaceStructure {
    let nd = g.num_darts();
    let n = g.num_legs();
    let (vcomp, _) = g.vertex_components();
    let total = nd + n;
    let mut seen = vec![false; total];
    let mut faces = Vec::new();
    let mut face_of_dart = vec![usize::MAX; nd];
    let mut index_of_dart = vec![0u32; nd];
    let mut slots: Vec<Slot> = (1..=n).map(|leg| Slot::External { leg }).collect();

    for start in 0..total {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut h = start;
        loop {
            seen[h] = true;
            orbit.push(h);
            h = g.phi(h);
            if h == start {
                break;
            }
        }
        let fid = faces.len();
        let first_marker = orbit.iter().position(|&x| x >= nd);
        let (darts, legs, kind) = match first_marker {
            None => {
                let index = slots.len() as u32 + 1;
                slots.push(Slot::Running { face: fid });
                for &x in &orbit {
                    index_of_dart[x] = index;
                }
                (orbit, Vec::new(), FaceKind::Unbroken { index })
            }
            Some(p) => {
                orbit.rotate_left(p);
                let mut current = 0u32;
                let mut darts = Vec::new();
                let mut legs = Vec::new();
                for &x in &orbit {
                    if x >= nd {
                        let k = x - nd + 1;
                        legs.push(k);
                        current = k as u32;
                    } else {
                        index_of_dart[x] = current;
                        darts.push(x);
                    }
                }
                (darts, legs, FaceKind::Broken)
            }
        };
        for &x in &darts {
            face_of_dart[x] = fid;
        }
        let component = vcomp[g.vertex_of(darts[0])];
        faces.push(Face {
            darts,
            legs,
            kind,
            component,
        });
    }

    FaceStructure {
        n,
        faces,
        face_of_dart,
        index_of_dart,
        slots,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexAssignment {
    pub alpha: Vec<Vec<u32>>,
    pub beta: Vec<(u32, u32)>,
}

pub fn index_assignment(g: &RibbonGraph, faces: &FaceStructure) -> IndexAssignment {
    let alpha = (0..g.num_vertices())
        .map(|v| g.rotation(v).iter().map(|&h| faces.index_of_dart[h]).collect())
        .collect();
    let beta = g
        .edges()
        .iter()
        .map(|&(a, b)| (faces.index_of_dart[a], faces.index_of_dart[b]))
        .collect();
    IndexAssignment { alpha, beta }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ComponentProfile {
    pub v: usize,
    pub e: usize,
    pub f: usize,
    pub b: usize,
    pub u: usize,
    pub l: usize,
    pub g: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GraphProfile {
    pub n: usize,
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "E")]
    pub e: usize,
    #[serde(rename = "F")]
    pub f: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "V_fi")]
    pub v_fi: usize,
    #[serde(rename = "E_fi")]
    pub e_fi: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub g: usize,
    pub min_valence: usize,
    pub components: Vec<ComponentProfile>,
}

/// Vertices whose corners all carry running indices.
pub fn fully_internal_vertices(g: &RibbonGraph, faces: &FaceStructure) -> Vec<usize> {
    (0..g.num_vertices())
        .filter(|&v| g.rotation(v).iter().all(|&h| faces.is_running(faces.index_of_dart[h])))
        .collect()
}

/// Edges whose two sides both carry running indices.
pub fn fully_internal_edges(g: &RibbonGraph, faces: &FaceStructure) -> Vec<usize> {
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, &(a, b))| {
            faces.is_running(faces.index_of_dart[a]) && faces.is_running(faces.index_of_dart[b])
        })
        .map(|(e, _)| e)
        .collect()
}

pub fn profile(g: &RibbonGraph, faces: &FaceStructure) -> Result<GraphProfile, GraphError> {
    let (vcomp, ncomp) = g.vertex_components();
    let mut comps = vec![ComponentProfile::default(); ncomp];
    for v in 0..g.num_vertices() {
        comps[vcomp[v]].v += 1;
    }
    for &(a, _) in g.edges() {
        comps[vcomp[g.vertex_of(a)]].e += 1;
    }
    for f in &faces.faces {
        let c = &mut comps[f.component];
        c.f += 1;
        if matches!(f.kind, FaceKind::Unbroken { .. }) {
            c.u += 1;
        } else {
            c.b += 1;
        }
    }
    for (i, c) in comps.iter_mut().enumerate() {
        c.l = 1 + c.e - c.v;
        let two_g = c.l as i64 + 1 - c.f as i64;
        if two_g < 0 || two_g % 2 != 0 {
            return Err(GraphError::NonOrientableInconsistency {
                component: i,
                two_g,
            });
        }
        c.g = (two_g / 2) as usize;
    }
    let sum = |f: fn(&ComponentProfile) -> usize| comps.iter().map(f).sum::<usize>();
    Ok(GraphProfile {
        n: g.num_legs(),
        v: g.num_vertices(),
        e: g.num_edges(),
        f: faces.faces.len(),
        b: sum(|c| c.b),
        u: sum(|c| c.u),
        v_fi: fully_internal_vertices(g, faces).len(),
        e_fi: fully_internal_edges(g, faces).len(),
        l: sum(|c| c.l),
        g: sum(|c| c.g),
        min_valence: (0..g.num_vertices()).map(|v| g.degree(v)).min().unwrap_or(0),
        components: comps,
    })
}

/// Reclassify the unbroken faces with index numbers `b` as broken, fixing
/// index `b[i]` to the spectrum index `gamma[i]`.
pub fn artificially_break(
    faces: &FaceStructure,
    b: &[u32],
    gamma: &[u32],
) -> Result<FaceStructure, GraphError> {
    assert_eq!(b.len(), gamma.len(), "b and gamma must have equal length");
    let mut out = faces.clone();
    for (&index, &value) in b.iter().zip(gamma) {
        if index == 0 || index as usize > out.slots.len() {
            return Err(GraphError::NotUnbrokenFace(index));
        }
        let face = match out.slot(index) {
            Slot::Running { face } => face,
            _ => return Err(GraphError::NotUnbrokenFace(index)),
        };
        out.slots[index as usize - 1] = Slot::Fixed { face, value };
        out.faces[face].kind = FaceKind::ArtificiallyBroken { index, value };
    }
    Ok(out)
}

/// Faces, index numbers and profile in one go.
pub fn analyze(
    g: &RibbonGraph,
) -> Result<(FaceStructure, IndexAssignment, GraphProfile), GraphError> {
    let faces = trace_faces(g);
    let ia = index_assignment(g, &faces);
    let prof = profile(g, &faces)?;
    Ok((faces, ia, prof))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tadpole() -> RibbonGraph {
        build_graph("tadpole", &[vec![0, 1, 2, 3]], &[(1, 2)], &[(1, 0), (2, 3)]).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            build_graph("x", &[vec![0]], &[], &[]).unwrap_err(),
            GraphError::UnpairedDart(Dart(0))
        );
        assert_eq!(
            build_graph("x", &[vec![0, 0]], &[], &[]).unwrap_err(),
            GraphError::DuplicateDart(Dart(0))
        );
        assert_eq!(
            build_graph("x", &[vec![0, 1]], &[(0, 0)], &[(1, 1)]).unwrap_err(),
            GraphError::SelfPairedDart(Dart(0))
        );
        assert_eq!(
            build_graph("x", &[vec![0, 1]], &[], &[(1, 0), (3, 1)]).unwrap_err(),
            GraphError::LegNumberGap(2)
        );
        assert_eq!(
            build_graph("x", &[vec![0, 1, 2]], &[(0, 1), (1, 2)], &[]).unwrap_err(),
            GraphError::DuplicateDart(Dart(1))
        );
        assert_eq!(
            build_graph("x", &[vec![]], &[], &[]).unwrap_err(),
            GraphError::EmptyVertex(0)
        );
    }

    #[test]
    fn three_valent_tadpole() {
        let g = build_graph("t", &[vec![0, 1, 2]], &[(1, 2)], &[(1, 0)]).unwrap();
        let (faces, ia, p) = analyze(&g).unwrap();
        assert_eq!((p.u, p.b, p.l, p.g), (1, 1, 1, 0));
        assert_eq!(ia.alpha[0].len(), 3);
        assert_eq!(faces.running_indices(), vec![2]);
    }

    #[test]
    fn four_valent_tadpole_indices() {
        let g = tadpole();
        let (faces, ia, p) = analyze(&g).unwrap();
        assert_eq!(ia.alpha[0], vec![2, 1, 3, 1]);
        assert_eq!(ia.beta, vec![(1, 3)]);
        assert_eq!((p.n, p.v, p.e, p.f, p.b, p.u), (2, 1, 1, 2, 1, 1));
        assert_eq!((p.v_fi, p.e_fi, p.l, p.g), (0, 0, 1, 0));
        assert_eq!(faces.slot(3), Slot::Running { face: 1 });
    }

    #[test]
    fn single_leg_vertex() {
        let g = build_graph("pt", &[vec![7]], &[], &[(1, 7)]).unwrap();
        let (_, ia, p) = analyze(&g).unwrap();
        assert_eq!(ia.alpha, vec![vec![1]]);
        assert_eq!((p.u, p.l, p.g), (0, 0, 0));
    }

    #[test]
    fn breaking_reduces_u() {
        let g = tadpole();
        let faces = trace_faces(&g);
        assert_eq!(artificially_break(&faces, &[], &[]).unwrap(), faces);
        let broken = artificially_break(&faces, &[3], &[5]).unwrap();
        assert_eq!(broken.u(), 0);
        assert_eq!(broken.slot(3), Slot::Fixed { face: 1, value: 5 });
        assert_eq!(
            artificially_break(&faces, &[1], &[5]).unwrap_err(),
            GraphError::NotUnbrokenFace(1)
        );
        assert_eq!(
            artificially_break(&broken, &[3], &[2]).unwrap_err(),
            GraphError::NotUnbrokenFace(3)
        );
    }

    #[test]
    fn tracing_is_deterministic() {
        let g = tadpole();
        assert_eq!(trace_faces(&g), trace_faces(&g));
    }
}
