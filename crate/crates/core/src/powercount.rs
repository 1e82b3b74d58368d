//! Predicted divergence orders and the vertex-to-edge injection behind them.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ribbon::{
    fully_internal_edges, fully_internal_vertices, FaceStructure, GraphProfile, RibbonGraph, Slot,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PowerCountError {
    #[error("subset scan over {0} unbroken faces exceeds the limit of 20")]
    SubsetBudgetExceeded(usize),
    #[error("singular position {0} is not a leg number")]
    BadSingularPosition(usize),
    #[error("face order must be a permutation of the running index numbers")]
    InvalidOrder,
    #[error("internal assertion failed: {0}")]
    InternalAssertion(String),
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OmegaReport {
    pub omega: f64,
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "E_fi")]
    pub e_fi: usize,
    #[serde(rename = "V_fi")]
    pub v_fi: usize,
    pub p: f64,
    pub d: f64,
    pub valence_warning: bool,
}

pub fn omega(profile: &GraphProfile, p: f64, d: f64) -> OmegaReport {
    OmegaReport {
        omega: profile.u as f64 + (p / d) * (profile.e_fi as f64 - profile.v_fi as f64),
        u: profile.u,
        e_fi: profile.e_fi,
        v_fi: profile.v_fi,
        p,
        d,
        valence_warning: profile.min_valence < 3,
    }
}

/// Largest `omega` over connected graphs with one broken face and `L` loops:
/// `U = L` and `E_fi - V_fi = L - 1`.
pub fn max_omega(_n: usize, l: usize, p: f64, d: f64) -> f64 {
    let l = l as f64;
    l + (p / d) * (l - 1.0)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SubsetRow {
    pub subset: Vec<u32>,
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "E_fi")]
    pub e_fi: usize,
    #[serde(rename = "V_fi")]
    pub v_fi: usize,
    #[serde(rename = "E_10")]
    pub e_10: usize,
    #[serde(rename = "V_10")]
    pub v_10: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OmegaTildeReport {
    pub omega_tilde: f64,
    pub argmax: Vec<u32>,
    pub rows: Vec<SubsetRow>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Running,
    Zero,
    Other,
}

/// Counts for one subset `b` of running index numbers, with the legs in
/// `singular` carrying a zero mode.
pub fn subset_counts(
    g: &RibbonGraph,
    faces: &FaceStructure,
    b: &[u32],
    singular: &[usize],
    p: f64,
    d: f64,
) -> SubsetRow {
    let status = |i: u32| -> Status {
        if b.contains(&i) {
            return Status::Zero;
        }
        match faces.slot(i) {
            Slot::Running { .. } => Status::Running,
            Slot::External { leg } if singular.contains(&leg) => Status::Zero,
            _ => Status::Other,
        }
    };
    let (mut e_fi, mut e_10) = (0, 0);
    for &(x, y) in g.edges() {
        let (sx, sy) = (
            status(faces.index_of_dart[x]),
            status(faces.index_of_dart[y]),
        );
        match (sx, sy) {
            (Status::Running, Status::Running) => e_fi += 1,
            (Status::Running, Status::Zero) | (Status::Zero, Status::Running) => e_10 += 1,
            _ => {}
        }
    }
    let (mut v_fi, mut v_10) = (0, 0);
    for v in 0..g.num_vertices() {
        let (mut run, mut zero) = (0, 0);
        for &h in g.rotation(v) {
            match status(faces.index_of_dart[h]) {
                Status::Running => run += 1,
                Status::Zero => zero += 1,
                Status::Other => {}
            }
        }
        let deg = g.degree(v);
        if run == deg {
            v_fi += 1;
        } else if zero == 1 && run == deg - 1 {
            v_10 += 1;
        }
    }
    let u = faces.u() - b.len();
    let value = u as f64
        + (p / d) * (e_fi as f64 - v_fi as f64)
        + ((p + 1.0) / d) * (e_10 as f64 - v_10 as f64);
    SubsetRow {
        subset: b.to_vec(),
        u,
        e_fi,
        v_fi,
        e_10,
        v_10,
        value,
    }
}

/// Maximum over all subsets of unbroken faces treated as zero-faces.
/// Ties keep the first subset in binary-mask order, so `b = {}` wins ties.
pub fn omega_tilde(
    g: &RibbonGraph,
    faces: &FaceStructure,
    p: f64,
    d: f64,
    singular: &[usize],
) -> Result<OmegaTildeReport, PowerCountError> {
    for &s in singular {
        if s == 0 || s > faces.n {
            return Err(PowerCountError::BadSingularPosition(s));
        }
    }
    let running = faces.running_indices();
    let u = running.len();
    if u > 20 {
        return Err(PowerCountError::SubsetBudgetExceeded(u));
    }
    let mut rows = Vec::with_capacity(1 << u);
    let mut best = 0;
    for mask in 0u32..(1 << u) {
        let b: Vec<u32> = (0..u)
            .filter(|&j| mask & (1 << j) != 0)
            .map(|j| running[j])
            .collect();
        let row = subset_counts(g, faces, &b, singular, p, d);
        if row.value > rows.get(best).map_or(f64::NEG_INFINITY, |r: &SubsetRow| r.value) {
            best = rows.len();
        }
        rows.push(row);
    }
    Ok(OmegaTildeReport {
        omega_tilde: rows[best].value,
        argmax: rows[best].subset.clone(),
        rows,
    })
}

/// Injective map from fully internal vertices to incident fully internal
/// edges. `order` ranks the running index numbers, smallest first.
///
/// Faces are peeled in order; the vertices first met on a face are matched to
/// still-available edges of that face, trying the edge that follows each corner
/// along the face boundary before any other (augmenting paths otherwise).
pub fn gamma_injection(
    g: &RibbonGraph,
    faces: &FaceStructure,
    order: &[u32],
) -> Result<BTreeMap<usize, usize>, PowerCountError> {
    let mut running = faces.running_indices();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    running.sort_unstable();
    if sorted != running {
        return Err(PowerCountError::InvalidOrder);
    }
    let mut blue_v = vec![false; g.num_vertices()];
    for v in fully_internal_vertices(g, faces) {
        blue_v[v] = true;
    }
    let mut blue_e = vec![false; g.num_edges()];
    for e in fully_internal_edges(g, faces) {
        blue_e[e] = true;
    }
    let mut map = BTreeMap::new();

    for &fi in order {
        let fid = faces.face_of_index(fi).expect("running index has a face");
        let orbit = &faces.faces[fid].darts;

        // vertices in boundary order, with their preferred following edge
        let mut cand: Vec<usize> = Vec::new();
        let mut adj: Vec<Vec<usize>> = Vec::new();
        for &h in orbit {
            let v = g.vertex_of(h);
            if !blue_v[v] || cand.contains(&v) {
                continue;
            }
            let mut edges = Vec::new();
            if let Some(e) = g.edge_of(h) {
                if blue_e[e] {
                    edges.push(e);
                }
            }
            for &x in g.rotation(v) {
                if let Some(e) = g.edge_of(x) {
                    if blue_e[e] && !edges.contains(&e) && borders(g, faces, e, fi) {
                        edges.push(e);
                    }
                }
            }
            cand.push(v);
            adj.push(edges);
        }

        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..cand.len() {
            let mut seen = Vec::new();
            if !augment(i, &adj, &mut owner, &mut seen) {
                return Err(PowerCountError::InternalAssertion(format!(
                    "vertex {} on face {} has no free fully internal edge",
                    cand[i], fi
                )));
            }
        }
        for (e, i) in owner {
            map.insert(cand[i], e);
        }

        for &h in orbit {
            blue_v[g.vertex_of(h)] = false;
            if let Some(e) = g.edge_of(h) {
                blue_e[e] = false;
            }
        }
    }
    Ok(map)
}

fn borders(g: &RibbonGraph, faces: &FaceStructure, e: usize, index: u32) -> bool {
    let (a, b) = g.edges()[e];
    faces.index_of_dart[a] == index || faces.index_of_dart[b] == index
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    owner: &mut BTreeMap<usize, usize>,
    seen: &mut Vec<usize>,
) -> bool {
    for &e in &adj[i] {
        if seen.contains(&e) {
            continue;
        }
        seen.push(e);
        let free = match owner.get(&e) {
            None => true,
            Some(&j) => augment(j, adj, owner, seen),
        };
        if free {
            owner.insert(e, i);
            return true;
        }
    }
    false
}

/// Violations of: domain is all fully internal vertices, injectivity, incidence,
/// image fully internal, and image bordering the minimal face at the vertex.
pub fn verify_gamma(
    g: &RibbonGraph,
    faces: &FaceStructure,
    order: &[u32],
    map: &BTreeMap<usize, usize>,
) -> Vec<String> {
    let mut errs = Vec::new();
    let fi_v = fully_internal_vertices(g, faces);
    let fi_e = fully_internal_edges(g, faces);
    let keys: Vec<usize> = map.keys().copied().collect();
    if keys != fi_v {
        errs.push(format!("domain {keys:?} differs from fully internal vertices {fi_v:?}"));
    }
    let mut images: Vec<usize> = map.values().copied().collect();
    images.sort_unstable();
    images.dedup();
    if images.len() != map.len() {
        errs.push("map is not injective".to_string());
    }
    let rank = |i: u32| order.iter().position(|&x| x == i).unwrap_or(usize::MAX);
    for (&v, &e) in map {
        if !fi_e.contains(&e) {
            errs.push(format!("edge {e} is not fully internal"));
        }
        let (a, b) = g.edges()[e];
        if g.vertex_of(a) != v && g.vertex_of(b) != v {
            errs.push(format!("edge {e} is not incident to vertex {v}"));
        }
        let min_face = g
            .rotation(v)
            .iter()
            .map(|&h| faces.index_of_dart[h])
            .min_by_key(|&i| rank(i))
            .expect("vertex has corners");
        if !borders(g, faces, e, min_face) {
            errs.push(format!(
                "edge {e} does not border face {min_face}, the minimal face at vertex {v}"
            ));
        }
    }
    errs
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MaximalReport {
    pub is_maximal: bool,
    pub omega: f64,
    pub max_omega: f64,
    pub reasons: Vec<String>,
}

/// Maximal order requires `omega = max_omega`, genus zero and `U = L`.
pub fn classify_maximal(profile: &GraphProfile, p: f64, d: f64) -> MaximalReport {
    let w = omega(profile, p, d).omega;
    let m = max_omega(profile.n, profile.l, p, d);
    let mut reasons = Vec::new();
    if (w - m).abs() > 1e-12 {
        reasons.push(format!("omega {w} is below the maximum {m}"));
    }
    if profile.g != 0 {
        reasons.push(format!("genus {} is nonzero", profile.g));
    }
    if profile.u != profile.l {
        reasons.push(format!("U = {} differs from L = {}", profile.u, profile.l));
    }
    MaximalReport {
        is_maximal: reasons.is_empty(),
        omega: w,
        max_omega: m,
        reasons,
    }
}
