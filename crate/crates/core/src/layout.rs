//! 2D map coordinates in the unit frame `[0, 1]²`.
//!
//! Two classic force models are provided: Kamada-Kawai stress
//! minimization (per-vertex Newton steps, hop-count ideal distances) for
//! small connected graphs, and Fruchterman-Reingold particle simulation with
//! geometric cooling for everything else.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{connected_components, extract_subgraph};
use crate::similarity::SimilarityGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("graph is disconnected ({0} components); Kamada-Kawai needs a connected graph")]
    Disconnected(usize),
    #[error("graph has no vertices")]
    Empty,
    #[error("invalid layout parameter: {0}")]
    InvalidParams(String),
    #[error("layout has {layout} positions but graph has {graph} vertices")]
    SizeMismatch { layout: usize, graph: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayoutAlgorithm {
    #[serde(rename = "kk")]
    KamadaKawai,
    #[serde(rename = "fr")]
    FruchtermanReingold,
    /// Connected components laid out separately and packed on a grid.
    #[serde(rename = "packed")]
    Packed,
}

/// Which algorithm a caller asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AlgorithmChoice {
    #[serde(rename = "kk")]
    KamadaKawai,
    #[serde(rename = "fr")]
    FruchtermanReingold,
    #[serde(rename = "auto")]
    /// Kamada-Kawai below [`AUTO_KK_LIMIT`] vertices, Fruchterman-Reingold above.
    #[default]
    Auto,
}

impl std::str::FromStr for AlgorithmChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "kk" => Ok(Self::KamadaKawai),
            "fr" => Ok(Self::FruchtermanReingold),
            "auto" => Ok(Self::Auto),
            other => Err(format!(
                "unknown layout algorithm `{other}` (expected kk|fr|auto)"
            )),
        }
    }
}

pub const AUTO_KK_LIMIT: usize = 100;

/// Above this many vertices FR repulsion only looks at nearby grid cells.
pub const EXACT_REPULSION_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub max_iterations: usize,
    /// Target length of a one-hop edge for Kamada-Kawai, in frame units.
    /// Shrunk when the graph's diameter would not fit the frame.
    pub ideal_edge_length: f64,
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    /// Kamada-Kawai stops once the largest per-vertex gradient is below this.
    pub convergence_epsilon: f64,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            ideal_edge_length: 0.1,
            initial_temperature: 0.1,
            cooling_factor: 0.99,
            convergence_epsilon: 1e-9,
            seed: 1,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<(), LayoutError> {
        let bad = |what: &str| Err(LayoutError::InvalidParams(what.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.ideal_edge_length > 0.0 && self.ideal_edge_length.is_finite()) {
            return bad("ideal_edge_length must be positive");
        }
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return bad("initial_temperature must be positive");
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return bad("cooling_factor must lie in (0, 1)");
        }
        if self.convergence_epsilon.is_nan() || self.convergence_epsilon <= 0.0 {
            return bad("convergence_epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub positions: Vec<[f64; 2]>,
    pub algorithm: LayoutAlgorithm,
    /// Kamada-Kawai only.
    pub initial_stress: Option<f64>,
    /// Kamada-Kawai only.
    pub final_stress: Option<f64>,
    pub iterations_used: usize,
    /// One-hop ideal length the stress refers to (Kamada-Kawai only).
    pub edge_length: Option<f64>,
}

fn random_positions(n: usize, seed: u64, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random_range(lo..hi), rng.random_range(lo..hi)])
        .collect()
}

/// All-pairs hop distances, `None` if the graph is disconnected.
fn hop_distances(g: &SimilarityGraph) -> Option<Vec<Vec<u32>>> {
    let n = g.n();
    let mut out = Vec::with_capacity(n);
    let mut queue = Vec::with_capacity(n);
    for s in 0..n {
        let mut dist = vec![u32::MAX; n];
        dist[s] = 0;
        queue.clear();
        queue.push(s);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for w in g.neighbors(v) {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push(w);
                }
            }
        }
        if queue.len() != n {
            return None;
        }
        out.push(dist);
    }
    Some(out)
}

fn kk_energy(pos: &[[f64; 2]], dist: &[Vec<u32>], len: f64) -> f64 {
    let n = pos.len();
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = dist[i][j] as f64;
            let dx = pos[i][0] - pos[j][0];
            let dy = pos[i][1] - pos[j][1];
            let gap = (dx * dx + dy * dy).sqrt() - len * d;
            e += gap * gap / (d * d);
        }
    }
    e
}

/// Terms of the stress that involve vertex `m`.
fn kk_vertex_energy(pos: &[[f64; 2]], dist: &[Vec<u32>], len: f64, m: usize) -> f64 {
    let mut e = 0.0;
    for i in 0..pos.len() {
        if i != m {
            let d = dist[m][i] as f64;
            let r = ((pos[m][0] - pos[i][0]).powi(2) + (pos[m][1] - pos[i][1]).powi(2)).sqrt();
            e += (r - len * d).powi(2) / (d * d);
        }
    }
    e
}

/// Gradient and Hessian of the stress with respect to vertex `m`.
fn kk_derivatives(pos: &[[f64; 2]], dist: &[Vec<u32>], len: f64, m: usize) -> ([f64; 2], [f64; 3]) {
    let (mut gx, mut gy) = (0.0, 0.0);
    let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
    for i in 0..pos.len() {
        if i == m {
            continue;
        }
        let d = dist[m][i] as f64;
        let k = 1.0 / (d * d);
        let l = len * d;
        let dx = pos[m][0] - pos[i][0];
        let dy = pos[m][1] - pos[i][1];
        let r = (dx * dx + dy * dy).sqrt().max(1e-12);
        let r3 = r * r * r;
        gx += k * (dx - l * dx / r);
        gy += k * (dy - l * dy / r);
        hxx += k * (1.0 - l * dy * dy / r3);
        hxy += k * (l * dx * dy / r3);
        hyy += k * (1.0 - l * dx * dx / r3);
    }
    ([gx, gy], [hxx, hxy, hyy])
}

fn center_in_frame(pos: &mut [[f64; 2]]) {
    if pos.is_empty() {
        return;
    }
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in pos.iter() {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if extent > 0.98 { 0.98 / extent } else { 1.0 };
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    for p in pos.iter_mut() {
        for a in 0..2 {
            p[a] = (0.5 + (p[a] - mid[a]) * scale).clamp(0.0, 1.0);
        }
    }
}

/// Kamada-Kawai layout of a connected graph.
pub fn layout_kamada_kawai(g: &SimilarityGraph, p: &LayoutParams) -> Result<Layout, LayoutError> {
    p.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(LayoutError::Empty);
    }
    let dist =
        hop_distances(g).ok_or_else(|| LayoutError::Disconnected(connected_components(g).len()))?;
    if n == 1 {
        return Ok(Layout {
            positions: vec![[0.5, 0.5]],
            algorithm: LayoutAlgorithm::KamadaKawai,
            initial_stress: Some(0.0),
            final_stress: Some(0.0),
            iterations_used: 0,
            edge_length: Some(p.ideal_edge_length),
        });
    }
    let diameter = dist.iter().flatten().copied().max().unwrap_or(1).max(1) as f64;
    let len = p.ideal_edge_length.min(0.9 / diameter);

    let initial = random_positions(n, p.seed, 0.05, 0.95);
    let initial_stress = kk_energy(&initial, &dist, len);
    let mut pos = initial.clone();
    let eps = p.convergence_epsilon;
    let norm = |g: [f64; 2]| (g[0] * g[0] + g[1] * g[1]).sqrt();

    let mut iterations = 0;
    while iterations < p.max_iterations {
        let (m, delta) = (0..n)
            .map(|m| (m, norm(kk_derivatives(&pos, &dist, len, m).0)))
            .fold(
                (0, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if delta < eps {
            break;
        }
        iterations += 1;
        for _ in 0..50 {
            let (grad, [hxx, hxy, hyy]) = kk_derivatives(&pos, &dist, len, m);
            if norm(grad) < eps {
                break;
            }
            // Shift an indefinite Hessian so the step is a descent direction.
            let half_gap = (((hxx - hyy) / 2.0).powi(2) + hxy * hxy).sqrt();
            let lambda_min = (hxx + hyy) / 2.0 - half_gap;
            let floor = 1e-3 * (hxx.abs() + hyy.abs()) + 1e-12;
            let shift = if lambda_min < floor {
                floor - lambda_min
            } else {
                0.0
            };
            let (a, c) = (hxx + shift, hyy + shift);
            let det = a * c - hxy * hxy;
            let mut step = [
                (-grad[0] * c + grad[1] * hxy) / det,
                (grad[0] * hxy - grad[1] * a) / det,
            ];
            let before = kk_vertex_energy(&pos, &dist, len, m);
            let start = pos[m];
            let mut improved = false;
            for _ in 0..40 {
                pos[m] = [start[0] + step[0], start[1] + step[1]];
                if kk_vertex_energy(&pos, &dist, len, m) < before {
                    improved = true;
                    break;
                }
                step = [step[0] / 2.0, step[1] / 2.0];
            }
            if !improved {
                pos[m] = start;
                break;
            }
        }
    }

    center_in_frame(&mut pos);
    let mut final_stress = kk_energy(&pos, &dist, len);
    if final_stress.is_nan()
        || final_stress > initial_stress
        || pos.iter().flatten().any(|c| !c.is_finite())
    {
        pos = initial;
        final_stress = initial_stress;
    }
    Ok(Layout {
        positions: pos,
        algorithm: LayoutAlgorithm::KamadaKawai,
        initial_stress: Some(initial_stress),
        final_stress: Some(final_stress),
        iterations_used: iterations,
        edge_length: Some(len),
    })
}

/// Kamada-Kawai stress of `l` on `g`, using the layout's one-hop length.
pub fn stress(g: &SimilarityGraph, l: &Layout) -> Result<f64, LayoutError> {
    if l.positions.len() != g.n() {
        return Err(LayoutError::SizeMismatch {
            layout: l.positions.len(),
            graph: g.n(),
        });
    }
    let dist =
        hop_distances(g).ok_or_else(|| LayoutError::Disconnected(connected_components(g).len()))?;
    let len = l.edge_length.unwrap_or(1.0);
    Ok(kk_energy(&l.positions, &dist, len))
}

/// One completed Fruchterman-Reingold iteration, for observers.
#[derive(Debug)]
pub struct FrStep<'a> {
    pub iteration: usize,
    /// Temperature that capped this iteration's moves.
    pub temperature: f64,
    /// Largest distance any vertex moved in this iteration.
    pub max_displacement: f64,
    pub positions: &'a [[f64; 2]],
}

/// Direction used when two particles coincide, fixed per ordered pair.
fn tie_direction(v: usize, u: usize) -> [f64; 2] {
    let h = (v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (u as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    let a = (h >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU;
    [a.cos(), a.sin()]
}

fn repulsion(pv: [f64; 2], pu: [f64; 2], v: usize, u: usize, k2: f64, out: &mut [f64; 2]) {
    let mut dx = pv[0] - pu[0];
    let mut dy = pv[1] - pu[1];
    let mut d = (dx * dx + dy * dy).sqrt();
    if d < 1e-9 {
        let t = tie_direction(v, u);
        dx = t[0] * 1e-9;
        dy = t[1] * 1e-9;
        d = 1e-9;
    }
    let f = k2 / d;
    out[0] += dx / d * f;
    out[1] += dy / d * f;
}

/// Uniform bucket grid over the frame for approximate repulsion.
struct Buckets {
    cell: f64,
    side: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(pos: &[[f64; 2]], cell: f64) -> Self {
        let side = ((1.0 / cell).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); side * side];
        for (v, p) in pos.iter().enumerate() {
            cells[Self::coord(p[1], side) * side + Self::coord(p[0], side)].push(v);
        }
        Self { cell, side, cells }
    }

    fn coord(x: f64, side: usize) -> usize {
        ((x * side as f64) as usize).min(side - 1)
    }

    fn near(&self, p: [f64; 2]) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = (
            Self::coord(p[0], self.side) as isize,
            Self::coord(p[1], self.side) as isize,
        );
        let side = self.side as isize;
        (-1..=1)
            .flat_map(move |oy| (-1..=1).map(move |ox| (cx + ox, cy + oy)))
            .filter(move |&(x, y)| x >= 0 && y >= 0 && x < side && y < side)
            .flat_map(move |(x, y)| &self.cells[(y * side + x) as usize])
            .copied()
    }
}

pub fn layout_fruchterman_reingold(
    g: &SimilarityGraph,
    p: &LayoutParams,
) -> Result<Layout, LayoutError> {
    layout_fruchterman_reingold_observed(g, p, Execution::default(), |_| {})
}

pub fn layout_fruchterman_reingold_with(
    g: &SimilarityGraph,
    p: &LayoutParams,
    exec: Execution,
) -> Result<Layout, LayoutError> {
    layout_fruchterman_reingold_observed(g, p, exec, |_| {})
}

/// Fruchterman-Reingold with a callback after every iteration.
///
/// Forces on each vertex are summed in a fixed neighbour order, so the
/// result does not depend on `exec`.
pub fn layout_fruchterman_reingold_observed<F>(
    g: &SimilarityGraph,
    p: &LayoutParams,
    exec: Execution,
    mut observe: F,
) -> Result<Layout, LayoutError>
where
    F: FnMut(&FrStep<'_>),
{
    p.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(LayoutError::Empty);
    }
    let mut pos = random_positions(n, p.seed, 0.0, 1.0);
    let k = (1.0 / n as f64).sqrt();
    let k2 = k * k;
    let mut temperature = p.initial_temperature;

    for iteration in 0..p.max_iterations {
        let buckets = (n > EXACT_REPULSION_LIMIT).then(|| Buckets::new(&pos, 2.0 * k));
        let snapshot = &pos;
        let disp: Vec<[f64; 2]> = exec.map_range(n, |v| {
            let pv = snapshot[v];
            let mut f = [0.0, 0.0];
            match &buckets {
                None => {
                    for (u, &pu) in snapshot.iter().enumerate() {
                        if u != v {
                            repulsion(pv, pu, v, u, k2, &mut f);
                        }
                    }
                }
                Some(b) => {
                    let reach = b.cell;
                    let mut near: Vec<usize> = b.near(pv).filter(|&u| u != v).collect();
                    near.sort_unstable();
                    for u in near {
                        let pu = snapshot[u];
                        let (dx, dy) = (pv[0] - pu[0], pv[1] - pu[1]);
                        if dx * dx + dy * dy <= reach * reach {
                            repulsion(pv, pu, v, u, k2, &mut f);
                        }
                    }
                }
            }
            for u in g.neighbors(v) {
                let pu = snapshot[u];
                let dx = pv[0] - pu[0];
                let dy = pv[1] - pu[1];
                let d = (dx * dx + dy * dy).sqrt();
                if d > 0.0 {
                    // |f| = d² / k along the edge.
                    f[0] -= dx * d / k;
                    f[1] -= dy * d / k;
                }
            }
            f
        });

        let mut max_disp: f64 = 0.0;
        for (v, d) in disp.into_iter().enumerate() {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len == 0.0 || !len.is_finite() {
                continue;
            }
            let old = pos[v];
            let mut factor = len.min(temperature) / len;
            let mut shrink = 1e-12;
            // Rounding in `old + delta` can overshoot the cap by an ulp; back off until it holds.
            let (new, moved) = loop {
                let new = [
                    (old[0] + d[0] * factor).clamp(0.0, 1.0),
                    (old[1] + d[1] * factor).clamp(0.0, 1.0),
                ];
                let moved = ((new[0] - old[0]).powi(2) + (new[1] - old[1]).powi(2)).sqrt();
                if moved <= temperature {
                    break (new, moved);
                }
                factor *= 1.0 - shrink;
                shrink = (shrink * 16.0).min(0.5);
            };
            max_disp = max_disp.max(moved);
            pos[v] = new;
        }
        observe(&FrStep {
            iteration,
            temperature,
            max_displacement: max_disp,
            positions: &pos,
        });
        temperature *= p.cooling_factor;
    }

    Ok(Layout {
        positions: pos,
        algorithm: LayoutAlgorithm::FruchtermanReingold,
        initial_stress: None,
        final_stress: None,
        iterations_used: p.max_iterations,
        edge_length: None,
    })
}

/// Lay out any graph: Kamada-Kawai per connected component packed on a
/// grid, or Fruchterman-Reingold on the whole graph.
pub fn layout_auto(
    g: &SimilarityGraph,
    p: &LayoutParams,
    choice: AlgorithmChoice,
) -> Result<Layout, LayoutError> {
    let use_kk = match choice {
        AlgorithmChoice::KamadaKawai => true,
        AlgorithmChoice::FruchtermanReingold => false,
        AlgorithmChoice::Auto => g.n() < AUTO_KK_LIMIT,
    };
    if !use_kk {
        return layout_fruchterman_reingold(g, p);
    }
    let comps = connected_components(g);
    if comps.len() <= 1 {
        return layout_kamada_kawai(g, p);
    }
    // Largest components first, row-major grid cells.
    let mut order: Vec<&Vec<usize>> = comps.iter().collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let side = (order.len() as f64).sqrt().ceil() as usize;
    let cell = 1.0 / side as f64;
    let mut positions = vec![[0.5, 0.5]; g.n()];
    let mut iterations = 0;
    for (slot, comp) in order.iter().enumerate() {
        let sub = extract_subgraph(g, comp).expect("component vertices exist");
        let l = layout_kamada_kawai(&sub, p)?;
        iterations += l.iterations_used;
        let (cx, cy) = ((slot % side) as f64 * cell, (slot / side) as f64 * cell);
        for (k, &v) in comp.iter().enumerate() {
            let q = l.positions[k];
            positions[v] = [
                cx + cell * (0.05 + 0.9 * q[0]),
                cy + cell * (0.05 + 0.9 * q[1]),
            ];
        }
    }
    Ok(Layout {
        positions,
        algorithm: LayoutAlgorithm::Packed,
        initial_stress: None,
        final_stress: None,
        iterations_used: iterations,
        edge_length: None,
    })
}

#[derive(Serialize)]
struct VertexOut<'a> {
    label: &'a str,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct LayoutDoc<'a> {
    metadata: LayoutMeta<'a>,
    vertices: Vec<VertexOut<'a>>,
}

#[derive(Serialize)]
struct LayoutMeta<'a> {
    algorithm: LayoutAlgorithm,
    vertices: usize,
    edges: usize,
    iterations_used: usize,
    initial_stress: Option<f64>,
    final_stress: Option<f64>,
    edge_length: Option<f64>,
    params: &'a LayoutParams,
}

/// Layout JSON: `{"metadata": {...}, "vertices": [{"label", "x", "y"}, ...]}`.
pub fn layout_to_json(g: &SimilarityGraph, l: &Layout, p: &LayoutParams) -> String {
    let doc = LayoutDoc {
        metadata: LayoutMeta {
            algorithm: l.algorithm,
            vertices: g.n(),
            edges: g.edge_count(),
            iterations_used: l.iterations_used,
            initial_stress: l.initial_stress,
            final_stress: l.final_stress,
            edge_length: l.edge_length,
            params: p,
        },
        vertices: l
            .positions
            .iter()
            .enumerate()
            .map(|(v, q)| VertexOut {
                label: g.label(v),
                x: q[0],
                y: q[1],
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("layout serializes")
}

#[derive(Deserialize)]
struct VertexIn {
    label: String,
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
struct LayoutDocIn {
    vertices: Vec<VertexIn>,
}

/// Read the coordinates of a layout JSON file, keyed by label order.
pub fn layout_from_json(text: &str) -> Result<Vec<(String, [f64; 2])>, serde_json::Error> {
    let doc: LayoutDocIn = serde_json::from_str(text)?;
    Ok(doc
        .vertices
        .into_iter()
        .map(|v| (v.label, [v.x, v.y]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SimilarityGraph {
        SimilarityGraph::from_edges(n, edges).unwrap()
    }

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    #[test]
    fn kk_single_vertex_at_center() {
        let l = layout_kamada_kawai(&graph(1, &[]), &LayoutParams::default()).unwrap();
        assert_eq!(l.positions, vec![[0.5, 0.5]]);
        assert_eq!(l.final_stress, Some(0.0));
    }

    #[test]
    fn kk_two_vertices_reach_ideal_length() {
        let p = LayoutParams::default();
        let g = graph(2, &[(0, 1)]);
        let l = layout_kamada_kawai(&g, &p).unwrap();
        assert!((dist(l.positions[0], l.positions[1]) - p.ideal_edge_length).abs() < 1e-6);
        assert!(l.final_stress.unwrap() < 1e-12);
        assert!(stress(&g, &l).unwrap() < 1e-12);
    }

    #[test]
    fn kk_triangle_is_equilateral() {
        let l = layout_kamada_kawai(
            &graph(3, &[(0, 1), (1, 2), (0, 2)]),
            &LayoutParams::default(),
        )
        .unwrap();
        let p = &l.positions;
        let (a, b, c) = (dist(p[0], p[1]), dist(p[1], p[2]), dist(p[0], p[2]));
        assert!((a - b).abs() < 1e-4 && (b - c).abs() < 1e-4, "{a} {b} {c}");
    }

    #[test]
    fn kk_rejects_disconnected() {
        let err = layout_kamada_kawai(&graph(3, &[(0, 1)]), &LayoutParams::default()).unwrap_err();
        assert_eq!(err, LayoutError::Disconnected(2));
        assert!(stress(
            &graph(3, &[(0, 1)]),
            &layout_fruchterman_reingold(&graph(3, &[]), &LayoutParams::default()).unwrap()
        )
        .is_err());
    }

    #[test]
    fn fr_single_vertex_stays_put() {
        let p = LayoutParams::default();
        let l = layout_fruchterman_reingold(&graph(1, &[]), &p).unwrap();
        assert_eq!(l.positions, random_positions(1, p.seed, 0.0, 1.0));
    }

    #[test]
    fn fr_two_vertices_settle_near_natural_length() {
        let k = (1.0f64 / 2.0).sqrt();
        for seed in 1..20 {
            let p = LayoutParams {
                seed,
                ..LayoutParams::default()
            };
            let l = layout_fruchterman_reingold(&graph(2, &[(0, 1)]), &p).unwrap();
            let d = dist(l.positions[0], l.positions[1]);
            assert!(d >= 0.5 * k && d <= 2.0 * k, "seed {seed}: {d}");
        }
    }

    #[test]
    fn fr_edgeless_graph_spreads_out() {
        let k2 = (1.0f64 / 2.0).sqrt();
        let l = layout_fruchterman_reingold(&graph(4, &[]), &LayoutParams::default()).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(
                    dist(l.positions[i], l.positions[j]) >= k2,
                    "{:?}",
                    l.positions
                );
            }
        }
    }

    #[test]
    fn fr_grid_repulsion_keeps_frame() {
        let n = EXACT_REPULSION_LIMIT + 50;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let p = LayoutParams {
            max_iterations: 5,
            ..LayoutParams::default()
        };
        let l = layout_fruchterman_reingold(&graph(n, &edges), &p).unwrap();
        assert!(l
            .positions
            .iter()
            .flatten()
            .all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn packed_layout_covers_all_components() {
        let g = graph(7, &[(0, 1), (1, 2), (3, 4)]);
        let l = layout_auto(&g, &LayoutParams::default(), AlgorithmChoice::Auto).unwrap();
        assert_eq!(l.algorithm, LayoutAlgorithm::Packed);
        assert_eq!(l.positions.len(), 7);
        assert!(l
            .positions
            .iter()
            .flatten()
            .all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn params_are_validated() {
        let p = LayoutParams {
            cooling_factor: 1.0,
            ..LayoutParams::default()
        };
        assert!(matches!(
            layout_fruchterman_reingold(&graph(2, &[]), &p),
            Err(LayoutError::InvalidParams(_))
        ));
    }

    #[test]
    fn json_round_trip_of_coordinates() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let p = LayoutParams::default();
        let l = layout_kamada_kawai(&g, &p).unwrap();
        let back = layout_from_json(&layout_to_json(&g, &l, &p)).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[1].1, l.positions[1]);
    }
}
