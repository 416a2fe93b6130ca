//! Minimal-cost-increase heuristic from the cardinal-conflict graph.

use std::collections::HashSet;

/// Size of a minimum vertex cover of the cardinal-conflict graph: one
/// vertex per agent, one edge per cardinal conflict. Exact branch-and-bound
/// up to 16 involved agents, greedy-matching lower bound beyond (still
/// admissible).
pub fn min_vertex_cover(edges_in: &[(usize, usize)]) -> u32 {
    let mut edges: Vec<(usize, usize)> =
        edges_in.iter().map(|&(a, b)| (a.min(b), a.max(b))).filter(|&(a, b)| a != b).collect();
    edges.sort_unstable();
    edges.dedup();
    if edges.is_empty() {
        return 0;
    }
    let mut vertices: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    if vertices.len() <= 16 {
        let mut best = edges.len() as u32;
        let mut covered = HashSet::new();
        exact(&edges, &mut covered, 0, &mut best);
        best
    } else {
        matching_bound(&edges)
    }
}

fn exact(edges: &[(usize, usize)], covered: &mut HashSet<usize>, used: u32, best: &mut u32) {
    if used >= *best {
        return;
    }
    let Some(&(u, v)) =
        edges.iter().find(|(u, v)| !covered.contains(u) && !covered.contains(v))
    else {
        *best = used;
        return;
    };
    covered.insert(u);
    exact(edges, covered, used + 1, best);
    covered.remove(&u);
    covered.insert(v);
    exact(edges, covered, used + 1, best);
    covered.remove(&v);
}

fn matching_bound(edges: &[(usize, usize)]) -> u32 {
    let mut taken = HashSet::new();
    let mut size = 0;
    for &(u, v) in edges {
        if !taken.contains(&u) && !taken.contains(&v) {
            taken.insert(u);
            taken.insert(v);
            size += 1;
        }
    }
    size
}
