use super::csr::SparseMatrixCsr;
use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of the symmetrized pattern of `a`.
///
/// Returns `perm` with `perm[new] = old`. Each connected component is started
/// from a pseudo-peripheral node and reversed on its own, so components keep
/// their relative order and a diagonal matrix maps to the identity. If the
/// result would widen the band (tensor-product grids are already near optimal
/// in natural order) the identity is returned instead.
pub fn rcm_ordering(a: &SparseMatrixCsr) -> Vec<usize> {
    let n = a.nrows();
    let adj = a.symmetric_adjacency();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree, &mut level);
        let begin = perm.len();
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut nbrs: Vec<usize> = Vec::new();
        while let Some(v) = queue.pop_front() {
            perm.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&w| !visited[w]));
            nbrs.sort_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        perm[begin..].reverse();
    }
    let mut inverse = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let width = |map: &dyn Fn(usize) -> usize| {
        (0..n)
            .flat_map(|i| adj[i].iter().map(move |&j| (i, j)))
            .map(|(i, j)| map(i).abs_diff(map(j)))
            .max()
            .unwrap_or(0)
    };
    if width(&|i| inverse[i]) > width(&|i| i) {
        return (0..n).collect();
    }
    perm
}

/// BFS levels from `root`; returns (eccentricity, nodes of the last level).
fn level_structure(root: usize, adj: &[Vec<usize>], level: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![root];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        depth = depth.max(level[v]);
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
    }
    let last: Vec<usize> = touched.iter().copied().filter(|&v| level[v] == depth).collect();
    for v in touched {
        level[v] = usize::MAX;
    }
    (depth, last)
}

/// George–Liu search for a node of (near) maximal eccentricity.
fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize], level: &mut [usize]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = level_structure(root, adj, level);
    loop {
        let cand = *last
            .iter()
            .min_by_key(|&&v| (degree[v], v))
            .expect("nonempty level");
        let (e, l) = level_structure(cand, adj, level);
        if e > ecc {
            root = cand;
            ecc = e;
            last = l;
        } else {
            return root;
        }
    }
}
