//! Rooted trees with LCA-backed distance and path queries.
//!
//! Vertex ids are `0..n`; every non-root vertex `v` owns the edge to its parent, so
//! edges are addressed by their child vertex throughout the crate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Tree {
    n: usize,
    root: usize,
    /// Edges in construction order, as written to disk.
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    depth: Vec<usize>,
    /// Binary-lifting table: `up[k][v]` is the 2^k-th ancestor of `v`.
    up: Vec<Vec<usize>>,
    /// Preorder interval [tin, tout) per vertex; subtree tests are range checks.
    tin: Vec<usize>,
    tout: Vec<usize>,
    preorder: Vec<usize>,
}

/// On-disk form: `{"n": .., "root": .., "edges": [[u,v], ..]}` with 0-based ids.
#[derive(Serialize, Deserialize)]
struct TreeFile {
    n: usize,
    root: usize,
    edges: Vec<(usize, usize)>,
}

/// Height bound of the breadth-first-filled max-degree tree:
/// `h0 = ceil( log((N-1)(D-2)/D + 1) / log(D-1) )`.
pub fn part_a_h0(delta: usize, n_target: usize) -> Result<usize> {
    if delta < 3 {
        return Err(Error::InvalidParam("part-a tree requires delta >= 3".into()));
    }
    if n_target < delta + 1 {
        return Err(Error::Infeasible(format!(
            "part-a tree needs at least delta+1 = {} vertices, got {n_target}",
            delta + 1
        )));
    }
    let nf = n_target as f64;
    let df = delta as f64;
    Ok((((nf - 1.0) * (df - 2.0) / df + 1.0).ln() / (df - 1.0).ln()).ceil() as usize)
}

impl Tree {
    pub fn from_edges(n: usize, edges: Vec<(usize, usize)>, root: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("tree needs at least one vertex".into()));
        }
        if root >= n {
            return Err(Error::InvalidVertex(root));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidParam(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u >= n {
                return Err(Error::InvalidVertex(u));
            }
            if v >= n {
                return Err(Error::InvalidVertex(v));
            }
            if u == v {
                return Err(Error::InvalidParam("self-loop".into()));
            }
            adj[u].push(v);
            adj[v].push(u);
        }

        // Iterative DFS from the root fixes parents, depths and the preorder.
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![0usize; n];
        let mut tin = vec![0usize; n];
        let mut tout = vec![0usize; n];
        let mut preorder = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut stack = vec![(root, usize::MAX)];
        while let Some((v, p)) = stack.pop() {
            if seen[v] {
                return Err(Error::InvalidParam("edge list contains a cycle".into()));
            }
            seen[v] = true;
            parent[v] = p;
            depth[v] = if p == usize::MAX { 0 } else { depth[p] + 1 };
            tin[v] = preorder.len();
            preorder.push(v);
            for &w in adj[v].iter().rev() {
                if w != p {
                    stack.push((w, v));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParam("edge list is disconnected".into()));
        }
        // tout via reverse preorder: a vertex closes after all later-started
        // vertices of its subtree.
        let mut tout_cursor = vec![0usize; n];
        for (i, &v) in preorder.iter().enumerate() {
            tout_cursor[v] = i + 1;
        }
        for &v in preorder.iter().rev() {
            tout[v] = tout_cursor[v];
            if parent[v] != usize::MAX {
                tout_cursor[parent[v]] = tout_cursor[parent[v]].max(tout[v]);
            }
        }

        let levels = (usize::BITS - n.leading_zeros()) as usize;
        let mut up = vec![vec![usize::MAX; n]; levels.max(1)];
        up[0].copy_from_slice(&parent);
        for k in 1..up.len() {
            for v in 0..n {
                let mid = up[k - 1][v];
                up[k][v] = if mid == usize::MAX { usize::MAX } else { up[k - 1][mid] };
            }
        }

        Ok(Tree { n, root, edges, adj, parent, depth, up, tin, tout, preorder })
    }

    /// Complete tree in the max-degree reading: the root has `branching` children,
    /// every other internal vertex has `branching - 1`, so the maximum degree is
    /// exactly `branching`. For `branching = 2` this degenerates to a path with the
    /// root in the middle (`n = 2h + 1`).
    pub fn complete(branching: usize, height: usize) -> Result<Self> {
        if branching < 2 {
            return Err(Error::InvalidParam("branching must be >= 2".into()));
        }
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        let mut next_id = 1usize;
        for level in 0..height {
            let mut next = Vec::new();
            for &v in &frontier {
                let kids = if level == 0 { branching } else { branching - 1 };
                for _ in 0..kids {
                    if next_id == usize::MAX {
                        return Err(Error::Infeasible("vertex count overflow".into()));
                    }
                    edges.push((v, next_id));
                    next.push(next_id);
                    next_id += 1;
                }
            }
            frontier = next;
        }
        Tree::from_edges(next_id, edges, 0)
    }

    /// Complete `arity`-ary tree: every internal vertex has exactly `arity`
    /// children, `n = (arity^{h+1} - 1)/(arity - 1)`. `arity = 2` gives the classic
    /// complete binary tree on `2^{h+1} - 1` vertices (maximum degree 3).
    pub fn complete_ary(arity: usize, height: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidParam("arity must be >= 2".into()));
        }
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        let mut next_id = 1usize;
        for _ in 0..height {
            let mut next = Vec::new();
            for &v in &frontier {
                for _ in 0..arity {
                    edges.push((v, next_id));
                    next.push(next_id);
                    next_id += 1;
                }
            }
            frontier = next;
        }
        Tree::from_edges(next_id, edges, 0)
    }

    /// Path on `n` vertices rooted at one end.
    pub fn path_graph(n: usize) -> Result<Self> {
        let edges = (1..n).map(|v| (v - 1, v)).collect();
        Tree::from_edges(n, edges, 0)
    }

    /// Star `K_{1,leaves}` rooted at the center.
    pub fn star(leaves: usize) -> Result<Self> {
        let edges = (1..=leaves).map(|v| (0, v)).collect();
        Tree::from_edges(leaves + 1, edges, 0)
    }

    /// The extremal tree of the lower-bound argument: breadth-first fill of the
    /// max-degree-`delta` complete tree, truncated left-to-right at the last level.
    ///
    /// Returns the tree together with [`part_a_h0`]; by construction every vertex
    /// sits within distance `h0` of the root and every vertex at depth `<= h0 - 2`
    /// has full degree `delta`.
    pub fn part_a(delta: usize, n_target: usize) -> Result<(Self, usize)> {
        let h0 = part_a_h0(delta, n_target)?;

        let mut edges = Vec::with_capacity(n_target - 1);
        let mut frontier = vec![0usize];
        let mut next_id = 1usize;
        'outer: while next_id < n_target {
            let mut next = Vec::new();
            for &v in &frontier {
                let kids = if v == 0 { delta } else { delta - 1 };
                for _ in 0..kids {
                    if next_id == n_target {
                        break 'outer;
                    }
                    edges.push((v, next_id));
                    next.push(next_id);
                    next_id += 1;
                }
            }
            frontier = next;
        }
        let tree = Tree::from_edges(n_target, edges, 0)?;
        debug_assert!(tree.depth.iter().all(|&d| d <= h0));
        Ok((tree, h0))
    }

    /// Random tree by degree-capped uniform attachment.
    pub fn random<R: Rng + ?Sized>(n: usize, delta_max: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("tree needs at least one vertex".into()));
        }
        if delta_max < 2 && n > 2 {
            return Err(Error::Infeasible("delta_max < 2 only allows up to two vertices".into()));
        }
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        let mut degree = vec![0usize; n];
        // Vertices that can still accept a neighbor.
        let mut open: Vec<usize> = vec![0];
        for v in 1..n {
            let idx = rng.random_range(0..open.len());
            let u = open[idx];
            edges.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
            if degree[u] >= delta_max {
                open.swap_remove(idx);
            }
            if degree[v] < delta_max {
                open.push(v);
            }
        }
        Tree::from_edges(n, edges, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[v];
        (p != usize::MAX).then_some(p)
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Vertices in preorder; any subtree is a contiguous slice of this list.
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// The preorder slice covering the subtree rooted at `v`.
    pub fn subtree(&self, v: usize) -> &[usize] {
        &self.preorder[self.tin[v]..self.tout[v]]
    }

    /// Whether `v` lies in the subtree rooted at `node`.
    #[inline]
    pub fn in_subtree(&self, node: usize, v: usize) -> bool {
        self.tin[node] <= self.tin[v] && self.tin[v] < self.tout[node]
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        assert!(u < self.n && v < self.n, "vertex id out of range");
        if self.depth[u] < self.depth[v] {
            std::mem::swap(&mut u, &mut v);
        }
        let mut diff = self.depth[u] - self.depth[v];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                u = self.up[k][u];
            }
            diff >>= 1;
            k += 1;
        }
        if u == v {
            return u;
        }
        for k in (0..self.up.len()).rev() {
            if self.up[k][u] != self.up[k][v] {
                u = self.up[k][u];
                v = self.up[k][v];
            }
        }
        self.parent[u]
    }

    /// Shortest-path distance via the LCA.
    #[inline]
    pub fn dist(&self, u: usize, v: usize) -> usize {
        let l = self.lca(u, v);
        self.depth[u] + self.depth[v] - 2 * self.depth[l]
    }

    /// The unique minimal edge set connecting `u` and `v`, ordered from `u` to `v`
    /// (consecutive edges share a vertex). Empty when `u == v`.
    pub fn path(&self, u: usize, v: usize) -> Vec<(usize, usize)> {
        let l = self.lca(u, v);
        let mut out = Vec::with_capacity(self.dist(u, v));
        let mut a = u;
        while a != l {
            out.push((a, self.parent[a]));
            a = self.parent[a];
        }
        let mut tail = Vec::new();
        let mut b = v;
        while b != l {
            tail.push((self.parent[b], b));
            b = self.parent[b];
        }
        out.extend(tail.into_iter().rev());
        out
    }

    /// Path as child-vertex edge ids (each edge named by its lower endpoint).
    pub fn path_edge_ids(&self, u: usize, v: usize) -> Vec<usize> {
        let l = self.lca(u, v);
        let mut out = Vec::with_capacity(self.dist(u, v));
        let mut a = u;
        while a != l {
            out.push(a);
            a = self.parent[a];
        }
        let mut b = v;
        while b != l {
            out.push(b);
            b = self.parent[b];
        }
        out
    }

    /// All `(vertex, distance)` with `1 <= distance <= radius` from `u`.
    pub fn vertices_within(&self, u: usize, radius: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut dist = vec![usize::MAX; self.n];
        dist[u] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(u);
        while let Some(v) = queue.pop_front() {
            if dist[v] == radius {
                continue;
            }
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    out.push((w, dist[w]));
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// BFS distances from `u` — the oracle the LCA path is tested against.
    pub fn bfs_dist(&self, u: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[u] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(u);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> String {
        let file = TreeFile { n: self.n, root: self.root, edges: self.edges.clone() };
        serde_json::to_string(&file).expect("tree serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TreeFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("tree json: {e}")))?;
        Tree::from_edges(file.n, file.edges, file.root)
    }
}
