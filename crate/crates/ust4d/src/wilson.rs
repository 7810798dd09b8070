//! Uniform spanning tree samplers and the exact enumeration oracle.
//!
//! Wilson's algorithm is implemented once over [`WalkableGraph`] and
//! instantiated for explicit finite multigraphs (small, certifiable
//! against the enumeration oracle) and for implicit wired lattice
//! boxes (large, nothing materialized beyond the parent arrays).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, RngSeed, MAX_DIM};
use rand::Rng;

/// Maximum vertex count for the spanning-tree enumeration oracle.
pub const ENUMERATION_LIMIT: u32 = 12;

/// Adjacency access used by the sampling walk. Parallel edges occupy
/// distinct slots, which is what weights the jump probabilities by
/// multiplicity.
pub trait WalkableGraph {
    fn vertex_count(&self) -> usize;
    fn degree(&self, v: u32) -> usize;
    fn neighbor(&self, v: u32, slot: usize) -> u32;
}

/// Undirected multigraph with an explicit edge list. Slot order within
/// each adjacency list follows edge-insertion order.
#[derive(Debug, Clone)]
pub struct FiniteGraph {
    vertex_count: u32,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<(u32, u32)>>,
    /// Designated wired supernode, if the graph has one.
    pub supernode: Option<u32>,
}

impl FiniteGraph {
    pub fn new(vertex_count: u32, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); vertex_count as usize];
        for (id, &(a, b)) in edges.iter().enumerate() {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::UnknownVertex(a.max(b)));
            }
            if a == b {
                return Err(Error::Config("self-loops are not allowed".into()));
            }
            adj[a as usize].push((b, id as u32));
            adj[b as usize].push((a, id as u32));
        }
        Ok(Self {
            vertex_count,
            edges,
            adj,
            supernode: None,
        })
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn adjacency(&self, v: u32) -> &[(u32, u32)] {
        &self.adj[v as usize]
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return false;
        }
        let mut seen = vec![false; self.vertex_count as usize];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut found = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    found += 1;
                    stack.push(w);
                }
            }
        }
        found == self.vertex_count
    }

    /// Complete graph `K_n`.
    pub fn complete(n: u32) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Self::new(n, edges).unwrap()
    }

    /// Cycle `C_n`.
    pub fn cycle(n: u32) -> Self {
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, edges).unwrap()
    }

    /// Path graph on `n` vertices.
    pub fn path_graph(n: u32) -> Self {
        let edges = (0..n - 1).map(|i| (i, i + 1)).collect();
        Self::new(n, edges).unwrap()
    }

    /// Explicit wired box: `Λ(L)` in `Z^d` plus a supernode absorbing
    /// every boundary-exiting edge with multiplicity. Vertex ids follow
    /// the mixed-radix order of [`BoxIndexer`]; the supernode is last.
    /// Only for small boxes; the implicit sampler covers large ones.
    pub fn wired_box(d: usize, l: u32) -> Result<Self> {
        let indexer = BoxIndexer::new(d, l)?;
        let count = indexer.box_count;
        if count > (1 << 24) {
            return Err(Error::TooLarge {
                vertices: count as u128,
                cap: 1 << 24,
            });
        }
        let supernode = count as u32;
        let mut edges = Vec::new();
        for v in 0..count as u32 {
            let p = indexer.point_of(v);
            for axis in 0..d {
                for sign in [1i32, -1] {
                    let q = p.step(axis, sign);
                    if q.sup_norm() > l {
                        edges.push((v, supernode));
                    } else if sign == 1 {
                        // Interior edges once per direction.
                        edges.push((v, indexer.index_of(&q)));
                    }
                }
            }
        }
        let mut g = Self::new(supernode + 1, edges)?;
        g.supernode = Some(supernode);
        Ok(g)
    }
}

impl WalkableGraph for FiniteGraph {
    fn vertex_count(&self) -> usize {
        self.vertex_count as usize
    }

    fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    fn neighbor(&self, v: u32, slot: usize) -> u32 {
        self.adj[v as usize][slot].0
    }
}

/// Mixed-radix indexing of `Λ(L)` in `Z^d`: axis 0 is the least
/// significant digit, so vertex ids are lexicographic in coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxIndexer {
    pub d: usize,
    pub l: u32,
    pub side: u64,
    pub box_count: usize,
}

impl BoxIndexer {
    pub fn new(d: usize, l: u32) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::DimensionTooLarge { d, max: MAX_DIM });
        }
        let side = 2 * l as u64 + 1;
        let mut count: u128 = 1;
        for _ in 0..d {
            count *= side as u128;
        }
        // One id must remain for the supernode.
        if count >= u32::MAX as u128 {
            return Err(Error::TooLarge {
                vertices: count,
                cap: u32::MAX as u64 - 1,
            });
        }
        Ok(Self {
            d,
            l,
            side,
            box_count: count as usize,
        })
    }

    pub fn point_of(&self, v: u32) -> LatticePoint {
        let mut rem = v as u64;
        let mut coords = [0i32; MAX_DIM];
        for c in coords.iter_mut().take(self.d) {
            *c = (rem % self.side) as i32 - self.l as i32;
            rem /= self.side;
        }
        LatticePoint::new(&coords[..self.d]).unwrap()
    }

    pub fn index_of(&self, p: &LatticePoint) -> u32 {
        let mut idx = 0u64;
        for axis in (0..self.d).rev() {
            idx = idx * self.side + (p.coord(axis) + self.l as i32) as u64;
        }
        idx as u32
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.sup_norm() <= self.l
    }
}

/// Implicit wired box: box vertices in mixed-radix order, then one
/// supernode; every boundary-exiting step lands on the supernode.
struct WiredBoxGraph {
    indexer: BoxIndexer,
}

impl WalkableGraph for WiredBoxGraph {
    fn vertex_count(&self) -> usize {
        self.indexer.box_count + 1
    }

    fn degree(&self, v: u32) -> usize {
        debug_assert!((v as usize) < self.indexer.box_count);
        2 * self.indexer.d
    }

    fn neighbor(&self, v: u32, slot: usize) -> u32 {
        let p = self.indexer.point_of(v);
        let axis = slot >> 1;
        let sign = if slot & 1 == 0 { 1 } else { -1 };
        let q = p.step(axis, sign);
        if q.sup_norm() > self.indexer.l {
            self.indexer.box_count as u32
        } else {
            self.indexer.index_of(&q)
        }
    }
}

/// Implicit box with the origin and the wired boundary identified into
/// a single vertex (reusing the origin's id). Boundary-exiting steps
/// land on the identified vertex; lattice steps onto the origin do too.
struct ZeroWiredBoxGraph {
    indexer: BoxIndexer,
    origin: u32,
}

impl WalkableGraph for ZeroWiredBoxGraph {
    fn vertex_count(&self) -> usize {
        self.indexer.box_count
    }

    fn degree(&self, _v: u32) -> usize {
        2 * self.indexer.d
    }

    fn neighbor(&self, v: u32, slot: usize) -> u32 {
        let p = self.indexer.point_of(v);
        let axis = slot >> 1;
        let sign = if slot & 1 == 0 { 1 } else { -1 };
        let q = p.step(axis, sign);
        if q.sup_norm() > self.indexer.l {
            self.origin
        } else {
            self.indexer.index_of(&q)
        }
    }
}

/// How a [`SpanningTree`] maps vertex ids to lattice coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoordMap {
    /// No embedding (abstract graphs, synthetic fixtures).
    None,
    /// Explicit per-vertex coordinates.
    Explicit(Vec<LatticePoint>),
    /// Box vertices in mixed-radix order; ids past the box (the
    /// supernode) have no coordinates.
    Box { d: u8, l: u32 },
}

/// Rooted oriented spanning tree as a parent array, with derived
/// children lists in CSR form. The root maps to itself.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    parent: Vec<u32>,
    parent_slot: Vec<u16>,
    root: u32,
    children_start: Vec<u32>,
    children_data: Vec<u32>,
    coords: CoordMap,
    /// True when the root is a wired boundary supernode standing in
    /// for infinity rather than a real vertex.
    pub wired_root: bool,
}

impl SpanningTree {
    /// Build from a parent array, validating that `root` is the unique
    /// fixed point and every vertex reaches it.
    pub fn from_parents(
        parent: Vec<u32>,
        root: u32,
        coords: CoordMap,
        wired_root: bool,
    ) -> Result<Self> {
        let n = parent.len();
        if root as usize >= n || parent[root as usize] != root {
            return Err(Error::Config("root must map to itself".into()));
        }
        if let CoordMap::Explicit(pts) = &coords {
            if pts.len() != n {
                return Err(Error::Config("coordinate table length mismatch".into()));
            }
        }
        // 0 = unvisited, 1 = on current chain, 2 = reaches root.
        let mut state = vec![0u8; n];
        state[root as usize] = 2;
        let mut chain = Vec::new();
        for v in 0..n as u32 {
            if state[v as usize] != 0 {
                continue;
            }
            if parent[v as usize] == v {
                return Err(Error::Config(format!("second root at vertex {v}")));
            }
            let mut u = v;
            while state[u as usize] == 0 {
                state[u as usize] = 1;
                chain.push(u);
                u = parent[u as usize];
                if parent[u as usize] == u && u as usize != root as usize {
                    return Err(Error::Config(format!("second root at vertex {u}")));
                }
            }
            if state[u as usize] == 1 {
                return Err(Error::Config(format!("parent cycle through vertex {u}")));
            }
            for w in chain.drain(..) {
                state[w as usize] = 2;
            }
        }
        let parent_slot = vec![0u16; n];
        Ok(Self::assemble(parent, parent_slot, root, coords, wired_root))
    }

    fn assemble(
        parent: Vec<u32>,
        parent_slot: Vec<u16>,
        root: u32,
        coords: CoordMap,
        wired_root: bool,
    ) -> Self {
        let n = parent.len();
        let mut children_start = vec![0u32; n + 1];
        for v in 0..n as u32 {
            if v != root {
                children_start[parent[v as usize] as usize + 1] += 1;
            }
        }
        for i in 0..n {
            children_start[i + 1] += children_start[i];
        }
        let mut fill = children_start.clone();
        let mut children_data = vec![0u32; n.saturating_sub(1)];
        for v in 0..n as u32 {
            if v != root {
                let p = parent[v as usize] as usize;
                children_data[fill[p] as usize] = v;
                fill[p] += 1;
            }
        }
        Self {
            parent,
            parent_slot,
            root,
            children_start,
            children_data,
            coords,
            wired_root,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn parent(&self, v: u32) -> u32 {
        self.parent[v as usize]
    }

    pub fn parents(&self) -> &[u32] {
        &self.parent
    }

    pub fn parent_slot(&self, v: u32) -> u16 {
        self.parent_slot[v as usize]
    }

    pub fn is_root(&self, v: u32) -> bool {
        v == self.root
    }

    pub fn children(&self, v: u32) -> &[u32] {
        let a = self.children_start[v as usize] as usize;
        let b = self.children_start[v as usize + 1] as usize;
        &self.children_data[a..b]
    }

    pub fn contains(&self, v: u32) -> bool {
        (v as usize) < self.parent.len()
    }

    pub fn coord_map(&self) -> &CoordMap {
        &self.coords
    }

    pub fn coords_of(&self, v: u32) -> Option<LatticePoint> {
        match &self.coords {
            CoordMap::None => None,
            CoordMap::Explicit(pts) => pts.get(v as usize).copied(),
            CoordMap::Box { d, l } => {
                let indexer = BoxIndexer::new(*d as usize, *l).ok()?;
                if (v as usize) < indexer.box_count {
                    Some(indexer.point_of(v))
                } else {
                    None
                }
            }
        }
    }

    /// Vertex id of a lattice point, when the tree carries an embedding.
    pub fn vertex_of_point(&self, p: &LatticePoint) -> Option<u32> {
        match &self.coords {
            CoordMap::None => None,
            CoordMap::Explicit(pts) => pts.iter().position(|q| q == p).map(|i| i as u32),
            CoordMap::Box { d, l } => {
                let indexer = BoxIndexer::new(*d as usize, *l).ok()?;
                indexer.contains(p).then(|| indexer.index_of(p))
            }
        }
    }

    /// Tree degree of `v`: children plus the parent edge (absent at the
    /// root).
    pub fn degree(&self, v: u32) -> usize {
        self.children(v).len() + usize::from(!self.is_root(v))
    }

    /// Edge ids of the tree inside `graph`, sorted. Requires the tree
    /// to have been sampled from `graph` (slots index its adjacency).
    pub fn edge_ids(&self, graph: &FiniteGraph) -> Vec<u32> {
        let mut ids: Vec<u32> = (0..self.parent.len() as u32)
            .filter(|&v| v != self.root)
            .map(|v| graph.adjacency(v)[self.parent_slot[v as usize] as usize].1)
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Line tree on `m + 1` vertices embedded along `e_1` in `Z`:
    /// vertex `i` sits at coordinate `i`, the root is vertex `m`.
    pub fn line_tree(m: usize) -> Self {
        let n = m + 1;
        let parent: Vec<u32> = (0..n as u32)
            .map(|i| if i as usize == m { i } else { i + 1 })
            .collect();
        let coords = CoordMap::Explicit(
            (0..n)
                .map(|i| LatticePoint::new(&[i as i32]).unwrap())
                .collect(),
        );
        Self::from_parents(parent, m as u32, coords, false).unwrap()
    }

    /// Full binary tree of the given depth, root id 0, no embedding.
    pub fn full_binary_tree(depth: u32) -> Self {
        let n = (1usize << (depth + 1)) - 1;
        let parent: Vec<u32> = (0..n as u32)
            .map(|i| if i == 0 { 0 } else { (i - 1) / 2 })
            .collect();
        Self::from_parents(parent, 0, CoordMap::None, false).unwrap()
    }

    fn rebuild_children(self) -> Self {
        Self::assemble(
            self.parent,
            self.parent_slot,
            self.root,
            self.coords,
            self.wired_root,
        )
    }
}

/// Core of Wilson's algorithm: iterated loop-erased walks to the
/// growing tree, with loop erasure performed by next-pointer
/// overwriting. Deterministic given the seed and scan order.
fn wilson_core<G: WalkableGraph>(
    graph: &G,
    root: u32,
    scan: impl Iterator<Item = u32>,
    seed: RngSeed,
) -> (Vec<u32>, Vec<u16>) {
    let n = graph.vertex_count();
    let mut in_tree = vec![false; n];
    let mut next = vec![u32::MAX; n];
    let mut next_slot = vec![0u16; n];
    in_tree[root as usize] = true;
    let mut rng = seed.rng();
    for start in scan {
        let mut u = start;
        while !in_tree[u as usize] {
            let slot = rng.gen_range(0..graph.degree(u));
            next_slot[u as usize] = slot as u16;
            let w = graph.neighbor(u, slot);
            next[u as usize] = w;
            u = w;
        }
        u = start;
        while !in_tree[u as usize] {
            in_tree[u as usize] = true;
            u = next[u as usize];
        }
    }
    let mut parent = next;
    parent[root as usize] = root;
    (parent, next_slot)
}

/// Uniformly random spanning tree of a connected multigraph, rooted at
/// `root`, vertices scanned in id order.
pub fn wilson_sample(graph: &FiniteGraph, root: u32, seed: RngSeed) -> Result<SpanningTree> {
    let order: Vec<u32> = (0..graph.vertex_count()).collect();
    wilson_sample_with_order(graph, root, &order, seed)
}

/// [`wilson_sample`] with an explicit vertex scan order. The sampled
/// distribution does not depend on the order; determinism of a single
/// run does.
pub fn wilson_sample_with_order(
    graph: &FiniteGraph,
    root: u32,
    order: &[u32],
    seed: RngSeed,
) -> Result<SpanningTree> {
    if root >= graph.vertex_count() {
        return Err(Error::UnknownVertex(root));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let (parent, parent_slot) = wilson_core(graph, root, order.iter().copied(), seed);
    Ok(SpanningTree::assemble(
        parent,
        parent_slot,
        root,
        CoordMap::None,
        graph.supernode == Some(root),
    ))
}

/// Uniform spanning tree of the wired box `Λ(L) ∪ {supernode}` in
/// `Z^d`, rooted at the supernode; the finite-volume stand-in for the
/// infinite-volume tree.
pub fn wired_box_ust(d: usize, l: u32, seed: RngSeed) -> Result<SpanningTree> {
    if l == 0 {
        return Err(Error::Config("box radius must be at least 1".into()));
    }
    let indexer = BoxIndexer::new(d, l)?;
    let graph = WiredBoxGraph { indexer };
    let root = indexer.box_count as u32;
    let (parent, parent_slot) = wilson_core(&graph, root, 0..root, seed);
    Ok(SpanningTree {
        parent,
        parent_slot,
        root,
        children_start: Vec::new(),
        children_data: Vec::new(),
        coords: CoordMap::Box { d: d as u8, l },
        wired_root: true,
    }
    .rebuild_children())
}

/// Result of sampling the 0-wired box: the tree of the identified
/// graph (rooted at the identification vertex, which reuses the
/// origin's id) and the component of the origin after un-identifying.
#[derive(Debug, Clone)]
pub struct ZeroWiredSample {
    pub tree: SpanningTree,
    /// Vertices whose tree path reaches the identified vertex through
    /// the origin (always contains the origin id itself), sorted.
    pub origin_component: Vec<u32>,
}

/// UST of the box graph with the origin and the wired boundary
/// identified, un-identified into the origin's component.
pub fn zero_wired_box(d: usize, l: u32, seed: RngSeed) -> Result<ZeroWiredSample> {
    if l < 2 {
        return Err(Error::Config(
            "zero-wired box needs radius at least 2".into(),
        ));
    }
    let indexer = BoxIndexer::new(d, l)?;
    let origin = indexer.index_of(&LatticePoint::origin(d));
    let graph = ZeroWiredBoxGraph { indexer, origin };
    let count = indexer.box_count as u32;
    let (parent, parent_slot) = wilson_core(&graph, origin, 0..count, seed);

    // Tag each child of the identified vertex: did its parent edge use
    // the origin (a lattice step onto 0) or the wired boundary?
    let through_origin = |v: u32| -> bool {
        let slot = parent_slot[v as usize] as usize;
        let p = indexer.point_of(v);
        let q = p.step(slot >> 1, if slot & 1 == 0 { 1 } else { -1 });
        q.sup_norm() == 0
    };
    // 0 = unresolved, 1 = origin side, 2 = boundary side.
    let mut side = vec![0u8; indexer.box_count];
    side[origin as usize] = 1;
    let mut chain = Vec::new();
    for v in 0..count {
        if side[v as usize] != 0 {
            continue;
        }
        let mut u = v;
        while side[u as usize] == 0 {
            chain.push(u);
            if parent[u as usize] == origin {
                side[u as usize] = if through_origin(u) { 1 } else { 2 };
            } else {
                u = parent[u as usize];
            }
        }
        let s = side[u as usize];
        for w in chain.drain(..) {
            side[w as usize] = s;
        }
    }
    let origin_component: Vec<u32> = (0..count).filter(|&v| side[v as usize] == 1).collect();
    let tree = SpanningTree {
        parent,
        parent_slot,
        root: origin,
        children_start: Vec::new(),
        children_data: Vec::new(),
        coords: CoordMap::Box { d: d as u8, l },
        wired_root: true,
    }
    .rebuild_children();
    Ok(ZeroWiredSample {
        tree,
        origin_component,
    })
}

/// Extrinsic radius of a vertex set: maximum `l_infinity` norm of the
/// coordinates of its members.
pub fn extrinsic_radius(tree: &SpanningTree, vertices: &[u32]) -> u32 {
    vertices
        .iter()
        .filter_map(|&v| tree.coords_of(v))
        .map(|p| p.sup_norm())
        .max()
        .unwrap_or(0)
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: u32) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn clone_state(&self) -> Self {
        Self {
            parent: self.parent.clone(),
        }
    }

    fn find(&mut self, v: u32) -> u32 {
        let mut r = v;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut u = v;
        while self.parent[u as usize] != r {
            let next = self.parent[u as usize];
            self.parent[u as usize] = r;
            u = next;
        }
        r
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            false
        } else {
            self.parent[ra as usize] = rb;
            true
        }
    }
}

/// Every spanning tree of the multigraph, exactly once, as sorted edge
/// id lists in canonical (lexicographic) order. Parallel edges give
/// distinct trees, matching the uniform measure on the multigraph.
pub fn enumerate_spanning_trees(graph: &FiniteGraph) -> Result<Vec<Vec<u32>>> {
    let n = graph.vertex_count();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            vertices: n as u128,
            cap: ENUMERATION_LIMIT as u64,
        });
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut out = Vec::new();
    let edge_ids: Vec<u32> = (0..graph.edges().len() as u32).collect();
    let uf = UnionFind::new(n);
    recurse_trees(
        graph,
        uf,
        &edge_ids,
        &mut Vec::new(),
        n as usize - 1,
        &mut out,
    );
    out.sort();
    Ok(out)
}

/// Deletion/contraction recursion: the first usable edge is either in
/// the tree (contract) or not (delete; prune if connectivity is lost).
fn recurse_trees(
    graph: &FiniteGraph,
    mut uf: UnionFind,
    remaining: &[u32],
    chosen: &mut Vec<u32>,
    needed: usize,
    out: &mut Vec<Vec<u32>>,
) {
    if needed == 0 {
        let mut tree = chosen.clone();
        tree.sort_unstable();
        out.push(tree);
        return;
    }
    // Skip edges already internal to a contracted blob.
    let mut idx = 0;
    while idx < remaining.len() {
        let (a, b) = graph.edges()[remaining[idx] as usize];
        if uf.find(a) != uf.find(b) {
            break;
        }
        idx += 1;
    }
    if idx == remaining.len() {
        return;
    }
    let e = remaining[idx];
    let rest = &remaining[idx + 1..];

    // Include e: contract.
    {
        let mut uf2 = uf.clone_state();
        let (a, b) = graph.edges()[e as usize];
        uf2.union(a, b);
        chosen.push(e);
        recurse_trees(graph, uf2, rest, chosen, needed - 1, out);
        chosen.pop();
    }

    // Exclude e: viable only if the rest still connects everything.
    if still_connectable(graph, &uf, rest, needed) {
        recurse_trees(graph, uf.clone_state(), rest, chosen, needed, out);
    }
}

fn still_connectable(
    graph: &FiniteGraph,
    uf: &UnionFind,
    remaining: &[u32],
    needed: usize,
) -> bool {
    let mut probe = uf.clone_state();
    let mut merged = 0;
    for &e in remaining {
        let (a, b) = graph.edges()[e as usize];
        if probe.union(a, b) {
            merged += 1;
            if merged == needed {
                return true;
            }
        }
    }
    false
}
