//! Nested-dissection orderings producing a supernode tree in postorder.

use super::csr::CsrMatrix;

/// Supernodes listed children-before-parent. Each node owns a set of
/// variables that are eliminated together as one dense front.
#[derive(Debug, Clone, Default)]
pub struct SupernodeTree {
    pub vars: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
}

impl SupernodeTree {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// A single node holding every variable.
    pub fn single(n: usize) -> Self {
        Self {
            vars: vec![(0..n).collect()],
            parent: vec![None],
        }
    }

    fn push(&mut self, vars: Vec<usize>, children: &[usize]) -> usize {
        let id = self.vars.len();
        self.vars.push(vars);
        self.parent.push(None);
        for &c in children {
            self.parent[c] = Some(id);
        }
        id
    }
}

/// Geometric dissection for lattice-structured unknowns.
///
/// `coords` are integer node coordinates; couplings never cross a line whose
/// coordinate is a multiple of `stride`, so those lines serve as separators.
pub fn geometric_nested_dissection(coords: &[[i64; 2]], stride: i64, leaf: usize) -> SupernodeTree {
    let mut tree = SupernodeTree::default();
    let all: Vec<usize> = (0..coords.len()).collect();
    if !all.is_empty() {
        dissect_box(coords, stride.max(1), leaf.max(1), all, &mut tree);
    }
    tree
}

fn dissect_box(
    coords: &[[i64; 2]],
    stride: i64,
    leaf: usize,
    set: Vec<usize>,
    tree: &mut SupernodeTree,
) -> usize {
    if set.len() <= leaf {
        return tree.push(set, &[]);
    }
    let mut lo = [i64::MAX; 2];
    let mut hi = [i64::MIN; 2];
    for &v in &set {
        for a in 0..2 {
            lo[a] = lo[a].min(coords[v][a]);
            hi[a] = hi[a].max(coords[v][a]);
        }
    }
    let mut axes = [0usize, 1];
    if hi[1] - lo[1] > hi[0] - lo[0] {
        axes.swap(0, 1);
    }
    for &axis in &axes {
        let Some(cut) = split_line(lo[axis], hi[axis], stride) else {
            continue;
        };
        let (mut left, mut right, mut sep) = (Vec::new(), Vec::new(), Vec::new());
        for &v in &set {
            match coords[v][axis].cmp(&cut) {
                std::cmp::Ordering::Less => left.push(v),
                std::cmp::Ordering::Greater => right.push(v),
                std::cmp::Ordering::Equal => sep.push(v),
            }
        }
        let mut children = Vec::with_capacity(2);
        if !left.is_empty() {
            children.push(dissect_box(coords, stride, leaf, left, tree));
        }
        if !right.is_empty() {
            children.push(dissect_box(coords, stride, leaf, right, tree));
        }
        return tree.push(sep, &children);
    }
    tree.push(set, &[])
}

/// Multiple of `stride` strictly inside `(lo, hi)` nearest the midpoint.
fn split_line(lo: i64, hi: i64, stride: i64) -> Option<i64> {
    let mid = (lo + hi) / 2;
    let down = mid.div_euclid(stride) * stride;
    let up = down + stride;
    [down, up, down - stride]
        .into_iter()
        .filter(|&c| c > lo && c < hi)
        .min_by_key(|&c| (c - mid).abs())
}

/// Graph dissection using breadth-first level sets as separators.
/// The sparsity pattern is symmetrised internally.
pub fn graph_nested_dissection(a: &CsrMatrix, leaf: usize) -> SupernodeTree {
    let adj = symmetric_adjacency(a);
    let n = a.nrows();
    let mut tree = SupernodeTree::default();
    if n == 0 {
        return tree;
    }
    let mut ws = Workspace {
        adj,
        tag: vec![0; n],
        level: vec![u32::MAX; n],
        next_tag: 1,
    };
    ws.dissect((0..n).collect(), leaf.max(1), &mut tree);
    tree
}

/// Off-diagonal adjacency lists of `A + A^T`.
pub fn symmetric_adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

struct Workspace {
    adj: Vec<Vec<usize>>,
    tag: Vec<u32>,
    level: Vec<u32>,
    next_tag: u32,
}

impl Workspace {
    fn dissect(&mut self, set: Vec<usize>, leaf: usize, tree: &mut SupernodeTree) -> usize {
        if set.len() <= leaf {
            return tree.push(set, &[]);
        }
        let tag = self.next_tag;
        self.next_tag += 1;
        for &v in &set {
            self.tag[v] = tag;
        }
        let (far, _) = self.bfs(set[0], tag);
        let (_, levels) = self.bfs(far, tag);
        let reached: usize = levels.iter().map(Vec::len).sum();

        if reached < set.len() {
            // disconnected: split off the reached component with no separator
            let comp_tag = self.next_tag;
            self.next_tag += 1;
            let comp: Vec<usize> = levels.into_iter().flatten().collect();
            for &v in &comp {
                self.tag[v] = comp_tag;
            }
            let rest: Vec<usize> = set
                .iter()
                .copied()
                .filter(|&v| self.tag[v] == tag)
                .collect();
            let a = self.dissect(comp, leaf, tree);
            let b = self.dissect(rest, leaf, tree);
            return tree.push(Vec::new(), &[a, b]);
        }
        if levels.len() < 3 {
            return tree.push(set, &[]);
        }
        let half = set.len() / 2;
        let mut acc = 0;
        let mut mid = 1;
        for (l, lv) in levels.iter().enumerate() {
            acc += lv.len();
            if acc >= half {
                mid = l.clamp(1, levels.len() - 2);
                break;
            }
        }
        let left: Vec<usize> = levels[..mid].iter().flatten().copied().collect();
        let right: Vec<usize> = levels[mid + 1..].iter().flatten().copied().collect();
        let sep = levels[mid].clone();
        let a = self.dissect(left, leaf, tree);
        let b = self.dissect(right, leaf, tree);
        tree.push(sep, &[a, b])
    }

    /// Breadth-first search restricted to vertices carrying `tag`. Returns
    /// the last vertex reached and the level sets.
    fn bfs(&mut self, start: usize, tag: u32) -> (usize, Vec<Vec<usize>>) {
        let mut levels: Vec<Vec<usize>> = vec![vec![start]];
        self.level[start] = 0;
        loop {
            let cur = levels.last().unwrap();
            let mut next = Vec::new();
            for &v in cur {
                for &u in &self.adj[v] {
                    if self.tag[u] == tag && self.level[u] == u32::MAX {
                        self.level[u] = levels.len() as u32;
                        next.push(u);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        for &v in levels.iter().flatten() {
            self.level[v] = u32::MAX;
        }
        let last = *levels.last().unwrap().last().unwrap();
        (last, levels)
    }
}
