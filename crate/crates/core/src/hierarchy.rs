// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Explicit rooted hierarchies over the item domain.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A rooted tree whose leaves are exactly the domain items `0..N`.
///
/// Nodes are dense indices; leaves are named by their item number and
/// inner nodes by arbitrary tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    names: Vec<String>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    by_depth: Vec<Vec<usize>>,
    depth_index: Vec<usize>,
    leaves: Vec<usize>,
    root: usize,
}

impl Hierarchy {
    /// Builds from `(child, parent)` name pairs. Every node without children
    /// must be named by an item below `n`, and every item must appear.
    pub fn from_edges<I, S>(n: u64, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut intern = |name: &str, names: &mut Vec<String>, parent: &mut Vec<Option<usize>>| {
            *ids.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                parent.push(None);
                names.len() - 1
            })
        };
        for (child, par) in edges {
            let (child, par) = (child.as_ref(), par.as_ref());
            if child == par {
                return Err(Error::Hierarchy(format!("node {child} is its own parent")));
            }
            let c = intern(child, &mut names, &mut parent);
            let p = intern(par, &mut names, &mut parent);
            match parent[c] {
                Some(existing) if existing != p => {
                    return Err(Error::Hierarchy(format!(
                        "node {child} has two parents: {} and {par}",
                        names[existing]
                    )))
                }
                _ => parent[c] = Some(p),
            }
        }
        Self::assemble(n, names, parent)
    }

    /// Parses one `child parent` edge per line; blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str, n: u64) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Hierarchy(format!(
                    "line {}: expected `child parent`, got {line:?}",
                    lineno + 1
                )));
            }
            edges.push((fields[0], fields[1]));
        }
        Self::from_edges(n, edges)
    }

    /// Complete `fanout`-ary hierarchy over `0..n`, inner nodes named
    /// `L<depth-from-leaves>.<index>`.
    pub fn balanced(n: u64, fanout: u64) -> Result<Self> {
        if fanout < 2 || n < 1 {
            return Err(Error::Hierarchy("fanout must be >= 2 and n >= 1".into()));
        }
        let mut edges = Vec::new();
        let mut level: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let mut height = 0;
        while level.len() > 1 {
            height += 1;
            let mut next = Vec::new();
            for (g, chunk) in level.chunks(fanout as usize).enumerate() {
                let name = format!("L{height}.{g}");
                for c in chunk {
                    edges.push((c.clone(), name.clone()));
                }
                next.push(name);
            }
            level = next;
        }
        if edges.is_empty() {
            return Err(Error::Hierarchy("a hierarchy needs at least one edge".into()));
        }
        Self::from_edges(n, edges)
    }

    fn assemble(n: u64, names: Vec<String>, parent: Vec<Option<usize>>) -> Result<Self> {
        let count = names.len();
        let roots: Vec<usize> = (0..count).filter(|&v| parent[v].is_none()).collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(Error::Hierarchy("no root (cycle or empty hierarchy)".into())),
            many => {
                return Err(Error::Hierarchy(format!(
                    "{} roots: {}",
                    many.len(),
                    many.iter().map(|&r| names[r].as_str()).collect::<Vec<_>>().join(", ")
                )))
            }
        };
        let mut children = vec![Vec::new(); count];
        for v in 0..count {
            if let Some(p) = parent[v] {
                children[p].push(v);
            }
        }
        // breadth-first from the root: detects cycles and assigns depths
        let mut depth = vec![usize::MAX; count];
        depth[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut seen = 1;
        while let Some(v) = queue.pop_front() {
            for &c in &children[v] {
                depth[c] = depth[v] + 1;
                seen += 1;
                queue.push_back(c);
            }
        }
        if seen != count {
            return Err(Error::Hierarchy("hierarchy contains a cycle".into()));
        }
        let mut leaves = vec![usize::MAX; n as usize];
        for v in 0..count {
            if !children[v].is_empty() {
                continue;
            }
            let item: u64 = names[v].parse().map_err(|_| {
                Error::Hierarchy(format!("leaf {} is not a domain item", names[v]))
            })?;
            if item >= n {
                return Err(Error::Hierarchy(format!("leaf {item} is outside [0, {n})")));
            }
            leaves[item as usize] = v;
        }
        if let Some(missing) = leaves.iter().position(|&v| v == usize::MAX) {
            return Err(Error::Hierarchy(format!(
                "leaves do not cover the domain: item {missing} is missing"
            )));
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        let mut by_depth = vec![Vec::new(); height + 1];
        let mut depth_index = vec![0; count];
        for v in 0..count {
            depth_index[v] = by_depth[depth[v]].len();
            by_depth[depth[v]].push(v);
        }
        Ok(Self {
            names,
            parent,
            children,
            depth,
            by_depth,
            depth_index,
            leaves,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Number of domain items (leaves).
    pub fn domain(&self) -> u64 {
        self.leaves.len() as u64
    }

    /// Depth of the deepest leaf.
    pub fn height(&self) -> usize {
        self.by_depth.len() - 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    pub fn nodes_at_depth(&self, depth: usize) -> &[usize] {
        &self.by_depth[depth]
    }

    /// Position of `node` among the nodes of its depth.
    pub fn depth_index(&self, node: usize) -> usize {
        self.depth_index[node]
    }

    pub fn leaf(&self, item: u64) -> Option<usize> {
        self.leaves.get(item as usize).copied()
    }

    /// `node`, its parent, ..., the root.
    pub fn path_to_root(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(node), move |&v| self.parent[v])
    }

    pub fn is_ancestor(&self, ancestor: usize, node: usize) -> bool {
        ancestor != node && self.path_to_root(node).any(|v| v == ancestor)
    }
}
