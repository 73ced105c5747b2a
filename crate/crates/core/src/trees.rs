//! Rooted trees stored as canonical level sequences.
//!
//! A tree of order `n` is a sequence of `n` depths in depth-first order with
//! the root at level 1. Among all orderings of the children, the
//! lexicographically greatest sequence is kept, so structural equality is plain
//! sequence equality.
//!
//! Besides enumeration and the usual combinatorial functions (symmetry,
//! density) this module implements energy-preserving conjugation: for a leaf
//! `ℓ` the root-to-leaf path (the trunk) is removed, the remaining forests are
//! reattached along the trunk in reverse order, and the result carries the
//! parity `(-1)^m` where `m` is the depth of the leaf.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest order accepted by enumeration routines.
pub const MAX_ENUMERATION_ORDER: usize = 10;

type Levels = SmallVec<[u8; 12]>;

/// A rooted tree in canonical level-sequence form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RootedTree {
    levels: Levels,
}

/// Nested form used while rebuilding trees.
#[derive(Clone, Debug, Default)]
struct Shape {
    children: Vec<Shape>,
}

impl Shape {
    fn size(&self) -> usize {
        1 + self.children.iter().map(Shape::size).sum::<usize>()
    }
}

impl RootedTree {
    /// The single-node tree `•`.
    pub fn leaf() -> Self {
        RootedTree {
            levels: SmallVec::from_slice(&[1]),
        }
    }

    /// Builds a tree from any valid level sequence, canonicalizing it.
    pub fn from_levels(levels: &[u8]) -> Result<Self> {
        if levels.first() != Some(&1) {
            return Err(Error::InvalidTree(format!(
                "level sequence must start with 1, got {levels:?}"
            )));
        }
        for w in levels.windows(2) {
            if w[1] < 2 || w[1] > w[0] + 1 {
                return Err(Error::InvalidTree(format!(
                    "invalid level sequence {levels:?}"
                )));
            }
        }
        Ok(Self::from_shape(&shape_from_levels(levels)))
    }

    /// Joins `children` under a new root: `[t1, ..., tk]`.
    pub fn graft<I: IntoIterator<Item = RootedTree>>(children: I) -> Self {
        let mut kids: Vec<RootedTree> = children.into_iter().collect();
        // descending lexicographic order of the raw sequences gives the greatest concatenation
        kids.sort_by(|a, b| b.levels.cmp(&a.levels));
        let mut levels: Levels = SmallVec::new();
        levels.push(1);
        for k in &kids {
            levels.extend(k.levels.iter().map(|l| l + 1));
        }
        RootedTree { levels }
    }

    /// Tall tree (a path) with `order` nodes.
    pub fn tall(order: usize) -> Self {
        assert!(order >= 1);
        RootedTree {
            levels: (1..=order as u8).collect(),
        }
    }

    /// Bushy tree: a root with `order - 1` leaf children.
    pub fn bushy(order: usize) -> Self {
        assert!(order >= 1);
        let mut levels: Levels = SmallVec::new();
        levels.push(1);
        levels.extend(std::iter::repeat_n(2, order - 1));
        RootedTree { levels }
    }

    fn from_shape(shape: &Shape) -> Self {
        Self::graft(shape.children.iter().map(Self::from_shape))
    }

    fn to_shape(&self) -> Shape {
        shape_from_levels(&self.levels)
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    /// Number of nodes, `|τ|`.
    pub fn order(&self) -> usize {
        self.levels.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.levels.len() == 1
    }

    /// Child subtrees of the root in canonical (descending) order.
    pub fn children(&self) -> Vec<RootedTree> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, &l) in self.levels.iter().enumerate().skip(1) {
            if l == 2 {
                if let Some(s) = start {
                    out.push(self.subsequence(s, i));
                }
                start = Some(i);
            }
        }
        if let Some(s) = start {
            out.push(self.subsequence(s, self.levels.len()));
        }
        out
    }

    fn subsequence(&self, from: usize, to: usize) -> RootedTree {
        RootedTree {
            levels: self.levels[from..to].iter().map(|l| l - 1).collect(),
        }
    }

    /// Parent index of every node (`None` for the root), in level-sequence order.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parents = Vec::with_capacity(self.levels.len());
        let mut stack: Vec<usize> = Vec::new();
        for (i, &l) in self.levels.iter().enumerate() {
            stack.truncate(l as usize - 1);
            parents.push(stack.last().copied());
            stack.push(i);
        }
        parents
    }

    /// `true` for trees whose leaves all hang from the root.
    pub fn is_bushy(&self) -> bool {
        self.levels.iter().skip(1).all(|&l| l == 2)
    }

    pub fn is_tall(&self) -> bool {
        self.levels.iter().enumerate().all(|(i, &l)| l as usize == i + 1)
    }

    /// Every non-empty subtree `θ` that contains the root, paired with the
    /// forest left behind when `θ` is cut out. Each node subset is listed
    /// once, so isomorphic cuts appear with their multiplicity.
    pub fn root_subtrees(&self) -> Vec<(RootedTree, Vec<RootedTree>)> {
        fn rec(shape: &Shape) -> Vec<(Shape, Vec<RootedTree>)> {
            let mut acc: Vec<(Shape, Vec<RootedTree>)> = vec![(Shape::default(), Vec::new())];
            for child in &shape.children {
                let child_tree = RootedTree::from_shape(child);
                let child_cuts = rec(child);
                let mut next = Vec::with_capacity(acc.len() * (child_cuts.len() + 1));
                for (theta, forest) in &acc {
                    let mut f = forest.clone();
                    f.push(child_tree.clone());
                    next.push((theta.clone(), f));
                    for (ctheta, cforest) in &child_cuts {
                        let mut t = theta.clone();
                        t.children.push(ctheta.clone());
                        let mut f = forest.clone();
                        f.extend(cforest.iter().cloned());
                        next.push((t, f));
                    }
                }
                acc = next;
            }
            acc
        }
        rec(&self.to_shape())
            .into_iter()
            .map(|(theta, forest)| (RootedTree::from_shape(&theta), forest))
            .collect()
    }
}

fn shape_from_levels(levels: &[u8]) -> Shape {
    // path of indices into nested children vectors
    let mut root = Shape::default();
    let mut path: Vec<usize> = Vec::new();
    for &l in levels.iter().skip(1) {
        path.truncate(l as usize - 2);
        let mut node = &mut root;
        for &i in &path {
            node = &mut node.children[i];
        }
        node.children.push(Shape::default());
        path.push(node.children.len() - 1);
    }
    root
}

impl Ord for RootedTree {
    /// Trees are ordered by order, then by descending level sequence, so the
    /// tall tree comes first among trees of equal order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.levels.cmp(&self.levels))
    }
}

impl PartialOrd for RootedTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RootedTree {
    /// Bracket notation with leaves as `•`; children are listed smallest first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            return f.write_str("•");
        }
        f.write_str("[")?;
        let children = self.children();
        for (i, c) in children.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for RootedTree {
    type Err = Error;

    /// Parses bracket notation. `•`, `.`, `*` and `[]` all denote a single
    /// node; separators between siblings are optional.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let shape = parse_node(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!("trailing input in tree {s:?}")));
        }
        Ok(RootedTree::from_shape(&shape))
    }
}

fn parse_node(chars: &[char], pos: &mut usize) -> Result<Shape> {
    match chars.get(*pos) {
        Some('•') | Some('.') | Some('*') => {
            *pos += 1;
            Ok(Shape::default())
        }
        Some('[') => {
            *pos += 1;
            let mut shape = Shape::default();
            loop {
                match chars.get(*pos) {
                    Some(']') => {
                        *pos += 1;
                        return Ok(shape);
                    }
                    Some(',') => *pos += 1,
                    Some(_) => shape.children.push(parse_node(chars, pos)?),
                    None => return Err(Error::Parse("unbalanced brackets in tree".into())),
                }
            }
        }
        Some(c) => Err(Error::Parse(format!("unexpected character {c:?} in tree"))),
        None => Err(Error::Parse("empty tree".into())),
    }
}

/// A multiset of rooted trees.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Forest {
    trees: Vec<RootedTree>,
}

impl Forest {
    pub fn new(mut trees: Vec<RootedTree>) -> Self {
        trees.sort();
        Forest { trees }
    }

    pub fn trees(&self) -> &[RootedTree] {
        &self.trees
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn order(&self) -> usize {
        self.trees.iter().map(RootedTree::order).sum()
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("{")?;
        for (i, t) in self.trees.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

/// A childless node of a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LeafRef {
    /// Position in the level sequence.
    pub node_index: usize,
    /// Distance from the root; the root itself has depth 0.
    pub depth: usize,
}

/// All trees of order `1..=max_order`, sorted by order and then by
/// descending level sequence.
pub fn generate_trees(max_order: usize) -> Result<Vec<RootedTree>> {
    check_order(max_order)?;
    Ok((1..=max_order).flat_map(trees_of_order).collect())
}

fn check_order(max_order: usize) -> Result<()> {
    if max_order == 0 || max_order > MAX_ENUMERATION_ORDER {
        return Err(Error::OrderOutOfRange {
            order: max_order,
            max: MAX_ENUMERATION_ORDER,
        });
    }
    Ok(())
}

/// Trees of exactly `order` nodes, generated with the Beyer-Hedetniemi
/// successor rule in decreasing lexicographic order.
pub fn trees_of_order(order: usize) -> Vec<RootedTree> {
    if order == 0 {
        return Vec::new();
    }
    let mut levels: Vec<u8> = (1..=order as u8).collect();
    let mut out = vec![RootedTree {
        levels: SmallVec::from_slice(&levels),
    }];
    loop {
        let Some(p) = levels.iter().rposition(|&l| l > 2) else {
            break;
        };
        let q = levels[..p]
            .iter()
            .rposition(|&l| l == levels[p] - 1)
            .expect("a deeper node always has a parent level before it");
        let shift = p - q;
        for i in p..order {
            levels[i] = levels[i - shift];
        }
        out.push(RootedTree {
            levels: SmallVec::from_slice(&levels),
        });
    }
    out
}

/// `σ(τ)`: order of the automorphism group.
pub fn symmetry(tree: &RootedTree) -> u64 {
    let children = tree.children();
    let mut result: u64 = children.iter().map(symmetry).product();
    // children are sorted, so equal subtrees are adjacent
    let mut i = 0;
    while i < children.len() {
        let mut j = i + 1;
        while j < children.len() && children[j] == children[i] {
            j += 1;
        }
        result *= (1..=(j - i) as u64).product::<u64>();
        i = j;
    }
    result
}

/// `γ(τ)`: product over nodes of the sizes of the subtrees they root.
pub fn density(tree: &RootedTree) -> u64 {
    tree.order() as u64 * tree.children().iter().map(density).product::<u64>()
}

/// Childless nodes in level-sequence order. The single-node tree reports its
/// root with depth 0.
pub fn leaves(tree: &RootedTree) -> Vec<LeafRef> {
    let lv = tree.levels();
    (0..lv.len())
        .filter(|&i| i + 1 == lv.len() || lv[i + 1] <= lv[i])
        .map(|i| LeafRef {
            node_index: i,
            depth: lv[i] as usize - 1,
        })
        .collect()
}

fn check_leaf(tree: &RootedTree, leaf: LeafRef) -> Result<()> {
    if tree.order() < 2 {
        return Err(Error::Domain(
            "the single-node tree has no energy-preserving conjugate".into(),
        ));
    }
    if !leaves(tree).contains(&leaf) {
        return Err(Error::Domain(format!(
            "node {} (depth {}) is not a leaf of {tree}",
            leaf.node_index, leaf.depth
        )));
    }
    Ok(())
}

fn children_lists(tree: &RootedTree) -> Vec<Vec<usize>> {
    let mut kids = vec![Vec::new(); tree.order()];
    for (i, p) in tree.parents().into_iter().enumerate() {
        if let Some(p) = p {
            kids[p].push(i);
        }
    }
    kids
}

fn shape_below(node: usize, kids: &[Vec<usize>]) -> Shape {
    Shape {
        children: kids[node].iter().map(|&c| shape_below(c, kids)).collect(),
    }
}

/// Root-to-leaf path of node indices, root first.
fn trunk(tree: &RootedTree, leaf: LeafRef) -> Vec<usize> {
    let parents = tree.parents();
    let mut path = vec![leaf.node_index];
    while let Some(p) = parents[*path.last().unwrap()] {
        path.push(p);
    }
    path.reverse();
    path
}

/// The forests `f_1, ..., f_m` hanging off the trunk of `leaf`, ordered from
/// the root down.
pub fn remainder(tree: &RootedTree, leaf: LeafRef) -> Result<Vec<Forest>> {
    check_leaf(tree, leaf)?;
    let kids = children_lists(tree);
    let path = trunk(tree, leaf);
    Ok(path
        .windows(2)
        .map(|w| {
            Forest::new(
                kids[w[0]]
                    .iter()
                    .filter(|&&c| c != w[1])
                    .map(|&c| RootedTree::from_shape(&shape_below(c, &kids)))
                    .collect(),
            )
        })
        .collect())
}

/// Energy-preserving conjugate `τ*(ℓ)` and its parity `(-1)^m`, built by
/// reattaching the remainder forests along the trunk in reverse order.
pub fn ep_conjugate(tree: &RootedTree, leaf: LeafRef) -> Result<(RootedTree, i8)> {
    let forests = remainder(tree, leaf)?;
    let m = forests.len();
    // trunk nodes 0..m; node k receives forest f_{m-k}, the leaf receives nothing
    let mut shape = Shape::default();
    for k in (0..m).rev() {
        let mut node = Shape {
            children: forests[m - 1 - k].trees().iter().map(RootedTree::to_shape).collect(),
        };
        node.children.push(shape);
        shape = node;
    }
    Ok((RootedTree::from_shape(&shape), parity(m)))
}

/// Conjugate via re-rooting: the parent of `ℓ` becomes the root and `ℓ` is
/// moved under the original root.
pub fn ep_conjugate_by_rerooting(tree: &RootedTree, leaf: LeafRef) -> Result<(RootedTree, i8)> {
    check_leaf(tree, leaf)?;
    let parents = tree.parents();
    let n = tree.order();
    let mut adj = vec![Vec::new(); n];
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            if i != leaf.node_index {
                adj[i].push(p);
                adj[p].push(i);
            }
        }
    }
    adj[0].push(leaf.node_index);
    adj[leaf.node_index].push(0);
    let new_root = parents[leaf.node_index].expect("leaf of a tree with two or more nodes");

    fn build(node: usize, from: Option<usize>, adj: &[Vec<usize>]) -> Shape {
        Shape {
            children: adj[node]
                .iter()
                .filter(|&&c| Some(c) != from)
                .map(|&c| build(c, Some(node), adj))
                .collect(),
        }
    }
    let shape = build(new_root, None, &adj);
    debug_assert_eq!(shape.size(), n);
    Ok((RootedTree::from_shape(&shape), parity(leaf.depth)))
}

fn parity(m: usize) -> i8 {
    if m % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Conjugacy classes for each order `2..=max_order` (order 1 is its own class).
///
/// The result maps each order to the list of classes; each class is sorted
/// and classes are sorted by their first tree.
pub fn conjugacy_classes(max_order: usize) -> Result<BTreeMap<usize, Vec<Vec<RootedTree>>>> {
    check_order(max_order)?;
    let mut out = BTreeMap::new();
    for order in 1..=max_order {
        out.insert(order, classes_of_order(order));
    }
    Ok(out)
}

pub(crate) fn classes_of_order(order: usize) -> Vec<Vec<RootedTree>> {
    let trees = trees_of_order(order);
    if order == 1 {
        return vec![trees];
    }
    let index: BTreeMap<&RootedTree, usize> = trees.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut uf: Vec<usize> = (0..trees.len()).collect();
    fn find(uf: &mut [usize], mut i: usize) -> usize {
        while uf[i] != i {
            uf[i] = uf[uf[i]];
            i = uf[i];
        }
        i
    }
    for (i, t) in trees.iter().enumerate() {
        for leaf in leaves(t) {
            let (conj, _) = ep_conjugate(t, leaf).expect("leaf enumerated from the tree");
            let j = index[&conj];
            let (a, b) = (find(&mut uf, i), find(&mut uf, j));
            if a != b {
                uf[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<RootedTree>> = BTreeMap::new();
    for (i, t) in trees.iter().enumerate() {
        let r = find(&mut uf, i);
        groups.entry(r).or_default().push(t.clone());
    }
    groups.into_values().collect()
}
