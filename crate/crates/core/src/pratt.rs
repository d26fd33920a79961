//! Pratt trees: below a prime `p` hang the primes dividing `p - 1`, each
//! tagged with its exact exponent, recursively down to 2.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use dashmap::DashMap;
use serde::Serialize;

use crate::arith::{factorize, is_prime};
use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq)]
pub struct PrattNode {
    prime: u64,
    children: Vec<PrattEdge>,
}

/// Edge to a child `q` with `q^alpha` exactly dividing the parent minus one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrattEdge {
    pub alpha: u32,
    pub node: Arc<PrattNode>,
}

impl PrattNode {
    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Children in ascending prime order.
    pub fn children(&self) -> &[PrattEdge] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn height(&self) -> u32 {
        self.children
            .iter()
            .map(|e| 1 + e.node.height())
            .max()
            .unwrap_or(0)
    }
}

/// Subtree cache shared between builds, keyed by prime.
#[derive(Debug, Default)]
pub struct PrattMemo {
    nodes: DashMap<u64, Arc<PrattNode>>,
}

impl PrattMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrattTree {
    root: Arc<PrattNode>,
}

impl PrattTree {
    pub fn root(&self) -> &PrattNode {
        &self.root
    }

    pub fn prime(&self) -> u64 {
        self.root.prime
    }

    pub fn height(&self) -> u32 {
        self.root.height()
    }

    /// Node instances per depth, counting repeats across subtrees.
    pub fn level_counts(&self) -> Vec<u64> {
        let mut counts = Vec::new();
        fn walk(node: &PrattNode, depth: usize, counts: &mut Vec<u64>) {
            if counts.len() <= depth {
                counts.push(0);
            }
            counts[depth] += 1;
            for e in &node.children {
                walk(&e.node, depth + 1, counts);
            }
        }
        walk(&self.root, 0, &mut counts);
        counts
    }

    /// Distinct primes per depth.
    pub fn distinct_level_counts(&self) -> Vec<u64> {
        let mut level: Vec<&PrattNode> = vec![&self.root];
        let mut counts = Vec::new();
        while !level.is_empty() {
            counts.push(level.len() as u64);
            let mut next: Vec<&PrattNode> = level
                .iter()
                .flat_map(|n| n.children.iter().map(|e| e.node.as_ref()))
                .collect();
            next.sort_unstable_by_key(|n| n.prime);
            next.dedup_by_key(|n| n.prime);
            level = next;
        }
        counts
    }

    pub fn node_count(&self) -> u64 {
        self.level_counts().iter().sum()
    }

    /// Every root-to-leaf path.
    pub fn branches(&self) -> Vec<Branch> {
        let mut out = Vec::new();
        let mut primes = vec![self.root.prime];
        let mut alphas = Vec::new();
        fn walk(
            node: &PrattNode,
            primes: &mut Vec<u64>,
            alphas: &mut Vec<u32>,
            out: &mut Vec<Branch>,
        ) {
            if node.children.is_empty() {
                out.push(Branch {
                    primes: primes.clone(),
                    alphas: alphas.clone(),
                });
                return;
            }
            for e in &node.children {
                primes.push(e.node.prime);
                alphas.push(e.alpha);
                walk(&e.node, primes, alphas, out);
                primes.pop();
                alphas.pop();
            }
        }
        walk(&self.root, &mut primes, &mut alphas, &mut out);
        out
    }

    /// Largest `Σ(α_i - 1)` over root-to-leaf branches.
    pub fn branch_excess(&self) -> u32 {
        fn excess(node: &PrattNode) -> u32 {
            node.children
                .iter()
                .map(|e| e.alpha - 1 + excess(&e.node))
                .max()
                .unwrap_or(0)
        }
        excess(&self.root)
    }

    /// Largest `depth + Σ(α_i - 1)` over branches, i.e. the largest `Σ α_i`.
    pub fn branch_weight(&self) -> u32 {
        fn weight(node: &PrattNode) -> u32 {
            node.children
                .iter()
                .map(|e| e.alpha + weight(&e.node))
                .max()
                .unwrap_or(0)
        }
        weight(&self.root)
    }
}

/// A root-to-leaf path: `primes[0]` is the root, `alphas[i]` labels the edge
/// from `primes[i]` to `primes[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub primes: Vec<u64>,
    pub alphas: Vec<u32>,
}

impl Branch {
    pub fn depth(&self) -> usize {
        self.alphas.len()
    }

    pub fn excess(&self) -> u32 {
        self.alphas.iter().map(|a| a - 1).sum()
    }

    /// `∏ α_i`, saturating at `u32::MAX`.
    pub fn alpha_product(&self) -> u32 {
        self.alphas
            .iter()
            .fold(1u32, |acc, &a| acc.saturating_mul(a))
    }
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{p} is not prime")))
    }
}

/// Builds the Pratt tree of `p`, reusing and filling `memo` if given.
pub fn build_tree(p: u64, memo: Option<&PrattMemo>) -> Result<PrattTree> {
    require_prime(p)?;
    let root = match memo {
        Some(m) => build_memo(p, m),
        None => build_plain(p),
    };
    Ok(PrattTree { root })
}

fn child_factors(p: u64) -> Vec<(u64, u32)> {
    if p == 2 {
        Vec::new()
    } else {
        factorize(p - 1).factors().to_vec()
    }
}

fn build_plain(p: u64) -> Arc<PrattNode> {
    let children = child_factors(p)
        .into_iter()
        .map(|(q, alpha)| PrattEdge {
            alpha,
            node: build_plain(q),
        })
        .collect();
    Arc::new(PrattNode { prime: p, children })
}

fn build_memo(p: u64, memo: &PrattMemo) -> Arc<PrattNode> {
    if let Some(hit) = memo.nodes.get(&p) {
        return Arc::clone(&hit);
    }
    let children = child_factors(p)
        .into_iter()
        .map(|(q, alpha)| PrattEdge {
            alpha,
            node: build_memo(q, memo),
        })
        .collect();
    let node = Arc::new(PrattNode { prime: p, children });
    // a concurrent builder may have won; keep whichever landed first
    Arc::clone(&memo.nodes.entry(p).or_insert(node))
}

/// Memoized `H(p)` with `H(2) = 0` and `H(p) = 1 + max_{q | p-1} H(q)`.
#[derive(Debug, Clone)]
pub struct HeightMemo {
    heights: HashMap<u64, u32>,
}

impl Default for HeightMemo {
    fn default() -> Self {
        Self {
            heights: HashMap::from([(2, 0)]),
        }
    }
}

impl HeightMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn height(&mut self, p: u64) -> Result<u32> {
        require_prime(p)?;
        Ok(self.height_unchecked(p))
    }

    fn height_unchecked(&mut self, p: u64) -> u32 {
        if let Some(&h) = self.heights.get(&p) {
            return h;
        }
        let h = 1 + factorize(p - 1)
            .primes()
            .map(|q| self.height_unchecked(q))
            .max()
            .unwrap_or(0);
        self.heights.insert(p, h);
        h
    }
}

pub fn height(p: u64) -> Result<u32> {
    HeightMemo::new().height(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LevelMode {
    #[default]
    Instances,
    DistinctPrimes,
}

pub fn level_counts(p: u64, mode: LevelMode) -> Result<Vec<u64>> {
    let t = build_tree(p, None)?;
    Ok(match mode {
        LevelMode::Instances => t.level_counts(),
        LevelMode::DistinctPrimes => t.distinct_level_counts(),
    })
}

pub fn branch_excess(p: u64) -> Result<u32> {
    Ok(build_tree(p, None)?.branch_excess())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Dot,
    Json,
}

impl FromStr for TreeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(TreeFormat::Dot),
            "json" => Ok(TreeFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Serialize)]
struct JsonNode {
    p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<u32>,
    children: Vec<JsonNode>,
}

fn to_json_node(node: &PrattNode, alpha: Option<u32>) -> JsonNode {
    JsonNode {
        p: node.prime,
        alpha,
        children: node
            .children
            .iter()
            .map(|e| to_json_node(&e.node, Some(e.alpha)))
            .collect(),
    }
}

/// Compact JSON or a DOT digraph. Output is byte-deterministic.
///
/// DOT node ids are the slash-joined path from the root, so a prime that
/// occurs in several subtrees gets one node per occurrence.
pub fn render_tree(t: &PrattTree, format: TreeFormat) -> String {
    match format {
        TreeFormat::Json => serde_json::to_string(&to_json_node(&t.root, None))
            .expect("tree serialization is infallible"),
        TreeFormat::Dot => {
            let mut out = String::from("digraph pratt {\n");
            fn walk(node: &PrattNode, id: &str, out: &mut String) {
                let _ = writeln!(out, "  \"{id}\" [label=\"{}\"];", node.prime);
                for e in &node.children {
                    let child = format!("{id}/{}", e.node.prime);
                    if e.alpha > 1 {
                        let _ = writeln!(out, "  \"{id}\" -> \"{child}\" [label={}];", e.alpha);
                    } else {
                        let _ = writeln!(out, "  \"{id}\" -> \"{child}\";");
                    }
                    walk(&e.node, &child, out);
                }
            }
            walk(&t.root, &t.root.prime.to_string(), &mut out);
            out.push_str("}\n");
            out
        }
    }
}
