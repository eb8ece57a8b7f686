//! Collaboration graphs and the social features.
//!
//! Two users collaborate on an article when each posted at least `theta`
//! comments there; the weight of their edge is the number of such articles.
//! `G_k` keeps the edges whose weight is strictly greater than `k`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::cdf::CdfTable;
use crate::data::Corpus;
use crate::error::{Error, Result};

pub const DEFAULT_THETA: u32 = 2;
pub const DEFAULT_K_GRID: [u32; 5] = [0, 4, 16, 64, 128];
pub const DEFAULT_CLIQUE_BUDGET: u64 = 1_000_000;

/// Pairwise collaboration intensities for one `theta`, before thresholding.
#[derive(Debug, Clone, PartialEq)]
pub struct CollaborationWeights {
    pub theta: u32,
    users: Vec<String>,
    /// `(a, b, weight)` with `a < b` as indices into `users`, sorted.
    edges: Vec<(u32, u32, u32)>,
}

impl CollaborationWeights {
    pub fn from_corpus(corpus: &Corpus, theta: u32) -> Self {
        let theta = theta.max(1);
        let users: Vec<String> = corpus.user_ids().map(str::to_string).collect();
        let index: HashMap<&str, u32> = users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.as_str(), i as u32))
            .collect();
        let articles: Vec<&Vec<usize>> = corpus.article_index().values().collect();
        let merged = articles
            .par_iter()
            .fold(HashMap::<(u32, u32), u32>::new, |mut acc, comment_idx| {
                let mut per_user: BTreeMap<u32, u32> = BTreeMap::new();
                for &i in comment_idx.iter() {
                    *per_user
                        .entry(index[corpus.comments()[i].user_id.as_str()])
                        .or_default() += 1;
                }
                let qualifying: Vec<u32> = per_user
                    .into_iter()
                    .filter(|&(_, n)| n >= theta)
                    .map(|(u, _)| u)
                    .collect();
                for (i, &a) in qualifying.iter().enumerate() {
                    for &b in &qualifying[i + 1..] {
                        *acc.entry((a, b)).or_default() += 1;
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });
        let mut edges: Vec<(u32, u32, u32)> =
            merged.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        edges.sort_unstable();
        CollaborationWeights {
            theta,
            users,
            edges,
        }
    }

    pub fn graph(&self, k: u32) -> CollaborationGraph {
        let edges = self.edges.iter().filter(|e| e.2 > k).map(|&(a, b, w)| {
            (
                self.users[a as usize].as_str(),
                self.users[b as usize].as_str(),
                w,
            )
        });
        CollaborationGraph::from_edges(self.theta, k, edges)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollaborationGraph {
    pub theta: u32,
    pub k: u32,
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Sorted neighbor lists with weights.
    adj: Vec<Vec<(usize, u32)>>,
}

pub fn build_graph(corpus: &Corpus, theta: u32, k: u32) -> CollaborationGraph {
    CollaborationWeights::from_corpus(corpus, theta).graph(k)
}

impl CollaborationGraph {
    /// Builds `G_k` from weighted pairs, dropping self-loops and edges with
    /// weight `<= k`. Repeated pairs have their weights summed.
    pub fn from_edges<'a, I>(theta: u32, k: u32, edges: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, u32)>,
    {
        let mut weights: BTreeMap<(&str, &str), u32> = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b {
                continue;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            *weights.entry(key).or_default() += w;
        }
        weights.retain(|_, w| *w > k);
        let mut nodes: Vec<String> = weights
            .keys()
            .flat_map(|&(a, b)| [a.to_string(), b.to_string()])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut adj = vec![Vec::new(); nodes.len()];
        for ((a, b), w) in weights {
            let (ia, ib) = (index[a], index[b]);
            adj[ia].push((ib, w));
            adj[ib].push((ia, w));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        CollaborationGraph {
            theta,
            k,
            nodes,
            index,
            adj,
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn contains(&self, user: &str) -> bool {
        self.index.contains_key(user)
    }

    /// Edges as `(a, b, weight)` with `a < b`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(&str, &str, u32)> {
        let mut out: Vec<(&str, &str, u32)> = Vec::with_capacity(self.edge_count());
        for (i, list) in self.adj.iter().enumerate() {
            for &(j, w) in list {
                if i < j {
                    out.push((&self.nodes[i], &self.nodes[j], w));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u32> {
        let (ia, ib) = (*self.index.get(a)?, *self.index.get(b)?);
        self.adj[ia]
            .binary_search_by_key(&ib, |&(j, _)| j)
            .ok()
            .map(|p| self.adj[ia][p].1)
    }

    pub fn degree(&self, user: &str) -> usize {
        self.index.get(user).map_or(0, |&i| self.adj[i].len())
    }

    /// Number of triangles through `user`, each unordered triple once.
    pub fn triangles(&self, user: &str) -> u64 {
        self.index.get(user).map_or(0, |&i| self.triangles_at(i))
    }

    fn neighbor_ids(&self, i: usize) -> Vec<usize> {
        self.adj[i].iter().map(|&(j, _)| j).collect()
    }

    fn triangles_at(&self, i: usize) -> u64 {
        let mine = self.neighbor_ids(i);
        let twice: usize = mine
            .iter()
            .map(|&j| intersect_count(&mine, self.adj[j].iter().map(|&(n, _)| n)))
            .sum();
        (twice / 2) as u64
    }

    pub fn triangle_counts(&self) -> Vec<u64> {
        (0..self.nodes.len())
            .into_par_iter()
            .map(|i| self.triangles_at(i))
            .collect()
    }

    pub fn maximal_cliques(&self, user: &str) -> Result<u64> {
        match self.index.get(user) {
            Some(&i) => Ok(self.maximal_clique_counts(DEFAULT_CLIQUE_BUDGET)?[i]),
            None => Ok(0),
        }
    }

    /// For every node, the number of maximal cliques of size at least three
    /// that contain it. Fails once any node exceeds `budget`.
    pub fn maximal_clique_counts(&self, budget: u64) -> Result<Vec<u64>> {
        let mut enumerator = CliqueCounter {
            graph: self,
            neighbors: (0..self.nodes.len())
                .map(|i| self.neighbor_ids(i))
                .collect(),
            counts: vec![0; self.nodes.len()],
            budget,
        };
        enumerator.run()?;
        Ok(enumerator.counts)
    }

    pub fn incident_weight_max(&self, user: &str) -> u32 {
        self.index
            .get(user)
            .and_then(|&i| self.adj[i].iter().map(|&(_, w)| w).max())
            .unwrap_or(0)
    }

    pub fn incident_weight_sum(&self, user: &str) -> u64 {
        self.index
            .get(user)
            .map_or(0, |&i| self.adj[i].iter().map(|&(_, w)| u64::from(w)).sum())
    }

    /// `user_a user_b weight` lines, sorted.
    pub fn edge_list_text(&self) -> String {
        let mut out = String::new();
        for (a, b, w) in self.edges() {
            let _ = writeln!(out, "{a} {b} {w}");
        }
        out
    }
}

fn intersect_count(sorted: &[usize], other: impl Iterator<Item = usize>) -> usize {
    let mut n = 0;
    let mut it = sorted.iter().peekable();
    for b in other {
        while let Some(&&a) = it.peek() {
            if a < b {
                it.next();
            } else {
                break;
            }
        }
        if it.peek() == Some(&&b) {
            n += 1;
        }
    }
    n
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Bron–Kerbosch with Tomita pivoting, started from a degeneracy ordering.
struct CliqueCounter<'g> {
    graph: &'g CollaborationGraph,
    neighbors: Vec<Vec<usize>>,
    counts: Vec<u64>,
    budget: u64,
}

impl CliqueCounter<'_> {
    fn run(&mut self) -> Result<()> {
        let order = degeneracy_order(&self.neighbors);
        let mut position = vec![0; order.len()];
        for (p, &v) in order.iter().enumerate() {
            position[v] = p;
        }
        let mut clique = Vec::new();
        for &v in &order {
            let (later, earlier): (Vec<usize>, Vec<usize>) = self.neighbors[v]
                .iter()
                .partition(|&&u| position[u] > position[v]);
            clique.push(v);
            self.expand(&mut clique, later, earlier)?;
            clique.pop();
        }
        Ok(())
    }

    fn expand(
        &mut self,
        clique: &mut Vec<usize>,
        mut cand: Vec<usize>,
        mut excl: Vec<usize>,
    ) -> Result<()> {
        if cand.is_empty() {
            if excl.is_empty() && clique.len() >= 3 {
                for &v in clique.iter() {
                    self.counts[v] += 1;
                    if self.counts[v] > self.budget {
                        return Err(Error::CliqueBudget {
                            node: self.graph.nodes[v].clone(),
                            budget: self.budget,
                        });
                    }
                }
            }
            return Ok(());
        }
        let pivot = cand
            .iter()
            .chain(excl.iter())
            .copied()
            .max_by_key(|&u| {
                (
                    intersect_count(&cand, self.neighbors[u].iter().copied()),
                    std::cmp::Reverse(u),
                )
            })
            .expect("non-empty candidate set");
        let branch: Vec<usize> = {
            let pn = &self.neighbors[pivot];
            cand.iter()
                .copied()
                .filter(|v| pn.binary_search(v).is_err())
                .collect()
        };
        for v in branch {
            let nv = &self.neighbors[v];
            let next_cand = intersect(&cand, nv);
            let next_excl = intersect(&excl, nv);
            clique.push(v);
            self.expand(clique, next_cand, next_excl)?;
            clique.pop();
            if let Ok(p) = cand.binary_search(&v) {
                cand.remove(p);
            }
            if let Err(p) = excl.binary_search(&v) {
                excl.insert(p, v);
            }
        }
        Ok(())
    }
}

/// Repeatedly removes a minimum-degree vertex (ties by lowest index).
fn degeneracy_order(neighbors: &[Vec<usize>]) -> Vec<usize> {
    let n = neighbors.len();
    let mut degree: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<std::collections::BTreeSet<usize>> =
        vec![std::collections::BTreeSet::new(); max_deg + 1];
    for (v, &d) in degree.iter().enumerate() {
        buckets[d].insert(v);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut lowest = 0;
    for _ in 0..n {
        lowest = lowest.min(max_deg);
        while buckets[lowest].is_empty() {
            lowest += 1;
        }
        let v = buckets[lowest].pop_first().expect("bucket not empty");
        removed[v] = true;
        order.push(v);
        for &u in &neighbors[v] {
            if !removed[u] {
                let d = degree[u];
                buckets[d].remove(&u);
                degree[u] = d - 1;
                buckets[d - 1].insert(u);
                lowest = lowest.min(d - 1);
            }
        }
    }
    order
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocialConfig {
    pub theta: u32,
    pub k_grid: Vec<u32>,
    pub clique_budget: u64,
}

impl Default for SocialConfig {
    fn default() -> Self {
        SocialConfig {
            theta: DEFAULT_THETA,
            k_grid: DEFAULT_K_GRID.to_vec(),
            clique_budget: DEFAULT_CLIQUE_BUDGET,
        }
    }
}

pub fn social_feature_names(k_grid: &[u32]) -> Vec<String> {
    let mut names = Vec::with_capacity(3 * k_grid.len() + 2);
    for metric in ["degree", "triangles", "max_cliques"] {
        names.extend(k_grid.iter().map(|k| format!("{metric}_k{k}")));
    }
    names.push("edge_weight_max".into());
    names.push("edge_weight_sum".into());
    names
}

/// Social feature rows for the users that appear in at least one graph.
/// Everyone else gets zeros (see [`SocialFeatures::row`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SocialFeatures {
    pub names: Vec<String>,
    rows: HashMap<String, Vec<f64>>,
}

impl SocialFeatures {
    pub fn row(&self, user: &str) -> Vec<f64> {
        self.rows
            .get(user)
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.names.len()])
    }
}

pub fn social_features(corpus: &Corpus, config: &SocialConfig) -> Result<SocialFeatures> {
    let names = social_feature_names(&config.k_grid);
    let grid = config.k_grid.len();
    let weights = CollaborationWeights::from_corpus(corpus, config.theta);
    let mut rows: HashMap<String, Vec<f64>> = HashMap::new();
    for (gi, &k) in config.k_grid.iter().enumerate() {
        let graph = weights.graph(k);
        let triangles = graph.triangle_counts();
        let cliques = graph.maximal_clique_counts(config.clique_budget)?;
        for (i, user) in graph.nodes().iter().enumerate() {
            let row = rows
                .entry(user.clone())
                .or_insert_with(|| vec![0.0; names.len()]);
            row[gi] = graph.adj[i].len() as f64;
            row[grid + gi] = triangles[i] as f64;
            row[2 * grid + gi] = cliques[i] as f64;
        }
    }
    let base = weights.graph(0);
    for (user, row) in rows.iter_mut() {
        row[3 * grid] = f64::from(base.incident_weight_max(user));
        row[3 * grid + 1] = base.incident_weight_sum(user) as f64;
    }
    Ok(SocialFeatures { names, rows })
}

/// Degree distribution over nodes and weight distribution over edges.
pub fn graph_cdf_export(graph: &CollaborationGraph) -> CdfTable {
    let degrees: Vec<f64> = graph.adj.iter().map(|l| l.len() as f64).collect();
    let weights: Vec<f64> = graph.edges().iter().map(|e| f64::from(e.2)).collect();
    let mut table = CdfTable::default();
    table.push_series("degree", &degrees);
    table.push_series("edge_weight", &weights);
    table
}
