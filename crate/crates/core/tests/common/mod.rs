//! Brute-force oracles and helpers shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use trollspot::social::CollaborationGraph;

pub fn node_name(i: usize) -> String {
    format!("n{i:02}")
}

/// Erdős–Rényi graph on `n` nodes as an adjacency matrix.
pub fn random_adjacency(n: usize, p: f64, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    adj
}

pub fn graph_from_adjacency(adj: &[Vec<bool>]) -> CollaborationGraph {
    let names: Vec<String> = (0..adj.len()).map(node_name).collect();
    let mut edges = Vec::new();
    for i in 0..adj.len() {
        for j in i + 1..adj.len() {
            if adj[i][j] {
                edges.push((names[i].as_str(), names[j].as_str(), 1u32));
            }
        }
    }
    CollaborationGraph::from_edges(2, 0, edges)
}

fn is_clique(adj: &[Vec<bool>], members: &[usize]) -> bool {
    members
        .iter()
        .enumerate()
        .all(|(x, &i)| members[x + 1..].iter().all(|&j| adj[i][j]))
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1 << n)).map(move |mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
}

/// Per-node triangle counts by enumerating all 3-subsets.
pub fn brute_triangles(adj: &[Vec<bool>]) -> Vec<u64> {
    let n = adj.len();
    let mut counts = vec![0; n];
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if adj[a][b] && adj[a][c] && adj[b][c] {
                    counts[a] += 1;
                    counts[b] += 1;
                    counts[c] += 1;
                }
            }
        }
    }
    counts
}

/// Per-node counts of maximal cliques with at least three nodes, by testing
/// every vertex subset.
pub fn brute_maximal_cliques(adj: &[Vec<bool>]) -> Vec<u64> {
    let n = adj.len();
    let mut counts = vec![0; n];
    for members in subsets(n) {
        if members.len() < 3 || !is_clique(adj, &members) {
            continue;
        }
        let extendable =
            (0..n).any(|v| !members.contains(&v) && members.iter().all(|&m| adj[m][v]));
        if !extendable {
            for &m in &members {
                counts[m] += 1;
            }
        }
    }
    counts
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
pub fn brute_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if positive[i] && !positive[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Best mean Jaccard over all assignments of found clusters to planted ones.
pub fn best_matching<F: Fn(usize, usize) -> f64>(
    planted: usize,
    found: usize,
    score: F,
) -> (f64, Vec<usize>) {
    fn go<F: Fn(usize, usize) -> f64>(
        k: usize,
        planted: usize,
        found: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        score: &F,
        best: &mut (f64, Vec<usize>),
    ) {
        if k == planted {
            let total: f64 = current.iter().enumerate().map(|(p, &f)| score(p, f)).sum();
            if total > best.0 {
                *best = (total, current.clone());
            }
            return;
        }
        for f in 0..found {
            if !used[f] {
                used[f] = true;
                current.push(f);
                go(k + 1, planted, found, used, current, score, best);
                current.pop();
                used[f] = false;
            }
        }
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    go(
        0,
        planted,
        found,
        &mut vec![false; found],
        &mut Vec::new(),
        &score,
        &mut best,
    );
    (best.0 / planted as f64, best.1)
}

/// SHA-256 of every file under `root`, keyed by relative path.
pub fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let bytes = std::fs::read(&path).unwrap();
                let digest = Sha256::digest(&bytes);
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, hex);
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
