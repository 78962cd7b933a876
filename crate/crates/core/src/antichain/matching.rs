//! Hopcroft-Karp on a bipartite graph given as left adjacency lists.

use std::collections::VecDeque;

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct Matching {
    /// Right partner of each left vertex.
    pub left: Vec<u32>,
    /// Left partner of each right vertex.
    pub right: Vec<u32>,
    pub size: usize,
}

impl Matching {
    pub fn left_partner(&self, u: usize) -> Option<usize> {
        (self.left[u] != NONE).then(|| self.left[u] as usize)
    }

    pub fn right_partner(&self, v: usize) -> Option<usize> {
        (self.right[v] != NONE).then(|| self.right[v] as usize)
    }
}

pub fn hopcroft_karp(adj: &[Vec<u32>], n_right: usize) -> Matching {
    let n_left = adj.len();
    let mut left = vec![NONE; n_left];
    let mut right = vec![NONE; n_right];
    let mut size = 0;
    let mut dist = vec![u32::MAX; n_left];
    let mut it = vec![0usize; n_left];
    loop {
        // layer the free left vertices and alternate along matched edges
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if left[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = right[v as usize];
                if w == NONE {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        if !found {
            break;
        }
        it.iter_mut().for_each(|x| *x = 0);
        for u in 0..n_left {
            if left[u] == NONE && augment(u, adj, &mut dist, &mut it, &mut left, &mut right) {
                size += 1;
            }
        }
    }
    Matching { left, right, size }
}

/// Iterative layered DFS from the free vertex `root`.
fn augment(
    root: usize,
    adj: &[Vec<u32>],
    dist: &mut [u32],
    it: &mut [usize],
    left: &mut [u32],
    right: &mut [u32],
) -> bool {
    let mut stack = vec![root];
    // via[t] joins stack[t] to stack[t + 1] through a matched right vertex
    let mut via: Vec<u32> = Vec::new();
    while let Some(&u) = stack.last() {
        if it[u] < adj[u].len() {
            let v = adj[u][it[u]];
            it[u] += 1;
            let w = right[v as usize];
            if w == NONE {
                left[u] = v;
                right[v as usize] = u as u32;
                for t in (0..via.len()).rev() {
                    let (a, b) = (stack[t], via[t]);
                    left[a] = b;
                    right[b as usize] = a as u32;
                }
                return true;
            }
            if dist[w as usize] == dist[u].wrapping_add(1) {
                stack.push(w as usize);
                via.push(v);
            }
        } else {
            dist[u] = u32::MAX;
            stack.pop();
            via.pop();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_max_matching(adj: &[Vec<u32>], n_right: usize) -> usize {
        fn go(u: usize, adj: &[Vec<u32>], used: &mut Vec<bool>) -> usize {
            if u == adj.len() {
                return 0;
            }
            let mut best = go(u + 1, adj, used);
            for &v in &adj[u] {
                if !used[v as usize] {
                    used[v as usize] = true;
                    best = best.max(1 + go(u + 1, adj, used));
                    used[v as usize] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        // deterministic pseudo-random bipartite graphs
        let mut state = 0x2545_f491_u64;
        for _ in 0..200 {
            let n = 1 + (state % 7) as usize;
            let mut adj = vec![Vec::new(); n];
            for u in 0..n {
                for v in 0..n {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if (state >> 33) % 3 == 0 {
                        adj[u].push(v as u32);
                    }
                }
            }
            let m = hopcroft_karp(&adj, n);
            assert_eq!(m.size, brute_max_matching(&adj, n));
            for u in 0..n {
                if let Some(v) = m.left_partner(u) {
                    assert!(adj[u].contains(&(v as u32)));
                    assert_eq!(m.right_partner(v), Some(u));
                }
            }
        }
    }
}
