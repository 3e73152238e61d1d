use std::collections::VecDeque;

/// Maximum-cardinality matching between `X = 0..adj.len()` and
/// `Y = 0..ny` (Hopcroft–Karp). `adj[x]` lists the neighbours of `x`.
///
/// Returns the partner of every `x`, or `None` if `x` is unmatched.
pub fn max_bipartite_matching(adj: &[Vec<usize>], ny: usize) -> Vec<Option<usize>> {
    let nx = adj.len();
    let mut match_x: Vec<Option<usize>> = vec![None; nx];
    let mut match_y: Vec<Option<usize>> = vec![None; ny];
    let mut dist = vec![usize::MAX; nx];
    loop {
        // Layer free X vertices and grow alternating BFS levels.
        let mut queue = VecDeque::new();
        for x in 0..nx {
            if match_x[x].is_none() {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                match match_y[y] {
                    None => found = true,
                    Some(x2) if dist[x2] == usize::MAX => {
                        dist[x2] = dist[x] + 1;
                        queue.push_back(x2);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            return match_x;
        }
        for x in 0..nx {
            if match_x[x].is_none() {
                augment(x, adj, &mut match_x, &mut match_y, &mut dist);
            }
        }
    }
}

fn augment(
    x: usize,
    adj: &[Vec<usize>],
    match_x: &mut [Option<usize>],
    match_y: &mut [Option<usize>],
    dist: &mut [usize],
) -> bool {
    for &y in &adj[x] {
        let ok = match match_y[y] {
            None => true,
            Some(x2) => dist[x2] == dist[x] + 1 && augment(x2, adj, match_x, match_y, dist),
        };
        if ok {
            match_x[x] = Some(y);
            match_y[y] = Some(x);
            return true;
        }
    }
    dist[x] = usize::MAX;
    false
}
