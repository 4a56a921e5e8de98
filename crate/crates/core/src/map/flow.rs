//! Dinic max-flow over `f64` capacities.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    residual: f64,
    rev: usize,
}

/// Directed network with non-negative finite capacities.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    graph: Vec<Vec<Arc>>,
    source: usize,
    sink: usize,
    max_capacity: f64,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        assert!(
            source != sink && source < nodes && sink < nodes,
            "invalid terminals"
        );
        FlowNetwork {
            graph: vec![Vec::new(); nodes],
            source,
            sink,
            max_capacity: 0.0,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.len()
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64) {
        assert!(
            capacity.is_finite() && capacity >= 0.0,
            "capacity must be finite and non-negative"
        );
        if capacity == 0.0 {
            return;
        }
        self.max_capacity = self.max_capacity.max(capacity);
        let rf = self.graph[to].len() + usize::from(from == to);
        let rt = self.graph[from].len();
        self.graph[from].push(Arc {
            to,
            residual: capacity,
            rev: rf,
        });
        self.graph[to].push(Arc {
            to: from,
            residual: 0.0,
            rev: rt,
        });
    }

    fn eps(&self) -> f64 {
        1e-12 * self.max_capacity.max(1.0)
    }

    fn levels(&self) -> Option<Vec<usize>> {
        let eps = self.eps();
        let mut level = vec![usize::MAX; self.graph.len()];
        level[self.source] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(v) = queue.pop_front() {
            for a in &self.graph[v] {
                if a.residual > eps && level[a.to] == usize::MAX {
                    level[a.to] = level[v] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        (level[self.sink] != usize::MAX).then_some(level)
    }

    fn augment(&mut self, level: &[usize], iter: &mut [usize]) -> f64 {
        let eps = self.eps();
        // Iterative DFS along the level graph; `path` holds (node, arc index).
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut v = self.source;
        loop {
            if v == self.sink {
                let push = path
                    .iter()
                    .map(|&(u, k)| self.graph[u][k].residual)
                    .fold(f64::INFINITY, f64::min);
                for &(u, k) in &path {
                    let Arc { to, rev, .. } = self.graph[u][k];
                    self.graph[u][k].residual -= push;
                    self.graph[to][rev].residual += push;
                }
                return push;
            }
            let mut advanced = false;
            while iter[v] < self.graph[v].len() {
                let a = self.graph[v][iter[v]];
                if a.residual > eps && level[a.to] == level[v] + 1 {
                    path.push((v, iter[v]));
                    v = a.to;
                    advanced = true;
                    break;
                }
                iter[v] += 1;
            }
            if !advanced {
                match path.pop() {
                    Some((u, _)) => {
                        iter[u] += 1;
                        v = u;
                    }
                    None => return 0.0,
                }
            }
        }
    }

    /// Runs Dinic's algorithm to completion and returns the flow value.
    pub fn max_flow(&mut self) -> f64 {
        let mut total = 0.0;
        while let Some(level) = self.levels() {
            let mut iter = vec![0; self.graph.len()];
            loop {
                let f = self.augment(&level, &mut iter);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Nodes reachable from the source in the residual graph.
    pub fn source_side(&self) -> Vec<bool> {
        let eps = self.eps();
        let mut seen = vec![false; self.graph.len()];
        seen[self.source] = true;
        let mut stack = vec![self.source];
        while let Some(v) = stack.pop() {
            for a in &self.graph[v] {
                if a.residual > eps && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }

    /// Nodes that can reach the sink in the residual graph.
    pub fn sink_side(&self) -> Vec<bool> {
        let eps = self.eps();
        let mut seen = vec![false; self.graph.len()];
        seen[self.sink] = true;
        let mut stack = vec![self.sink];
        while let Some(v) = stack.pop() {
            // u -> v has residual iff the paired reverse arc stored at v says so
            for a in &self.graph[v] {
                let back = self.graph[a.to][a.rev];
                if back.residual > eps && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }
}
