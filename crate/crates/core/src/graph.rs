//! Labeled multigraphs with structural metrics, dense and sparse spectral
//! analysis, and the Ramanujan bound check.
//!
//! Conventions: in undirected graphs each edge is stored once with the
//! endpoint labels ordered; loops are permitted and contribute 2 to the
//! degree but only their multiplicity to the adjacency diagonal, so the
//! matrix trace equals the loop count.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{splitmix64, Error};

/// Vertex count above which the dense eigensolver refuses and callers are
/// expected to use the sparse path.
pub const DENSE_SPECTRUM_CAP: usize = 3000;

#[derive(Clone, Debug)]
pub struct LabeledMultigraph {
    directed: bool,
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<(usize, usize)>,
}

/// Output of `analyze`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub regular_degree: Option<u64>,
    pub connected: bool,
    pub bipartite: bool,
    pub girth: Option<u64>,
    pub loop_count: usize,
    pub multi_edge_count: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl LabeledMultigraph {
    pub fn new(directed: bool) -> Self {
        LabeledMultigraph {
            directed,
            labels: Vec::new(),
            index: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    /// Rebuilds a graph from explicit parts (used by the JSON loader).
    pub fn from_parts(
        directed: bool,
        vertices: Vec<String>,
        edges: Vec<(String, String)>,
    ) -> Result<Self, Error> {
        let mut g = LabeledMultigraph::new(directed);
        for v in vertices {
            g.add_vertex(&v);
        }
        for (u, v) in edges {
            if !g.index.contains_key(&u) || !g.index.contains_key(&v) {
                return Err(Error::Parameter("edge endpoint is not a listed vertex"));
            }
            g.add_edge(&u, &v);
        }
        Ok(g)
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn add_vertex(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(String::from(label));
        self.index.insert(String::from(label), i);
        i
    }

    /// Adds one edge (one arc when directed), creating endpoints as needed.
    pub fn add_edge(&mut self, u: &str, v: &str) {
        let ui = self.add_vertex(u);
        let vi = self.add_vertex(v);
        if self.directed || ui <= vi {
            self.edges.push((ui, vi));
        } else {
            self.edges.push((vi, ui));
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn contains_vertex(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    /// Neighbor labels of a vertex with multiplicity, sorted. For directed
    /// graphs these are the out-neighbors.
    pub fn neighbor_labels(&self, label: &str) -> Result<Vec<String>, Error> {
        let &v = self
            .index
            .get(label)
            .ok_or(Error::Parameter("unknown vertex label"))?;
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push(self.labels[b].clone());
            }
            if !self.directed && b == v && a != b {
                out.push(self.labels[a].clone());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Underlying undirected adjacency used for connectivity and coloring.
    fn adjacency_symmetric(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            if u != v {
                adj[v].push(u);
            }
        }
        adj
    }

    fn degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.labels.len()];
        for &(u, v) in &self.edges {
            if self.directed {
                deg[u] += 1;
            } else if u == v {
                deg[u] += 2;
            } else {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
        deg
    }

    /// Two-coloring of the underlying graph, if one exists. Loops make a
    /// graph non-bipartite.
    fn bipartition(&self) -> Option<Vec<bool>> {
        if self.edges.iter().any(|&(u, v)| u == v) {
            return None;
        }
        let n = self.labels.len();
        let adj = self.adjacency_symmetric();
        let mut color = vec![None; n];
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            let mut queue = vec![start];
            while let Some(v) = queue.pop() {
                let cv = color[v].expect("colored before queueing");
                for &w in &adj[v] {
                    match color[w] {
                        None => {
                            color[w] = Some(!cv);
                            queue.push(w);
                        }
                        Some(cw) => {
                            if cw == cv {
                                return None;
                            }
                        }
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap_or(false)).collect())
    }

    fn is_connected(&self) -> bool {
        let n = self.labels.len();
        if n == 0 {
            return false;
        }
        let adj = self.adjacency_symmetric();
        let mut seen = vec![false; n];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push(w);
                }
            }
        }
        count == n
    }

    /// Girth of the underlying multigraph: 1 with loops, 2 with multiple
    /// edges, otherwise shortest cycle by truncated BFS from every vertex.
    fn girth(&self) -> Option<u64> {
        if self.edges.iter().any(|&(u, v)| u == v) {
            return Some(1);
        }
        let mut seen = BTreeMap::new();
        for &(u, v) in &self.edges {
            let key = if u <= v { (u, v) } else { (v, u) };
            if *seen.entry(key).and_modify(|c| *c += 1).or_insert(1) == 2 {
                return Some(2);
            }
        }
        // simple underlying graph from here on
        let n = self.labels.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in seen.keys() {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut best: Option<u64> = None;
        let mut dist = vec![u64::MAX; n];
        let mut parent = vec![usize::MAX; n];
        for start in 0..n {
            dist.iter_mut().for_each(|d| *d = u64::MAX);
            parent.iter_mut().for_each(|q| *q = usize::MAX);
            dist[start] = 0;
            let mut queue = alloc::collections::VecDeque::new();
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                if let Some(b) = best {
                    // cycles through `start` longer than the bound are moot
                    if 2 * dist[v] + 1 >= b {
                        continue;
                    }
                }
                for &w in &adj[v] {
                    if dist[w] == u64::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        let cyc = dist[v] + dist[w] + 1;
                        if best.is_none_or(|b| cyc < b) {
                            best = Some(cyc);
                        }
                    }
                }
            }
        }
        best
    }

    /// Structural metrics in one pass of BFS-based scans.
    pub fn analyze(&self) -> Result<StructureReport, Error> {
        if self.labels.is_empty() {
            return Err(Error::Parameter("empty graph"));
        }
        let degs = self.degrees();
        let regular_degree = if degs.windows(2).all(|w| w[0] == w[1]) {
            Some(degs[0])
        } else {
            None
        };
        let loop_count = self.edges.iter().filter(|&&(u, v)| u == v).count();
        let mut mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(u, v) in &self.edges {
            // parallel arcs in directed graphs need matching direction
            let key = if self.directed || u <= v {
                (u, v)
            } else {
                (v, u)
            };
            *mult.entry(key).or_insert(0) += 1;
        }
        let multi_edge_count = mult.values().filter(|&&c| c > 1).count();
        Ok(StructureReport {
            regular_degree,
            connected: self.is_connected(),
            bipartite: self.bipartition().is_some(),
            girth: self.girth(),
            loop_count,
            multi_edge_count,
        })
    }

    /// Symmetric adjacency matrix; multiplicities enter off-diagonal
    /// entries, loops enter the diagonal once per loop.
    fn dense_adjacency(&self) -> Result<Vec<f64>, Error> {
        if self.directed {
            return Err(Error::Parameter("spectrum needs an undirected graph"));
        }
        let n = self.labels.len();
        let mut m = vec![0.0f64; n * n];
        for &(u, v) in &self.edges {
            if u == v {
                m[u * n + u] += 1.0;
            } else {
                m[u * n + v] += 1.0;
                m[v * n + u] += 1.0;
            }
        }
        Ok(m)
    }

    /// All adjacency eigenvalues by cyclic Jacobi rotations, ascending.
    pub fn full_spectrum(&self) -> Result<Vec<f64>, Error> {
        let n = self.labels.len();
        if n == 0 {
            return Err(Error::Parameter("empty graph"));
        }
        if n > DENSE_SPECTRUM_CAP {
            return Err(Error::TooLarge(
                "dense spectrum capped; use second_eigenvalue_sparse",
            ));
        }
        let mut m = self.dense_adjacency()?;
        Ok(jacobi_eigenvalues(&mut m, n))
    }

    /// Largest |eigenvalue| over the space orthogonal to the all-ones
    /// vector (and the two-coloring sign vector when bipartite), by power
    /// iteration on A^2 with explicit deflation.
    pub fn second_eigenvalue_sparse(&self, tol: f64) -> Result<f64, Error> {
        if self.directed {
            return Err(Error::Parameter("spectrum needs an undirected graph"));
        }
        if tol <= 0.0 {
            return Err(Error::Parameter("tolerance must be positive"));
        }
        let report = self.analyze()?;
        if report.regular_degree.is_none() || !report.connected {
            return Err(Error::Parameter(
                "sparse second eigenvalue needs a connected regular graph",
            ));
        }
        let n = self.labels.len();
        let norm_inv = 1.0 / libm::sqrt(n as f64);
        let mut deflate: Vec<Vec<f64>> = vec![vec![norm_inv; n]];
        if let Some(color) = self.bipartition() {
            deflate.push(
                color
                    .iter()
                    .map(|&c| if c { -norm_inv } else { norm_inv })
                    .collect(),
            );
        }
        // adjacency in compressed form
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        {
            let mut mult: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for &(u, v) in &self.edges {
                *mult.entry((u, v)).or_insert(0.0) += 1.0;
            }
            for (&(u, v), &w) in &mult {
                adj[u].push((v, w));
                if u != v {
                    adj[v].push((u, w));
                }
            }
        }
        let matvec = |x: &[f64], out: &mut [f64]| {
            out.iter_mut().for_each(|o| *o = 0.0);
            for (u, row) in adj.iter().enumerate() {
                let xu = x[u];
                for &(v, w) in row {
                    out[v] += w * xu;
                }
            }
        };
        let orth = |x: &mut [f64]| {
            for d in &deflate {
                let dot: f64 = x.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(d.iter()).for_each(|(a, b)| *a -= dot * b);
            }
        };
        // deterministic pseudo-random start vector
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let mut st = 0x5eed_0000u64 ^ (i as u64);
                (splitmix64(&mut st) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        orth(&mut v);
        let vnorm = libm::sqrt(v.iter().map(|a| a * a).sum::<f64>());
        if vnorm == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|a| *a /= vnorm);
        let mut tmp = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut prev_est = f64::INFINITY;
        let mut mu = 0.0f64;
        let mut residual = f64::INFINITY;
        let mut stable = 0u32;
        for _ in 0..200_000u32 {
            matvec(&v, &mut tmp);
            matvec(&tmp, &mut w);
            orth(&mut w);
            mu = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>();
            residual = libm::sqrt(
                v.iter()
                    .zip(w.iter())
                    .map(|(a, b)| (b - mu * a) * (b - mu * a))
                    .sum::<f64>(),
            );
            let wnorm = libm::sqrt(w.iter().map(|a| a * a).sum::<f64>());
            if wnorm == 0.0 {
                return Ok(0.0);
            }
            v.iter_mut().zip(w.iter()).for_each(|(a, b)| *a = b / wnorm);
            let est = libm::sqrt(if mu > 0.0 { mu } else { 0.0 });
            if (est - prev_est).abs() <= tol * 1e-2 {
                stable += 1;
                if stable >= 10 && residual <= tol.max(1e-9) * 100.0 {
                    return Ok(est);
                }
            } else {
                stable = 0;
            }
            prev_est = est;
        }
        Err(Error::NoConvergence {
            estimate: libm::sqrt(if mu > 0.0 { mu } else { 0.0 }),
            residual,
        })
    }

    /// Ramanujan bound check for an (l+1)-regular graph: every eigenvalue
    /// apart from a single l+1 (and a single -(l+1) when bipartite) must
    /// satisfy |lambda| <= 2 sqrt(l) + tol.
    pub fn is_ramanujan(&self, l: u64, tol: f64) -> Result<bool, Error> {
        let report = self.analyze()?;
        if report.regular_degree != Some(l + 1) {
            return Err(Error::Parameter("graph is not (l+1)-regular"));
        }
        let bound = 2.0 * libm::sqrt(l as f64) + tol;
        let d = (l + 1) as f64;
        if self.labels.len() <= DENSE_SPECTRUM_CAP {
            let mut eigs = self.full_spectrum()?;
            // drop one trivial top eigenvalue l+1
            remove_close(&mut eigs, d)?;
            // and one -(l+1) when the graph is bipartite
            if report.bipartite {
                remove_close(&mut eigs, -d)?;
            }
            Ok(eigs.iter().all(|&e| libm::fabs(e) <= bound))
        } else {
            if !report.connected {
                // l+1 appears once per component
                return Ok(false);
            }
            let second = self.second_eigenvalue_sparse(1e-7)?;
            Ok(second <= bound)
        }
    }

    /// Deterministic serialization: vertices sorted by label, edges sorted
    /// lexicographically.
    pub fn export(&self, format: ExportFormat) -> String {
        let mut vertices: Vec<&String> = self.labels.iter().collect();
        vertices.sort();
        let mut edges: Vec<(&String, &String)> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (lu, lv) = (&self.labels[u], &self.labels[v]);
                if self.directed || lu <= lv {
                    (lu, lv)
                } else {
                    (lv, lu)
                }
            })
            .collect();
        edges.sort();
        match format {
            ExportFormat::Json => {
                let mut out = String::from("{\"directed\":");
                out.push_str(if self.directed { "true" } else { "false" });
                out.push_str(",\"vertices\":[");
                for (i, v) in vertices.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&json_string(v));
                }
                out.push_str("],\"edges\":[");
                for (i, (u, v)) in edges.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&format!("[{},{}]", json_string(u), json_string(v)));
                }
                out.push_str("]}");
                out
            }
            ExportFormat::Dot => {
                let (header, arrow) = if self.directed {
                    ("digraph G {", " -> ")
                } else {
                    ("graph G {", " -- ")
                };
                let mut out = String::from(header);
                out.push('\n');
                for v in &vertices {
                    out.push_str(&format!("  \"{v}\";\n"));
                }
                for (u, v) in &edges {
                    out.push_str(&format!("  \"{u}\"{arrow}\"{v}\";\n"));
                }
                out.push_str("}\n");
                out
            }
        }
    }
}

fn remove_close(eigs: &mut Vec<f64>, target: f64) -> Result<(), Error> {
    let mut best = None;
    for (i, &e) in eigs.iter().enumerate() {
        if libm::fabs(e - target) < 1e-6 {
            best = Some(i);
            break;
        }
    }
    match best {
        Some(i) => {
            eigs.remove(i);
            Ok(())
        }
        None => Err(Error::Internal("expected trivial eigenvalue is missing")),
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix in row-major
/// storage; returns eigenvalues sorted ascending. Off-diagonal mass shrinks
/// quadratically once rotations get small, so a fixed sweep cap suffices.
pub(crate) fn jacobi_eigenvalues(m: &mut [f64], n: usize) -> Vec<f64> {
    let idx = |r: usize, c: usize| r * n + c;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for r in 0..n {
            for c in r + 1..n {
                off += m[idx(r, c)] * m[idx(r, c)];
            }
        }
        if off <= 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[idx(p, q)];
                if libm::fabs(apq) < 1e-14 {
                    continue;
                }
                let app = m[idx(p, p)];
                let aqq = m[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                // rotate rows/columns p and q
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[idx(k, p)];
                    let akq = m[idx(k, q)];
                    m[idx(k, p)] = c * akp - s * akq;
                    m[idx(p, k)] = m[idx(k, p)];
                    m[idx(k, q)] = s * akp + c * akq;
                    m[idx(q, k)] = m[idx(k, q)];
                }
                m[idx(p, p)] = app - t * apq;
                m[idx(q, q)] = aqq + t * apq;
                m[idx(p, q)] = 0.0;
                m[idx(q, p)] = 0.0;
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[idx(i, i)]).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    eigs
}
